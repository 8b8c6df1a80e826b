#include "lcm/model_core.hpp"

#include <cmath>
#include <string>

#include "lcm/design.hpp"

namespace lcm {

namespace {

Vec softmax(const Vec& logits) {
    const Vec shifted = logits.array() - logits.maxCoeff();
    const Vec expv = shifted.array().exp();
    return expv / expv.sum();
}

}  // namespace

Vec class_weights(const Mat& class_design, const Vec& beta) {
    if (class_design.cols() != beta.size())
        throw structural_error("class design has " + std::to_string(class_design.cols()) +
                               " columns, beta has length " + std::to_string(beta.size()));
    return softmax(class_design * beta);
}

Vec response_probs(const Mat& response_design, const Vec& theta_j) {
    if (response_design.cols() != theta_j.size())
        throw structural_error("response design has " + std::to_string(response_design.cols()) +
                               " columns, theta block has length " + std::to_string(theta_j.size()));
    return softmax(response_design * theta_j);
}

Mat mixture_matrix(const Mat& response_design, const std::vector<Vec>& theta) {
    if (theta.empty()) throw structural_error("mixture_matrix needs at least one theta block");
    Mat mixture(response_design.rows(), static_cast<Eigen::Index>(theta.size()));
    for (std::size_t j = 0; j < theta.size(); ++j)
        mixture.col(static_cast<Eigen::Index>(j)) = response_probs(response_design, theta[j]);
    return mixture;
}

Vec marginal_probs(const Mat& mixture, const Vec& pi) {
    if (mixture.cols() != pi.size())
        throw structural_error("mixture matrix and class weights do not conform");
    return mixture * pi;
}

Mat omega(const Vec& v) {
    return Mat(v.asDiagonal()) - v * v.transpose();
}

double loglik(const ModelSpec& spec, const Params& params, const Dataset& data) {
    const Mat response_design = build_response_design(spec);
    const Mat mixture = mixture_matrix(response_design, params.theta);
    double total = 0.0;
    if (!data.grouped()) {
        for (std::size_t i = 0; i < data.subjects.size(); ++i) {
            const auto& subj = data.subjects[i];
            const Vec pi = class_weights(build_class_design(subj.covariates, spec), params.beta);
            const double p_obs = mixture.row(subj.pattern) * pi;
            if (!(p_obs > 0.0))
                throw numeric_error("observed pattern probability underflowed for subject " +
                                    std::to_string(i));
            total += std::log(p_obs);
        }
    } else {
        for (std::size_t i = 0; i < data.groups.size(); ++i) {
            const auto& grp = data.groups[i];
            const Vec pi = class_weights(build_class_design(grp.covariates, spec), params.beta);
            const Vec p = marginal_probs(mixture, pi);
            for (int u = 0; u < p.size(); ++u) {
                if (grp.pattern_freq(u) == 0.0) continue;
                if (!(p(u) > 0.0))
                    throw numeric_error("pattern probability underflowed in group " +
                                        std::to_string(i));
                total += grp.pattern_freq(u) * std::log(p(u));
            }
        }
    }
    return total;
}

double Dataset::total_weight() const {
    if (!grouped()) return static_cast<double>(subjects.size());
    double total = 0.0;
    for (const auto& grp : groups) total += grp.pattern_freq.sum();
    return total;
}

}  // namespace lcm
