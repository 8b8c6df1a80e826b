#include "lcm/misfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"

namespace lcm {

Vec expected_responses(const ModelSpec& true_spec, const Params& true_params,
                       const Vec& covariates) {
    const Mat response_design = build_response_design(true_spec);
    const Mat mixture = mixture_matrix(response_design, true_params.theta);
    const Vec pi = class_weights(build_class_design(covariates, true_spec), true_params.beta);
    return marginal_probs(mixture, pi);
}

std::vector<int> align_classes(const ModelSpec& spec, const Params& fitted,
                               const Params& reference) {
    const Mat response_design = build_response_design(spec);
    const Mat q_fit = mixture_matrix(response_design, fitted.theta);
    const Mat q_ref = mixture_matrix(response_design, reference.theta);
    const int c = spec.classes;

    std::vector<int> perm(c);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int j = 0; j < c; ++j)
            cost += 0.5 * (q_fit.col(perm[j]) - q_ref.col(j)).lpNorm<1>();
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Params relabel(const ModelSpec& spec, const Params& params, const std::vector<int>& perm) {
    const int c = spec.classes;
    const int v = spec.num_covariates();
    const int width = v + 1;
    if (static_cast<int>(perm.size()) != c) throw structural_error("permutation size mismatch");

    // Per-class logit coefficient blocks; class 0 is the zero reference.
    auto block = [&](int j) -> Vec {
        if (j == 0) return Vec::Zero(width);
        return params.beta.segment((j - 1) * width, width);
    };

    Params out;
    out.theta.resize(c);
    for (int j = 0; j < c; ++j) out.theta[j] = params.theta[perm[j]];
    out.beta = Vec::Zero(spec.weight_dim());
    const Vec ref = block(perm[0]);
    for (int j = 1; j < c; ++j) out.beta.segment((j - 1) * width, width) = block(perm[j]) - ref;
    return out;
}

MisfitResult fit_expected(const MisfitScenario& scenario, const OptimOptions& opts) {
    scenario.true_spec.validate();
    scenario.candidate_spec.validate();
    if (scenario.true_spec.num_patterns() != scenario.candidate_spec.num_patterns())
        throw structural_error("true and candidate models have different pattern spaces");
    if (scenario.configs.empty()) throw structural_error("scenario has no covariate configurations");

    // Expected data: each configuration's frequency vector is its weight
    // times the true-model pattern distribution.
    Dataset data;
    double true_on_true = 0.0;
    for (const auto& cfg : scenario.configs) {
        const Vec p = expected_responses(scenario.true_spec, scenario.true_params, cfg.covariates);
        data.groups.push_back({cfg.covariates, cfg.weight * p});
        true_on_true += cfg.weight * p.dot(p.array().log().matrix());
    }

    const FitResult fitted = fit(scenario.candidate_spec, data, std::nullopt, opts);

    MisfitResult res;
    res.expected_loglik_candidate = fitted.loglik_final;
    res.expected_loglik_true = true_on_true;
    res.n_iter = fitted.n_iter;
    res.converged = fitted.converged;
    res.trace = fitted.trace;

    // Bias table only when the parameter layouts coincide.
    const bool same_layout =
        scenario.candidate_spec.classes == scenario.true_spec.classes &&
        scenario.candidate_spec.weight_dim() == scenario.true_spec.weight_dim() &&
        scenario.candidate_spec.loglinear_dim() == scenario.true_spec.loglinear_dim();
    if (same_layout) {
        const auto perm = align_classes(scenario.candidate_spec, fitted.params_hat,
                                        scenario.true_params);
        res.pseudo_true = relabel(scenario.candidate_spec, fitted.params_hat, perm);
        res.bias = res.pseudo_true.stacked() - scenario.true_params.stacked();
    } else {
        res.pseudo_true = fitted.params_hat;
    }
    return res;
}

}  // namespace lcm
