#include "lcm/design.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace lcm {

int pattern_index(const std::vector<int>& categories, const ModelSpec& spec) {
    const int n_resp = static_cast<int>(spec.responses.size());
    if (static_cast<int>(categories.size()) != n_resp)
        throw structural_error("pattern has " + std::to_string(categories.size()) +
                               " entries, expected " + std::to_string(n_resp));
    int index = 0;
    for (int t = 0; t < n_resp; ++t) {
        const int m = spec.responses[t].categories;
        if (categories[t] < 0 || categories[t] >= m)
            throw structural_error("category " + std::to_string(categories[t]) +
                                   " out of range for response '" + spec.responses[t].name + "'");
        index = index * m + categories[t];
    }
    return index;
}

std::vector<int> pattern_at(int index, const ModelSpec& spec) {
    const int n_resp = static_cast<int>(spec.responses.size());
    if (index < 0 || index >= spec.num_patterns())
        throw structural_error("pattern index out of range");
    std::vector<int> cats(n_resp);
    for (int t = n_resp - 1; t >= 0; --t) {
        const int m = spec.responses[t].categories;
        cats[t] = index % m;
        index /= m;
    }
    return cats;
}

Mat build_response_design(const ModelSpec& spec) {
    spec.validate();
    const int r = spec.num_patterns();
    const int g = spec.loglinear_dim();
    Mat design = Mat::Zero(r, g);
    for (int u = 0; u < r; ++u) {
        const std::vector<int> cats = pattern_at(u, spec);
        int col = 0;
        for (std::size_t t = 0; t < spec.responses.size(); ++t) {
            const int m = spec.responses[t].categories;
            for (int cat = 1; cat < m; ++cat) design(u, col++) = cats[t] == cat ? 1.0 : 0.0;
        }
        for (const auto& [a, b] : spec.pair_scores) {
            const int m = spec.responses[a].categories;
            design(u, col++) = 1.0 - std::abs(cats[a] - cats[b]) / static_cast<double>(m - 1);
        }
    }
    Eigen::JacobiSVD<Mat> svd(design);
    const double tol = 1e-10 * svd.singularValues()(0);
    if ((svd.singularValues().array() > tol).count() < g)
        throw structural_error("response design matrix is rank deficient; "
                               "check pair_scores for redundant columns");
    return design;
}

Mat build_class_design(const Vec& covariates, const ModelSpec& spec) {
    const int v = spec.num_covariates();
    if (covariates.size() != v)
        throw structural_error("covariate vector has length " + std::to_string(covariates.size()) +
                               ", expected " + std::to_string(v));
    const int c = spec.classes;
    Mat design = Mat::Zero(c, spec.weight_dim());
    for (int j = 1; j < c; ++j) {
        const int at = (j - 1) * (v + 1);
        design(j, at) = 1.0;
        design.row(j).segment(at + 1, v) = covariates.transpose();
    }
    return design;
}

}  // namespace lcm
