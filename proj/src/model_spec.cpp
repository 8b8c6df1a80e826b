#include "lcm/model_spec.hpp"

#include <string>

namespace lcm {

int ModelSpec::num_patterns() const {
    int r = 1;
    for (const auto& resp : responses) r *= resp.categories;
    return r;
}

int ModelSpec::loglinear_dim() const {
    int g = 0;
    for (const auto& resp : responses) g += resp.categories - 1;
    return g + static_cast<int>(pair_scores.size());
}

int ModelSpec::weight_dim() const {
    return (classes - 1) * (num_covariates() + 1);
}

int ModelSpec::param_dim() const {
    return weight_dim() + classes * loglinear_dim();
}

void ModelSpec::validate() const {
    if (classes < 1) throw structural_error("classes must be >= 1");
    if (responses.empty()) throw structural_error("at least one response variable is required");
    for (const auto& resp : responses) {
        if (resp.categories < 2)
            throw structural_error("response '" + resp.name + "' must have >= 2 categories");
    }
    const int n_resp = static_cast<int>(responses.size());
    for (const auto& [a, b] : pair_scores) {
        if (a < 0 || a >= n_resp || b < 0 || b >= n_resp)
            throw structural_error("pair_scores references a response index out of range");
        if (a == b) throw structural_error("pair_scores must reference two distinct responses");
        if (responses[a].categories != responses[b].categories)
            throw structural_error("pair_scores requires equal category counts: '" +
                                   responses[a].name + "' vs '" + responses[b].name + "'");
    }
    if (num_patterns() < 2) throw structural_error("pattern space must have r >= 2");
}

Vec Params::stacked() const {
    int total = static_cast<int>(beta.size());
    for (const auto& block : theta) total += static_cast<int>(block.size());
    Vec psi(total);
    int at = 0;
    psi.head(beta.size()) = beta;
    at += static_cast<int>(beta.size());
    for (const auto& block : theta) {
        psi.segment(at, block.size()) = block;
        at += static_cast<int>(block.size());
    }
    return psi;
}

Params Params::from_stacked(const ModelSpec& spec, const Vec& psi) {
    const int k = spec.weight_dim();
    const int g = spec.loglinear_dim();
    if (psi.size() != spec.param_dim())
        throw structural_error("parameter vector has length " + std::to_string(psi.size()) +
                               ", expected " + std::to_string(spec.param_dim()));
    Params out;
    out.beta = psi.head(k);
    out.theta.resize(spec.classes);
    for (int j = 0; j < spec.classes; ++j) out.theta[j] = psi.segment(k + j * g, g);
    return out;
}

}  // namespace lcm
