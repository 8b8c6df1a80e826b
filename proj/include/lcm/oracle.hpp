#pragma once

#include <functional>

#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

// Brute-force verification tools: finite-difference derivatives and
// exhaustive-enumeration expectations. Built as a separate library so the
// main one carries no test-only weight.

namespace lcm::oracle {

struct FDConfig {
    double step = 1e-5;
    bool richardson = false;
};

/// Central differences per coordinate; Richardson extrapolation combines
/// steps h and h/2 when enabled.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& psi,
                const FDConfig& cfg = {});

/// Central second differences, symmetrized.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& psi,
               const FDConfig& cfg = {});

/// sum_u p_u * statistic(u) over all r response patterns at one covariate
/// configuration.
double enumerate_expectation(const ModelSpec& spec, const Params& params,
                             const Vec& covariates,
                             const std::function<double(int)>& statistic,
                             long enumeration_cap = 1000000L);

/// Matrix-valued variant (covers vectors as single-column matrices).
Mat enumerate_expectation_matrix(const ModelSpec& spec, const Params& params,
                                 const Vec& covariates,
                                 const std::function<Mat(int)>& statistic,
                                 long enumeration_cap = 1000000L);

}  // namespace lcm::oracle
