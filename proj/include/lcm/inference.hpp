#pragma once

#include <utility>
#include <vector>

#include "lcm/dataset.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// Per-subject basis vector t_i = A_i' e_{u(i)} and the probability of the
/// observed pattern, computed without forming A_i.
struct SubjectBasis {
    Vec t;           // length k + c*g
    double p_tilde;  // in (0, 1)
};

struct InfoMatrix {
    enum class Kind { hybrid, observed, expected };
    Mat mat;  // (k+cg) x (k+cg), symmetric
    Kind kind = Kind::hybrid;
};

struct RankDiagnosis {
    bool positive_definite = false;
    int rank = 0;
    int dim = 0;
};

/// A_i (r x (k+cg)): beta block Q Omega_pi X_i, then one theta block
/// pi_ij Omega_j G per class, in class order.
Mat subject_design(const ModelSpec& spec, const Params& params, const Mat& class_design);

/// Fast-path t_i for a one-hot observation at pattern u.
SubjectBasis subject_basis(const ModelSpec& spec, const Params& params,
                           const Mat& class_design, int pattern);

/// Score vector, length k + c*g. One-hot data uses the t_i fast path;
/// grouped frequency data goes through the general A_i path.
Vec score(const ModelSpec& spec, const Params& params, const Dataset& data);

/// Hybrid information F = sum_i A_i' diag(y_i / p_i^2) A_i; for one-hot
/// data accumulated as sum_i t_i t_i' / p_tilde_i^2.
InfoMatrix hybrid_info(const ModelSpec& spec, const Params& params, const Dataset& data);

/// Numerical rank of T (rows t_i'); F is positive definite iff T has full
/// rank k + c*g. Singular values below 1e-10 of the largest count as zero.
RankDiagnosis rank_check(const ModelSpec& spec, const Params& params, const Dataset& data);

/// Observed information: F plus the zero-expectation correction D.
/// Equals the negative Hessian of the log-likelihood.
InfoMatrix observed_info(const ModelSpec& spec, const Params& params, const Dataset& data);

/// Weighted covariate configuration for expected-information enumeration.
struct WeightedConfig {
    Vec covariates;
    double weight = 1.0;
};

/// Expected information by enumeration over all r outcomes at the given
/// covariate configurations. Guarded by an enumeration cap on r.
InfoMatrix expected_info(const ModelSpec& spec, const Params& params,
                         const std::vector<WeightedConfig>& configs,
                         long enumeration_cap = 1000000L);

/// se = sqrt(diag(info^-1)), z = estimate / se. Throws structural_error
/// carrying the numerical rank if info is not positive definite.
std::pair<Vec, Vec> standard_errors(const InfoMatrix& info, const Params& params);

}  // namespace lcm
