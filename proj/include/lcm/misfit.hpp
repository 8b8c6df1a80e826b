#pragma once

#include <optional>
#include <vector>

#include "lcm/inference.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/optimizer.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// A true data-generating model, a candidate (possibly misspecified) model,
/// and the fixed covariate configurations with their replicate weights.
/// Both specs must share the same response variables and pattern space.
struct MisfitScenario {
    ModelSpec true_spec;
    Params true_params;
    ModelSpec candidate_spec;
    std::vector<WeightedConfig> configs;
};

struct MisfitResult {
    Params pseudo_true;
    double expected_loglik_candidate = 0.0;  // at the pseudo-true params
    double expected_loglik_true = 0.0;       // true model on its own data
    int n_iter = 0;
    bool converged = false;
    /// pseudo-true minus true per shared parameter, after label alignment;
    /// present only when the candidate has the same parameter layout.
    std::optional<Vec> bias;
    std::vector<TraceEntry> trace;
};

/// p_i under the true model at one covariate configuration (the expected
/// value of a one-hot observation).
Vec expected_responses(const ModelSpec& true_spec, const Params& true_params,
                       const Vec& covariates);

/// Permutation aligning the classes of `fitted` to `reference` by minimal
/// total variation distance between conditional response distributions;
/// perm[j] is the fitted class matched to reference class j.
std::vector<int> align_classes(const ModelSpec& spec, const Params& fitted,
                               const Params& reference);

/// Relabels classes by `perm` (perm[j] = source class for new class j).
/// Beta contrasts are re-expressed relative to the new reference class.
Params relabel(const ModelSpec& spec, const Params& params, const std::vector<int>& perm);

/// Maximizes the expected log-likelihood of the candidate model against
/// expected data from the true model (general frequency path throughout).
MisfitResult fit_expected(const MisfitScenario& scenario, const OptimOptions& opts);

}  // namespace lcm
