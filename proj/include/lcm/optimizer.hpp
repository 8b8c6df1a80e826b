#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcm/dataset.hpp"
#include "lcm/inference.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

namespace lcm {

struct OptimOptions {
    double initial_step = 0.5;
    double tol_loglik = 1e-8;
    double tol_score = 1e-5;
    int max_iter = 500;
    int max_halvings = 20;
    int restarts = 5;
    double perturb_scale = 0.1;
    double ridge0 = 1e-8;
    std::uint64_t seed = 0;
};

enum class StepKind { scoring, shortened, steepest };

struct TraceEntry {
    double loglik;
    double step;
    StepKind kind;
};

struct FitResult {
    Params params_hat;
    Vec psi_hat;  // stacked form of params_hat
    double loglik_final = 0.0;
    int n_iter = 0;
    std::vector<TraceEntry> trace;  // loglik strictly nondecreasing
    bool converged = false;
    int restart_index = 0;  // which run produced the best loglik (0 = base)
};

/// Maximization target: value, gradient and a positive (semi)definite
/// curvature matrix used in place of the negative Hessian.
class Objective {
  public:
    virtual ~Objective() = default;
    virtual double value(const Vec& psi) const = 0;  // may throw numeric_error
    virtual Vec gradient(const Vec& psi) const = 0;
    virtual Mat curvature(const Vec& psi) const = 0;
};

/// Solves F d = s, ridging F on factorization failure (lambda starts at
/// ridge0 * trace/dim, escalates x10 up to 1e-2 * trace/dim). Falls back to
/// d = s (steepest ascent) if no ascent direction is obtained; the second
/// member reports which kind of direction was produced.
std::pair<Vec, StepKind> direction(const Mat& info, const Vec& score, const OptimOptions& opts);

/// Step maximizing the cubic interpolant of (value, slope) at 0 and at a1.
/// Clamped to (0, 4*a1]; returns a1 when the cubic has no interior maximum
/// in range. Requires g0 > 0 (ascent direction).
double cubic_step(double l0, double g0, double a1, double l1, double g1);

/// Line-search ascent of a generic objective: scoring direction, cubic
/// second guess, step shortening, steepest-ascent fallback. The iterate is
/// never updated unless the value improves.
FitResult maximize(const Objective& obj, const Vec& init, const OptimOptions& opts);

/// Starting values: beta = 0; each theta_j = pooled marginal logit fit plus
/// class-dependent N(0, 0.25^2) jitter, deterministic in the seed.
Params default_init(const ModelSpec& spec, const Dataset& data, std::uint64_t seed);

/// Full driver: base run from init (or default_init), then `restarts`
/// perturbed re-optimizations of the incumbent; best run is returned.
FitResult fit(const ModelSpec& spec, const Dataset& data,
              const std::optional<Params>& init, const OptimOptions& opts);

}  // namespace lcm
