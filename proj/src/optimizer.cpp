#include "lcm/optimizer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"

namespace lcm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Largest parameter displacement a single line-search trial may attempt.
// Near-singular curvature (e.g. nearly identical classes at the starting
// values) can make the scoring direction enormous; without this cap one
// "improving" far-away trial catapults the iterate onto a degenerate
// boundary plateau it never leaves.
constexpr double kMaxMove = 2.0;

// Trial evaluation; numeric failures count as "no improvement".
double try_value(const Objective& obj, const Vec& psi) {
    try {
        const double val = obj.value(psi);
        return std::isfinite(val) ? val : kNegInf;
    } catch (const numeric_error&) {
        return kNegInf;
    }
}

}  // namespace

std::pair<Vec, StepKind> direction(const Mat& info, const Vec& score_vec,
                                   const OptimOptions& opts) {
    const Eigen::Index dim = info.rows();
    const double scale = info.trace() / static_cast<double>(dim);
    // LLT can "succeed" on a numerically singular F and return a direction
    // dominated by a null eigenvector; such directions are useless for the
    // line search, so overly long ones also trigger ridge escalation.
    const double dir_cap = 1e6 * (1.0 + score_vec.lpNorm<Eigen::Infinity>());
    double lambda = 0.0;
    while (true) {
        Mat damped = info;
        if (lambda > 0.0) damped.diagonal().array() += lambda;
        Eigen::LLT<Mat> chol(damped);
        if (chol.info() == Eigen::Success) {
            const Vec dir = chol.solve(score_vec);
            if (dir.allFinite() && score_vec.dot(dir) > 0.0 &&
                dir.lpNorm<Eigen::Infinity>() <= dir_cap)
                return {dir, StepKind::scoring};
        }
        if (lambda >= 1e-2 * scale || !(scale > 0.0)) break;
        lambda = lambda == 0.0 ? opts.ridge0 * scale : lambda * 10.0;
        lambda = std::min(lambda, 1e-2 * scale);
    }
    return {score_vec, StepKind::steepest};
}

double cubic_step(double l0, double g0, double a1, double l1, double g1) {
    if (!std::isfinite(l0) || !std::isfinite(g0) || !std::isfinite(a1) || !std::isfinite(l1) ||
        !std::isfinite(g1))
        throw numeric_error("non-finite input to cubic_step");
    if (!(a1 > 0.0)) throw structural_error("cubic_step requires a1 > 0");
    if (!(g0 > 0.0)) throw structural_error("cubic_step requires an ascent slope at 0");

    // h(a) = l0 + g0 a + b a^2 + d a^3 through (l1, g1) at a1.
    const double rem = l1 - l0 - g0 * a1;
    const double slope_diff = g1 - g0;
    const double b = 3.0 * rem / (a1 * a1) - slope_diff / a1;
    const double d = (slope_diff - 2.0 * b * a1) / (3.0 * a1 * a1);

    const double hi = 4.0 * a1;
    double best = a1;
    if (std::abs(d) < 1e-14 * std::max(1.0, std::abs(b))) {
        // Effectively quadratic.
        if (b < 0.0) {
            const double vertex = -g0 / (2.0 * b);
            if (vertex > 0.0) best = std::min(vertex, hi);
        }
    } else {
        // h'(a) = 3 d a^2 + 2 b a + g0 = 0; keep the root with h'' < 0,
        // clamped into (0, 4 a1].
        const double disc = 4.0 * b * b - 12.0 * d * g0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (const double root : {(-2.0 * b + sq) / (6.0 * d), (-2.0 * b - sq) / (6.0 * d)}) {
                if (root > 0.0 && 2.0 * b + 6.0 * d * root < 0.0) best = std::min(root, hi);
            }
        }
    }
    return std::isfinite(best) && best > 0.0 ? std::min(best, hi) : a1;
}

FitResult maximize(const Objective& obj, const Vec& init, const OptimOptions& opts) {
    FitResult res;
    Vec psi = init;
    double current = obj.value(psi);
    if (!std::isfinite(current)) throw numeric_error("objective not finite at starting values");
    res.trace.push_back({current, 0.0, StepKind::scoring});

    double step = opts.initial_step;
    double last_gain = std::numeric_limits<double>::infinity();
    bool stationary = false;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Vec grad = obj.gradient(psi);
        stationary = grad.lpNorm<Eigen::Infinity>() < opts.tol_score;
        if (stationary && last_gain < opts.tol_loglik) {
            res.converged = true;
            break;
        }

        auto [dir, kind] = direction(obj.curvature(psi), grad, opts);
        const double slope0 = grad.dot(dir);

        double accepted_step = 0.0;
        double accepted_value = current;
        StepKind accepted_kind = kind;

        // First guess at the carried-over step, second guess from the cubic.
        const double a1 = std::min(step, kMaxMove / dir.lpNorm<Eigen::Infinity>());
        const double l1 = try_value(obj, psi + a1 * dir);
        if (l1 > kNegInf) {
            double a2 = a1;
            double l2 = l1;
            try {
                const double g1 = obj.gradient(psi + a1 * dir).dot(dir);
                if (std::isfinite(g1)) {
                    a2 = cubic_step(current, slope0, a1, l1, g1);
                    l2 = a2 == a1 ? l1 : try_value(obj, psi + a2 * dir);
                }
            } catch (const numeric_error&) {
            }
            const double best_l = std::max(l1, l2);
            if (best_l > current) {
                accepted_step = l2 > l1 ? a2 : a1;
                accepted_value = best_l;
            }
        }

        // Step shortening.
        if (accepted_step == 0.0) {
            double a = a1;
            for (int h = 0; h < opts.max_halvings; ++h) {
                a /= 2.0;
                const double val = try_value(obj, psi + a * dir);
                if (val > current) {
                    accepted_step = a;
                    accepted_value = val;
                    accepted_kind = StepKind::shortened;
                    break;
                }
            }
        }

        // Steepest-ascent fallback, backtracking from 1.
        if (accepted_step == 0.0 && kind != StepKind::steepest) {
            dir = grad;
            double a = std::min(1.0, kMaxMove / dir.lpNorm<Eigen::Infinity>());
            for (int h = 0; h <= opts.max_halvings; ++h) {
                const double val = try_value(obj, psi + a * dir);
                if (val > current) {
                    accepted_step = a;
                    accepted_value = val;
                    accepted_kind = StepKind::steepest;
                    break;
                }
                a /= 2.0;
            }
        }

        if (accepted_step == 0.0) {
            // No ascent found in any direction; the loglik change is zero,
            // so stationarity alone decides convergence.
            res.converged = stationary;
            break;
        }

        psi += accepted_step * dir;
        last_gain = accepted_value - current;
        current = accepted_value;
        res.n_iter = iter + 1;
        res.trace.push_back({current, accepted_step, accepted_kind});
        step = std::min(1.0, 2.0 * accepted_step);
    }

    res.loglik_final = current;
    res.psi_hat = psi;
    return res;
}

namespace {

class LoglikObjective final : public Objective {
  public:
    LoglikObjective(const ModelSpec& spec, const Dataset& data) : spec_(spec), data_(data) {}
    double value(const Vec& psi) const override {
        return loglik(spec_, Params::from_stacked(spec_, psi), data_);
    }
    Vec gradient(const Vec& psi) const override {
        return score(spec_, Params::from_stacked(spec_, psi), data_);
    }
    Mat curvature(const Vec& psi) const override {
        return hybrid_info(spec_, Params::from_stacked(spec_, psi), data_).mat;
    }

  private:
    const ModelSpec& spec_;
    const Dataset& data_;
};

}  // namespace

Params default_init(const ModelSpec& spec, const Dataset& data, std::uint64_t seed) {
    spec.validate();
    const int r = spec.num_patterns();
    const int g = spec.loglinear_dim();

    // Pooled pattern frequencies.
    Vec freq = Vec::Zero(r);
    for (const auto& subj : data.subjects) freq(subj.pattern) += 1.0;
    for (const auto& grp : data.groups) freq += grp.pattern_freq;

    // Marginal category frequencies per response, smoothed.
    Vec pooled = Vec::Zero(g);
    int col = 0;
    for (std::size_t t = 0; t < spec.responses.size(); ++t) {
        const int m = spec.responses[t].categories;
        Vec cat_freq = Vec::Constant(m, 0.5);
        for (int u = 0; u < r; ++u) cat_freq(pattern_at(u, spec)[t]) += freq(u);
        for (int cat = 1; cat < m; ++cat) pooled(col++) = std::log(cat_freq(cat) / cat_freq(0));
    }
    // Score-interaction columns start at zero.

    Params init;
    init.beta = Vec::Zero(spec.weight_dim());
    init.theta.resize(spec.classes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 0.25);
    for (int j = 0; j < spec.classes; ++j) {
        init.theta[j] = pooled;
        for (int a = 0; a < g; ++a) init.theta[j](a) += jitter(rng);
    }
    return init;
}

FitResult fit(const ModelSpec& spec, const Dataset& data, const std::optional<Params>& init,
              const OptimOptions& opts) {
    spec.validate();
    if (data.empty()) throw structural_error("dataset is empty");

    const LoglikObjective obj(spec, data);
    std::mt19937_64 rng(opts.seed);

    auto run = [&](const Vec& start) {
        FitResult res = maximize(obj, start, opts);
        res.params_hat = Params::from_stacked(spec, res.psi_hat);
        return res;
    };

    const Params start = init ? *init : default_init(spec, data, opts.seed);
    bool have_best = false;
    FitResult best;
    std::string first_failure;
    try {
        best = run(start.stacked());
        have_best = true;
    } catch (const numeric_error& err) {
        first_failure = err.what();
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    for (int attempt = 1; attempt <= opts.restarts; ++attempt) {
        const Vec incumbent = have_best ? best.params_hat.stacked() : start.stacked();
        Vec perturbed = incumbent;
        for (int a = 0; a < perturbed.size(); ++a)
            perturbed(a) += opts.perturb_scale * (1.0 + std::abs(incumbent(a))) * noise(rng);
        try {
            FitResult res = run(perturbed);
            if (!have_best || res.loglik_final > best.loglik_final) {
                res.restart_index = attempt;
                best = res;
                have_best = true;
            }
        } catch (const numeric_error&) {
            // this restart failed to produce a finite loglik; keep going
        }
    }

    if (!have_best)
        throw numeric_error("all optimization runs failed: " +
                            (first_failure.empty() ? std::string("no finite loglik") : first_failure));
    return best;
}

}  // namespace lcm
