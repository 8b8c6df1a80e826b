#include "lcm/oracle.hpp"

#include <cmath>
#include <string>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"

namespace lcm::oracle {

namespace {

double central_diff(const std::function<double(const Vec&)>& f, const Vec& psi, int coord,
                    double h) {
    Vec lo = psi, hi = psi;
    lo(coord) -= h;
    hi(coord) += h;
    const double f_hi = f(hi);
    const double f_lo = f(lo);
    if (!std::isfinite(f_hi) || !std::isfinite(f_lo))
        throw numeric_error("non-finite evaluation at coordinate " + std::to_string(coord));
    return (f_hi - f_lo) / (2.0 * h);
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& psi, const FDConfig& cfg) {
    Vec grad(psi.size());
    for (int a = 0; a < psi.size(); ++a) {
        double d = central_diff(f, psi, a, cfg.step);
        if (cfg.richardson) {
            const double d_half = central_diff(f, psi, a, cfg.step / 2.0);
            d = (4.0 * d_half - d) / 3.0;
        }
        grad(a) = d;
    }
    return grad;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& psi, const FDConfig& cfg) {
    const int dim = static_cast<int>(psi.size());
    const double h = cfg.step;
    Mat hess(dim, dim);
    const double f0 = f(psi);
    if (!std::isfinite(f0)) throw numeric_error("non-finite evaluation at the expansion point");

    auto at = [&](double da, int a, double db, int b) {
        Vec p = psi;
        p(a) += da;
        p(b) += db;
        const double val = f(p);
        if (!std::isfinite(val))
            throw numeric_error("non-finite evaluation near coordinate " + std::to_string(a));
        return val;
    };

    for (int a = 0; a < dim; ++a) {
        hess(a, a) = (at(h, a, 0.0, a) - 2.0 * f0 + at(-h, a, 0.0, a)) / (h * h);
        for (int b = a + 1; b < dim; ++b) {
            hess(a, b) = (at(h, a, h, b) - at(h, a, -h, b) - at(-h, a, h, b) + at(-h, a, -h, b)) /
                         (4.0 * h * h);
            hess(b, a) = hess(a, b);
        }
    }
    return (hess + hess.transpose()) / 2;
}

Mat enumerate_expectation_matrix(const ModelSpec& spec, const Params& params,
                                 const Vec& covariates, const std::function<Mat(int)>& statistic,
                                 long enumeration_cap) {
    const int r = spec.num_patterns();
    if (r > enumeration_cap)
        throw structural_error("pattern space too large to enumerate (r = " + std::to_string(r) +
                               ")");
    const Mat response_design = build_response_design(spec);
    const Mat mixture = mixture_matrix(response_design, params.theta);
    const Vec pi = class_weights(build_class_design(covariates, spec), params.beta);
    const Vec p = marginal_probs(mixture, pi);

    Mat total;
    for (int u = 0; u < r; ++u) {
        const Mat value = p(u) * statistic(u);
        if (u == 0)
            total = value;
        else
            total += value;
    }
    return total;
}

double enumerate_expectation(const ModelSpec& spec, const Params& params, const Vec& covariates,
                             const std::function<double(int)>& statistic, long enumeration_cap) {
    const Mat total = enumerate_expectation_matrix(
        spec, params, covariates, [&](int u) { return Mat::Constant(1, 1, statistic(u)); },
        enumeration_cap);
    return total(0, 0);
}

}  // namespace lcm::oracle
