#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lcm/model_core.hpp"
#include "lcm/oracle.hpp"
#include "test_support.hpp"

using namespace lcm;
using namespace lcm::oracle;
using lcm::testing::make_spec;
using lcm::testing::random_params;

TEST_CASE("fd_gradient") {
    SUBCASE("quadratic is exact under central differences") {
        auto f = [](const Vec& psi) { return psi.squaredNorm(); };
        Vec at(2);
        at << 1.0, 2.0;
        const Vec grad = fd_gradient(f, at);
        CHECK(grad(0) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(grad(1) == doctest::Approx(4.0).epsilon(1e-8));
    }
    SUBCASE("constant function") {
        auto f = [](const Vec&) { return 3.0; };
        CHECK(fd_gradient(f, Vec::Zero(3)).norm() == doctest::Approx(0.0));
    }
    SUBCASE("error order is ~h^2 on a smooth function") {
        auto f = [](const Vec& psi) { return std::sin(psi(0)) * std::exp(psi(1)); };
        Vec at(2);
        at << 0.3, -0.2;
        const double exact0 = std::cos(0.3) * std::exp(-0.2);
        const double err_h = std::abs(fd_gradient(f, at, {1e-3, false})(0) - exact0);
        const double err_h10 = std::abs(fd_gradient(f, at, {1e-4, false})(0) - exact0);
        CHECK(err_h10 < err_h / 50.0);  // ~100x for an exact h^2 order
    }
    SUBCASE("non-finite evaluation raises") {
        auto f = [](const Vec& psi) { return std::log(psi(0)); };
        CHECK_THROWS_AS(fd_gradient(f, Vec::Zero(1)), numeric_error);
    }
}

TEST_CASE("fd_hessian on a known quadratic") {
    Mat quad(2, 2);
    quad << 3.0, 1.0, 1.0, 2.0;
    auto f = [&](const Vec& psi) { return 0.5 * psi.dot(quad * psi); };
    Vec at(2);
    at << 0.4, -1.1;
    const Mat hess = fd_hessian(f, at, {1e-4, false});
    CHECK((hess - quad).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((hess - hess.transpose()).norm() < 1e-8);
}

TEST_CASE("enumerate_expectation") {
    const ModelSpec spec = make_spec(2, {3, 2}, 1);
    std::mt19937_64 rng(23);
    const Params params = random_params(spec, rng);
    const Vec covs = Vec::Constant(1, 0.4);

    SUBCASE("total probability is 1") {
        const double total =
            enumerate_expectation(spec, params, covs, [](int) { return 1.0; });
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("linearity in the statistic") {
        auto f = [](int u) { return static_cast<double>(u); };
        auto g = [](int u) { return static_cast<double>(u * u); };
        const double ef = enumerate_expectation(spec, params, covs, f);
        const double eg = enumerate_expectation(spec, params, covs, g);
        const double combined = enumerate_expectation(
            spec, params, covs, [&](int u) { return 2.0 * f(u) - 3.0 * g(u); });
        CHECK(combined == doctest::Approx(2.0 * ef - 3.0 * eg).epsilon(1e-12));
    }
    SUBCASE("enumeration cap") {
        CHECK_THROWS_AS(enumerate_expectation(spec, params, covs, [](int) { return 1.0; }, 2),
                        structural_error);
    }
}
