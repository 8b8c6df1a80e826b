#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lcm/design.hpp"
#include "lcm/misfit.hpp"
#include "lcm/model_core.hpp"
#include "test_support.hpp"

using namespace lcm;
using lcm::testing::make_spec;
using lcm::testing::random_params;

namespace {

MisfitScenario identity_scenario() {
    MisfitScenario scn;
    scn.true_spec = make_spec(2, {2, 2, 2}, 1);
    scn.true_params.beta = (Vec(2) << 0.5, 1.0).finished();
    scn.true_params.theta = {Vec::Constant(3, -1.3), Vec::Constant(3, 1.3)};
    scn.candidate_spec = scn.true_spec;
    for (const double x : {-1.0, 0.0, 1.0, 2.0})
        scn.configs.push_back({Vec::Constant(1, x), 25.0});
    return scn;
}

}  // namespace

TEST_CASE("expected_responses") {
    const ModelSpec spec = make_spec(2, {3, 2}, 1);
    std::mt19937_64 rng(81);
    const Params params = random_params(spec, rng);
    const Vec covs = Vec::Constant(1, 0.7);

    const Vec p = expected_responses(spec, params, covs);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));

    const Mat g = build_response_design(spec);
    const Vec pi = class_weights(build_class_design(covs, spec), params.beta);
    const Vec direct = marginal_probs(mixture_matrix(g, params.theta), pi);
    CHECK((p - direct).lpNorm<Eigen::Infinity>() < 1e-15);

    // mixture linearity: p = sum_j pi_j q_j
    Vec mix = Vec::Zero(spec.num_patterns());
    for (int j = 0; j < spec.classes; ++j)
        mix += pi(j) * response_probs(g, params.theta[j]);
    CHECK((p - mix).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("identity scenario recovers the true parameters") {
    const MisfitScenario scn = identity_scenario();
    OptimOptions opts;
    opts.tol_score = 1e-6;
    opts.tol_loglik = 1e-12;
    opts.restarts = 2;
    opts.seed = 3;
    const MisfitResult res = fit_expected(scn, opts);

    CHECK(res.converged);
    CHECK(res.n_iter <= 25);
    CHECK(res.expected_loglik_true - res.expected_loglik_candidate < 1e-10);
    CHECK(res.expected_loglik_candidate - res.expected_loglik_true < 1e-10);
    REQUIRE(res.bias.has_value());
    CHECK(res.bias->lpNorm<Eigen::Infinity>() < 1e-4);

    // the expected score at the true parameters vanishes
    Dataset expected_data;
    for (const auto& cfg : scn.configs)
        expected_data.groups.push_back(
            {cfg.covariates,
             cfg.weight * expected_responses(scn.true_spec, scn.true_params, cfg.covariates)});
    CHECK(score(scn.true_spec, scn.true_params, expected_data).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("information inequality and under-specified class count") {
    MisfitScenario scn = identity_scenario();
    scn.candidate_spec = make_spec(1, {2, 2, 2}, 1);
    OptimOptions opts;
    opts.seed = 4;
    const MisfitResult res = fit_expected(scn, opts);

    CHECK(res.converged);
    // dropping a well-separated class loses expected loglik
    CHECK(res.expected_loglik_candidate < res.expected_loglik_true - 1.0);
    CHECK(res.n_iter <= 25);
    CHECK_FALSE(res.bias.has_value());
}

TEST_CASE("candidate never beats the true model on its own data") {
    std::mt19937_64 rng(83);
    for (int rep = 0; rep < 5; ++rep) {
        MisfitScenario scn;
        scn.true_spec = make_spec(2, {2, 3}, 1);
        scn.true_params = random_params(scn.true_spec, rng);
        scn.candidate_spec = make_spec(rep % 2 ? 1 : 2, {2, 3}, 1);
        scn.configs.push_back({Vec::Constant(1, -0.4), 30.0});
        scn.configs.push_back({Vec::Constant(1, 1.1), 30.0});
        OptimOptions opts;
        opts.seed = 100 + rep;
        const MisfitResult res = fit_expected(scn, opts);
        CHECK(res.expected_loglik_candidate <= res.expected_loglik_true + 1e-10);
    }
}

TEST_CASE("weight scaling") {
    const MisfitScenario base = identity_scenario();
    MisfitScenario scaled = base;
    for (auto& cfg : scaled.configs) cfg.weight *= 7.0;

    OptimOptions opts;
    opts.tol_score = 1e-6;
    opts.tol_loglik = 1e-12;
    opts.seed = 9;
    const MisfitResult a = fit_expected(base, opts);
    OptimOptions opts_scaled = opts;
    opts_scaled.tol_score = 7e-6;  // score scales with the weights
    const MisfitResult b = fit_expected(scaled, opts_scaled);

    CHECK(b.expected_loglik_true == doctest::Approx(7.0 * a.expected_loglik_true).epsilon(1e-12));
    CHECK(b.expected_loglik_candidate ==
          doctest::Approx(7.0 * a.expected_loglik_candidate).epsilon(1e-10));
    CHECK((a.pseudo_true.stacked() - b.pseudo_true.stacked()).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("align_classes and relabel") {
    const ModelSpec spec = make_spec(3, {3, 2}, 1);
    std::mt19937_64 rng(85);
    const Params params = random_params(spec, rng);

    SUBCASE("relabel leaves the likelihood invariant") {
        const Dataset data = lcm::testing::random_dataset(spec, params, 60, 44);
        const double base = loglik(spec, params, data);
        const std::vector<int> perm = {2, 0, 1};
        const Params shuffled = relabel(spec, params, perm);
        CHECK(std::abs(loglik(spec, shuffled, data) - base) < 1e-10);
    }
    SUBCASE("alignment undoes a known permutation") {
        const std::vector<int> perm = {1, 2, 0};
        const Params shuffled = relabel(spec, params, perm);
        const std::vector<int> found = align_classes(spec, shuffled, params);
        const Params restored = relabel(spec, shuffled, found);
        CHECK((restored.stacked() - params.stacked()).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}
