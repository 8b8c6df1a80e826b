#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"
#include "test_support.hpp"

using namespace lcm;
using lcm::testing::make_spec;
using lcm::testing::random_params;
using lcm::testing::random_small_spec;

TEST_CASE("class_weights basics") {
    const ModelSpec spec = make_spec(3, {2, 2}, 1);
    const Mat design = build_class_design(Vec::Constant(1, 0.7), spec);

    SUBCASE("zero beta gives uniform weights") {
        const Vec pi = class_weights(design, Vec::Zero(spec.weight_dim()));
        for (int j = 0; j < 3; ++j) CHECK(pi(j) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    SUBCASE("c=2 intercept-only log 3") {
        const ModelSpec two = make_spec(2, {2, 2}, 0);
        const Mat x = build_class_design(Vec(0), two);
        Vec beta(1);
        beta << std::log(3.0);
        const Vec pi = class_weights(x, beta);
        CHECK(pi(0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(pi(1) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(class_weights(design, Vec::Zero(2)), structural_error);
    }
}

TEST_CASE("softmax shift invariance and normalization") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (int rep = 0; rep < 30; ++rep) {
        const ModelSpec spec = random_small_spec(rng);
        const Params params = random_params(spec, rng);
        const Mat design = build_response_design(spec);

        const Vec q = response_probs(design, params.theta[0]);
        CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((q.array() > 0.0).all());

        // adding a constant to every logit leaves the output unchanged;
        // realized by shifting theta along a column of ones only when G
        // has an all-ones combination, so shift the logits directly.
        const Vec logits = design * params.theta[0];
        const Vec shifted_logits = logits.array() + noise(rng);
        const Vec expv = (shifted_logits.array() - shifted_logits.maxCoeff()).exp();
        const Vec q_shift = expv / expv.sum();
        CHECK((q - q_shift).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("response_probs examples") {
    SUBCASE("zero theta uniform over patterns") {
        const ModelSpec spec = make_spec(1, {2, 2}, 0);
        const Vec q = response_probs(build_response_design(spec), Vec::Zero(2));
        for (int u = 0; u < 4; ++u) CHECK(q(u) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("matches elementwise recomputation") {
        const ModelSpec spec = make_spec(1, {2, 2}, 0);
        const Mat design = build_response_design(spec);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> noise;
        Vec theta(2);
        theta << noise(rng), noise(rng);
        const Vec q = response_probs(design, theta);
        double denom = 0.0;
        for (int u = 0; u < 4; ++u) denom += std::exp(design.row(u).dot(theta));
        for (int u = 0; u < 4; ++u)
            CHECK(q(u) == doctest::Approx(std::exp(design.row(u).dot(theta)) / denom)
                              .epsilon(1e-12));
    }
}

TEST_CASE("mixture and marginal probabilities") {
    const ModelSpec spec = make_spec(2, {2}, 0);
    Mat mixture(2, 2);
    mixture << 0.5, 0.9, 0.5, 0.1;
    Vec pi(2);
    pi << 0.5, 0.5;
    const Vec p = marginal_probs(mixture, pi);
    CHECK(p(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(0.3).epsilon(1e-12));

    // degenerate weight picks out one column
    pi << 0.0, 1.0;
    CHECK((marginal_probs(mixture, pi) - mixture.col(1)).norm() == doctest::Approx(0.0));

    // all theta blocks equal -> equal columns
    std::mt19937_64 rng(3);
    const ModelSpec two = make_spec(2, {2, 3}, 0);
    const Params params = random_params(two, rng);
    const Mat design = build_response_design(two);
    const Mat q2 = mixture_matrix(design, {params.theta[0], params.theta[0]});
    CHECK((q2.col(0) - q2.col(1)).norm() == doctest::Approx(0.0));
    for (int j = 0; j < 2; ++j) CHECK(q2.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("omega") {
    Vec half(2);
    half << 0.5, 0.5;
    Mat w = omega(half);
    CHECK(w(0, 0) == doctest::Approx(0.25));
    CHECK(w(0, 1) == doctest::Approx(-0.25));

    Vec degenerate(2);
    degenerate << 1.0, 0.0;
    CHECK(omega(degenerate).norm() == doctest::Approx(0.0));

    Vec skew(2);
    skew << 0.2, 0.8;
    CHECK(omega(skew)(0, 0) == doctest::Approx(0.16));

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::gamma_distribution<double> gamma(1.0, 1.0);
        Vec v(4);
        for (int a = 0; a < 4; ++a) v(a) = gamma(rng);
        v /= v.sum();
        const Mat om = omega(v);
        CHECK((om - om.transpose()).norm() < 1e-14);
        CHECK((om * Vec::Ones(4)).lpNorm<Eigen::Infinity>() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Mat> eig(om);
        CHECK(eig.eigenvalues().minCoeff() > -1e-14);
    }
}

TEST_CASE("loglik") {
    std::mt19937_64 rng(19);

    SUBCASE("all-zero params give -n log r") {
        const ModelSpec spec = make_spec(2, {2, 3}, 1);
        Params params;
        params.beta = Vec::Zero(spec.weight_dim());
        params.theta = {Vec::Zero(spec.loglinear_dim()), Vec::Zero(spec.loglinear_dim())};
        const Dataset data = lcm::testing::random_dataset(spec, params, 25, 42);
        CHECK(loglik(spec, params, data) ==
              doctest::Approx(-25.0 * std::log(spec.num_patterns())).epsilon(1e-12));
    }

    SUBCASE("grouping leaves loglik unchanged, loglik <= 0, naive recomputation") {
        for (int rep = 0; rep < 15; ++rep) {
            const ModelSpec spec = random_small_spec(rng);
            const Params params = random_params(spec, rng);
            const Dataset data = lcm::testing::random_dataset(spec, params, 30, 100 + rep);
            const double ll = loglik(spec, params, data);
            CHECK(ll <= 0.0);
            CHECK(loglik(spec, params, group_dataset(data, spec)) ==
                  doctest::Approx(ll).epsilon(1e-12));

            // naive first-principles recomputation
            const Mat design = build_response_design(spec);
            double naive = 0.0;
            for (const auto& subj : data.subjects) {
                const Vec pi =
                    class_weights(build_class_design(subj.covariates, spec), params.beta);
                double p = 0.0;
                for (int j = 0; j < spec.classes; ++j)
                    p += pi(j) * response_probs(design, params.theta[j])(subj.pattern);
                naive += std::log(p);
            }
            CHECK(ll == doctest::Approx(naive).epsilon(1e-10));
        }
    }

    SUBCASE("permutation of subjects leaves loglik unchanged") {
        const ModelSpec spec = make_spec(2, {3, 2}, 1);
        std::mt19937_64 local(4);
        const Params params = random_params(spec, local);
        Dataset data = lcm::testing::random_dataset(spec, params, 40, 7);
        const double ll = loglik(spec, params, data);
        std::shuffle(data.subjects.begin(), data.subjects.end(), local);
        CHECK(loglik(spec, params, data) == doctest::Approx(ll).epsilon(1e-12));
    }
}
