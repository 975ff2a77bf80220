#include <gtest/gtest.h>

#include <cmath>

#include "mfbn/enumeration.hpp"
#include "mfbn/errors.hpp"
#include "mfbn/experiment.hpp"
#include "mfbn/objective.hpp"
#include "mfbn/validation.hpp"
#include "test_support.hpp"

using namespace mfbn;

namespace {

BeliefNetwork two_unit() {
    BeliefNetwork net(2, Activation(ActivationKind::Sigmoid));
    net.weight(1, 0) = 1.0;
    net.visible = {1};
    return net;
}

double x_of(const BeliefNetwork& net, const MeanVector& u, const State& s, std::size_t i) {
    double x = 0.0;
    for (std::size_t j = 0; j < i; ++j) x += net.weight(i, j) * (s[j] - u[j]);
    return x;
}

}  // namespace

TEST(Enumeration, UnclampedLogPartitionIsZero) {
    Rng rng(31);
    for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::NoisyOr}) {
        for (int c = 0; c < 20; ++c) {
            BeliefNetwork net = random_test_network(rng, kind, 9, 3.0);
            EXPECT_NEAR(exact_log_partition(ClampContext::unclamped(std::move(net))), 0.0, 1e-12);
        }
    }
}

TEST(Enumeration, ClampedExamples) {
    BeliefNetwork one(1, Activation(ActivationKind::Sigmoid));
    one.visible = {0};
    const std::vector<std::uint8_t> zero{0};
    EXPECT_NEAR(exact_log_partition(ClampContext::clamped(one, zero)), -std::log(2.0), 1e-15);
    const double expected = std::log(0.25 + 0.5 * (1 - oracle::sigmoid(1.0)));
    EXPECT_NEAR(exact_log_partition(ClampContext::clamped(two_unit(), zero)), expected, 1e-15);
    EXPECT_NEAR(expected, -0.95589, 1e-5);
}

TEST(Enumeration, ClampedMatchesBruteForce) {
    Rng rng(32);
    for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::NoisyOr}) {
        for (int c = 0; c < 20; ++c) {
            const BeliefNetwork net = random_test_network(rng, kind, 8, 2.0);
            std::vector<std::uint8_t> obs(net.visible.size());
            for (auto& o : obs) o = rng.bernoulli(0.5);
            const double ln_z = exact_log_partition(ClampContext::clamped(net, obs));
            EXPECT_NEAR(ln_z, oracle::brute_log_z(net, obs), 1e-11);
            EXPECT_LE(ln_z, 1e-15);
        }
    }
}

TEST(Enumeration, GammaTiltsTheSum) {
    Rng rng(33);
    const BeliefNetwork net = random_test_network(rng, ActivationKind::Sigmoid, 4, 1.0);
    const ClampContext ctx = ClampContext::unclamped(net);
    EXPECT_NEAR(exact_log_partition(ctx, 0.0), 4 * std::log(2.0), 1e-12);
    double z = 0.0;
    oracle::for_all_states(4, [&](const std::vector<std::uint8_t>& s) {
        z += std::exp(-0.5 * energy(net, oracle::to_state(s)));
    });
    EXPECT_NEAR(exact_log_partition(ctx, 0.5), std::log(z), 1e-12);
}

TEST(Enumeration, IndependentMarginals) {
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    net.biases = {-1.0, 0.0, 2.0};
    const MeanVector m = exact_marginals(ClampContext::unclamped(net));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m[i], oracle::sigmoid(net.biases[i]), 1e-14);
}

TEST(Enumeration, MarginalsAgreeWithGibbsSampler) {
    ExperimentConfig cfg;
    const BeliefNetwork net = random_layered(cfg, 4);
    const std::vector<std::uint8_t> zeros(6, 0);
    const MeanVector exact = exact_marginals(ClampContext::clamped(net, zeros));
    const auto sampled = oracle::gibbs_sample_means(net, zeros, 60000, 77);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_LE(std::abs(sampled.mean[i] - exact[i]), 3.0 * sampled.stderr_[i] + 1e-3) << "unit " << i;
    }
    for (std::size_t i = 6; i < 12; ++i) EXPECT_TRUE(exact.is_pinned(i));
}

TEST(Enumeration, FactorialExpectationExamples) {
    Rng rng(34);
    const BeliefNetwork net = random_test_network(rng, ActivationKind::Sigmoid, 4, 1.5, 1.0);
    MeanVector u(4);
    u.values = {0.2, 0.55, 0.8, 0.35};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(factorial_expectation(net, u, [k](const State& s) { return double(s[k]); }), u[k], 1e-15);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const double m1 = factorial_expectation(net, u, [&](const State& s) { return x_of(net, u, s, i); });
        const double m2 = factorial_expectation(net, u, [&](const State& s) {
            const double x = x_of(net, u, s, i);
            return x * x;
        });
        EXPECT_NEAR(m1, 0.0, 1e-14);
        EXPECT_NEAR(m2, central_moment_x(net, u, i, 2), 1e-12);
    }
}

TEST(Enumeration, FactorialExpectationHoldsPinnedUnits) {
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    MeanVector u(3);
    u.pin(2, 1);
    u[0] = 0.25;
    u[1] = 0.5;
    const double e = factorial_expectation(net, u, [](const State& s) { return double(s[0] + 10 * s[2]); });
    EXPECT_NEAR(e, 10.25, 1e-15);
}

TEST(Enumeration, ExactLsExamples) {
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    net.biases = {0.4, -0.3, 1.2};
    MeanVector u(3);
    for (std::size_t i = 0; i < 3; ++i) u[i] = oracle::sigmoid(net.biases[i]);
    EXPECT_NEAR(exact_ls(ClampContext::unclamped(net), u), 0.0, 1e-14);

    Rng rng(35);
    for (int c = 0; c < 20; ++c) {
        const ClampContext ctx = random_test_context(rng, random_test_network(rng, ActivationKind::NoisyOr, 6, 1.0));
        const MeanVector m = random_interior_means(rng, ctx);
        EXPECT_GE(exact_ls(ctx, m), -exact_log_partition(ctx) - 1e-12);
    }
}

TEST(Enumeration, PlefkaOracleDegenerateEnergies) {
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    MeanVector u(3);
    u.values = {0.3, 0.6, 0.8};
    EXPECT_NEAR(plefka_derivative_oracle(net, u, [](const State&) { return 2.5; }, 1), 2.5, 1e-15);
    EXPECT_NEAR(plefka_derivative_oracle(net, u, [](const State&) { return 2.5; }, 2), 0.0, 1e-15);
    EXPECT_NEAR(plefka_derivative_oracle(net, u, [](const State& s) { return 1.7 * s[1]; }, 2), 0.0, 1e-14);
}

TEST(Enumeration, PlefkaOracleMatchesDoubleLoop) {
    Rng rng(36);
    for (int c = 0; c < 10; ++c) {
        const BeliefNetwork net = random_test_network(rng, ActivationKind::Sigmoid, 3, 2.0, 1.0);
        MeanVector u(3);
        for (double& x : u.values) x = rng.uniform(0.1, 0.9);
        const auto e = [&](const State& s) { return energy(net, s); };
        const double lib = plefka_derivative_oracle(net, u, e, 2);
        const double ref = oracle::double_loop_second_derivative(
            u.values, [&](const std::vector<std::uint8_t>& s) { return energy(net, oracle::to_state(s)); });
        EXPECT_NEAR(lib, ref, 1e-12);
    }
}

TEST(Enumeration, SizeBound) {
    EXPECT_THROW(check_enumeration_size(kMaxEnumeratedUnits + 1), SizeError);
    EXPECT_NO_THROW(check_enumeration_size(kMaxEnumeratedUnits));
}

TEST(Enumeration, LogSumExpIsStable) {
    LogSumExp acc;
    acc.add(-1000.0);
    acc.add(-1000.0);
    EXPECT_NEAR(acc.value(), -1000.0 + std::log(2.0), 1e-12);
    LogSumExp empty;
    EXPECT_EQ(empty.value(), -std::numeric_limits<double>::infinity());
}
