#include <gtest/gtest.h>

#include <cmath>

#include "mfbn/errors.hpp"
#include "mfbn/network.hpp"
#include "mfbn/validation.hpp"
#include "test_support.hpp"

using namespace mfbn;

namespace {

BeliefNetwork two_unit(double w21) {
    BeliefNetwork net(2, Activation(ActivationKind::Sigmoid));
    net.weight(1, 0) = w21;
    net.visible = {1};
    return net;
}

std::string validation_message(const BeliefNetwork& net) {
    try {
        validate(net);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Network, ValidateAcceptsSimpleNet) { EXPECT_NO_THROW(validate(two_unit(1.0))); }

TEST(Network, ValidateRejectsUpperTriangle) {
    BeliefNetwork net = two_unit(1.0);
    net.weight(0, 1) = 0.3;
    EXPECT_NE(validation_message(net).find("acyclicity violated"), std::string::npos);
}

TEST(Network, ValidateRejectsNegativeNoisyOrWeight) {
    BeliefNetwork net(2, Activation(ActivationKind::NoisyOr));
    net.biases = {0.1, 0.1};
    net.weight(1, 0) = -0.1;
    EXPECT_NE(validation_message(net).find("negative weight"), std::string::npos);
}

TEST(Network, ValidateRejectsBadVisibleIndex) {
    BeliefNetwork net = two_unit(1.0);
    net.visible = {5};
    EXPECT_NE(validation_message(net).find("visible"), std::string::npos);
}

TEST(Network, LocalField) {
    EXPECT_DOUBLE_EQ(local_field(two_unit(1.0), State{1, 0}, 1), 1.0);
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    net.biases = {0.7, 0.0, 0.1};
    net.weight(2, 0) = 0.5;
    net.weight(2, 1) = -0.25;
    EXPECT_DOUBLE_EQ(local_field(net, State{1, 1, 0}, 0), 0.7);
    EXPECT_NEAR(local_field(net, State{1, 1, 0}, 2), 0.35, 1e-15);
}

TEST(Network, EnergyExamples) {
    BeliefNetwork one(1, Activation(ActivationKind::Sigmoid));
    EXPECT_NEAR(energy(one, State{1}), std::log(2.0), 1e-15);
    EXPECT_NEAR(energy(two_unit(1.0), State{1, 1}), 1.006409, 1e-6);
    BeliefNetwork noisy(1, Activation(ActivationKind::NoisyOr));
    noisy.biases = {std::log(2.0)};
    EXPECT_NEAR(energy(noisy, State{0}), std::log(2.0), 1e-15);
}

TEST(Network, BoltzmannFactorIsTheChainRuleProduct) {
    Rng rng(11);
    for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::NoisyOr}) {
        for (int c = 0; c < 20; ++c) {
            const BeliefNetwork net = random_test_network(rng, kind, 6, 2.0);
            double total = 0.0;
            oracle::for_all_states(6, [&](const std::vector<std::uint8_t>& s) {
                const double p = std::exp(-energy(net, oracle::to_state(s)));
                EXPECT_GT(p, 0.0);
                EXPECT_LE(p, 1.0);
                EXPECT_NEAR(p, oracle::brute_probability(net, s), 1e-13);
                total += p;
            });
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Network, MeanFieldInput) {
    BeliefNetwork net = two_unit(2.0);
    MeanVector u(2);
    EXPECT_DOUBLE_EQ(mean_field_input(net, u, 1), 1.0);
    net.weight(1, 0) = 0.0;
    net.biases = {0.3, -0.4};
    EXPECT_DOUBLE_EQ(mean_field_input(net, u, 1), -0.4);

    Rng rng(3);
    const BeliefNetwork r = random_test_network(rng, ActivationKind::Sigmoid, 5, 1.0);
    const State s{1, 0, 1, 1, 0};
    MeanVector binary(5);
    for (std::size_t i = 0; i < 5; ++i) binary[i] = s[i];
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(mean_field_input(r, binary, i), local_field(r, s, i), 1e-15);
}

TEST(Network, TaylorEnergyAtZeroCouplingUsesMeanFields) {
    Rng rng(5);
    const BeliefNetwork net = random_test_network(rng, ActivationKind::Sigmoid, 4, 1.0);
    MeanVector u(4);
    u.values = {0.2, 0.7, 0.4, 0.9};
    const State s{1, 0, 0, 1};
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double f = net.activation.value(mean_field_input(net, u, i));
        expected -= s[i] ? std::log(f) : std::log(1 - f);
    }
    for (int order : {1, 2}) EXPECT_NEAR(taylor_energy(net, u, s, 0.0, order), expected, 1e-12);
}

TEST(Network, TaylorEnergyIsExactAtBinaryMeans) {
    Rng rng(6);
    const BeliefNetwork net = random_test_network(rng, ActivationKind::NoisyOr, 5, 1.0);
    const State s{1, 1, 0, 1, 0};
    MeanVector u(5);
    for (std::size_t i = 0; i < 5; ++i) u[i] = s[i];
    for (double beta : {0.0, 0.5, 1.0}) {
        for (int order : {1, 2}) EXPECT_NEAR(taylor_energy(net, u, s, beta, order), energy(net, s), 1e-12);
    }
}

TEST(Network, TaylorRemainderIsThirdOrder) {
    // |E2(1) - E| <= sum_i max|d^3 log-score| |X_i|^3 / 6 over the segment.
    Rng rng(9);
    const BeliefNetwork net = random_test_network(rng, ActivationKind::Sigmoid, 3, 1.0, 1.0);
    MeanVector u(3);
    u.values = {0.3, 0.6, 0.45};
    oracle::for_all_states(3, [&](const std::vector<std::uint8_t>& bits) {
        const State s = oracle::to_state(bits);
        double bound = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double mbar = mean_field_input(net, u, i);
            const double x = local_field(net, s, i) - mbar;
            double worst = 0.0;
            for (int k = 0; k <= 100; ++k) {
                const LogScores ls = net.activation.log_scores(mbar + x * k / 100.0);
                worst = std::max(worst, std::abs(s[i] ? ls.on[3] : ls.off[3]));
            }
            bound += worst * std::abs(x * x * x) / 6.0;
        }
        EXPECT_LE(std::abs(taylor_energy(net, u, s, 1.0, 2) - energy(net, s)), bound * 1.01 + 1e-14);
    });
}
