#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mfbn/errors.hpp"
#include "mfbn/learning.hpp"
#include "test_support.hpp"

using namespace mfbn;
using oracle::sigmoid;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("mfbn_test_" + name);
}

BeliefNetwork small_bars_net(ActivationKind kind, std::uint64_t seed) {
    return initial_bars_network(kind, {1, 3, 4}, seed);
}

}  // namespace

TEST(Learning, BiasGradientOfChildlessVisibleUnit) {
    BeliefNetwork net = small_bars_net(ActivationKind::Sigmoid, 3);
    const Pattern p{1, 0, 1, 1};
    const PatternGradient g = loglik_gradient(net, p, SchemeId::G11, SolverOptions{});
    ASSERT_TRUE(g.converged);
    for (std::size_t k = 0; k < net.visible.size(); ++k) {
        const std::size_t i = net.visible[k];
        const double mbar = mean_field_input(net, g.solve.u, i);
        EXPECT_NEAR(g.dh[i], p[k] - sigmoid(mbar), 1e-12);
    }
}

TEST(Learning, ParameterGradientMatchesFiniteDifferenceAtFixedMeans) {
    for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::NoisyOr}) {
        for (SchemeId s : kAllSchemes) {
            BeliefNetwork net = small_bars_net(kind, 11);
            for (double& w : net.weights) w *= 5.0;
            const Pattern p{0, 1, 1, 0};
            const PatternGradient g = loglik_gradient(net, p, s, SolverOptions{});
            ASSERT_TRUE(g.converged);
            const MeanVector& u = g.solve.u;
            const double h = 1e-6;
            const std::size_t n = net.n_units();
            for (std::size_t i = 0; i < n; ++i) {
                BeliefNetwork up = net;
                BeliefNetwork dn = net;
                up.biases[i] += h;
                dn.biases[i] -= h;
                const double fd = -(objective(up, u, s) - objective(dn, u, s)) / (2 * h);
                EXPECT_NEAR(g.dh[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
                for (std::size_t j = 0; j < i; ++j) {
                    if (net.weight(i, j) == 0.0) continue;
                    up = net;
                    dn = net;
                    up.weight(i, j) += h;
                    dn.weight(i, j) -= h;
                    const double fdw = -(objective(up, u, s) - objective(dn, u, s)) / (2 * h);
                    EXPECT_NEAR(g.dw[i * n + j], fdw, 1e-6 * std::max(1.0, std::abs(fdw)));
                }
            }
        }
    }
}

TEST(Learning, GradientTracksTrueLikelihoodAtSmallWeights) {
    BeliefNetwork net = small_bars_net(ActivationKind::Sigmoid, 5);
    for (double& w : net.weights) w *= 0.1;
    const Pattern p{1, 1, 0, 0};
    const PatternGradient g = loglik_gradient(net, p, SchemeId::G12, SolverOptions{});
    ASSERT_TRUE(g.converged);
    const std::vector<Pattern> one{p};
    const double h = 1e-5;
    const std::size_t n = net.n_units();
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (net.weight(i, j) == 0.0) continue;
            BeliefNetwork up = net;
            BeliefNetwork dn = net;
            up.weight(i, j) += h;
            dn.weight(i, j) -= h;
            const double fd = (true_loglik(up, one) - true_loglik(dn, one)) / (2 * h);
            EXPECT_NEAR(g.dw[i * n + j], fd, 2e-3);
        }
    }
}

TEST(Learning, ZeroEpochsOnlyEvaluatesOnce) {
    const auto data = bars_dataset(20, 2, 1);
    TrainConfig cfg = default_train_config(ActivationKind::Sigmoid);
    cfg.epochs = 0;
    const BeliefNetwork net = small_bars_net(ActivationKind::Sigmoid, 1);
    const TrainResult r = train(net, data, cfg);
    ASSERT_EQ(r.history.records.size(), 1u);
    EXPECT_EQ(r.history.records[0].epoch, 0);
    EXPECT_TRUE(r.history.unconverged_per_epoch.empty());
    EXPECT_EQ(r.net, net);
}

TEST(Learning, DeterministicAcrossJobCounts) {
    const auto data = bars_dataset(40, 2, 3);
    TrainConfig cfg = default_train_config(ActivationKind::Sigmoid);
    cfg.epochs = 5;
    cfg.eval_every = 2;
    cfg.jobs = 1;
    const TrainResult a = train(small_bars_net(ActivationKind::Sigmoid, 2), data, cfg);
    cfg.jobs = 3;
    const TrainResult b = train(small_bars_net(ActivationKind::Sigmoid, 2), data, cfg);
    EXPECT_EQ(a.net, b.net);
    ASSERT_EQ(a.history.records.size(), b.history.records.size());
    for (std::size_t k = 0; k < a.history.records.size(); ++k) {
        EXPECT_EQ(a.history.records[k].mean_true_loglik, b.history.records[k].mean_true_loglik);
        EXPECT_EQ(a.history.records[k].epoch, b.history.records[k].epoch);
    }
    EXPECT_EQ(a.history.records.back().epoch, 5);
}

TEST(Learning, BiasOnlyLearningMatchesEmpiricalMeans) {
    BeliefNetwork net(3, Activation(ActivationKind::Sigmoid));
    net.visible = {0, 1, 2};
    const std::vector<Pattern> data{{1, 0, 1}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}};
    TrainConfig cfg = default_train_config(ActivationKind::Sigmoid);
    cfg.learning_rate = 1.0;
    cfg.epochs = 300;
    cfg.eval_every = 300;
    cfg.learn_weights = false;
    const TrainResult r = train(net, data, cfg);
    const double expected[] = {0.75, 0.25, 0.75};
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(sigmoid(r.net.biases[i]), expected[i], 1e-3);
    EXPECT_GT(r.history.records.back().mean_true_loglik, r.history.records.front().mean_true_loglik);
}

TEST(Learning, NoisyOrStaysFeasible) {
    const auto data = bars_dataset(30, 2, 4);
    TrainConfig cfg = default_train_config(ActivationKind::NoisyOr);
    cfg.epochs = 5;
    cfg.learning_rate = 0.5;
    const TrainResult r = train(small_bars_net(ActivationKind::NoisyOr, 4), data, cfg);
    for (double w : r.net.weights) EXPECT_GE(w, 0.0);
    for (double h : r.net.biases) EXPECT_GE(h, kNoisyOrMinBias);
}

TEST(Learning, BarsReproducible) {
    EXPECT_EQ(bars_dataset(50, 4, 9), bars_dataset(50, 4, 9));
    EXPECT_NE(bars_dataset(50, 4, 9), bars_dataset(50, 4, 10));
}

TEST(Learning, BarsAreUnionsOfBars) {
    const std::size_t side = 4;
    for (const Pattern& p : bars_dataset(500, side, 2)) {
        ASSERT_EQ(p.size(), side * side);
        bool rows = true;
        bool cols = true;
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                rows = rows && p[r * side + c] == p[r * side];
                cols = cols && p[r * side + c] == p[c];
            }
        }
        EXPECT_TRUE(rows || cols);
    }
}

TEST(Learning, EmptyImageFrequency) {
    // Blank with probability 1/16 whichever orientation is drawn.
    const auto data = bars_dataset(100000, 4, 6);
    std::size_t blank = 0;
    for (const Pattern& p : data) {
        bool any = false;
        for (auto v : p) any = any || v;
        blank += any ? 0 : 1;
    }
    EXPECT_NEAR(static_cast<double>(blank) / data.size(), 0.0625, 0.003);
}

TEST(Learning, TrueLoglikByHand) {
    BeliefNetwork net(2, Activation(ActivationKind::Sigmoid));
    net.biases = {0.4, -0.3};
    net.weight(1, 0) = 1.2;
    net.visible = {1};
    const double p1 = sigmoid(0.4) * sigmoid(0.9) + (1 - sigmoid(0.4)) * sigmoid(-0.3);
    EXPECT_NEAR(true_loglik(net, {{1}}), std::log(p1), 1e-14);
    EXPECT_NEAR(true_loglik(net, {{1}, {0}}), 0.5 * (std::log(p1) + std::log(1 - p1)), 1e-14);
    EXPECT_THROW(true_loglik(net, {}), ConfigError);
}

TEST(Learning, PatternFiles) {
    const auto path = temp_file("patterns.txt");
    const auto data = bars_dataset(10, 3, 1);
    write_patterns(data, path);
    EXPECT_EQ(read_patterns(path), data);
    {
        std::ofstream out(path);
        out << "0101\n01x1\n";
    }
    EXPECT_THROW(read_patterns(path), ParseError);
    {
        std::ofstream out(path);
        out << "0101\n011\n";
    }
    EXPECT_THROW(read_patterns(path), ParseError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_patterns(path), ParseError);
}

TEST(Learning, ConfigValidation) {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = {};
    cfg.epochs = -1;
    EXPECT_THROW(validate(cfg), ConfigError);
    const BeliefNetwork net = small_bars_net(ActivationKind::Sigmoid, 1);
    EXPECT_THROW(train(net, {{1, 0}}, TrainConfig{}), ConfigError);
}
