#include <gtest/gtest.h>

#include <cmath>

#include "mfbn/activation.hpp"
#include "mfbn/errors.hpp"

using namespace mfbn;

namespace {

const Activation kSigmoid(ActivationKind::Sigmoid);
const Activation kNoisyOr(ActivationKind::NoisyOr);

double central(const auto& f, double x, double h) { return (f(x + h) - f(x - h)) / (2 * h); }

}  // namespace

TEST(Activation, SigmoidIdentities) {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        const double f = kSigmoid.value(x);
        EXPECT_NEAR(f + kSigmoid.value(-x), 1.0, 1e-15);
        EXPECT_NEAR(kSigmoid.d1(x), f * (1 - f), 1e-15);
        EXPECT_NEAR(kSigmoid.d2(x), f * (1 - f) * (1 - 2 * f), 1e-15);
        EXPECT_NEAR(kSigmoid.complement(x), 1 - f, 1e-15);
    }
}

TEST(Activation, NoisyOrIdentities) {
    for (double x = 0.01; x <= 10.0; x += 0.29) {
        EXPECT_NEAR(kNoisyOr.value(x), -std::expm1(-x), 1e-15);
        EXPECT_NEAR(kNoisyOr.d1(x), std::exp(-x), 1e-15);
        EXPECT_NEAR(kNoisyOr.d2(x), -std::exp(-x), 1e-15);
        EXPECT_EQ(kNoisyOr.log_scores(x).off[0], -x);
    }
}

TEST(Activation, LogScoreDerivativesMatchFiniteDifferences) {
    for (const Activation& act : {kSigmoid, kNoisyOr}) {
        for (double x : {0.3, 0.9, 2.0, 4.5}) {
            const LogScores s = act.log_scores(x);
            for (int k = 1; k <= 3; ++k) {
                const auto on = [&](double y) { return act.log_scores(y).on[k - 1]; };
                const auto off = [&](double y) { return act.log_scores(y).off[k - 1]; };
                EXPECT_NEAR(s.on[k], central(on, x, 1e-5), 1e-6 * std::max(1.0, std::abs(s.on[k])));
                EXPECT_NEAR(s.off[k], central(off, x, 1e-5), 1e-6 * std::max(1.0, std::abs(s.off[k])));
            }
        }
    }
}

TEST(Activation, SigmoidLogScoresStayFiniteInTails) {
    for (double x : {-40.0, -700.0, 40.0, 700.0}) {
        const LogScores s = kSigmoid.log_scores(x);
        for (int k = 0; k < 4; ++k) {
            EXPECT_TRUE(std::isfinite(s.on[k]));
            EXPECT_TRUE(std::isfinite(s.off[k]));
        }
        EXPECT_GE(s.on[0], std::log(kProbabilityFloor));
        EXPECT_GE(s.off[0], std::log(kProbabilityFloor));
    }
}

TEST(Activation, FlooredBranchIsConstant) {
    const LogScores s = kNoisyOr.log_scores(0.0);
    EXPECT_DOUBLE_EQ(s.on[0], std::log(kProbabilityFloor));
    EXPECT_EQ(s.on[1], 0.0);
    EXPECT_EQ(s.on[2], 0.0);
    EXPECT_NEAR(s.off[0], std::log1p(-kProbabilityFloor), 1e-24);
}

TEST(Activation, NoisyOrRejectsNegativeInput) {
    EXPECT_FALSE(kNoisyOr.in_domain(-0.1));
    EXPECT_THROW((void)kNoisyOr.log_scores(-0.1), DomainError);
    EXPECT_TRUE(kSigmoid.in_domain(-50.0));
}

TEST(Activation, Names) {
    EXPECT_EQ(to_string(ActivationKind::Sigmoid), "sigmoid");
    EXPECT_EQ(to_string(ActivationKind::NoisyOr), "noisy_or");
    EXPECT_EQ(activation_from_string("noisy_or"), ActivationKind::NoisyOr);
    EXPECT_EQ(activation_from_string("noisy-or"), ActivationKind::NoisyOr);
    EXPECT_THROW(activation_from_string("tanh"), Error);
}
