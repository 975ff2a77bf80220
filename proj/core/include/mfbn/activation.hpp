#pragma once

#include <string_view>

namespace mfbn {

enum class ActivationKind { Sigmoid, NoisyOr };

/// Probabilities are floored into [kProbabilityFloor, 1 - kProbabilityFloor]
/// before any logarithm is taken.
inline constexpr double kProbabilityFloor = 1e-12;

std::string_view to_string(ActivationKind kind);
ActivationKind activation_from_string(std::string_view name);

/// ln f and ln(1 - f) together with their first three derivatives, all
/// evaluated at the same point. A floored branch is constant, so its
/// derivatives are zero there.
struct LogScores {
    double on[4];   // d^k/dx^k ln f(x),       k = 0..3
    double off[4];  // d^k/dx^k ln(1 - f(x)),  k = 0..3
};

/// Unit activation f together with the derivatives the expansions need.
///
/// sigmoid:  f(x) = 1 / (1 + e^-x) on the whole real line.
/// noisy-or: f(x) = 1 - e^-x on x >= 0.
class Activation {
public:
    constexpr explicit Activation(ActivationKind kind = ActivationKind::Sigmoid) : kind_(kind) {}

    constexpr ActivationKind kind() const { return kind_; }

    bool in_domain(double x) const;

    /// f(x) without flooring.
    double value(double x) const;
    /// 1 - f(x), computed without cancellation.
    double complement(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double d3(double x) const;

    /// Floored log-probabilities and their derivatives. Throws DomainError
    /// outside the activation domain.
    LogScores log_scores(double x) const;

    friend constexpr bool operator==(Activation, Activation) = default;

private:
    ActivationKind kind_;
};

}  // namespace mfbn
