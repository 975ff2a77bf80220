#include "mfbn/activation.hpp"

#include <cmath>
#include <string>

#include "mfbn/errors.hpp"

namespace mfbn {
namespace {

const double kLogFloor = std::log(kProbabilityFloor);
const double kLogCeil = std::log1p(-kProbabilityFloor);

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Replaces a branch by its floored constant when p leaves [eps, 1 - eps].
bool apply_floor(double p, double (&branch)[4]) {
    if (p >= kProbabilityFloor && p <= 1.0 - kProbabilityFloor) return false;
    branch[0] = p < kProbabilityFloor ? kLogFloor : kLogCeil;
    branch[1] = branch[2] = branch[3] = 0.0;
    return true;
}

}  // namespace

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::NoisyOr: return "noisy_or";
    }
    return "unknown";
}

ActivationKind activation_from_string(std::string_view name) {
    if (name == "sigmoid") return ActivationKind::Sigmoid;
    if (name == "noisy_or" || name == "noisy-or" || name == "noisyor") return ActivationKind::NoisyOr;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

bool Activation::in_domain(double x) const {
    if (std::isnan(x)) return false;
    return kind_ == ActivationKind::Sigmoid || x >= 0.0;
}

double Activation::value(double x) const {
    if (kind_ == ActivationKind::Sigmoid) return 1.0 / (1.0 + std::exp(-x));
    return -std::expm1(-x);
}

double Activation::complement(double x) const {
    if (kind_ == ActivationKind::Sigmoid) return 1.0 / (1.0 + std::exp(x));
    return std::exp(-x);
}

double Activation::d1(double x) const {
    if (kind_ == ActivationKind::Sigmoid) return value(x) * complement(x);
    return std::exp(-x);
}

double Activation::d2(double x) const {
    if (kind_ == ActivationKind::Sigmoid) {
        const double f = value(x);
        return f * complement(x) * (1.0 - 2.0 * f);
    }
    return -std::exp(-x);
}

double Activation::d3(double x) const {
    if (kind_ == ActivationKind::Sigmoid) {
        const double f = value(x);
        return f * complement(x) * (1.0 - 6.0 * f + 6.0 * f * f);
    }
    return std::exp(-x);
}

LogScores Activation::log_scores(double x) const {
    if (!in_domain(x)) {
        throw DomainError("activation " + std::string(to_string(kind_)) +
                          " evaluated outside its domain at x=" + std::to_string(x));
    }
    LogScores s{};
    const double f = value(x);
    const double q = complement(x);
    if (kind_ == ActivationKind::Sigmoid) {
        const double fq = f * q;
        const double d3 = -fq * (1.0 - 2.0 * f);
        if (!apply_floor(f, s.on)) {
            s.on[0] = -softplus(-x);
            s.on[1] = q;
            s.on[2] = -fq;
            s.on[3] = d3;
        }
        if (!apply_floor(q, s.off)) {
            s.off[0] = -softplus(x);
            s.off[1] = -f;
            s.off[2] = -fq;
            s.off[3] = d3;
        }
        return s;
    }
    if (!apply_floor(f, s.on)) {
        const double em1 = std::expm1(x);
        const double ex = em1 + 1.0;
        s.on[0] = std::log(f);
        s.on[1] = 1.0 / em1;
        s.on[2] = -ex / (em1 * em1);
        s.on[3] = ex * (ex + 1.0) / (em1 * em1 * em1);
    }
    if (!apply_floor(q, s.off)) {
        s.off[0] = -x;
        s.off[1] = -1.0;
        s.off[2] = 0.0;
        s.off[3] = 0.0;
    }
    return s;
}

}  // namespace mfbn
