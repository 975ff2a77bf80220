#pragma once

// Oracles for the tests. They share no code with the library's enumeration
// layer beyond the network type and the activation's f(x).

#include <cmath>
#include <cstdint>
#include <vector>

#include "mfbn/enumeration.hpp"
#include "mfbn/network.hpp"
#include "mfbn/rng.hpp"

namespace mfbn::oracle {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline State to_state(const std::vector<std::uint8_t>& bits) {
    State s;
    s.bits = bits;
    return s;
}

/// Conditional probability of the whole state as a product of per-unit
/// Bernoulli factors, computed straight from f without logarithms.
inline double brute_probability(const BeliefNetwork& net, const std::vector<std::uint8_t>& s) {
    double p = 1.0;
    for (std::size_t i = 0; i < net.n_units(); ++i) {
        double m = net.biases[i];
        for (std::size_t j = 0; j < i; ++j) m += net.weight(i, j) * s[j];
        const double f = net.activation.value(m);
        p *= s[i] ? f : 1.0 - f;
    }
    return p;
}

/// Visits all 2^n binary vectors; bit k of the counter is entry k.
template <class F>
void for_all_states(std::size_t n, F&& f) {
    std::vector<std::uint8_t> s(n);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
        for (std::size_t k = 0; k < n; ++k) s[k] = static_cast<std::uint8_t>(c >> k & 1u);
        f(s);
    }
}

/// ln of the summed probability of all states consistent with `observed`.
inline double brute_log_z(const BeliefNetwork& net, const std::vector<std::uint8_t>& observed) {
    double z = 0.0;
    for_all_states(net.n_units(), [&](const std::vector<std::uint8_t>& s) {
        for (std::size_t k = 0; k < observed.size(); ++k) {
            if (s[net.visible[k]] != observed[k]) return;
        }
        z += brute_probability(net, s);
    });
    return std::log(z);
}

/// Product-Bernoulli weight of a state under means u.
inline double factorial_weight(const std::vector<double>& u, const std::vector<std::uint8_t>& s) {
    double w = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) w *= s[i] ? u[i] : 1.0 - u[i];
    return w;
}

/// Second Plefka derivative by a double loop over states, written without
/// the library's helpers: -Var(E) + sum_i Cov(E, S_i)^2 / v_i.
template <class EnergyFn>
double double_loop_second_derivative(const std::vector<double>& u, EnergyFn&& energy) {
    const std::size_t n = u.size();
    double mean = 0.0;
    for_all_states(n, [&](const std::vector<std::uint8_t>& s) { mean += factorial_weight(u, s) * energy(s); });
    double var = 0.0;
    std::vector<double> cov(n, 0.0);
    for_all_states(n, [&](const std::vector<std::uint8_t>& s) {
        const double w = factorial_weight(u, s);
        const double d = energy(s) - mean;
        var += w * d * d;
        for (std::size_t i = 0; i < n; ++i) cov[i] += w * d * (s[i] - u[i]);
    });
    double out = -var;
    for (std::size_t i = 0; i < n; ++i) out += cov[i] * cov[i] / (u[i] * (1.0 - u[i]));
    return out;
}

/// Single-site Gibbs sampler for the posterior means given a clamp. Returns
/// the per-unit sample means and their standard errors from batch means.
struct SampleMeans {
    std::vector<double> mean;
    std::vector<double> stderr_;
};

inline SampleMeans gibbs_sample_means(const BeliefNetwork& net, const std::vector<std::uint8_t>& observed,
                                      std::size_t sweeps, std::uint64_t seed) {
    const std::size_t n = net.n_units();
    Rng rng(seed);
    std::vector<std::uint8_t> s(n, 0);
    std::vector<int> fixed(n, -1);
    for (std::size_t k = 0; k < observed.size(); ++k) {
        fixed[net.visible[k]] = observed[k];
        s[net.visible[k]] = observed[k];
    }
    const std::size_t burn = sweeps / 10;
    const std::size_t batches = 50;
    const std::size_t per_batch = (sweeps - burn) / batches;
    std::vector<std::vector<double>> batch_means(batches, std::vector<double>(n, 0.0));
    for (std::size_t t = 0; t < burn + per_batch * batches; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (fixed[i] >= 0) continue;
            s[i] = 1;
            const double p1 = brute_probability(net, s);
            s[i] = 0;
            const double p0 = brute_probability(net, s);
            s[i] = rng.uniform01() * (p0 + p1) < p1 ? 1 : 0;
        }
        if (t < burn) continue;
        const std::size_t b = (t - burn) / per_batch;
        for (std::size_t i = 0; i < n; ++i) batch_means[b][i] += s[i];
    }
    SampleMeans out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (auto& bm : batch_means) {
        for (std::size_t i = 0; i < n; ++i) {
            bm[i] /= static_cast<double>(per_batch);
            out.mean[i] += bm[i] / batches;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (const auto& bm : batch_means) v += (bm[i] - out.mean[i]) * (bm[i] - out.mean[i]);
        out.stderr_[i] = std::sqrt(v / (batches - 1) / batches);
    }
    return out;
}

/// The sigmoid second-order correction as written in its published closed form, taken
/// literally with t = min(i, j) and the upper sums running to N.
inline double printed_sigmoid_correction(const BeliefNetwork& net, const std::vector<double>& u) {
    const std::size_t n = net.n_units();
    std::vector<double> mbar(n);
    for (std::size_t i = 0; i < n; ++i) {
        mbar[i] = net.biases[i];
        for (std::size_t j = 0; j < i; ++j) mbar[i] += net.weight(i, j) * u[j];
    }
    const auto w = [&](std::size_t a, std::size_t b) { return b < a ? net.weight(a, b) : 0.0; };
    const auto v = [&](std::size_t a) { return u[a] * (1.0 - u[a]); };
    const auto r = [&](std::size_t a) { return u[a] - sigmoid(mbar[a]); };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double term = 0.0;
        for (std::size_t l = 0; l < i; ++l) {
            term += w(i, l) * v(l) * (mbar[l] * (u[i] - sigmoid(mbar[l])) + w(i, l) * v(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t t = std::min(i, j);
            for (std::size_t k = 0; k < t; ++k) term += w(j, k) * w(i, k) * v(k) * r(i) * r(j);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t l = i + 1; l < n; ++l) term -= (w(i, l) * r(l) + mbar[i]) * r(j) * w(j, i) * v(i);
        }
        total += term;
    }
    return -0.5 * total;
}

// d/dM and d2/dM2 of s ln f(M) + (1 - s) ln(1 - f(M)), written out by hand.
struct Score {
    double value, d1, d2;
};

inline Score unit_score(ActivationKind kind, double m, int s) {
    if (kind == ActivationKind::Sigmoid) {
        const double p = sigmoid(m);
        const double curv = -p * (1 - p);
        return s ? Score{std::log(p), 1 - p, curv} : Score{std::log(1 - p), -p, curv};
    }
    const double em = std::exp(m);
    if (s) return {std::log(-std::expm1(-m)), 1.0 / (em - 1.0), -em / ((em - 1.0) * (em - 1.0))};
    return {-m, -1.0, 0.0};
}

// Energy with each local field replaced by its second-order expansion around M̄.
inline double quadratic_energy(const BeliefNetwork& net, const std::vector<double>& u, const std::vector<std::uint8_t>& s,
                        int order) {
    double e = 0.0;
    for (std::size_t i = 0; i < net.n_units(); ++i) {
        double mbar = net.biases[i];
        double x = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            mbar += net.weight(i, j) * u[j];
            x += net.weight(i, j) * (s[j] - u[j]);
        }
        const Score sc = unit_score(net.activation.kind(), mbar, s[i]);
        e -= sc.value + x * sc.d1 + (order >= 2 ? 0.5 * x * x * sc.d2 : 0.0);
    }
    return e;
}

struct Oracle {
    double g11, g12, g22;
};

// Orders (1,1), (1,2) and (2,2) by summing over all 2^N states; pinned
// entries of u are 0 or 1 so their factorial weight does the clamping.
inline Oracle enumerate_objectives(const BeliefNetwork& net, const MeanVector& mv) {
    const std::vector<double>& u = mv.values;
    const std::size_t n = net.n_units();
    double g0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mv.is_pinned(i)) g0 += u[i] * std::log(u[i]) + (1 - u[i]) * std::log(1 - u[i]);
    }
    double e1 = 0.0;
    double e2 = 0.0;
    for_all_states(n, [&](const std::vector<std::uint8_t>& s) {
        const double w = factorial_weight(u, s);
        if (w == 0.0) return;
        e1 += w * quadratic_energy(net, u, s, 1);
        e2 += w * quadratic_energy(net, u, s, 2);
    });
    double var = 0.0;
    std::vector<double> cov(n, 0.0);
    for_all_states(n, [&](const std::vector<std::uint8_t>& s) {
        const double w = factorial_weight(u, s);
        if (w == 0.0) return;
        const double d = quadratic_energy(net, u, s, 2) - e2;
        var += w * d * d;
        for (std::size_t i = 0; i < n; ++i) cov[i] += w * d * (s[i] - u[i]);
    });
    double second = -var;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mv.is_pinned(i)) second += cov[i] * cov[i] / (u[i] * (1 - u[i]));
    }
    return {g0 + e1, g0 + e2, g0 + e2 + 0.5 * second};
}

}  // namespace mfbn::oracle
