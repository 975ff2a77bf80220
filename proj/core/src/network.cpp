#include "mfbn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfbn/errors.hpp"

namespace mfbn {

BeliefNetwork::BeliefNetwork(std::size_t n_units, Activation act)
    : activation(act), biases(n_units, 0.0), weights(n_units * n_units, 0.0) {}

bool BeliefNetwork::is_visible(std::size_t i) const {
    return std::binary_search(visible.begin(), visible.end(), i);
}

std::size_t BeliefNetwork::edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

void validate(const BeliefNetwork& net) {
    const std::size_t n = net.n_units();
    if (n == 0) throw ValidationError("network has no units");
    if (net.weights.size() != n * n) {
        throw ValidationError("weight matrix has " + std::to_string(net.weights.size()) +
                              " entries, expected " + std::to_string(n * n));
    }
    const bool noisy_or = net.activation.kind() == ActivationKind::NoisyOr;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(net.biases[i])) {
            throw ValidationError("bias of unit " + std::to_string(i + 1) + " is not finite");
        }
        if (noisy_or && net.biases[i] < 0.0) {
            throw ValidationError("negative bias on unit " + std::to_string(i + 1) +
                                  " in a noisy-or network");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double w = net.weight(i, j);
            if (w == 0.0) continue;
            const std::string edge = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            if (j >= i) throw ValidationError("acyclicity violated: weight " + edge + " with j >= i");
            if (!std::isfinite(w)) throw ValidationError("weight " + edge + " is not finite");
            if (noisy_or && w < 0.0) {
                throw ValidationError("negative weight " + edge + " in a noisy-or network");
            }
        }
    }
    for (std::size_t k = 0; k < net.visible.size(); ++k) {
        if (net.visible[k] >= n) {
            throw ValidationError("bad visible index " + std::to_string(net.visible[k] + 1));
        }
        if (k > 0 && net.visible[k] <= net.visible[k - 1]) {
            throw ValidationError("visible indices must be strictly increasing");
        }
    }
}

void validate_means(const BeliefNetwork& net, const MeanVector& u) {
    if (u.size() != net.n_units() || u.pinned.size() != net.n_units()) {
        throw ValidationError("mean vector length does not match the network");
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.is_pinned(i)) {
            if (u[i] != 0.0 && u[i] != 1.0) {
                throw ValidationError("pinned mean of unit " + std::to_string(i + 1) + " is not binary");
            }
        } else if (!(u[i] > 0.0 && u[i] < 1.0)) {
            throw ValidationError("free mean of unit " + std::to_string(i + 1) + " is not inside (0,1)");
        }
    }
}

double local_field(const BeliefNetwork& net, const State& state, std::size_t i) {
    const std::size_t n = net.n_units();
    const double* row = net.weights.data() + i * n;
    double m = net.biases[i];
    for (std::size_t j = 0; j < i; ++j) {
        if (state[j]) m += row[j];
    }
    return m;
}

double energy(const BeliefNetwork& net, const State& state) {
    double e = 0.0;
    for (std::size_t i = 0; i < net.n_units(); ++i) {
        const LogScores s = net.activation.log_scores(local_field(net, state, i));
        e -= state[i] ? s.on[0] : s.off[0];
    }
    return e;
}

double mean_field_input(const BeliefNetwork& net, std::span<const double> u, std::size_t i) {
    const std::size_t n = net.n_units();
    const double* row = net.weights.data() + i * n;
    double m = net.biases[i];
    for (std::size_t j = 0; j < i; ++j) m += row[j] * u[j];
    return m;
}

double taylor_energy(const BeliefNetwork& net, std::span<const double> u, const State& state,
                     double beta, int order) {
    if (order != 1 && order != 2) throw ConfigError("taylor order must be 1 or 2");
    const std::size_t n = net.n_units();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = net.weights.data() + i * n;
        double x = 0.0;
        for (std::size_t j = 0; j < i; ++j) x += row[j] * (state[j] - u[j]);
        const LogScores s = net.activation.log_scores(mean_field_input(net, u, i));
        const double* d = state[i] ? s.on : s.off;
        const double bx = beta * x;
        double term = d[0] + d[1] * bx;
        if (order == 2) term += 0.5 * d[2] * bx * bx;
        e -= term;
    }
    return e;
}

}  // namespace mfbn
