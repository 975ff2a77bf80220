#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfbn/activation.hpp"

namespace mfbn {

/// Layered-energy belief network over binary units in a fixed topological
/// order. Unit indices are 0-based here; the text format is 1-based.
///
/// The conditional of unit i is f(M_i) with M_i = sum_{j<i} w_ij s_j + h_i,
/// so weights live strictly below the diagonal.
struct BeliefNetwork {
    BeliefNetwork() = default;
    BeliefNetwork(std::size_t n_units, Activation act);

    std::size_t n_units() const { return biases.size(); }

    double weight(std::size_t i, std::size_t j) const { return weights[i * n_units() + j]; }
    double& weight(std::size_t i, std::size_t j) { return weights[i * n_units() + j]; }

    bool is_visible(std::size_t i) const;
    std::size_t edge_count() const;

    Activation activation{};
    std::vector<double> biases;
    /// Dense row-major n x n; only entries with j < i may be non-zero.
    std::vector<double> weights;
    /// Sorted, duplicate-free unit indices.
    std::vector<std::size_t> visible;

    friend bool operator==(const BeliefNetwork&, const BeliefNetwork&) = default;
};

/// Full binary assignment to every unit.
struct State {
    State() = default;
    explicit State(std::size_t n) : bits(n, 0) {}
    State(std::initializer_list<std::uint8_t> init) : bits(init) {}

    std::size_t size() const { return bits.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
    std::uint8_t& operator[](std::size_t i) { return bits[i]; }

    std::vector<std::uint8_t> bits;

    friend bool operator==(const State&, const State&) = default;
};

/// Per-unit means. Pinned entries are observed values in {0, 1} and are
/// never touched by a solver.
struct MeanVector {
    MeanVector() = default;
    explicit MeanVector(std::size_t n, double fill = 0.5) : values(n, fill), pinned(n, 0) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool is_pinned(std::size_t i) const { return pinned[i] != 0; }

    void pin(std::size_t i, std::uint8_t observed) {
        values[i] = observed;
        pinned[i] = 1;
    }

    std::vector<double> values;
    std::vector<std::uint8_t> pinned;
};

/// Throws ValidationError naming the first violated invariant.
void validate(const BeliefNetwork& net);

/// Throws ValidationError unless pinned entries are binary and free entries
/// lie strictly inside (0, 1).
void validate_means(const BeliefNetwork& net, const MeanVector& u);

/// M_i = sum_{j<i} w_ij s_j + h_i.
double local_field(const BeliefNetwork& net, const State& state, std::size_t i);

/// E(s) = -sum_i [s_i ln f(M_i) + (1 - s_i) ln(1 - f(M_i))], probabilities floored.
double energy(const BeliefNetwork& net, const State& state);

/// Mean parent field M̄_i = sum_{j<i} w_ij u_j + h_i.
double mean_field_input(const BeliefNetwork& net, std::span<const double> u, std::size_t i);
inline double mean_field_input(const BeliefNetwork& net, const MeanVector& u, std::size_t i) {
    return mean_field_input(net, std::span<const double>(u.values), i);
}

/// Order-`order` Taylor expansion in beta of the energy obtained by replacing
/// each local field with M̄_i + beta * X_i, X_i = sum_{j<i} w_ij (s_j - u_j).
/// order must be 1 or 2; beta lies in [0, 1].
double taylor_energy(const BeliefNetwork& net, std::span<const double> u, const State& state,
                     double beta, int order);
inline double taylor_energy(const BeliefNetwork& net, const MeanVector& u, const State& state,
                            double beta, int order) {
    return taylor_energy(net, std::span<const double>(u.values), state, beta, order);
}

}  // namespace mfbn
