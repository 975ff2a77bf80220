#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mfbn/network.hpp"
#include "mfbn/objective.hpp"
#include "mfbn/solver.hpp"

namespace mfbn {

/// Observed values of the visible units, in BeliefNetwork::visible order.
using Pattern = std::vector<std::uint8_t>;

struct TrainConfig {
    SchemeId scheme = SchemeId::G12;
    double learning_rate = 0.05;
    int epochs = 100;
    /// 0 means full batch; otherwise consecutive batches of this size.
    std::size_t batch_size = 0;
    std::uint64_t seed = 1;
    SolverOptions solver{};
    /// Evaluate the true log-likelihood every this many epochs (and at the
    /// start and the end).
    int eval_every = 10;
    bool learn_weights = true;
    bool learn_biases = true;
    int jobs = 1;
};

/// Defaults for an activation: learning rate 0.05 (sigmoid) or 0.01 (noisy-or).
TrainConfig default_train_config(ActivationKind kind);

void validate(const TrainConfig& config);

struct EvalRecord {
    int epoch = 0;
    /// Mean over patterns of ln Z_c by enumeration over the hidden units.
    double mean_true_loglik = 0.0;
    /// Mean over patterns of the scheme objective at its fixed point.
    double mean_objective = 0.0;
    std::size_t unconverged = 0;
};

struct TrainHistory {
    std::vector<EvalRecord> records;
    /// Number of patterns whose solve did not converge, per training epoch.
    std::vector<std::size_t> unconverged_per_epoch;
};

struct TrainResult {
    BeliefNetwork net;
    TrainHistory history;
};

/// -dĜ/dw and -dĜ/dh at the fixed point for one pattern, u held fixed.
struct PatternGradient {
    bool converged = false;
    SolveResult solve;
    std::vector<double> dw;  // dense n x n
    std::vector<double> dh;
};

PatternGradient loglik_gradient(const BeliefNetwork& net, const Pattern& pattern, SchemeId scheme,
                                const SolverOptions& opts, const MeanVector* warm_start = nullptr);

/// Full-batch (or fixed-batch) gradient ascent on the mean approximate
/// log-likelihood. Noisy-or parameters are projected back onto the feasible
/// set after every step. Deterministic for fixed inputs and any job count.
TrainResult train(BeliefNetwork net, const std::vector<Pattern>& patterns, const TrainConfig& config);

/// Bars images: a fair coin picks rows or columns, then each of the `side`
/// bars of that orientation is present with probability 1/2. Flattened
/// row-major to side * side values.
std::vector<Pattern> bars_dataset(std::size_t n_patterns, std::size_t side, std::uint64_t seed);

/// Layered network for the bars experiment (top layer first, bottom layer
/// visible). Sigmoid: zero biases, weights uniform on [-0.1, 0.1]. Noisy-or:
/// biases 0.5, weights uniform on [0, 0.1].
BeliefNetwork initial_bars_network(ActivationKind kind, const std::vector<std::size_t>& topology,
                                   std::uint64_t seed);

/// Mean over patterns of the exact clamped log-partition.
double true_loglik(const BeliefNetwork& net, const std::vector<Pattern>& patterns);

/// One pattern per line as a string of '0'/'1'.
std::vector<Pattern> read_patterns(const std::filesystem::path& path);
void write_patterns(const std::vector<Pattern>& patterns, const std::filesystem::path& path);

/// Smallest bias kept on noisy-or units during learning.
inline constexpr double kNoisyOrMinBias = 1e-3;

}  // namespace mfbn
