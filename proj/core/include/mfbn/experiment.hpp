#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfbn/network.hpp"
#include "mfbn/objective.hpp"
#include "mfbn/rng.hpp"
#include "mfbn/solver.hpp"

namespace mfbn {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parses "LO:HI".
Range parse_range(const std::string& text);
/// Parses "A:B:C" into layer sizes.
std::vector<std::size_t> parse_topology(const std::string& text);

enum class ClampPolicy {
    /// Visible layer clamped to all zeros.
    Zeros,
    /// Two clamps per network: the visible states of largest and smallest ln Z_c.
    ExtremeLogZ,
};

struct ExperimentConfig {
    /// Layer sizes from top to bottom; the bottom layer is visible.
    std::vector<std::size_t> topology{2, 4, 6};
    Activation activation{ActivationKind::Sigmoid};
    Range weight_range{-1.0, 1.0};
    Range bias_range{-1.0, 1.0};
    std::size_t n_networks = 1000;
    std::uint64_t master_seed = 1;
    std::vector<SchemeId> schemes{SchemeId::G11, SchemeId::G12, SchemeId::G22};
    ClampPolicy clamp_policy = ClampPolicy::Zeros;
    SolverOptions solver{};
    int jobs = 0;
    std::size_t histogram_bins = 60;
    /// Start each scheme from the fixed point of the previous scheme in
    /// `schemes` (G11 -> G12 -> G22) instead of the solver's own init.
    bool chain_starts = false;
};

void validate(const ExperimentConfig& config);

/// Layered network with edges only between adjacent layers, weights and
/// biases i.i.d. uniform on their ranges (biases drawn first, then edges in
/// (child, parent) order), and the bottom layer visible.
BeliefNetwork make_layered(const std::vector<std::size_t>& topology, Activation activation,
                           Range weight_range, Range bias_range, Rng& rng);

/// Network `index` of the experiment; a pure function of (master_seed, index).
BeliefNetwork random_layered(const ExperimentConfig& config, std::size_t index);

struct RawRow {
    std::size_t net_index = 0;
    std::string clamp;
    SchemeId scheme = SchemeId::G11;
    double ln_z_exact = 0.0;
    double g_hat = 0.0;
    double err = 0.0;
    int iterations = 0;
    int cycles = 0;
    int restarts = 0;
    /// "converged", "unconverged" or "error: <message>".
    std::string status;
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

/// `bins` equal-width bins over [min, max] of the values.
Histogram make_histogram(const std::vector<double>& values, std::size_t bins);

struct SchemeStats {
    SchemeId scheme = SchemeId::G11;
    std::string clamp;
    double mean_err = 0.0;
    /// Rows that converged and entered the mean.
    std::size_t count = 0;
    std::size_t unconverged = 0;
    std::size_t cycles = 0;
    Histogram histogram;
};

struct ErrorStats {
    std::vector<SchemeStats> per_scheme;
    std::vector<RawRow> raw;

    const SchemeStats& find(SchemeId scheme, const std::string& clamp) const;
};

/// Relative-error experiment for any activation and clamp policy.
ErrorStats run_error_experiment(const ExperimentConfig& config);

/// Sigmoid networks, visible layer clamped to zeros.
ErrorStats run_sigmoid_table(ExperimentConfig config);

/// Noisy-or networks clamped to their largest and smallest ln Z_c visible states.
ErrorStats run_noisyor_table(ExperimentConfig config);

}  // namespace mfbn
