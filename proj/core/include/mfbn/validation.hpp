#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfbn/enumeration.hpp"
#include "mfbn/rng.hpp"

namespace mfbn {

/// Random DAG on n units: each pair j < i is an edge with probability
/// `density`. Sigmoid parameters are uniform on [-scale, scale]; noisy-or
/// weights on [0, scale] and biases on [0.05, 0.05 + scale]. A random
/// non-empty subset of units is visible.
BeliefNetwork random_test_network(Rng& rng, ActivationKind kind, std::size_t n, double scale,
                                  double density = 0.6);

/// Random clamp of the visible units (unclamped with probability 1/4).
ClampContext random_test_context(Rng& rng, BeliefNetwork net);

/// Free means uniform on [lo, hi], clamped units pinned.
MeanVector random_interior_means(Rng& rng, const ClampContext& ctx, double lo = 0.05, double hi = 0.95);

/// |a - b| / max(1, |a|, |b|).
double relative_gap(double a, double b);

struct ValidationOptions {
    /// Largest network size used by the enumeration-heavy properties.
    std::size_t size_bound = 10;
    std::uint64_t seed = 1;
    /// Flip the sign of the curvature correction in the objectives.
    bool mutation = false;
    /// Multiplies the number of cases of every property.
    double case_scale = 1.0;
};

struct PropertyResult {
    std::string name;
    std::size_t checks = 0;
    std::size_t failures = 0;
    /// Worst observed value of the checked quantity against its bound.
    double worst = 0.0;
    double bound = 0.0;
    /// Seeds of the first failing cases; rerun with random_test_network on Rng(seed).
    std::vector<std::uint64_t> reproducers;
    /// Informational properties are reported but never fail the suite.
    bool informational = false;
};

struct ValidationReport {
    std::vector<PropertyResult> properties;

    bool passed() const;
    const PropertyResult& find(const std::string& name) const;
    /// Machine-readable report.
    std::string to_json() const;
};

ValidationReport run_validation_suite(const ValidationOptions& opts = {});

}  // namespace mfbn
