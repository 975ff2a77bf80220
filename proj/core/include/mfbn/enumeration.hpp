#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mfbn/network.hpp"

namespace mfbn {

/// Hard limit on the number of summed units for exact enumeration.
inline constexpr std::size_t kMaxEnumeratedUnits = 24;
/// Above this many summed units enumeration logs an advisory warning.
inline constexpr std::size_t kEnumerationWarnUnits = 16;

/// A network together with an observed value for each visible unit.
/// An unclamped context sums over every unit.
class ClampContext {
public:
    /// Visible units are free; the sum runs over all 2^N states.
    static ClampContext unclamped(BeliefNetwork net);
    /// observed[k] is the value of unit net.visible[k].
    static ClampContext clamped(BeliefNetwork net, std::span<const std::uint8_t> observed);

    const BeliefNetwork& net() const { return net_; }
    bool is_clamped() const { return clamped_; }
    /// Per unit: -1 when free, otherwise the observed value.
    const std::vector<std::int8_t>& assignment() const { return assignment_; }
    const std::vector<std::size_t>& free_units() const { return free_; }
    /// Observed values in net().visible order (empty when unclamped).
    std::vector<std::uint8_t> observed() const;

    /// Means with the clamped units pinned and free units set to `fill`.
    MeanVector means(double fill = 0.5) const;

private:
    ClampContext(BeliefNetwork net, std::vector<std::int8_t> assignment, bool clamped);

    BeliefNetwork net_;
    std::vector<std::int8_t> assignment_;
    std::vector<std::size_t> free_;
    bool clamped_ = false;
};

/// Visits every assignment of `free_units` on top of `base` in binary counting
/// order (free_units[0] is the least significant bit).
void for_each_assignment(State base, std::span<const std::size_t> free_units,
                         const std::function<void(const State&)>& visit);

/// Throws SizeError above kMaxEnumeratedUnits; warns above kEnumerationWarnUnits.
void check_enumeration_size(std::size_t free_count);

/// ln sum_{free states} exp(-gamma * E(s)). gamma = 1 gives ln Z (or ln Z_c).
double exact_log_partition(const ClampContext& ctx, double gamma = 1.0);

/// Exact posterior means of every unit given the clamp; clamped units are pinned.
MeanVector exact_marginals(const ClampContext& ctx);

/// Expectation of g under the factorial distribution prod u_i^s_i (1-u_i)^(1-s_i).
/// Pinned units are held at their values and only free units are summed.
double factorial_expectation(const BeliefNetwork& net, const MeanVector& u,
                             const std::function<double(const State&)>& g);

/// Sum of u ln u + (1-u) ln(1-u) over free units; pinned units contribute 0.
double mean_entropy_term(const MeanVector& u);

/// <E>_q + sum_i [u_i ln u_i + (1-u_i) ln(1-u_i)] with q factorial. The pinned
/// entries of u must agree with the clamp.
double exact_ls(const ClampContext& ctx, const MeanVector& u);

/// Derivatives of the Gibbs free energy in the coupling parameter at zero
/// coupling, by enumeration under the factorial distribution:
///   order 1: <E>
///   order 2: -<(E - <E>)^2> + sum_i <(E - <E>)(S_i - u_i)>^2 / (u_i (1 - u_i))
/// The sum runs over free units.
double plefka_derivative_oracle(const BeliefNetwork& net, const MeanVector& u,
                                const std::function<double(const State&)>& energy_fn, int order);

/// Streaming log-sum-exp in a fixed order.
class LogSumExp {
public:
    void add(double log_term);
    double value() const;

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

}  // namespace mfbn
