#include "mfbn/enumeration.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <string>

#include "mfbn/errors.hpp"

namespace mfbn {

void LogSumExp::add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term > max_) {
        sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
        max_ = log_term;
    } else {
        sum_ += std::exp(log_term - max_);
    }
}

double LogSumExp::value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
}

ClampContext::ClampContext(BeliefNetwork net, std::vector<std::int8_t> assignment, bool clamped)
    : net_(std::move(net)), assignment_(std::move(assignment)), clamped_(clamped) {
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
        if (assignment_[i] < 0) free_.push_back(i);
    }
}

ClampContext ClampContext::unclamped(BeliefNetwork net) {
    validate(net);
    std::vector<std::int8_t> assignment(net.n_units(), -1);
    return ClampContext(std::move(net), std::move(assignment), false);
}

ClampContext ClampContext::clamped(BeliefNetwork net, std::span<const std::uint8_t> observed) {
    validate(net);
    if (observed.size() != net.visible.size()) {
        throw ValidationError("clamp assigns " + std::to_string(observed.size()) +
                              " values but the network has " + std::to_string(net.visible.size()) +
                              " visible units");
    }
    std::vector<std::int8_t> assignment(net.n_units(), -1);
    for (std::size_t k = 0; k < observed.size(); ++k) {
        if (observed[k] > 1) throw ValidationError("clamp values must be 0 or 1");
        assignment[net.visible[k]] = static_cast<std::int8_t>(observed[k]);
    }
    return ClampContext(std::move(net), std::move(assignment), true);
}

std::vector<std::uint8_t> ClampContext::observed() const {
    std::vector<std::uint8_t> out;
    if (!clamped_) return out;
    for (std::size_t v : net_.visible) out.push_back(static_cast<std::uint8_t>(assignment_[v]));
    return out;
}

MeanVector ClampContext::means(double fill) const {
    MeanVector u(net_.n_units(), fill);
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
        if (assignment_[i] >= 0) u.pin(i, static_cast<std::uint8_t>(assignment_[i]));
    }
    return u;
}

void check_enumeration_size(std::size_t free_count) {
    if (free_count > kMaxEnumeratedUnits) {
        throw SizeError("exact enumeration over " + std::to_string(free_count) +
                        " units exceeds the limit of " + std::to_string(kMaxEnumeratedUnits));
    }
    if (free_count > kEnumerationWarnUnits) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true)) {
            std::clog << "warning: exact enumeration over " << free_count
                      << " units (2^" << free_count << " states) may be slow\n";
        }
    }
}

void for_each_assignment(State base, std::span<const std::size_t> free_units,
                         const std::function<void(const State&)>& visit) {
    for (std::size_t i : free_units) base[i] = 0;
    const std::size_t k = free_units.size();
    visit(base);
    // Binary counter over the free units.
    while (true) {
        std::size_t b = 0;
        while (b < k && base[free_units[b]] == 1) {
            base[free_units[b]] = 0;
            ++b;
        }
        if (b == k) return;
        base[free_units[b]] = 1;
        visit(base);
    }
}

namespace {

State base_state(const ClampContext& ctx) {
    State s(ctx.net().n_units());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (ctx.assignment()[i] > 0) s[i] = 1;
    }
    return s;
}

std::vector<std::size_t> free_of(const MeanVector& u) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!u.is_pinned(i)) free.push_back(i);
    }
    return free;
}

State base_state(const MeanVector& u) {
    State s(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.is_pinned(i) && u[i] == 1.0) s[i] = 1;
    }
    return s;
}

double factorial_log_weight(const MeanVector& u, std::span<const std::size_t> free, const State& s) {
    double lw = 0.0;
    for (std::size_t i : free) lw += std::log(s[i] ? u[i] : 1.0 - u[i]);
    return lw;
}

}  // namespace

double exact_log_partition(const ClampContext& ctx, double gamma) {
    check_enumeration_size(ctx.free_units().size());
    LogSumExp acc;
    for_each_assignment(base_state(ctx), ctx.free_units(),
                        [&](const State& s) { acc.add(-gamma * energy(ctx.net(), s)); });
    return acc.value();
}

MeanVector exact_marginals(const ClampContext& ctx) {
    const double log_z = exact_log_partition(ctx);
    const BeliefNetwork& net = ctx.net();
    std::vector<double> acc(net.n_units(), 0.0);
    for_each_assignment(base_state(ctx), ctx.free_units(), [&](const State& s) {
        const double p = std::exp(-energy(net, s) - log_z);
        for (std::size_t i : ctx.free_units()) {
            if (s[i]) acc[i] += p;
        }
    });
    MeanVector u = ctx.means();
    for (std::size_t i : ctx.free_units()) u[i] = acc[i];
    return u;
}

double factorial_expectation(const BeliefNetwork& net, const MeanVector& u,
                             const std::function<double(const State&)>& g) {
    validate_means(net, u);
    const std::vector<std::size_t> free = free_of(u);
    check_enumeration_size(free.size());
    double total = 0.0;
    for_each_assignment(base_state(u), free, [&](const State& s) {
        total += std::exp(factorial_log_weight(u, free, s)) * g(s);
    });
    return total;
}

double mean_entropy_term(const MeanVector& u) {
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.is_pinned(i)) continue;
        const double p = u[i];
        total += p * std::log(p) + (1.0 - p) * std::log1p(-p);
    }
    return total;
}

namespace {

void require_matching_pins(const ClampContext& ctx, const MeanVector& u) {
    validate_means(ctx.net(), u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::int8_t a = ctx.assignment()[i];
        if (a >= 0 && (!u.is_pinned(i) || u[i] != static_cast<double>(a))) {
            throw ValidationError("mean of clamped unit " + std::to_string(i + 1) +
                                  " must be pinned to its observed value");
        }
        if (a < 0 && u.is_pinned(i)) {
            throw ValidationError("unit " + std::to_string(i + 1) + " is pinned but not clamped");
        }
    }
}

}  // namespace

double exact_ls(const ClampContext& ctx, const MeanVector& u) {
    require_matching_pins(ctx, u);
    const double mean_energy =
        factorial_expectation(ctx.net(), u, [&](const State& s) { return energy(ctx.net(), s); });
    return mean_energy + mean_entropy_term(u);
}

double plefka_derivative_oracle(const BeliefNetwork& net, const MeanVector& u,
                                const std::function<double(const State&)>& energy_fn, int order) {
    if (order != 1 && order != 2) throw ConfigError("plefka derivative order must be 1 or 2");
    validate_means(net, u);
    const std::vector<std::size_t> free = free_of(u);
    check_enumeration_size(free.size());

    std::vector<double> weights;
    std::vector<double> values;
    std::vector<State> states;
    for_each_assignment(base_state(u), free, [&](const State& s) {
        weights.push_back(std::exp(factorial_log_weight(u, free, s)));
        values.push_back(energy_fn(s));
        if (order == 2) states.push_back(s);
    });

    double mean = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) mean += weights[k] * values[k];
    if (order == 1) return mean;

    double variance = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double d = values[k] - mean;
        variance += weights[k] * d * d;
    }
    double correction = 0.0;
    for (std::size_t i : free) {
        double cov = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            cov += weights[k] * (values[k] - mean) * (states[k][i] - u[i]);
        }
        correction += cov * cov / (u[i] * (1.0 - u[i]));
    }
    return -variance + correction;
}

}  // namespace mfbn
