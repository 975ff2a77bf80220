#include "mfbn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "mfbn/enumeration.hpp"
#include "mfbn/errors.hpp"
#include "mfbn/parallel.hpp"

namespace mfbn {

Range parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("range '" + text + "' must look like LO:HI");
    try {
        std::size_t used_lo = 0;
        std::size_t used_hi = 0;
        const std::string lo = text.substr(0, colon);
        const std::string hi = text.substr(colon + 1);
        Range r{std::stod(lo, &used_lo), std::stod(hi, &used_hi)};
        if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument("trailing");
        if (r.lo > r.hi) throw ConfigError("range '" + text + "' has LO > HI");
        return r;
    } catch (const std::logic_error&) {
        throw ConfigError("range '" + text + "' must look like LO:HI");
    }
}

std::vector<std::size_t> parse_topology(const std::string& text) {
    std::vector<std::size_t> layers;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(part, &used);
            if (used != part.size() || v <= 0) throw std::invalid_argument("bad");
            layers.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw ConfigError("topology '" + text + "' must look like A:B:C with positive sizes");
        }
    }
    if (layers.empty()) throw ConfigError("topology must have at least one layer");
    return layers;
}

void validate(const ExperimentConfig& config) {
    if (config.topology.empty()) throw ConfigError("topology must have at least one layer");
    for (std::size_t l : config.topology) {
        if (l == 0) throw ConfigError("layer sizes must be positive");
    }
    for (const Range& r : {config.weight_range, config.bias_range}) {
        if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
            throw ConfigError("parameter ranges must satisfy LO <= HI");
        }
        if (config.activation.kind() == ActivationKind::NoisyOr && r.lo < 0.0) {
            throw ConfigError("noisy-or parameter ranges must be non-negative");
        }
    }
    if (config.n_networks == 0) throw ConfigError("n_networks must be positive");
    if (config.schemes.empty()) throw ConfigError("at least one scheme is required");
    if (config.histogram_bins == 0) throw ConfigError("histogram needs at least one bin");
    for (SchemeId s : config.schemes) check_scheme(s, config.activation);
    validate(config.solver);
}

BeliefNetwork make_layered(const std::vector<std::size_t>& topology, Activation activation,
                           Range weight_range, Range bias_range, Rng& rng) {
    std::size_t n = 0;
    for (std::size_t l : topology) n += l;
    BeliefNetwork net(n, activation);
    for (double& h : net.biases) h = rng.uniform(bias_range.lo, bias_range.hi);
    std::size_t start = 0;
    for (std::size_t layer = 0; layer + 1 < topology.size(); ++layer) {
        const std::size_t parents = start;
        const std::size_t children = start + topology[layer];
        for (std::size_t i = children; i < children + topology[layer + 1]; ++i) {
            for (std::size_t j = parents; j < children; ++j) {
                net.weight(i, j) = rng.uniform(weight_range.lo, weight_range.hi);
            }
        }
        start = children;
    }
    for (std::size_t i = n - topology.back(); i < n; ++i) net.visible.push_back(i);
    validate(net);
    return net;
}

BeliefNetwork random_layered(const ExperimentConfig& config, std::size_t index) {
    Rng rng(derive_seed(config.master_seed, index));
    return make_layered(config.topology, config.activation, config.weight_range, config.bias_range, rng);
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty()) return h;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.lo = *mn;
    h.hi = *mx;
    if (!(h.hi > h.lo)) h.hi = h.lo + 1e-9 * std::max(1.0, std::abs(h.lo));
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - h.lo) / width);
        h.counts[std::min(b, bins - 1)] += 1;
    }
    return h;
}

const SchemeStats& ErrorStats::find(SchemeId scheme, const std::string& clamp) const {
    for (const SchemeStats& s : per_scheme) {
        if (s.scheme == scheme && s.clamp == clamp) return s;
    }
    throw ConfigError("no statistics for scheme " + std::string(to_string(scheme)) + " and clamp " + clamp);
}

namespace {

using Bits = std::vector<std::uint8_t>;

struct NamedClamp {
    std::string name;
    Bits observed;
};

std::vector<NamedClamp> choose_clamps(const BeliefNetwork& net, ClampPolicy policy) {
    const std::size_t v = net.visible.size();
    if (policy == ClampPolicy::Zeros) return {{"zeros", Bits(v, 0)}};
    if (v > 20) throw SizeError("extreme-lnZ clamping enumerates 2^V visible states; V is too large");
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    Bits arg_best(v, 0);
    Bits arg_worst(v, 0);
    Bits p(v, 0);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << v); ++code) {
        for (std::size_t k = 0; k < v; ++k) p[k] = static_cast<std::uint8_t>(code >> k & 1u);
        const double lz = exact_log_partition(ClampContext::clamped(net, p));
        if (lz > best) {
            best = lz;
            arg_best = p;
        }
        if (lz < worst) {
            worst = lz;
            arg_worst = p;
        }
    }
    return {{"max", arg_best}, {"min", arg_worst}};
}

std::vector<RawRow> run_one(const ExperimentConfig& config, std::size_t index) {
    std::vector<RawRow> rows;
    const BeliefNetwork net = random_layered(config, index);
    for (const NamedClamp& clamp : choose_clamps(net, config.clamp_policy)) {
        const ClampContext ctx = ClampContext::clamped(net, clamp.observed);
        const double ln_z = exact_log_partition(ctx);
        std::optional<MeanVector> previous;
        for (SchemeId scheme : config.schemes) {
            RawRow row;
            row.net_index = index;
            row.clamp = clamp.name;
            row.scheme = scheme;
            row.ln_z_exact = ln_z;
            try {
                const MeanVector* start = config.chain_starts && previous ? &*previous : nullptr;
                const SolveResult res = solve_fixed_point(ctx, scheme, config.solver, start);
                if (res.converged) {
                    previous = res.u;
                } else {
                    previous.reset();
                }
                row.g_hat = res.objective;
                row.err = error_metric(res.objective, ln_z);
                row.iterations = res.iterations;
                row.cycles = res.cycles_detected;
                row.restarts = res.restarts;
                row.status = res.converged ? "converged" : "unconverged";
            } catch (const Error& e) {
                row.g_hat = std::nan("");
                row.err = std::nan("");
                row.status = std::string("error: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

ErrorStats run_error_experiment(const ExperimentConfig& config) {
    validate(config);
    std::vector<std::vector<RawRow>> slots(config.n_networks);
    parallel_for(config.n_networks, config.jobs, [&](std::size_t i) { slots[i] = run_one(config, i); });

    ErrorStats stats;
    for (auto& rows : slots) {
        for (auto& r : rows) stats.raw.push_back(std::move(r));
    }

    std::vector<std::string> clamps;
    for (const RawRow& r : stats.raw) {
        if (std::find(clamps.begin(), clamps.end(), r.clamp) == clamps.end()) clamps.push_back(r.clamp);
    }
    for (const std::string& clamp : clamps) {
        std::optional<MeanVector> previous;
        for (SchemeId scheme : config.schemes) {
            SchemeStats s;
            s.scheme = scheme;
            s.clamp = clamp;
            std::vector<double> errs;
            for (const RawRow& r : stats.raw) {
                if (r.scheme != scheme || r.clamp != clamp) continue;
                s.cycles += r.cycles > 0 ? 1 : 0;
                if (r.status == "converged") {
                    errs.push_back(r.err);
                } else {
                    ++s.unconverged;
                }
            }
            s.count = errs.size();
            double sum = 0.0;
            for (double e : errs) sum += e;
            s.mean_err = errs.empty() ? std::nan("") : sum / static_cast<double>(errs.size());
            s.histogram = make_histogram(errs, config.histogram_bins);
            stats.per_scheme.push_back(std::move(s));
        }
    }
    return stats;
}

ErrorStats run_sigmoid_table(ExperimentConfig config) {
    if (config.activation.kind() != ActivationKind::Sigmoid) {
        throw ConfigError("the sigmoid table requires sigmoid networks");
    }
    config.clamp_policy = ClampPolicy::Zeros;
    return run_error_experiment(config);
}

ErrorStats run_noisyor_table(ExperimentConfig config) {
    if (config.activation.kind() != ActivationKind::NoisyOr) {
        throw ConfigError("the noisy-or table requires noisy-or networks");
    }
    config.clamp_policy = ClampPolicy::ExtremeLogZ;
    return run_error_experiment(config);
}

}  // namespace mfbn
