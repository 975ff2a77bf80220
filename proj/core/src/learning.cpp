#include "mfbn/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "mfbn/enumeration.hpp"
#include "mfbn/errors.hpp"
#include "mfbn/experiment.hpp"
#include "mfbn/parallel.hpp"
#include "mfbn/rng.hpp"

namespace mfbn {

TrainConfig default_train_config(ActivationKind kind) {
    TrainConfig c;
    c.learning_rate = kind == ActivationKind::NoisyOr ? 0.01 : 0.05;
    return c;
}

void validate(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
    if (config.eval_every <= 0) throw ConfigError("eval_every must be positive");
    validate(config.solver);
}

PatternGradient loglik_gradient(const BeliefNetwork& net, const Pattern& pattern, SchemeId scheme,
                                const SolverOptions& opts, const MeanVector* warm_start) {
    const ClampContext ctx = ClampContext::clamped(net, pattern);
    PatternGradient out;
    out.solve = solve_fixed_point(ctx, scheme, opts, warm_start);
    out.converged = out.solve.converged;
    if (!out.converged) return out;
    ObjectiveEvaluator ev(ctx.net(), scheme);
    ObjectiveGradient g;
    ev.gradient(out.solve.u, g, true);
    out.dw = std::move(g.dw);
    out.dh = std::move(g.dh);
    for (double& x : out.dw) x = -x;
    for (double& x : out.dh) x = -x;
    return out;
}

namespace {

struct PatternSlot {
    std::optional<MeanVector> warm;
    PatternGradient grad;
};

void check_patterns(const BeliefNetwork& net, const std::vector<Pattern>& patterns) {
    for (std::size_t p = 0; p < patterns.size(); ++p) {
        if (patterns[p].size() != net.visible.size()) {
            throw ConfigError("pattern " + std::to_string(p) + " has " + std::to_string(patterns[p].size()) +
                              " values but the network has " + std::to_string(net.visible.size()) +
                              " visible units");
        }
    }
}

void solve_all(const BeliefNetwork& net, const std::vector<Pattern>& patterns, std::size_t begin,
               std::size_t end, const TrainConfig& config, std::vector<PatternSlot>& slots, bool with_grad) {
    SolverOptions opts = config.solver;
    parallel_for(end - begin, config.jobs, [&](std::size_t k) {
        PatternSlot& slot = slots[begin + k];
        const MeanVector* warm = slot.warm ? &*slot.warm : nullptr;
        if (with_grad) {
            slot.grad = loglik_gradient(net, patterns[begin + k], config.scheme, opts, warm);
        } else {
            const ClampContext ctx = ClampContext::clamped(net, patterns[begin + k]);
            slot.grad = PatternGradient{};
            slot.grad.solve = solve_fixed_point(ctx, config.scheme, opts, warm);
            slot.grad.converged = slot.grad.solve.converged;
        }
        if (slot.grad.converged) slot.warm = slot.grad.solve.u;
    });
}

EvalRecord evaluate(const BeliefNetwork& net, const std::vector<Pattern>& patterns, int epoch,
                    const TrainConfig& config, std::vector<PatternSlot>& slots) {
    EvalRecord rec;
    rec.epoch = epoch;
    rec.mean_true_loglik = true_loglik(net, patterns);
    solve_all(net, patterns, 0, patterns.size(), config, slots, false);
    double total = 0.0;
    std::size_t used = 0;
    for (const PatternSlot& s : slots) {
        if (!s.grad.converged) {
            ++rec.unconverged;
            continue;
        }
        total += s.grad.solve.objective;
        ++used;
    }
    rec.mean_objective = used ? total / static_cast<double>(used) : std::nan("");
    return rec;
}

void project(BeliefNetwork& net) {
    if (net.activation.kind() != ActivationKind::NoisyOr) return;
    for (double& w : net.weights) w = std::max(w, 0.0);
    for (double& h : net.biases) h = std::max(h, kNoisyOrMinBias);
}

}  // namespace

TrainResult train(BeliefNetwork net, const std::vector<Pattern>& patterns, const TrainConfig& config) {
    validate(net);
    validate(config);
    check_patterns(net, patterns);
    check_enumeration_size(net.n_units() - net.visible.size());

    const std::size_t n = net.n_units();
    const std::size_t count = patterns.size();
    const std::size_t batch = config.batch_size == 0 ? std::max<std::size_t>(count, 1) : config.batch_size;
    std::vector<PatternSlot> slots(count);

    TrainResult result;
    result.history.records.push_back(evaluate(net, patterns, 0, config, slots));

    std::vector<double> gw(n * n);
    std::vector<double> gh(n);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::size_t unconverged = 0;
        for (std::size_t begin = 0; begin < count; begin += batch) {
            const std::size_t end = std::min(count, begin + batch);
            solve_all(net, patterns, begin, end, config, slots, true);
            std::fill(gw.begin(), gw.end(), 0.0);
            std::fill(gh.begin(), gh.end(), 0.0);
            std::size_t used = 0;
            // Fixed-order reduction keeps results independent of the job count.
            for (std::size_t p = begin; p < end; ++p) {
                const PatternGradient& g = slots[p].grad;
                if (!g.converged) {
                    ++unconverged;
                    continue;
                }
                for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += g.dw[k];
                for (std::size_t k = 0; k < gh.size(); ++k) gh[k] += g.dh[k];
                ++used;
            }
            if (used == 0) continue;
            const double step = config.learning_rate / static_cast<double>(used);
            if (config.learn_weights) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < i; ++j) net.weight(i, j) += step * gw[i * n + j];
                }
            }
            if (config.learn_biases) {
                for (std::size_t i = 0; i < n; ++i) net.biases[i] += step * gh[i];
            }
            project(net);
        }
        result.history.unconverged_per_epoch.push_back(unconverged);
        if (epoch % config.eval_every == 0 || epoch == config.epochs) {
            result.history.records.push_back(evaluate(net, patterns, epoch, config, slots));
        }
    }
    result.net = std::move(net);
    return result;
}

std::vector<Pattern> bars_dataset(std::size_t n_patterns, std::size_t side, std::uint64_t seed) {
    if (side == 0) throw ConfigError("bars side must be at least 1");
    Rng rng(seed);
    std::vector<Pattern> out;
    out.reserve(n_patterns);
    for (std::size_t p = 0; p < n_patterns; ++p) {
        Pattern img(side * side, 0);
        const bool rows = rng.bernoulli(0.5);
        for (std::size_t b = 0; b < side; ++b) {
            if (!rng.bernoulli(0.5)) continue;
            for (std::size_t k = 0; k < side; ++k) {
                const std::size_t r = rows ? b : k;
                const std::size_t c = rows ? k : b;
                img[r * side + c] = 1;
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

double true_loglik(const BeliefNetwork& net, const std::vector<Pattern>& patterns) {
    if (patterns.empty()) throw ConfigError("true_loglik needs at least one pattern");
    double total = 0.0;
    for (const Pattern& p : patterns) total += exact_log_partition(ClampContext::clamped(net, p));
    return total / static_cast<double>(patterns.size());
}

std::vector<Pattern> read_patterns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file " + path.string());
    std::vector<Pattern> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Pattern p;
        for (char c : line) {
            if (c != '0' && c != '1') {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected only '0' and '1'");
            }
            p.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        if (!out.empty() && p.size() != out.front().size()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": pattern length differs");
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_patterns(const std::vector<Pattern>& patterns, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file " + path.string());
    for (const Pattern& p : patterns) {
        for (std::uint8_t v : p) out << static_cast<char>('0' + v);
        out << '\n';
    }
}

BeliefNetwork initial_bars_network(ActivationKind kind, const std::vector<std::size_t>& topology,
                                   std::uint64_t seed) {
    Rng rng(seed);
    if (kind == ActivationKind::NoisyOr) {
        return make_layered(topology, Activation(kind), {0.0, 0.1}, {0.5, 0.5}, rng);
    }
    return make_layered(topology, Activation(kind), {-0.1, 0.1}, {0.0, 0.0}, rng);
}

}  // namespace mfbn
