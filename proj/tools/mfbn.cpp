// mfbn command-line front end.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "mfbn/csv.hpp"
#include "mfbn/errors.hpp"
#include "mfbn/experiment.hpp"
#include "mfbn/learning.hpp"
#include "mfbn/network_io.hpp"
#include "mfbn/solver.hpp"
#include "mfbn/validation.hpp"

namespace fs = std::filesystem;
using namespace mfbn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitConfig = 3;

struct Common {
    std::uint64_t seed = 1;
    std::size_t n_networks = 1000;
    std::string scheme = "all";
    std::string weight_range;
    std::string bias_range;
    std::string topology = "2:4:6";
    std::string out = ".";
    int jobs = 0;
    double tol = 1e-8;
    int max_iter = 10000;
    std::string update = "coordinate";
};

void add_common(CLI::App* cmd, Common& c, bool experiment_flags) {
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", c.tol, "Fixed-point tolerance");
    cmd->add_option("--max-iter", c.max_iter, "Fixed-point sweep limit");
    cmd->add_option("--update", c.update, "Per-unit update: coordinate (solve each coordinate) or plain");
    cmd->add_option("--scheme", c.scheme, "g11, g12, g22 or all");
    if (!experiment_flags) return;
    cmd->add_option("--n-networks", c.n_networks, "Number of random networks");
    cmd->add_option("--weight-range", c.weight_range, "Weight range LO:HI");
    cmd->add_option("--bias-range", c.bias_range, "Bias range LO:HI (defaults to the weight range)");
    cmd->add_option("--topology", c.topology, "Layer sizes A:B:C, top layer first");
}

std::vector<SchemeId> parse_schemes(const std::string& text) {
    if (text == "all") return {std::begin(kAllSchemes), std::end(kAllSchemes)};
    return {scheme_from_string(text)};
}

SolverOptions solver_options(const Common& c) {
    SolverOptions s;
    s.tol = c.tol;
    s.max_iter = c.max_iter;
    if (c.update == "plain") {
        s.rule = UpdateRule::Plain;
    } else if (c.update != "coordinate") {
        throw ConfigError("--update must be coordinate or plain");
    }
    validate(s);
    return s;
}

ExperimentConfig experiment_config(const Common& c, ActivationKind kind, const std::string& default_range) {
    ExperimentConfig cfg;
    cfg.activation = Activation(kind);
    cfg.topology = parse_topology(c.topology);
    cfg.weight_range = parse_range(c.weight_range.empty() ? default_range : c.weight_range);
    cfg.bias_range = c.bias_range.empty() ? cfg.weight_range : parse_range(c.bias_range);
    cfg.n_networks = c.n_networks;
    cfg.master_seed = c.seed;
    cfg.schemes = parse_schemes(c.scheme);
    cfg.solver = solver_options(c);
    cfg.jobs = c.jobs;
    validate(cfg);
    return cfg;
}

void print_summary(const ErrorStats& stats) {
    write_summary_csv(stats, std::cout);
}

int run_table(const Common& c, ActivationKind kind) {
    if (kind == ActivationKind::Sigmoid) {
        const ErrorStats stats = run_sigmoid_table(experiment_config(c, kind, "-1:1"));
        write_experiment_outputs(stats, c.out);
        print_summary(stats);
    } else {
        const ErrorStats stats = run_noisyor_table(experiment_config(c, kind, "0:0.25"));
        write_experiment_outputs(stats, c.out);
        print_summary(stats);
    }
    return kExitOk;
}

int run_gen(const Common& c, const std::string& activation) {
    const ActivationKind kind = activation_from_string(activation);
    const ExperimentConfig cfg =
        experiment_config(c, kind, kind == ActivationKind::Sigmoid ? "-1:1" : "0:0.25");
    fs::create_directories(c.out);
    for (std::size_t i = 0; i < cfg.n_networks; ++i) {
        save_network(random_layered(cfg, i), fs::path(c.out) / ("net_" + std::to_string(i) + ".json"));
    }
    std::cout << "wrote " << cfg.n_networks << " networks to " << c.out << "\n";
    return kExitOk;
}

struct LearnArgs {
    std::string activation = "sigmoid";
    std::string topology = "1:8:16";
    int epochs = 100;
    std::size_t patterns = 500;
    double learning_rate = 0.0;
    int eval_every = 10;
    std::string data;
};

int run_learn(const Common& c, const LearnArgs& a) {
    const ActivationKind kind = activation_from_string(a.activation);
    const std::vector<std::size_t> topology = parse_topology(a.topology);
    TrainConfig cfg = default_train_config(kind);
    cfg.epochs = a.epochs;
    cfg.eval_every = a.eval_every;
    cfg.seed = c.seed;
    cfg.solver = solver_options(c);
    cfg.jobs = c.jobs;
    if (a.learning_rate > 0.0) cfg.learning_rate = a.learning_rate;
    if (c.scheme != "all") cfg.scheme = scheme_from_string(c.scheme);
    check_scheme(cfg.scheme, Activation(kind));
    validate(cfg);

    std::vector<Pattern> data;
    if (a.data.empty()) {
        std::size_t side = 0;
        while (side * side < topology.back()) ++side;
        if (side * side != topology.back()) throw ConfigError("bars data needs a square visible layer");
        data = bars_dataset(a.patterns, side, derive_seed(c.seed, 0));
    } else {
        data = read_patterns(a.data);
    }

    fs::create_directories(c.out);
    const fs::path history_path = fs::path(c.out) / "history.csv";
    std::ofstream history(history_path, std::ios::binary);
    if (!history) throw Error("cannot write " + history_path.string());
    if (cfg.epochs == 0) {
        write_history_csv(TrainHistory{}, history);
        return kExitOk;
    }
    const BeliefNetwork init = initial_bars_network(kind, topology, derive_seed(c.seed, 1));
    const TrainResult result = train(init, data, cfg);
    write_history_csv(result.history, history);
    save_network(result.net, fs::path(c.out) / "model.json");
    write_history_csv(result.history, std::cout);
    return kExitOk;
}

struct ValidateArgs {
    std::size_t size_bound = 10;
    bool mutation = false;
    double case_scale = 1.0;
};

int run_validate(const Common& c, const ValidateArgs& a) {
    ValidationOptions opts;
    opts.size_bound = a.size_bound;
    opts.seed = c.seed;
    opts.mutation = a.mutation;
    opts.case_scale = a.case_scale;
    const ValidationReport report = run_validation_suite(opts);
    const std::string json = report.to_json();
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "validation.json", std::ios::binary) << json << "\n";
    for (const PropertyResult& p : report.properties) {
        std::cout << (p.failures == 0 ? "ok   " : p.informational ? "note " : "FAIL ") << p.name << " checks="
                  << p.checks << " failures=" << p.failures << " worst=" << format_double(p.worst) << "\n";
    }
    return report.passed() ? kExitOk : kExitValidation;
}

struct SolveArgs {
    std::string net;
    std::string clamp;
};

int run_solve(const Common& c, const SolveArgs& a) {
    BeliefNetwork net = load_network(a.net);
    std::vector<std::uint8_t> observed;
    for (char ch : a.clamp) {
        if (ch != '0' && ch != '1') throw ConfigError("--clamp must be a string of 0 and 1");
        observed.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    if (!a.clamp.empty() && observed.size() != net.visible.size()) {
        throw ConfigError("--clamp has " + std::to_string(observed.size()) + " values but the network has " +
                          std::to_string(net.visible.size()) + " visible units");
    }
    const ClampContext ctx =
        a.clamp.empty() ? ClampContext::unclamped(std::move(net)) : ClampContext::clamped(std::move(net), observed);
    const SolverOptions so = solver_options(c);
    const double ln_z = exact_log_partition(ctx);
    nlohmann::ordered_json out;
    out["ln_z_exact"] = ln_z;
    out["results"] = nlohmann::ordered_json::array();
    for (SchemeId s : parse_schemes(c.scheme)) {
        check_scheme(s, ctx.net().activation);
        const SolveResult r = solve_fixed_point(ctx, s, so);
        nlohmann::ordered_json e;
        e["scheme"] = std::string(to_string(s));
        e["g_hat"] = r.objective;
        if (std::abs(ln_z) >= 1e-12) {
            e["err"] = error_metric(r.objective, ln_z);
        } else {
            e["err"] = nullptr;
        }
        e["converged"] = r.converged;
        e["iterations"] = r.iterations;
        e["restarts"] = r.restarts;
        e["u"] = r.u.values;
        out["results"].push_back(std::move(e));
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field approximations for sigmoid and noisy-or belief networks"};
    app.require_subcommand(1);

    Common gen_c, sig_c, nor_c, learn_c, val_c, solve_c;
    std::string gen_activation = "sigmoid";
    LearnArgs learn_a;
    ValidateArgs val_a;
    SolveArgs solve_a;

    auto* gen = app.add_subcommand("gen", "Write random layered networks as network files");
    add_common(gen, gen_c, true);
    gen->add_option("--activation", gen_activation, "sigmoid or noisy_or");

    auto* sig = app.add_subcommand("table-sigmoid", "Relative error of each scheme on random sigmoid networks");
    add_common(sig, sig_c, true);

    auto* nor = app.add_subcommand("table-noisyor", "Relative error of each scheme on random noisy-or networks");
    add_common(nor, nor_c, true);

    auto* learn = app.add_subcommand("learn-bars", "Train a layered network on bars images");
    add_common(learn, learn_c, false);
    learn->add_option("--activation", learn_a.activation, "sigmoid or noisy_or");
    learn->add_option("--topology", learn_a.topology, "Layer sizes A:B:C, top layer first");
    learn->add_option("--epochs", learn_a.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
    learn->add_option("--patterns", learn_a.patterns, "Number of generated bars images");
    learn->add_option("--lr", learn_a.learning_rate, "Learning rate (default depends on activation)");
    learn->add_option("--eval-every", learn_a.eval_every, "Epochs between log-likelihood evaluations");
    learn->add_option("--data", learn_a.data, "Dataset file, one 0/1 string per line");

    auto* val = app.add_subcommand("validate", "Run the oracle validation suite");
    add_common(val, val_c, false);
    val->add_option("--size-bound", val_a.size_bound, "Largest network size");
    val->add_option("--case-scale", val_a.case_scale, "Multiplier on the number of cases");
    val->add_flag("--mutation", val_a.mutation, "Flip the curvature correction sign");

    auto* solve = app.add_subcommand("solve", "Solve one network file for each scheme");
    add_common(solve, solve_c, false);
    solve->add_option("--net", solve_a.net, "Network file")->required();
    solve->add_option("--clamp", solve_a.clamp, "Visible values as a 0/1 string; omit for no clamp");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen) return run_gen(gen_c, gen_activation);
        if (*sig) return run_table(sig_c, ActivationKind::Sigmoid);
        if (*nor) return run_table(nor_c, ActivationKind::NoisyOr);
        if (*learn) return run_learn(learn_c, learn_a);
        if (*val) return run_validate(val_c, val_a);
        if (*solve) return run_solve(solve_c, solve_a);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
