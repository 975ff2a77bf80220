#include "mfbn/validation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <nlohmann/json.hpp>

#include "mfbn/errors.hpp"
#include "mfbn/legendre.hpp"
#include "mfbn/objective.hpp"
#include "mfbn/solver.hpp"

namespace mfbn {

BeliefNetwork random_test_network(Rng& rng, ActivationKind kind, std::size_t n, double scale, double density) {
    BeliefNetwork net(n, Activation(kind));
    const bool noisy = kind == ActivationKind::NoisyOr;
    for (double& h : net.biases) h = noisy ? rng.uniform(0.05, 0.05 + scale) : rng.uniform(-scale, scale);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (rng.bernoulli(density)) net.weight(i, j) = noisy ? rng.uniform(0.0, scale) : rng.uniform(-scale, scale);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(0.4)) net.visible.push_back(i);
    }
    if (net.visible.empty()) net.visible.push_back(n - 1);
    validate(net);
    return net;
}

ClampContext random_test_context(Rng& rng, BeliefNetwork net) {
    if (rng.bernoulli(0.25)) return ClampContext::unclamped(std::move(net));
    std::vector<std::uint8_t> obs(net.visible.size());
    for (auto& o : obs) o = rng.bernoulli(0.5) ? 1 : 0;
    return ClampContext::clamped(std::move(net), obs);
}

MeanVector random_interior_means(Rng& rng, const ClampContext& ctx, double lo, double hi) {
    MeanVector u = ctx.means();
    for (std::size_t i : ctx.free_units()) u[i] = rng.uniform(lo, hi);
    return u;
}

double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

bool ValidationReport::passed() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.informational || p.failures == 0; });
}

const PropertyResult& ValidationReport::find(const std::string& name) const {
    for (const PropertyResult& p : properties) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown property " + name);
}

std::string ValidationReport::to_json() const {
    nlohmann::ordered_json j;
    j["passed"] = passed();
    j["properties"] = nlohmann::ordered_json::array();
    for (const PropertyResult& p : properties) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["checks"] = p.checks;
        e["failures"] = p.failures;
        e["worst"] = p.worst;
        e["bound"] = p.bound;
        e["informational"] = p.informational;
        e["reproducers"] = p.reproducers;
        j["properties"].push_back(std::move(e));
    }
    return j.dump(2);
}

namespace {

constexpr std::size_t kMaxReproducers = 5;

class Recorder {
public:
    Recorder(std::string name, double bound, bool informational = false) {
        r_.name = std::move(name);
        r_.bound = bound;
        r_.informational = informational;
    }

    /// Records a check of `value <= bound`.
    void check(double value, std::uint64_t seed) { fail_if(!(value <= r_.bound), value, seed); }

    void fail_if(bool failed, double value, std::uint64_t seed) {
        ++r_.checks;
        if (std::isnan(value) || value > r_.worst) r_.worst = value;
        if (failed) {
            ++r_.failures;
            if (r_.reproducers.size() < kMaxReproducers) r_.reproducers.push_back(seed);
        }
    }

    /// Exceptions from a case count as failures.
    template <class F>
    void run(std::uint64_t seed, F&& body) {
        try {
            body();
        } catch (const std::exception&) {
            fail_if(true, std::nan(""), seed);
        }
    }

    PropertyResult result() const { return r_; }

private:
    PropertyResult r_;
};

constexpr ActivationKind kKinds[] = {ActivationKind::Sigmoid, ActivationKind::NoisyOr};
constexpr double kScales[] = {0.5, 1.0, 2.0, 4.0};

struct Suite {
    const ValidationOptions& opts;
    ObjectiveOptions objective_opts;
    std::vector<PropertyResult> out;

    std::size_t cases(std::size_t n) const {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(n) * opts.case_scale)));
    }

    std::uint64_t case_seed(std::size_t property, std::size_t kind, std::size_t index) const {
        return derive_seed(opts.seed, property * 1'000'000 + kind * 100'000 + index);
    }

    std::size_t pick_size(Rng& rng, std::size_t lo, std::size_t hi) const {
        hi = std::max(lo, std::min(hi, opts.size_bound));
        return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
    }

    double pick_scale(Rng& rng, double cap = 4.0) const {
        double s = kScales[rng.next() % 4];
        return std::min(s, cap);
    }

    void add(const Recorder& r) { out.push_back(r.result()); }

    void state_probability() {
        Recorder rec("state_probability_range", 0.0);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(50); ++c) {
                const auto seed = case_seed(1, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    const auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 12), pick_scale(rng));
                    State s(net.n_units());
                    for (auto& b : s.bits) b = rng.bernoulli(0.5) ? 1 : 0;
                    const double e = energy(net, s);
                    rec.fail_if(!(std::isfinite(e) && e >= 0.0), e < 0.0 ? -e : 0.0, seed);
                });
            }
        }
        add(rec);
    }

    void normalization() {
        Recorder rec("normalization", 1e-9);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(100); ++c) {
                const auto seed = case_seed(2, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 12), pick_scale(rng));
                    rec.check(std::abs(exact_log_partition(ClampContext::unclamped(std::move(net)))), seed);
                });
            }
        }
        add(rec);
    }

    void clamped_nonpositive() {
        Recorder rec("clamped_loglik_nonpositive", 1e-12);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(100); ++c) {
                const auto seed = case_seed(3, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 12), pick_scale(rng));
                    rec.check(exact_log_partition(random_test_context(rng, std::move(net))), seed);
                });
            }
        }
        add(rec);
    }

    void noisy_or_identity() {
        Recorder rec("noisy_or_complement_identity", 0.0);
        const Activation act(ActivationKind::NoisyOr);
        for (std::size_t c = 0; c < cases(200); ++c) {
            const auto seed = case_seed(4, 1, c);
            rec.run(seed, [&] {
                Rng rng(seed);
                const double x = rng.uniform(0.0, 20.0);
                rec.check(std::abs(act.log_scores(x).off[0] + x), seed);
            });
        }
        add(rec);
    }

    void taylor_monotonicity() {
        Recorder rec("taylor_monotonicity", 0.0, true);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(50); ++c) {
                const auto seed = case_seed(5, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    const std::size_t n = pick_size(rng, 2, 8);
                    const auto net = random_test_network(rng, kKinds[k], n, 1.0 / static_cast<double>(n));
                    MeanVector u(n);
                    for (double& x : u.values) x = rng.uniform(0.05, 0.95);
                    State s(n);
                    for (auto& b : s.bits) b = rng.bernoulli(0.5) ? 1 : 0;
                    const double e = energy(net, s);
                    const double d1 = std::abs(taylor_energy(net, u, s, 1.0, 1) - e);
                    const double d2 = std::abs(taylor_energy(net, u, s, 1.0, 2) - e);
                    rec.check(d2 - d1, seed);
                });
            }
        }
        add(rec);
    }

    void oracle_equality() {
        Recorder first("first_order_oracle", 1e-9);
        Recorder second("second_order_oracle", 1e-8);
        Recorder sjj("sjj_equivalence", 1e-10);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(200); ++c) {
                const auto seed = case_seed(6, k, c);
                Rng rng(seed);
                std::optional<ClampContext> ctx;
                MeanVector u;
                try {
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 10), pick_scale(rng));
                    ctx.emplace(random_test_context(rng, std::move(net)));
                    u = random_interior_means(rng, *ctx);
                } catch (const std::exception&) {
                    first.fail_if(true, std::nan(""), seed);
                    continue;
                }
                const BeliefNetwork& net = ctx->net();
                const double g0 = mean_entropy_term(u);
                const auto taylor = [&](int order) {
                    return [&net, &u, order](const State& s) { return taylor_energy(net, u, s, 1.0, order); };
                };
                first.run(seed, [&] {
                    for (int order : {1, 2}) {
                        const SchemeId scheme = order == 1 ? SchemeId::G11 : SchemeId::G12;
                        const double oracle = g0 + factorial_expectation(net, u, taylor(order));
                        first.check(relative_gap(objective(net, u, scheme, objective_opts), oracle), seed);
                    }
                });
                second.run(seed, [&] {
                    const double g12 = g0 + factorial_expectation(net, u, taylor(2));
                    const double oracle = g12 + 0.5 * plefka_derivative_oracle(net, u, taylor(2), 2);
                    second.check(relative_gap(objective(net, u, SchemeId::G22, objective_opts), oracle), seed);
                });
                sjj.run(seed, [&] {
                    const double g1 = g0 + factorial_expectation(net, u, [&net](const State& s) { return energy(net, s); });
                    sjj.check(relative_gap(g1, exact_ls(*ctx, u)), seed);
                });
            }
        }
        add(first);
        add(second);
        add(sjj);
    }

    void gibbs_properties() {
        Recorder sandwich("sandwich", 1e-7);
        Recorder chain("kl_chain", 1e-8);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(50); ++c) {
                const auto seed = case_seed(7, k, c);
                Rng rng(seed);
                std::optional<ClampContext> ctx;
                try {
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 8), pick_scale(rng, 2.0));
                    ctx.emplace(random_test_context(rng, std::move(net)));
                } catch (const std::exception&) {
                    sandwich.fail_if(true, std::nan(""), seed);
                    continue;
                }
                const double ln_z = exact_log_partition(*ctx);
                for (int p = 0; p < 5; ++p) {
                    const MeanVector u = random_interior_means(rng, *ctx, 0.1, 0.9);
                    sandwich.run(seed, [&] {
                        const GibbsEvaluation g = gibbs_free_energy(*ctx, u, 1.0);
                        const double upper = exact_ls(*ctx, u);
                        const double violation = std::max(-ln_z - g.value, g.value - upper);
                        sandwich.fail_if(!g.converged || !(violation <= 1e-7), violation, seed);
                    });
                    chain.run(seed, [&] {
                        const double gamma = p % 2 == 0 ? 1.0 : 0.5;
                        const GibbsEvaluation g = gibbs_free_energy(*ctx, u, gamma);
                        const DivergenceTerms d = divergence_terms(*ctx, g);
                        const double lhs = d.factorial_to_target - d.factorial_to_tilted;
                        const double gap = relative_gap(lhs, d.log_z_gamma + g.value);
                        chain.fail_if(!g.converged || !(gap <= 1e-8), gap, seed);
                    });
                }
            }
        }
        add(sandwich);
        add(chain);
    }

    void legendre_consistency() {
        Recorder rec("legendre_consistency", 1e-5);
        constexpr double h = 1e-4;
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(10); ++c) {
                const auto seed = case_seed(8, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 6), pick_scale(rng, 2.0));
                    const ClampContext ctx = random_test_context(rng, std::move(net));
                    const MeanVector u = random_interior_means(rng, ctx, 0.2, 0.8);
                    const double gamma = 1.0;
                    const GibbsEvaluation g = gibbs_free_energy(ctx, u, gamma);
                    for (std::size_t i : ctx.free_units()) {
                        MeanVector up = u;
                        MeanVector dn = u;
                        up[i] += h;
                        dn[i] -= h;
                        const double fd =
                            (gibbs_free_energy(ctx, up, gamma).value - gibbs_free_energy(ctx, dn, gamma).value) / (2 * h);
                        rec.check(relative_gap(fd, g.theta[i]), seed);
                    }
                });
            }
        }
        add(rec);
    }

    void hessian_identity() {
        Recorder rec("hessian_identity", 1e-4);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(10); ++c) {
                const auto seed = case_seed(9, k, c);
                rec.run(seed, [&] {
                    Rng rng(seed);
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 6), pick_scale(rng, 2.0));
                    const ClampContext ctx = random_test_context(rng, std::move(net));
                    const MeanVector u = random_interior_means(rng, ctx, 0.2, 0.8);
                    const HessianReport r = covariance_and_hessian_check(ctx, u, 1.0);
                    const bool ok = r.converged && r.max_abs_bh_minus_identity <= 1e-4 && r.min_hessian_eigenvalue > 0.0;
                    rec.fail_if(!ok, r.max_abs_bh_minus_identity, seed);
                });
            }
        }
        add(rec);
    }

    /// Fourth-order central difference.
    template <class F>
    static double derivative(F&& f, double h) {
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    }

    void gradients() {
        Recorder du_rec("gradient_u", 1e-5);
        Recorder dp_rec("gradient_parameters", 1e-5);
        Recorder pinned("pinned_safety", 0.0);
        constexpr double h = 1e-3;
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(50); ++c) {
                const auto seed = case_seed(10, k, c);
                Rng rng(seed);
                std::optional<ClampContext> ctx;
                MeanVector u;
                try {
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 1, 8), pick_scale(rng));
                    ctx.emplace(random_test_context(rng, std::move(net)));
                    u = random_interior_means(rng, *ctx, 0.1, 0.9);
                } catch (const std::exception&) {
                    du_rec.fail_if(true, std::nan(""), seed);
                    continue;
                }
                for (SchemeId scheme : kAllSchemes) {
                    BeliefNetwork net = ctx->net();
                    const ObjectiveGradient grad = objective_full_gradient(net, u, scheme);
                    du_rec.run(seed, [&] {
                        for (std::size_t i : ctx->free_units()) {
                            const double fd = derivative(
                                [&](double d) {
                                    MeanVector v = u;
                                    v[i] += d;
                                    return objective(net, v, scheme);
                                },
                                h);
                            du_rec.check(relative_gap(grad.du[i], fd), seed);
                        }
                    });
                    pinned.run(seed, [&] {
                        for (std::size_t i = 0; i < u.size(); ++i) {
                            if (u.is_pinned(i)) pinned.check(std::abs(grad.du[i]), seed);
                        }
                    });
                    dp_rec.run(seed, [&] {
                        const std::size_t n = net.n_units();
                        for (std::size_t i = 0; i < n; ++i) {
                            for (std::size_t j = 0; j < i; ++j) {
                                if (net.weight(i, j) == 0.0) continue;
                                const double w0 = net.weight(i, j);
                                const double fd = derivative(
                                    [&](double d) {
                                        net.weight(i, j) = w0 + d;
                                        const double v = objective(net, u, scheme);
                                        net.weight(i, j) = w0;
                                        return v;
                                    },
                                    h);
                                dp_rec.check(relative_gap(grad.dw[i * n + j], fd), seed);
                            }
                            const double h0 = net.biases[i];
                            const double fd = derivative(
                                [&](double d) {
                                    net.biases[i] = h0 + d;
                                    const double v = objective(net, u, scheme);
                                    net.biases[i] = h0;
                                    return v;
                                },
                                h);
                            dp_rec.check(relative_gap(grad.dh[i], fd), seed);
                        }
                    });
                }
                pinned.run(seed, [&] {
                    SolverOptions so;
                    so.max_iter = 500;
                    const SolveResult r = solve_fixed_point(*ctx, SchemeId::G12, so);
                    const MeanVector base = ctx->means();
                    for (std::size_t i = 0; i < base.size(); ++i) {
                        if (base.is_pinned(i)) pinned.check(std::abs(r.u[i] - base[i]), seed);
                    }
                });
            }
        }
        add(du_rec);
        add(dp_rec);
        add(pinned);
    }

    void envelope_and_determinism() {
        Recorder env("envelope_consistency", 1e-5);
        Recorder det("solver_determinism", 0.0);
        SolverOptions so;
        so.tol = 1e-13;
        so.max_iter = 20000;
        constexpr double h = 1e-4;
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t c = 0; c < cases(10); ++c) {
                const auto seed = case_seed(11, k, c);
                env.run(seed, [&] {
                    Rng rng(seed);
                    auto net = random_test_network(rng, kKinds[k], pick_size(rng, 2, 8), 0.5);
                    const ClampContext ctx = random_test_context(rng, net);
                    const SchemeId scheme = kAllSchemes[c % 3];
                    const SolveResult r = solve_fixed_point(ctx, scheme, so);
                    if (!r.converged) return;
                    const ObjectiveGradient grad = objective_full_gradient(net, r.u, scheme);
                    const SolveResult again = solve_fixed_point(ctx, scheme, so);
                    det.fail_if(again.u.values != r.u.values || again.objective != r.objective, 0.0, seed);
                    const std::size_t n = net.n_units();
                    const auto resolved = [&](double d, std::size_t idx, bool bias) {
                        BeliefNetwork m = net;
                        if (bias) {
                            m.biases[idx] += d;
                        } else {
                            m.weights[idx] += d;
                        }
                        const ClampContext mc = ctx.is_clamped() ? ClampContext::clamped(m, ctx.observed())
                                                                 : ClampContext::unclamped(m);
                        const SolveResult s = solve_fixed_point(mc, scheme, so, &r.u);
                        if (!s.converged) throw Error("perturbed solve did not converge");
                        return s.objective;
                    };
                    for (std::size_t i = 0; i < n; ++i) {
                        const double fd = (resolved(h, i, true) - resolved(-h, i, true)) / (2 * h);
                        env.check(relative_gap(grad.dh[i], fd), seed);
                        for (std::size_t j = 0; j < i; ++j) {
                            if (net.weight(i, j) < h) continue;
                            const std::size_t idx = i * n + j;
                            const double fdw = (resolved(h, idx, false) - resolved(-h, idx, false)) / (2 * h);
                            env.check(relative_gap(grad.dw[idx], fdw), seed);
                        }
                    }
                });
            }
        }
        add(env);
        add(det);
    }
};

}  // namespace

ValidationReport run_validation_suite(const ValidationOptions& opts) {
    if (opts.size_bound < 1 || opts.size_bound > 12) throw ConfigError("size_bound must be in [1, 12]");
    if (!(opts.case_scale > 0.0)) throw ConfigError("case_scale must be positive");
    Suite s{opts, ObjectiveOptions{opts.mutation}, {}};
    s.state_probability();
    s.normalization();
    s.clamped_nonpositive();
    s.noisy_or_identity();
    s.taylor_monotonicity();
    s.oracle_equality();
    s.gibbs_properties();
    s.legendre_consistency();
    s.hessian_identity();
    s.gradients();
    s.envelope_and_determinism();
    return ValidationReport{std::move(s.out)};
}

}  // namespace mfbn
