#include "mfbn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "mfbn/errors.hpp"

namespace mfbn {
namespace {

double sup_distance(const MeanVector& a, const MeanVector& b, std::span<const std::size_t> units) {
    double d = 0.0;
    for (std::size_t i : units) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double u) { return std::log(u) - std::log1p(-u); }

/// Root of dĜ/du_k along coordinate k in logit space. The derivative tends
/// to -inf / +inf at the ends, so a sign change is always found inside the
/// clip bounds unless the root lies beyond them.
double coordinate_root(ObjectiveEvaluator& ev, ObjectiveGradient& grad, MeanVector& u, std::size_t k,
                       double clip) {
    const double bound = logit(1.0 - clip);
    const auto r = [&](double x) {
        u[k] = logistic(x);
        ev.gradient(u, grad, false);
        return grad.du[k];
    };
    double a = std::clamp(logit(u[k]), -bound, bound);
    double ra = r(a);
    if (ra == 0.0 || !std::isfinite(ra)) return logistic(a);
    // A vanishing first step would never grow by doubling.
    double step = -ra;
    const double min_step = 1e-8 * std::max(1.0, std::abs(a));
    if (std::abs(step) < min_step) step = ra > 0 ? -min_step : min_step;
    double b = std::clamp(a + step, -bound, bound);
    double rb = r(b);
    step = b - a;
    if (step == 0.0) return logistic(a);
    while ((ra > 0) == (rb > 0) && rb != 0.0) {
        if (!std::isfinite(rb)) return logistic(a);
        if (std::abs(b) >= bound) return logistic(b);
        step *= 2.0;
        a = b;
        ra = rb;
        b = std::clamp(b + step, -bound, bound);
        rb = r(b);
    }
    if (!std::isfinite(rb)) return logistic(a);
    // Illinois regula falsi on [a, b].
    int side = 0;
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        const double c = (a * rb - b * ra) / (rb - ra);
        const double rc = r(c);
        if (rc == 0.0) return u[k];
        if (!std::isfinite(rc)) break;
        if ((rc > 0) == (rb > 0)) {
            b = c;
            rb = rc;
            if (side == -1) ra *= 0.5;
            side = -1;
        } else {
            a = c;
            ra = rc;
            if (side == 1) rb *= 0.5;
            side = 1;
        }
    }
    return logistic(std::abs(ra) < std::abs(rb) ? a : b);
}

MeanVector initial_means(const ClampContext& ctx, const SolverOptions& opts, const MeanVector* start) {
    MeanVector u = ctx.means(0.5);
    const BeliefNetwork& net = ctx.net();
    switch (opts.init) {
        case InitKind::UniformHalf:
            break;
        case InitKind::ForwardPass:
            for (std::size_t i : ctx.free_units()) {
                u[i] = net.activation.value(mean_field_input(net, u, i));
            }
            break;
        case InitKind::Given:
            if (!start) throw ConfigError("init=given requires a starting mean vector");
            break;
    }
    if (start) {
        if (start->size() != u.size()) throw ValidationError("starting mean vector has the wrong length");
        for (std::size_t i : ctx.free_units()) u[i] = (*start)[i];
    }
    for (std::size_t i : ctx.free_units()) u[i] = std::clamp(u[i], opts.clip, 1.0 - opts.clip);
    return u;
}

}  // namespace

void validate(const SolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw ConfigError("solver tol must be positive");
    if (opts.max_iter < 0) throw ConfigError("solver max_iter must be non-negative");
    if (!(opts.damping >= 0.0 && opts.damping < 1.0)) throw ConfigError("damping must lie in [0, 1)");
    if (opts.cycle_window < 0) throw ConfigError("cycle_window must be non-negative");
    if (opts.line_search_points < 2) throw ConfigError("line_search_points must be at least 2");
    if (!(opts.clip > 0.0 && opts.clip < 0.5)) throw ConfigError("clip must lie in (0, 0.5)");
}

SolveResult solve_fixed_point(const ClampContext& ctx, SchemeId scheme, const SolverOptions& opts,
                              const MeanVector* start) {
    validate(opts);
    const BeliefNetwork& net = ctx.net();
    const auto& free = ctx.free_units();
    ObjectiveEvaluator ev(net, scheme);
    ObjectiveGradient grad;

    SolveResult res;
    MeanVector u = initial_means(ctx, opts, start);
    const std::size_t window = static_cast<std::size_t>(opts.cycle_window);
    std::deque<MeanVector> history;  // history.back() is the previous sweep

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        MeanVector before = u;
        for (std::size_t k : free) {
            const double uk = u[k];
            double next = 0.0;
            if (opts.rule == UpdateRule::Plain) {
                ev.gradient(u, grad, false);
                next = logistic(logit(uk) - grad.du[k]);
            } else {
                next = coordinate_root(ev, grad, u, k, opts.clip);
            }
            next = std::clamp(next, opts.clip, 1.0 - opts.clip);
            u[k] = (1.0 - opts.damping) * next + opts.damping * uk;
        }
        res.iterations = iter;
        res.residual = sup_distance(u, before, free);
        if (!std::isfinite(res.residual)) {
            u = std::move(before);
            break;
        }
        if (res.residual <= opts.tol) {
            res.converged = true;
            break;
        }

        history.push_back(std::move(before));
        if (window == 0) {
            history.clear();
            continue;
        }
        while (history.size() > window) history.pop_front();
        // history.front() is u_{t-window}, history.back() is u_{t-1}.
        if (history.size() == window && sup_distance(u, history.front(), free) <= opts.cycle_tol &&
            res.residual > opts.cycle_tol) {
            ++res.cycles_detected;
            if (opts.restart_on_cycle && res.restarts < opts.max_restarts) {
                const MeanVector& a = history.back();
                MeanVector trial = u;
                MeanVector best = u;
                double best_value = std::numeric_limits<double>::infinity();
                const int points = opts.line_search_points;
                for (int s = 0; s < points; ++s) {
                    const double t = static_cast<double>(s) / (points - 1);
                    for (std::size_t i : free) trial[i] = (1.0 - t) * a[i] + t * u[i];
                    const double v = ev.value(trial);
                    if (v < best_value) {
                        best_value = v;
                        best = trial;
                    }
                }
                u = std::move(best);
                ++res.restarts;
                history.clear();
            }
        }
    }

    res.objective = ev.value(u);
    res.u = std::move(u);
    return res;
}

}  // namespace mfbn
