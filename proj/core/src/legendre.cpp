#include "mfbn/legendre.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mfbn/errors.hpp"

namespace mfbn {
namespace {

// Energies of every free configuration, with the configuration stored as a
// bit mask over the free units.
struct EnumeratedStates {
    std::vector<double> energy;
    std::vector<std::uint32_t> mask;
};

EnumeratedStates enumerate(const ClampContext& ctx) {
    const auto& free = ctx.free_units();
    check_enumeration_size(free.size());
    State base(ctx.net().n_units());
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (ctx.assignment()[i] > 0) base[i] = 1;
    }
    EnumeratedStates out;
    const std::size_t count = std::size_t{1} << free.size();
    out.energy.reserve(count);
    out.mask.reserve(count);
    for_each_assignment(base, free, [&](const State& s) {
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < free.size(); ++k) {
            if (s[free[k]]) m |= (1u << k);
        }
        out.energy.push_back(energy(ctx.net(), s));
        out.mask.push_back(m);
    });
    return out;
}

struct Moments {
    double log_z = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

Moments tilted_moments(const EnumeratedStates& st, double gamma, const Eigen::VectorXd& theta,
                       bool with_cov) {
    const Eigen::Index k = theta.size();
    std::vector<double> logits(st.energy.size());
    LogSumExp lse;
    for (std::size_t s = 0; s < st.energy.size(); ++s) {
        double l = -gamma * st.energy[s];
        for (Eigen::Index b = 0; b < k; ++b) {
            if (st.mask[s] >> b & 1u) l += theta[b];
        }
        logits[s] = l;
        lse.add(l);
    }
    Moments m;
    m.log_z = lse.value();
    m.mean = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t s = 0; s < st.energy.size(); ++s) {
        const double p = std::exp(logits[s] - m.log_z);
        for (Eigen::Index a = 0; a < k; ++a) {
            if (!(st.mask[s] >> a & 1u)) continue;
            m.mean[a] += p;
            if (!with_cov) continue;
            for (Eigen::Index b = a; b < k; ++b) {
                if (st.mask[s] >> b & 1u) second(a, b) += p;
            }
        }
    }
    if (with_cov) {
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = a; b < k; ++b) {
                const double c = second(a, b) - m.mean[a] * m.mean[b];
                second(a, b) = c;
                second(b, a) = c;
            }
        }
        m.cov = std::move(second);
    }
    return m;
}

double dual(const Moments& m, const Eigen::VectorXd& theta, const Eigen::VectorXd& target) {
    return m.log_z - theta.dot(target);
}

}  // namespace

GibbsEvaluation gibbs_free_energy(const ClampContext& ctx, const MeanVector& u, double gamma,
                                  const LegendreOptions& opts) {
    const auto& free = ctx.free_units();
    validate_means(ctx.net(), u);
    for (std::size_t i : free) {
        if (u.is_pinned(i)) throw ValidationError("free unit has a pinned mean");
    }
    const EnumeratedStates st = enumerate(ctx);
    const Eigen::Index k = static_cast<Eigen::Index>(free.size());

    Eigen::VectorXd target(k);
    Eigen::VectorXd theta(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const double p = u[free[a]];
        target[a] = p;
        theta[a] = std::log(p) - std::log1p(-p);
    }

    GibbsEvaluation out;
    out.u = u;
    out.gamma = gamma;

    auto residual_of = [&](const Moments& m) {
        return k == 0 ? 0.0 : (m.mean - target).cwiseAbs().maxCoeff();
    };

    Moments m = tilted_moments(st, gamma, theta, true);
    double residual = residual_of(m);
    // Newton on the convex dual ln Z~(theta) - theta.u; stop a little below
    // the requested tolerance so finite differences of theta stay clean.
    const double polish = std::min(opts.tol, 1e-13);
    bool stalled = false;
    int it = 0;
    for (; it < opts.max_newton && residual > polish; ++it) {
        const Eigen::VectorXd grad = m.mean - target;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m.cov);
        Eigen::VectorXd step = ldlt.solve(-grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            step = -grad;
        }
        const double f0 = dual(m, theta, target);
        const double slope = grad.dot(step);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd trial = theta + alpha * step;
            Moments mt = tilted_moments(st, gamma, trial, true);
            const double ft = dual(mt, trial, target);
            const double rt = residual_of(mt);
            if (ft <= f0 + 1e-4 * alpha * slope || rt < residual) {
                theta = trial;
                m = std::move(mt);
                residual = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            stalled = true;
            break;
        }
    }
    out.iterations = it;

    if (residual > opts.tol && (stalled || it >= opts.max_newton)) {
        out.used_bisection = true;
        for (int sweep = 0; sweep < opts.max_bisection_sweeps && residual > opts.tol; ++sweep) {
            for (Eigen::Index a = 0; a < k; ++a) {
                auto mean_at = [&](double t) {
                    Eigen::VectorXd trial = theta;
                    trial[a] = t;
                    return tilted_moments(st, gamma, trial, false).mean[a] - target[a];
                };
                double lo = theta[a] - 1.0;
                double hi = theta[a] + 1.0;
                for (int e = 0; e < 60 && mean_at(lo) > 0.0; ++e) lo -= std::ldexp(1.0, e);
                for (int e = 0; e < 60 && mean_at(hi) < 0.0; ++e) hi += std::ldexp(1.0, e);
                for (int b = 0; b < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++b) {
                    const double mid = 0.5 * (lo + hi);
                    (mean_at(mid) < 0.0 ? lo : hi) = mid;
                }
                theta[a] = 0.5 * (lo + hi);
            }
            m = tilted_moments(st, gamma, theta, false);
            residual = residual_of(m);
            ++out.iterations;
        }
    }

    out.residual = residual;
    out.converged = std::isfinite(residual) && residual <= opts.tol;
    out.log_partition = m.log_z;
    out.value = -m.log_z + theta.dot(target);
    out.theta.assign(ctx.net().n_units(), 0.0);
    for (Eigen::Index a = 0; a < k; ++a) out.theta[free[a]] = theta[a];
    return out;
}

HessianReport covariance_and_hessian_check(const ClampContext& ctx, const MeanVector& u, double gamma,
                                           double fd_step) {
    const auto& free = ctx.free_units();
    const std::size_t k = free.size();
    HessianReport rep;
    rep.free_units = free;

    const GibbsEvaluation centre = gibbs_free_energy(ctx, u, gamma);
    if (!centre.converged) {
        rep.converged = false;
        return rep;
    }
    const EnumeratedStates st = enumerate(ctx);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) theta[static_cast<Eigen::Index>(a)] = centre.theta[free[a]];
    const Eigen::MatrixXd cov = tilted_moments(st, gamma, theta, true).cov;

    Eigen::MatrixXd hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    bool ok = true;
    for (std::size_t b = 0; b < k; ++b) {
        MeanVector up = u;
        MeanVector down = u;
        up[free[b]] += fd_step;
        down[free[b]] -= fd_step;
        const GibbsEvaluation gu = gibbs_free_energy(ctx, up, gamma);
        const GibbsEvaluation gd = gibbs_free_energy(ctx, down, gamma);
        ok = ok && gu.converged && gd.converged;
        for (std::size_t a = 0; a < k; ++a) {
            hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                (gu.theta[free[a]] - gd.theta[free[a]]) / (2.0 * fd_step);
        }
    }
    rep.converged = ok;

    const Eigen::MatrixXd bh = cov * hess - Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    rep.max_abs_bh_minus_identity = k == 0 ? 0.0 : bh.cwiseAbs().maxCoeff();
    rep.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
    if (k > 0) {
        const Eigen::MatrixXd sym = 0.5 * (hess + hess.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
        rep.min_hessian_eigenvalue = eig.eigenvalues().minCoeff();
    }

    rep.covariance.assign(cov.data(), cov.data() + cov.size());
    rep.hessian.resize(k * k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            rep.covariance[a * k + b] = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            rep.hessian[a * k + b] = hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return rep;
}

DivergenceTerms divergence_terms(const ClampContext& ctx, const GibbsEvaluation& eval) {
    const auto& free = ctx.free_units();
    const EnumeratedStates st = enumerate(ctx);
    const double gamma = eval.gamma;
    const std::size_t k = free.size();

    DivergenceTerms out;
    LogSumExp lz;
    for (double e : st.energy) lz.add(-gamma * e);
    out.log_z_gamma = lz.value();
    const double log_z_tilted = eval.log_partition;

    for (std::size_t s = 0; s < st.energy.size(); ++s) {
        double log_p0 = 0.0;
        double tilt = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            const bool on = st.mask[s] >> a & 1u;
            const double ui = eval.u[free[a]];
            log_p0 += on ? std::log(ui) : std::log1p(-ui);
            if (on) tilt += eval.theta[free[a]];
        }
        const double log_target = -gamma * st.energy[s] - out.log_z_gamma;
        const double log_tilted = -gamma * st.energy[s] + tilt - log_z_tilted;
        const double p0 = std::exp(log_p0);
        const double pt = std::exp(log_tilted);
        out.factorial_to_target += p0 * (log_p0 - log_target);
        out.factorial_to_tilted += p0 * (log_p0 - log_tilted);
        out.tilted_to_target += pt * (log_tilted - log_target);
    }
    return out;
}

}  // namespace mfbn
