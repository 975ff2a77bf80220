#pragma once

#include <cstddef>
#include <vector>

#include "mfbn/enumeration.hpp"

namespace mfbn {

/// G(u, gamma) obtained by numerically inverting the mean map of the tilted
/// distribution p~(s) ∝ exp(-gamma E(s) + sum_i theta_i s_i) over free units.
struct GibbsEvaluation {
    MeanVector u;
    double gamma = 0.0;
    /// Auxiliary fields, one per unit; zero for pinned units.
    std::vector<double> theta;
    /// G(u, gamma) = -ln Z~(theta) + sum_i theta_i u_i.
    double value = 0.0;
    double log_partition = 0.0;
    bool converged = false;
    /// max_i |<S_i> - u_i| at the returned theta.
    double residual = 0.0;
    int iterations = 0;
    bool used_bisection = false;
};

struct LegendreOptions {
    double tol = 1e-10;
    int max_newton = 100;
    int max_bisection_sweeps = 500;
};

/// Solves <S_i>_{p~(theta)} = u_i for theta by damped Newton (Jacobian is the
/// covariance of the tilted distribution), falling back to coordinate-wise
/// bisection if Newton stalls. Non-convergence is reported via `converged`.
GibbsEvaluation gibbs_free_energy(const ClampContext& ctx, const MeanVector& u, double gamma,
                                  const LegendreOptions& opts = {});

struct HessianReport {
    /// Free unit indices; matrices below are indexed in this order.
    std::vector<std::size_t> free_units;
    /// Covariance B of the tilted distribution, row-major.
    std::vector<double> covariance;
    /// Central-difference Hessian of G, row-major.
    std::vector<double> hessian;
    double max_abs_bh_minus_identity = 0.0;
    double min_hessian_eigenvalue = 0.0;
    bool converged = false;
};

/// Compares the enumerated covariance with the inverse of the finite-difference
/// Hessian of G at (u, gamma).
HessianReport covariance_and_hessian_check(const ClampContext& ctx, const MeanVector& u, double gamma,
                                           double fd_step = 1e-4);

/// Divergences between the factorial p~_0, the tilted p~_gamma and p_gamma,
/// all by enumeration at a solved Gibbs evaluation.
struct DivergenceTerms {
    double factorial_to_target = 0.0;  // D(p~_0, p_gamma)
    double factorial_to_tilted = 0.0;  // D(p~_0, p~_gamma)
    double tilted_to_target = 0.0;     // D(p~_gamma, p_gamma)
    double log_z_gamma = 0.0;
};

DivergenceTerms divergence_terms(const ClampContext& ctx, const GibbsEvaluation& eval);

}  // namespace mfbn
