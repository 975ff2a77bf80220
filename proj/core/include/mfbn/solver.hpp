#pragma once

#include <optional>

#include "mfbn/enumeration.hpp"
#include "mfbn/objective.hpp"

namespace mfbn {

enum class InitKind { UniformHalf, ForwardPass, Given };

enum class UpdateRule {
    /// One step u_i <- sigma(logit u_i - dĜ/du_i) per unit.
    Plain,
    /// Solve dĜ/du_i = 0 along coordinate i before moving on.
    CoordinateSolve,
};

struct SolverOptions {
    /// Sup-norm of the change over one sweep that counts as converged.
    double tol = 1e-8;
    int max_iter = 10000;
    InitKind init = InitKind::UniformHalf;
    UpdateRule rule = UpdateRule::CoordinateSolve;
    /// u <- (1 - damping) * update + damping * u.
    double damping = 0.0;
    /// Period of the cycles looked for; 0 disables detection.
    int cycle_window = 2;
    double cycle_tol = 1e-6;
    int line_search_points = 101;
    bool restart_on_cycle = true;
    int max_restarts = 50;
    /// Free means are kept inside [clip, 1 - clip].
    double clip = 1e-9;
};

/// Throws ConfigError for out-of-range options.
void validate(const SolverOptions& opts);

struct SolveResult {
    MeanVector u;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    int cycles_detected = 0;
    int restarts = 0;
    /// Sup-norm change of the final sweep.
    double residual = 0.0;
};

/// Gauss-Seidel iteration of u_i <- sigma(-d(Ĝ - entropy)/du_i) over the free
/// units in topological order. When a period-`cycle_window` oscillation is
/// detected the iteration restarts from the point on the segment between the
/// last two iterates with the lowest objective. Non-convergence is reported,
/// never thrown.
SolveResult solve_fixed_point(const ClampContext& ctx, SchemeId scheme, const SolverOptions& opts,
                              const MeanVector* start = nullptr);

}  // namespace mfbn
