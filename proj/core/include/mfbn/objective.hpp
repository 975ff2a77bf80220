#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "mfbn/network.hpp"

namespace mfbn {

/// Approximation scheme: (expansion order in the coupling, Taylor order of
/// the energy in the parent-field fluctuation).
enum class SchemeId { G11, G12, G22 };

std::string_view to_string(SchemeId scheme);
SchemeId scheme_from_string(std::string_view name);
inline constexpr SchemeId kAllSchemes[] = {SchemeId::G11, SchemeId::G12, SchemeId::G22};

/// Throws ConfigError when the scheme has no closed form for the activation.
void check_scheme(SchemeId scheme, Activation activation);

/// Central moments of X_i = sum_{j<i} w_ij (S_j - u_j) under the factorial
/// distribution: k = 1 gives 0, k = 2 gives sum_{j<i} w_ij^2 u_j (1 - u_j).
double central_moment_x(const BeliefNetwork& net, const MeanVector& u, std::size_t i, int k);

/// g_ki = u_i d^k/dM ln f(M̄_i) + (1 - u_i) d^k/dM ln(1 - f(M̄_i)), k in {1, 2}.
double g_coefficient(const BeliefNetwork& net, const MeanVector& u, std::size_t i, int k);

/// Fault injection used by the validation suite's mutation mode.
struct ObjectiveOptions {
    /// Flips the sign of the second-order Taylor correction in G12/G22.
    bool flip_curvature_sign = false;
};

/// Value of the objective and its partial derivatives. du has one entry per
/// unit (zero for pinned units); dw is dense row-major n x n with only the
/// strictly lower triangle populated.
struct ObjectiveGradient {
    double value = 0.0;
    std::vector<double> du;
    std::vector<double> dw;
    std::vector<double> dh;
};

/// Reusable evaluator; keeps scratch buffers between calls so the solver's
/// inner loop does not allocate.
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const BeliefNetwork& net, SchemeId scheme, ObjectiveOptions opts = {});

    SchemeId scheme() const { return scheme_; }

    double value(const MeanVector& u);
    /// Fills grad.du (and grad.dw / grad.dh when with_parameters is set).
    void gradient(const MeanVector& u, ObjectiveGradient& grad, bool with_parameters);

private:
    void forward(const MeanVector& u);
    void backward(const MeanVector& u, ObjectiveGradient& grad, bool with_parameters);

    const BeliefNetwork& net_;
    SchemeId scheme_;
    ObjectiveOptions opts_;
    std::size_t n_;

    double value_ = 0.0;
    std::vector<double> mbar_, var_, q_, g2_, bd_, cd_, r_;
    std::vector<double> on_, off_;  // 4 log-score derivatives per unit
    std::vector<double> pair_;      // n x n, P_pq stored at [q * n + p]

    std::vector<double> d_mbar_, d_var_, d_q_, d_g2_, d_bd_, d_cd_, d_cc_, d_on_, d_off_, d_pair_;
};

/// Ĝ11, Ĝ12 or Ĝ22 at u. Pinned entries contribute no entropy.
double objective(const BeliefNetwork& net, const MeanVector& u, SchemeId scheme,
                 const ObjectiveOptions& opts = {});

/// dĜ/du_i for every unit; pinned entries are reported as zero.
std::vector<double> objective_gradient(const BeliefNetwork& net, const MeanVector& u, SchemeId scheme);

/// Value plus derivatives with respect to u, the weights and the biases.
ObjectiveGradient objective_full_gradient(const BeliefNetwork& net, const MeanVector& u,
                                          SchemeId scheme, const ObjectiveOptions& opts = {});

/// Relative error of an estimate of -ln Z: -g_hat / ln_z - 1.
/// Throws DegenerateClampError when |ln_z| is below 1e-12.
double error_metric(double g_hat, double ln_z);

}  // namespace mfbn
