#include "mfbn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfbn/errors.hpp"

namespace mfbn {

std::string_view to_string(SchemeId scheme) {
    switch (scheme) {
        case SchemeId::G11: return "g11";
        case SchemeId::G12: return "g12";
        case SchemeId::G22: return "g22";
    }
    return "unknown";
}

SchemeId scheme_from_string(std::string_view name) {
    if (name == "g11" || name == "G11") return SchemeId::G11;
    if (name == "g12" || name == "G12") return SchemeId::G12;
    if (name == "g22" || name == "G22") return SchemeId::G22;
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

void check_scheme(SchemeId scheme, Activation activation) {
    if (scheme != SchemeId::G22) return;
    const auto kind = activation.kind();
    if (kind != ActivationKind::Sigmoid && kind != ActivationKind::NoisyOr) {
        throw ConfigError("g22 is only available for sigmoid and noisy-or networks");
    }
}

double central_moment_x(const BeliefNetwork& net, const MeanVector& u, std::size_t i, int k) {
    if (k == 1) return 0.0;
    if (k != 2) throw ConfigError("central moment order must be 1 or 2");
    double total = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
        const double w = net.weight(i, j);
        total += w * w * u[j] * (1.0 - u[j]);
    }
    return total;
}

double g_coefficient(const BeliefNetwork& net, const MeanVector& u, std::size_t i, int k) {
    if (k != 1 && k != 2) throw ConfigError("g coefficient order must be 1 or 2");
    const LogScores s = net.activation.log_scores(mean_field_input(net, u, i));
    return u[i] * s.on[k] + (1.0 - u[i]) * s.off[k];
}

double error_metric(double g_hat, double ln_z) {
    if (std::abs(ln_z) < 1e-12) {
        throw DegenerateClampError("relative error is undefined for ln Z = 0 (unclamped network?)");
    }
    return -g_hat / ln_z - 1.0;
}

ObjectiveEvaluator::ObjectiveEvaluator(const BeliefNetwork& net, SchemeId scheme, ObjectiveOptions opts)
    : net_(net), scheme_(scheme), opts_(opts), n_(net.n_units()) {
    check_scheme(scheme, net.activation);
    for (auto* v : {&mbar_, &var_, &q_, &g2_, &bd_, &cd_, &r_, &d_mbar_, &d_var_, &d_q_, &d_g2_,
                    &d_bd_, &d_cd_, &d_cc_}) {
        v->assign(n_, 0.0);
    }
    on_.assign(4 * n_, 0.0);
    off_.assign(4 * n_, 0.0);
    d_on_.assign(4 * n_, 0.0);
    d_off_.assign(4 * n_, 0.0);
    if (scheme_ == SchemeId::G22) {
        pair_.assign(n_ * n_, 0.0);
        d_pair_.assign(n_ * n_, 0.0);
    }
}

// Ĝ11 = sum_free [u ln u + (1-u) ln(1-u)] - sum_i [u_i ln f(M̄_i) + (1-u_i) ln(1-f(M̄_i))]
// Ĝ12 = Ĝ11 - 1/2 sum_i g2_i <X_i^2>
// Ĝ22 = Ĝ12 - 1/2 sum_{|A|>=2} c_A^2 prod_{j in A} v_j
//
// The last line is half the second coupling derivative of the quadratic
// energy expansion. Writing that energy as a multilinear polynomial in the
// centred spins D_j = S_j - u_j (using D_j^2 = (1 - 2u_j) D_j + v_j), its
// coefficients c_A are orthogonal under the factorial distribution, and the
// linear terms cancel against the covariance sum. What remains:
//   pairs  {p<q}:    P_pq = Bd_q w_qp + 1/2 Cd_q w_qp^2 (1 - 2u_p) + sum_{i>q} Cc_i w_ip w_iq
//   triples {j<k<i}: Cd_i w_ij w_ik
// with Bd = -(ln f - ln(1-f))', Cd = -(ln f - ln(1-f))'', Cc = -g2.
void ObjectiveEvaluator::forward(const MeanVector& u) {
    const std::size_t n = n_;
    const double* w = net_.weights.data();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = u[i];
        double m = net_.biases[i];
        for (std::size_t j = 0; j < i; ++j) m += w[i * n + j] * u[j];
        mbar_[i] = m;
        const LogScores s = net_.activation.log_scores(m);
        std::copy(s.on, s.on + 4, on_.begin() + 4 * i);
        std::copy(s.off, s.off + 4, off_.begin() + 4 * i);
        var_[i] = u.is_pinned(i) ? 0.0 : ui * (1.0 - ui);
        if (!u.is_pinned(i)) total += ui * std::log(ui) + (1.0 - ui) * std::log1p(-ui);
        total -= ui * s.on[0] + (1.0 - ui) * s.off[0];
    }
    if (scheme_ == SchemeId::G11) {
        value_ = total;
        return;
    }

    const double sign = opts_.flip_curvature_sign ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double q = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double wij = w[i * n + j];
            q += wij * wij * var_[j];
        }
        q_[i] = q;
        g2_[i] = u[i] * on_[4 * i + 2] + (1.0 - u[i]) * off_[4 * i + 2];
        total -= sign * 0.5 * g2_[i] * q;
    }
    if (scheme_ == SchemeId::G12) {
        value_ = total;
        return;
    }

    for (std::size_t i = 0; i < n; ++i) {
        bd_[i] = -(on_[4 * i + 1] - off_[4 * i + 1]);
        cd_[i] = -(on_[4 * i + 2] - off_[4 * i + 2]);
    }
    std::fill(pair_.begin(), pair_.end(), 0.0);
    // Shared-child terms: sum_{i>q} Cc_i w_ip w_iq accumulated into [q * n + p].
    for (std::size_t i = 0; i < n; ++i) {
        const double cc = -g2_[i];
        if (cc == 0.0) continue;
        const double* row = w + i * n;
        for (std::size_t q = 1; q < i; ++q) {
            if (row[q] == 0.0) continue;
            const double a = cc * row[q];
            double* dst = pair_.data() + q * n;
            for (std::size_t p = 0; p < q; ++p) dst[p] += a * row[p];
        }
    }
    double t2 = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        const double* row = w + q * n;
        double* pq = pair_.data() + q * n;
        for (std::size_t p = 0; p < q; ++p) {
            const double wqp = row[p];
            pq[p] += bd_[q] * wqp + 0.5 * cd_[q] * wqp * wqp * (1.0 - 2.0 * u[p]);
            t2 += var_[p] * var_[q] * pq[p] * pq[p];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (cd_[i] == 0.0 || var_[i] == 0.0) {
            r_[i] = 0.0;
            continue;
        }
        double r = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double a = w[i * n + j] * w[i * n + j] * var_[j];
            r += a * a;
        }
        r_[i] = r;
        t2 += 0.5 * cd_[i] * cd_[i] * var_[i] * (q_[i] * q_[i] - r);
    }
    value_ = total - 0.5 * t2;
}

void ObjectiveEvaluator::backward(const MeanVector& u, ObjectiveGradient& grad, bool with_parameters) {
    const std::size_t n = n_;
    const double* w = net_.weights.data();
    grad.du.assign(n, 0.0);
    if (with_parameters) {
        grad.dw.assign(n * n, 0.0);
        grad.dh.assign(n, 0.0);
    }
    std::fill(d_var_.begin(), d_var_.end(), 0.0);
    std::fill(d_q_.begin(), d_q_.end(), 0.0);
    std::fill(d_g2_.begin(), d_g2_.end(), 0.0);
    std::fill(d_on_.begin(), d_on_.end(), 0.0);
    std::fill(d_off_.begin(), d_off_.end(), 0.0);
    double* du = grad.du.data();
    double* dw = with_parameters ? grad.dw.data() : nullptr;

    // Entropy and mean energy.
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = u[i];
        if (!u.is_pinned(i)) du[i] += std::log(ui) - std::log1p(-ui);
        d_on_[4 * i] -= ui;
        d_off_[4 * i] -= 1.0 - ui;
        du[i] -= on_[4 * i] - off_[4 * i];
    }

    if (scheme_ != SchemeId::G11) {
        const double c = -0.5 * (opts_.flip_curvature_sign ? -1.0 : 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            d_g2_[i] += c * q_[i];
            d_q_[i] += c * g2_[i];
        }
    }

    if (scheme_ == SchemeId::G22) {
        constexpr double adj = -0.5;
        std::fill(d_bd_.begin(), d_bd_.end(), 0.0);
        std::fill(d_cd_.begin(), d_cd_.end(), 0.0);
        std::fill(d_cc_.begin(), d_cc_.end(), 0.0);
        std::fill(d_pair_.begin(), d_pair_.end(), 0.0);
        for (std::size_t q = 0; q < n; ++q) {
            const double* pq = pair_.data() + q * n;
            double* dpq = d_pair_.data() + q * n;
            for (std::size_t p = 0; p < q; ++p) {
                const double pv = pq[p];
                const double p2 = pv * pv;
                d_var_[p] += adj * var_[q] * p2;
                d_var_[q] += adj * var_[p] * p2;
                const double dp = adj * 2.0 * var_[p] * var_[q] * pv;
                if (dp == 0.0) continue;
                const double wqp = w[q * n + p];
                const double s = 1.0 - 2.0 * u[p];
                d_bd_[q] += dp * wqp;
                d_cd_[q] += dp * 0.5 * wqp * wqp * s;
                du[p] -= dp * cd_[q] * wqp * wqp;
                if (dw) dw[q * n + p] += dp * (bd_[q] + cd_[q] * wqp * s);
                dpq[p] = dp;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double cc = -g2_[i];
            const double* row = w + i * n;
            double dcc = 0.0;
            for (std::size_t q = 1; q < i; ++q) {
                const double wiq = row[q];
                const double* dpq = d_pair_.data() + q * n;
                double acc = 0.0;  // sum_p dP_pq w_ip
                for (std::size_t p = 0; p < q; ++p) {
                    const double d = dpq[p];
                    if (d == 0.0) continue;
                    acc += d * row[p];
                    if (dw) dw[i * n + p] += d * cc * wiq;
                }
                dcc += acc * wiq;
                if (dw) dw[i * n + q] += acc * cc;
            }
            d_cc_[i] = dcc;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (cd_[i] == 0.0 || var_[i] == 0.0) continue;
            const double t = q_[i] * q_[i] - r_[i];
            const double cd2 = cd_[i] * cd_[i];
            d_cd_[i] += adj * cd_[i] * var_[i] * t;
            d_var_[i] += adj * 0.5 * cd2 * t;
            d_q_[i] += adj * cd2 * var_[i] * q_[i];
            const double dr = -adj * 0.5 * cd2 * var_[i];
            for (std::size_t j = 0; j < i; ++j) {
                const double wij = w[i * n + j];
                const double w2 = wij * wij;
                if (dw) dw[i * n + j] += dr * 4.0 * w2 * wij * var_[j] * var_[j];
                d_var_[j] += dr * 2.0 * w2 * w2 * var_[j];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            d_g2_[i] -= d_cc_[i];
            d_on_[4 * i + 1] -= d_bd_[i];
            d_off_[4 * i + 1] += d_bd_[i];
            d_on_[4 * i + 2] -= d_cd_[i];
            d_off_[4 * i + 2] += d_cd_[i];
        }
    }

    if (scheme_ != SchemeId::G11) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dg = d_g2_[i];
            du[i] += dg * (on_[4 * i + 2] - off_[4 * i + 2]);
            d_on_[4 * i + 2] += dg * u[i];
            d_off_[4 * i + 2] += dg * (1.0 - u[i]);
            const double dq = d_q_[i];
            if (dq == 0.0) continue;
            for (std::size_t j = 0; j < i; ++j) {
                const double wij = w[i * n + j];
                if (dw) dw[i * n + j] += dq * 2.0 * wij * var_[j];
                d_var_[j] += dq * wij * wij;
            }
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        if (!u.is_pinned(j)) du[j] += d_var_[j] * (1.0 - 2.0 * u[j]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double* on = on_.data() + 4 * i;
        const double* off = off_.data() + 4 * i;
        const double* don = d_on_.data() + 4 * i;
        const double* doff = d_off_.data() + 4 * i;
        const double dm = don[0] * on[1] + don[1] * on[2] + don[2] * on[3] + doff[0] * off[1] +
                          doff[1] * off[2] + doff[2] * off[3];
        if (with_parameters) grad.dh[i] = dm;
        if (dm == 0.0) continue;
        for (std::size_t j = 0; j < i; ++j) {
            du[j] += dm * w[i * n + j];
            if (dw) dw[i * n + j] += dm * u[j];
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (u.is_pinned(i)) du[i] = 0.0;
    }
    grad.value = value_;
}

double ObjectiveEvaluator::value(const MeanVector& u) {
    forward(u);
    return value_;
}

void ObjectiveEvaluator::gradient(const MeanVector& u, ObjectiveGradient& grad, bool with_parameters) {
    forward(u);
    backward(u, grad, with_parameters);
}

double objective(const BeliefNetwork& net, const MeanVector& u, SchemeId scheme,
                 const ObjectiveOptions& opts) {
    validate_means(net, u);
    ObjectiveEvaluator ev(net, scheme, opts);
    return ev.value(u);
}

std::vector<double> objective_gradient(const BeliefNetwork& net, const MeanVector& u, SchemeId scheme) {
    validate_means(net, u);
    ObjectiveEvaluator ev(net, scheme);
    ObjectiveGradient g;
    ev.gradient(u, g, false);
    return g.du;
}

ObjectiveGradient objective_full_gradient(const BeliefNetwork& net, const MeanVector& u,
                                          SchemeId scheme, const ObjectiveOptions& opts) {
    validate_means(net, u);
    ObjectiveEvaluator ev(net, scheme, opts);
    ObjectiveGradient g;
    ev.gradient(u, g, true);
    return g;
}

}  // namespace mfbn
