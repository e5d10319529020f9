#include "fluxline/quantize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fluxline/constants.hpp"
#include "fluxline/errors.hpp"

namespace fluxline {

namespace {

constexpr double pi = std::numbers::pi;

void require_gauge(const GaugeConfig& gauge, int n_modes) {
    if (gauge.i0 < 0 || gauge.i0 > n_modes) {
        throw ParameterError("quantize: i0 must lie in [0, N], got " + std::to_string(gauge.i0) +
                             " with N = " + std::to_string(n_modes));
    }
    if (!(gauge.x > 0.0) || gauge.x > 1.0) {
        throw ParameterError("quantize: inductance fraction x must lie in (0, 1], got " +
                             std::to_string(gauge.x));
    }
    if (!(gauge.loop_l > 0.0)) throw ParameterError("quantize: loop inductance must be positive");
    if (!(gauge.cj > 0.0)) throw ParameterError("quantize: junction capacitance must be positive");
}

// power-law exponent of |g| vs mode number over [lo, hi], 1-based inclusive
double fit_exponent(const Eigen::VectorXd& g, int lo, int hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (int i = lo; i <= hi; ++i) {
        const double mag = std::abs(g(i - 1));
        if (mag < 1e-30) continue;
        const double lx = std::log(static_cast<double>(i));
        const double ly = std::log(mag);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

CircuitMatrices build_matrices(const FosterNetwork& net, const GaugeConfig& gauge) {
    const int n = static_cast<int>(net.size());
    if (n < 1) throw ParameterError("quantize: network must have at least one branch");
    require_gauge(gauge, n);

    const int i0 = gauge.i0;
    const double x = gauge.x;
    const double loop_l = gauge.loop_l;

    // sum of inverse branch inductances on the flux-coupled side
    double s_low = 0.0;
    for (int i = 0; i < i0; ++i) s_low += 1.0 / net.ind[i];

    // x_tilde = l_sum / ((1-x) L), written to stay finite as x -> 1
    const double x_tilde = 1.0 / ((1.0 - x) / x + 1.0 + (1.0 - x) * loop_l * s_low);
    const double l_sum = x_tilde * (1.0 - x) * loop_l;

    double cap_high = 0.0;
    for (int i = i0; i < n; ++i) cap_high += net.cap[i];

    CircuitMatrices out;
    out.gauge = gauge;
    out.z0 = net.z0;
    out.delta = net.delta;
    out.l_sum = l_sum;
    out.x_tilde = x_tilde;

    Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::MatrixXd ind_inv = Eigen::MatrixXd::Zero(n + 1, n + 1);

    // ratios l_sum / L_i, zero on the charge-coupled side where unused
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) r(i) = l_sum / net.ind[i];

    cap(0, 0) = gauge.cj + x_tilde * x_tilde * cap_high;
    for (int i = 1; i <= n; ++i) {
        const double ci = net.cap[i - 1];
        if (i <= i0) {
            cap(0, i) = -x_tilde * r(i - 1) * cap_high;
        } else {
            cap(0, i) = -x_tilde * ci - x_tilde * r(i - 1) * cap_high;
        }
        cap(i, 0) = cap(0, i);
        for (int j = i; j <= n; ++j) {
            const double cj_ = net.cap[j - 1];
            double v = (i == j) ? ci : 0.0;
            if (i <= i0 && j <= i0) {
                v += r(i - 1) * r(j - 1) * cap_high;
            } else if (i <= i0 && j > i0) {
                v += r(i - 1) * cj_ + r(i - 1) * r(j - 1) * cap_high;
            } else {
                v += r(i - 1) * cj_ + r(j - 1) * ci + r(i - 1) * r(j - 1) * cap_high;
            }
            cap(i, j) = v;
            cap(j, i) = v;
        }
    }

    // junction row: (1 - x_tilde)/((1-x) L) in a form finite at x = 1
    ind_inv(0, 0) = x_tilde * (1.0 / (x * loop_l) + s_low);
    for (int i = 1; i <= i0; ++i) {
        ind_inv(0, i) = x_tilde / net.ind[i - 1];
        ind_inv(i, 0) = ind_inv(0, i);
    }
    // flux-coupled modes keep bare inductances: the shared-loop correction is
    // dropped on that block at leading order, so their normal modes stay bare
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
            double v = (i == j) ? 1.0 / net.ind[i - 1] : 0.0;
            if (i > i0 && j > i0) {
                v += l_sum / (net.ind[i - 1] * net.ind[j - 1]);
            }
            ind_inv(i, j) = v;
            ind_inv(j, i) = v;
        }
    }

    out.cap = std::move(cap);
    out.ind_inv = std::move(ind_inv);
    out.el_tilde = el_from_ind_inv(out.ind_inv(0, 0));
    return out;
}

QuantizedCircuit bogoliubov_diagonalize(const CircuitMatrices& mats) {
    const int n = static_cast<int>(mats.cap.rows()) - 1;
    if (n < 1) throw ParameterError("quantize: matrices must cover at least one mode");
    const double rq = resistance_quantum;

    Eigen::LLT<Eigen::MatrixXd> llt(mats.cap);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diag(mats.cap, Eigen::EigenvaluesOnly);
        const auto& ev = diag.eigenvalues();
        const double worst = ev.cwiseAbs().minCoeff();
        const double cond = worst > 0.0 ? ev.cwiseAbs().maxCoeff() / worst
                                        : std::numeric_limits<double>::infinity();
        throw NumericError(
            "quantize: capacitance matrix is not positive definite, condition number ~ " +
            std::to_string(cond));
    }
    const Eigen::MatrixXd cinv = llt.solve(Eigen::MatrixXd::Identity(n + 1, n + 1));

    // photonic blocks of the full inverses set the oscillator problem
    const Eigen::MatrixXd m_mat = cinv.bottomRightCorner(n, n) / rq;
    const Eigen::MatrixXd p_mat = rq * mats.ind_inv.bottomRightCorner(n, n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(m_mat);
    if (es_m.info() != Eigen::Success || es_m.eigenvalues().minCoeff() <= 0.0) {
        throw NumericError("quantize: inverse-capacitance block is not positive definite");
    }
    const Eigen::MatrixXd m_sqrt = es_m.operatorSqrt();
    const Eigen::MatrixXd m_isqrt = es_m.operatorInverseSqrt();

    Eigen::MatrixXd w = m_sqrt * p_mat * m_sqrt;
    w = 0.5 * (w + w.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_w(w);
    if (es_w.info() != Eigen::Success) throw NumericError("quantize: normal-mode solve failed");
    if (es_w.eigenvalues().minCoeff() <= 0.0) {
        throw NumericError("quantize: unstable photonic sector, squared frequency " +
                           std::to_string(es_w.eigenvalues().minCoeff()) + " <= 0");
    }

    const Eigen::VectorXd omega = es_w.eigenvalues().cwiseSqrt();  // rad/s, ascending
    const Eigen::MatrixXd& z = es_w.eigenvectors();

    // a_i = sum_nu U b_nu + V b_nu^dag with S = U+V, D = U-V obeying S D^T = 1
    const Eigen::MatrixXd s =
        m_sqrt * z * omega.cwiseInverse().cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd d = m_isqrt * z * omega.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd u = 0.5 * (s + d);
    Eigen::MatrixXd v = 0.5 * (s - d);

    for (int nu = 0; nu < n; ++nu) {
        int imax = 0;
        u.col(nu).cwiseAbs().maxCoeff(&imax);
        if (u(imax, nu) < 0.0) {
            u.col(nu) = -u.col(nu);
            v.col(nu) = -v.col(nu);
        }
    }

    // junction couples through row 0 of both inverse matrices
    Eigen::VectorXd cf(n), cc(n);
    const double phi_zp = std::sqrt(hbar * rq / 2.0);
    const double q_zp = std::sqrt(hbar / (2.0 * rq));
    for (int j = 0; j < n; ++j) {
        cf(j) = reduced_flux_quantum * mats.ind_inv(0, j + 1) * phi_zp;
        cc(j) = 2.0 * echarge * cinv(0, j + 1) * q_zp;
    }

    QuantizedCircuit qc;
    qc.mode_freqs = omega / (2.0 * pi * ghz);
    qc.g_flux = ((u + v).transpose() * cf) / (planck_h * ghz);
    qc.g_charge = ((u - v).transpose() * cc) / (planck_h * ghz);
    qc.bog_u = std::move(u);
    qc.bog_v = std::move(v);
    qc.el_tilde = mats.el_tilde;
    qc.x_tilde = mats.x_tilde;
    qc.gauge = mats.gauge;
    qc.z0 = mats.z0;
    qc.delta = mats.delta;
    return qc;
}

CouplingProfile coupling_profile(const QuantizedCircuit& qc) {
    const int n = static_cast<int>(qc.mode_freqs.size());
    const int i0 = qc.gauge.i0;
    CouplingProfile out;
    out.g_flux = qc.g_flux.cwiseAbs();
    out.g_charge = qc.g_charge.cwiseAbs();
    // fit each coupling over the upper half of its own gauge window
    out.flux_exponent = i0 >= 1 ? fit_exponent(out.g_flux, std::max(1, i0 / 2), i0)
                                : std::numeric_limits<double>::quiet_NaN();
    out.charge_exponent = i0 < n ? fit_exponent(out.g_charge, i0 + std::max(1, (n - i0) / 2), n)
                                 : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double flux_coupling_analytic(const QuantizedCircuit& qc, int mode_index) {
    if (mode_index < 1 || mode_index > qc.gauge.i0) {
        throw ParameterError("quantize: analytic flux coupling holds for modes 1.." +
                             std::to_string(qc.gauge.i0) + ", got " + std::to_string(mode_index));
    }
    const double f_ghz = qc.mode_freqs(mode_index - 1);
    const double half = mode_index - 0.5;
    return f_ghz * qc.x_tilde *
           std::sqrt(resistance_quantum / (2.0 * pi * pi * qc.z0 * half));
}

std::vector<ElRenormRow> el_renormalization_curve(const LineSpec& line, double loop_l,
                                                  const std::vector<double>& x_values,
                                                  const std::vector<int>& n_values) {
    if (!(loop_l > 0.0)) throw ParameterError("quantize: loop inductance must be positive");
    std::vector<ElRenormRow> rows;
    rows.reserve(x_values.size() * n_values.size());
    for (double x : x_values) {
        if (!(x > 0.0) || x >= 1.0) {
            throw ParameterError("quantize: renormalization curve needs x in (0, 1)");
        }
        for (int n : n_values) {
            LineSpec spec = line;
            spec.n_modes = n;
            FosterNetwork net;
            switch (spec.kind) {
                case LineKind::open_nondispersive: net = foster_open_line(spec); break;
                case LineKind::dispersive_terminated: net = foster_dispersive(spec); break;
                case LineKind::josephson_chain: net = foster_josephson(spec); break;
            }
            double s_all = 0.0;
            for (double li : net.ind) s_all += 1.0 / li;
            const double x_tilde = 1.0 / ((1.0 - x) / x + 1.0 + (1.0 - x) * loop_l * s_all);
            rows.push_back({x, n, (1.0 - x_tilde) / (1.0 - x)});
        }
    }
    return rows;
}

}  // namespace fluxline
