#include "fluxline/effective.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "fluxline/errors.hpp"

namespace fluxline {

namespace {

// sum of squared residuals of a Lorentzian a * (g/2)^2 / ((x-f0)^2 + (g/2)^2)
double lorentz_sse(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double a, double f0,
                   double g) {
    const double q = 0.25 * g * g;
    double sse = 0.0;
    for (int k = 0; k < x.size(); ++k) {
        const double d = x(k) - f0;
        const double r = y(k) - a * q / (d * d + q);
        sse += r * r;
    }
    return sse;
}

}  // namespace

PolaritonBasis build_polaritons(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx) {
    const int n = static_cast<int>(qc.mode_freqs.size());
    const int i0 = qc.gauge.i0;
    if (i0 < 0 || i0 >= n) {
        throw ParameterError("effective: split index must leave at least one mode above it, got " +
                             std::to_string(i0) + " with N = " + std::to_string(n));
    }
    if (flx.excitation.size() < 2) {
        throw ParameterError("effective: fluxonium spectrum must keep at least two levels");
    }

    const double f_eg = flx.excitation(1);
    const double phi_eg = flx.phi_mat(0, 1);
    const double n_eg = flx.n_mat_imag(1, 0);

    // single-excitation block: qubit on row 0, one row per mode above the split
    const int m = n - i0 + 1;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    block(0, 0) = f_eg;
    for (int j = 1; j < m; ++j) {
        block(j, j) = qc.mode_freqs(i0 + j - 1);
        block(0, j) = phi_eg * qc.g_flux(i0 + j - 1) - n_eg * qc.g_charge(i0 + j - 1);
        block(j, 0) = block(0, j);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success) {
        throw NumericError("effective: single-excitation diagonalization failed");
    }

    PolaritonBasis pb;
    pb.i0 = i0;
    pb.f_eg = f_eg;
    pb.low_freqs = qc.mode_freqs.head(i0);
    pb.omega = es.eigenvalues();
    pb.w = es.eigenvectors().transpose();
    for (int k = 0; k < m; ++k) {
        int jmax = 0;
        pb.w.row(k).cwiseAbs().maxCoeff(&jmax);
        if (pb.w(k, jmax) < 0.0) pb.w.row(k) = -pb.w.row(k);
    }
    return pb;
}

Eigen::MatrixXd conversion_amplitudes(const PolaritonBasis& pb) {
    const Eigen::VectorXd q = pb.w.col(0);
    return q * q.transpose();
}

double three_wave_strength(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx) {
    if (qc.g_flux.size() < 1) throw ParameterError("effective: no modes to couple");
    return qc.g_flux(0) * flx.dipole_asymmetry;
}

double estimate_gamma(const PolaritonBasis& pb) {
    const Eigen::VectorXd& x = pb.omega;
    const Eigen::VectorXd y = pb.qubit_weight().cwiseAbs2();
    const int m = static_cast<int>(x.size());
    if (m < 3) throw ParameterError("effective: too few polaritons to fit a width");

    int kmax = 0;
    const double ymax = y.maxCoeff(&kmax);
    if (!(ymax > 0.0)) throw NumericError("effective: qubit weight vanished everywhere");

    // seed the fit from the half-maximum crossings around the peak
    double lo = x(0), hi = x(m - 1);
    for (int k = kmax; k >= 0; --k) {
        if (y(k) < 0.5 * ymax) {
            const double t = (0.5 * ymax - y(k)) / (y(k + 1) - y(k));
            lo = x(k) + t * (x(k + 1) - x(k));
            break;
        }
    }
    for (int k = kmax; k < m; ++k) {
        if (y(k) < 0.5 * ymax) {
            const double t = (0.5 * ymax - y(k)) / (y(k - 1) - y(k));
            hi = x(k) - t * (x(k) - x(k - 1));
            break;
        }
    }
    double a = ymax, f0 = x(kmax), g = std::max(hi - lo, 1e-12);

    // damped Gauss-Newton on (a, f0, g)
    double sse = lorentz_sse(x, y, a, f0, g);
    for (int it = 0; it < 40; ++it) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        const double q = 0.25 * g * g;
        for (int k = 0; k < m; ++k) {
            const double d = x(k) - f0;
            const double den = d * d + q;
            const double model = a * q / den;
            const double r = y(k) - model;
            Eigen::Vector3d grad;
            grad(0) = q / den;
            grad(1) = 2.0 * a * q * d / (den * den);
            grad(2) = 0.5 * a * g * d * d / (den * den);
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        Eigen::Vector3d step = (jtj + 1e-12 * Eigen::Matrix3d::Identity()).ldlt().solve(jtr);
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 12; ++half) {
            const double a2 = a + scale * step(0);
            const double f2 = f0 + scale * step(1);
            const double g2 = g + scale * step(2);
            if (g2 > 0.0 && a2 > 0.0) {
                const double s2 = lorentz_sse(x, y, a2, f2, g2);
                if (s2 < sse) {
                    a = a2;
                    f0 = f2;
                    g = g2;
                    sse = s2;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    return g;
}

std::vector<BasisState> enumerate_basis(const PolaritonBasis& pb, int s_max,
                                        std::pair<double, double> window) {
    if (s_max < 1 || s_max > 3) {
        throw ParameterError("effective: particle cap must lie in 1..3, got " +
                             std::to_string(s_max));
    }
    const int m = static_cast<int>(pb.omega.size());
    const int i0 = pb.i0;
    const auto [lo, hi] = window;

    std::vector<BasisState> basis;
    auto push = [&](int k, std::vector<int> occ, int photons, double extra) {
        const double e = pb.omega(k) + extra;
        if (e < lo || e > hi) return;
        basis.push_back({k, std::move(occ), photons + 1, e});
    };
    for (int k = 0; k < m; ++k) {
        push(k, std::vector<int>(i0, 0), 0, 0.0);
        if (s_max < 2) continue;
        for (int i = 0; i < i0; ++i) {
            std::vector<int> occ(i0, 0);
            occ[i] = 1;
            push(k, std::move(occ), 1, pb.low_freqs(i));
            if (s_max < 3) continue;
            for (int j = i; j < i0; ++j) {
                std::vector<int> occ2(i0, 0);
                occ2[i] += 1;
                occ2[j] += 1;
                push(k, std::move(occ2), 2, pb.low_freqs(i) + pb.low_freqs(j));
            }
        }
    }
    std::sort(basis.begin(), basis.end(), [](const BasisState& a, const BasisState& b) {
        if (a.particles != b.particles) return a.particles < b.particles;
        if (a.energy != b.energy) return a.energy < b.energy;
        if (a.polariton != b.polariton) return a.polariton < b.polariton;
        return a.occ < b.occ;
    });
    return basis;
}

Eigen::MatrixXd assemble_h_eff(const PolaritonBasis& pb, const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& low_ratio, double g_over_h,
                               const std::vector<BasisState>& basis) {
    const int i0 = pb.i0;
    const int dim = static_cast<int>(basis.size());
    for (const BasisState& s : basis) {
        int photons = 0;
        for (int c : s.occ) photons += c;
        if (static_cast<int>(s.occ.size()) != i0 || s.particles != photons + 1 ||
            s.polariton < 0 || s.polariton >= pb.omega.size()) {
            throw ParameterError("effective: basis state breaks the one-polariton bookkeeping");
        }
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) h(s, s) = basis[s].energy;
    for (int s = 0; s < dim; ++s) {
        for (int t = s + 1; t < dim; ++t) {
            if (basis[t].particles != basis[s].particles + 1) continue;
            // couple states differing by a single photon in a single low mode
            int mode = -1;
            bool single = true;
            for (int i = 0; i < i0 && single; ++i) {
                const int d = basis[t].occ[i] - basis[s].occ[i];
                if (d == 0) continue;
                if (d != 1 || mode >= 0) single = false;
                mode = i;
            }
            if (!single || mode < 0) continue;
            const double v = g_over_h * low_ratio(mode) * a(basis[s].polariton, basis[t].polariton) *
                             std::sqrt(static_cast<double>(basis[t].occ[mode]));
            h(s, t) = v;
            h(t, s) = v;
        }
    }
    return h;
}

EffectiveModel build_effective(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx,
                               const EffectiveConfig& cfg) {
    EffectiveModel model;
    model.polaritons = build_polaritons(qc, flx);
    model.low_mode_freqs = model.polaritons.low_freqs;
    model.a = conversion_amplitudes(model.polaritons);
    model.g_over_h = three_wave_strength(qc, flx);
    model.gamma_hat = estimate_gamma(model.polaritons);

    std::pair<double, double> window{cfg.window_lo, cfg.window_hi};
    if (!(cfg.window_lo < cfg.window_hi)) {
        window = {model.polaritons.f_eg - 5.0 * model.gamma_hat,
                  model.polaritons.f_eg + 5.0 * model.gamma_hat};
    }

    const int i0 = qc.gauge.i0;
    Eigen::VectorXd ratio(i0);
    for (int i = 0; i < i0; ++i) {
        if (cfg.sqrt_profile) {
            ratio(i) = std::sqrt(static_cast<double>(i + 1));
        } else {
            ratio(i) = qc.g_flux(0) != 0.0 ? qc.g_flux(i) / qc.g_flux(0) : 0.0;
        }
    }

    model.basis = enumerate_basis(model.polaritons, cfg.s_max, window);
    model.h_eff = assemble_h_eff(model.polaritons, model.a, ratio, model.g_over_h, model.basis);
    return model;
}

std::vector<FineStructurePoint> fine_structure_sweep(const QuantizedCircuit& qc,
                                                     const FluxoniumParams& base,
                                                     const std::vector<double>& phi_grid,
                                                     const EffectiveConfig& cfg, bool parallel) {
    if (phi_grid.empty()) throw ParameterError("effective: flux grid is empty");
    const int n = static_cast<int>(phi_grid.size());
    std::vector<FineStructurePoint> out(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int p = 0; p < n; ++p) {
        out[p].phi_ext = phi_grid[p];
        try {
            FluxoniumParams fp = base;
            fp.phi_ext = phi_grid[p];
            const FluxoniumSpectrum flx = solve_fluxonium(fp);
            const EffectiveModel model = build_effective(qc, flx, cfg);
            const int dim = static_cast<int>(model.basis.size());
            if (dim == 0) {
                out[p].ok = false;
                out[p].note = "empty basis window";
                continue;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.h_eff);
            if (es.info() != Eigen::Success) throw NumericError("fine-structure solve failed");
            out[p].energies = es.eigenvalues();
            out[p].polariton_weight = Eigen::VectorXd::Zero(dim);
            for (int col = 0; col < dim; ++col) {
                double weight = 0.0;
                for (int s = 0; s < dim; ++s) {
                    if (model.basis[s].particles == 1) {
                        weight += es.eigenvectors()(s, col) * es.eigenvectors()(s, col);
                    }
                }
                out[p].polariton_weight(col) = weight;
            }
        } catch (const std::exception& e) {
            out[p].ok = false;
            out[p].note = e.what();
        }
    }
    return out;
}

}  // namespace fluxline
