#include "fluxline/fluxonium.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "fluxline/errors.hpp"

namespace fluxline {

namespace {

void require_params(const FluxoniumParams& p, int keep) {
    if (p.ej <= 0.0 || p.ec <= 0.0 || p.el <= 0.0)
        throw ParameterError("fluxonium: EJ, EC, EL must all be positive");
    if (p.basis_dim < 20) throw ParameterError("fluxonium: basis size must be at least 20");
    if (keep < 1) throw ParameterError("fluxonium: must keep at least one level");
    if (keep > p.basis_dim / 4)
        throw ParameterError("fluxonium: keeping " + std::to_string(keep) + " of " +
                             std::to_string(p.basis_dim) +
                             " basis levels risks truncation error; raise the basis size");
}

}  // namespace

Eigen::MatrixXd displacement_profile(double lambda, int dim) {
    // R_{n+k,n} = e^{-l^2/2} l^k sqrt(n!/(n+k)!) L_n^{(k)}(l^2), evaluated one
    // diagonal at a time; the Laguerre three-term recurrence is stable forward in n
    Eigen::MatrixXd r(dim, dim);
    const double x = lambda * lambda;
    for (int k = 0; k < dim; ++k) {
        double lag_prev = 0.0, lag = 1.0;  // L_{-1}, L_0
        for (int n = 0; n + k < dim; ++n) {
            if (n > 0) {
                double next = ((2.0 * n - 1.0 + k - x) * lag - (n - 1.0 + k) * lag_prev) / n;
                lag_prev = lag;
                lag = next;
            }
            double log_pref = k * std::log(lambda) - 0.5 * x +
                              0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + k + 1.0));
            double val = (k == 0 ? std::exp(-0.5 * x) * lag : std::exp(log_pref) * lag);
            r(n + k, n) = val;
            r(n, n + k) = val;
        }
    }
    return r;
}

FluxoniumSpectrum solve_fluxonium(const FluxoniumParams& p, int keep_levels) {
    require_params(p, keep_levels);
    const int m = p.basis_dim;
    const double lambda = std::pow(2.0 * p.ec / p.el, 0.25);
    const double w0 = std::sqrt(8.0 * p.ec * p.el);

    Eigen::MatrixXd r = displacement_profile(lambda, m);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        h(a, a) = w0 * (a + 0.5);
        for (int b = 0; b < m; ++b) {
            int k = std::abs(a - b);
            h(a, b) -= p.ej * r(a, b) * std::cos(0.5 * M_PI * k - p.phi_ext);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericError("fluxonium: eigensolver failed to converge");

    Eigen::MatrixXd vec = solver.eigenvectors().leftCols(keep_levels);
    for (int c = 0; c < keep_levels; ++c) {
        int imax = 0;
        vec.col(c).cwiseAbs().maxCoeff(&imax);
        if (vec(imax, c) < 0.0) vec.col(c) = -vec.col(c);
    }

    // phi = lambda (a + a^dag), n = i N with N = (a^dag - a)/(2 lambda)
    Eigen::MatrixXd phi_ho = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd n_ho = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a + 1 < m; ++a) {
        double s = std::sqrt(double(a + 1));
        phi_ho(a, a + 1) = phi_ho(a + 1, a) = lambda * s;
        n_ho(a + 1, a) = s / (2.0 * lambda);
        n_ho(a, a + 1) = -s / (2.0 * lambda);
    }

    FluxoniumSpectrum out;
    out.ground = solver.eigenvalues()(0);
    out.excitation = solver.eigenvalues().head(keep_levels).array() - out.ground;
    out.phi_mat = vec.transpose() * phi_ho * vec;
    out.n_mat_imag = vec.transpose() * n_ho * vec;
    out.phi_mat = 0.5 * (out.phi_mat + out.phi_mat.transpose()).eval();
    out.n_mat_imag = 0.5 * (out.n_mat_imag - out.n_mat_imag.transpose()).eval();
    out.dipole_asymmetry = keep_levels > 1 ? out.phi_mat(1, 1) - out.phi_mat(0, 0) : 0.0;
    return out;
}

std::vector<FluxoniumSpectrum> sweep_flux(const FluxoniumParams& params,
                                          const std::vector<double>& phi_grid, int keep_levels,
                                          bool parallel) {
    if (phi_grid.empty()) throw ParameterError("fluxonium: flux grid is empty");
    const int n = static_cast<int>(phi_grid.size());
    std::vector<FluxoniumSpectrum> out(n);
    std::vector<std::exception_ptr> failed(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n; ++i) {
        try {
            FluxoniumParams p = params;
            p.phi_ext = phi_grid[i];
            out[i] = solve_fluxonium(p, keep_levels);
        } catch (...) {
            failed[i] = std::current_exception();
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!failed[i]) continue;
        try {
            std::rethrow_exception(failed[i]);
        } catch (const ParameterError& e) {
            throw ParameterError("fluxonium: flux grid point " + std::to_string(i) + ": " + e.what());
        } catch (const std::exception& e) {
            throw NumericError("fluxonium: flux grid point " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace fluxline
