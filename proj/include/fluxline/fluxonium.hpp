#pragma once
#include <Eigen/Dense>
#include <vector>

namespace fluxline {

// all energies in GHz (E/h)
struct FluxoniumParams {
    double ej = 0.0;
    double ec = 0.0;
    double el = 0.0;  // possibly renormalized by the gauge stage
    double phi_ext = 0.0;
    int basis_dim = 120;
};

struct FluxoniumSpectrum {
    Eigen::VectorXd excitation;   // GHz, ground subtracted, ascending
    double ground = 0.0;          // GHz, absolute ground eigenvalue
    Eigen::MatrixXd phi_mat;      // <a|phi|b>, real symmetric
    Eigen::MatrixXd n_mat_imag;   // N with <a|n|b> = i N_ab, real antisymmetric
    double dipole_asymmetry = 0.0;  // <e|phi|e> - <g|phi|g>
};

// R_mn with <m|e^{i lambda(a+a^dag)}|n> = i^{|m-n|} R_mn, real symmetric
Eigen::MatrixXd displacement_profile(double lambda, int dim);

FluxoniumSpectrum solve_fluxonium(const FluxoniumParams& params, int keep_levels = 7);

// one spectrum per grid point, ordered by grid index; errors carry the index
std::vector<FluxoniumSpectrum> sweep_flux(const FluxoniumParams& params,
                                          const std::vector<double>& phi_grid,
                                          int keep_levels = 7, bool parallel = true);

}  // namespace fluxline
