#pragma once
#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "fluxline/fluxonium.hpp"
#include "fluxline/quantize.hpp"

namespace fluxline {

// single-excitation eigenstates: the qubit hybridized with every mode above i0,
// while the flux-coupled modes 1..i0 pass through at their bare frequencies
struct PolaritonBasis {
    Eigen::VectorXd low_freqs;  // GHz, size i0
    Eigen::VectorXd omega;      // GHz, ascending, size N - i0 + 1
    Eigen::MatrixXd w;          // row per polariton: col 0 qubit, col j mode i0+j
    int i0 = 0;
    double f_eg = 0.0;          // GHz, qubit transition entering the block

    Eigen::VectorXd qubit_weight() const { return w.col(0); }
};

// one polariton plus a cloud of low-frequency photons
struct BasisState {
    int polariton = 0;     // row into PolaritonBasis::w
    std::vector<int> occ;  // photons per low mode, size i0
    int particles = 1;     // 1 + total photon count
    double energy = 0.0;   // GHz, unperturbed
};

struct EffectiveConfig {
    int s_max = 2;              // total particles per state, 1..3
    double window_lo = 0.0;     // GHz; lo >= hi requests f_eg +- 5 gamma_hat
    double window_hi = 0.0;
    bool sqrt_profile = false;  // replace computed coupling ratios by sqrt(i)
};

struct EffectiveModel {
    Eigen::VectorXd low_mode_freqs;  // GHz
    PolaritonBasis polaritons;
    Eigen::MatrixXd a;               // pairwise qubit-component products
    double g_over_h = 0.0;           // GHz, signed three-wave strength
    double gamma_hat = 0.0;          // GHz, fitted hybridization width
    std::vector<BasisState> basis;
    Eigen::MatrixXd h_eff;           // GHz, symmetric
};

struct FineStructurePoint {
    double phi_ext = 0.0;
    Eigen::VectorXd energies;          // GHz, ascending
    Eigen::VectorXd polariton_weight;  // single-polariton fraction per eigenstate
    bool ok = true;
    std::string note;  // failure annotation when !ok
};

PolaritonBasis build_polaritons(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx);

// A_{kk'}: product of the qubit components of the two polaritons
Eigen::MatrixXd conversion_amplitudes(const PolaritonBasis& pb);

// lowest-mode flux coupling times the qubit dipole asymmetry, GHz
double three_wave_strength(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx);

// FWHM of a Lorentzian fitted to qubit weight vs polariton frequency, GHz
double estimate_gamma(const PolaritonBasis& pb);

std::vector<BasisState> enumerate_basis(const PolaritonBasis& pb, int s_max,
                                        std::pair<double, double> window);

// low_ratio: per-low-mode coupling relative to mode 1, size i0
Eigen::MatrixXd assemble_h_eff(const PolaritonBasis& pb, const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& low_ratio, double g_over_h,
                               const std::vector<BasisState>& basis);

EffectiveModel build_effective(const QuantizedCircuit& qc, const FluxoniumSpectrum& flx,
                               const EffectiveConfig& cfg);

// per flux point: eigenvalues of H_eff plus spectroscopic visibility weights;
// the circuit is flux independent, so only the qubit is re-solved per point
std::vector<FineStructurePoint> fine_structure_sweep(const QuantizedCircuit& qc,
                                                     const FluxoniumParams& base,
                                                     const std::vector<double>& phi_grid,
                                                     const EffectiveConfig& cfg,
                                                     bool parallel = true);

}  // namespace fluxline
