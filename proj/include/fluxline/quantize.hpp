#pragma once
#include <Eigen/Dense>
#include <vector>

#include "fluxline/foster.hpp"

namespace fluxline {

// i0 splits the modes: 1..i0 couple through flux, i0+1..N through charge
struct GaugeConfig {
    int i0 = 0;          // 0 = pure charge gauge, N = pure flux gauge
    double x = 1.0;      // shared fraction of the loop inductance, in (0, 1]
    double loop_l = 0.0; // henry
    double cj = 0.0;     // farad
};

struct CircuitMatrices {
    Eigen::MatrixXd cap;      // (N+1)x(N+1), farad; index 0 is the junction
    Eigen::MatrixXd ind_inv;  // (N+1)x(N+1), 1/henry
    double l_sum = 0.0;       // henry
    double x_tilde = 0.0;
    double el_tilde = 0.0;    // GHz, renormalized inductive energy
    GaugeConfig gauge;
    double z0 = 0.0;          // carried from the network for reporting
    double delta = 0.0;       // Hz
};

struct QuantizedCircuit {
    Eigen::VectorXd mode_freqs;      // GHz, ascending
    Eigen::MatrixXd bog_u, bog_v;    // N x N, bare index by normal mode
    Eigen::VectorXd g_flux;          // GHz, signed, per normal mode
    Eigen::VectorXd g_charge;        // GHz, signed, per normal mode
    double el_tilde = 0.0;           // GHz
    double x_tilde = 0.0;            // dressed inductance fraction
    GaugeConfig gauge;
    double z0 = 0.0;
    double delta = 0.0;              // Hz
};

struct CouplingProfile {
    Eigen::VectorXd g_flux, g_charge;       // GHz magnitudes as tabulated
    double flux_exponent = 0.0;             // power-law fit over the upper half
    double charge_exponent = 0.0;
};

struct ElRenormRow {
    double x = 0.0;
    int n = 0;
    double ratio = 0.0;  // renormalized over bare inductive energy
};

CircuitMatrices build_matrices(const FosterNetwork& net, const GaugeConfig& gauge);

QuantizedCircuit bogoliubov_diagonalize(const CircuitMatrices& mats);

CouplingProfile coupling_profile(const QuantizedCircuit& qc);

// closed-form low-mode flux coupling for the dispersionless line, GHz
double flux_coupling_analytic(const QuantizedCircuit& qc, int mode_index);

// flux-gauge inductive-energy renormalization across (x, N); cheap closed form
std::vector<ElRenormRow> el_renormalization_curve(const LineSpec& line, double loop_l,
                                                  const std::vector<double>& x_values,
                                                  const std::vector<int>& n_values);

}  // namespace fluxline
