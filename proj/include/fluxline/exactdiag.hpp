#pragma once
#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fluxline/fluxonium.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/quantize.hpp"

namespace fluxline {

enum class ExactGauge { charge, flux, mixed };

// brute-force reference: qubit levels tensor the lowest-energy photon states
struct ExactDiagConfig {
    ExactGauge gauge = ExactGauge::charge;
    int i0 = 1;                 // split index, used by the mixed gauge only
    int n_fluxonium_levels = 7;
    int photon_states = 40;     // lowest-energy multi-mode Fock states kept
    int max_dimension = 20000;
    FosterNetwork network;
    FluxoniumParams fluxonium;  // el is the bare inductive energy
    double x = 1.0;
};

struct StateLabel {
    int qubit_level = 0;
    std::vector<int> occupation;  // photons per normal mode
    double overlap = 0.0;         // squared weight of the product state
};

struct ExactSpectrum {
    Eigen::VectorXd excitations;     // GHz, ground subtracted, ascending
    std::vector<StateLabel> labels;  // dominant product state per excitation
    double ground = 0.0;             // GHz, absolute lowest eigenvalue
    int dimension = 0;
};

struct TruncationAudit {
    int m_base = 0;
    int m_scaled = 0;
    int n_audited = 0;
    double max_rel_change = 0.0;
    bool passed = true;
};

struct BenchmarkRow {
    double phi_ext = 0.0;
    int branch = 0;          // ascending within the effective window
    double effective = 0.0;  // GHz
    double exact = 0.0;      // GHz
    double abs_dev = 0.0;    // GHz
    double rel_dev = 0.0;
    bool flagged = false;    // dominant-label overlap below 0.5 on either side
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    double max_abs_dev = 0.0;
    double max_rel_dev = 0.0;
    int flagged_rows = 0;
    TruncationAudit audit;
};

// the `count` lowest multi-mode Fock states by energy, vacuum first,
// lexicographic on ties; deterministic
std::vector<std::vector<int>> lowest_fock_states(const Eigen::VectorXd& mode_freqs_ghz,
                                                 int count);

// normal modes and couplings for the configured gauge
QuantizedCircuit gauge_circuit(const ExactDiagConfig& cfg);

// qubit-major layout: state (a, f) sits at a * photon_states + f; the qubit
// block carries the inductive energy renormalized by the chosen gauge
Eigen::MatrixXd build_full_hamiltonian(const ExactDiagConfig& cfg);

ExactSpectrum exact_spectrum(const ExactDiagConfig& cfg, int n_excitations = 50);

// re-solves with m_scaled photon states and compares the lowest excitations
TruncationAudit truncation_audit(const ExactDiagConfig& cfg, int m_scaled,
                                 int n_excitations = 20);

// pairs every effective-model branch with the exact eigenstate carrying the
// same dominant product label (nearest energy on collisions or misses); the
// effective side always runs in the mixed gauge with split cfg.i0; window
// {0,0} requests the automatic hybridization window per flux point
BenchmarkReport benchmark_effective(const ExactDiagConfig& cfg, int s_max,
                                    const std::vector<double>& phi_grid,
                                    std::pair<double, double> window = {0.0, 0.0},
                                    bool parallel = true);

}  // namespace fluxline
