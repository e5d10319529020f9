#pragma once
#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "fluxline/effective.hpp"
#include "fluxline/fluxonium.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/quantize.hpp"

namespace fluxline {

// per-bare-mode quality factors; infinity disables that loss channel
struct QualityModel {
    Eigen::VectorXd q_int;
    Eigen::VectorXd q_ext;
};

QualityModel uniform_quality(int n_modes, double q_int = 10000.0, double q_ext = 2000.0);

struct EigenstateRow {
    double omega = 0.0;  // GHz
    double q_ext = 0.0;  // dressed; infinity marks a dark channel
    double q_int = 0.0;
};

struct ReflectionTrace {
    Eigen::VectorXd freq_grid;         // GHz
    Eigen::VectorXcd s11;
    std::vector<EigenstateRow> table;  // eigenstates inside the probed band
    std::string note;                  // set when the band holds no eigenstate
};

// one-port reflection of the bare line; full product over every retained mode
ReflectionTrace s11_bare(const FosterNetwork& net, const QualityModel& qm,
                         const Eigen::VectorXd& freq_grid);

// inverse dressed quality factors (external, internal) per eigenvector column:
// single-polariton weights times the photonic loss of each polariton
std::pair<Eigen::VectorXd, Eigen::VectorXd> dressed_quality_factors(
    const std::vector<BasisState>& basis, const PolaritonBasis& pb,
    const Eigen::MatrixXd& eigvecs, const QualityModel& qm);

// product over the effective-model eigenstates inside the probed band, times a
// scalar background from the out-of-band ones evaluated at band center
ReflectionTrace s11_dressed(const EffectiveModel& model, const QualityModel& qm,
                            const Eigen::VectorXd& freq_grid);

struct ProbeMap {
    Eigen::VectorXd phi_grid;
    Eigen::VectorXd freq_grid;           // GHz
    Eigen::MatrixXd abs_s11;             // row per flux point, NaN on failed rows
    std::vector<std::string> row_notes;  // empty entries mean success
};

// |S11| versus flux and probe frequency; window {0,0} derives the basis window
// from the frequency band plus a margin, rows run concurrently
ProbeMap flux_probe_map(const QuantizedCircuit& qc, const FluxoniumParams& base,
                        const QualityModel& qm, const std::vector<double>& phi_grid,
                        const Eigen::VectorXd& freq_grid, int s_max,
                        std::pair<double, double> window = {0.0, 0.0},
                        bool parallel = true);

// long-form rows phi_ext, freq_ghz, abs_s11
void write_probe_map_csv(const ProbeMap& map, const std::string& path,
                         const std::string& config_hash = "");
void write_probe_map_json(const ProbeMap& map, const std::string& path,
                          const std::string& config_hash = "");

}  // namespace fluxline
