#include "fluxline/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <string>

#include "json.hpp"

#include "fluxline/constants.hpp"
#include "fluxline/errors.hpp"
#include "fluxline/io.hpp"

namespace fluxline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// one factor of the reflection product; ext_inv/int_inv are 1/Q
std::complex<double> reflection_factor(double freq, double omega, double ext_inv,
                                       double int_inv) {
    if (ext_inv + int_inv == 0.0) return {1.0, 0.0};
    const std::complex<double> detuning(0.0, 2.0 * (freq - omega) / omega);
    return (detuning - ext_inv + int_inv) / (detuning + ext_inv + int_inv);
}

void require_quality(const QualityModel& qm, int n_modes, const char* who) {
    if (qm.q_int.size() != n_modes || qm.q_ext.size() != n_modes) {
        throw ParameterError(std::string(who) + ": quality model covers " +
                             std::to_string(qm.q_int.size()) + "/" +
                             std::to_string(qm.q_ext.size()) + " modes, need " +
                             std::to_string(n_modes));
    }
    for (int i = 0; i < n_modes; ++i) {
        if (!(qm.q_int(i) > 0.0) || !(qm.q_ext(i) > 0.0)) {
            throw ParameterError(std::string(who) +
                                 ": quality factors must be positive, mode " +
                                 std::to_string(i + 1));
        }
    }
}

void require_grid(const Eigen::VectorXd& freq_grid, const char* who) {
    if (freq_grid.size() < 1) {
        throw ParameterError(std::string(who) + ": frequency grid is empty");
    }
    for (int i = 0; i < freq_grid.size(); ++i) {
        if (!(freq_grid(i) > 0.0)) {
            throw ParameterError(std::string(who) + ": probe frequencies must be positive");
        }
    }
}

// shared by s11_dressed and the map rows: eigensystem, weights, band product
ReflectionTrace dressed_trace(const EffectiveModel& model, const QualityModel& qm,
                              const Eigen::VectorXd& freq_grid) {
    require_grid(freq_grid, "spectra");
    ReflectionTrace out;
    out.freq_grid = freq_grid;
    out.s11 = Eigen::VectorXcd::Ones(freq_grid.size());
    if (model.basis.empty()) {
        out.note = "no eigenstates in band";
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.h_eff);
    if (es.info() != Eigen::Success) throw NumericError("spectra: eigensolver failed");
    const auto [ext_inv, int_inv] =
        dressed_quality_factors(model.basis, model.polaritons, es.eigenvectors(), qm);

    const double lo = freq_grid.minCoeff();
    const double hi = freq_grid.maxCoeff();
    const double center = 0.5 * (lo + hi);
    const int dim = static_cast<int>(es.eigenvalues().size());

    std::complex<double> background(1.0, 0.0);
    std::vector<int> in_band;
    for (int k = 0; k < dim; ++k) {
        const double w = es.eigenvalues()(k);
        if (w >= lo && w <= hi) {
            in_band.push_back(k);
            out.table.push_back({w, ext_inv(k) > 0.0 ? 1.0 / ext_inv(k) : kInf,
                                 int_inv(k) > 0.0 ? 1.0 / int_inv(k) : kInf});
        } else {
            background *= reflection_factor(center, w, ext_inv(k), int_inv(k));
        }
    }
    if (in_band.empty()) {
        out.s11 = Eigen::VectorXcd::Ones(freq_grid.size());
        out.note = "no eigenstates in band";
        return out;
    }
    for (int p = 0; p < freq_grid.size(); ++p) {
        std::complex<double> s = background;
        for (int k : in_band) {
            s *= reflection_factor(freq_grid(p), es.eigenvalues()(k), ext_inv(k), int_inv(k));
        }
        out.s11(p) = s;
    }
    return out;
}

}  // namespace

QualityModel uniform_quality(int n_modes, double q_int, double q_ext) {
    if (n_modes < 1) throw ParameterError("spectra: need at least one mode");
    if (!(q_int > 0.0) || !(q_ext > 0.0)) {
        throw ParameterError("spectra: quality factors must be positive");
    }
    QualityModel qm;
    qm.q_int = Eigen::VectorXd::Constant(n_modes, q_int);
    qm.q_ext = Eigen::VectorXd::Constant(n_modes, q_ext);
    return qm;
}

ReflectionTrace s11_bare(const FosterNetwork& net, const QualityModel& qm,
                         const Eigen::VectorXd& freq_grid) {
    const int n = net.size();
    if (n < 1) throw ParameterError("spectra: network has no modes");
    require_quality(qm, n, "spectra");
    require_grid(freq_grid, "spectra");

    ReflectionTrace out;
    out.freq_grid = freq_grid;
    out.s11.resize(freq_grid.size());
    const double lo = freq_grid.minCoeff();
    const double hi = freq_grid.maxCoeff();
    for (int i = 0; i < n; ++i) {
        const double f = net.omega[i] / (2.0 * std::numbers::pi * ghz);
        if (f >= lo && f <= hi) out.table.push_back({f, qm.q_ext(i), qm.q_int(i)});
    }
    if (out.table.empty()) out.note = "no modes in band";

    for (int p = 0; p < freq_grid.size(); ++p) {
        std::complex<double> s(1.0, 0.0);
        for (int i = 0; i < n; ++i) {
            const double f = net.omega[i] / (2.0 * std::numbers::pi * ghz);
            s *= reflection_factor(freq_grid(p), f, 1.0 / qm.q_ext(i), 1.0 / qm.q_int(i));
        }
        out.s11(p) = s;
    }
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> dressed_quality_factors(
    const std::vector<BasisState>& basis, const PolaritonBasis& pb,
    const Eigen::MatrixXd& eigvecs, const QualityModel& qm) {
    const int n_pol = static_cast<int>(pb.omega.size());
    const int n_modes = pb.i0 + n_pol - 1;
    require_quality(qm, n_modes, "spectra");
    const int dim = static_cast<int>(basis.size());
    if (eigvecs.rows() != dim || eigvecs.cols() != dim) {
        throw ParameterError("spectra: eigenvector matrix does not match the basis");
    }

    // loss of each polariton comes from its photonic components only
    Eigen::VectorXd pol_ext = Eigen::VectorXd::Zero(n_pol);
    Eigen::VectorXd pol_int = Eigen::VectorXd::Zero(n_pol);
    for (int k = 0; k < n_pol; ++k) {
        for (int j = 1; j < n_pol; ++j) {
            const double w2 = pb.w(k, j) * pb.w(k, j);
            pol_ext(k) += w2 / qm.q_ext(pb.i0 + j - 1);
            pol_int(k) += w2 / qm.q_int(pb.i0 + j - 1);
        }
    }

    Eigen::VectorXd ext_inv = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd int_inv = Eigen::VectorXd::Zero(dim);
    for (int col = 0; col < dim; ++col) {
        for (int s = 0; s < dim; ++s) {
            if (basis[s].particles != 1) continue;
            const double c2 = eigvecs(s, col) * eigvecs(s, col);
            ext_inv(col) += c2 * pol_ext(basis[s].polariton);
            int_inv(col) += c2 * pol_int(basis[s].polariton);
        }
    }
    return {std::move(ext_inv), std::move(int_inv)};
}

ReflectionTrace s11_dressed(const EffectiveModel& model, const QualityModel& qm,
                            const Eigen::VectorXd& freq_grid) {
    return dressed_trace(model, qm, freq_grid);
}

ProbeMap flux_probe_map(const QuantizedCircuit& qc, const FluxoniumParams& base,
                        const QualityModel& qm, const std::vector<double>& phi_grid,
                        const Eigen::VectorXd& freq_grid, int s_max,
                        std::pair<double, double> window, bool parallel) {
    if (phi_grid.empty()) throw ParameterError("spectra: flux grid is empty");
    require_grid(freq_grid, "spectra");
    require_quality(qm, static_cast<int>(qc.mode_freqs.size()), "spectra");

    EffectiveConfig ecfg;
    ecfg.s_max = s_max;
    if (window.first < window.second) {
        ecfg.window_lo = window.first;
        ecfg.window_hi = window.second;
    } else {
        // pad the probed band so the basis covers the hybridizing states
        const double lo = freq_grid.minCoeff();
        const double hi = freq_grid.maxCoeff();
        const double pad = std::max(0.25 * (hi - lo), 0.05);
        ecfg.window_lo = lo - pad;
        ecfg.window_hi = hi + pad;
    }

    const int rows = static_cast<int>(phi_grid.size());
    ProbeMap map;
    map.phi_grid = Eigen::Map<const Eigen::VectorXd>(phi_grid.data(), rows);
    map.freq_grid = freq_grid;
    map.abs_s11 =
        Eigen::MatrixXd::Constant(rows, freq_grid.size(), std::numeric_limits<double>::quiet_NaN());
    map.row_notes.assign(rows, "");

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int r = 0; r < rows; ++r) {
        try {
            FluxoniumParams fp = base;
            fp.phi_ext = phi_grid[r];
            const FluxoniumSpectrum flx = solve_fluxonium(fp);
            const EffectiveModel model = build_effective(qc, flx, ecfg);
            const ReflectionTrace trace = dressed_trace(model, qm, freq_grid);
            map.abs_s11.row(r) = trace.s11.cwiseAbs().transpose();
            if (!trace.note.empty()) map.row_notes[r] = trace.note;
        } catch (const std::exception& e) {
            map.row_notes[r] = e.what();
        }
    }
    return map;
}

void write_probe_map_csv(const ProbeMap& map, const std::string& path,
                         const std::string& config_hash) {
    CsvWriter csv(path, {"phi_ext", "freq_ghz", "abs_s11"}, config_hash);
    for (int r = 0; r < map.abs_s11.rows(); ++r) {
        for (int c = 0; c < map.abs_s11.cols(); ++c) {
            csv.num_row({map.phi_grid(r), map.freq_grid(c), map.abs_s11(r, c)});
        }
    }
}

void write_probe_map_json(const ProbeMap& map, const std::string& path,
                          const std::string& config_hash) {
    // failed rows hold NaN, which JSON renders as null
    auto rounded = [](auto begin, auto end) {
        std::vector<double> out(begin, end);
        for (double& v : out) v = round_sig(v);
        return out;
    };
    nlohmann::json doc;
    if (!config_hash.empty()) doc["config_hash"] = config_hash;
    doc["phi_grid"] = rounded(map.phi_grid.begin(), map.phi_grid.end());
    doc["freq_grid_ghz"] = rounded(map.freq_grid.begin(), map.freq_grid.end());
    nlohmann::json grid = nlohmann::json::array();
    for (int r = 0; r < map.abs_s11.rows(); ++r) {
        grid.push_back(rounded(map.abs_s11.row(r).begin(), map.abs_s11.row(r).end()));
    }
    doc["abs_s11"] = std::move(grid);
    doc["row_notes"] = map.row_notes;
    write_text_file(path, doc.dump(1) + "\n");
}

}  // namespace fluxline
