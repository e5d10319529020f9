#include "fluxline/exactdiag.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <queue>
#include <string>
#include <utility>

#include "fluxline/constants.hpp"
#include "fluxline/effective.hpp"
#include "fluxline/errors.hpp"

namespace fluxline {

namespace {

int resolve_i0(const ExactDiagConfig& cfg) {
    switch (cfg.gauge) {
        case ExactGauge::charge: return 0;
        case ExactGauge::flux: return cfg.network.size();
        case ExactGauge::mixed: return cfg.i0;
    }
    return 0;
}

struct Assembly {
    QuantizedCircuit qc;
    FluxoniumSpectrum flx;
    std::vector<std::vector<int>> fock;
    Eigen::MatrixXd h;
};

Assembly assemble(const ExactDiagConfig& cfg) {
    if (cfg.n_fluxonium_levels < 2) {
        throw ParameterError("exactdiag: need at least two fluxonium levels, got " +
                             std::to_string(cfg.n_fluxonium_levels));
    }
    if (cfg.photon_states < 1) {
        throw ParameterError("exactdiag: need at least one photon state, got " +
                             std::to_string(cfg.photon_states));
    }
    const long dim = static_cast<long>(cfg.n_fluxonium_levels) * cfg.photon_states;
    if (dim >= cfg.max_dimension) {
        throw ParameterError("exactdiag: Hilbert dimension " + std::to_string(dim) +
                             " exceeds the bound " + std::to_string(cfg.max_dimension));
    }

    Assembly as;
    as.qc = gauge_circuit(cfg);
    FluxoniumParams fp = cfg.fluxonium;
    fp.el = as.qc.el_tilde;
    as.flx = solve_fluxonium(fp, cfg.n_fluxonium_levels);
    as.fock = lowest_fock_states(as.qc.mode_freqs, cfg.photon_states);

    const int nl = cfg.n_fluxonium_levels;
    const int m = cfg.photon_states;
    const int n = static_cast<int>(as.qc.mode_freqs.size());

    std::map<std::vector<int>, int> index;
    for (int fi = 0; fi < m; ++fi) index[as.fock[fi]] = fi;

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int fi = 0; fi < m; ++fi) {
        double e_ph = 0.0;
        for (int nu = 0; nu < n; ++nu) e_ph += as.fock[fi][nu] * as.qc.mode_freqs(nu);
        for (int a = 0; a < nl; ++a) h(a * m + fi, a * m + fi) = as.flx.excitation(a) + e_ph;
    }

    // interaction: phi couples through b + b^dag, the charge operator i n
    // through b - b^dag; both land on real symmetric entries
    for (int fi = 0; fi < m; ++fi) {
        for (int nu = 0; nu < n; ++nu) {
            std::vector<int> up = as.fock[fi];
            ++up[nu];
            const auto it = index.find(up);
            if (it == index.end()) continue;
            const int fj = it->second;
            const double amp = std::sqrt(static_cast<double>(up[nu]));
            const double gf = as.qc.g_flux(nu);
            const double gc = as.qc.g_charge(nu);
            for (int a = 0; a < nl; ++a) {
                for (int b = 0; b < nl; ++b) {
                    const double val =
                        amp * (gf * as.flx.phi_mat(a, b) - gc * as.flx.n_mat_imag(a, b));
                    h(a * m + fi, b * m + fj) += val;
                    h(b * m + fj, a * m + fi) += val;
                }
            }
        }
    }
    as.h = std::move(h);
    return as;
}

ExactSpectrum spectrum_of(const ExactDiagConfig& cfg, int n_excitations) {
    if (n_excitations < 1) {
        throw ParameterError("exactdiag: need at least one excitation, got " +
                             std::to_string(n_excitations));
    }
    Assembly as = assemble(cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as.h);
    if (es.info() != Eigen::Success) throw NumericError("exactdiag: eigensolver failed");

    const int dim = static_cast<int>(as.h.rows());
    const int m = cfg.photon_states;
    const int keep = std::min(n_excitations, dim - 1);

    ExactSpectrum out;
    out.dimension = dim;
    out.ground = es.eigenvalues()(0);
    out.excitations = es.eigenvalues().segment(1, keep).array() - out.ground;
    out.labels.reserve(keep);
    for (int k = 1; k <= keep; ++k) {
        int idx = 0;
        es.eigenvectors().col(k).cwiseAbs().maxCoeff(&idx);
        StateLabel lab;
        lab.qubit_level = idx / m;
        lab.occupation = as.fock[idx % m];
        lab.overlap = es.eigenvectors()(idx, k) * es.eigenvectors()(idx, k);
        out.labels.push_back(std::move(lab));
    }
    return out;
}

}  // namespace

std::vector<std::vector<int>> lowest_fock_states(const Eigen::VectorXd& mode_freqs_ghz,
                                                 int count) {
    const int n = static_cast<int>(mode_freqs_ghz.size());
    if (n < 1) throw ParameterError("exactdiag: need at least one mode");
    if (count < 1) {
        throw ParameterError("exactdiag: need at least one Fock state, got " +
                             std::to_string(count));
    }
    for (int i = 0; i < n; ++i) {
        if (!(mode_freqs_ghz(i) > 0.0)) {
            throw ParameterError("exactdiag: mode frequencies must be positive, mode " +
                                 std::to_string(i + 1) + " is " +
                                 std::to_string(mode_freqs_ghz(i)));
        }
    }

    using Entry = std::pair<double, std::vector<int>>;
    const auto later = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);
    heap.push({0.0, std::vector<int>(n, 0)});

    std::vector<std::vector<int>> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        Entry top = heap.top();
        heap.pop();
        // raising only modes at or above the highest occupied one generates
        // every occupation exactly once, so no visited set is needed
        int lo = 0;
        for (int j = n; j-- > 0;) {
            if (top.second[j] > 0) {
                lo = j;
                break;
            }
        }
        for (int j = lo; j < n; ++j) {
            std::vector<int> up = top.second;
            ++up[j];
            heap.push({top.first + mode_freqs_ghz(j), std::move(up)});
        }
        out.push_back(std::move(top.second));
    }
    return out;
}

QuantizedCircuit gauge_circuit(const ExactDiagConfig& cfg) {
    if (!(cfg.fluxonium.el > 0.0) || !(cfg.fluxonium.ec > 0.0)) {
        throw ParameterError("exactdiag: fluxonium energies must be positive");
    }
    GaugeConfig g;
    g.i0 = resolve_i0(cfg);
    g.x = cfg.x;
    g.loop_l = loop_l_from_el(cfg.fluxonium.el);
    g.cj = cj_from_ec(cfg.fluxonium.ec);
    return bogoliubov_diagonalize(build_matrices(cfg.network, g));
}

Eigen::MatrixXd build_full_hamiltonian(const ExactDiagConfig& cfg) {
    return assemble(cfg).h;
}

ExactSpectrum exact_spectrum(const ExactDiagConfig& cfg, int n_excitations) {
    return spectrum_of(cfg, n_excitations);
}

TruncationAudit truncation_audit(const ExactDiagConfig& cfg, int m_scaled, int n_excitations) {
    if (m_scaled <= cfg.photon_states) {
        throw ParameterError("exactdiag: audit needs more photon states than the base " +
                             std::to_string(cfg.photon_states));
    }
    ExactDiagConfig big = cfg;
    big.photon_states = m_scaled;

    const ExactSpectrum base = spectrum_of(cfg, n_excitations);
    const ExactSpectrum ref = spectrum_of(big, n_excitations);
    const int n = static_cast<int>(std::min(base.excitations.size(), ref.excitations.size()));

    TruncationAudit out;
    out.m_base = cfg.photon_states;
    out.m_scaled = m_scaled;
    out.n_audited = n;
    for (int k = 0; k < n; ++k) {
        const double denom = std::max(std::abs(ref.excitations(k)), 1e-12);
        out.max_rel_change =
            std::max(out.max_rel_change, std::abs(base.excitations(k) - ref.excitations(k)) / denom);
    }
    out.passed = out.max_rel_change < 5e-3;
    return out;
}

BenchmarkReport benchmark_effective(const ExactDiagConfig& cfg, int s_max,
                                    const std::vector<double>& phi_grid,
                                    std::pair<double, double> window, bool parallel) {
    if (phi_grid.empty()) throw ParameterError("exactdiag: flux grid is empty");

    ExactDiagConfig mixed_cfg = cfg;
    mixed_cfg.gauge = ExactGauge::mixed;
    const QuantizedCircuit qc_eff = gauge_circuit(mixed_cfg);
    const int n = static_cast<int>(qc_eff.mode_freqs.size());
    const int i0 = mixed_cfg.i0;

    EffectiveConfig ecfg;
    ecfg.s_max = s_max;
    ecfg.window_lo = window.first;
    ecfg.window_hi = window.second;

    const int points = static_cast<int>(phi_grid.size());
    std::vector<std::vector<BenchmarkRow>> per_point(points);
    std::vector<std::exception_ptr> failed(points);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int p = 0; p < points; ++p) {
        try {
            ExactDiagConfig point = cfg;
            point.fluxonium.phi_ext = phi_grid[p];
            const ExactSpectrum ex = spectrum_of(point, point.max_dimension);

            FluxoniumParams fp = cfg.fluxonium;
            fp.phi_ext = phi_grid[p];
            fp.el = qc_eff.el_tilde;
            const FluxoniumSpectrum flx = solve_fluxonium(fp, cfg.n_fluxonium_levels);
            const EffectiveModel model = build_effective(qc_eff, flx, ecfg);
            if (model.basis.empty()) continue;

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.h_eff);
            if (es.info() != Eigen::Success) {
                throw NumericError("exactdiag: effective-branch eigensolver failed");
            }

            const int dim_eff = static_cast<int>(model.h_eff.rows());
            for (int col = 0; col < dim_eff; ++col) {
                int s = 0;
                es.eigenvectors().col(col).cwiseAbs().maxCoeff(&s);
                const BasisState& bs = model.basis[s];

                int jmax = 0;
                model.polaritons.w.row(bs.polariton).cwiseAbs().maxCoeff(&jmax);

                StateLabel want;
                want.occupation.assign(n, 0);
                for (int i = 0; i < i0; ++i) want.occupation[i] = bs.occ[i];
                if (jmax == 0) {
                    want.qubit_level = 1;
                } else {
                    want.qubit_level = 0;
                    ++want.occupation[i0 + jmax - 1];
                }
                const double c = es.eigenvectors()(s, col);
                const double wq = model.polaritons.w(bs.polariton, jmax);
                const double overlap_eff = c * c * wq * wq;

                // exact partner: same label, nearest energy; plain nearest otherwise
                const double e_eff = es.eigenvalues()(col);
                int pick = -1;
                bool matched = false;
                double best = 0.0;
                for (int k = 0; k < static_cast<int>(ex.labels.size()); ++k) {
                    const bool same = ex.labels[k].qubit_level == want.qubit_level &&
                                      ex.labels[k].occupation == want.occupation;
                    if (matched && !same) continue;
                    const double gap = std::abs(ex.excitations(k) - e_eff);
                    if (pick < 0 || (same && !matched) || gap < best) {
                        pick = k;
                        best = gap;
                        matched = same;
                    }
                }
                if (pick < 0) continue;

                BenchmarkRow row;
                row.phi_ext = phi_grid[p];
                row.branch = col;
                row.effective = e_eff;
                row.exact = ex.excitations(pick);
                row.abs_dev = std::abs(row.effective - row.exact);
                row.rel_dev = row.abs_dev / std::max(std::abs(row.exact), 1e-12);
                row.flagged =
                    !matched || overlap_eff < 0.5 || ex.labels[pick].overlap < 0.5;
                per_point[p].push_back(row);
            }
        } catch (...) {
            failed[p] = std::current_exception();
        }
    }

    for (int p = 0; p < points; ++p) {
        if (!failed[p]) continue;
        try {
            std::rethrow_exception(failed[p]);
        } catch (const ParameterError& e) {
            throw ParameterError("exactdiag: flux grid point " + std::to_string(p) + ": " +
                                 e.what());
        } catch (const std::exception& e) {
            throw NumericError("exactdiag: flux grid point " + std::to_string(p) + ": " +
                               e.what());
        }
    }

    BenchmarkReport report;
    for (int p = 0; p < points; ++p) {
        for (const BenchmarkRow& row : per_point[p]) {
            report.max_abs_dev = std::max(report.max_abs_dev, row.abs_dev);
            report.max_rel_dev = std::max(report.max_rel_dev, row.rel_dev);
            if (row.flagged) ++report.flagged_rows;
            report.rows.push_back(row);
        }
    }
    ExactDiagConfig audit_cfg = cfg;
    audit_cfg.fluxonium.phi_ext = phi_grid.front();
    report.audit = truncation_audit(audit_cfg, 2 * cfg.photon_states);
    return report;
}

}  // namespace fluxline
