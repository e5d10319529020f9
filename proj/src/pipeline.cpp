#include "fluxline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

#include "fluxline/cache.hpp"
#include "fluxline/config.hpp"
#include "fluxline/constants.hpp"
#include "fluxline/effective.hpp"
#include "fluxline/errors.hpp"
#include "fluxline/exactdiag.hpp"
#include "fluxline/fluxonium.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/io.hpp"
#include "fluxline/quantize.hpp"
#include "fluxline/spectra.hpp"

namespace fluxline {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// ---- Eigen <-> json round trips (value-exact: shortest-round-trip doubles)

json vec_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Eigen::MatrixXd mat_from(const json& j) {
    if (!j.is_array()) throw std::runtime_error("matrix entry is not an array");
    if (j.empty()) return Eigen::MatrixXd(0, 0);
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw std::runtime_error("ragged matrix entry");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json line_to_json(const LineSpec& line) {
    json tt = json::array();
    for (const auto& [w, phase] : line.tau_table) tt.push_back({w, phase});
    return {{"kind", static_cast<int>(line.kind)}, {"z0", line.z0},
            {"length", line.length},              {"v", line.v},
            {"delta", line.delta},                {"omega_p", line.omega_p},
            {"n_modes", line.n_modes},            {"tau_table", std::move(tt)}};
}

LineSpec line_from_json(const json& j) {
    LineSpec line;
    const int kind = j.at("kind").get<int>();
    if (kind < 0 || kind > 2) throw std::runtime_error("bad line kind");
    line.kind = static_cast<LineKind>(kind);
    line.z0 = j.at("z0").get<double>();
    line.length = j.at("length").get<double>();
    line.v = j.at("v").get<double>();
    line.delta = j.at("delta").get<double>();
    line.omega_p = j.at("omega_p").get<double>();
    line.n_modes = j.at("n_modes").get<int>();
    for (const auto& pair : j.at("tau_table"))
        line.tau_table.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return line;
}

json net_to_json(const FosterNetwork& net) {
    return {{"z0", net.z0},       {"delta", net.delta},
            {"omega", net.omega}, {"ind", net.ind},
            {"cap", net.cap},     {"notes", net.notes},
            {"tail_available", net.tail_available},
            {"line", line_to_json(net.line)}};
}

FosterNetwork net_from_json(const json& j) {
    FosterNetwork net;
    net.z0 = j.at("z0").get<double>();
    net.delta = j.at("delta").get<double>();
    net.omega = j.at("omega").get<std::vector<double>>();
    net.ind = j.at("ind").get<std::vector<double>>();
    net.cap = j.at("cap").get<std::vector<double>>();
    net.notes = j.at("notes").get<std::vector<std::string>>();
    net.tail_available = j.at("tail_available").get<bool>();
    net.line = line_from_json(j.at("line"));
    if (net.ind.size() != net.omega.size() || net.cap.size() != net.omega.size())
        throw std::runtime_error("inconsistent network arrays");
    return net;
}

json qc_to_json(const QuantizedCircuit& qc) {
    return {{"mode_freqs", vec_json(qc.mode_freqs)},
            {"bog_u", mat_json(qc.bog_u)},
            {"bog_v", mat_json(qc.bog_v)},
            {"g_flux", vec_json(qc.g_flux)},
            {"g_charge", vec_json(qc.g_charge)},
            {"el_tilde", qc.el_tilde},
            {"x_tilde", qc.x_tilde},
            {"gauge",
             {{"i0", qc.gauge.i0}, {"x", qc.gauge.x}, {"loop_l", qc.gauge.loop_l}, {"cj", qc.gauge.cj}}},
            {"z0", qc.z0},
            {"delta", qc.delta}};
}

QuantizedCircuit qc_from_json(const json& j) {
    QuantizedCircuit qc;
    qc.mode_freqs = vec_from(j.at("mode_freqs"));
    qc.bog_u = mat_from(j.at("bog_u"));
    qc.bog_v = mat_from(j.at("bog_v"));
    qc.g_flux = vec_from(j.at("g_flux"));
    qc.g_charge = vec_from(j.at("g_charge"));
    qc.el_tilde = j.at("el_tilde").get<double>();
    qc.x_tilde = j.at("x_tilde").get<double>();
    const json& g = j.at("gauge");
    qc.gauge.i0 = g.at("i0").get<int>();
    qc.gauge.x = g.at("x").get<double>();
    qc.gauge.loop_l = g.at("loop_l").get<double>();
    qc.gauge.cj = g.at("cj").get<double>();
    qc.z0 = j.at("z0").get<double>();
    qc.delta = j.at("delta").get<double>();
    const Eigen::Index n = qc.mode_freqs.size();
    if (qc.bog_u.rows() != n || qc.bog_u.cols() != n || qc.bog_v.rows() != n ||
        qc.bog_v.cols() != n || qc.g_flux.size() != n || qc.g_charge.size() != n)
        throw std::runtime_error("inconsistent circuit arrays");
    return qc;
}

json pb_to_json(const PolaritonBasis& pb) {
    return {{"low_freqs", vec_json(pb.low_freqs)},
            {"omega", vec_json(pb.omega)},
            {"w", mat_json(pb.w)},
            {"i0", pb.i0},
            {"f_eg", pb.f_eg}};
}

PolaritonBasis pb_from_json(const json& j) {
    PolaritonBasis pb;
    pb.low_freqs = vec_from(j.at("low_freqs"));
    pb.omega = vec_from(j.at("omega"));
    pb.w = mat_from(j.at("w"));
    pb.i0 = j.at("i0").get<int>();
    pb.f_eg = j.at("f_eg").get<double>();
    if (pb.w.rows() != pb.omega.size() || pb.w.cols() != pb.omega.size() ||
        pb.low_freqs.size() != pb.i0)
        throw std::runtime_error("inconsistent polariton arrays");
    return pb;
}

// ---- run context

struct Ctx {
    DeviceConfig cfg;
    StageCache cache;
    std::string out;
    bool verify = false;
    bool parallel = true;
    int split = 0;  // resolved gauge split
    std::vector<std::string> artifacts;
    std::vector<std::string> notes;
    std::vector<std::string> verify_failures;
    json extra = json::object();
    std::optional<FosterNetwork> net_;
    std::optional<QuantizedCircuit> qc_;
};

std::string out_path(const Ctx& ctx, const std::string& name) { return ctx.out + "/" + name; }

void add_artifact(Ctx& ctx, const std::string& name) { ctx.artifacts.push_back(name); }

FosterNetwork build_network(const LineSpec& line) {
    switch (line.kind) {
        case LineKind::open_nondispersive: return foster_open_line(line);
        case LineKind::dispersive_terminated: return foster_dispersive(line);
        default: return foster_josephson(line);
    }
}

int resolve_split(const DeviceConfig& cfg) {
    const int n = cfg.line.n_modes;
    if (cfg.gauge.mode == GaugeMode::charge) return 0;
    if (cfg.gauge.mode == GaugeMode::flux) return n;
    if (cfg.gauge.i0 > 0) return cfg.gauge.i0;
    // derive the split from the sweet-spot transition: modes up to roughly
    // f_eg / 2 stay flux coupled, the rest hybridize through the charge
    FluxoniumParams p = cfg.fluxonium;
    p.phi_ext = kPi;
    const double f_eg = solve_fluxonium(p, 2).excitation(1);
    const double delta_ghz = cfg.line.fsr() / 1e9;
    const long derived = std::lround(f_eg / (2.0 * delta_ghz));
    return static_cast<int>(std::clamp(derived, 1l, static_cast<long>(std::max(1, n - 1))));
}

GaugeConfig make_gauge(const DeviceConfig& cfg, int split) {
    GaugeConfig g;
    g.i0 = split;
    g.x = cfg.x;
    g.loop_l = loop_l_from_el(cfg.fluxonium.el);
    g.cj = cj_from_ec(cfg.fluxonium.ec);
    return g;
}

const FosterNetwork& network(Ctx& ctx) {
    if (ctx.net_) return *ctx.net_;
    const std::string key = foster_stage_key(ctx.cfg);
    if (auto doc = ctx.cache.load("foster", key)) {
        try {
            ctx.net_ = net_from_json(*doc);
            ++ctx.cache.hits;
            return *ctx.net_;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "cache: rebuilding foster stage (%s)\n", e.what());
        }
    }
    if (ctx.cache.enabled()) ++ctx.cache.misses;
    ctx.net_ = build_network(ctx.cfg.line);
    ctx.cache.store("foster", key, net_to_json(*ctx.net_));
    return *ctx.net_;
}

const QuantizedCircuit& circuit(Ctx& ctx) {
    if (ctx.qc_) return *ctx.qc_;
    const std::string key = quantize_stage_key(ctx.cfg);
    if (auto doc = ctx.cache.load("quantize", key)) {
        try {
            ctx.qc_ = qc_from_json(*doc);
            ++ctx.cache.hits;
            return *ctx.qc_;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "cache: rebuilding quantize stage (%s)\n", e.what());
        }
    }
    if (ctx.cache.enabled()) ++ctx.cache.misses;
    ctx.qc_ = bogoliubov_diagonalize(build_matrices(network(ctx), make_gauge(ctx.cfg, ctx.split)));
    ctx.cache.store("quantize", key, qc_to_json(*ctx.qc_));
    return *ctx.qc_;
}

PolaritonBasis polaritons_at(Ctx& ctx, const FluxoniumSpectrum& flx, double phi) {
    const std::string key = polariton_stage_key(ctx.cfg, phi);
    if (auto doc = ctx.cache.load("polaritons", key)) {
        try {
            PolaritonBasis pb = pb_from_json(*doc);
            ++ctx.cache.hits;
            return pb;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "cache: rebuilding polariton stage (%s)\n", e.what());
        }
    }
    if (ctx.cache.enabled()) ++ctx.cache.misses;
    PolaritonBasis pb = build_polaritons(circuit(ctx), flx);
    ctx.cache.store("polaritons", key, pb_to_json(pb));
    return pb;
}

FluxoniumParams effective_params(const Ctx& ctx) {
    FluxoniumParams p = ctx.cfg.fluxonium;
    p.el = ctx.qc_ ? ctx.qc_->el_tilde : p.el;
    return p;
}

QualityModel quality_model(const DeviceConfig& cfg) {
    const double inf = std::numeric_limits<double>::infinity();
    auto lift = [inf](double q) { return q > 0.0 ? q : inf; };
    QualityModel qm = uniform_quality(cfg.line.n_modes, lift(cfg.quality.q_int),
                                      lift(cfg.quality.q_ext));
    for (int i = 0; i < cfg.line.n_modes; ++i) {
        if (!cfg.quality.q_int_modes.empty()) qm.q_int(i) = lift(cfg.quality.q_int_modes[i]);
        if (!cfg.quality.q_ext_modes.empty()) qm.q_ext(i) = lift(cfg.quality.q_ext_modes[i]);
    }
    return qm;
}

EffectiveConfig effective_config(const DeviceConfig& cfg) {
    EffectiveConfig e;
    e.s_max = cfg.sweep.s_max;
    e.window_lo = cfg.numerics.window_lo;
    e.window_hi = cfg.numerics.window_hi;
    e.sqrt_profile = cfg.numerics.paper_sqrt_i;
    return e;
}

// ---- post-run invariant checks (--verify)

void verify_stages(Ctx& ctx) {
    if (!ctx.verify) return;
    if (ctx.net_) {
        try {
            check_invariants(*ctx.net_);
        } catch (const std::exception& e) {
            ctx.verify_failures.push_back(std::string("foster: ") + e.what());
        }
    }
    if (ctx.qc_) {
        const QuantizedCircuit& qc = *ctx.qc_;
        const CircuitMatrices mats = build_matrices(*ctx.net_, qc.gauge);
        const double cap_identity =
            mats.cap.inverse()(0, 0) * qc.gauge.cj;
        if (std::abs(cap_identity - 1.0) > 1e-8)
            ctx.verify_failures.push_back("quantize: junction capacitance identity violated");
        for (int k = 0; k < qc.mode_freqs.size(); ++k) {
            const double norm = qc.bog_u.col(k).squaredNorm() - qc.bog_v.col(k).squaredNorm();
            if (std::abs(norm - 1.0) > 1e-6) {
                ctx.verify_failures.push_back("quantize: symplectic norm violated on mode " +
                                              std::to_string(k + 1));
                break;
            }
        }
        if (!(qc.el_tilde > 0.0))
            ctx.verify_failures.push_back("quantize: renormalized inductive energy not positive");
    }
}

// ---- subcommand handlers

void cmd_foster(Ctx& ctx) {
    const FosterNetwork& net = network(ctx);
    CsvWriter csv(out_path(ctx, "foster.csv"), {"index", "omega_over_2pi_GHz", "L_henry", "C_farad"},
                  ctx.cfg.hash);
    for (int i = 0; i < net.size(); ++i) {
        csv.num_row({static_cast<double>(i + 1), net.omega[i] / (2.0 * kPi * ghz), net.ind[i],
                     net.cap[i]});
    }
    add_artifact(ctx, "foster.csv");
    for (const std::string& n : net.notes) ctx.notes.push_back("foster: " + n);
    ctx.extra["n_modes"] = net.size();
    ctx.extra["delta_mhz"] = round_sig(net.delta / 1e6);
}

void cmd_modes(Ctx& ctx) {
    const QuantizedCircuit& qc = circuit(ctx);
    CsvWriter csv(out_path(ctx, "modes.csv"), {"index", "freq_GHz", "g_flux_GHz", "g_charge_GHz"},
                  ctx.cfg.hash);
    for (int k = 0; k < qc.mode_freqs.size(); ++k) {
        csv.num_row({static_cast<double>(k + 1), qc.mode_freqs(k), qc.g_flux(k), qc.g_charge(k)});
    }
    add_artifact(ctx, "modes.csv");
    ctx.extra["x_tilde"] = round_sig(qc.x_tilde);
}

void cmd_fluxonium(Ctx& ctx) {
    circuit(ctx);
    const int keep = ctx.cfg.numerics.fluxonium_levels;
    const std::vector<FluxoniumSpectrum> sweep =
        sweep_flux(effective_params(ctx), ctx.cfg.sweep.phi_grid, keep, ctx.parallel);
    CsvWriter csv(out_path(ctx, "fluxonium.csv"), {"phi_ext", "level", "excitation_GHz"},
                  ctx.cfg.hash);
    for (size_t p = 0; p < sweep.size(); ++p) {
        for (int lev = 0; lev < sweep[p].excitation.size(); ++lev) {
            csv.num_row({ctx.cfg.sweep.phi_grid[p], static_cast<double>(lev),
                         sweep[p].excitation(lev)});
        }
    }
    add_artifact(ctx, "fluxonium.csv");
}

void cmd_polaritons(Ctx& ctx) {
    const QuantizedCircuit& qc = circuit(ctx);
    CsvWriter csv(out_path(ctx, "polaritons.csv"),
                  {"phi_ext", "index", "freq_GHz", "qubit_amplitude"}, ctx.cfg.hash);
    CsvWriter summary(out_path(ctx, "polariton_summary.csv"),
                      {"phi_ext", "f_eg_GHz", "gamma_hat_GHz", "g_over_h_GHz"}, ctx.cfg.hash);
    const FluxoniumParams base = effective_params(ctx);
    for (double phi : ctx.cfg.sweep.phi_grid) {
        FluxoniumParams p = base;
        p.phi_ext = phi;
        const FluxoniumSpectrum flx = solve_fluxonium(p);
        const PolaritonBasis pb = polaritons_at(ctx, flx, phi);
        for (int k = 0; k < pb.omega.size(); ++k) {
            csv.num_row({phi, static_cast<double>(k), pb.omega(k), pb.w(k, 0)});
        }
        summary.num_row({phi, pb.f_eg, estimate_gamma(pb), three_wave_strength(qc, flx)});
    }
    add_artifact(ctx, "polaritons.csv");
    add_artifact(ctx, "polariton_summary.csv");
}

void cmd_spectrum(Ctx& ctx) {
    const QuantizedCircuit& qc = circuit(ctx);
    const EffectiveConfig ecfg = effective_config(ctx.cfg);
    const std::vector<FineStructurePoint> points =
        fine_structure_sweep(qc, effective_params(ctx), ctx.cfg.sweep.phi_grid, ecfg, ctx.parallel);
    CsvWriter csv(out_path(ctx, "spectrum.csv"),
                  {"phi_ext", "branch", "energy_GHz", "polariton_weight"}, ctx.cfg.hash);
    for (const FineStructurePoint& pt : points) {
        if (!pt.ok) {
            ctx.notes.push_back("spectrum: phi=" + fmt12(pt.phi_ext) + ": " + pt.note);
            continue;
        }
        for (int b = 0; b < pt.energies.size(); ++b) {
            csv.num_row({pt.phi_ext, static_cast<double>(b), pt.energies(b),
                         pt.polariton_weight(b)});
        }
    }
    add_artifact(ctx, "spectrum.csv");
    if (ctx.verify) {
        FluxoniumParams p = effective_params(ctx);
        p.phi_ext = ctx.cfg.sweep.phi_grid.front();
        const EffectiveModel model = build_effective(qc, solve_fluxonium(p), ecfg);
        if ((model.h_eff - model.h_eff.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            ctx.verify_failures.push_back("effective: interaction matrix not symmetric");
        if ((model.a - model.a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            ctx.verify_failures.push_back("effective: conversion amplitudes not symmetric");
    }
}

void cmd_s11(Ctx& ctx) {
    const QuantizedCircuit& qc = circuit(ctx);
    const QualityModel qm = quality_model(ctx.cfg);
    const Eigen::VectorXd freq = Eigen::Map<const Eigen::VectorXd>(
        ctx.cfg.sweep.freq_grid.data(), static_cast<Eigen::Index>(ctx.cfg.sweep.freq_grid.size()));
    const ProbeMap map = flux_probe_map(qc, effective_params(ctx), qm, ctx.cfg.sweep.phi_grid,
                                        freq, ctx.cfg.sweep.s_max,
                                        {ctx.cfg.numerics.window_lo, ctx.cfg.numerics.window_hi},
                                        ctx.parallel);
    write_probe_map_csv(map, out_path(ctx, "s11_map.csv"), ctx.cfg.hash);
    write_probe_map_json(map, out_path(ctx, "s11_map.json"), ctx.cfg.hash);
    add_artifact(ctx, "s11_map.csv");
    add_artifact(ctx, "s11_map.json");
    for (size_t r = 0; r < map.row_notes.size(); ++r) {
        if (!map.row_notes[r].empty())
            ctx.notes.push_back("s11: phi=" + fmt12(ctx.cfg.sweep.phi_grid[r]) + ": " +
                                map.row_notes[r]);
    }
    if (ctx.verify) {
        for (int r = 0; r < map.abs_s11.rows(); ++r) {
            for (int c = 0; c < map.abs_s11.cols(); ++c) {
                const double v = map.abs_s11(r, c);
                if (std::isfinite(v) && v > 1.0 + 1e-9) {
                    ctx.verify_failures.push_back("spectra: reflection magnitude above unity");
                    r = map.abs_s11.rows();
                    break;
                }
            }
        }
    }
}

void cmd_benchmark(Ctx& ctx) {
    const FosterNetwork& net = network(ctx);
    ExactDiagConfig xc;
    xc.network = net;
    xc.fluxonium = ctx.cfg.fluxonium;  // bare inductive energy; gauges renormalize internally
    xc.x = ctx.cfg.x;
    xc.i0 = (ctx.split >= 1 && ctx.split < ctx.cfg.line.n_modes) ? ctx.split : 1;
    xc.n_fluxonium_levels = ctx.cfg.numerics.fluxonium_levels;
    xc.photon_states = ctx.cfg.numerics.photon_states;
    xc.max_dimension = ctx.cfg.numerics.max_dimension;

    const int dim = xc.n_fluxonium_levels * xc.photon_states;
    const int levels = std::min(30, dim - 1);
    json agreement_rows = json::array();
    double worst_spread = 0.0;
    for (double phi : ctx.cfg.sweep.phi_grid) {
        ExactDiagConfig point = xc;
        point.fluxonium.phi_ext = phi;
        point.gauge = ExactGauge::charge;
        const ExactSpectrum sc = exact_spectrum(point, levels);
        point.gauge = ExactGauge::flux;
        const ExactSpectrum sf = exact_spectrum(point, levels);
        point.gauge = ExactGauge::mixed;
        const ExactSpectrum sm = exact_spectrum(point, levels);
        for (int lev = 0; lev < levels; ++lev) {
            const double c = sc.excitations(lev);
            const double f = sf.excitations(lev);
            const double m = sm.excitations(lev);
            const double mean = (c + f + m) / 3.0;
            const double spread =
                (std::max({c, f, m}) - std::min({c, f, m})) / std::max(std::abs(mean), 1e-12);
            worst_spread = std::max(worst_spread, spread);
            agreement_rows.push_back({{"phi_ext", round_sig(phi)},
                                      {"level", lev + 1},
                                      {"charge_ghz", round_sig(c)},
                                      {"flux_ghz", round_sig(f)},
                                      {"mixed_ghz", round_sig(m)},
                                      {"rel_spread", round_sig(spread)}});
        }
    }

    xc.gauge = ExactGauge::charge;
    const BenchmarkReport report = benchmark_effective(
        xc, ctx.cfg.sweep.s_max, ctx.cfg.sweep.phi_grid,
        {ctx.cfg.numerics.window_lo, ctx.cfg.numerics.window_hi}, ctx.parallel);

    json rows = json::array();
    for (const BenchmarkRow& r : report.rows) {
        rows.push_back({{"phi_ext", round_sig(r.phi_ext)},
                        {"branch", r.branch},
                        {"effective_ghz", round_sig(r.effective)},
                        {"exact_ghz", round_sig(r.exact)},
                        {"abs_dev_ghz", round_sig(r.abs_dev)},
                        {"rel_dev", round_sig(r.rel_dev)},
                        {"flagged", r.flagged}});
    }
    json doc;
    doc["config_hash"] = ctx.cfg.hash;
    doc["s_max"] = ctx.cfg.sweep.s_max;
    doc["split_i0"] = xc.i0;
    doc["dimension"] = dim;
    doc["gauge_agreement"] = {{"levels", levels},
                              {"rows", std::move(agreement_rows)},
                              {"worst_rel_spread", round_sig(worst_spread)}};
    doc["effective_vs_exact"] = {{"rows", std::move(rows)},
                                 {"max_abs_dev_ghz", round_sig(report.max_abs_dev)},
                                 {"max_rel_dev", round_sig(report.max_rel_dev)},
                                 {"flagged_rows", report.flagged_rows}};
    doc["truncation_audit"] = {{"m_base", report.audit.m_base},
                               {"m_scaled", report.audit.m_scaled},
                               {"n_audited", report.audit.n_audited},
                               {"max_rel_change", round_sig(report.audit.max_rel_change)},
                               {"passed", report.audit.passed}};
    write_text_file(out_path(ctx, "benchmark.json"), doc.dump(1) + "\n");
    add_artifact(ctx, "benchmark.json");
    if (ctx.verify && !report.audit.passed)
        ctx.verify_failures.push_back("exactdiag: truncation audit failed");
}

void cmd_sweep(Ctx& ctx) {
    cmd_spectrum(ctx);
    cmd_s11(ctx);
}

// ---- manifest and dispatch

void write_manifest(Ctx& ctx, const std::string& subcommand, double wall_s) {
    json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = ctx.cfg.hash;
    m["versions"] = {{"fluxline", fluxline_version},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    m["wall_time_s"] = round_sig(wall_s);
    m["artifacts"] = ctx.artifacts;
    const char* gauge_name = ctx.cfg.gauge.mode == GaugeMode::charge  ? "charge"
                             : ctx.cfg.gauge.mode == GaugeMode::flux ? "flux"
                                                                     : "mixed";
    m["gauge"] = {{"mode", gauge_name}, {"split_i0", ctx.split}};
#ifdef _OPENMP
    m["threads"] = omp_get_max_threads();
#else
    m["threads"] = 1;
#endif
    m["cache"] = {{"enabled", ctx.cache.enabled()},
                  {"hits", ctx.cache.hits},
                  {"misses", ctx.cache.misses}};
    m["el_ghz"] = round_sig(ctx.cfg.fluxonium.el);
    if (ctx.qc_) m["el_tilde_ghz"] = round_sig(ctx.qc_->el_tilde);
    if (!ctx.notes.empty()) m["notes"] = ctx.notes;
    if (ctx.verify)
        m["verification"] = {{"passed", ctx.verify_failures.empty()},
                             {"failures", ctx.verify_failures}};
    for (const auto& item : ctx.extra.items()) m[item.key()] = item.value();
    write_text_file(out_path(ctx, "manifest.json"), m.dump(1) + "\n");
}

std::string resolve_config_path(const std::string& given) {
    namespace fs = std::filesystem;
    if (fs::exists(given) && !fs::is_directory(given)) return given;
    const std::string with_ext = given + ".json";
    if (fs::exists(with_ext)) return with_ext;
    throw ConfigError("config", "file not found: " + given);
}

void apply_overrides(DeviceConfig& cfg, const RunOptions& opts) {
    if (opts.s_max != 0) {
        if (opts.s_max < 1 || opts.s_max > 3) throw ConfigError("--smax", "must lie in [1, 3]");
        cfg.sweep.s_max = opts.s_max;
    }
    if (opts.threads < 0) throw ConfigError("--threads", "must be >= 0");
    if (opts.gauge.empty()) return;
    if (opts.gauge == "charge") {
        cfg.gauge = {GaugeMode::charge, 0};
    } else if (opts.gauge == "flux") {
        cfg.gauge = {GaugeMode::flux, 0};
    } else if (opts.gauge == "mixed") {
        cfg.gauge = {GaugeMode::mixed, 0};
    } else if (opts.gauge.rfind("mixed:", 0) == 0) {
        int i0 = 0;
        try {
            size_t used = 0;
            i0 = std::stoi(opts.gauge.substr(6), &used);
            if (used != opts.gauge.size() - 6) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ConfigError("--gauge", "expected charge, flux or mixed:<i0>");
        }
        if (i0 < 1 || i0 > std::max(1, cfg.line.n_modes - 1))
            throw ConfigError("--gauge", "split must lie in [1, n_modes - 1]");
        cfg.gauge = {GaugeMode::mixed, i0};
    } else {
        throw ConfigError("--gauge", "expected charge, flux or mixed:<i0>");
    }
}

void configure_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

}  // namespace

int run_subcommand(const std::string& name, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (opts.config_path.empty()) throw ConfigError("config", "no configuration file given");
        Ctx ctx;
        ctx.cfg = load_device_config(resolve_config_path(opts.config_path));
        apply_overrides(ctx.cfg, opts);
        ctx.cfg.hash = fnv1a_hex(canonical_config_json(ctx.cfg));
        configure_threads(opts.threads);
        ctx.parallel = opts.threads != 1;
        ctx.cache = open_cache(opts.no_cache);
        ctx.verify = opts.verify;
        ctx.split = resolve_split(ctx.cfg);
        ctx.out = opts.out_dir.empty() ? "out" : opts.out_dir;
        std::filesystem::create_directories(ctx.out);

        if (name == "foster") cmd_foster(ctx);
        else if (name == "fluxonium") cmd_fluxonium(ctx);
        else if (name == "modes") cmd_modes(ctx);
        else if (name == "polaritons") cmd_polaritons(ctx);
        else if (name == "spectrum") cmd_spectrum(ctx);
        else if (name == "s11") cmd_s11(ctx);
        else if (name == "benchmark") cmd_benchmark(ctx);
        else if (name == "sweep") cmd_sweep(ctx);
        else throw ConfigError("subcommand", "unknown subcommand " + name);

        verify_stages(ctx);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(ctx, name, wall);
        if (!ctx.verify_failures.empty()) {
            for (const std::string& f : ctx.verify_failures)
                std::fprintf(stderr, "verification: %s\n", f.c_str());
            return 4;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace fluxline
