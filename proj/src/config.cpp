#include "fluxline/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>

#include "json.hpp"

#include "fluxline/constants.hpp"
#include "fluxline/errors.hpp"
#include "fluxline/io.hpp"

namespace fluxline {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path, msg);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    return j;
}

// strict schema: anything not in the allow list is a typo
void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) fail(join(path, item.key()), "unknown field");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const char* key, bool required,
                  double fallback) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) fail(join(path, key), "missing required field");
        return fallback;
    }
    if (!j->is_number()) fail(join(path, key), "expected a number");
    const double v = j->get<double>();
    if (!std::isfinite(v)) fail(join(path, key), "must be finite");
    return v;
}

double get_positive(const json& obj, const std::string& path, const char* key, bool required,
                    double fallback) {
    const double v = get_number(obj, path, key, required, fallback);
    if (v <= 0.0) fail(join(path, key), "must be positive");
    return v;
}

int get_int(const json& obj, const std::string& path, const char* key, bool required,
            int fallback, int lo, int hi) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) fail(join(path, key), "missing required field");
        return fallback;
    }
    if (!j->is_number_integer()) fail(join(path, key), "expected an integer");
    const long long v = j->get<long long>();
    if (v < lo || v > hi)
        fail(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    const json* j = find(obj, key);
    if (!j) return fallback;
    if (!j->is_boolean()) fail(join(path, key), "expected a boolean");
    return j->get<bool>();
}

// either an explicit array of values or a {lo, hi, n} linspace
std::vector<double> parse_grid(const json& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        if (j.empty()) fail(path, "must not be empty");
        for (const auto& v : j) {
            if (!v.is_number()) fail(path, "expected numbers");
            const double x = v.get<double>();
            if (!std::isfinite(x)) fail(path, "must be finite");
            out.push_back(x);
        }
        return out;
    }
    if (j.is_object()) {
        check_keys(j, path, {"lo", "hi", "n"});
        const double lo = get_number(j, path, "lo", true, 0.0);
        const double hi = get_number(j, path, "hi", true, 0.0);
        const int n = get_int(j, path, "n", true, 0, 1, 100000);
        if (hi < lo) fail(join(path, "hi"), "must not be below lo");
        out.reserve(n);
        for (int i = 0; i < n; ++i) {
            out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0));
        }
        return out;
    }
    fail(path, "expected an array of numbers or {lo, hi, n}");
}

LineKind parse_kind(const json& obj, const std::string& path) {
    const json* j = find(obj, "kind");
    if (!j) fail(join(path, "kind"), "missing required field");
    if (!j->is_string()) fail(join(path, "kind"), "expected a string");
    const std::string s = j->get<std::string>();
    if (s == "open") return LineKind::open_nondispersive;
    if (s == "dispersive") return LineKind::dispersive_terminated;
    if (s == "josephson") return LineKind::josephson_chain;
    fail(join(path, "kind"), "expected one of open, dispersive, josephson");
}

LineSpec parse_line(const json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path, {"kind", "z0", "length", "v", "n_modes", "omega_p_ghz", "tau_table"});
    LineSpec line;
    line.kind = parse_kind(j, path);
    line.z0 = get_positive(j, path, "z0", true, 0.0);
    line.length = get_positive(j, path, "length", true, 0.0);
    line.v = get_positive(j, path, "v", true, 0.0);
    line.n_modes = get_int(j, path, "n_modes", true, 0, 1, 5000);
    const bool dispersive = line.kind != LineKind::open_nondispersive;
    if (dispersive) {
        line.omega_p = 2.0 * std::numbers::pi * ghz *
                       get_positive(j, path, "omega_p_ghz", true, 0.0);
    } else if (find(j, "omega_p_ghz")) {
        fail(join(path, "omega_p_ghz"), "only meaningful for dispersive lines");
    }
    if (const json* tt = find(j, "tau_table")) {
        if (!dispersive) fail(join(path, "tau_table"), "only meaningful for dispersive lines");
        if (!tt->is_array()) fail(join(path, "tau_table"), "expected an array of [freq_ghz, phase] pairs");
        for (const auto& pair : *tt) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                fail(join(path, "tau_table"), "expected an array of [freq_ghz, phase] pairs");
            line.tau_table.emplace_back(2.0 * std::numbers::pi * ghz * pair[0].get<double>(),
                                        pair[1].get<double>());
        }
    }
    return line;
}

FluxoniumParams parse_fluxonium(const json& j, const std::string& path, int basis_default) {
    require_object(j, path);
    check_keys(j, path, {"ej_ghz", "ec_ghz", "el_ghz", "basis_size"});
    FluxoniumParams p;
    p.ej = get_positive(j, path, "ej_ghz", true, 0.0);
    p.ec = get_positive(j, path, "ec_ghz", true, 0.0);
    p.el = get_positive(j, path, "el_ghz", true, 0.0);
    p.basis_dim = get_int(j, path, "basis_size", false, basis_default, 10, 4000);
    p.phi_ext = 0.0;
    return p;
}

GaugeSpec parse_gauge(const json& j, const std::string& path, int n_modes) {
    require_object(j, path);
    check_keys(j, path, {"mode", "i0"});
    const json* m = find(j, "mode");
    if (!m) fail(join(path, "mode"), "missing required field");
    if (!m->is_string()) fail(join(path, "mode"), "expected a string");
    const std::string s = m->get<std::string>();
    GaugeSpec g;
    if (s == "charge") g.mode = GaugeMode::charge;
    else if (s == "flux") g.mode = GaugeMode::flux;
    else if (s == "mixed") g.mode = GaugeMode::mixed;
    else fail(join(path, "mode"), "expected one of charge, flux, mixed");
    if (find(j, "i0")) {
        if (g.mode != GaugeMode::mixed) fail(join(path, "i0"), "only meaningful for the mixed gauge");
        g.i0 = get_int(j, path, "i0", false, 0, 1, n_modes > 1 ? n_modes - 1 : 1);
    }
    return g;
}

std::vector<double> parse_quality_member(const json& obj, const std::string& path, const char* key,
                                         double& scalar, int n_modes) {
    const json* j = find(obj, key);
    if (!j) return {};
    if (j->is_number()) {
        scalar = j->get<double>();
        if (!(scalar >= 0.0) || !std::isfinite(scalar)) fail(join(path, key), "must be >= 0");
        return {};
    }
    if (j->is_array()) {
        if (static_cast<int>(j->size()) != n_modes)
            fail(join(path, key), "per-mode table must have n_modes entries");
        std::vector<double> out;
        for (const auto& v : *j) {
            if (!v.is_number()) fail(join(path, key), "expected numbers");
            const double q = v.get<double>();
            if (!(q >= 0.0) || !std::isfinite(q)) fail(join(path, key), "must be >= 0");
            out.push_back(q);
        }
        return out;
    }
    fail(join(path, key), "expected a number or a per-mode array");
}

QualitySpec parse_quality(const json* j, const std::string& path, int n_modes) {
    QualitySpec q;
    if (!j) return q;
    require_object(*j, path);
    check_keys(*j, path, {"q_int", "q_ext"});
    q.q_int_modes = parse_quality_member(*j, path, "q_int", q.q_int, n_modes);
    q.q_ext_modes = parse_quality_member(*j, path, "q_ext", q.q_ext, n_modes);
    return q;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path, {"phi_grid", "freq_grid", "s_max"});
    SweepSpec s;
    const json* pg = find(j, "phi_grid");
    if (!pg) fail(join(path, "phi_grid"), "missing required field");
    s.phi_grid = parse_grid(*pg, join(path, "phi_grid"));
    const json* fg = find(j, "freq_grid");
    if (!fg) fail(join(path, "freq_grid"), "missing required field");
    s.freq_grid = parse_grid(*fg, join(path, "freq_grid"));
    for (double f : s.freq_grid)
        if (f <= 0.0) fail(join(path, "freq_grid"), "frequencies must be positive");
    s.s_max = get_int(j, path, "s_max", true, 2, 1, 3);
    return s;
}

NumericsSpec parse_numerics(const json* j, const std::string& path) {
    NumericsSpec n;
    if (!j) return n;
    require_object(*j, path);
    check_keys(*j, path, {"fluxonium_basis", "fluxonium_levels", "photon_states", "max_dimension",
                          "window", "paper_sqrt_i"});
    n.fluxonium_basis = get_int(*j, path, "fluxonium_basis", false, n.fluxonium_basis, 10, 4000);
    n.fluxonium_levels = get_int(*j, path, "fluxonium_levels", false, n.fluxonium_levels, 2, 40);
    n.photon_states = get_int(*j, path, "photon_states", false, n.photon_states, 1, 100000);
    n.max_dimension = get_int(*j, path, "max_dimension", false, n.max_dimension, 4, 2000000);
    if (const json* w = find(*j, "window")) {
        if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number() || !(*w)[1].is_number())
            fail(join(path, "window"), "expected [lo_ghz, hi_ghz]");
        n.window_lo = (*w)[0].get<double>();
        n.window_hi = (*w)[1].get<double>();
        if (!std::isfinite(n.window_lo) || !std::isfinite(n.window_hi))
            fail(join(path, "window"), "must be finite");
    }
    n.paper_sqrt_i = get_bool(*j, path, "paper_sqrt_i", n.paper_sqrt_i);
    return n;
}

const char* kind_name(LineKind k) {
    switch (k) {
        case LineKind::open_nondispersive: return "open";
        case LineKind::dispersive_terminated: return "dispersive";
        default: return "josephson";
    }
}

const char* gauge_name(GaugeMode m) {
    switch (m) {
        case GaugeMode::charge: return "charge";
        case GaugeMode::flux: return "flux";
        default: return "mixed";
    }
}

json line_json(const LineSpec& line) {
    json j;
    j["kind"] = kind_name(line.kind);
    j["z0"] = line.z0;
    j["length"] = line.length;
    j["v"] = line.v;
    j["n_modes"] = line.n_modes;
    if (line.omega_p > 0.0) j["omega_p_ghz"] = line.omega_p / (2.0 * std::numbers::pi * ghz);
    if (!line.tau_table.empty()) {
        json tt = json::array();
        for (const auto& [w, phase] : line.tau_table)
            tt.push_back({w / (2.0 * std::numbers::pi * ghz), phase});
        j["tau_table"] = std::move(tt);
    }
    return j;
}

json quantize_deps_json(const DeviceConfig& cfg) {
    json j;
    j["line"] = line_json(cfg.line);
    j["x"] = cfg.x;
    j["gauge"] = {{"mode", gauge_name(cfg.gauge.mode)}, {"i0", cfg.gauge.i0}};
    j["ec_ghz"] = cfg.fluxonium.ec;
    j["el_ghz"] = cfg.fluxonium.el;
    return j;
}

}  // namespace

DeviceConfig parse_device_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("config", std::string("not valid JSON: ") + e.what());
    }
    require_object(doc, "config");
    check_keys(doc, "", {"line", "fluxonium", "x", "gauge", "quality", "sweep", "numerics"});

    DeviceConfig cfg;
    const json* line = find(doc, "line");
    if (!line) fail("line", "missing required field");
    cfg.line = parse_line(*line, "line");

    cfg.numerics = parse_numerics(find(doc, "numerics"), "numerics");

    const json* flx = find(doc, "fluxonium");
    if (!flx) fail("fluxonium", "missing required field");
    cfg.fluxonium = parse_fluxonium(*flx, "fluxonium", cfg.numerics.fluxonium_basis);

    cfg.x = get_number(doc, "", "x", true, 0.0);
    if (cfg.x <= 0.0 || cfg.x > 1.0) fail("x", "must lie in (0, 1]");

    const json* gauge = find(doc, "gauge");
    if (!gauge) fail("gauge", "missing required field");
    cfg.gauge = parse_gauge(*gauge, "gauge", cfg.line.n_modes);

    cfg.quality = parse_quality(find(doc, "quality"), "quality", cfg.line.n_modes);

    const json* sweep = find(doc, "sweep");
    if (!sweep) fail("sweep", "missing required field");
    cfg.sweep = parse_sweep(*sweep, "sweep");

    cfg.hash = fnv1a_hex(canonical_config_json(cfg));
    return cfg;
}

DeviceConfig load_device_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception&) {
        fail("config", "cannot read " + path);
    }
    return parse_device_config(text);
}

std::string canonical_config_json(const DeviceConfig& cfg) {
    json doc;
    doc["line"] = line_json(cfg.line);
    doc["fluxonium"] = {{"ej_ghz", cfg.fluxonium.ej},
                        {"ec_ghz", cfg.fluxonium.ec},
                        {"el_ghz", cfg.fluxonium.el},
                        {"basis_size", cfg.fluxonium.basis_dim}};
    doc["x"] = cfg.x;
    doc["gauge"] = {{"mode", gauge_name(cfg.gauge.mode)}, {"i0", cfg.gauge.i0}};
    json quality = {{"q_int", cfg.quality.q_int}, {"q_ext", cfg.quality.q_ext}};
    if (!cfg.quality.q_int_modes.empty()) quality["q_int_modes"] = cfg.quality.q_int_modes;
    if (!cfg.quality.q_ext_modes.empty()) quality["q_ext_modes"] = cfg.quality.q_ext_modes;
    doc["quality"] = std::move(quality);
    doc["sweep"] = {{"phi_grid", cfg.sweep.phi_grid},
                    {"freq_grid", cfg.sweep.freq_grid},
                    {"s_max", cfg.sweep.s_max}};
    doc["numerics"] = {{"fluxonium_basis", cfg.numerics.fluxonium_basis},
                       {"fluxonium_levels", cfg.numerics.fluxonium_levels},
                       {"photon_states", cfg.numerics.photon_states},
                       {"max_dimension", cfg.numerics.max_dimension},
                       {"window", {cfg.numerics.window_lo, cfg.numerics.window_hi}},
                       {"paper_sqrt_i", cfg.numerics.paper_sqrt_i}};
    return doc.dump();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string foster_stage_key(const DeviceConfig& cfg) {
    json j;
    j["line"] = line_json(cfg.line);
    return fnv1a_hex(j.dump());
}

std::string quantize_stage_key(const DeviceConfig& cfg) {
    return fnv1a_hex(quantize_deps_json(cfg).dump());
}

std::string polariton_stage_key(const DeviceConfig& cfg, double phi_ext) {
    json j = quantize_deps_json(cfg);
    j["ej_ghz"] = cfg.fluxonium.ej;
    j["basis_size"] = cfg.fluxonium.basis_dim;
    j["phi_ext"] = phi_ext;
    return fnv1a_hex(j.dump());
}

}  // namespace fluxline
