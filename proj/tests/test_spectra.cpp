#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <vector>

#include "json.hpp"

#include "fluxline/constants.hpp"
#include "fluxline/effective.hpp"
#include "fluxline/errors.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/io.hpp"
#include "fluxline/quantize.hpp"
#include "fluxline/spectra.hpp"

using namespace fluxline;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

LineSpec table_line(int n) {
    LineSpec s;
    s.kind = LineKind::open_nondispersive;
    s.z0 = 9695.0;
    s.length = 6e-3;
    s.v = 2.18e6;
    s.n_modes = n;
    return s;
}

QuantizedCircuit table_circuit(int n, int i0, double x) {
    GaugeConfig g;
    g.i0 = i0;
    g.x = x;
    g.loop_l = loop_l_from_el(1.42);
    g.cj = cj_from_ec(5.69);
    return bogoliubov_diagonalize(build_matrices(foster_open_line(table_line(n)), g));
}

FluxoniumParams table_qubit(double phi) {
    FluxoniumParams p;
    p.ej = 8.12;
    p.ec = 5.69;
    p.el = 1.42;
    p.phi_ext = phi;
    return p;
}

Eigen::VectorXd band_grid(double lo, double hi, int n) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = lo + (hi - lo) * i / (n - 1.0);
    return g;
}

// strict local minima of |s11| below a visibility threshold
std::vector<int> dip_indices(const Eigen::VectorXd& a, double thresh) {
    std::vector<int> out;
    for (int i = 1; i + 1 < a.size(); ++i) {
        if (a(i) < thresh && a(i) <= a(i - 1) && a(i) < a(i + 1)) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_CASE("single mode reflection hits the textbook points") {
    FosterNetwork net = foster_open_line(table_line(1));
    const double f1 = net.omega[0] / (2.0 * kPi * ghz);
    Eigen::VectorXd grid = band_grid(0.9 * f1, 1.1 * f1, 201);
    grid(100) = f1;  // place the exact resonance on the grid

    QualityModel critical = uniform_quality(1, 2000.0, 2000.0);
    ReflectionTrace tc = s11_bare(net, critical, grid);
    CHECK(std::abs(tc.s11(100)) == 0.0);

    QualityModel lossless = uniform_quality(1, kInf, 2000.0);
    ReflectionTrace tl = s11_bare(net, lossless, grid);
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(tl.s11(i)) == doctest::Approx(1.0).epsilon(1e-12));
    }

    QualityModel probe = uniform_quality(1);
    ReflectionTrace tp = s11_bare(net, probe, grid);
    CHECK(std::abs(tp.s11(100)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    REQUIRE(tp.table.size() == 1);
    CHECK(tp.table[0].omega == doctest::Approx(f1));
    CHECK(tp.table[0].q_ext == 2000.0);
    CHECK(tp.table[0].q_int == 10000.0);

    CHECK_THROWS_AS(s11_bare(net, uniform_quality(3), grid), ParameterError);
    CHECK_THROWS_AS(s11_bare(net, probe, Eigen::VectorXd()), ParameterError);
    CHECK_THROWS_AS(uniform_quality(1, -5.0, 2000.0), ParameterError);
}

TEST_CASE("long line stays passive and resolves one mode per band") {
    FosterNetwork net = foster_open_line(table_line(250));
    const double f49 = net.omega[48] / (2.0 * kPi * ghz);
    Eigen::VectorXd grid = band_grid(f49 - 0.053, f49 + 0.053, 401);

    QualityModel qm = uniform_quality(250);
    ReflectionTrace t = s11_bare(net, qm, grid);
    REQUIRE(t.table.size() == 1);
    CHECK(t.table[0].omega == doctest::Approx(f49));
    int imin = 0;
    const double depth = t.s11.cwiseAbs().minCoeff(&imin);
    CHECK(depth == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
    CHECK(std::abs(grid(imin) - f49) < 5e-4);
    for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(t.s11(i)) <= 1.0 + 1e-12);

    QualityModel lossless = uniform_quality(250, kInf, 2000.0);
    ReflectionTrace tl = s11_bare(net, lossless, grid);
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(tl.s11(i)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("dressed quality factors weigh the polariton content") {
    // two bare modes, split at one: polariton 0 purely photonic, 1 purely qubit
    PolaritonBasis pb;
    pb.i0 = 1;
    pb.low_freqs = Eigen::VectorXd::Constant(1, 1.0);
    pb.omega = Eigen::Vector2d(5.0, 8.0);
    pb.w = Eigen::Matrix2d::Zero();
    pb.w(0, 1) = 1.0;
    pb.w(1, 0) = 1.0;
    pb.f_eg = 8.0;

    std::vector<BasisState> basis = {{0, {0}, 1, 5.0}, {1, {0}, 1, 8.0}, {0, {1}, 2, 6.0}};
    QualityModel qm;
    qm.q_ext = Eigen::Vector2d(2000.0, 3000.0);
    qm.q_int = Eigen::Vector2d(10000.0, 5000.0);

    Eigen::MatrixXd vecs = Eigen::MatrixXd::Identity(3, 3);
    auto [ext_inv, int_inv] = dressed_quality_factors(basis, pb, vecs, qm);
    CHECK(ext_inv(0) == doctest::Approx(1.0 / 3000.0).epsilon(1e-14));
    CHECK(int_inv(0) == doctest::Approx(1.0 / 5000.0).epsilon(1e-14));
    // the qubit-like polariton and the two-particle state carry no photon loss
    CHECK(ext_inv(1) == 0.0);
    CHECK(int_inv(1) == 0.0);
    CHECK(ext_inv(2) == 0.0);
    CHECK(int_inv(2) == 0.0);

    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(3, 3);
    mixed(0, 0) = std::sqrt(0.25);
    mixed(1, 0) = std::sqrt(0.5);
    mixed(2, 0) = std::sqrt(0.25);
    auto [me, mi] = dressed_quality_factors(basis, pb, mixed, qm);
    CHECK(me(0) == doctest::Approx(0.25 / 3000.0).epsilon(1e-14));
    CHECK(mi(0) == doctest::Approx(0.25 / 5000.0).epsilon(1e-14));

    QualityModel bad = qm;
    bad.q_ext = Eigen::VectorXd::Constant(3, 2000.0);
    CHECK_THROWS_AS(dressed_quality_factors(basis, pb, vecs, bad), ParameterError);
    CHECK_THROWS_AS(dressed_quality_factors(basis, pb, Eigen::MatrixXd::Identity(2, 2), qm),
                    ParameterError);
}

TEST_CASE("weak coupling leaves the bare dip in place") {
    const int n = 250;
    FosterNetwork net = foster_open_line(table_line(n));
    const double f49 = net.omega[48] / (2.0 * kPi * ghz);
    Eigen::VectorXd grid = band_grid(f49 - 0.053, f49 + 0.053, 1061);
    QualityModel qm = uniform_quality(n);

    QuantizedCircuit qc = table_circuit(n, 15, 0.02);
    FluxoniumParams fp = table_qubit(kPi);
    fp.el = qc.el_tilde;
    const FluxoniumSpectrum flx = solve_fluxonium(fp);

    EffectiveConfig cfg;
    cfg.s_max = 1;
    cfg.window_lo = grid.minCoeff() - 0.08;
    cfg.window_hi = grid.maxCoeff() + 0.08;
    ReflectionTrace dressed = s11_dressed(build_effective(qc, flx, cfg), qm, grid);
    ReflectionTrace bare = s11_bare(net, qm, grid);

    int id = 0, ib = 0;
    const double dd = dressed.s11.cwiseAbs().minCoeff(&id);
    const double db = bare.s11.cwiseAbs().minCoeff(&ib);
    CHECK(std::abs(grid(id) - grid(ib)) < 2e-3);
    CHECK(dd == doctest::Approx(db).epsilon(5e-3));
    for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(dressed.s11(i)) <= 1.0 + 1e-12);
}

TEST_CASE("sweet spot makes one and two particle traces identical") {
    const int n = 250;
    QuantizedCircuit qc = table_circuit(n, 15, 0.5);
    FluxoniumParams fp = table_qubit(kPi);
    fp.el = qc.el_tilde;
    const FluxoniumSpectrum flx = solve_fluxonium(fp);
    const double f49 = 8.810833;
    Eigen::VectorXd grid = band_grid(f49 - 0.053, f49 + 0.053, 401);
    QualityModel qm = uniform_quality(n);

    EffectiveConfig c1;
    c1.s_max = 1;
    c1.window_lo = grid.minCoeff() - 0.08;
    c1.window_hi = grid.maxCoeff() + 0.08;
    EffectiveConfig c2 = c1;
    c2.s_max = 2;

    EffectiveModel m1 = build_effective(qc, flx, c1);
    EffectiveModel m2 = build_effective(qc, flx, c2);
    REQUIRE(m2.basis.size() > m1.basis.size());
    ReflectionTrace t1 = s11_dressed(m1, qm, grid);
    ReflectionTrace t2 = s11_dressed(m2, qm, grid);
    CHECK((t1.s11 - t2.s11).cwiseAbs().maxCoeff() < 1e-14);

    // a window holding no eigenstates reports a unity trace with a note
    EffectiveConfig far = c1;
    far.window_lo = 30.0;
    far.window_hi = 31.0;
    ReflectionTrace empty = s11_dressed(build_effective(qc, flx, far), qm, grid);
    CHECK(empty.note == "no eigenstates in band");
    for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(empty.s11(i)) == 1.0);
}

TEST_CASE("two particle resonances split the dip into fine structure") {
    const int n = 250;
    QuantizedCircuit qc = table_circuit(n, 15, 0.5);
    FluxoniumParams fp = table_qubit(1.9);
    fp.el = qc.el_tilde;
    const FluxoniumSpectrum flx = solve_fluxonium(fp);
    const double f49 = 8.810833;
    Eigen::VectorXd grid = band_grid(f49 - 0.053, f49 + 0.053, 1061);
    QualityModel qm = uniform_quality(n);

    EffectiveConfig c1;
    c1.s_max = 1;
    c1.window_lo = grid.minCoeff() - 0.08;
    c1.window_hi = grid.maxCoeff() + 0.08;
    EffectiveConfig c2 = c1;
    c2.s_max = 2;

    const Eigen::VectorXd a1 =
        s11_dressed(build_effective(qc, flx, c1), qm, grid).s11.cwiseAbs();
    const Eigen::VectorXd a2 =
        s11_dressed(build_effective(qc, flx, c2), qm, grid).s11.cwiseAbs();

    const std::vector<int> d1 = dip_indices(a1, 0.95);
    const std::vector<int> d2 = dip_indices(a2, 0.95);
    CHECK(static_cast<int>(d2.size()) - static_cast<int>(d1.size()) >= 3);

    // dips further detuned from the polariton are dimmer
    REQUIRE(d2.size() >= 3);
    CHECK(a2(d2[0]) > a2(d2[1]));
    CHECK(a2(d2[1]) > a2(d2[2]));
    CHECK(a2(d2[0]) < 0.95);
    CHECK(a2(d2[2]) > 0.6);
}

TEST_CASE("probe map matches single traces and annotates bad rows") {
    const int n = 60;
    QuantizedCircuit qc = table_circuit(n, 15, 0.5);
    FluxoniumParams base = table_qubit(0.0);
    QualityModel qm = uniform_quality(n);
    const double f30 = 29.5 * 2.18e6 / (2.0 * 6e-3) / 1e9;
    Eigen::VectorXd grid = band_grid(f30 - 0.05, f30 + 0.05, 101);

    const std::vector<double> phis{kPi, 2.2, std::nan("")};
    ProbeMap map = flux_probe_map(qc, base, qm, phis, grid, 2, {0.0, 0.0}, false);
    REQUIRE(map.abs_s11.rows() == 3);
    REQUIRE(map.row_notes.size() == 3);
    CHECK(map.row_notes[0].empty());
    CHECK(map.row_notes[1].empty());
    CHECK(!map.row_notes[2].empty());
    CHECK(std::isnan(map.abs_s11(2, 0)));
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < grid.size(); ++c) {
            CHECK(map.abs_s11(r, c) >= 0.0);
            CHECK(map.abs_s11(r, c) <= 1.0 + 1e-12);
        }
    }

    // rows reproduce the standalone dressed trace with the derived window
    const double pad = std::max(0.25 * (grid.maxCoeff() - grid.minCoeff()), 0.05);
    EffectiveConfig cfg;
    cfg.s_max = 2;
    cfg.window_lo = grid.minCoeff() - pad;
    cfg.window_hi = grid.maxCoeff() + pad;
    FluxoniumParams fp = base;
    fp.phi_ext = kPi;
    ReflectionTrace t = s11_dressed(build_effective(qc, solve_fluxonium(fp), cfg), qm, grid);
    CHECK((map.abs_s11.row(0).transpose() - t.s11.cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);

    // a basis window away from the band leaves unity rows with notes
    ProbeMap off = flux_probe_map(qc, base, qm, {kPi}, grid, 2, {30.0, 31.0}, false);
    CHECK(off.row_notes[0] == "no eigenstates in band");
    CHECK(off.abs_s11(0, 0) == 1.0);

    CHECK_THROWS_AS(flux_probe_map(qc, base, qm, {}, grid, 2, {0.0, 0.0}, false),
                    ParameterError);
}

TEST_CASE("map files carry the grid and the magnitudes") {
    ProbeMap map;
    map.phi_grid = Eigen::Vector2d(3.0, 3.1);
    map.freq_grid = Eigen::Vector3d(8.7, 8.8, 8.9);
    map.abs_s11.resize(2, 3);
    map.abs_s11 << 1.0, 0.5, 0.25, 0.9, 0.8, 0.7;
    map.row_notes = {"", "late"};

    namespace fs = std::filesystem;
    const std::string dir = fs::temp_directory_path() / "fluxline_spectra_test";
    fs::create_directories(dir);

    const std::string csv_path = dir + "/map.csv";
    write_probe_map_csv(map, csv_path, "cafe1234");
    const std::string csv = read_text_file(csv_path);
    CHECK(csv.find("# config_hash=cafe1234\n") == 0);
    CHECK(csv.find("phi_ext,freq_ghz,abs_s11\n") != std::string::npos);
    CHECK(csv.find("3.1,8.8,0.8\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 6);

    const std::string json_path = dir + "/map.json";
    write_probe_map_json(map, json_path, "cafe1234");
    const nlohmann::json doc = nlohmann::json::parse(read_text_file(json_path));
    CHECK(doc["config_hash"] == "cafe1234");
    REQUIRE(doc["phi_grid"].size() == 2);
    REQUIRE(doc["freq_grid_ghz"].size() == 3);
    REQUIRE(doc["abs_s11"].size() == 2);
    CHECK(doc["abs_s11"][1][2] == doctest::Approx(0.7));
    CHECK(doc["row_notes"][1] == "late");
}
