#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "fluxline/constants.hpp"
#include "fluxline/errors.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/quantize.hpp"
#include "support/circuit_ref.hpp"

using namespace fluxline;

namespace {

constexpr double kPi = 3.14159265358979323846;

LineSpec table_line(int n) {
    LineSpec s;
    s.kind = LineKind::open_nondispersive;
    s.z0 = 9695.0;
    s.length = 6e-3;
    s.v = 2.18e6;
    s.n_modes = n;
    return s;
}

GaugeConfig table_gauge(int i0, double x) {
    GaugeConfig g;
    g.i0 = i0;
    g.x = x;
    g.loop_l = loop_l_from_el(1.42);
    g.cj = cj_from_ec(5.69);
    return g;
}

FosterNetwork random_net(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> logl(-10.0, -7.0), logc(-15.0, -12.0);
    FosterNetwork net;
    net.z0 = 100.0;
    net.delta = 1e9;
    for (int i = 0; i < n; ++i) {
        net.ind.push_back(std::pow(10.0, logl(rng)));
        net.cap.push_back(std::pow(10.0, logc(rng)));
        net.omega.push_back(1.0 / std::sqrt(net.ind.back() * net.cap.back()));
    }
    return net;
}

GaugeConfig random_gauge(std::mt19937& rng, int n, double x_max = 0.999) {
    std::uniform_real_distribution<double> xs(0.05, x_max), logl(-8.0, -6.0), logc(-15.0, -13.0);
    std::uniform_int_distribution<int> split(0, n);
    GaugeConfig g;
    g.i0 = split(rng);
    g.x = xs(rng);
    g.loop_l = std::pow(10.0, logl(rng));
    g.cj = std::pow(10.0, logc(rng));
    return g;
}

double rel_gap(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("hand-built two-mode chain matches entry by entry") {
    FosterNetwork net;
    net.z0 = 50.0;
    net.delta = 1e9;
    net.ind = {5e-8, 8e-8};
    net.cap = {3e-13, 7e-13};
    net.omega = {1.0 / std::sqrt(5e-8 * 3e-13), 1.0 / std::sqrt(8e-8 * 7e-13)};

    GaugeConfig g;
    g.i0 = 1;
    g.x = 0.6;
    g.loop_l = 2e-7;
    g.cj = 5e-14;

    const double lx = 0.6 * 2e-7, l1x = 0.4 * 2e-7;
    const double ls = 1.0 / (1.0 / lx + 1.0 / l1x + 1.0 / 5e-8);
    const double xt = ls / l1x;
    const double c2 = 7e-13, r1 = ls / 5e-8, r2 = ls / 8e-8;

    CircuitMatrices m = build_matrices(net, g);
    CHECK(m.x_tilde == doctest::Approx(xt).epsilon(1e-14));
    CHECK(m.l_sum == doctest::Approx(ls).epsilon(1e-14));

    CHECK(m.cap(0, 0) == doctest::Approx(5e-14 + xt * xt * c2).epsilon(1e-14));
    CHECK(m.cap(0, 1) == doctest::Approx(-xt * r1 * c2).epsilon(1e-14));
    CHECK(m.cap(0, 2) == doctest::Approx(-xt * c2 - xt * r2 * c2).epsilon(1e-14));
    CHECK(m.cap(1, 1) == doctest::Approx(3e-13 + r1 * r1 * c2).epsilon(1e-14));
    CHECK(m.cap(1, 2) == doctest::Approx(r1 * c2 + r1 * r2 * c2).epsilon(1e-14));
    CHECK(m.cap(2, 2) == doctest::Approx(c2 + 2.0 * r2 * c2 + r2 * r2 * c2).epsilon(1e-14));

    CHECK(m.ind_inv(0, 0) == doctest::Approx((1.0 - xt) / l1x).epsilon(1e-14));
    CHECK(m.ind_inv(0, 1) == doctest::Approx(xt / 5e-8).epsilon(1e-14));
    CHECK(m.ind_inv(0, 2) == 0.0);
    CHECK(m.ind_inv(1, 1) == doctest::Approx(1.0 / 5e-8).epsilon(1e-14));
    CHECK(m.ind_inv(1, 2) == 0.0);
    CHECK(m.ind_inv(2, 2) == doctest::Approx(1.0 / 8e-8 + ls / (8e-8 * 8e-8)).epsilon(1e-14));

    CHECK(m.cap == m.cap.transpose());
    CHECK(m.ind_inv == m.ind_inv.transpose());
}

TEST_CASE("matrices match the exact substitution up to the dropped loop term") {
    // relative to the exact shared-loop elimination the production matrices
    // flip the sign convention of the flux-coupled coordinates and drop the
    // loop correction on their inductance block
    std::mt19937 rng(777);
    std::uniform_int_distribution<int> sizes(1, 8);
    for (int trial = 0; trial < 20; ++trial) {
        int n = sizes(rng);
        FosterNetwork net = random_net(rng, n);
        GaugeConfig g = random_gauge(rng, n);
        CircuitMatrices m = build_matrices(net, g);

        auto [cap_sub, ind_sub] = testing::mixed_gauge_exact(net, g);
        Eigen::VectorXd signs = Eigen::VectorXd::Ones(n + 1);
        for (int i = 1; i <= g.i0; ++i) signs(i) = -1.0;
        Eigen::MatrixXd cap_want = signs.asDiagonal() * cap_sub * signs.asDiagonal();
        Eigen::MatrixXd ind_want = signs.asDiagonal() * ind_sub * signs.asDiagonal();
        for (int i = 1; i <= g.i0; ++i) {
            for (int j = 1; j <= g.i0; ++j) {
                ind_want(i, j) += m.l_sum / (net.ind[i - 1] * net.ind[j - 1]);
            }
        }
        CHECK(rel_gap(m.cap, cap_want) < 1e-12);
        CHECK(rel_gap(m.ind_inv, ind_want) < 1e-12);
    }
}

TEST_CASE("charge gauge reproduces the Kirchhoff node-flux spectrum") {
    std::mt19937 rng(778);
    std::uniform_int_distribution<int> sizes(1, 8);
    for (int trial = 0; trial < 20; ++trial) {
        int n = sizes(rng);
        FosterNetwork net = random_net(rng, n);
        GaugeConfig g = random_gauge(rng, n);
        g.i0 = 0;  // no flux-coupled block, so no dropped term
        CircuitMatrices m = build_matrices(net, g);

        auto [cap_ref, ind_ref] = testing::node_flux_reference(net, g);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ours(m.ind_inv, m.cap);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(ind_ref, cap_ref);
        REQUIRE(ours.info() == Eigen::Success);
        REQUIRE(ref.info() == Eigen::Success);
        for (int k = 0; k <= n; ++k) {
            CHECK(ours.eigenvalues()(k) ==
                  doctest::Approx(ref.eigenvalues()(k)).epsilon(1e-8));
        }
    }
}

TEST_CASE("junction charging energy survives the gauge transformation") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> sizes(2, 50);
    for (int trial = 0; trial < 20; ++trial) {
        int n = sizes(rng);
        FosterNetwork net = random_net(rng, n);
        GaugeConfig g = random_gauge(rng, n, 1.0);
        CircuitMatrices m = build_matrices(net, g);
        Eigen::VectorXd col =
            m.cap.llt().solve(Eigen::VectorXd::Unit(n + 1, 0));
        CHECK(col(0) * g.cj == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("bogoliubov columns carry unit symplectic norm") {
    std::mt19937 rng(991);
    std::uniform_int_distribution<int> sizes(2, 50);
    for (int trial = 0; trial < 20; ++trial) {
        int n = sizes(rng);
        FosterNetwork net = random_net(rng, n);
        GaugeConfig g = random_gauge(rng, n, 1.0);
        QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, g));
        for (int nu = 0; nu < n; ++nu) {
            double norm =
                qc.bog_u.col(nu).squaredNorm() - qc.bog_v.col(nu).squaredNorm();
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(qc.mode_freqs(nu) > 0.0);
            if (nu > 0) CHECK(qc.mode_freqs(nu) >= qc.mode_freqs(nu - 1));
        }
    }
}

TEST_CASE("pure gauges reduce to their simple forms") {
    FosterNetwork net = foster_open_line(table_line(12));

    GaugeConfig charge = table_gauge(0, 0.37);
    CircuitMatrices mc = build_matrices(net, charge);
    CHECK(mc.x_tilde == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(mc.l_sum == doctest::Approx(0.37 * 0.63 * charge.loop_l).epsilon(1e-14));
    CHECK(mc.ind_inv(0, 0) == doctest::Approx(1.0 / charge.loop_l).epsilon(1e-14));
    CHECK(mc.el_tilde == doctest::Approx(1.42).epsilon(1e-12));
    QuantizedCircuit qc = bogoliubov_diagonalize(mc);
    CHECK(qc.g_flux.cwiseAbs().maxCoeff() == 0.0);
    CHECK(qc.g_charge.cwiseAbs().minCoeff() > 0.0);

    GaugeConfig flux = table_gauge(12, 0.37);
    QuantizedCircuit qf = bogoliubov_diagonalize(build_matrices(net, flux));
    CHECK(qf.g_charge.cwiseAbs().maxCoeff() == 0.0);
    CHECK(qf.g_flux.cwiseAbs().minCoeff() > 0.0);
    // with every mode flux-coupled both matrices are diagonal: bare line back
    for (int k = 0; k < 12; ++k) {
        double bare = net.omega[k] / (2.0 * kPi * 1e9);
        CHECK(qf.mode_freqs(k) == doctest::Approx(bare).epsilon(1e-12));
    }
}

TEST_CASE("full sharing decouples each sector from the other gauge") {
    FosterNetwork net = foster_open_line(table_line(10));
    GaugeConfig g = table_gauge(4, 1.0);
    CircuitMatrices m = build_matrices(net, g);
    CHECK(m.x_tilde == 1.0);
    CHECK(m.l_sum == 0.0);
    for (int i = 1; i <= 4; ++i) CHECK(m.cap(0, i) == 0.0);

    QuantizedCircuit qc = bogoliubov_diagonalize(m);
    double gmax = qc.g_flux.cwiseAbs().maxCoeff() + qc.g_charge.cwiseAbs().maxCoeff();
    for (int nu = 0; nu < 4; ++nu) CHECK(std::abs(qc.g_charge(nu)) < 1e-12 * gmax);
    for (int nu = 4; nu < 10; ++nu) CHECK(std::abs(qc.g_flux(nu)) < 1e-12 * gmax);

    // the x = 1 branch is the continuous limit of x -> 1
    GaugeConfig g_near = table_gauge(4, 1.0 - 1e-9);
    CircuitMatrices m_near = build_matrices(net, g_near);
    CHECK(rel_gap(m.cap, m_near.cap) < 1e-6);
    CHECK(rel_gap(m.ind_inv, m_near.ind_inv) < 1e-6);
}

TEST_CASE("oscillator at the reference impedance is left untouched") {
    const double c = 1e-13;
    const double l = resistance_quantum * resistance_quantum * c;
    FosterNetwork net;
    net.z0 = resistance_quantum;
    net.delta = 1e9;
    net.ind = {l};
    net.cap = {c};
    net.omega = {1.0 / std::sqrt(l * c)};

    GaugeConfig g;
    g.i0 = 0;
    g.x = 1e-12;  // vanishing coupling to the loop
    g.loop_l = 1e-7;
    g.cj = 1e-14;
    QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, g));
    CHECK(qc.mode_freqs(0) ==
          doctest::Approx(1.0 / (2.0 * kPi * 1e9 * std::sqrt(l * c))).epsilon(1e-8));
    CHECK(qc.bog_u(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(qc.bog_v(0, 0)) < 1e-8);
}

TEST_CASE("photonic frequencies forget the gauge as sharing vanishes") {
    FosterNetwork net = foster_open_line(table_line(10));
    Eigen::VectorXd base;
    for (int i0 : {0, 5, 10}) {
        GaugeConfig g = table_gauge(i0, 1e-8);
        QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, g));
        if (i0 == 0) {
            base = qc.mode_freqs;
            for (int k = 0; k < 10; ++k) {
                double bare = net.omega[k] / (2.0 * kPi * 1e9);
                CHECK(qc.mode_freqs(k) == doctest::Approx(bare).epsilon(1e-8));
            }
        } else {
            for (int k = 0; k < 10; ++k) {
                CHECK(qc.mode_freqs(k) == doctest::Approx(base(k)).epsilon(1e-10));
            }
        }
        CHECK(qc.g_flux.cwiseAbs().maxCoeff() < 1e-6);
        CHECK(qc.g_charge.cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("mixed-gauge normal modes stay close to the bare line") {
    FosterNetwork net = foster_open_line(table_line(250));
    QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, table_gauge(15, 0.5)));
    for (int k = 0; k < 250; ++k) {
        double bare = net.omega[k] / (2.0 * kPi * 1e9);
        CHECK(std::abs(qc.mode_freqs(k) - bare) < 0.05 * bare);
    }
}

TEST_CASE("junction screening dresses the lowest charge-gauge modes") {
    // the junction capacitance pulls the lowest charge-coupled modes up hard;
    // the shift decays quickly with mode number and with the shared fraction
    FosterNetwork net = foster_open_line(table_line(60));
    QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, table_gauge(0, 0.5)));
    Eigen::VectorXd dev(60);
    for (int k = 0; k < 60; ++k) {
        double bare = net.omega[k] / (2.0 * kPi * 1e9);
        dev(k) = (qc.mode_freqs(k) - bare) / bare;
    }
    CHECK(dev(0) == doctest::Approx(0.915).epsilon(0.02));
    for (int k = 1; k < 12; ++k) CHECK(dev(k) < dev(k - 1));
    for (int k = 7; k < 60; ++k) CHECK(std::abs(dev(k)) < 0.05);

    // weak sharing leaves even the lowest mode close to bare
    QuantizedCircuit weak = bogoliubov_diagonalize(build_matrices(net, table_gauge(0, 0.02)));
    for (int k = 0; k < 60; ++k) {
        double bare = net.omega[k] / (2.0 * kPi * 1e9);
        CHECK(std::abs(weak.mode_freqs(k) - bare) < 0.02 * bare);
    }
}

TEST_CASE("analytic low-mode flux coupling tracks the diagonalization") {
    FosterNetwork net = foster_open_line(table_line(40));
    QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(net, table_gauge(20, 0.5)));
    for (int i = 1; i <= 10; ++i) {
        double predicted = flux_coupling_analytic(qc, i);
        CHECK(predicted > 0.0);
        CHECK(std::abs(qc.g_flux(i - 1)) == doctest::Approx(predicted).epsilon(0.02));
    }
    CHECK_THROWS_AS((void)flux_coupling_analytic(qc, 0), ParameterError);
    CHECK_THROWS_AS((void)flux_coupling_analytic(qc, 21), ParameterError);
}

TEST_CASE("coupling magnitudes follow the expected power laws") {
    FosterNetwork net = foster_open_line(table_line(250));

    QuantizedCircuit flux = bogoliubov_diagonalize(build_matrices(net, table_gauge(250, 0.5)));
    CouplingProfile pf = coupling_profile(flux);
    CHECK(pf.flux_exponent == doctest::Approx(0.5).epsilon(0.2));
    CHECK(std::isnan(pf.charge_exponent));

    QuantizedCircuit charge = bogoliubov_diagonalize(build_matrices(net, table_gauge(0, 0.5)));
    CouplingProfile pc = coupling_profile(charge);
    CHECK(pc.charge_exponent <= -0.5);
    CHECK(std::isnan(pc.flux_exponent));
}

TEST_CASE("inductive renormalization grows with mode count") {
    LineSpec line = table_line(0);
    const double loop_l = loop_l_from_el(1.42);

    auto rows = el_renormalization_curve(line, loop_l, {0.5}, {40, 100, 250, 500});
    for (size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].ratio > rows[k - 1].ratio);
    CHECK(rows.back().ratio == doctest::Approx(1.5189).epsilon(1e-3));
    for (const auto& row : rows) CHECK(row.ratio < 2.0);  // asymptote for x = 0.5

    auto high = el_renormalization_curve(line, loop_l, {0.9}, {2000});
    CHECK(high[0].ratio == doctest::Approx(6.4749).epsilon(1e-3));

    CHECK_THROWS_AS((void)el_renormalization_curve(line, loop_l, {1.0}, {10}), ParameterError);
    CHECK_THROWS_AS((void)el_renormalization_curve(line, -1.0, {0.5}, {10}), ParameterError);
}

TEST_CASE("degenerate capacitance is rejected with a conditioning report") {
    FosterNetwork net;
    net.z0 = 50.0;
    net.delta = 1e9;
    net.ind = {1e-8, 1e-8};
    net.cap = {0.0, 0.0};
    net.omega = {1e9, 2e9};
    GaugeConfig g;
    g.i0 = 1;
    g.x = 0.5;
    g.loop_l = 1e-7;
    g.cj = 1e-14;
    CHECK_THROWS_AS((void)bogoliubov_diagonalize(build_matrices(net, g)), NumericError);
}

TEST_CASE("gauge parameters are validated") {
    FosterNetwork net = foster_open_line(table_line(5));
    GaugeConfig g = table_gauge(2, 0.5);

    GaugeConfig bad = g;
    bad.i0 = 6;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
    bad.i0 = -1;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
    bad = g;
    bad.x = 0.0;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
    bad.x = 1.5;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
    bad = g;
    bad.loop_l = 0.0;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
    bad = g;
    bad.cj = -1e-15;
    CHECK_THROWS_AS((void)build_matrices(net, bad), ParameterError);
}
