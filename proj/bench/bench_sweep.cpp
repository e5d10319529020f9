// times the OpenMP sweep kernels against their serial reference and checks
// that both produce bit-identical results
#include <chrono>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fluxline/constants.hpp"
#include "fluxline/effective.hpp"
#include "fluxline/fluxonium.hpp"
#include "fluxline/foster.hpp"
#include "fluxline/quantize.hpp"
#include "fluxline/spectra.hpp"

using namespace fluxline;

namespace {

constexpr double kPi = std::numbers::pi;

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct Row {
    const char* name;
    double serial_ms;
    double parallel_ms;
    bool identical;
};

void print_table(const std::vector<Row>& rows, int threads) {
    std::printf("%-22s %12s %12s %9s %9s\n", "kernel", "serial_ms", "parallel_ms", "speedup",
                "identical");
    for (const Row& r : rows)
        std::printf("%-22s %12.1f %12.1f %8.2fx %9s\n", r.name, r.serial_ms, r.parallel_ms,
                    r.serial_ms / r.parallel_ms, r.identical ? "yes" : "NO");
    std::printf("threads: %d\n", threads);
}

}  // namespace

int main() {
    LineSpec line;
    line.kind = LineKind::open_nondispersive;
    line.z0 = 9695.0;
    line.length = 6e-3;
    line.v = 2.18e6;
    line.n_modes = 60;

    GaugeConfig gauge;
    gauge.i0 = 6;
    gauge.x = 0.5;
    gauge.loop_l = loop_l_from_el(1.42);
    gauge.cj = cj_from_ec(5.69);
    const QuantizedCircuit qc = bogoliubov_diagonalize(build_matrices(foster_open_line(line), gauge));

    FluxoniumParams base;
    base.ej = 8.12;
    base.ec = 5.69;
    base.el = 1.42;
    base.phi_ext = kPi;

    std::vector<double> phis(8);
    for (int i = 0; i < 8; ++i) phis[i] = 1.7 + (kPi - 1.7) * i / 7.0;

    std::vector<Row> rows;

    {
        EffectiveConfig cfg;
        cfg.s_max = 2;
        auto t0 = std::chrono::steady_clock::now();
        const auto serial = fine_structure_sweep(qc, base, phis, cfg, false);
        const double t_serial = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto threaded = fine_structure_sweep(qc, base, phis, cfg, true);
        const double t_parallel = ms_since(t0);

        bool same = serial.size() == threaded.size();
        for (std::size_t p = 0; same && p < serial.size(); ++p)
            same = serial[p].ok == threaded[p].ok &&
                   serial[p].energies.size() == threaded[p].energies.size() &&
                   std::memcmp(serial[p].energies.data(), threaded[p].energies.data(),
                               sizeof(double) * serial[p].energies.size()) == 0;
        rows.push_back({"fine_structure_sweep", t_serial, t_parallel, same});
    }

    {
        const QualityModel qm = uniform_quality(line.n_modes);
        Eigen::VectorXd freqs(40);
        for (int i = 0; i < 40; ++i) freqs(i) = 5.0 + 0.8 * i / 39.0;

        auto t0 = std::chrono::steady_clock::now();
        const auto serial = flux_probe_map(qc, base, qm, phis, freqs, 1, {0.0, 0.0}, false);
        const double t_serial = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto threaded = flux_probe_map(qc, base, qm, phis, freqs, 1, {0.0, 0.0}, true);
        const double t_parallel = ms_since(t0);

        const bool same =
            serial.abs_s11.rows() == threaded.abs_s11.rows() &&
            serial.abs_s11.cols() == threaded.abs_s11.cols() &&
            std::memcmp(serial.abs_s11.data(), threaded.abs_s11.data(),
                        sizeof(double) * serial.abs_s11.size()) == 0;
        rows.push_back({"flux_probe_map", t_serial, t_parallel, same});
    }

#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    print_table(rows, threads);

    for (const Row& r : rows)
        if (!r.identical) return 1;
    return 0;
}
