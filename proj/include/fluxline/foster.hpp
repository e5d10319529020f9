#pragma once
#include <complex>
#include <string>
#include <vector>

namespace fluxline {

enum class LineKind { open_nondispersive, dispersive_terminated, josephson_chain };

// transmission line description; lengths in m, impedance in ohm, frequencies in Hz/rad/s
struct LineSpec {
    LineKind kind = LineKind::open_nondispersive;
    double z0 = 0.0;       // wave impedance at DC
    double length = 0.0;   // m
    double v = 0.0;        // phase velocity at DC, m/s
    double delta = 0.0;    // free spectral range, Hz; derived from v/2l when 0
    double omega_p = 0.0;  // plasma cutoff, rad/s (Josephson kinds)
    std::vector<std::pair<double, double>> tau_table;  // (omega, phase) of the termination
    int n_modes = 0;

    double fsr() const;  // Hz, validated
};

// series-LC branches in parallel matched at the admittance poles
struct FosterNetwork {
    double z0 = 0.0;
    double delta = 0.0;  // Hz
    std::vector<double> omega;  // pole frequencies, rad/s, strictly increasing
    std::vector<double> ind;    // henry
    std::vector<double> cap;    // farad
    std::vector<std::string> notes;  // truncation notices
    LineSpec line;              // kept so admittance can account for truncated branches
    bool tail_available = false;

    int size() const { return static_cast<int>(omega.size()); }
};

FosterNetwork foster_open_line(const LineSpec& spec);

// pole solving from the phase-matching condition k(w)l = pi(i-1/2) + tau(w),
// elements from the numeric dispersion derivative
FosterNetwork foster_dispersive(const LineSpec& spec);

// closed-form elements for a Josephson junction chain below its plasma cutoff
FosterNetwork foster_josephson(const LineSpec& spec);

// Y(w) = sum_i i w C_i / (1 - w^2 L_i C_i), by default corrected for the branches
// dropped by truncation (closed-form continuation plus an integral remainder);
// errors within 1e-9 relative of a pole
std::complex<double> network_admittance(const FosterNetwork& net, double omega,
                                        bool include_tail = true);

// verifies pole ordering, element positivity and the 1/sqrt(LC) identity
void check_invariants(const FosterNetwork& net);

}  // namespace fluxline
