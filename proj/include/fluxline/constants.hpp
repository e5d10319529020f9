#pragma once
#include <numbers>

namespace fluxline {

// 2019 SI exact values
inline constexpr double planck_h = 6.62607015e-34;        // J s
inline constexpr double echarge = 1.602176634e-19;        // C
inline constexpr double hbar = planck_h / (2.0 * std::numbers::pi);
inline constexpr double resistance_quantum = planck_h / (4.0 * echarge * echarge);  // h/4e^2, ohm
inline constexpr double reduced_flux_quantum = hbar / (2.0 * echarge);              // hbar/2e, Wb

inline constexpr double ghz = 1e9;

// E_C = e^2 / 2C_J, energies handled as frequency E/h in GHz
inline double cj_from_ec(double ec_ghz) {
    return echarge * echarge / (2.0 * planck_h * ec_ghz * ghz);
}
inline double ec_from_cap_inv(double cap_inv_00) {
    return echarge * echarge * cap_inv_00 / (2.0 * planck_h * ghz);
}

// E_L = (hbar/2e)^2 / L
inline double loop_l_from_el(double el_ghz) {
    return reduced_flux_quantum * reduced_flux_quantum / (planck_h * el_ghz * ghz);
}
inline double el_from_ind_inv(double ind_inv_00) {
    return reduced_flux_quantum * reduced_flux_quantum * ind_inv_00 / (planck_h * ghz);
}

}  // namespace fluxline
