#pragma once
#include <string>
#include <vector>

#include "fluxline/fluxonium.hpp"
#include "fluxline/foster.hpp"

namespace fluxline {

enum class GaugeMode { charge, flux, mixed };

// i0 = 0 lets the pipeline derive the split from f_eg / (2 delta)
struct GaugeSpec {
    GaugeMode mode = GaugeMode::mixed;
    int i0 = 0;
};

// scalar values apply uniformly; a per-mode table overrides them.
// 0 disables a loss channel (mapped to an infinite quality factor)
struct QualitySpec {
    double q_int = 10000.0;
    double q_ext = 2000.0;
    std::vector<double> q_int_modes;
    std::vector<double> q_ext_modes;
};

struct SweepSpec {
    std::vector<double> phi_grid;   // radian
    std::vector<double> freq_grid;  // GHz
    int s_max = 2;                  // total particles per basis state
};

struct NumericsSpec {
    int fluxonium_basis = 120;   // harmonic-oscillator basis of the qubit solver
    int fluxonium_levels = 7;    // qubit levels kept by exact diagonalization
    int photon_states = 40;      // multi-mode Fock states kept by exact diagonalization
    int max_dimension = 20000;   // exact-diagonalization memory guard
    double window_lo = 0.0;      // GHz; lo >= hi requests the automatic window
    double window_hi = 0.0;
    bool paper_sqrt_i = false;   // sqrt(i) shorthand for low-mode coupling ratios
};

struct DeviceConfig {
    LineSpec line;
    FluxoniumParams fluxonium;  // phi_ext stays 0; the sweep grid supplies it
    double x = 0.5;
    GaugeSpec gauge;
    QualitySpec quality;
    SweepSpec sweep;
    NumericsSpec numerics;
    std::string hash;  // FNV-1a of the canonical serialization
};

// strict schema: unknown keys, wrong types and out-of-range values raise
// ConfigError whose path names the offending field
DeviceConfig parse_device_config(const std::string& text);
DeviceConfig load_device_config(const std::string& path);

// defaults filled, keys sorted; whitespace and key order in the source file
// never change the hash
std::string canonical_config_json(const DeviceConfig& cfg);

// 64-bit FNV-1a, 16 hex characters
std::string fnv1a_hex(const std::string& data);

// cache keys covering exactly the fields each stage consumes
std::string foster_stage_key(const DeviceConfig& cfg);
std::string quantize_stage_key(const DeviceConfig& cfg);
std::string polariton_stage_key(const DeviceConfig& cfg, double phi_ext);

}  // namespace fluxline
