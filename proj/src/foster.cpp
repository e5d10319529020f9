#include "fluxline/foster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fluxline/errors.hpp"

namespace fluxline {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double tau_of(const LineSpec& spec, double w) {
    const auto& tab = spec.tau_table;
    if (tab.empty()) return 0.0;
    if (tab.size() == 1 || w <= tab.front().first) return tab.front().second;
    if (w >= tab.back().first) return tab.back().second;
    auto it = std::upper_bound(tab.begin(), tab.end(), w,
                               [](double x, const std::pair<double, double>& p) { return x < p.first; });
    auto lo = *(it - 1);
    auto hi = *it;
    double t = (w - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

double wavenumber(const LineSpec& spec, double w) {
    double k = w / spec.v;
    if (spec.omega_p > 0.0) {
        double u = w / spec.omega_p;
        if (u >= 1.0) throw NumericError("foster: frequency at or above the plasma cutoff");
        k /= std::sqrt(1.0 - u * u);
    }
    return k;
}

double wave_impedance(const LineSpec& spec, double w) {
    double z = spec.z0;
    if (spec.omega_p > 0.0) {
        double u = w / spec.omega_p;
        z /= std::sqrt(1.0 - u * u);
    }
    return z;
}

// l dk/dw by central difference, step kept clear of the cutoff
double length_dkdw(const LineSpec& spec, double w) {
    double h = w * 1e-6;
    if (spec.omega_p > 0.0) h = std::min(h, 0.25 * (spec.omega_p - w));
    double kp = wavenumber(spec, w + h);
    double km = wavenumber(spec, w - h);
    return spec.length * (kp - km) / (2.0 * h);
}

void require_line(const LineSpec& spec, bool need_geometry) {
    if (spec.z0 <= 0.0) throw ParameterError("foster: wave impedance must be positive");
    if (spec.n_modes <= 0) throw ParameterError("foster: mode count must be positive");
    if (need_geometry) {
        if (spec.length <= 0.0) throw ParameterError("foster: line length must be positive");
        if (spec.v <= 0.0) throw ParameterError("foster: phase velocity must be positive");
    }
}

// phase accumulated along the line minus the termination shift
double line_phase(const LineSpec& spec, double w) {
    double l = spec.length > 0.0 ? spec.length : spec.v / (2.0 * spec.delta);
    return wavenumber(spec, w) * l - tau_of(spec, w);
}

// inverse of line_phase; closed form unless a termination table makes it implicit
double pole_for_phase(const LineSpec& spec, double d, double phase) {
    if (spec.tau_table.empty()) {
        double w0 = 2.0 * d * phase;  // dispersionless inversion
        if (spec.omega_p <= 0.0) return w0;
        double r = w0 / spec.omega_p;
        return spec.omega_p * r / std::sqrt(1.0 + r * r);
    }
    double cap_w = spec.omega_p > 0.0 ? spec.omega_p * (1.0 - 1e-12)
                                      : std::numeric_limits<double>::infinity();
    double hi = std::min(2.0 * d * (phase + 2.0 * kTwoPi), cap_w);
    while (line_phase(spec, hi) < phase) {
        double next = std::min(hi * 1.5, cap_w);
        if (next == hi) throw NumericError("foster: tail pole beyond the dispersion cutoff");
        hi = next;
    }
    double lo = hi / 4.0;
    while (line_phase(spec, lo) > phase && lo > 1e-300) lo /= 1.5;
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (line_phase(spec, mid) < phase ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// branch capacitance as a continuous function of the pole frequency
double branch_cap_at(const LineSpec& spec, double d, double w) {
    if (spec.omega_p > 0.0) {
        double u = w / spec.omega_p;
        double s = 1.0 - u * u;
        return 4.0 * d / (w * w * spec.z0) * s * s;
    }
    return 4.0 * d / (w * w * spec.z0);
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// admittance of the branches dropped by truncating the expansion at n_kept:
// closed-form branch terms up to an index edge, then the Euler-Maclaurin
// remainder (midpoint sum = integral + f'(edge)/24) of the continuum of poles
double tail_admittance(const FosterNetwork& net, double w) {
    const LineSpec& spec = net.line;
    double d = net.delta;
    const double pi = kTwoPi / 2.0;
    int n = net.size();
    double phase_w = spec.omega_p > 0.0 && w >= spec.omega_p ? std::numeric_limits<double>::infinity()
                                                             : line_phase(spec, w);
    long k_edge = std::max<long>({2L * n, n + 50L,
                                  std::isfinite(phase_w) ? static_cast<long>(std::ceil(1.25 * phase_w / pi)) : 0L});
    if (spec.omega_p > 0.0) {
        // keep the integration edge clear of the evaluation point when feasible
        for (int grow = 0; grow < 24; ++grow) {
            double edge = pole_for_phase(spec, d, pi * static_cast<double>(k_edge));
            if (edge > 1.25 * w || edge > spec.omega_p * (1.0 - 1e-7)) break;
            k_edge *= 2;
        }
    }
    // continuous-index branch term; x = i - 1/2 at the poles
    auto term = [&](double x) {
        double wi = pole_for_phase(spec, d, pi * x);
        double c = branch_cap_at(spec, d, wi);
        return w * c * wi * wi / (wi * wi - w * w);
    };
    double sum = 0.0;
    for (long i = n + 1; i <= k_edge; ++i) {
        double x = static_cast<double>(i) - 0.5;
        double wi = pole_for_phase(spec, d, pi * x);
        if (std::abs(w - wi) < 1e-9 * wi)
            throw ParameterError("foster: admittance requested within 1e-9 of truncated branch " +
                                 std::to_string(i));
        sum += term(x);
    }
    double w_edge = pole_for_phase(spec, d, pi * static_cast<double>(k_edge));
    double integral;
    if (spec.omega_p > 0.0) {
        // poles accumulate at the cutoff; w' = wp sin(phi) regularizes the density
        double wp = spec.omega_p;
        double phi0 = std::asin(std::min(w_edge / wp, 1.0));
        auto f = [&](double phi) {
            double cs = std::cos(phi);
            double wq = wp * std::sin(phi);
            return 2.0 * w * wp / (pi * spec.z0) * cs * cs / (wq * wq - w * w);
        };
        integral = integrate(f, phi0, pi / 2.0, 1e-12 * std::abs(sum) + 1e-30);
    } else {
        integral = std::log((w_edge + w) / (w_edge - w)) / (pi * spec.z0);
    }
    double h = 1e-3;
    double edge_x = static_cast<double>(k_edge);
    double slope = (term(edge_x + h) - term(edge_x - h)) / (2.0 * h);
    return sum + integral + slope / 24.0;
}

}  // namespace

double LineSpec::fsr() const {
    if (delta > 0.0) {
        if (v > 0.0 && length > 0.0) {
            double derived = v / (2.0 * length);
            if (std::abs(delta - derived) > 1e-9 * delta)
                throw ParameterError("foster: free spectral range inconsistent with v/(2 length)");
        }
        return delta;
    }
    if (v <= 0.0 || length <= 0.0)
        throw ParameterError("foster: need either the free spectral range or both v and length");
    return v / (2.0 * length);
}

FosterNetwork foster_open_line(const LineSpec& spec) {
    require_line(spec, false);
    double d = spec.fsr();
    FosterNetwork net;
    net.z0 = spec.z0;
    net.delta = d;
    net.line = spec;
    net.tail_available = true;
    net.omega.reserve(spec.n_modes);
    net.ind.reserve(spec.n_modes);
    net.cap.reserve(spec.n_modes);
    const double pi = kTwoPi / 2.0;
    for (int i = 1; i <= spec.n_modes; ++i) {
        double half = i - 0.5;
        net.omega.push_back(kTwoPi * d * half);
        net.ind.push_back(spec.z0 / (4.0 * d));
        net.cap.push_back(1.0 / (spec.z0 * pi * pi * d * half * half));
    }
    return net;
}

FosterNetwork foster_dispersive(const LineSpec& spec) {
    require_line(spec, true);
    double d = spec.fsr();
    FosterNetwork net;
    net.z0 = spec.z0;
    net.delta = d;
    net.line = spec;
    net.tail_available = true;
    const double pi = kTwoPi / 2.0;
    double cap_w = spec.omega_p > 0.0 ? spec.omega_p * (1.0 - 1e-12)
                                      : std::numeric_limits<double>::infinity();
    double prev = 0.0;
    for (int i = 1; i <= spec.n_modes; ++i) {
        double phase = pi * (i - 0.5);
        auto mismatch = [&](double w) {
            return wavenumber(spec, w) * spec.length - tau_of(spec, w) - phase;
        };
        // bracket around the nondispersive seed, then bisect
        double hi = std::min(kTwoPi * d * (i - 0.5), cap_w);
        while (mismatch(hi) < 0.0) {
            double next = std::min(hi * 1.5, cap_w);
            if (next == hi) break;
            hi = next;
        }
        if (mismatch(hi) < 0.0) {
            net.notes.push_back("branch " + std::to_string(i) +
                                " and above lie beyond the dispersion cutoff; network truncated at " +
                                std::to_string(i - 1) + " branches");
            break;
        }
        double lo = std::max(prev, hi / 4.0);
        while (mismatch(lo) > 0.0) {
            if (lo <= prev * (1.0 + 1e-15) || lo < 1e-300) break;
            lo = std::max(prev, lo / 1.5);
            if (lo == prev) { lo = std::max(prev * (1.0 + 1e-15), 1e-300); break; }
        }
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            (mismatch(mid) < 0.0 ? lo : hi) = mid;
        }
        double w = 0.5 * (lo + hi);
        if (w - prev < 1e-12 * w) {
            net.notes.push_back("branch " + std::to_string(i) +
                                " degenerate with its predecessor; network truncated at " +
                                std::to_string(i - 1) + " branches");
            break;
        }
        double ldk = length_dkdw(spec, w);
        double z = wave_impedance(spec, w);
        net.omega.push_back(w);
        net.ind.push_back(0.5 * z * ldk);
        net.cap.push_back(2.0 / (w * w * z * ldk));
        prev = w;
    }
    return net;
}

FosterNetwork foster_josephson(const LineSpec& spec) {
    require_line(spec, false);
    if (spec.omega_p <= 0.0) throw ParameterError("foster: junction chain needs a positive plasma frequency");
    double d = spec.fsr();
    FosterNetwork net;
    net.z0 = spec.z0;
    net.delta = d;
    net.line = spec;
    net.tail_available = true;
    for (int i = 1; i <= spec.n_modes; ++i) {
        double x = kTwoPi * d * (i - 0.5) / spec.omega_p;  // nondispersive pole over cutoff
        double w = spec.omega_p * x / std::sqrt(1.0 + x * x);
        double u = w / spec.omega_p;
        if (u > 1.0 - 1e-9) {
            const double um = 1.0 - 1e-9;
            double xmax = um / std::sqrt((1.0 - um) * (1.0 + um));
            int feasible = static_cast<int>(std::floor(xmax * spec.omega_p / (kTwoPi * d) + 0.5));
            throw ParameterError("foster: branch " + std::to_string(i) +
                                 " too close to the plasma cutoff; at most " + std::to_string(feasible) +
                                 " branches are feasible for this chain");
        }
        double s = 1.0 - u * u;
        net.omega.push_back(w);
        net.ind.push_back(spec.z0 / (4.0 * d) / (s * s));
        net.cap.push_back(4.0 * d / (w * w * spec.z0) * s * s);
    }
    return net;
}

std::complex<double> network_admittance(const FosterNetwork& net, double omega, bool include_tail) {
    double im = 0.0;
    for (int i = 0; i < net.size(); ++i) {
        if (std::abs(omega - net.omega[i]) < 1e-9 * net.omega[i])
            throw ParameterError("foster: admittance requested within 1e-9 of pole " +
                                 std::to_string(i + 1));
        double den = 1.0 - omega * omega * net.ind[i] * net.cap[i];
        im += omega * net.cap[i] / den;
    }
    if (include_tail && net.tail_available) im += tail_admittance(net, omega);
    return std::complex<double>(0.0, im);
}

void check_invariants(const FosterNetwork& net) {
    size_t n = net.omega.size();
    if (net.ind.size() != n || net.cap.size() != n)
        throw NumericError("foster: element arrays disagree in length");
    for (size_t i = 0; i < n; ++i) {
        if (!(net.omega[i] > 0.0) || !(net.ind[i] > 0.0) || !(net.cap[i] > 0.0) ||
            !std::isfinite(net.ind[i]) || !std::isfinite(net.cap[i]))
            throw NumericError("foster: nonpositive or nonfinite element in branch " + std::to_string(i + 1));
        if (i > 0 && net.omega[i] <= net.omega[i - 1])
            throw NumericError("foster: pole frequencies not strictly increasing at branch " +
                               std::to_string(i + 1));
        double resid = std::abs(net.omega[i] * std::sqrt(net.ind[i] * net.cap[i]) - 1.0);
        if (resid > 1e-12)
            throw NumericError("foster: branch " + std::to_string(i + 1) +
                               " violates the resonance identity");
    }
}

}  // namespace fluxline
