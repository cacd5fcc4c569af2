#include "phasemod/coupling.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "phasemod/modulation.hpp"

namespace phasemod {

namespace {

constexpr double pi = std::numbers::pi;

// Miller's algorithm for J_n(z), z > 0, n >= 0: run the three-term recurrence
// downward from well above the turning point, then normalize with
// J_0 + 2*sum_k J_2k = 1.
double bessel_miller(int n, double z) {
    const int start_raw = std::max(n, static_cast<int>(std::ceil(z))) + 42 +
                          static_cast<int>(0.5 * z);
    const int start = start_raw + (start_raw % 2); // even start keeps the norm sum aligned

    double jp = 0.0;       // J_{k+1}
    double jc = 1e-30;     // J_k seed
    double norm = 0.0;     // J_0 + 2*sum J_2k accumulator
    double target = 0.0;   // unnormalized J_n
    for (int k = start; k >= 0; --k) {
        const double jm = (2.0 * (k + 1)) / z * jc - jp; // J_k from J_{k+1}, J_{k+2}
        jp = jc;
        jc = jm;
        if (k % 2 == 0) norm += (k == 0) ? jc : 2.0 * jc;
        if (k == n) target = jc;
        if (std::abs(jc) > 1e250) { // rescale before overflow
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    return target / norm;
}

} // namespace

double bessel_jn(int n, double z) {
    if (std::abs(n) > 64) throw domain_error("bessel_jn: |n| must be <= 64");
    if (std::abs(z) > 50.0) throw domain_error("bessel_jn: |z| must be <= 50");

    double sign = 1.0;
    if (n < 0) { // J_{-n}(z) = (-1)^n J_n(z)
        n = -n;
        if (n % 2 == 1) sign = -sign;
    }
    if (z < 0.0) { // J_n(-z) = (-1)^n J_n(z)
        z = -z;
        if (n % 2 == 1) sign = -sign;
    }
    if (z == 0.0) return n == 0 ? 1.0 : 0.0;
    return sign * bessel_miller(n, z);
}

double effective_coupling_single(double g, double eps_p, double omega_p, int n) {
    if (!(omega_p > 0.0))
        throw degenerate_drive_error("effective_coupling_single: omega_p must be > 0");
    return g * bessel_jn(n, eps_p / omega_p);
}

double bessel_argument_a(double eps1, double eps2, double omega_p, double dphi) {
    if (!(omega_p > 0.0)) throw degenerate_drive_error("bessel_argument_a: omega_p must be > 0");
    if (eps1 < 0.0 || eps2 < 0.0)
        throw domain_error("bessel_argument_a: excursions must be >= 0");
    const double r1 = eps1 / omega_p;
    const double r2 = eps2 / omega_p;
    const double x = r1 - r2 * std::cos(dphi);
    const double y = r2 * std::sin(dphi);
    const double s = -std::sin(0.5 * dphi);
    const double sgn = s < 0.0 ? -1.0 : 1.0; // sgn(0) := +1
    return sgn * std::hypot(x, y);
}

PhaseCoupling phase_coupling(double g, double eps1, double eps2, double omega_p, double dphi,
                             int n, SweetSpotFlags sweet) {
    if (!(omega_p > 0.0)) throw degenerate_drive_error("phase_coupling: omega_p must be > 0");
    const double omega1_eff = (sweet.q1 ? 2.0 : 1.0) * omega_p;
    const double omega2_eff = (sweet.q2 ? 2.0 : 1.0) * omega_p;
    if (omega1_eff != omega2_eff) {
        std::ostringstream msg;
        msg << "phase_coupling: effective drive frequencies differ after sweet-spot doubling ("
            << omega1_eff << " vs " << omega2_eff << " GHz)";
        throw resonance_mismatch_error(msg.str());
    }
    const double omega_eff = omega1_eff;
    const double mult = sweet.q1 ? 2.0 : 1.0;
    const double dphi_eff = mult * dphi;
    const double phi1 = dphi_eff; // convention: phi_p2 = 0
    const double phi2 = 0.0;

    PhaseCoupling pc;
    pc.order = n;
    pc.argument_a = bessel_argument_a(eps1, eps2, omega_eff, dphi_eff);
    pc.magnitude = g * bessel_jn(n, pc.argument_a);
    pc.prefactor_phase =
        (eps1 / omega_eff) * std::sin(phi1) - (eps2 / omega_eff) * std::sin(phi2);

    // Combined tone (eps2/w)sin(wt+phi2) - (eps1/w)sin(wt+phi1) = A sin(wt+psi):
    // the unsigned phase comes from the phasor sum; a negative A shifts it by pi.
    const std::complex<double> v = (eps2 / omega_eff) * std::polar(1.0, phi2) -
                                   (eps1 / omega_eff) * std::polar(1.0, phi1);
    double psi = std::abs(v) < 1e-15 ? 0.0 : std::arg(v);
    if (pc.argument_a < 0.0) psi -= pi;
    pc.interaction_phase = n * psi;
    return pc;
}

double phase_sensitivity(double g, double eps1, double eps2, double omega_p, double dphi, int n) {
    if (!(omega_p > 0.0)) throw degenerate_drive_error("phase_sensitivity: omega_p must be > 0");
    const double a = bessel_argument_a(eps1, eps2, omega_p, dphi);
    if (std::abs(a) < 1e-9) {
        // A = 0 only when eps1 = eps2 in phase; J_n(A) ~ (A/2)^n/n! there, so
        // only |n| = 1 survives with slope dA/d(dphi) -> eps/omega_p.
        if (std::abs(n) != 1) return 0.0;
        const double r = 0.5 * (eps1 + eps2) / omega_p;
        return std::abs(0.5 * g * r);
    }
    const double jm = bessel_jn(n - 1, a);
    const double jp = bessel_jn(n + 1, a);
    return std::abs(0.5 * g * (jm - jp) * (eps1 * eps2 / (a * omega_p * omega_p)) *
                    std::sin(dphi));
}

double jitter_fluctuation(double sensitivity, double jitter) {
    if (jitter < 0.0) throw domain_error("jitter_fluctuation: jitter must be >= 0");
    return sensitivity * jitter;
}

double dephasing_rate(double lambda, const TransmonParams& params, const FluxPulse& pulse,
                      double a_ac) {
    if (a_ac < 0.0) throw domain_error("dephasing_rate: a_ac must be >= 0");
    params.validate();
    pulse.validate();

    const double h = 1e-4;
    const double omega_quad = pulse.omega_p > 0.0 ? pulse.omega_p : 0.1;
    auto dc_at = [&](double phi_tilde) {
        // omega_bar is even in phi_tilde (sign flip is a phase shift)
        FluxPulse p{pulse.phi_bar, std::abs(phi_tilde), omega_quad, 0.0};
        return fourier_coefficients(params, p, 2).omega_bar;
    };
    const double slope = (dc_at(pulse.phi_tilde + h) - dc_at(pulse.phi_tilde - h)) / (2.0 * h);
    return lambda * std::abs(slope) * a_ac * 2.0 * pi * 1e3; // GHz/Phi0 * Phi0 -> rad/us
}

void CouplerParams::validate() const {
    coupler.validate();
    if (!(g_1c > 0.0) || !(g_2c > 0.0))
        throw domain_error("CouplerParams: qubit-coupler couplings must be > 0");
    if (!(std::abs(flux_c) < 0.5))
        throw domain_error("CouplerParams: flux_c outside (-0.5, 0.5) Phi0");
}

double coupler_mediated_coupling(double omega1, double omega2, const CouplerParams& coupler) {
    const double omega_c = qubit_frequency(coupler.coupler, coupler.flux_c);
    if (!(omega_c > omega1 && omega_c > omega2)) {
        std::ostringstream msg;
        msg << "coupler_mediated_coupling: coupler at " << omega_c
            << " GHz must sit above both qubits (" << omega1 << ", " << omega2 << ")";
        throw model_validity_error(msg.str());
    }
    const double d1 = omega1 - omega_c;
    const double d2 = omega2 - omega_c;
    const double validity = 2.0 * std::max(coupler.g_1c, coupler.g_2c);
    if (std::abs(d1) < validity || std::abs(d2) < validity) {
        std::ostringstream msg;
        msg << "coupler_mediated_coupling: detuning to the coupler (" << d1 << ", " << d2
            << " GHz) inside the hybridization window " << validity << " GHz";
        throw model_validity_error(msg.str());
    }
    const double s1 = omega1 + omega_c;
    const double s2 = omega2 + omega_c;
    return coupler.g_12 +
           0.5 * coupler.g_1c * coupler.g_2c * (1.0 / d1 + 1.0 / d2 - 1.0 / s1 - 1.0 / s2);
}

double find_zero_coupling_flux(double omega1, double omega2, const CouplerParams& coupler,
                               double flux_lo, double flux_hi) {
    auto g_at = [&](double flux) {
        CouplerParams c = coupler;
        c.flux_c = flux;
        return coupler_mediated_coupling(omega1, omega2, c);
    };
    double g_lo = g_at(flux_lo);
    double g_hi = g_at(flux_hi);
    if (g_lo == 0.0) return flux_lo;
    if (g_hi == 0.0) return flux_hi;
    if ((g_lo > 0.0) == (g_hi > 0.0))
        throw no_zero_error("find_zero_coupling_flux: no sign change on the search bracket");

    double lo = flux_lo, hi = flux_hi;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g_at(mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace phasemod
