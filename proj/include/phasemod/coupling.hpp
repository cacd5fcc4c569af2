#pragma once

#include "phasemod/transmon.hpp"

// Closed-form effective couplings for parametrically modulated qubits:
// single-drive sideband couplings g*J_n(eps/omega), the dual-drive
// phase-tunable coupling g*J_n(A) with its signed interference argument A,
// phase-jitter sensitivity, the 1/f dephasing estimate and the dispersive
// coupler model used by the coupler-flux sweep.

namespace phasemod {

// Effective coupling record for one sideband order.
struct PhaseCoupling {
    int order = 0;                 // n
    double argument_a = 0.0;       // signed Bessel argument A
    double magnitude = 0.0;        // g*J_n(A) [GHz]
    double prefactor_phase = 0.0;  // arg(C_phi) [rad]
    double interaction_phase = 0.0; // phi_n' (dual drive) / n*(phi_p+pi) (single) [rad]
};

struct SweetSpotFlags {
    bool q1 = false;
    bool q2 = false;
};

// Tunable coupler between the qubit pair. Couplings are /2pi in GHz.
struct CouplerParams {
    TransmonParams coupler;
    double g_1c = 0.0;
    double g_2c = 0.0;
    double g_12 = 0.0;
    double flux_c = 0.0; // coupler dc bias [Phi0]

    void validate() const;
};

// Bessel function of the first kind, integer order, by downward (Miller)
// recurrence with series normalization. |n| <= 64, |z| <= 50.
double bessel_jn(int n, double z);

// Eq-(8)-style single-drive coupling g*J_n(eps_p/omega_p). The resonance
// condition Delta + n*omega_p = 0 is the caller's concern.
double effective_coupling_single(double g, double eps_p, double omega_p, int n);

// Signed interference argument of the dual-drive coupling,
//   A = sgn[-sin(dphi/2)] * sqrt((e1 - e2*cos dphi)^2 + (e2*sin dphi)^2),
// with e_i = eps_i/omega_p and sgn(0) := +1.
double bessel_argument_a(double eps1, double eps2, double omega_p, double dphi);

// Dual-drive phase-tunable coupling at matched drive frequencies. A sweet
// spot flag doubles that qubit's effective drive frequency and phase; the
// flags must agree or the effective frequencies cannot match. Convention:
// phi_p1 = dphi, phi_p2 = 0.
PhaseCoupling phase_coupling(double g, double eps1, double eps2, double omega_p, double dphi,
                             int n, SweetSpotFlags sweet = {});

// |d(g*J_n(A))/d(dphi)| via the Bessel recurrence chain. At A = 0 (equal
// drives in phase) the removable singularity is replaced by the series limit:
// g*eps/(2*omega_p) for |n| = 1, zero otherwise. [GHz/rad]
double phase_sensitivity(double g, double eps1, double eps2, double omega_p, double dphi, int n);

// Coupling fluctuation from relative-phase jitter: sensitivity * jitter. [GHz]
double jitter_fluctuation(double sensitivity, double jitter);

// 1/f dephasing rate estimate lambda * |d(omega_bar)/d(phi_tilde)| * a_ac,
// returned in 1/us (the derivative of the angular time-averaged frequency,
// i.e. 2pi * 1e3 * d(nu_bar)/d(phi_tilde) per microsecond).
double dephasing_rate(double lambda, const TransmonParams& params, const FluxPulse& pulse,
                      double a_ac);

// Dispersive coupler-mediated static coupling
//   g~ = g_12 + (g_1c*g_2c/2) * (1/D1 + 1/D2 - 1/S1 - 1/S2),
// D_i = omega_i - omega_c, S_i = omega_i + omega_c, with omega_c evaluated
// from the coupler dispersion at flux_c. Requires the coupler above both
// qubits and |D_i| >= 2*max(g_1c, g_2c), else model_validity_error.
double coupler_mediated_coupling(double omega1, double omega2, const CouplerParams& coupler);

// Coupler bias where the mediated coupling crosses zero, by bisection over
// flux_c in [flux_lo, flux_hi] to 1e-6 Phi0. Throws no_zero_error when the
// bracket endpoints have the same sign.
double find_zero_coupling_flux(double omega1, double omega2, const CouplerParams& coupler,
                               double flux_lo, double flux_hi);

} // namespace phasemod
