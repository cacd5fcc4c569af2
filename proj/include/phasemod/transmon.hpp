#pragma once

#include <span>
#include <vector>

#include "phasemod/errors.hpp"

// Flux-to-frequency transduction of a symmetric-SQUID transmon and sampling
// of the instantaneous qubit frequency under a parametric flux pulse.
//
// Unit conventions used throughout the library:
//   frequencies  : omega/2pi in GHz (ordinary frequency, not angular)
//   flux         : units of the flux quantum Phi0
//   time         : seconds on public interfaces
//   phases       : radians

namespace phasemod {

// One flux-tunable transmon. e_c and the junction energies are /2pi in GHz.
// The anharmonicity is carried separately (signed, negative) and is only used
// by the dynamics Hamiltonian; the dispersion below does not depend on it.
struct TransmonParams {
    double e_c = 0.0;
    double e_j1 = 0.0;
    double e_j2 = 0.0;
    double anharmonicity = 0.0;

    double ej_total() const { return e_j1 + e_j2; }

    // Throws domain_error unless e_c > 0, e_j1,e_j2 > 0, EJ/EC > 20 and
    // anharmonicity < 0.
    void validate() const;
};

// One parametric flux drive Phi(t) = phi_bar + phi_tilde*cos(2pi*omega_p*t + phi_p).
// omega_p is the drive frequency /2pi in GHz; omega_p = 0 denotes a static pulse.
struct FluxPulse {
    double phi_bar = 0.0;   // parking flux [Phi0]
    double phi_tilde = 0.0; // modulation amplitude [Phi0], >= 0
    double omega_p = 0.0;   // drive frequency /2pi [GHz], >= 0
    double phi_p = 0.0;     // drive phase [rad]

    double flux_at(double t_s) const;

    // Throws domain_error unless phi_tilde >= 0, omega_p >= 0 and
    // |phi_bar| + phi_tilde < 0.5.
    void validate() const;
};

// 0->1 transition frequency at a static flux: sqrt(8*EC*EJ*|cos(pi*Phi)|) - EC.
// Even in flux, maximal at flux = 0. Requires |flux| < 0.5.
double qubit_frequency(const TransmonParams& params, double flux);

// Pointwise qubit frequency along a strictly increasing time grid (seconds)
// under the pulse. Throws domain_error naming the offending time if the
// instantaneous flux leaves (-0.5, 0.5).
std::vector<double> frequency_trace(const TransmonParams& params, const FluxPulse& pulse,
                                    std::span<const double> t_grid_s);

// n-th flux derivative of qubit_frequency by central differences with one
// Richardson level. Orders 1..10; the stencil step grows with the order to
// keep the difference above roundoff (1e-4 Phi0 for orders <= 2).
double dfreq_dflux(const TransmonParams& params, double flux, int order);

// Inverse of qubit_frequency on the decreasing branch flux in [0, 0.5):
// smallest non-negative flux with qubit_frequency(flux) = target.
// Throws no_solution_error if the target is outside the reachable band.
double flux_for_frequency(const TransmonParams& params, double target_ghz);

} // namespace phasemod
