#pragma once

#include <vector>

#include "phasemod/transmon.hpp"

// Decomposition of the modulated qubit frequency omega(t) into Fourier and
// Taylor harmonic series, sideband spectra and the deviation metrics used to
// compare the two expansions.

namespace phasemod {

// Harmonic content of omega(t) under one pulse. fourier[k] is the coefficient
// of cos(k*(2pi*omega_p*t + phi_p)) in GHz, so the decomposition is phase
// independent. base_harmonic is 2 at a sweet spot (|phi_bar| < 1e-9) where the
// frequency runs at twice the drive, 1 otherwise.
struct ModulationProfile {
    double omega_bar = 0.0;      // time-averaged frequency f_0 [GHz]
    double excursion = 0.0;      // |f_base_harmonic| [GHz]
    std::vector<double> fourier; // fourier[k] = f_k [GHz], k = 0..k_max
    int base_harmonic = 1;

    // omega(t) rebuilt from the stored harmonics, t in seconds.
    double reconstruct(const FluxPulse& pulse, double t_s) const;
};

struct SidebandSpectrum {
    struct Peak {
        double frequency = 0.0; // [GHz]
        double weight = 0.0;    // J_k(z)^2, in [0, 1]
    };
    std::vector<Peak> peaks; // ordered k = -n_max .. n_max
    int n_min = 0;
    int n_max = 0;
};

// Fourier coefficients f_k of omega(t) by composite Simpson quadrature over
// one drive period, starting at 4096 panels and doubling until successive
// coefficients move by less than 1e-9 GHz. Requires omega_p > 0, k_max >= 2.
ModulationProfile fourier_coefficients(const TransmonParams& params, const FluxPulse& pulse,
                                       int k_max);

// Same decomposition from the power-reduced Taylor expansion of the dispersion
// around phi_bar, truncated at the given order (1..10). Harmonics above the
// order are zero by construction.
ModulationProfile taylor_harmonics(const TransmonParams& park, const FluxPulse& pulse, int order);

// Mean absolute difference between the reconstructed omega(t) and the exact
// frequency_trace over one drive period on a 1000-point grid. [GHz]
double average_deviation(const ModulationProfile& approx, const TransmonParams& params,
                         const FluxPulse& pulse);

// Sideband peaks at omega_bar + k*base_harmonic*omega_p with Bessel weights
// J_k(excursion/(base_harmonic*omega_p))^2, k in [-n_max, n_max].
SidebandSpectrum sideband_spectrum(const ModulationProfile& profile, const FluxPulse& pulse,
                                   int n_max);

// Inverts the dc-shift curve: finds phi_tilde in [0, 0.5-|phi_bar|) whose
// time-averaged frequency shift matches the observation within 1e-6 GHz.
// The shift is non-positive and strictly decreasing in phi_tilde, so the
// root is unique; an unreachable shift throws no_solution_error.
double excursion_from_shift(const TransmonParams& params, double phi_bar, double omega_p,
                            double observed_dc_shift);

} // namespace phasemod
