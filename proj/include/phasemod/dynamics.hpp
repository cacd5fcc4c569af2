#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "phasemod/transmon.hpp"

// Brute-force time-domain evolution of the two-qubit Duffing system under
// parametric flux drives, the truncated interaction-picture integrator, and
// the damped-cosine oscillation fit used to extract couplings from traces.

namespace phasemod {

// Two Duffing oscillators with a fixed exchange coupling. alpha1/alpha2
// duplicate the per-qubit anharmonicities for the dynamics Hamiltonian.
struct TwoQubitSystem {
    TransmonParams q1, q2;
    double alpha1 = 0.0; // [GHz], signed
    double alpha2 = 0.0;
    double g = 0.0;      // bare coupling /2pi [GHz]
    int levels = 3;      // d per qubit, 2..5

    void validate() const;
};

TwoQubitSystem make_system(const TransmonParams& q1, const TransmonParams& q2, double g,
                           int levels = 3);

// Sampled populations on the bare product basis. Basis labels are "ij" with
// i the q1 level and j the q2 level. Populations are frame independent (the
// rotating frame is diagonal). states holds rotating-frame snapshots at the
// recorded times when requested via EvolveOptions::keep_states.
struct TimeTrace {
    std::vector<double> times; // seconds
    std::map<std::string, std::vector<double>> populations;
    std::vector<double> norm;
    double delta_bar = 0.0; // omega_bar_2 - omega_bar_1 under the drives [GHz]
    std::vector<Eigen::VectorXcd> states;

    const std::vector<double>& channel(const std::string& label) const;
};

struct EvolveOptions {
    int record_samples = 2048;
    bool keep_states = false;
    bool norm_check = true;
};

// Lab-frame Hamiltonian (d^2 x d^2, GHz units) at instantaneous qubit
// frequencies: H0 = sum_i nu_i n_i + (alpha_i/2) n_i(n_i-1), plus
// H_I = g (b1 + b1^dag)(b2 + b2^dag). Hermitian by construction.
Eigen::MatrixXcd hamiltonian_at(const TwoQubitSystem& system, double omega1_t, double omega2_t);

// Step size policy for evolve: 1/50 of the fastest phase in the rotating
// frame (the counter-rotating sum frequency plus margins). [seconds]
double default_time_step(const TwoQubitSystem& system, const FluxPulse& p1, const FluxPulse& p2);

// Looser policy for the interaction picture, whose phases run at the
// detuning and modulation scale only. [seconds]
double default_time_step_interaction(const TwoQubitSystem& system, const FluxPulse& p1,
                                     const FluxPulse& p2);

// Fixed-step RK4 integration of the Schrodinger equation in a frame rotating
// at the unmodulated parking frequencies (diagonal transform applied
// analytically; counter-rotating terms retained). dt = 0 selects the default
// step policy. Throws numeric_error advising a smaller dt if the norm drifts
// beyond 1e-6.
TimeTrace evolve(const TwoQubitSystem& system, const FluxPulse& pulse1, const FluxPulse& pulse2,
                 const Eigen::VectorXcd& psi0, double t_final_s, double dt_s = 0.0,
                 const EvolveOptions& options = {});
TimeTrace evolve(const TwoQubitSystem& system, const FluxPulse& pulse1, const FluxPulse& pulse2,
                 const std::string& psi0_label, double t_final_s, double dt_s = 0.0,
                 const EvolveOptions& options = {});

// Effective-Hamiltonian integration restricted to the {01,10} exchange block
// plus the {11,20,02} block when levels >= 3. Phase integrals F_i(t) are
// accumulated by trapezoidal quadrature of the exact frequency trace.
TimeTrace evolve_interaction_picture(const TwoQubitSystem& system, const FluxPulse& pulse1,
                                     const FluxPulse& pulse2, const std::string& psi0_label,
                                     double t_final_s, double dt_s = 0.0,
                                     const EvolveOptions& options = {});

// Basis state |label> for the given system dimension.
Eigen::VectorXcd basis_state(const TwoQubitSystem& system, const std::string& label);

struct DampedCosineFit {
    double frequency = 0.0; // [GHz]
    double decay = 0.0;     // [s]
    double amplitude = 0.0;
    double offset = 0.0;
    double phase = 0.0;        // [rad]
    double residual_rms = 0.0; // same units as the input series
    int iterations = 0;
};

// Least-squares fit of B + C*exp(-t/tau)*cos(2*pi*f*t + theta). The initial
// frequency comes from the dominant DFT peak (parabolically refined), then
// Levenberg-Marquardt polishes all five parameters. A series with no spectral
// peak above 3x the median bin throws no_oscillation_error.
DampedCosineFit fit_damped_cosine(std::span<const double> times_s,
                                  std::span<const double> values);
DampedCosineFit fit_damped_cosine(const TimeTrace& trace, const std::string& channel);

} // namespace phasemod
