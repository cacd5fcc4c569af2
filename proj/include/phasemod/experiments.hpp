#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phasemod/coupling.hpp"
#include "phasemod/dynamics.hpp"
#include "phasemod/modulation.hpp"
#include "phasemod/transfer.hpp"

// Named virtual experiments reproducing the device characterization as sweep
// grids: phase sweeps, chevrons, amplitude-coupling curves, spectroscopy
// tables, transfer-function calibration and the coupler-flux sweep. Every
// runner is a pure function of its config; sweep points are dispatched to a
// configurable worker pool with deterministic ordering by grid index.

namespace phasemod {

// Inclusive linspace: points values from start to stop.
struct AxisSpec {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    int points = 0;

    std::vector<double> values() const;
    double step() const;
};

struct ExperimentConfig {
    std::string experiment;
    TwoQubitSystem system;
    FluxPulse pulse1, pulse2;
    std::optional<CouplerParams> coupler;
    AxisSpec sweep;
    AxisSpec probe;      // spectroscopy / spectrum probe-frequency axis
    int order = 1;       // sideband order n
    double t_final = 0.0; // seconds, 0 = auto
    double dt = 0.0;      // seconds, 0 = auto
    bool retune = true;   // derive resonant drive parameters from the model
    int workers = 1;

    void validate() const;
};

struct SweepGrid {
    std::string x_name, y_name;
    std::vector<double> x, y;
    std::vector<std::vector<double>> z; // z[ix][iy]

    struct SummaryRow {
        double x = 0.0;
        double value = 0.0;
        double uncertainty = 0.0; // fit residual rms
        int flag = 0;             // 1 = no oscillation detected, value forced to 0
        double analytic = 0.0;    // closed-form overlay where defined
    };
    std::vector<SummaryRow> summary;
    std::map<std::string, std::string> metadata;
};

// --- tuning helpers (model-side calibration used by runners and configs) ----

// Harmonic profile tolerant of static pulses (phi_tilde = 0 or omega_p = 0).
ModulationProfile drive_profile(const TransmonParams& params, const FluxPulse& pulse,
                                int k_max = 12);

// Drive frequency omega_p satisfying Delta_bar + n*base_harmonic*omega_p = 0
// for the given pulses (profiles are omega_p independent, so no iteration).
// Throws resonance_mismatch_error if the sideband closes on the wrong side or
// the base harmonics differ.
double resonant_drive_frequency(const TwoQubitSystem& system, const FluxPulse& p1,
                                const FluxPulse& p2, int n);

// First-order resonance corrected for the ac-Stark shifts of the off-resonant
// sidebands, 2*(g*J_m(A))^2/((m-n)*omega_eff), evaluated at the weakest
// interference point A = |eps1 - eps2|/omega_eff. This is the frequency a
// chevron calibration measures; the experiment runners retune to it.
double calibrated_drive_frequency(const TwoQubitSystem& system, const FluxPulse& p1,
                                  const FluxPulse& p2, int n);

// phi_tilde whose first-harmonic excursion |f_base| matches the target. [Phi0]
double phi_tilde_for_excursion(const TransmonParams& params, const FluxPulse& base,
                               double eps_target);

// Fixed-point tuning of both amplitudes so that eps_i = ratio_i * omega_eff
// with omega_eff the n-th sideband resonance of the tuned pair. Returns the
// pulses with omega_p set to the resonant drive frequency.
std::pair<FluxPulse, FluxPulse> tune_excursion_ratios(const TwoQubitSystem& system,
                                                      FluxPulse p1, FluxPulse p2, double ratio1,
                                                      double ratio2, int n);

// Adjusts pulse1.phi_tilde so the time-averaged frequencies coincide
// (parametric resonance). With match_excursions, pulse2.phi_tilde is also
// adjusted until eps1 = eps2 at the joint solution.
std::pair<FluxPulse, FluxPulse> tune_parametric_resonance(const TwoQubitSystem& system,
                                                          FluxPulse p1, FluxPulse p2,
                                                          bool match_excursions = false);

// --- experiment runners ------------------------------------------------------

// Dual-drive relative-phase sweep at a sideband resonance: per point evolve,
// fit the |10> population, summary = (dphi, fitted oscillation frequency)
// with the analytic overlay 2|g J_n(A(dphi))|.
SweepGrid run_phase_sweep(const ExperimentConfig& cfg);

enum class ChevronAxis { dphi, omega_p, phi_tilde };

// Population map z = P(|10>)(axis, t). For the omega_p axis the contrast-
// weighted resonance center is reported in the metadata next to the analytic
// resonance condition.
SweepGrid run_chevron(const ExperimentConfig& cfg, ChevronAxis axis);

// Single-drive coupling vs amplitude at off-sweet biases: per amplitude the
// resonance is re-found (coarse scan + golden section on contrast), then the
// coupling is fitted. Metadata carries omega_p and the drift
// Delta_p = |omega_p(phi_tilde) - omega_p(0)| per point.
SweepGrid run_amplitude_coupling(const ExperimentConfig& cfg);

// Analytic dressed sideband spectrum of q1 with the resonant sideband split
// by the phase-tunable coupling; summary = avoided-crossing gap per sweep
// value. z is the peak intensity binned onto the probe axis.
SweepGrid run_spectroscopy(const ExperimentConfig& cfg);

// Ramsey-like transfer-function calibration: per drive frequency the
// programmed amplitude is attenuated by the table, the dc shift recorded and
// the attenuation recovered by inverting the shift.
SweepGrid run_transfer_calibration(const ExperimentConfig& cfg, const TransferTable& table);

// Mediated coupling vs coupler flux with a two-level dynamics cross-check
// per point.
SweepGrid run_coupler_sweep(const ExperimentConfig& cfg);

// Zeroth-order (parametric-resonance) phase sweep; requires the tuned
// time-averaged frequencies to agree within 0.1 MHz unless cfg.retune.
SweepGrid run_parametric_resonance(const ExperimentConfig& cfg);

// Sideband spectrum table of q1 vs pulse amplitude (three-tone spectroscopy
// style), binned onto the probe axis.
SweepGrid run_sideband_table(const ExperimentConfig& cfg);

// Taylor-vs-Fourier average deviation per expansion order for the two pulses
// in the config (y rows: fourier/taylor x pulse1/pulse2).
SweepGrid run_taylor_fourier(const ExperimentConfig& cfg);

// Dispatch by cfg.experiment name (CLI subcommand names).
SweepGrid run_experiment(const ExperimentConfig& cfg, const TransferTable* table = nullptr);

} // namespace phasemod
