#include "phasemod/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "phasemod/modulation.hpp"

namespace phasemod {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double fit_floor_ghz = 5e-4;    // below this expected coupling, skip fitting windows
constexpr double min_fit_amplitude = 0.1; // population contrast for a real exchange

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    return os.str();
}

// Deterministic worker pool: point i writes only slot i; the first failing
// index wins error reporting.
void parallel_for_indexed(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::clamp(workers, 1, 64);
    if (workers == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

SweepGrid::SummaryRow fit_or_flag(double x, const TimeTrace& trace, double analytic) {
    try {
        const DampedCosineFit fit = fit_damped_cosine(trace, "10");
        if (fit.amplitude < min_fit_amplitude) return {x, 0.0, fit.residual_rms, 1, analytic};
        return {x, fit.frequency, fit.residual_rms, 0, analytic};
    } catch (const no_oscillation_error&) {
        return {x, 0.0, 0.0, 1, analytic};
    }
}

double auto_window_s(double slowest_ghz, double t_final_cfg) {
    if (t_final_cfg > 0.0) return t_final_cfg;
    return 3.2 / std::max(slowest_ghz, fit_floor_ghz) * 1e-9;
}

int base_harmonic_of(const FluxPulse& pulse) { return std::abs(pulse.phi_bar) < 1e-9 ? 2 : 1; }

struct DualDriveSetup {
    ModulationProfile prof1, prof2;
    double omega_drive = 0.0; // programmed omega_p [GHz]
    double omega_eff = 0.0;   // base_harmonic * omega_drive
    SweetSpotFlags flags;
    double delta_bar = 0.0;
};

// Profiles, sweet-spot flags and the (re)tuned drive frequency for a
// dual-drive sideband experiment of order n.
DualDriveSetup dual_drive_setup(const ExperimentConfig& cfg, FluxPulse& p1, FluxPulse& p2, int n) {
    DualDriveSetup s;
    s.prof1 = drive_profile(cfg.system.q1, p1);
    s.prof2 = drive_profile(cfg.system.q2, p2);
    if (s.prof1.base_harmonic != s.prof2.base_harmonic)
        throw resonance_mismatch_error(
            "dual drive: one qubit parks at a sweet spot and the other does not; effective "
            "drive frequencies cannot match");
    s.flags = {s.prof1.base_harmonic == 2, s.prof2.base_harmonic == 2};
    s.delta_bar = s.prof2.omega_bar - s.prof1.omega_bar;

    const int bh = s.prof1.base_harmonic;
    if (n != 0) {
        if (cfg.retune) {
            s.omega_drive = calibrated_drive_frequency(cfg.system, p1, p2, n);
            p1.omega_p = s.omega_drive;
            p2.omega_p = s.omega_drive;
        } else {
            if (p1.omega_p != p2.omega_p)
                throw resonance_mismatch_error("dual drive: programmed omega_p differ");
            s.omega_drive = p1.omega_p;
            const double mismatch = s.delta_bar + n * bh * s.omega_drive;
            const double tol = std::max(std::abs(cfg.system.g), 1e-4);
            if (std::abs(mismatch) > tol) {
                std::ostringstream msg;
                msg << "dual drive: resonance mismatch Delta_bar + n*omega_eff = " << mismatch
                    << " GHz exceeds " << tol << " GHz";
                throw resonance_mismatch_error(msg.str());
            }
        }
    } else {
        if (p1.omega_p != p2.omega_p)
            throw resonance_mismatch_error("dual drive: programmed omega_p differ");
        s.omega_drive = p1.omega_p;
    }
    s.omega_eff = bh * s.omega_drive;
    if (!(s.omega_drive > 0.0))
        throw degenerate_drive_error("dual drive: omega_p must be positive");
    return s;
}

// Phase sweep body shared by the first-order runner and the parametric-
// resonance (n = 0) runner.
SweepGrid phase_sweep_impl(const ExperimentConfig& cfg, int n) {
    ExperimentConfig c = cfg;
    c.validate();
    if (!(c.pulse1.phi_tilde > 0.0) || !(c.pulse2.phi_tilde > 0.0))
        throw config_error("phase sweep: both pulses must be modulated");

    DualDriveSetup setup = dual_drive_setup(c, c.pulse1, c.pulse2, n);
    const double eps1 = setup.prof1.excursion;
    const double eps2 = setup.prof2.excursion;
    const double g = c.system.g;

    const std::vector<double> dphi = c.sweep.values();
    std::vector<double> analytic(dphi.size());
    double slowest = 1e9;
    for (std::size_t i = 0; i < dphi.size(); ++i) {
        const PhaseCoupling pc =
            phase_coupling(g, eps1, eps2, setup.omega_drive, dphi[i], n, setup.flags);
        analytic[i] = 2.0 * std::abs(pc.magnitude);
        if (analytic[i] > fit_floor_ghz) slowest = std::min(slowest, analytic[i]);
    }
    const double window = auto_window_s(slowest, c.t_final);
    const double dt = c.dt > 0.0 ? c.dt : default_time_step(c.system, c.pulse1, c.pulse2);

    SweepGrid grid;
    grid.x_name = "delta_phi_p[rad]";
    grid.y_name = "time[s]";
    grid.x = dphi;
    grid.z.resize(dphi.size());
    grid.summary.resize(dphi.size());

    std::vector<std::vector<double>> times(dphi.size());
    parallel_for_indexed(static_cast<int>(dphi.size()), c.workers, [&](int i) {
        FluxPulse p1 = c.pulse1, p2 = c.pulse2;
        p1.phi_p = dphi[i];
        p2.phi_p = 0.0;
        const TimeTrace trace = evolve(c.system, p1, p2, "10", window, dt);
        grid.z[i] = trace.channel("10");
        times[i] = trace.times;
        grid.summary[i] = fit_or_flag(dphi[i], trace, analytic[i]);
    });
    grid.y = times.front();

    grid.metadata["experiment"] = n == 0 ? "param-res" : "phase-sweep";
    grid.metadata["order"] = std::to_string(n);
    grid.metadata["omega_p_drive_ghz"] = fmt(setup.omega_drive);
    grid.metadata["omega_p_effective_ghz"] = fmt(setup.omega_eff);
    grid.metadata["delta_bar_ghz"] = fmt(setup.delta_bar);
    grid.metadata["eps1_ghz"] = fmt(eps1);
    grid.metadata["eps2_ghz"] = fmt(eps2);
    grid.metadata["window_s"] = fmt(window);
    grid.metadata["dt_s"] = fmt(dt);
    return grid;
}

void bin_peaks(const SidebandSpectrum& spec, const std::vector<double>& probe,
               std::vector<double>& column) {
    if (probe.size() < 2) return;
    const double lo = probe.front();
    const double step = (probe.back() - lo) / double(probe.size() - 1);
    for (const auto& peak : spec.peaks) {
        const long idx = std::lround((peak.frequency - lo) / step);
        if (idx >= 0 && idx < static_cast<long>(column.size())) column[idx] += peak.weight;
    }
}

} // namespace

std::vector<double> AxisSpec::values() const {
    if (points < 1) throw config_error("axis '" + name + "': points must be >= 1");
    std::vector<double> v(points);
    if (points == 1) {
        v[0] = start;
        return v;
    }
    const double h = (stop - start) / double(points - 1);
    for (int i = 0; i < points; ++i) v[i] = start + h * i;
    return v;
}

double AxisSpec::step() const {
    return points > 1 ? (stop - start) / double(points - 1) : 0.0;
}

void ExperimentConfig::validate() const {
    system.validate();
    pulse1.validate();
    pulse2.validate();
    if (coupler) coupler->validate();
    if (sweep.points < 1) throw config_error("sweep axis must have at least one point");
    if (std::abs(order) > 5) throw config_error("sideband order |n| must be <= 5");
    if (workers < 1) throw config_error("workers must be >= 1");
    if (t_final < 0.0 || dt < 0.0) throw config_error("t_final and dt must be >= 0");
}

ModulationProfile drive_profile(const TransmonParams& params, const FluxPulse& pulse, int k_max) {
    if (pulse.phi_tilde == 0.0 || pulse.omega_p == 0.0) {
        ModulationProfile p;
        const double flux = pulse.phi_tilde == 0.0 ? pulse.phi_bar : pulse.flux_at(0.0);
        p.omega_bar = qubit_frequency(params, flux);
        p.fourier = {p.omega_bar};
        p.base_harmonic = std::abs(pulse.phi_bar) < 1e-9 ? 2 : 1;
        p.excursion = 0.0;
        return p;
    }
    return fourier_coefficients(params, pulse, k_max);
}

double resonant_drive_frequency(const TwoQubitSystem& system, const FluxPulse& p1,
                                const FluxPulse& p2, int n) {
    if (n == 0)
        throw resonance_mismatch_error(
            "resonant_drive_frequency: n = 0 fixes the averaged frequencies, not omega_p");
    const ModulationProfile prof1 = drive_profile(system.q1, p1);
    const ModulationProfile prof2 = drive_profile(system.q2, p2);

    const bool driven1 = p1.phi_tilde > 0.0;
    const bool driven2 = p2.phi_tilde > 0.0;
    int bh = 0;
    if (driven1 && driven2) {
        if (prof1.base_harmonic != prof2.base_harmonic)
            throw resonance_mismatch_error(
                "resonant_drive_frequency: base harmonics differ between the drives");
        bh = prof1.base_harmonic;
    } else if (driven1) {
        bh = prof1.base_harmonic;
    } else if (driven2) {
        bh = prof2.base_harmonic;
    } else {
        throw degenerate_drive_error("resonant_drive_frequency: no modulated pulse");
    }

    const double delta_bar = prof2.omega_bar - prof1.omega_bar;
    const double omega_eff = -delta_bar / double(n);
    if (!(omega_eff > 0.0)) {
        std::ostringstream msg;
        msg << "resonant_drive_frequency: Delta_bar = " << delta_bar << " GHz needs n of sign "
            << (delta_bar > 0 ? "-" : "+") << std::abs(n) << " to close the sideband";
        throw resonance_mismatch_error(msg.str());
    }
    return omega_eff / bh;
}

double calibrated_drive_frequency(const TwoQubitSystem& system, const FluxPulse& p1,
                                  const FluxPulse& p2, int n) {
    const double first_order = resonant_drive_frequency(system, p1, p2, n);
    const ModulationProfile prof1 = drive_profile(system.q1, p1);
    const ModulationProfile prof2 = drive_profile(system.q2, p2);
    const int bh = p1.phi_tilde > 0.0 ? prof1.base_harmonic : prof2.base_harmonic;
    const double delta_bar = prof2.omega_bar - prof1.omega_bar;
    const double eps1 = prof1.excursion;
    const double eps2 = prof2.excursion;
    const double g = system.g;

    double omega_eff = bh * first_order;
    for (int iter = 0; iter < 40; ++iter) {
        const double a_ref = std::abs(eps1 - eps2) / omega_eff;
        double shift = 0.0;
        for (int m = n - 4; m <= n + 4; ++m) {
            if (m == n) continue;
            const double c = g * bessel_jn(m, a_ref);
            shift += 2.0 * c * c / ((m - n) * omega_eff);
        }
        const double next = -(delta_bar + shift) / double(n);
        if (!(next > 0.0))
            throw resonance_mismatch_error(
                "calibrated_drive_frequency: corrected sideband closes at a non-positive "
                "frequency");
        if (std::abs(next - omega_eff) < 1e-15) {
            omega_eff = next;
            break;
        }
        omega_eff = next;
    }
    return omega_eff / bh;
}

double phi_tilde_for_excursion(const TransmonParams& params, const FluxPulse& base,
                               double eps_target) {
    if (eps_target < 0.0)
        throw domain_error("phi_tilde_for_excursion: target excursion must be >= 0");
    if (eps_target == 0.0) return 0.0;
    auto eps_of = [&](double phi_tilde) {
        FluxPulse p = base;
        p.phi_tilde = phi_tilde;
        p.omega_p = base.omega_p > 0.0 ? base.omega_p : 0.1;
        return fourier_coefficients(params, p, 4).excursion;
    };
    const double hi = 0.5 - std::abs(base.phi_bar) - 1e-6;
    if (eps_of(hi) < eps_target) {
        std::ostringstream msg;
        msg << "phi_tilde_for_excursion: excursion " << eps_target
            << " GHz unreachable within the flux domain";
        throw no_solution_error(msg.str());
    }
    double lo = 0.0, up = hi;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + up);
        (eps_of(mid) < eps_target ? lo : up) = mid;
    }
    return 0.5 * (lo + up);
}

std::pair<FluxPulse, FluxPulse> tune_excursion_ratios(const TwoQubitSystem& system, FluxPulse p1,
                                                      FluxPulse p2, double ratio1, double ratio2,
                                                      int n) {
    if (!(ratio1 > 0.0) || ratio2 < 0.0)
        throw domain_error("tune_excursion_ratios: ratio1 must be > 0 and ratio2 >= 0");
    if (p1.phi_tilde <= 0.0) p1.phi_tilde = 0.01;
    if (ratio2 == 0.0) p2.phi_tilde = 0.0; // single-drive tuning
    else if (p2.phi_tilde <= 0.0) p2.phi_tilde = 0.01;

    double omega_prev = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double omega_drive = calibrated_drive_frequency(system, p1, p2, n);
        const int bh = base_harmonic_of(p1);
        const double omega_eff = bh * omega_drive;
        p1.phi_tilde = phi_tilde_for_excursion(system.q1, p1, ratio1 * omega_eff);
        if (ratio2 > 0.0)
            p2.phi_tilde = phi_tilde_for_excursion(system.q2, p2, ratio2 * omega_eff);
        p1.omega_p = omega_drive;
        p2.omega_p = omega_drive;
        if (std::abs(omega_drive - omega_prev) < 1e-12) return {p1, p2};
        omega_prev = omega_drive;
    }
    throw numeric_error("tune_excursion_ratios: fixed point did not converge");
}

std::pair<FluxPulse, FluxPulse> tune_parametric_resonance(const TwoQubitSystem& system,
                                                          FluxPulse p1, FluxPulse p2,
                                                          bool match_excursions) {
    if (!match_excursions) {
        // pulse2 stays; pulse1's amplitude pulls qubit 1 down to the target
        auto omega_bar1 = [&](double phi_tilde) {
            FluxPulse p = p1;
            p.phi_tilde = phi_tilde;
            return drive_profile(system.q1, p, 4).omega_bar;
        };
        const double hi1 = 0.5 - std::abs(p1.phi_bar) - 1e-6;
        const double target = drive_profile(system.q2, p2, 4).omega_bar;
        if (omega_bar1(0.0) < target || omega_bar1(hi1) > target)
            throw no_solution_error(
                "tune_parametric_resonance: averaged frequencies cannot be matched by "
                "modulating qubit 1 (park it above qubit 2)");
        double lo = 0.0, up = hi1;
        for (int i = 0; i < 90; ++i) {
            const double mid = 0.5 * (lo + up);
            (omega_bar1(mid) > target ? lo : up) = mid;
        }
        p1.phi_tilde = 0.5 * (lo + up);
        return {p1, p2};
    }

    // joint tuning: pulse1's amplitude is slaved to pulse2's excursion, and
    // pulse2's amplitude closes the averaged-frequency gap (the dc shifts
    // scale differently on the two slopes, so the gap is monotone in it)
    auto matched_at = [&](double phi2) {
        FluxPulse b2 = p2;
        b2.phi_tilde = phi2;
        const double eps2 = phi2 == 0.0 ? 0.0 : drive_profile(system.q2, b2, 4).excursion;
        FluxPulse b1 = p1;
        b1.phi_tilde = eps2 == 0.0 ? 0.0 : phi_tilde_for_excursion(system.q1, b1, eps2);
        return std::pair{b1, b2};
    };
    auto gap_at = [&](double phi2) {
        const auto [b1, b2] = matched_at(phi2);
        return drive_profile(system.q1, b1, 4).omega_bar -
               drive_profile(system.q2, b2, 4).omega_bar;
    };

    double lo = 0.0;
    double hi = 0.5 - std::abs(p2.phi_bar) - 1e-6;
    const double gap_lo = gap_at(lo);
    double gap_hi = 0.0;
    for (;;) { // shrink until pulse1 can still match the excursion
        try {
            gap_hi = gap_at(hi);
            break;
        } catch (const no_solution_error&) {
            hi *= 0.85;
            if (hi < 1e-6)
                throw no_solution_error(
                    "tune_parametric_resonance: no excursion-matched amplitude window");
        }
    }
    if (gap_lo == 0.0) return matched_at(lo);
    if ((gap_lo > 0.0) == (gap_hi > 0.0))
        throw no_solution_error(
            "tune_parametric_resonance: averaged-frequency gap does not change sign over "
            "the matched-excursion amplitude range");
    for (int i = 0; i < 90; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((gap_at(mid) > 0.0) == (gap_lo > 0.0) ? lo : hi) = mid;
    }
    return matched_at(0.5 * (lo + hi));
}

SweepGrid run_phase_sweep(const ExperimentConfig& cfg) {
    const int n = cfg.order == 0 ? 1 : cfg.order;
    return phase_sweep_impl(cfg, n);
}

SweepGrid run_parametric_resonance(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    if (c.retune) {
        auto tuned = tune_parametric_resonance(c.system, c.pulse1, c.pulse2, false);
        c.pulse1 = tuned.first;
        c.pulse2 = tuned.second;
    }
    const double w1 = drive_profile(c.system.q1, c.pulse1).omega_bar;
    const double w2 = drive_profile(c.system.q2, c.pulse2).omega_bar;
    if (std::abs(w1 - w2) > 1e-4) {
        std::ostringstream msg;
        msg << "param-res: averaged frequencies detuned by " << (w2 - w1)
            << " GHz (tolerance 1e-4); tune the amplitudes or enable retune";
        throw resonance_mismatch_error(msg.str());
    }
    c.retune = false; // resonance is by averaged frequencies; omega_p stays as configured
    c.order = 0;
    return phase_sweep_impl(c, 0);
}

SweepGrid run_chevron(const ExperimentConfig& cfg, ChevronAxis axis) {
    ExperimentConfig c = cfg;
    c.validate();
    const bool dual = c.pulse2.phi_tilde > 0.0;
    const int n = c.order == 0 ? 1 : c.order;

    // analytic resonance for the configured pulses
    const double omega_center = calibrated_drive_frequency(c.system, c.pulse1, c.pulse2, n);
    if (axis != ChevronAxis::omega_p || !c.retune) {
        if (c.retune) {
            c.pulse1.omega_p = omega_center;
            c.pulse2.omega_p = omega_center;
        }
    }

    const std::vector<double> axis_values = c.sweep.values();
    std::vector<double> omega_p_values = axis_values;
    if (axis == ChevronAxis::omega_p && c.retune)
        for (double& v : omega_p_values) v += omega_center; // offsets around the model resonance

    // expected coupling at the resonant column sizes the window
    const ModulationProfile prof1 = drive_profile(c.system.q1, c.pulse1);
    const ModulationProfile prof2 = drive_profile(c.system.q2, c.pulse2);
    const int bh = prof1.base_harmonic;
    double strongest = fit_floor_ghz;
    {
        const double eps1 = prof1.excursion, eps2 = prof2.excursion;
        const double omega_eff = bh * omega_center;
        double a = dual ? std::abs(bessel_argument_a(eps1, eps2, omega_eff,
                                                     bh * (c.pulse1.phi_p - c.pulse2.phi_p)))
                        : eps1 / omega_eff;
        strongest = std::max(2.0 * std::abs(c.system.g * bessel_jn(n, a)), fit_floor_ghz);
    }
    const double window = c.t_final > 0.0 ? c.t_final : 3.5 / strongest * 1e-9;

    // the finest step over the sweep keeps trace lengths identical
    double dt = c.dt;
    if (dt == 0.0) {
        FluxPulse p1 = c.pulse1;
        if (axis == ChevronAxis::phi_tilde)
            p1.phi_tilde = std::max(std::abs(c.sweep.start), std::abs(c.sweep.stop));
        dt = default_time_step(c.system, p1, c.pulse2);
    }

    SweepGrid grid;
    grid.x_name = axis == ChevronAxis::dphi      ? "delta_phi_p[rad]"
                  : axis == ChevronAxis::omega_p ? "omega_p[GHz]"
                                                 : "phi_tilde[Phi0]";
    grid.y_name = "time[s]";
    grid.x = axis == ChevronAxis::omega_p ? omega_p_values : axis_values;
    grid.z.resize(axis_values.size());
    grid.summary.resize(axis_values.size());
    std::vector<std::vector<double>> times(axis_values.size());
    std::vector<double> contrast(axis_values.size(), 0.0);

    parallel_for_indexed(static_cast<int>(axis_values.size()), c.workers, [&](int i) {
        FluxPulse p1 = c.pulse1, p2 = c.pulse2;
        switch (axis) {
        case ChevronAxis::dphi:
            p1.phi_p = axis_values[i];
            p2.phi_p = 0.0;
            break;
        case ChevronAxis::omega_p:
            p1.omega_p = omega_p_values[i];
            p2.omega_p = omega_p_values[i];
            break;
        case ChevronAxis::phi_tilde:
            p1.phi_tilde = axis_values[i];
            break;
        }
        const TimeTrace trace = evolve(c.system, p1, p2, "10", window, dt);
        const auto& p10 = trace.channel("10");
        grid.z[i] = p10;
        times[i] = trace.times;
        contrast[i] = 1.0 - *std::min_element(p10.begin(), p10.end());
        grid.summary[i] = fit_or_flag(grid.x[i], trace, 0.0);
    });
    grid.y = times.front();

    if (axis == ChevronAxis::omega_p) {
        double wsum = 0.0, wxsum = 0.0;
        for (std::size_t i = 0; i < contrast.size(); ++i) {
            wsum += contrast[i];
            wxsum += contrast[i] * omega_p_values[i];
        }
        grid.metadata["resonance_center_measured_ghz"] = fmt(wsum > 0.0 ? wxsum / wsum : 0.0);
        grid.metadata["resonance_center_analytic_ghz"] = fmt(omega_center);
        grid.metadata["grid_step_ghz"] = fmt(c.sweep.step());
    }
    grid.metadata["experiment"] = "chevron";
    grid.metadata["order"] = std::to_string(n);
    grid.metadata["window_s"] = fmt(window);
    grid.metadata["dt_s"] = fmt(dt);
    grid.metadata["delta_bar_ghz"] = fmt(prof2.omega_bar - prof1.omega_bar);
    return grid;
}

SweepGrid run_amplitude_coupling(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    if (c.pulse1.phi_tilde > 0.0 && c.pulse2.phi_tilde > 0.0)
        throw config_error("amp-coupling: single drive required (one pulse must be static)");
    const bool drive_q1 = c.pulse1.phi_tilde > 0.0;
    const int n = c.order == 0 ? 1 : c.order;

    const std::vector<double> amplitudes = c.sweep.values();
    const TransmonParams& driven_params = drive_q1 ? c.system.q1 : c.system.q2;
    FluxPulse driven_base = drive_q1 ? c.pulse1 : c.pulse2;
    const FluxPulse static_pulse = drive_q1 ? c.pulse2 : c.pulse1;

    // unmodulated reference resonance
    const double nu1_park = qubit_frequency(c.system.q1, c.pulse1.phi_bar);
    const double nu2_park = qubit_frequency(c.system.q2, c.pulse2.phi_bar);
    const double omega_p0 = std::abs(nu2_park - nu1_park) / double(std::abs(n));

    struct Point {
        double omega_analytic = 0.0;
        double omega_found = 0.0;
        double expected = 0.0; // Eq-8 style 2|g J_n|
        double eps = 0.0;
    };
    std::vector<Point> pts(amplitudes.size());

    // analytic pre-pass for windows and scan centers
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        FluxPulse p = driven_base;
        p.phi_tilde = amplitudes[i];
        p.omega_p = p.omega_p > 0.0 ? p.omega_p : 0.1;
        const auto [pd, ps] = drive_q1 ? std::pair{p, static_pulse} : std::pair{static_pulse, p};
        pts[i].omega_analytic = calibrated_drive_frequency(c.system, pd, ps, n);
        pts[i].eps = drive_profile(driven_params, p).excursion;
        const int bh = base_harmonic_of(p);
        pts[i].expected = 2.0 * std::abs(c.system.g *
                                         bessel_jn(n, pts[i].eps / (bh * pts[i].omega_analytic)));
    }
    double slowest = fit_floor_ghz * 4.0;
    for (const auto& p : pts)
        if (p.expected > fit_floor_ghz) slowest = std::min(slowest, p.expected);
    const double window = auto_window_s(slowest, c.t_final);

    FluxPulse worst = driven_base;
    worst.phi_tilde = std::max(std::abs(c.sweep.start), std::abs(c.sweep.stop));
    const double dt = c.dt > 0.0 ? c.dt
                                 : default_time_step(c.system, drive_q1 ? worst : static_pulse,
                                                     drive_q1 ? static_pulse : worst);

    SweepGrid grid;
    grid.x_name = "phi_tilde[Phi0]";
    grid.y_name = "time[s]";
    grid.x = amplitudes;
    grid.z.resize(amplitudes.size());
    grid.summary.resize(amplitudes.size());
    std::vector<std::vector<double>> times(amplitudes.size());
    std::vector<double> omega_found(amplitudes.size()), delta_p(amplitudes.size());

    parallel_for_indexed(static_cast<int>(amplitudes.size()), c.workers, [&](int i) {
        FluxPulse p = driven_base;
        p.phi_tilde = amplitudes[i];

        // probe one drive frequency: the fitted population frequency traces
        // the chevron V whose minimum is the resonance; off the clean sideband
        // regime the damped-cosine residual blows up and the point is gated out
        struct Probe {
            double contrast = 0.0;
            double freq = 1e9;
            bool clean = false;
        };
        auto probe_at = [&](double omega_p) {
            FluxPulse pd = p;
            pd.omega_p = omega_p;
            FluxPulse ps = static_pulse;
            const double t_scan = 3.2 / std::max(pts[i].expected, fit_floor_ghz) * 1e-9;
            const TimeTrace tr = evolve(c.system, drive_q1 ? pd : ps, drive_q1 ? ps : pd, "10",
                                        t_scan, dt, {512, false, true});
            const auto& p10 = tr.channel("10");
            Probe pr;
            pr.contrast = 1.0 - *std::min_element(p10.begin(), p10.end());
            try {
                const DampedCosineFit fit = fit_damped_cosine(tr, "10");
                pr.freq = fit.frequency;
                pr.clean = pr.contrast > 0.3 && fit.residual_rms < 0.08 &&
                           fit.amplitude > min_fit_amplitude;
            } catch (const no_oscillation_error&) {
            }
            return pr;
        };

        // coarse scan +-20 MHz around the analytic resonance (floored away
        // from the sideband-overlap region), then golden section on the V
        const int n_scan = 21;
        const double lo_guard = std::max(pts[i].omega_analytic - 0.020,
                                         0.35 * pts[i].omega_analytic);
        const double hi_guard = pts[i].omega_analytic + 0.020;
        double best_omega = pts[i].omega_analytic;
        double best_freq = 1e9;
        double best_contrast = -1.0;
        double best_contrast_omega = pts[i].omega_analytic;
        const double scan_step = (hi_guard - lo_guard) / (n_scan - 1);
        for (int k = 0; k < n_scan; ++k) {
            const double w = lo_guard + k * scan_step;
            const Probe pr = probe_at(w);
            if (pr.clean && pr.freq < best_freq) {
                best_freq = pr.freq;
                best_omega = w;
            }
            if (pr.contrast > best_contrast) {
                best_contrast = pr.contrast;
                best_contrast_omega = w;
            }
        }
        if (best_freq == 1e9) best_omega = best_contrast_omega; // no clean fit anywhere
        {
            auto v_height = [&](double w) {
                const Probe pr = probe_at(w);
                return pr.clean ? pr.freq : 1e9;
            };
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double a = best_omega - scan_step, b = best_omega + scan_step;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = v_height(x1), f2 = v_height(x2);
            while (b - a > 5e-5) {
                if (f1 > f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = v_height(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = v_height(x1);
                }
            }
            best_omega = 0.5 * (a + b);
        }
        omega_found[i] = best_omega;
        delta_p[i] = std::abs(best_omega - omega_p0);

        FluxPulse pd = p;
        pd.omega_p = best_omega;
        const TimeTrace trace = evolve(c.system, drive_q1 ? pd : static_pulse,
                                       drive_q1 ? static_pulse : pd, "10", window, dt);
        grid.z[i] = trace.channel("10");
        times[i] = trace.times;
        const int bh = base_harmonic_of(pd);
        const double expected =
            2.0 * std::abs(c.system.g * bessel_jn(n, pts[i].eps / (bh * best_omega)));
        grid.summary[i] = fit_or_flag(amplitudes[i], trace, expected);
    });
    grid.y = times.front();

    grid.metadata["experiment"] = "amp-coupling";
    grid.metadata["order"] = std::to_string(n);
    grid.metadata["driven_qubit"] = drive_q1 ? "1" : "2";
    grid.metadata["omega_p0_ghz"] = fmt(omega_p0);
    grid.metadata["omega_p_ghz"] = join(omega_found);
    grid.metadata["delta_p_ghz"] = join(delta_p);
    grid.metadata["window_s"] = fmt(window);
    grid.metadata["dt_s"] = fmt(dt);
    return grid;
}

SweepGrid run_spectroscopy(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    if (!(c.pulse2.phi_tilde > 0.0) || !(c.pulse1.phi_tilde > 0.0))
        throw config_error("spectroscopy: dual drives required");
    const bool sweep_amplitude = c.sweep.name == "phi_tilde";
    const int n = c.order == 0 ? 1 : c.order;
    const int n_max = std::max(3, std::abs(n) + 2);

    DualDriveSetup setup = dual_drive_setup(c, c.pulse1, c.pulse2, n);
    const int bh = setup.prof1.base_harmonic;

    std::vector<double> probe = c.probe.points > 1 ? c.probe.values() : std::vector<double>{};
    if (probe.empty()) {
        AxisSpec auto_probe{"probe[GHz]",
                            setup.prof1.omega_bar - (n_max + 0.5) * setup.omega_eff,
                            setup.prof1.omega_bar + (n_max + 0.5) * setup.omega_eff, 401};
        probe = auto_probe.values();
    }

    const std::vector<double> axis = c.sweep.values();
    SweepGrid grid;
    grid.x_name = sweep_amplitude ? "phi_tilde[Phi0]" : "delta_phi_p[rad]";
    grid.y_name = "probe[GHz]";
    grid.x = axis;
    grid.y = probe;
    grid.z.assign(axis.size(), std::vector<double>(probe.size(), 0.0));
    grid.summary.resize(axis.size());

    parallel_for_indexed(static_cast<int>(axis.size()), c.workers, [&](int i) {
        FluxPulse p1 = c.pulse1, p2 = c.pulse2;
        double dphi = p1.phi_p - p2.phi_p;
        if (sweep_amplitude) {
            p1.phi_tilde = axis[i];
        } else {
            dphi = axis[i];
        }
        const ModulationProfile prof1 =
            sweep_amplitude ? drive_profile(c.system.q1, p1) : setup.prof1;
        const ModulationProfile& prof2 = setup.prof2;

        const PhaseCoupling pc = phase_coupling(c.system.g, prof1.excursion, prof2.excursion,
                                                setup.omega_drive, dphi, n, setup.flags);
        const double gj = std::abs(pc.magnitude);

        SidebandSpectrum spec = sideband_spectrum(prof1, p1, n_max);
        // dress the sideband crossing the partner line omega_bar_2; the
        // crossing detuning carries the same off-resonant sideband Stark
        // shifts the time-domain oscillation sees
        const int k_res = -n;
        const std::size_t res_idx = static_cast<std::size_t>(k_res + n_max);
        const double f_bare = spec.peaks[res_idx].frequency;
        const double w_bare = spec.peaks[res_idx].weight;
        const double omega_eff = bh * setup.omega_drive;
        double stark = 0.0;
        for (int m = n - 4; m <= n + 4; ++m) {
            if (m == n) continue;
            const double cm = c.system.g * bessel_jn(m, pc.argument_a);
            stark += 2.0 * cm * cm / ((m - n) * omega_eff);
        }
        const double delta = (prof2.omega_bar - prof1.omega_bar) + n * omega_eff + stark;
        const double split = std::sqrt(0.25 * delta * delta + gj * gj);
        const double center = 0.5 * (f_bare + prof2.omega_bar);
        const double theta = 0.5 * std::atan2(2.0 * gj, -delta);
        const double cu = std::cos(theta), su = std::sin(theta);
        SidebandSpectrum dressed = spec;
        dressed.peaks[res_idx] = {center + split, w_bare * cu * cu};
        dressed.peaks.push_back({center - split, w_bare * su * su});

        bin_peaks(dressed, probe, grid.z[i]);
        grid.summary[i] = {axis[i], 2.0 * split, 0.0, 0, 2.0 * gj};
    });

    grid.metadata["experiment"] = "spectroscopy";
    grid.metadata["order"] = std::to_string(n);
    grid.metadata["omega_p_drive_ghz"] = fmt(setup.omega_drive);
    grid.metadata["base_harmonic"] = std::to_string(bh);
    return grid;
}

SweepGrid run_transfer_calibration(const ExperimentConfig& cfg, const TransferTable& table) {
    ExperimentConfig c = cfg;
    c.validate();
    table.validate();
    if (!(c.pulse1.phi_tilde > 0.0))
        throw config_error("transfer: pulse1 must carry the programmed amplitude");

    const std::vector<double> omegas = c.sweep.values();
    for (double w : omegas) {
        if (w < table.min_frequency() || w > table.max_frequency()) {
            std::ostringstream msg;
            msg << "transfer: omega_p " << w << " GHz outside the transfer table range ["
                << table.min_frequency() << ", " << table.max_frequency() << "]";
            throw config_error(msg.str());
        }
    }

    const double phi_prog = c.pulse1.phi_tilde;
    const double nu_park = qubit_frequency(c.system.q1, c.pulse1.phi_bar);

    SweepGrid grid;
    grid.x_name = "omega_p[GHz]";
    grid.y_name = "row[0=dc_shift_ghz,1=t_recovered]";
    grid.x = omegas;
    grid.y = {0.0, 1.0};
    grid.z.assign(omegas.size(), std::vector<double>(2, 0.0));
    grid.summary.resize(omegas.size());

    parallel_for_indexed(static_cast<int>(omegas.size()), c.workers, [&](int i) {
        const double t_factor = table.factor_at(omegas[i]);
        FluxPulse p = c.pulse1;
        p.omega_p = omegas[i];
        p.phi_tilde = t_factor * phi_prog;
        const double shift = fourier_coefficients(c.system.q1, p, 4).omega_bar - nu_park;
        const double recovered =
            excursion_from_shift(c.system.q1, p.phi_bar, omegas[i], shift);
        const double t_rec = recovered / phi_prog;
        grid.z[i][0] = shift;
        grid.z[i][1] = t_rec;
        grid.summary[i] = {omegas[i], t_rec, std::abs(t_rec - t_factor), 0, t_factor};
    });

    grid.metadata["experiment"] = "transfer";
    grid.metadata["phi_tilde_programmed"] = fmt(phi_prog);
    return grid;
}

SweepGrid run_coupler_sweep(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    if (!c.coupler) throw config_error("coupler-sweep: coupler parameters required");
    const double nu1 = qubit_frequency(c.system.q1, c.pulse1.phi_bar);
    const double nu2 = qubit_frequency(c.system.q2, c.pulse2.phi_bar);
    if (std::abs(nu1 - nu2) > 1e-6) {
        std::ostringstream msg;
        msg << "coupler-sweep: qubits must be biased to resonance (detuning " << (nu2 - nu1)
            << " GHz)";
        throw resonance_mismatch_error(msg.str());
    }

    const std::vector<double> fluxes = c.sweep.values();
    std::vector<double> g_model(fluxes.size(), 0.0);
    std::vector<int> valid(fluxes.size(), 1);
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        CouplerParams cp = *c.coupler;
        cp.flux_c = fluxes[i];
        try {
            g_model[i] = coupler_mediated_coupling(nu1, nu2, cp);
        } catch (const model_validity_error&) {
            valid[i] = 0; // hybridized point, reported but not evaluated
        }
    }

    SweepGrid grid;
    grid.x_name = "flux_c[Phi0]";
    grid.y_name = "time[s]";
    grid.x = fluxes;
    grid.z.resize(fluxes.size());
    grid.summary.resize(fluxes.size());
    std::vector<std::vector<double>> times(fluxes.size());

    // cross-check window sized by the weakest usable coupling
    double slowest = fit_floor_ghz * 4.0;
    for (std::size_t i = 0; i < fluxes.size(); ++i)
        if (valid[i] && 2.0 * std::abs(g_model[i]) > fit_floor_ghz)
            slowest = std::min(slowest, 2.0 * std::abs(g_model[i]));
    const double window = auto_window_s(slowest, c.t_final);

    parallel_for_indexed(static_cast<int>(fluxes.size()), c.workers, [&](int i) {
        if (!valid[i]) {
            grid.summary[i] = {fluxes[i], 0.0, 0.0, 2, 0.0};
            return;
        }
        const double expected = 2.0 * std::abs(g_model[i]);
        if (expected < 2.0 * fit_floor_ghz) {
            grid.summary[i] = {fluxes[i], 0.0, 0.0, 1, expected};
            return;
        }
        TwoQubitSystem sys = c.system;
        sys.levels = 2;
        sys.g = g_model[i];
        FluxPulse quiet1{c.pulse1.phi_bar, 0.0, 0.0, 0.0};
        FluxPulse quiet2{c.pulse2.phi_bar, 0.0, 0.0, 0.0};
        const TimeTrace trace = evolve(sys, quiet1, quiet2, "10", window, c.dt);
        grid.z[i] = trace.channel("10");
        times[i] = trace.times;
        grid.summary[i] = fit_or_flag(fluxes[i], trace, expected);
    });
    for (auto& t : times)
        if (!t.empty()) grid.y = t; // any evaluated column defines the time axis

    // zero crossing, if bracketed on the evaluated part of the sweep
    for (std::size_t i = 1; i < fluxes.size(); ++i) {
        if (valid[i - 1] && valid[i] && g_model[i - 1] * g_model[i] < 0.0) {
            const double zero = find_zero_coupling_flux(nu1, nu2, *c.coupler, fluxes[i - 1],
                                                        fluxes[i]);
            grid.metadata["zero_coupling_flux"] = fmt(zero);
            break;
        }
    }
    grid.metadata["experiment"] = "coupler-sweep";
    grid.metadata["g_model_ghz"] = join(g_model);
    grid.metadata["resonance_ghz"] = fmt(nu1);
    grid.metadata["reference_2g_ghz"] = fmt(0.021); // operating-point comparison value
    grid.metadata["window_s"] = fmt(window);
    return grid;
}

SweepGrid run_sideband_table(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    const std::vector<double> amplitudes = c.sweep.values();
    const int n_max = 4;

    // probe range from the largest-amplitude profile
    FluxPulse worst = c.pulse1;
    worst.phi_tilde = std::max(std::abs(c.sweep.start), std::abs(c.sweep.stop));
    const ModulationProfile prof_worst = drive_profile(c.system.q1, worst);
    std::vector<double> probe = c.probe.points > 1 ? c.probe.values() : std::vector<double>{};
    if (probe.empty()) {
        const double omega_eff = prof_worst.base_harmonic * c.pulse1.omega_p;
        AxisSpec auto_probe{"probe[GHz]", prof_worst.omega_bar - (n_max + 0.5) * omega_eff,
                            qubit_frequency(c.system.q1, c.pulse1.phi_bar) +
                                (n_max + 0.5) * omega_eff,
                            501};
        probe = auto_probe.values();
    }

    SweepGrid grid;
    grid.x_name = "phi_tilde[Phi0]";
    grid.y_name = "probe[GHz]";
    grid.x = amplitudes;
    grid.y = probe;
    grid.z.assign(amplitudes.size(), std::vector<double>(probe.size(), 0.0));
    grid.summary.resize(amplitudes.size());

    parallel_for_indexed(static_cast<int>(amplitudes.size()), c.workers, [&](int i) {
        FluxPulse p = c.pulse1;
        p.phi_tilde = amplitudes[i];
        const ModulationProfile prof = drive_profile(c.system.q1, p);
        if (p.phi_tilde > 0.0) {
            bin_peaks(sideband_spectrum(prof, p, n_max), probe, grid.z[i]);
        } else if (!probe.empty()) {
            SidebandSpectrum single;
            single.peaks.push_back({prof.omega_bar, 1.0});
            bin_peaks(single, probe, grid.z[i]);
        }
        grid.summary[i] = {amplitudes[i], prof.omega_bar, 0.0, 0, prof.excursion};
    });

    grid.metadata["experiment"] = "spectrum";
    grid.metadata["omega_p_ghz"] = fmt(c.pulse1.omega_p);
    return grid;
}

SweepGrid run_taylor_fourier(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.validate();
    const int order_lo = std::max(1, static_cast<int>(std::lround(c.sweep.start)));
    const int order_hi = std::min(10, static_cast<int>(std::lround(c.sweep.stop)));
    if (order_hi < order_lo) throw config_error("taylor-fourier: empty order range");

    SweepGrid grid;
    grid.x_name = "order";
    grid.y_name = "row[0=fourier_p1,1=taylor_p1,2=fourier_p2,3=taylor_p2]";
    grid.y = {0.0, 1.0, 2.0, 3.0};
    for (int n = order_lo; n <= order_hi; ++n) grid.x.push_back(n);
    grid.z.assign(grid.x.size(), std::vector<double>(4, 0.0));

    auto fourier_truncated = [&](const FluxPulse& pulse, int order) {
        ModulationProfile prof = fourier_coefficients(c.system.q1, pulse, std::max(order, 2));
        prof.fourier.resize(order + 1); // order-1 truncation keeps harmonics k <= 1
        return prof;
    };
    parallel_for_indexed(static_cast<int>(grid.x.size()), c.workers, [&](int i) {
        const int order = static_cast<int>(std::lround(grid.x[i]));
        grid.z[i][0] =
            average_deviation(fourier_truncated(c.pulse1, order), c.system.q1, c.pulse1);
        grid.z[i][1] = average_deviation(taylor_harmonics(c.system.q1, c.pulse1, order),
                                         c.system.q1, c.pulse1);
        grid.z[i][2] =
            average_deviation(fourier_truncated(c.pulse2, order), c.system.q1, c.pulse2);
        grid.z[i][3] = average_deviation(taylor_harmonics(c.system.q1, c.pulse2, order),
                                         c.system.q1, c.pulse2);
    });

    grid.metadata["experiment"] = "taylor-fourier";
    grid.metadata["pulse1"] = fmt(c.pulse1.phi_bar) + ";" + fmt(c.pulse1.phi_tilde);
    grid.metadata["pulse2"] = fmt(c.pulse2.phi_bar) + ";" + fmt(c.pulse2.phi_tilde);
    return grid;
}

SweepGrid run_experiment(const ExperimentConfig& cfg, const TransferTable* table) {
    const std::string& name = cfg.experiment;
    if (name == "phase-sweep") return run_phase_sweep(cfg);
    if (name == "param-res") return run_parametric_resonance(cfg);
    if (name == "chevron") {
        ChevronAxis axis = ChevronAxis::dphi;
        if (cfg.sweep.name == "omega_p") axis = ChevronAxis::omega_p;
        else if (cfg.sweep.name == "phi_tilde") axis = ChevronAxis::phi_tilde;
        else if (cfg.sweep.name != "dphi" && !cfg.sweep.name.empty())
            throw config_error("chevron: sweep axis must be dphi, omega_p or phi_tilde");
        return run_chevron(cfg, axis);
    }
    if (name == "amp-coupling") return run_amplitude_coupling(cfg);
    if (name == "spectroscopy") return run_spectroscopy(cfg);
    if (name == "transfer") {
        if (!table) throw config_error("transfer: a transfer table is required (--transfer)");
        return run_transfer_calibration(cfg, *table);
    }
    if (name == "coupler-sweep") return run_coupler_sweep(cfg);
    if (name == "spectrum") return run_sideband_table(cfg);
    if (name == "taylor-fourier") return run_taylor_fourier(cfg);
    throw config_error("unknown experiment '" + name + "'");
}

} // namespace phasemod
