#include "phasemod/modulation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phasemod/coupling.hpp"

namespace phasemod {

namespace {

constexpr double pi = std::numbers::pi;

bool at_sweet_spot(double phi_bar) { return std::abs(phi_bar) < 1e-9; }

// Composite Simpson over theta in [0, 2pi] of cos(k*theta)*nu(phi_bar + phi_tilde*cos(theta)).
// The drive phase drops out of the coefficients after substitution.
std::vector<double> simpson_coefficients(const TransmonParams& params, const FluxPulse& pulse,
                                         int k_max, int panels) {
    const double h = 2.0 * pi / panels;
    std::vector<double> nu(panels + 1);
    for (int i = 0; i <= panels; ++i)
        nu[i] = qubit_frequency(params, pulse.phi_bar + pulse.phi_tilde * std::cos(i * h));

    std::vector<double> f(k_max + 1, 0.0);
    for (int k = 0; k <= k_max; ++k) {
        double acc = 0.0;
        for (int i = 0; i <= panels; ++i) {
            const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += w * std::cos(k * i * h) * nu[i];
        }
        acc *= h / 3.0;
        f[k] = acc / (pi * (k == 0 ? 2.0 : 1.0));
    }
    return f;
}

void finish_profile(ModulationProfile& p, double phi_bar) {
    p.omega_bar = p.fourier[0];
    p.base_harmonic = at_sweet_spot(phi_bar) ? 2 : 1;
    p.excursion = p.fourier.size() > static_cast<std::size_t>(p.base_harmonic)
                      ? std::abs(p.fourier[p.base_harmonic])
                      : 0.0;
}

} // namespace

double ModulationProfile::reconstruct(const FluxPulse& pulse, double t_s) const {
    const double theta = 2.0 * pi * pulse.omega_p * (t_s * 1e9) + pulse.phi_p;
    double val = 0.0;
    for (std::size_t k = 0; k < fourier.size(); ++k) val += fourier[k] * std::cos(k * theta);
    return val;
}

ModulationProfile fourier_coefficients(const TransmonParams& params, const FluxPulse& pulse,
                                       int k_max) {
    params.validate();
    pulse.validate();
    if (!(pulse.omega_p > 0.0))
        throw domain_error("fourier_coefficients: omega_p must be > 0 (one full period needed)");
    if (k_max < 2) throw domain_error("fourier_coefficients: k_max must be >= 2");

    ModulationProfile p;
    std::vector<double> prev = simpson_coefficients(params, pulse, k_max, 4096);
    for (int panels = 8192; panels <= (1 << 20); panels *= 2) {
        std::vector<double> next = simpson_coefficients(params, pulse, k_max, panels);
        double delta = 0.0;
        for (int k = 0; k <= k_max; ++k) delta = std::max(delta, std::abs(next[k] - prev[k]));
        prev = std::move(next);
        if (delta < 1e-9) {
            p.fourier = std::move(prev);
            finish_profile(p, pulse.phi_bar);
            return p;
        }
    }
    throw numeric_error("fourier_coefficients: quadrature did not converge (period under-resolved)");
}

ModulationProfile taylor_harmonics(const TransmonParams& params, const FluxPulse& pulse,
                                   int order) {
    params.validate();
    pulse.validate();
    if (order < 1 || order > 10) throw domain_error("taylor_harmonics: order must be in 1..10");

    // Power reduction of [phi_tilde*cos(theta)]^n: the dc part keeps the
    // central binomial of even n, harmonic m collects C(n, (n-m)/2) from every
    // n >= m of matching parity.
    ModulationProfile p;
    p.fourier.assign(order + 1, 0.0);
    p.fourier[0] = qubit_frequency(params, pulse.phi_bar);

    double factorial = 1.0;
    for (int n = 1; n <= order; ++n) {
        factorial *= n;
        const double deriv = dfreq_dflux(params, pulse.phi_bar, n);
        const double scale = std::pow(pulse.phi_tilde, n) / (std::pow(2.0, n) * factorial);

        // C(n, j) walked incrementally over j
        double binom = 1.0;
        for (int j = 0; j <= n; ++j) {
            const int m = n - 2 * j;
            if (m == 0) {
                p.fourier[0] += scale * deriv * binom;
            } else if (m > 0) {
                p.fourier[m] += 2.0 * scale * deriv * binom;
            }
            binom = binom * (n - j) / (j + 1);
        }
    }
    finish_profile(p, pulse.phi_bar);
    return p;
}

double average_deviation(const ModulationProfile& approx, const TransmonParams& params,
                         const FluxPulse& pulse) {
    params.validate();
    pulse.validate();
    if (!(pulse.omega_p > 0.0))
        throw domain_error("average_deviation: omega_p must be > 0 (one full period needed)");

    const int n_grid = 1000;
    const double period_s = 1.0 / (pulse.omega_p * 1e9);
    std::vector<double> grid(n_grid);
    for (int i = 0; i < n_grid; ++i) grid[i] = period_s * i / n_grid;

    const std::vector<double> exact = frequency_trace(params, pulse, grid);
    double acc = 0.0;
    for (int i = 0; i < n_grid; ++i) acc += std::abs(approx.reconstruct(pulse, grid[i]) - exact[i]);
    return acc / n_grid;
}

SidebandSpectrum sideband_spectrum(const ModulationProfile& profile, const FluxPulse& pulse,
                                   int n_max) {
    if (!(pulse.omega_p > 0.0))
        throw degenerate_drive_error("sideband_spectrum: omega_p = 0 has no sidebands");
    if (n_max < 1) throw domain_error("sideband_spectrum: n_max must be >= 1");

    const double omega_eff = profile.base_harmonic * pulse.omega_p;
    const double z = profile.excursion / omega_eff;
    SidebandSpectrum spec;
    spec.n_min = -n_max;
    spec.n_max = n_max;
    spec.peaks.reserve(2 * n_max + 1);
    for (int k = -n_max; k <= n_max; ++k) {
        const double jk = bessel_jn(k, z);
        spec.peaks.push_back({profile.omega_bar + k * omega_eff, jk * jk});
    }
    return spec;
}

double excursion_from_shift(const TransmonParams& params, double phi_bar, double omega_p,
                            double observed_dc_shift) {
    params.validate();
    const double omega_quad = omega_p > 0.0 ? omega_p : 0.1; // coefficients are omega_p independent
    const double nu_park = qubit_frequency(params, phi_bar);

    auto shift_of = [&](double phi_tilde) {
        FluxPulse pulse{phi_bar, phi_tilde, omega_quad, 0.0};
        return fourier_coefficients(params, pulse, 2).omega_bar - nu_park;
    };

    if (observed_dc_shift == 0.0) return 0.0;
    if (observed_dc_shift > 0.0)
        throw no_solution_error("excursion_from_shift: dc shift under modulation is non-positive");

    const double hi = 0.5 - std::abs(phi_bar) - 1e-6;
    const double deepest = shift_of(hi);
    if (observed_dc_shift < deepest) {
        std::ostringstream msg;
        msg << "excursion_from_shift: shift " << observed_dc_shift
            << " GHz below the reachable minimum " << deepest << " GHz";
        throw no_solution_error(msg.str());
    }

    // shift is strictly decreasing in phi_tilde; bisect to 1e-6 GHz in shift.
    double lo = 0.0, up = hi;
    double mid = 0.0;
    for (int i = 0; i < 100; ++i) {
        mid = 0.5 * (lo + up);
        const double s = shift_of(mid);
        if (std::abs(s - observed_dc_shift) < 1e-6 && up - lo < 1e-7) return mid;
        (s > observed_dc_shift ? lo : up) = mid;
    }
    return mid;
}

} // namespace phasemod
