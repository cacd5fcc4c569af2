#include "phasemod/transmon.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace phasemod {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double flux_limit = 0.5; // dispersion derivative diverges at half quantum

// Stencil step for the n-th derivative. The 1e-4 base step holds for n <= 2;
// higher-order stencils need the step balanced between the binomial roundoff
// amplification 2^n*eps/n! (evaluated at the Richardson-refined h/2) and the
// truncation growth of the derivatives toward the half-quantum singularity,
// which scales the optimum with the distance to it.
double fd_step(int order, double flux) {
    if (order <= 2) return 1e-4;
    double factorial = 1.0;
    for (int k = 2; k <= order; ++k) factorial *= k;
    const double c =
        std::pow(std::pow(2.0, order) * 6e-13 / factorial, 1.0 / (order + 4));
    const double reach = std::max(0.5 - std::abs(flux), 0.05);
    return reach * c;
}

// n-th central difference with half-integer offsets, f sampled at
// x + (n/2 - j)*h for j = 0..n. Symmetric offsets are combined first so the
// odd-order stencil of an even function cancels exactly.
double central_difference(const TransmonParams& params, double x, int order, double h) {
    std::vector<double> binom(order + 1);
    binom[0] = 1.0;
    for (int j = 1; j <= order; ++j) binom[j] = binom[j - 1] * (order - j + 1) / j;

    double sum = 0.0;
    for (int j = 0; 2 * j < order; ++j) {
        const double offset = (0.5 * order - j) * h;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const double mirror_sign = ((order - j) % 2 == 0) ? 1.0 : -1.0;
        const double f_plus = qubit_frequency(params, x + offset);
        const double f_minus = qubit_frequency(params, x - offset);
        sum += binom[j] * (sign * f_plus + mirror_sign * f_minus);
    }
    if (order % 2 == 0) {
        const double sign = (order / 2) % 2 == 0 ? 1.0 : -1.0;
        sum += sign * binom[order / 2] * qubit_frequency(params, x);
    }
    return sum / std::pow(h, order);
}

} // namespace

void TransmonParams::validate() const {
    if (!(e_c > 0.0)) throw domain_error("TransmonParams: e_c must be > 0");
    if (!(e_j1 > 0.0) || !(e_j2 > 0.0))
        throw domain_error("TransmonParams: junction energies must be > 0");
    if (!(ej_total() / e_c > 20.0))
        throw domain_error("TransmonParams: (e_j1+e_j2)/e_c must exceed 20 (transmon regime)");
    if (!(anharmonicity < 0.0))
        throw domain_error("TransmonParams: anharmonicity must be negative");
}

double FluxPulse::flux_at(double t_s) const {
    const double t_ns = t_s * 1e9;
    return phi_bar + phi_tilde * std::cos(2.0 * pi * omega_p * t_ns + phi_p);
}

void FluxPulse::validate() const {
    if (!(phi_tilde >= 0.0)) throw domain_error("FluxPulse: phi_tilde must be >= 0");
    if (!(omega_p >= 0.0)) throw domain_error("FluxPulse: omega_p must be >= 0");
    if (!(std::abs(phi_bar) + phi_tilde < flux_limit))
        throw domain_error("FluxPulse: |phi_bar| + phi_tilde must stay below 0.5 Phi0");
}

double qubit_frequency(const TransmonParams& params, double flux) {
    params.validate();
    if (!(std::abs(flux) < flux_limit)) {
        std::ostringstream msg;
        msg << "qubit_frequency: flux " << flux << " outside (-0.5, 0.5) Phi0";
        throw domain_error(msg.str());
    }
    const double ej_eff = params.ej_total() * std::abs(std::cos(pi * flux));
    return std::sqrt(8.0 * params.e_c * ej_eff) - params.e_c;
}

std::vector<double> frequency_trace(const TransmonParams& params, const FluxPulse& pulse,
                                    std::span<const double> t_grid_s) {
    params.validate();
    pulse.validate();
    for (std::size_t i = 1; i < t_grid_s.size(); ++i) {
        if (!(t_grid_s[i] > t_grid_s[i - 1]))
            throw domain_error("frequency_trace: time grid must be strictly increasing");
    }
    std::vector<double> out;
    out.reserve(t_grid_s.size());
    for (double t : t_grid_s) {
        const double flux = pulse.flux_at(t);
        if (!(std::abs(flux) < flux_limit)) {
            std::ostringstream msg;
            msg << "frequency_trace: flux " << flux << " outside (-0.5, 0.5) Phi0 at t = " << t
                << " s";
            throw domain_error(msg.str());
        }
        out.push_back(qubit_frequency(params, flux));
    }
    return out;
}

double dfreq_dflux(const TransmonParams& params, double flux, int order) {
    params.validate();
    if (order < 1 || order > 10) throw domain_error("dfreq_dflux: order must be in 1..10");
    if (!(std::abs(flux) < flux_limit)) throw domain_error("dfreq_dflux: flux outside (-0.5, 0.5)");

    const double h = fd_step(order, flux);
    const double reach = 0.5 * order * h;
    if (!(std::abs(flux) + reach < flux_limit)) {
        std::ostringstream msg;
        msg << "dfreq_dflux: order-" << order << " stencil of half-width " << reach
            << " exits the flux domain at flux = " << flux;
        throw domain_error(msg.str());
    }
    const double coarse = central_difference(params, flux, order, h);
    const double fine = central_difference(params, flux, order, 0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

double flux_for_frequency(const TransmonParams& params, double target_ghz) {
    params.validate();
    const double hi_flux = flux_limit - 1e-9;
    const double f_max = qubit_frequency(params, 0.0);
    const double f_min = qubit_frequency(params, hi_flux);
    if (target_ghz > f_max || target_ghz < f_min) {
        std::ostringstream msg;
        msg << "flux_for_frequency: target " << target_ghz << " GHz outside [" << f_min << ", "
            << f_max << "]";
        throw no_solution_error(msg.str());
    }
    double lo = 0.0, hi = hi_flux; // frequency decreasing in flux on [0, 0.5)
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (qubit_frequency(params, mid) > target_ghz ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace phasemod
