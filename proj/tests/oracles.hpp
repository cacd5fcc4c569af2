#pragma once

// Test-side oracles, kept independent of the library implementation paths
// they check.

#include <cmath>
#include <complex>
#include <numbers>

#include "phasemod/coupling.hpp"
#include "phasemod/transmon.hpp"

namespace oracle {

// J_n(z) from the ascending power series sum_m (-1)^m (z/2)^{n+2m} / (m! (n+m)!),
// in extended precision. Converges quickly for |z| <= 5.
inline double bessel_series(int n, double z) {
    long double sign = 1.0L;
    if (n < 0) {
        n = -n;
        if (n % 2 == 1) sign = -sign;
    }
    long double x = z;
    if (x < 0.0L) {
        x = -x;
        if (n % 2 == 1) sign = -sign;
    }
    const long double half = 0.5L * x;
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= half / k; // (z/2)^n / n!
    long double sum = term;
    for (int m = 1; m <= 80; ++m) {
        term *= -half * half / (static_cast<long double>(m) * (m + n));
        sum += term;
        if (std::abs(term) < 1e-25L * (std::abs(sum) + 1e-30L)) break;
    }
    return static_cast<double>(sign * sum);
}

// Symmetric-SQUID dispersion written out directly.
inline double dispersion(double e_c, double ej_total, double flux) {
    return std::sqrt(8.0 * e_c * ej_total * std::abs(std::cos(std::numbers::pi * flux))) - e_c;
}

// n-th flux derivative of the dispersion by a Cauchy contour integral in
// extended precision; rho must stay inside the half-quantum singularity.
inline double dispersion_derivative(double e_c, double ej_total, double flux, int n,
                                    double rho) {
    using C = std::complex<long double>;
    const long double k = 8.0L * (long double)e_c * (long double)ej_total;
    const int m = 8192;
    C acc = 0;
    long double fact = 1;
    for (int j = 2; j <= n; ++j) fact *= j;
    for (int i = 0; i < m; ++i) {
        const long double theta = 2 * std::numbers::pi_v<long double> * i / m;
        const C z = (long double)flux + std::polar((long double)rho, theta);
        const C f = std::sqrt(k * std::cos(std::numbers::pi_v<long double> * z)) -
                    (long double)e_c;
        acc += f * std::polar(1.0L, -n * theta);
    }
    return static_cast<double>((fact * acc / (long double)m).real() /
                               std::pow((long double)rho, n));
}

// Device parameters of the experiment chip (sweet-spot frequencies
// 5.477, 5.401 and 5.390 GHz with the quoted charging energies).
inline phasemod::TransmonParams q1_params() { return {0.240, 8.51148, 8.51148, -0.248}; }
inline phasemod::TransmonParams q2_params() { return {0.240, 8.286, 8.286, -0.248}; }
inline phasemod::TransmonParams coupler_params() { return {0.184, 10.55376, 10.55376, -0.184}; }

inline phasemod::CouplerParams device_coupler() {
    return {coupler_params(), 0.115, 0.078, 0.0075, 0.093};
}

} // namespace oracle
