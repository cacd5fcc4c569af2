#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phasemod/transmon.hpp"

using namespace phasemod;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("qubit_frequency matches the closed form at the device anchors") {
    const TransmonParams q2 = oracle::q2_params();

    // E_C = 240 MHz, E_J_total = 16.572 GHz -> 5.4008 GHz at the sweet spot,
    // consistent with the quoted 5.401 GHz
    const double f0 = qubit_frequency(q2, 0.0);
    CHECK(f0 == Approx(oracle::dispersion(0.240, 16.572, 0.0)).epsilon(1e-12));
    CHECK(f0 == Approx(5.4008).epsilon(2e-5));
    CHECK(std::abs(f0 - 5.401) < 1e-3);

    const double f25 = qubit_frequency(q2, 0.25);
    CHECK(f25 == Approx(oracle::dispersion(0.240, 16.572, 0.25)).epsilon(1e-12));
    CHECK(std::abs(f25 - 4.5034) < 2e-4); // sqrt(31.818*cos(pi/4)) - 0.24

    CHECK(qubit_frequency(q2, -0.25) == f25); // even in flux

    const double f1 = qubit_frequency(oracle::q1_params(), 0.0);
    CHECK(std::abs(f1 - 5.477) < 1e-3);
}

TEST_CASE("qubit_frequency is even and strictly decreasing on [0, 0.5)") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> ec_dist(0.15, 0.35);
    std::uniform_real_distribution<double> ej_dist(4.0, 12.0);
    for (int trial = 0; trial < 20; ++trial) {
        TransmonParams p{ec_dist(rng), ej_dist(rng), ej_dist(rng), -0.2};
        double prev = qubit_frequency(p, 0.0);
        for (int i = 1; i <= 40; ++i) {
            const double flux = 0.48 * i / 40.0;
            const double f = qubit_frequency(p, flux);
            CHECK(qubit_frequency(p, -flux) == f);
            CHECK(f < prev);
            prev = f;
        }
    }
}

TEST_CASE("qubit_frequency rejects out-of-range flux and bad parameters") {
    const TransmonParams q2 = oracle::q2_params();
    CHECK_THROWS_AS(qubit_frequency(q2, 0.5), domain_error);
    CHECK_THROWS_AS(qubit_frequency(q2, -0.6), domain_error);
    CHECK_THROWS_AS(qubit_frequency({-0.1, 8.0, 8.0, -0.2}, 0.0), domain_error);
    CHECK_THROWS_AS(qubit_frequency({0.24, 1.0, 1.0, -0.2}, 0.0), domain_error); // EJ/EC too low
    CHECK_THROWS_AS(qubit_frequency({0.24, 8.0, 8.0, 0.2}, 0.0), domain_error);
}

TEST_CASE("frequency_trace basics") {
    const TransmonParams q2 = oracle::q2_params();
    std::vector<double> grid(101);
    for (int i = 0; i < 101; ++i) grid[i] = i * 1e-9 / 100.0;

    SUBCASE("no modulation gives a constant trace") {
        FluxPulse still{0.1, 0.0, 0.2, 0.0};
        const auto trace = frequency_trace(q2, still, grid);
        for (double f : trace) CHECK(f == qubit_frequency(q2, 0.1));
    }

    SUBCASE("half-period symmetry at the sweet spot") {
        FluxPulse pulse{0.0, 0.4, 0.25, 0.0}; // period 4 ns
        const double half = 0.5 / (pulse.omega_p * 1e9);
        std::vector<double> t0 = {1.0e-9, 1.5e-9, 2.2e-9};
        std::vector<double> t1 = t0;
        for (double& t : t1) t += half;
        const auto a = frequency_trace(q2, pulse, t0);
        const auto b = frequency_trace(q2, pulse, t1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
    }

    SUBCASE("minimum over one period sits at the flux maximum") {
        FluxPulse pulse{0.064, 0.08, 0.2, 0.0}; // flux max 0.144 at t = 0
        std::vector<double> period(501);
        for (int i = 0; i < 501; ++i) period[i] = i * (1.0 / 0.2) * 1e-9 / 500.0;
        const auto trace = frequency_trace(q2, pulse, period);
        const double min = *std::min_element(trace.begin(), trace.end());
        CHECK(min == Approx(qubit_frequency(q2, 0.144)).epsilon(1e-10));
    }

    SUBCASE("phase acts as a time shift") {
        FluxPulse shifted{0.05, 0.1, 0.25, 0.7};
        FluxPulse zero{0.05, 0.1, 0.25, 0.0};
        // cos(w t + phi) = cos(w (t + phi/w)): same trace at shifted times
        std::vector<double> t0 = {0.3e-9, 0.9e-9, 1.7e-9};
        std::vector<double> t1 = t0;
        const double shift = shifted.phi_p / (2.0 * pi * shifted.omega_p * 1e9);
        for (double& t : t1) t += shift;
        const auto a = frequency_trace(q2, shifted, t0);
        const auto b = frequency_trace(q2, zero, t1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
    }

    SUBCASE("periodicity over a full drive period") {
        FluxPulse pulse{0.05, 0.1, 0.25, 0.3};
        const double period = 1.0 / (pulse.omega_p * 1e9);
        std::vector<double> t0 = {0.1e-9, 0.8e-9, 2.9e-9};
        std::vector<double> t1 = t0;
        for (double& t : t1) t += period;
        const auto a = frequency_trace(q2, pulse, t0);
        const auto b = frequency_trace(q2, pulse, t1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("frequency_trace errors") {
    const TransmonParams q2 = oracle::q2_params();
    std::vector<double> bad_grid = {1e-9, 0.5e-9};
    FluxPulse pulse{0.0, 0.1, 0.2, 0.0};
    CHECK_THROWS_AS(frequency_trace(q2, pulse, bad_grid), domain_error);

    // pulse invariant keeps the instantaneous flux inside the domain
    FluxPulse wide{0.3, 0.25, 0.2, 0.0};
    std::vector<double> grid = {0.0, 1e-9};
    CHECK_THROWS_AS(frequency_trace(q2, wide, grid), domain_error);
    CHECK_THROWS_WITH_AS(frequency_trace(q2, wide, grid),
                         doctest::Contains("phi_bar"), domain_error);
}

TEST_CASE("dfreq_dflux derivatives at the sweet spot") {
    const TransmonParams q2 = oracle::q2_params();

    CHECK(dfreq_dflux(q2, 0.0, 1) == 0.0); // stationary by symmetry, exact
    const double second = dfreq_dflux(q2, 0.0, 2);
    CHECK(second < 0.0);
    CHECK(std::abs(dfreq_dflux(q2, 0.0, 3)) < 1e-6 * std::abs(second));
    for (int order : {1, 3, 5}) CHECK(std::abs(dfreq_dflux(q2, 0.0, order)) < 1e-6);

    // curvature against the analytic second derivative of sqrt(K cos(pi x)):
    // f''(0) = -sqrt(K) pi^2 / 2 with K = 8 E_C E_J
    const double k = 8.0 * q2.e_c * q2.ej_total();
    CHECK(second == Approx(-std::sqrt(k) * pi * pi / 2.0).epsilon(1e-6));
}

TEST_CASE("dfreq_dflux first derivative matches the analytic slope off-sweet") {
    const TransmonParams q2 = oracle::q2_params();
    const double k = 8.0 * q2.e_c * q2.ej_total();
    for (double flux : {0.05, 0.1025, 0.2}) {
        const double analytic =
            -pi * k * std::sin(pi * flux) / (2.0 * std::sqrt(k * std::cos(pi * flux)));
        CHECK(dfreq_dflux(q2, flux, 1) == Approx(analytic).epsilon(1e-9));
    }
}

TEST_CASE("dfreq_dflux domain handling") {
    const TransmonParams q2 = oracle::q2_params();
    CHECK_THROWS_AS(dfreq_dflux(q2, 0.0, 11), domain_error);
    CHECK_THROWS_AS(dfreq_dflux(q2, 0.0, 0), domain_error);
    CHECK_THROWS_AS(dfreq_dflux(q2, 0.49, 10), domain_error); // stencil exits the domain
}

TEST_CASE("flux_for_frequency inverts the dispersion") {
    const TransmonParams q2 = oracle::q2_params();
    for (double flux : {0.0, 0.1, 0.25, 0.4}) {
        const double f = qubit_frequency(q2, flux);
        CHECK(flux_for_frequency(q2, f) == Approx(flux).epsilon(1e-9));
    }
    CHECK_THROWS_AS(flux_for_frequency(q2, 6.0), no_solution_error);
}
