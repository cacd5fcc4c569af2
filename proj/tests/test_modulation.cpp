#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "phasemod/experiments.hpp"
#include "phasemod/modulation.hpp"

using namespace phasemod;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// mean over one period of (omega(t) - f0)^2, sampled densely
double variance_from_trace(const TransmonParams& params, const FluxPulse& pulse, double f0) {
    const int n = 4000;
    std::vector<double> grid(n);
    const double period = 1.0 / (pulse.omega_p * 1e9);
    for (int i = 0; i < n; ++i) grid[i] = period * i / n;
    const auto trace = frequency_trace(params, pulse, grid);
    double acc = 0.0;
    for (double f : trace) acc += (f - f0) * (f - f0);
    return acc / n;
}

} // namespace

TEST_CASE("fourier_coefficients limiting cases") {
    const TransmonParams q2 = oracle::q2_params();

    SUBCASE("no modulation collapses to the parked frequency") {
        FluxPulse pulse{0.1, 0.0, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 6);
        CHECK(prof.omega_bar == Approx(qubit_frequency(q2, 0.1)).epsilon(1e-12));
        for (std::size_t k = 1; k < prof.fourier.size(); ++k)
            CHECK(std::abs(prof.fourier[k]) < 1e-12);
        CHECK(prof.base_harmonic == 1);
    }

    SUBCASE("odd coefficients vanish at the sweet spot") {
        FluxPulse pulse{0.0, 0.4, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 9);
        double max_abs = 0.0;
        for (double f : prof.fourier) max_abs = std::max(max_abs, std::abs(f));
        for (std::size_t k = 1; k < prof.fourier.size(); k += 2)
            CHECK(std::abs(prof.fourier[k]) < 1e-6 * max_abs);
        CHECK(prof.base_harmonic == 2);
        CHECK(prof.excursion == std::abs(prof.fourier[2]));
    }

    SUBCASE("time-averaged frequency decreases under modulation") {
        FluxPulse pulse{0.0, 0.4, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 4);
        CHECK(prof.omega_bar < qubit_frequency(q2, 0.0));
    }

    SUBCASE("dc shift is monotone non-increasing in the amplitude at the sweet spot") {
        double prev = 0.0;
        for (double amp : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            FluxPulse pulse{0.0, amp, 0.2, 0.0};
            const double shift =
                fourier_coefficients(q2, pulse, 4).omega_bar - qubit_frequency(q2, 0.0);
            CHECK(shift <= prev + 1e-12);
            prev = shift;
        }
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(fourier_coefficients(q2, {0.0, 0.1, 0.0, 0.0}, 6), domain_error);
        CHECK_THROWS_AS(fourier_coefficients(q2, {0.0, 0.1, 0.2, 0.0}, 1), domain_error);
    }
}

TEST_CASE("profile reconstruction reproduces the trace including the drive phase") {
    const TransmonParams q2 = oracle::q2_params();
    FluxPulse pulse{0.1, 0.12, 0.18, 1.1};
    const auto prof = fourier_coefficients(q2, pulse, 14);
    std::vector<double> grid = {0.2e-9, 1.1e-9, 3.7e-9};
    const auto exact = frequency_trace(q2, pulse, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(prof.reconstruct(pulse, grid[i]) == Approx(exact[i]).epsilon(1e-8));
}

TEST_CASE("Parseval check ties the harmonic weights to the trace variance") {
    const TransmonParams q2 = oracle::q2_params();
    for (const FluxPulse& pulse :
         {FluxPulse{0.0, 0.4, 0.2, 0.0}, FluxPulse{0.15, 0.3, 0.2, 0.0}}) {
        const auto prof = fourier_coefficients(q2, pulse, 14);
        double sum = 0.0;
        for (std::size_t k = 1; k < prof.fourier.size(); ++k)
            sum += 0.5 * prof.fourier[k] * prof.fourier[k];
        const double var = variance_from_trace(q2, pulse, prof.fourier[0]);
        CHECK(std::abs(var - sum) < 1e-8);
    }
}

TEST_CASE("taylor_harmonics low orders against the derivative oracle") {
    const TransmonParams q2 = oracle::q2_params();

    SUBCASE("order 2 at the sweet spot: dc shift equals the second-harmonic amplitude") {
        FluxPulse pulse{0.0, 0.08, 0.2, 0.0};
        const auto prof = taylor_harmonics(q2, pulse, 2);
        const double expected = pulse.phi_tilde * pulse.phi_tilde / 4.0 * dfreq_dflux(q2, 0.0, 2);
        CHECK(prof.fourier[0] - qubit_frequency(q2, 0.0) == Approx(expected).epsilon(1e-10));
        CHECK(prof.fourier[2] == Approx(expected).epsilon(1e-10));
        CHECK(prof.fourier[1] == Approx(0.0));
    }

    SUBCASE("order 1 is the linear slope term") {
        FluxPulse pulse{0.1, 0.03, 0.2, 0.0};
        const auto prof = taylor_harmonics(q2, pulse, 1);
        CHECK(prof.fourier[0] == Approx(qubit_frequency(q2, 0.1)).epsilon(1e-12));
        CHECK(prof.fourier[1] ==
              Approx(pulse.phi_tilde * dfreq_dflux(q2, 0.1, 1)).epsilon(1e-10));
    }

    SUBCASE("order 10 matches the extended-precision series oracle") {
        // independent oracle: Cauchy-integral derivatives pushed through the
        // same power reduction in long double
        FluxPulse pulse{0.15, 0.3, 0.2, 0.0};
        const auto taylor = taylor_harmonics(q2, pulse, 10);
        std::vector<long double> exact(11, 0.0L);
        exact[0] = oracle::dispersion(q2.e_c, q2.ej_total(), 0.15);
        long double factorial = 1.0L;
        for (int n = 1; n <= 10; ++n) {
            factorial *= n;
            const long double d =
                oracle::dispersion_derivative(q2.e_c, q2.ej_total(), 0.15, n, 0.2);
            const long double scale = std::pow(0.3L, n) / (std::pow(2.0L, n) * factorial);
            long double binom = 1.0L;
            for (int j = 0; j <= n; ++j) {
                const int m = n - 2 * j;
                if (m == 0) exact[0] += scale * d * binom;
                else if (m > 0) exact[m] += 2.0L * scale * d * binom;
                binom = binom * (n - j) / (j + 1);
            }
        }
        for (int k = 0; k <= 10; ++k)
            CHECK(std::abs(taylor.fourier[k] - double(exact[k])) < 5e-4);
    }

    SUBCASE("gap to the Fourier coefficients closes as the order grows") {
        FluxPulse pulse{0.15, 0.3, 0.2, 0.0};
        const auto fourier = fourier_coefficients(q2, pulse, 10);
        double prev_gap = 1e9;
        for (int order : {4, 6, 8, 10}) {
            const auto taylor = taylor_harmonics(q2, pulse, order);
            double gap = 0.0;
            for (int k = 0; k <= order; ++k)
                gap = std::max(gap, std::abs(taylor.fourier[k] - fourier.fourier[k]));
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        // at order 10 the residual gap is series truncation (n >= 11 terms),
        // an order of magnitude above the numerical error of the coefficients
        CHECK(prev_gap < 1e-2);
    }
}

TEST_CASE("average_deviation orders and spots") {
    const TransmonParams q2 = oracle::q2_params();
    const FluxPulse sweet{0.0, 0.4, 0.2, 0.0};
    const FluxPulse off{0.15, 0.3, 0.2, 0.0};

    SUBCASE("exact reconstruction deviates by zero") {
        // moderate pulse where the series is fully captured by 24 harmonics
        FluxPulse mild{0.0, 0.2, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, mild, 24);
        CHECK(average_deviation(prof, q2, mild) < 1e-9);
    }

    SUBCASE("higher Taylor order does not hurt") {
        for (const FluxPulse& pulse : {sweet, off}) {
            const double d3 = average_deviation(taylor_harmonics(q2, pulse, 3), q2, pulse);
            const double d10 = average_deviation(taylor_harmonics(q2, pulse, 10), q2, pulse);
            CHECK(d10 <= d3 + 1e-12);
        }
    }

    SUBCASE("symmetry puts the sweet spot below off-sweet at matched amplitude") {
        // apples-to-apples form of the symmetry claim: same amplitude, every order
        const FluxPulse sweet_eq{0.0, 0.3, 0.2, 0.0};
        for (int order = 3; order <= 10; ++order) {
            CHECK(average_deviation(taylor_harmonics(q2, sweet_eq, order), q2, sweet_eq) <=
                  average_deviation(taylor_harmonics(q2, off, order), q2, off));
            CHECK(average_deviation(fourier_coefficients(q2, sweet_eq, order), q2, sweet_eq) <=
                  average_deviation(fourier_coefficients(q2, off, order), q2, off));
        }
    }

    SUBCASE("sweet-spot deviations sit below off-sweet where the step has closed") {
        // on the unequal-amplitude pairs the sweet expansion gains content only
        // at even orders (odd harmonics vanish); compare there
        for (int order : {4, 6, 8, 10}) {
            const double ds = average_deviation(taylor_harmonics(q2, sweet, order), q2, sweet);
            const double doff = average_deviation(taylor_harmonics(q2, off, order), q2, off);
            CHECK(ds <= doff);
            const double fs = average_deviation(fourier_coefficients(q2, sweet, order), q2, sweet);
            const double foff = average_deviation(fourier_coefficients(q2, off, order), q2, off);
            CHECK(fs <= foff);
        }
    }
}

TEST_CASE("sideband_spectrum structure") {
    const TransmonParams q2 = oracle::q2_params();

    SUBCASE("unmodulated pulse has a single unit peak") {
        FluxPulse pulse{0.1, 0.0, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 4);
        const auto spec = sideband_spectrum(prof, pulse, 3);
        double total = 0.0;
        for (const auto& p : spec.peaks) total += p.weight;
        CHECK(total == Approx(1.0).epsilon(1e-12));
        CHECK(spec.peaks[3].weight == Approx(1.0).epsilon(1e-12)); // k = 0
        CHECK(spec.peaks[3].frequency == Approx(prof.omega_bar));
    }

    SUBCASE("peak spacing doubles at the sweet spot") {
        FluxPulse off{0.064, 0.08, 0.18, 0.0};
        const auto spec_off = sideband_spectrum(fourier_coefficients(q2, off, 6), off, 2);
        CHECK(spec_off.peaks[1].frequency - spec_off.peaks[0].frequency ==
              Approx(off.omega_p).epsilon(1e-12));

        FluxPulse sweet{0.0, 0.08, 0.18, 0.0};
        const auto spec_sweet = sideband_spectrum(fourier_coefficients(q2, sweet, 6), sweet, 2);
        CHECK(spec_sweet.peaks[1].frequency - spec_sweet.peaks[0].frequency ==
              Approx(2.0 * sweet.omega_p).epsilon(1e-12));
    }

    SUBCASE("weights are symmetric and sum to at most one") {
        FluxPulse pulse{0.064, 0.1, 0.15, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 6);
        const auto spec = sideband_spectrum(prof, pulse, 5);
        double total = 0.0;
        for (int k = 1; k <= 5; ++k) {
            CHECK(spec.peaks[5 + k].weight == Approx(spec.peaks[5 - k].weight).epsilon(1e-12));
            total += spec.peaks[5 + k].weight + spec.peaks[5 - k].weight;
        }
        total += spec.peaks[5].weight;
        CHECK(total <= 1.0 + 1e-9);
    }

    SUBCASE("Bessel weights are complete for tabulated arguments") {
        for (double z : {0.3, 1.0, 2.4}) {
            double total = 0.0;
            for (int k = -40; k <= 40; ++k) {
                const double jk = bessel_jn(k, z);
                total += jk * jk;
            }
            CHECK(std::abs(total - 1.0) < 1e-9);
        }
    }

    SUBCASE("degenerate drive errors out") {
        FluxPulse pulse{0.1, 0.0, 0.2, 0.0};
        const auto prof = fourier_coefficients(q2, pulse, 4);
        FluxPulse zero = pulse;
        zero.omega_p = 0.0;
        CHECK_THROWS_AS(sideband_spectrum(prof, zero, 3), degenerate_drive_error);
    }
}

TEST_CASE("excursion_from_shift inverts the dc curve") {
    const TransmonParams q2 = oracle::q2_params();

    CHECK(excursion_from_shift(q2, 0.0, 0.2, 0.0) == 0.0);

    SUBCASE("round trip recovers the amplitude") {
        for (double amp : {0.05, 0.13, 0.3}) {
            FluxPulse pulse{0.0, amp, 0.2, 0.0};
            const double shift =
                fourier_coefficients(q2, pulse, 4).omega_bar - qubit_frequency(q2, 0.0);
            CHECK(excursion_from_shift(q2, 0.0, 0.2, shift) == Approx(amp).epsilon(1e-4));
        }
    }

    SUBCASE("off-sweet round trip") {
        FluxPulse pulse{0.1, 0.08, 0.2, 0.0};
        const double shift =
            fourier_coefficients(q2, pulse, 4).omega_bar - qubit_frequency(q2, 0.1);
        CHECK(excursion_from_shift(q2, 0.1, 0.2, shift) == Approx(0.08).epsilon(1e-4));
    }

    SUBCASE("unreachable shift errors out") {
        CHECK_THROWS_AS(excursion_from_shift(q2, 0.0, 0.2, -3.0), no_solution_error);
        CHECK_THROWS_AS(excursion_from_shift(q2, 0.0, 0.2, 0.5), no_solution_error);
    }
}

TEST_CASE("drive_profile tolerates static pulses") {
    const TransmonParams q2 = oracle::q2_params();
    const auto quiet = drive_profile(q2, {0.1, 0.0, 0.0, 0.0});
    CHECK(quiet.omega_bar == Approx(qubit_frequency(q2, 0.1)));
    CHECK(quiet.excursion == 0.0);
    const auto frozen = drive_profile(q2, {0.1, 0.05, 0.0, 0.0}); // omega_p = 0: constant offset
    CHECK(frozen.omega_bar == Approx(qubit_frequency(q2, 0.15)));
}
