#include "phasemod/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "phasemod/modulation.hpp"

namespace phasemod {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;

struct SparseOp {
    struct Entry {
        int row;
        int col;
        double amp;
    };
    std::vector<Entry> entries;

    void apply(const cplx phase_times_g, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
        for (const auto& e : entries) out[e.row] += phase_times_g * e.amp * in[e.col];
    }
};

// b1^(a1) b2^(a2) with a = -1 lowering, +1 raising, on the |i>_q1 |j>_q2 basis
// (index = i*d + j).
SparseOp ladder_product(int d, int a1, int a2) {
    SparseOp op;
    for (int i = 0; i < d; ++i) {
        const int i2 = i + a1;
        if (i2 < 0 || i2 >= d) continue;
        const double amp1 = a1 < 0 ? std::sqrt(double(i)) : std::sqrt(double(i + 1));
        for (int j = 0; j < d; ++j) {
            const int j2 = j + a2;
            if (j2 < 0 || j2 >= d) continue;
            const double amp2 = a2 < 0 ? std::sqrt(double(j)) : std::sqrt(double(j + 1));
            if (amp1 * amp2 != 0.0) op.entries.push_back({i2 * d + j2, i * d + j, amp1 * amp2});
        }
    }
    return op;
}

std::string label_of(int i, int j) { return std::to_string(i) + std::to_string(j); }

// Time-averaged frequency under a pulse, tolerating static drives.
double averaged_frequency(const TransmonParams& params, const FluxPulse& pulse) {
    if (pulse.phi_tilde == 0.0) return qubit_frequency(params, pulse.phi_bar);
    if (pulse.omega_p == 0.0) return qubit_frequency(params, pulse.flux_at(0.0));
    return fourier_coefficients(params, pulse, 2).omega_bar;
}

// Largest reach of the instantaneous frequency away from parking.
double excursion_bound(const TransmonParams& params, const FluxPulse& pulse) {
    const double park = qubit_frequency(params, pulse.phi_bar);
    const double lo = qubit_frequency(params, pulse.phi_bar - pulse.phi_tilde);
    const double hi = qubit_frequency(params, pulse.phi_bar + pulse.phi_tilde);
    return std::max(std::abs(lo - park), std::abs(hi - park));
}

struct RecordPlan {
    long total_steps;
    long stride;
    double dt_ns;
};

RecordPlan plan_steps(double t_final_s, double dt_s, int record_samples) {
    if (!(t_final_s > 0.0)) throw domain_error("evolve: t_final must be > 0");
    const double t_ns = t_final_s * 1e9;
    double dt_ns = dt_s * 1e9;
    long n = std::max<long>(1, std::lround(std::ceil(t_ns / dt_ns)));
    dt_ns = t_ns / double(n); // land exactly on t_final
    long stride = std::max<long>(1, n / std::max(1, record_samples));
    return {n, stride, dt_ns};
}

} // namespace

void TwoQubitSystem::validate() const {
    q1.validate();
    q2.validate();
    if (levels < 2 || levels > 5) throw domain_error("TwoQubitSystem: levels must be in 2..5");
    if (!std::isfinite(g)) throw domain_error("TwoQubitSystem: g must be finite");
}

TwoQubitSystem make_system(const TransmonParams& q1, const TransmonParams& q2, double g,
                           int levels) {
    TwoQubitSystem s{q1, q2, q1.anharmonicity, q2.anharmonicity, g, levels};
    s.validate();
    return s;
}

const std::vector<double>& TimeTrace::channel(const std::string& label) const {
    auto it = populations.find(label);
    if (it == populations.end()) throw domain_error("TimeTrace: no channel '" + label + "'");
    return it->second;
}

Eigen::MatrixXcd hamiltonian_at(const TwoQubitSystem& system, double omega1_t, double omega2_t) {
    system.validate();
    const int d = system.levels;
    const int dim = d * d;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const int k = i * d + j;
            h(k, k) = omega1_t * i + 0.5 * system.alpha1 * i * (i - 1) + omega2_t * j +
                      0.5 * system.alpha2 * j * (j - 1);
        }
    }
    for (auto [a1, a2] : {std::pair{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}) {
        for (const auto& e : ladder_product(d, a1, a2).entries)
            h(e.row, e.col) += system.g * e.amp;
    }
    return h;
}

Eigen::VectorXcd basis_state(const TwoQubitSystem& system, const std::string& label) {
    const int d = system.levels;
    if (label.size() != 2 || label[0] < '0' || label[0] >= '0' + d || label[1] < '0' ||
        label[1] >= '0' + d)
        throw domain_error("basis_state: bad label '" + label + "' for d = " + std::to_string(d));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    v[(label[0] - '0') * d + (label[1] - '0')] = 1.0;
    return v;
}

double default_time_step(const TwoQubitSystem& system, const FluxPulse& p1, const FluxPulse& p2) {
    const double nu1 = qubit_frequency(system.q1, p1.phi_bar);
    const double nu2 = qubit_frequency(system.q2, p2.phi_bar);
    const double fast = nu1 + nu2 + std::abs(system.alpha1) + std::abs(system.alpha2) +
                        excursion_bound(system.q1, p1) + excursion_bound(system.q2, p2) +
                        p1.omega_p + p2.omega_p + 0.5;
    return 1.0 / (50.0 * fast) * 1e-9;
}

double default_time_step_interaction(const TwoQubitSystem& system, const FluxPulse& p1,
                                     const FluxPulse& p2) {
    const double nu1 = qubit_frequency(system.q1, p1.phi_bar);
    const double nu2 = qubit_frequency(system.q2, p2.phi_bar);
    const double fast = std::abs(nu1 - nu2) + std::abs(system.alpha1) + std::abs(system.alpha2) +
                        excursion_bound(system.q1, p1) + excursion_bound(system.q2, p2) +
                        2.0 * (p1.omega_p + p2.omega_p) + std::abs(system.g) + 0.05;
    return 1.0 / (50.0 * fast) * 1e-9;
}

TimeTrace evolve(const TwoQubitSystem& system, const FluxPulse& pulse1, const FluxPulse& pulse2,
                 const std::string& psi0_label, double t_final_s, double dt_s,
                 const EvolveOptions& options) {
    return evolve(system, pulse1, pulse2, basis_state(system, psi0_label), t_final_s, dt_s,
                  options);
}

TimeTrace evolve(const TwoQubitSystem& system, const FluxPulse& pulse1, const FluxPulse& pulse2,
                 const Eigen::VectorXcd& psi0, double t_final_s, double dt_s,
                 const EvolveOptions& options) {
    system.validate();
    pulse1.validate();
    pulse2.validate();
    const int d = system.levels;
    const int dim = d * d;
    if (psi0.size() != dim) throw domain_error("evolve: psi0 dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw domain_error("evolve: psi0 must be normalized");
    if (dt_s == 0.0) dt_s = default_time_step(system, pulse1, pulse2);

    const double nu1p = qubit_frequency(system.q1, pulse1.phi_bar);
    const double nu2p = qubit_frequency(system.q2, pulse2.phi_bar);

    // static diagonal (anharmonicity) and number operators
    std::vector<double> diag_static(dim), n1(dim), n2(dim);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const int k = i * d + j;
            n1[k] = i;
            n2[k] = j;
            diag_static[k] = 0.5 * system.alpha1 * i * (i - 1) + 0.5 * system.alpha2 * j * (j - 1);
        }
    }
    const SparseOp op_mm = ladder_product(d, -1, -1); // b1 b2,      phase e^{-i theta_sum}
    const SparseOp op_pp = ladder_product(d, +1, +1); // b1+ b2+,    phase e^{+i theta_sum}
    const SparseOp op_mp = ladder_product(d, -1, +1); // b1 b2+,     phase e^{-i theta_dif}
    const SparseOp op_pm = ladder_product(d, +1, -1); // b1+ b2,     phase e^{+i theta_dif}

    const double w_sum = two_pi * (nu1p + nu2p); // rad/ns
    const double w_dif = two_pi * (nu1p - nu2p);
    const double g_rad = two_pi * system.g;

    // d(psi)/dt in the rotating frame, t in ns.
    auto rhs = [&](double t_ns, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) {
        const double t_s = t_ns * 1e-9;
        const double dnu1 = qubit_frequency(system.q1, pulse1.flux_at(t_s)) - nu1p;
        const double dnu2 = qubit_frequency(system.q2, pulse2.flux_at(t_s)) - nu2p;
        for (int k = 0; k < dim; ++k)
            out[k] = two_pi * (diag_static[k] + dnu1 * n1[k] + dnu2 * n2[k]) * psi[k];
        const cplx e_sum = std::polar(g_rad, -w_sum * t_ns);
        const cplx e_dif = std::polar(g_rad, -w_dif * t_ns);
        op_mm.apply(e_sum, psi, out);
        op_pp.apply(std::conj(e_sum), psi, out);
        op_mp.apply(e_dif, psi, out);
        op_pm.apply(std::conj(e_dif), psi, out);
        out *= cplx(0.0, -1.0);
    };

    const RecordPlan plan = plan_steps(t_final_s, dt_s, options.record_samples);
    const double h = plan.dt_ns;

    TimeTrace trace;
    trace.delta_bar = averaged_frequency(system.q2, pulse2) - averaged_frequency(system.q1, pulse1);
    std::vector<std::vector<double>*> pop_series(dim);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) pop_series[i * d + j] = &trace.populations[label_of(i, j)];

    Eigen::VectorXcd psi = psi0;
    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    auto record = [&](double t_ns) {
        trace.times.push_back(t_ns * 1e-9);
        const double nrm = psi.norm();
        trace.norm.push_back(nrm);
        for (int k = 0; k < dim; ++k) pop_series[k]->push_back(std::norm(psi[k]));
        if (options.keep_states) trace.states.push_back(psi);
        if (options.norm_check && std::abs(nrm - 1.0) > 1e-6) {
            std::ostringstream msg;
            msg << "evolve: norm drift " << std::abs(nrm - 1.0) << " at t = " << t_ns * 1e-9
                << " s exceeds 1e-6; use a smaller dt";
            throw numeric_error(msg.str());
        }
    };

    record(0.0);
    for (long step = 0; step < plan.total_steps; ++step) {
        const double t = step * h;
        rhs(t, psi, k1);
        tmp = psi + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = psi + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = psi + h * k3;
        rhs(t + h, tmp, k4);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((step + 1) % plan.stride == 0 || step + 1 == plan.total_steps)
            record((step + 1) * h);
    }
    return trace;
}

TimeTrace evolve_interaction_picture(const TwoQubitSystem& system, const FluxPulse& pulse1,
                                     const FluxPulse& pulse2, const std::string& psi0_label,
                                     double t_final_s, double dt_s, const EvolveOptions& options) {
    system.validate();
    pulse1.validate();
    pulse2.validate();
    const int d = system.levels;
    if (dt_s == 0.0) dt_s = default_time_step_interaction(system, pulse1, pulse2);

    // truncated basis: exchange block plus the two-excitation block when d >= 3
    std::vector<std::string> labels = {"00", "01", "10", "11"};
    if (d >= 3) {
        labels.push_back("20");
        labels.push_back("02");
    }
    const int dim = static_cast<int>(labels.size());
    auto index_of = [&](const std::string& l) {
        auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end())
            throw domain_error("evolve_interaction_picture: state '" + l +
                               "' outside the truncated subspace");
        return static_cast<int>(it - labels.begin());
    };
    const int i01 = index_of("01"), i10 = index_of("10"), i11 = index_of("11");
    const int i20 = d >= 3 ? index_of("20") : -1;
    const int i02 = d >= 3 ? index_of("02") : -1;

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi[index_of(psi0_label)] = 1.0;

    const double g_rad = two_pi * system.g;
    const double a1_rad = two_pi * system.alpha1; // A_i(t) = alpha_i * t, alpha constant
    const double a2_rad = two_pi * system.alpha2;

    auto nu1 = [&](double t_ns) { return qubit_frequency(system.q1, pulse1.flux_at(t_ns * 1e-9)); };
    auto nu2 = [&](double t_ns) { return qubit_frequency(system.q2, pulse2.flux_at(t_ns * 1e-9)); };

    // H_eff(t) psi given the accumulated phase integrals F1, F2 (rad)
    auto apply = [&](double f1, double f2, double t_ns, const Eigen::VectorXcd& in,
                     Eigen::VectorXcd& out) {
        out.setZero();
        const cplx h01 = g_rad * std::polar(1.0, f1 - f2); // <10|H|01>
        out[i10] += h01 * in[i01];
        out[i01] += std::conj(h01) * in[i10];
        if (d >= 3) {
            const double sqrt2 = std::numbers::sqrt2;
            const cplx h20 = sqrt2 * g_rad * std::polar(1.0, f1 + a1_rad * t_ns - f2);
            const cplx h02 = sqrt2 * g_rad * std::polar(1.0, f2 + a2_rad * t_ns - f1);
            out[i20] += h20 * in[i11];
            out[i11] += std::conj(h20) * in[i20];
            out[i02] += h02 * in[i11];
            out[i11] += std::conj(h02) * in[i02];
        }
        out *= cplx(0.0, -1.0);
    };

    const RecordPlan plan = plan_steps(t_final_s, dt_s, options.record_samples);
    const double h = plan.dt_ns;

    TimeTrace trace;
    trace.delta_bar = averaged_frequency(system.q2, pulse2) - averaged_frequency(system.q1, pulse1);
    std::vector<std::vector<double>*> pop_series(dim);
    for (int k = 0; k < dim; ++k) pop_series[k] = &trace.populations[labels[k]];

    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    double f1 = 0.0, f2 = 0.0; // running trapezoid of 2pi*nu_i
    double nu1_t = nu1(0.0), nu2_t = nu2(0.0);

    auto record = [&](double t_ns) {
        trace.times.push_back(t_ns * 1e-9);
        const double nrm = psi.norm();
        trace.norm.push_back(nrm);
        for (int k = 0; k < dim; ++k) pop_series[k]->push_back(std::norm(psi[k]));
        if (options.keep_states) trace.states.push_back(psi);
        if (options.norm_check && std::abs(nrm - 1.0) > 1e-6) {
            std::ostringstream msg;
            msg << "evolve_interaction_picture: norm drift " << std::abs(nrm - 1.0)
                << " exceeds 1e-6 at t = " << t_ns * 1e-9 << " s; use a smaller dt";
            throw numeric_error(msg.str());
        }
    };

    record(0.0);
    for (long step = 0; step < plan.total_steps; ++step) {
        const double t = step * h;
        const double nu1_h = nu1(t + 0.5 * h), nu2_h = nu2(t + 0.5 * h);
        const double nu1_f = nu1(t + h), nu2_f = nu2(t + h);
        const double f1_h = f1 + two_pi * 0.25 * h * (nu1_t + nu1_h);
        const double f2_h = f2 + two_pi * 0.25 * h * (nu2_t + nu2_h);
        const double f1_f = f1_h + two_pi * 0.25 * h * (nu1_h + nu1_f);
        const double f2_f = f2_h + two_pi * 0.25 * h * (nu2_h + nu2_f);

        apply(f1, f2, t, psi, k1);
        tmp = psi + 0.5 * h * k1;
        apply(f1_h, f2_h, t + 0.5 * h, tmp, k2);
        tmp = psi + 0.5 * h * k2;
        apply(f1_h, f2_h, t + 0.5 * h, tmp, k3);
        tmp = psi + h * k3;
        apply(f1_f, f2_f, t + h, tmp, k4);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        f1 = f1_f;
        f2 = f2_f;
        nu1_t = nu1_f;
        nu2_t = nu2_f;
        if ((step + 1) % plan.stride == 0 || step + 1 == plan.total_steps)
            record((step + 1) * h);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// damped cosine fit
// ---------------------------------------------------------------------------

namespace {

struct DftPeak {
    double freq_per_ns;
    double magnitude;
    double phase;
    double median_magnitude;
};

DftPeak dominant_bin(const std::vector<double>& t_ns, const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double mean = [&] {
        double s = 0.0;
        for (double v : y) s += v;
        return s / double(n);
    }();
    const double span = t_ns.back() - t_ns.front();

    const std::size_t n_bins = n / 2;
    std::vector<double> mags(n_bins);
    std::vector<cplx> bins(n_bins);
    for (std::size_t k = 1; k <= n_bins; ++k) {
        cplx acc = 0.0;
        const double w = two_pi * double(k) / span;
        for (std::size_t i = 0; i < n; ++i)
            acc += (y[i] - mean) * std::polar(1.0, -w * (t_ns[i] - t_ns.front()));
        bins[k - 1] = acc;
        mags[k - 1] = std::abs(acc);
    }
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];

    std::size_t best = 0;
    for (std::size_t k = 1; k < n_bins; ++k)
        if (mags[k] > mags[best]) best = k;

    // parabolic sub-bin refinement on the magnitude, then a direct projection
    // at the refined frequency: a half-bin leakage offset would otherwise skew
    // the starting amplitude and phase badly
    double kref = double(best + 1);
    if (best > 0 && best + 1 < n_bins) {
        const double a = mags[best - 1], b = mags[best], c = mags[best + 1];
        const double denom = a - 2.0 * b + c;
        if (std::abs(denom) > 1e-300) kref += 0.5 * (a - c) / denom;
    }
    const double freq = kref / span;
    cplx refined = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        refined += (y[i] - mean) * std::polar(1.0, -two_pi * freq * (t_ns[i] - t_ns.front()));
    return {freq, std::abs(refined), std::arg(refined), median};
}

} // namespace

DampedCosineFit fit_damped_cosine(std::span<const double> times_s, std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 8 || times_s.size() != n)
        throw domain_error("fit_damped_cosine: need >= 8 samples with matching time grid");

    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = times_s[i] * 1e9; // ns
    std::vector<double> y(values.begin(), values.end());

    double ymin = y[0], ymax = y[0], ysum = 0.0;
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
        ysum += v;
    }
    const double contrast = ymax - ymin;
    const double mean = ysum / double(n);
    if (contrast < 1e-12 * std::max(1.0, std::abs(mean)))
        throw no_oscillation_error("fit_damped_cosine: series is constant");

    const DftPeak peak = dominant_bin(t, y);
    if (peak.magnitude < 3.0 * peak.median_magnitude)
        throw no_oscillation_error(
            "fit_damped_cosine: no spectral peak above 3x the noise floor (near-zero coupling)");

    // parameters p = (B, C, r, f, theta); model B + C exp(-r t) cos(2pi f t + theta)
    double B = mean;
    double C = 2.0 * peak.magnitude / double(n);
    double r = 0.0;
    double f = peak.freq_per_ns;
    double th = peak.phase + two_pi * f * (-t.front());

    Eigen::VectorXd residual(n);
    Eigen::MatrixXd jac(n, 5);
    auto eval = [&](double pB, double pC, double pr, double pf, double pth, bool with_jac) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double decay = std::exp(-pr * t[i]);
            const double arg = two_pi * pf * t[i] + pth;
            const double co = std::cos(arg), si = std::sin(arg);
            const double m = pB + pC * decay * co;
            residual[i] = m - y[i];
            sse += residual[i] * residual[i];
            if (with_jac) {
                jac(i, 0) = 1.0;
                jac(i, 1) = decay * co;
                jac(i, 2) = -t[i] * pC * decay * co;
                jac(i, 3) = -two_pi * t[i] * pC * decay * si;
                jac(i, 4) = -pC * decay * si;
            }
        }
        return sse;
    };

    double sse = eval(B, C, r, f, th, true);
    double lambda = 1e-6;
    int iter = 0;
    for (; iter < 200; ++iter) {
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * residual;
        Eigen::MatrixXd damped = jtj;
        for (int k = 0; k < 5; ++k) damped(k, k) += lambda * (jtj(k, k) + 1e-12);
        Eigen::VectorXd delta = damped.ldlt().solve(-jtr);

        const double nB = B + delta[0], nC = C + delta[1], nr = r + delta[2], nf = f + delta[3],
                     nth = th + delta[4];
        const double new_sse = eval(nB, nC, nr, nf, nth, false);
        if (new_sse < sse) {
            B = nB;
            C = nC;
            r = nr;
            f = nf;
            th = nth;
            const bool converged = sse - new_sse < 1e-14 * (sse + 1e-300);
            sse = eval(B, C, r, f, th, true);
            lambda = std::max(lambda * 0.3, 1e-12);
            if (converged) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }

    if (C < 0.0) { // canonical amplitude sign
        C = -C;
        th += pi;
    }
    if (f < 0.0) {
        f = -f;
        th = -th;
    }
    th = std::remainder(th, two_pi);

    DampedCosineFit fit;
    fit.frequency = f; // cycles/ns == GHz
    fit.decay = 1.0 / std::max(r, 1e-12) * 1e-9;
    fit.amplitude = C;
    fit.offset = B;
    fit.phase = th;
    fit.residual_rms = std::sqrt(sse / double(n));
    fit.iterations = iter;
    return fit;
}

DampedCosineFit fit_damped_cosine(const TimeTrace& trace, const std::string& channel) {
    return fit_damped_cosine(trace.times, trace.channel(channel));
}

} // namespace phasemod
