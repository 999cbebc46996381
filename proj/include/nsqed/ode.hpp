// ode.hpp — Embedded Dormand-Prince 5(4) integrator with adaptive step control.
// State is any Eigen dense array/matrix of complex doubles.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "nsqed/params.hpp"

namespace nsqed {

struct OdeOptions {
    double rtol{1e-10};
    double atol{1e-12};
    double h_init{0.0};  // 0: choose automatically
    double h_max{0.0};   // 0: no cap
    long max_steps{400000000L};
};

struct OdeStats {
    long steps{0};
    long rejected{0};
    long rhs_evals{0};
};

// Integrates y' = f(t, y) from t0 to each of the (ascending) sample times,
// invoking on_sample(t, y) there. The state is advanced in place.
template <class State, class Rhs, class OnSample>
OdeStats integrate_dopri5(Rhs&& f, State& y, double t0, const std::vector<double>& samples,
                          const OdeOptions& opts, OnSample&& on_sample) {
    // Dormand-Prince coefficients (FSAL pair).
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeStats stats;
    if (samples.empty()) return stats;
    double t = t0;
    State k1 = f(t, y);
    stats.rhs_evals++;

    auto error_ratio = [&](const State& ynew, const State& err) {
        double worst = 0.0;
        const auto* yd = y.data();
        const auto* nd = ynew.data();
        const auto* ed = err.data();
        const long n = y.size();
        for (long i = 0; i < n; ++i) {
            const double scale =
                opts.atol + opts.rtol * std::max(std::abs(yd[i]), std::abs(nd[i]));
            worst = std::max(worst, std::abs(ed[i]) / scale);
        }
        return worst;
    };

    double h = opts.h_init;
    if (h <= 0.0) {
        const double ynorm = y.cwiseAbs().maxCoeff();
        const double fnorm = k1.cwiseAbs().maxCoeff();
        h = (fnorm > 0.0) ? 0.01 * std::max(ynorm, 1.0) / fnorm : 1e-3;
    }
    if (opts.h_max > 0.0) h = std::min(h, opts.h_max);

    State k2, k3, k4, k5, k6, k7, ynew, err;
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const double t_target = samples[si];
        if (t_target < t - 1e-14 * std::max(1.0, std::abs(t)))
            throw std::invalid_argument("integrate_dopri5: sample times must ascend");
        while (t < t_target) {
            if (++stats.steps > opts.max_steps)
                throw SolverError("integrate_dopri5: step budget exhausted");
            bool clipped = false;
            double hs = h;
            if (t + hs >= t_target) {
                hs = t_target - t;
                clipped = true;
            }
            k2 = f(t + c2 * hs, y + hs * (a21 * k1));
            k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
            k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
            k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            k6 = f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = f(t + hs, ynew);
            stats.rhs_evals += 6;
            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double ratio = error_ratio(ynew, err);
            if (ratio <= 1.0) {
                t += hs;
                y.swap(ynew);
                k1.swap(k7);
                const double grow = 0.9 * std::pow(std::max(ratio, 1e-10), -0.2);
                double hnext = hs * std::min(5.0, std::max(0.2, grow));
                if (clipped && ratio < 1.0) hnext = std::max(hnext, h); // keep pace across samples
                h = hnext;
                if (opts.h_max > 0.0) h = std::min(h, opts.h_max);
            } else {
                stats.rejected++;
                h = hs * std::max(0.1, 0.9 * std::pow(ratio, -0.2));
                if (h < 1e-14 * std::max(1.0, std::abs(t)))
                    throw SolverError("integrate_dopri5: step size underflow");
            }
        }
        on_sample(t, y);
        // on_sample may renormalize/symmetrize the state; refresh the FSAL cache
        k1 = f(t, y);
        stats.rhs_evals++;
    }
    return stats;
}

// Convenience single-shot form.
template <class State, class Rhs>
OdeStats integrate_to(Rhs&& f, State& y, double t0, double t1, const OdeOptions& opts) {
    std::vector<double> samples{t1};
    return integrate_dopri5(std::forward<Rhs>(f), y, t0, samples, opts, [](double, const State&) {});
}

} // namespace nsqed
