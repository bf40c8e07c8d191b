#pragma once

// Explicit embedded Runge-Kutta pair of orders 5(4) (Dormand & Prince) with a
// proportional-integral step controller and the 4th-order continuous extension
// used to emit samples between accepted steps. Fixed-size state, no allocation
// in the step loop.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace qlm {

struct StepperOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    std::size_t max_steps = 50'000'000;
    double h_init = 0.0;  // 0: automatic
    double h_max = 0.0;   // 0: unbounded
};

struct StepperStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double t_reached = 0.0;
};

/// Thrown when the step size underflows or the step budget is exhausted.
class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, StepperStats stats) : std::runtime_error(what), stats_(stats) {}
    const StepperStats& stats() const { return stats_; }

private:
    StepperStats stats_;
};

template <std::size_t N>
class Dopri5 {
public:
    using State = std::array<double, N>;

    explicit Dopri5(StepperOptions opt = {}) : opt_(opt)
    {
        if (!(opt_.rtol > 0.0) || !(opt_.atol > 0.0)) throw std::invalid_argument("Dopri5: tolerances must be positive");
    }

    /// Integrates y' = f(t, y) from (t0, y0) through every time in `outputs`
    /// (nondecreasing, >= t0), calling observer(t, y) at each. After every
    /// accepted step post_step(t, y) may modify y in place and returns true if
    /// it did.
    template <class Rhs, class Observer, class PostStep>
    StepperStats integrate(Rhs&& f, double t0, State y, std::span<const double> outputs, Observer&& observer,
                           PostStep&& post_step) const
    {
        StepperStats stats;
        stats.t_reached = t0;
        if (outputs.empty()) return stats;
        const double t_final = outputs.back();
        std::size_t next_out = 0;
        while (next_out < outputs.size() && outputs[next_out] <= t0) {
            if (outputs[next_out] < t0) throw std::invalid_argument("Dopri5: output time before t0");
            observer(outputs[next_out], y);
            ++next_out;
        }
        if (next_out == outputs.size()) return stats;

        State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
        f(t0, y, k1);
        ++stats.rhs_evals;

        const double span = t_final - t0;
        const double h_max = opt_.h_max > 0.0 ? opt_.h_max : span;
        double h = opt_.h_init > 0.0 ? opt_.h_init : initial_step(f, t0, y, k1, h_max, stats);
        double t = t0;
        double fac_old = 1e-4;
        bool last_rejected = false;

        while (next_out < outputs.size()) {
            if (stats.accepted + stats.rejected >= opt_.max_steps)
                throw StepFailure("Dopri5: maximum number of steps exceeded at t = " + std::to_string(t), stats);
            if (0.1 * std::fabs(h) <= std::fabs(t) * std::numeric_limits<double>::epsilon())
                throw StepFailure("Dopri5: step size underflow at t = " + std::to_string(t), stats);

            h = std::min(h, h_max);
            if (t + 1.01 * h >= t_final) h = t_final - t;

            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            f(t + c2 * h, ytmp, k2);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            f(t + c3 * h, ytmp, k3);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            f(t + c4 * h, ytmp, k4);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            f(t + c5 * h, ytmp, k5);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            const double t_new = t + h;
            f(t_new, ytmp, k6);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            f(t_new, ynew, k7);
            stats.rhs_evals += 6;

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double e =
                    h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sk = opt_.atol + opt_.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
                err += (e / sk) * (e / sk);
            }
            err = std::sqrt(err / static_cast<double>(N));
            if (!std::isfinite(err)) err = 1e10;

            const double fac11 = std::pow(err, expo1);
            if (err <= 1.0) {
                // Continuous extension over [t, t_new].
                if (next_out < outputs.size() && outputs[next_out] <= t_new) {
                    State r2, r3, r4, r5;
                    for (std::size_t i = 0; i < N; ++i) {
                        const double ydiff = ynew[i] - y[i];
                        const double bspl = h * k1[i] - ydiff;
                        r2[i] = ydiff;
                        r3[i] = bspl;
                        r4[i] = ydiff - h * k7[i] - bspl;
                        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                    }
                    while (next_out < outputs.size() && outputs[next_out] <= t_new) {
                        const double tout = outputs[next_out];
                        if (tout == t_new) {
                            observer(tout, ynew);
                        } else {
                            const double s = (tout - t) / h;
                            const double s1 = 1.0 - s;
                            State yi;
                            for (std::size_t i = 0; i < N; ++i)
                                yi[i] = y[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
                            observer(tout, yi);
                        }
                        ++next_out;
                    }
                }

                ++stats.accepted;
                double fac = fac11 / std::pow(fac_old, beta);
                fac_old = std::max(err, 1e-4);
                t = t_new;
                y = ynew;
                k1 = k7;
                if (post_step(t, y)) {
                    f(t, y, k1);
                    ++stats.rhs_evals;
                }
                stats.t_reached = t;

                fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
                double h_new = h / fac;
                if (last_rejected) h_new = std::min(h_new, h);
                last_rejected = false;
                h = h_new;
            } else {
                ++stats.rejected;
                h = h / std::min(1.0 / fac_min, fac11 / safe);
                last_rejected = true;
            }
        }
        return stats;
    }

    template <class Rhs, class Observer>
    StepperStats integrate(Rhs&& f, double t0, const State& y, std::span<const double> outputs,
                           Observer&& observer) const
    {
        return integrate(std::forward<Rhs>(f), t0, y, outputs, std::forward<Observer>(observer),
                         [](double, State&) { return false; });
    }

    const StepperOptions& options() const { return opt_; }

private:
    template <class Rhs>
    double initial_step(Rhs& f, double t0, const State& y0, const State& f0, double h_max, StepperStats& stats) const
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt_.atol + opt_.rtol * std::fabs(y0[i]);
            dnf += (f0[i] / sk) * (f0[i] / sk);
            dny += (y0[i] / sk) * (y0[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, h_max);
        State y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h * f0[i];
        f(t0 + h, y1, f1);
        ++stats.rhs_evals;
        double der2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt_.atol + opt_.rtol * std::fabs(y0[i]);
            der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::fabs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * std::fabs(h), h1, h_max});
    }

    StepperOptions opt_;

    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    static constexpr double beta = 0.04;
    static constexpr double expo1 = 0.2 - beta * 0.75;
    static constexpr double safe = 0.9;
    static constexpr double fac_min = 0.2;  // h_new / h <= 1 / fac_min
    static constexpr double fac_max = 10.0;
};

}  // namespace qlm
