#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace stapulse {

// Embedded Dormand-Prince 5(4) with a PI step-size controller.  The state is
// any Eigen-like type supporting axpy arithmetic and cwiseAbs(); the error
// norm is the scaled RMS over components with mixed absolute/relative
// tolerance.  Right-hand sides must be safe to evaluate anywhere inside
// [t0, t1] (rejected steps re-evaluate).
struct AdaptiveSettings {
    double rel_tol = 1e-6;
    double abs_tol = 1e-6;
    double initial_step = 0.0;  // 0: span/100
    double max_step = 0.0;      // 0: full span
    std::int64_t max_steps = 2'000'000;
};

struct IntegrationStats {
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t rhs_evals = 0;
};

namespace dopri5 {
// Classic tableau; a7* coincides with the 5th-order weights (FSAL).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dopri5

// Advances y from t0 to t1 in place.  Throws std::runtime_error on step-size
// underflow or step-budget exhaustion (both indicate a pathological RHS).
template <class State, class Rhs>
void integrate_adaptive(Rhs&& rhs, State& y, double t0, double t1,
                        const AdaptiveSettings& st = {},
                        IntegrationStats* stats = nullptr) {
    namespace tb = dopri5;
    const double span = t1 - t0;
    if (span <= 0.0) {
        if (span == 0.0) return;
        throw std::invalid_argument("integrate_adaptive: t1 < t0");
    }

    const double hmax = st.max_step > 0.0 ? st.max_step : span;
    double h = st.initial_step > 0.0 ? st.initial_step : span / 100.0;
    h = std::min(h, hmax);
    double t = t0;

    State k1 = rhs(t, y);
    State k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1;
    State ytmp = y, y5 = y;
    if (stats) ++stats->rhs_evals;

    // PI controller constants in the usual Hairer form.
    const double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
    const double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
    double err_prev = 1.0;
    std::int64_t steps = 0;

    while (t < t1) {
        if (++steps > st.max_steps)
            throw std::runtime_error("integrate_adaptive: step budget exhausted");
        h = std::min(h, t1 - t);
        if (!(h > std::abs(t) * 1e-14 + 1e-300))
            throw std::runtime_error("integrate_adaptive: step size underflow");

        ytmp = y + h * tb::a21 * k1;
        k2 = rhs(t + tb::c2 * h, ytmp);
        ytmp = y + h * (tb::a31 * k1 + tb::a32 * k2);
        k3 = rhs(t + tb::c3 * h, ytmp);
        ytmp = y + h * (tb::a41 * k1 + tb::a42 * k2 + tb::a43 * k3);
        k4 = rhs(t + tb::c4 * h, ytmp);
        ytmp = y + h * (tb::a51 * k1 + tb::a52 * k2 + tb::a53 * k3 + tb::a54 * k4);
        k5 = rhs(t + tb::c5 * h, ytmp);
        ytmp = y + h * (tb::a61 * k1 + tb::a62 * k2 + tb::a63 * k3 + tb::a64 * k4 +
                        tb::a65 * k5);
        k6 = rhs(t + h, ytmp);
        y5 = y + h * (tb::b1 * k1 + tb::b3 * k3 + tb::b4 * k4 + tb::b5 * k5 +
                      tb::b6 * k6);
        k7 = rhs(t + h, y5);
        if (stats) stats->rhs_evals += 6;

        ytmp = h * (tb::e1 * k1 + tb::e3 * k3 + tb::e4 * k4 + tb::e5 * k5 +
                    tb::e6 * k6 + tb::e7 * k7);

        // Scaled RMS error over components.
        const auto sc = (st.abs_tol +
                         st.rel_tol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array())
                            .matrix();
        const double err = std::sqrt(
            (ytmp.cwiseAbs().array() / sc.array()).square().mean());

        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;  // FSAL
            if (stats) ++stats->accepted;
            const double e = std::max(err, 1e-10);
            double fac = safety * std::pow(e, -alpha) * std::pow(err_prev, beta);
            h = std::min(h * std::clamp(fac, fac_min, fac_max), hmax);
            err_prev = e;
        } else {
            if (stats) ++stats->rejected;
            const double fac = std::max(fac_min, safety * std::pow(err, -alpha));
            h *= fac;
        }
    }
}

}  // namespace stapulse
