#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "stapulse/integrate.hpp"

using namespace stapulse;
using Eigen::Vector2cd;
using Eigen::Vector2d;

namespace {

// Single-generator rotation with a time-dependent rate: the flow is exactly
// a rotation by the integrated angle, giving a closed-form reference for a
// genuinely time-dependent right-hand side.
Vector2d rotation_rhs(double t, const Vector2d& y) {
    const double rate = std::sin(t);
    return {rate * y(1), -rate * y(0)};
}

Vector2d rotation_exact(double t) {
    const double ang = 1.0 - std::cos(t);
    return {std::cos(ang), -std::sin(ang)};
}

template <class Rhs, class State>
State rk4_fixed(Rhs rhs, State y, double t0, double t1, int n) {
    const double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * h;
        const State k1 = rhs(t, y);
        const State k2 = rhs(t + h / 2, State(y + (h / 2) * k1));
        const State k3 = rhs(t + h / 2, State(y + (h / 2) * k2));
        const State k4 = rhs(t + h, State(y + h * k3));
        y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

}  // namespace

TEST_CASE("closed-form rotation is reproduced at the requested tolerance") {
    Vector2d y{1.0, 0.0};
    AdaptiveSettings st;
    st.rel_tol = 1e-10;
    st.abs_tol = 1e-12;
    integrate_adaptive(rotation_rhs, y, 0.0, 10.0, st);
    CHECK((y - rotation_exact(10.0)).norm() < 1e-8);
}

TEST_CASE("two-level Rabi flop against the analytic solution") {
    const double omega = 2.0e6;
    auto rhs = [&](double, const Vector2cd& y) -> Vector2cd {
        const std::complex<double> mi{0.0, -1.0};
        return {mi * (omega / 2) * y(1), mi * (omega / 2) * y(0)};
    };
    Vector2cd y{1.0, 0.0};
    const double t1 = 7.3e-6;
    AdaptiveSettings st;
    st.rel_tol = 1e-9;
    st.abs_tol = 1e-11;
    integrate_adaptive(rhs, y, 0.0, t1, st);
    const double half = omega * t1 / 2;
    CHECK(std::abs(y(0) - std::complex<double>(std::cos(half))) < 1e-7);
    CHECK(std::abs(y(1) - std::complex<double>(0.0, -std::sin(half))) < 1e-7);
    CHECK(std::abs(y.norm() - 1.0) < 1e-9);
}

TEST_CASE("agrees with a fine fixed-step RK4 run") {
    Vector2d y{1.0, 0.0};
    AdaptiveSettings st;
    st.rel_tol = 1e-9;
    st.abs_tol = 1e-11;
    integrate_adaptive(rotation_rhs, y, 0.0, 6.0, st);
    const Vector2d ref = rk4_fixed(rotation_rhs, Vector2d{1.0, 0.0}, 0.0, 6.0, 200000);
    CHECK((y - ref).norm() < 1e-8);
}

TEST_CASE("tightening tolerance tightens the result") {
    auto run = [](double tol) {
        Vector2d y{1.0, 0.0};
        AdaptiveSettings st;
        st.rel_tol = tol;
        st.abs_tol = tol;
        integrate_adaptive(rotation_rhs, y, 0.0, 10.0, st);
        return (y - rotation_exact(10.0)).norm();
    };
    const double coarse = run(1e-5);
    const double fine = run(1e-9);
    CHECK(fine < coarse);
    CHECK(fine < 1e-7);
    CHECK(coarse < 1e-3);
}

TEST_CASE("statistics account for every stage evaluation") {
    Vector2d y{1.0, 0.0};
    IntegrationStats stats;
    integrate_adaptive(rotation_rhs, y, 0.0, 10.0, {}, &stats);
    CHECK(stats.accepted > 0);
    CHECK(stats.rhs_evals == 1 + 6 * (stats.accepted + stats.rejected));
}

TEST_CASE("max_step caps the stride") {
    Vector2d y{1.0, 0.0};
    AdaptiveSettings st;
    st.max_step = 0.01;
    IntegrationStats stats;
    integrate_adaptive(rotation_rhs, y, 0.0, 10.0, st, &stats);
    CHECK(stats.accepted >= 1000);
}

TEST_CASE("degenerate spans and budget exhaustion") {
    Vector2d y{1.0, 0.0};
    integrate_adaptive(rotation_rhs, y, 3.0, 3.0);  // no-op
    CHECK(y(0) == 1.0);
    CHECK_THROWS_AS(integrate_adaptive(rotation_rhs, y, 1.0, 0.0),
                    std::invalid_argument);
    AdaptiveSettings st;
    st.max_steps = 3;
    CHECK_THROWS_AS(integrate_adaptive(rotation_rhs, y, 0.0, 1000.0, st),
                    std::runtime_error);
}
