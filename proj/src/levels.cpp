#include "stapulse/levels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stapulse {

void LevelSystem::validate() const {
    if (ground_hz[kZero] != 0.0)
        throw std::invalid_argument("ground zero level must define the 0 Hz reference");
    if (excited_hz[kE1] != 0.0)
        throw std::invalid_argument("excited e1 level must define the 0 Hz reference");
    if (qubit_excited < 0 || qubit_excited > 2)
        throw std::invalid_argument("qubit_excited out of range");
    for (int g = 0; g < 3; ++g) {
        double row = 0.0;
        for (int e = 0; e < 3; ++e) {
            if (strength(g, e) < 0.0)
                throw std::invalid_argument("oscillator strengths must be nonnegative");
            row += strength(g, e);
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw std::invalid_argument("oscillator-strength rows must sum to 1");
    }
    if (p_carrier_strength() <= 0.0 || s_carrier_strength() <= 0.0)
        throw std::invalid_argument("both carrier transitions need nonzero strength");
}

std::vector<TransitionLine> transition_table(const LevelSystem& sys) {
    std::vector<TransitionLine> t;
    t.reserve(9);
    for (int g = 0; g < 3; ++g)
        for (int e = 0; e < 3; ++e)
            t.push_back({g, e, sys.transition_hz(g, e), sys.strength(g, e)});
    std::sort(t.begin(), t.end(),
              [](const TransitionLine& a, const TransitionLine& b) {
                  return a.freq_hz < b.freq_hz;
              });
    return t;
}

std::array<double, 3> DecoherenceSpec::branching_for(const LevelSystem& sys,
                                                     int excited) const {
    if (branching) return *branching;
    std::array<double, 3> b{};
    double col = 0.0;
    for (int g = 0; g < 3; ++g) col += sys.strength(g, excited);
    if (col <= 0.0)
        throw std::invalid_argument("cannot derive branching from an all-zero column");
    for (int g = 0; g < 3; ++g) b[g] = sys.strength(g, excited) / col;
    return b;
}

void DecoherenceSpec::validate() const {
    if (t1_optical_s <= 0.0 || t2_optical_s <= 0.0 || t2_spin_s <= 0.0)
        throw std::invalid_argument("lifetimes must be positive");
    if (t2_optical_s > 2.0 * t1_optical_s + 1e-15)
        throw std::invalid_argument("optical t2 cannot exceed 2 * t1");
    if (branching) {
        double sum = 0.0;
        for (double b : *branching) {
            if (b < 0.0) throw std::invalid_argument("branching fractions must be >= 0");
            sum += b;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("branching fractions must sum to 1");
    }
}

void EnsembleSpec::validate() const {
    if (detuning_fwhm_hz <= 0.0) throw std::invalid_argument("ensemble FWHM must be positive");
    if (n_members < 1) throw std::invalid_argument("ensemble needs at least one member");
    if (spectator_weight < 0.0) throw std::invalid_argument("spectator weight must be >= 0");
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile argument outside (0,1)");
    // Acklam's piecewise rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // One Newton polish through the exact CDF.
    const double inv_sqrt2 = 0.70710678118654752440;
    const double inv_sqrt2pi = 0.39894228040143267794;
    const double err = 0.5 * std::erfc(-x * inv_sqrt2) - p;
    x -= err / (inv_sqrt2pi * std::exp(-0.5 * x * x));
    return x;
}

std::vector<double> ensemble_detunings_hz(const EnsembleSpec& es) {
    es.validate();
    const int n = es.n_members;
    const double sigma = es.detuning_fwhm_hz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    std::vector<double> d(n);
    // Fill the lower half and mirror so the set is exactly antisymmetric.
    for (int k = 0; k < n / 2; ++k) {
        const double p = (k + 0.5) / double(n);
        d[k] = sigma * inverse_normal_cdf(p);
        d[n - 1 - k] = -d[k];
    }
    if (n % 2 == 1) d[n / 2] = 0.0;
    return d;
}

ModelBundle default_model() {
    ModelBundle m;
    m.system.ground_hz = {27.5e6, 10.2e6, 0.0};
    m.system.excited_hz = {0.0, 4.6e6, 9.4e6};
    // Relative strengths adapted from published hyperfine dipole tables for
    // this medium; rows (aux, one, zero) over columns (e1, e2, e3).
    m.system.strength << 0.05, 0.02, 0.93,
                         0.39, 0.60, 0.01,
                         0.56, 0.38, 0.06;
    m.system.qubit_excited = kE2;
    return m;
}

}  // namespace stapulse
