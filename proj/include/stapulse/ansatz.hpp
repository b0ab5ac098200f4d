#pragma once

#include <array>
#include <string_view>

namespace stapulse {

// Fourier-series parametrization of the transfer angle driving the two-tone
// envelopes.  gamma(t) = pi*t/tf + sum_n a_n sin(n pi t / tf), eight harmonics.
//
// Two linear sum rules pin the envelope endpoints to zero:
//   a1 + 3 a3 + 5 a5 + 7 a7 = 0
//   a2 + 2 a4 + 3 a6 + 4 a8 = -1/2
// Their sum forces sum_n n*a_n = -1, i.e. gamma'(0) = gamma'(tf) = 0, and both
// envelopes are proportional to gamma', so they vanish at both ends.
struct AnsatzCoefficients {
    std::array<double, 8> a{};

    // Residuals of the two sum rules (both zero when exactly constrained).
    double odd_rule_residual() const;
    double even_rule_residual() const;
};

// Solves the dependent harmonics a7, a8 from the first six so the sum rules
// hold exactly.  This is the parametrization used by the optimizer.
AnsatzCoefficients with_dependents_solved(const std::array<double, 6>& free_part);

// gamma and its scaled derivative gamma' * tf, as functions of s = t/tf.
double transfer_angle(const AnsatzCoefficients& c, double s);
double transfer_angle_rate_scaled(const AnsatzCoefficients& c, double s);

// beta(gamma) = (pi - theta)/2 * (1 - cos gamma) interpolates 0 -> pi - theta
// as gamma runs 0 -> pi, and its endpoint slopes vanish with gamma'.
double mixing_angle(double transfer_angle, double theta);

// Built-in coefficient sets.  "swap" exchanges the two qubit ground levels,
// "prepare" takes |1> to the theta = pi/4 superposition, "restore" is the
// family whose time-reversed pulses bring that superposition back to |1>.
enum class Preset { swap, prepare, restore };

// Digits as published; rows satisfy the sum rules only to ~2e-4.
const std::array<double, 8>& preset_digits(Preset p);

// Published leading six harmonics with a7, a8 re-solved, so synthesized
// envelopes carry exact zero endpoints.
AnsatzCoefficients preset_coefficients(Preset p);

double preset_theta(Preset p);

// Accepts "swap|prepare|restore", "case1|case2|case3" and the longer
// "table1-caseN" spellings; throws std::invalid_argument otherwise.
Preset parse_preset(std::string_view name);
const char* preset_name(Preset p);

}  // namespace stapulse
