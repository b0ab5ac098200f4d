#include "stapulse/ansatz.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stapulse {

namespace {
constexpr double kPi = std::numbers::pi;

const std::array<double, 8> kSwapDigits = {-0.9911, -0.5120, 0.4216, 0.1530,
                                           0.0056,  -0.0350, -0.0431, -0.0472};
const std::array<double, 8> kPrepareDigits = {-1.0368, -0.4374, 0.2435, -0.0359,
                                              -0.0008, 0.0284,  0.0443, -0.0190};
const std::array<double, 8> kRestoreDigits = {-0.9672, -0.3908, 0.1210, 0.1057,
                                              -0.0242, -0.0625, 0.1036, -0.0333};
}  // namespace

double AnsatzCoefficients::odd_rule_residual() const {
    return a[0] + 3.0 * a[2] + 5.0 * a[4] + 7.0 * a[6];
}

double AnsatzCoefficients::even_rule_residual() const {
    return a[1] + 2.0 * a[3] + 3.0 * a[5] + 4.0 * a[7] + 0.5;
}

AnsatzCoefficients with_dependents_solved(const std::array<double, 6>& f) {
    AnsatzCoefficients c;
    c.a = {f[0], f[1], f[2], f[3], f[4], f[5],
           -(f[0] + 3.0 * f[2] + 5.0 * f[4]) / 7.0,
           -(0.5 + f[1] + 2.0 * f[3] + 3.0 * f[5]) / 4.0};
    return c;
}

double transfer_angle(const AnsatzCoefficients& c, double s) {
    double g = kPi * s;
    for (int n = 1; n <= 8; ++n) g += c.a[n - 1] * std::sin(n * kPi * s);
    return g;
}

double transfer_angle_rate_scaled(const AnsatzCoefficients& c, double s) {
    double r = 1.0;
    for (int n = 1; n <= 8; ++n) r += n * c.a[n - 1] * std::cos(n * kPi * s);
    return kPi * r;
}

double mixing_angle(double g, double theta) {
    return 0.5 * (kPi - theta) * (1.0 - std::cos(g));
}

const std::array<double, 8>& preset_digits(Preset p) {
    switch (p) {
        case Preset::swap: return kSwapDigits;
        case Preset::prepare: return kPrepareDigits;
        case Preset::restore: return kRestoreDigits;
    }
    throw std::logic_error("bad preset");
}

AnsatzCoefficients preset_coefficients(Preset p) {
    const auto& d = preset_digits(p);
    return with_dependents_solved({d[0], d[1], d[2], d[3], d[4], d[5]});
}

double preset_theta(Preset p) {
    return p == Preset::swap ? kPi / 2.0 : kPi / 4.0;
}

Preset parse_preset(std::string_view name) {
    if (name == "swap" || name == "case1" || name == "table1-case1") return Preset::swap;
    if (name == "prepare" || name == "case2" || name == "table1-case2") return Preset::prepare;
    if (name == "restore" || name == "case3" || name == "table1-case3") return Preset::restore;
    throw std::invalid_argument("unknown pulse preset: " + std::string(name));
}

const char* preset_name(Preset p) {
    switch (p) {
        case Preset::swap: return "swap";
        case Preset::prepare: return "prepare";
        case Preset::restore: return "restore";
    }
    return "?";
}

}  // namespace stapulse
