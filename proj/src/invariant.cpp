#include "stapulse/invariant.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace stapulse {

namespace {
constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
}  // namespace

Matrix3cd drive_hamiltonian3(double omega_p, double omega_s, double phi,
                             double delta_rad) {
    Matrix3cd h = Matrix3cd::Zero();
    h(0, 1) = -0.5 * omega_p * std::polar(1.0, phi);
    h(1, 0) = std::conj(h(0, 1));
    h(1, 2) = h(2, 1) = -0.5 * omega_s;
    h(1, 1) = delta_rad;
    return h;
}

Matrix3cd invariant_matrix(double g, double b, double phi, double omega0) {
    const cd e = std::polar(1.0, phi);
    Matrix3cd m = Matrix3cd::Zero();
    m(0, 1) = std::cos(g) * std::sin(b) * e;
    m(0, 2) = -kI * std::sin(g) * e;
    m(1, 2) = std::cos(g) * std::cos(b);
    m(1, 0) = std::conj(m(0, 1));
    m(2, 0) = std::conj(m(0, 2));
    m(2, 1) = std::conj(m(1, 2));
    return 0.5 * omega0 * m;
}

Vector3cd transported_eigenstate(double g, double b, double phi) {
    return {std::cos(g) * std::cos(b) * std::polar(1.0, phi),
            -kI * std::sin(g), cd{-std::cos(g) * std::sin(b), 0.0}};
}

Eigen::Matrix3cd invariant_eigenvectors(double g, double b, double phi) {
    // Rotate the eigenbasis of the third generator by the two angles that
    // carry its axis onto the invariant direction.  sin/cos of the rotation
    // angles are written directly in terms of g and b.
    const double sg = std::sin(g), cg = std::cos(g);
    const double sb = std::sin(b), cb = std::cos(b);
    const cd e = std::polar(1.0, phi);
    const double r = 1.0 / std::sqrt(2.0);

    Eigen::Matrix3cd v;
    // m = +1 and m = -1 columns: (-i) RC RB (1, 0, +-i)/sqrt2 with extra
    // phase chosen so the middle column is the transported eigenstate verbatim.
    for (int col : {0, 2}) {
        const double m = (col == 0) ? 1.0 : -1.0;
        // RB rotates within (|e>, |0>); RC within (|1>, |0>).
        const cd x0 = r, z0 = m * kI * r;
        const cd x1 = x0;                       // |1> after RB
        const cd y1 = -kI * cg * z0;            // |e>
        const cd z1 = sg * z0;                  // |0>
        v(0, col) = -kI * e * (sb * x1 - cb * z1);
        v(1, col) = -kI * y1;
        v(2, col) = -kI * (cb * x1 + sb * z1);
    }
    v.col(1) = transported_eigenstate(g, b, phi);
    return v;
}

double invariant_condition_residual(const AnsatzCoefficients& c, double theta,
                                    double phi, double t_f, double omega0,
                                    int n_grid, double p_scale, double s_scale) {
    if (n_grid < 2 || t_f <= 0.0 || omega0 == 0.0)
        throw std::invalid_argument("bad invariant residual arguments");
    const double pt = kPi - theta;
    double worst = 0.0;
    for (int k = 0; k < n_grid; ++k) {
        const double s = double(k) / double(n_grid - 1);
        const double g = transfer_angle(c, s);
        const double b = mixing_angle(g, theta);
        const double gd = transfer_angle_rate_scaled(c, s) / t_f;
        const double bd = 0.5 * pt * std::sin(g) * gd;
        const double wp = -gd * (pt * std::cos(g) * std::sin(b) + 2.0 * std::cos(b));
        const double ws = -gd * (pt * std::cos(g) * std::cos(b) - 2.0 * std::sin(b));

        const Matrix3cd im = invariant_matrix(g, b, phi, omega0);
        const Matrix3cd h = drive_hamiltonian3(p_scale * wp, s_scale * ws, phi);

        // dI/dt from the chain rule through (g, b).
        const cd e = std::polar(1.0, phi);
        Matrix3cd didt = Matrix3cd::Zero();
        didt(0, 1) = (-std::sin(g) * gd * std::sin(b) + std::cos(g) * std::cos(b) * bd) * e;
        didt(0, 2) = -kI * std::cos(g) * gd * e;
        didt(1, 2) = -std::sin(g) * gd * std::cos(b) - std::cos(g) * std::sin(b) * bd;
        didt(1, 0) = std::conj(didt(0, 1));
        didt(2, 0) = std::conj(didt(0, 2));
        didt(2, 1) = std::conj(didt(1, 2));
        didt *= 0.5 * omega0;

        const Matrix3cd resid = didt - kI * (im * h - h * im);
        worst = std::max(worst, resid.norm() / (omega0 / t_f));
    }
    return worst;
}

LrPhaseCurves lr_phases(const AnsatzCoefficients& c, double theta, double t_f,
                        int n_nodes) {
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw std::invalid_argument("lr_phases needs an odd node count >= 3");
    const double pt = kPi - theta;

    auto integrand = [&](double s) {
        const double g = transfer_angle(c, s);
        const double b = mixing_angle(g, theta);
        const double gd = transfer_angle_rate_scaled(c, s);  // gamma' * t_f
        const double bd = 0.5 * pt * std::sin(g) * gd;
        const double wp = -gd * (pt * std::cos(g) * std::sin(b) + 2.0 * std::cos(b));
        const double ws = -gd * (pt * std::cos(g) * std::cos(b) - 2.0 * std::sin(b));
        // d alpha_+/ds; the t_f factors cancel between rates and envelopes.
        return -bd * std::sin(g) + 0.5 * std::cos(g) * (wp * std::sin(b) + ws * std::cos(b));
    };

    LrPhaseCurves out;
    out.t.resize(n_nodes);
    out.plus.assign(n_nodes, 0.0);
    out.zero.assign(n_nodes, 0.0);
    out.minus.assign(n_nodes, 0.0);
    const double ds = 1.0 / double(n_nodes - 1);
    std::vector<double> f(n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
        out.t[k] = double(k) * ds * t_f;
        f[k] = integrand(double(k) * ds);
    }
    double acc = 0.0;
    for (int k = 0; k + 2 < n_nodes; k += 2) {
        // Simpson over the pair, quadratic sub-integral for the midpoint.
        out.plus[k + 1] = acc + ds / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
        acc += ds / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        out.plus[k + 2] = acc;
    }
    for (int k = 0; k < n_nodes; ++k) out.minus[k] = -out.plus[k];
    return out;
}

}  // namespace stapulse
