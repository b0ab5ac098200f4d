#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "stapulse/ansatz.hpp"
#include "stapulse/pulses.hpp"

namespace stapulse {

// Three-level working basis is (|1>, |e>, |0>) throughout this header.
using Matrix3cd = Eigen::Matrix3cd;
using Vector3cd = Eigen::Vector3cd;

// Drive Hamiltonian (rad/s, hbar = 1):
//   H = -1/2 [[0,            Op e^{+i phi}, 0 ],
//             [Op e^{-i phi}, -2*delta,     Os],
//             [0,             Os,           0 ]]
// i.e. <e|H|e> = +delta, the level shift seen in the frame of the tones by an
// ion whose optical transitions sit delta above their nominal positions.
Matrix3cd drive_hamiltonian3(double omega_p, double omega_s, double phi,
                             double delta_rad = 0.0);

// The dynamical invariant with spectral scale omega0:
//   I = (omega0/2) [[0,                  cos g sin b e^{+i phi}, -i sin g e^{+i phi}],
//                   [cos g sin b e^{-i phi}, 0,                   cos g cos b       ],
//                   [ i sin g e^{-i phi},    cos g cos b,         0                 ]]
// Eigenvalues are {+omega0/2, 0, -omega0/2} for every (g, b, phi).
Matrix3cd invariant_matrix(double transfer_angle, double mixing_angle, double phi,
                           double omega0);

// Zero-eigenvalue eigenstate, the transported state:
//   phi0 = (cos g cos b e^{i phi}, -i sin g, -cos g sin b)
// At g = 0, b = 0 this is e^{i phi}|1>; at g = pi, b = pi - theta it is
// cos(theta) e^{i phi}|1> + sin(theta)|0>.
Vector3cd transported_eigenstate(double transfer_angle, double mixing_angle, double phi);

// The full eigenvector triple (order +, 0, -), phase-smooth in (g, b): built
// by rotating the fixed eigenbasis of the third su(2) generator, so the
// columns are continuous in t and the middle column equals
// transported_eigenstate exactly.
Eigen::Matrix3cd invariant_eigenvectors(double transfer_angle, double mixing_angle,
                                        double phi);

// Max over an n_grid uniform grid of
//   || dI/dt + (1/i)[I, H] ||_F / (omega0 / t_f)
// with H synthesized from the same coefficients.  Exactly zero (to roundoff)
// by construction; p_scale/s_scale inject envelope errors to de-zero it.
double invariant_condition_residual(const AnsatzCoefficients& c, double theta,
                                    double phi, double t_f, double omega0,
                                    int n_grid = 1024, double p_scale = 1.0,
                                    double s_scale = 1.0);

// Lewis-Riesenfeld phases alpha_m(t) of the three eigenstates, cumulative on
// a uniform grid with odd node count.  The integrand for the eigenvector
// family above reduces to
//   d alpha_m / dt = m [ -beta' sin g + (cos g / 2)(Op sin b + Os cos b) ]
// which collapses further to -m (pi - theta) gamma'/2; the quadrature here
// integrates the first form and tests pin it against the collapsed one.
struct LrPhaseCurves {
    std::vector<double> t;
    std::vector<double> plus, zero, minus;
};
LrPhaseCurves lr_phases(const AnsatzCoefficients& c, double theta, double t_f,
                        int n_nodes = 1025);

}  // namespace stapulse
