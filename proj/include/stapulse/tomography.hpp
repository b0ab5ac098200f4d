#pragma once

#include <array>

#include "stapulse/dynamics.hpp"

namespace stapulse {

// State readout on one Bloch axis is a pair of two-color inversion pulses
// followed by a population-difference measurement.  Both pulses drive the
// same bright superposition |b> = (|1> + e^{i tone_phase}|0>)/sqrt(2); the
// second pulse is offset by a common phase chi on both tones.  The pair
// leaves the dark state alone and multiplies the bright state by
// -e^{i chi}, i.e. a rotation by -(chi + pi) about the bright axis.
struct AxisSetting {
    double tone_phase_rad = 0.0;    // s tone relative to p tone
    double common_phase_rad = 0.0;  // chi, second pulse relative to first
    double sign = 1.0;              // orientation of the population difference
};

enum class TomographyKind { ideal, sech_pair };

// One chirped inversion pulse: envelope Omega_0 sech(beta tau) with the
// frequency swept as mu beta tanh(beta tau) across the line, realized as the
// phase mu ln cosh(beta tau) on both tone envelopes.  tau runs over
// [-truncation, truncation] in units of 1/beta.
//
// The defaults are the shipped readout tuning (see configs/): strong enough
// that neighboring transitions shift the estimate by a few percent, short
// enough that relaxation costs stay in the same range.
struct SechParams {
    double peak_rabi_rad = 2.0 * 3.14159265358979323846 * 400e3;
    double beta_rad = 2.0 * 3.14159265358979323846 * 85e3;
    double mu = 2.0;
    double truncation = 4.0;
    double center_detuning_hz = 0.0;

    double duration() const { return 2.0 * truncation / beta_rad; }
    void validate() const;  // throws std::invalid_argument
};

struct TomographySpec {
    TomographyKind kind = TomographyKind::ideal;
    SechParams sech;        // used by sech_pair only
    int n_samples = 2049;   // envelope grid per pulse

    // X and Y measure the equatorial components; Z uses the chi = 0 pair,
    // which is a pi rotation, hence the flipped sign.
    AxisSetting x{-1.5707963267948966, -1.5707963267948966, 1.0};
    AxisSetting y{0.0, 1.5707963267948966, 1.0};
    AxisSetting z{0.0, 0.0, -1.0};

    const AxisSetting& axis(int i) const;  // 0, 1, 2 = x, y, z
    void validate() const;
};

// Exact unitary of one pulse pair: identity minus (1 + e^{i chi}) |b><b|.
Matrix6cd ideal_axis_unitary(const AxisSetting& axis);

// The same pair as two sampled drive segments, chained back to back.
std::array<SegmentDrive, 2> sech_axis_segments(const AxisSetting& axis,
                                               const SechParams& p,
                                               int n_samples = 2049);

// Bloch estimate of rho: three independent runs from the same rho, one per
// axis, each reading sign * (pop|0> - pop|1>) after its rotation.  Ideal
// mode applies the exact unitaries; sech mode propagates the full six-level
// model at zero member detuning, so off-resonant transitions and relaxation
// enter the estimate.  Components are reported raw, never clipped to [-1,1].
Eigen::Vector3d qst_readout(const Matrix6cd& rho, const TomographySpec& spec,
                            const ModelBundle& model,
                            bool with_decoherence = true,
                            const PropagationSettings& st = {});

// (1 + estimate . axis)/2 for a unit true axis; exceeds 1 when the raw
// estimate overshoots, which is information we keep.
double qst_fidelity(const Eigen::Vector3d& estimate,
                    const Eigen::Vector3d& true_axis);

}  // namespace stapulse
