#include "stapulse/tomography.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace stapulse {

namespace {
constexpr double kPi = 3.14159265358979323846;
const std::complex<double> kI{0.0, 1.0};
}  // namespace

void SechParams::validate() const {
    if (!(peak_rabi_rad > 0.0)) throw std::invalid_argument("sech peak rabi must be positive");
    if (!(beta_rad > 0.0)) throw std::invalid_argument("sech beta must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("sech chirp mu must be positive");
    if (!(truncation > 0.0)) throw std::invalid_argument("sech truncation must be positive");
    if (!std::isfinite(center_detuning_hz))
        throw std::invalid_argument("sech center detuning must be finite");
}

const AxisSetting& TomographySpec::axis(int i) const {
    switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
    }
    throw std::invalid_argument("axis index must be 0, 1, or 2");
}

void TomographySpec::validate() const {
    if (kind == TomographyKind::sech_pair) sech.validate();
    if (n_samples < 9) throw std::invalid_argument("tomography pulse grid too coarse");
    for (int i = 0; i < 3; ++i) {
        if (std::abs(std::abs(axis(i).sign) - 1.0) > 0.0)
            throw std::invalid_argument("axis sign must be +1 or -1");
    }
}

Matrix6cd ideal_axis_unitary(const AxisSetting& axis) {
    Vector6cd b = Vector6cd::Zero();
    b(kOne) = 1.0 / std::sqrt(2.0);
    b(kZero) = std::polar(1.0 / std::sqrt(2.0), axis.tone_phase_rad);
    const std::complex<double> drop = 1.0 + std::polar(1.0, axis.common_phase_rad);
    return Matrix6cd::Identity() - drop * (b * b.adjoint());
}

std::array<SegmentDrive, 2> sech_axis_segments(const AxisSetting& axis,
                                               const SechParams& p,
                                               int n_samples) {
    p.validate();
    if (n_samples < 9) throw std::invalid_argument("tomography pulse grid too coarse");
    const double duration = p.duration();
    SegmentDrive first;
    first.duration = duration;
    first.amp_p.resize(n_samples);
    first.amp_s.resize(n_samples);
    const double split = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n_samples; ++i) {
        const double tau = duration * (double(i) / double(n_samples - 1) - 0.5);
        const double x = p.beta_rad * tau;
        const double env = p.peak_rabi_rad * split / std::cosh(x);
        // The sweep integrates to mu ln cosh, symmetric about the center, so
        // the pulse carries no net phase offset of its own.
        const double chirp = p.mu * std::log(std::cosh(x)) +
                             2.0 * kPi * p.center_detuning_hz * tau;
        const std::complex<double> common = std::polar(1.0, chirp);
        first.amp_p[i] = env * common;
        first.amp_s[i] = env * common * std::polar(1.0, axis.tone_phase_rad);
    }
    SegmentDrive second = first.with_common_phase(axis.common_phase_rad);
    return {first, second};
}

Eigen::Vector3d qst_readout(const Matrix6cd& rho, const TomographySpec& spec,
                            const ModelBundle& model, bool with_decoherence,
                            const PropagationSettings& st) {
    spec.validate();
    Eigen::Vector3d est;
    for (int i = 0; i < 3; ++i) {
        const AxisSetting& axis = spec.axis(i);
        Matrix6cd rotated;
        if (spec.kind == TomographyKind::ideal) {
            const Matrix6cd u = ideal_axis_unitary(axis);
            rotated = u * rho * u.adjoint();
        } else {
            const DecoherenceSpec* dec = with_decoherence ? &model.decoherence : nullptr;
            SixLevelModel ion(model.system, dec, 0.0, st.mask);
            rotated = rho;
            double t = 0.0;
            for (const SegmentDrive& seg : sech_axis_segments(axis, spec.sech, spec.n_samples))
                t = propagate_segment(rotated, seg, ion, t, st);
        }
        const double diff = rotated(kZero, kZero).real() - rotated(kOne, kOne).real();
        est(i) = axis.sign * diff;
    }
    return est;
}

double qst_fidelity(const Eigen::Vector3d& estimate, const Eigen::Vector3d& true_axis) {
    const double norm = true_axis.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("true axis must be nonzero");
    return 0.5 * (1.0 + estimate.dot(true_axis) / norm);
}

}  // namespace stapulse
