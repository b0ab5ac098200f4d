#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace stapulse {

// Six-level ion: ground triple (aux, |1>, |0>) = indices 0..2, excited triple
// (e1, e2, e3) = indices 3..5.  All frequencies are offsets on the shared
// optical-transition axis: freq(g, e) = excited[e] + ground[g], with
// ground[zero] = 0 and excited[e1] = 0, so the |0> -> e1 line defines 0 Hz.
// A hotter ground level therefore carries a larger offset, matching a scan
// axis on which the |1> lines sit 10.2 MHz above the |0> lines.
inline constexpr int kAux = 0, kOne = 1, kZero = 2;
inline constexpr int kE1 = 0, kE2 = 1, kE3 = 2;  // excited-local labels
inline constexpr int kLevels = 6;

struct LevelSystem {
    std::array<double, 3> ground_hz{};   // aux, one, zero (zero must be 0)
    std::array<double, 3> excited_hz{};  // e1, e2, e3 (e1 must be 0)
    // Relative oscillator strengths, rows = ground (aux, one, zero),
    // columns = excited (e1, e2, e3); every row sums to 1.
    Eigen::Matrix3d strength = Eigen::Matrix3d::Zero();
    int qubit_excited = kE2;     // which excited level the two tones address
    double carrier_p_hz = 0.0;   // trim of the p tone off the |1> <-> |e| line
    double carrier_s_hz = 0.0;   // trim of the s tone off the |0> <-> |e| line

    double transition_hz(int ground, int excited) const {
        return excited_hz[excited] + ground_hz[ground];
    }
    double p_carrier_strength() const { return strength(kOne, qubit_excited); }
    double s_carrier_strength() const { return strength(kZero, qubit_excited); }

    // Throws std::invalid_argument on any violated structural constraint.
    void validate() const;
};

struct TransitionLine {
    int ground, excited;
    double freq_hz;
    double strength;
};

// All nine lines sorted by frequency; pure bookkeeping over transition_hz.
std::vector<TransitionLine> transition_table(const LevelSystem& sys);

struct DecoherenceSpec {
    double t1_optical_s = 164e-6;
    double t2_optical_s = 132e-6;  // must be <= 2 * t1
    double t2_spin_s = 500e-6;
    // Fraction of excited decay landing in each ground level.  When absent,
    // each excited level branches in proportion to its oscillator-strength
    // column, normalized.
    std::optional<std::array<double, 3>> branching;

    std::array<double, 3> branching_for(const LevelSystem& sys, int excited) const;
    void validate() const;
};

struct EnsembleSpec {
    double detuning_fwhm_hz = 170e3;  // inhomogeneous width of the qubit peak
    int n_members = 41;
    std::vector<double> spectator_offsets_hz{-2e6, 2e6};
    double spectator_weight = 1.0;  // relative weight when scoring excitation

    void validate() const;
};

// Deterministic equal-weight Gaussian sampling: member k sits at the
// (k - 1/2)/n quantile of the detuning distribution.  Antisymmetric by
// construction, so the weighted mean detuning is exactly zero.
std::vector<double> ensemble_detunings_hz(const EnsembleSpec& es);

// Inverse standard-normal CDF (Acklam's rational fit polished by one Newton
// step through std::erf); |error| < 1e-13 over (0, 1).
double inverse_normal_cdf(double p);

// Bundles everything the propagators need to know about the medium.
struct ModelBundle {
    LevelSystem system;
    DecoherenceSpec decoherence;
    EnsembleSpec ensemble;
};

// Built-in defaults mirroring the praseodymium-like medium the toolkit ships
// configs for (also available as configs/pr_ion.json).
ModelBundle default_model();

}  // namespace stapulse
