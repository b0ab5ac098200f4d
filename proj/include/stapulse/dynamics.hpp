#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "stapulse/integrate.hpp"
#include "stapulse/invariant.hpp"
#include "stapulse/levels.hpp"
#include "stapulse/pulses.hpp"

namespace stapulse {

using Matrix6cd = Eigen::Matrix<std::complex<double>, 6, 6>;
using Vector6cd = Eigen::Matrix<std::complex<double>, 6, 1>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

// Which optical couplings each tone drives.  The frame keeps every level at
// its own energy, so detunings appear as rotating phases on the couplings and
// the Hamiltonian has an empty diagonal.
enum class CouplingMask {
    resonant_only,  // each tone on its carrier transition alone
    qubit_only,     // both tones on all transitions out of |0> and |1>
    all,            // plus the aux-level transitions
};

// One contiguous piece of drive: complex tone envelopes on a uniform closed
// grid over [0, duration], linearly interpolated.  Empty envelopes mean free
// evolution.  Segments chain on a global clock (t0_global) so every tone
// keeps its phase across pulse boundaries.
struct SegmentDrive {
    double duration = 0.0;
    std::vector<std::complex<double>> amp_p, amp_s;  // rad/s

    static SegmentDrive from_pulse(const SampledPulsePair& p);
    static SegmentDrive wait(double duration) { return {duration, {}, {}}; }
    // Adds a common phase to both tones (rotates every sample).
    SegmentDrive with_common_phase(double chi) const;

    std::complex<double> sample_p(double t) const;
    std::complex<double> sample_s(double t) const;
};

struct PropagationSettings {
    double rel_tol = 1e-6;
    double abs_tol = 1e-6;
    bool check_physics = true;  // trace/hermiticity/positivity after segments
    CouplingMask mask = CouplingMask::all;
};

// ----- three-level resonant propagation (basis |1>, |e>, |0>) -----

// Schroedinger propagation under the sampled pair; delta_hz shifts the ion's
// optical lines.  Returns the (unnormalized) final state.
Vector3cd propagate_pure(const SampledPulsePair& pulse, const Vector3cd& psi0,
                         double delta_hz = 0.0,
                         const AdaptiveSettings& st = {});

// |<target|psi>|^2 / <psi|psi>, insensitive to global phase and norm drift.
double pure_state_fidelity(const Vector3cd& target, const Vector3cd& psi);

// ----- six-level open-system propagation (basis aux,1,0,e1,e2,e3) -----

// Precomputed per-ion coupling and relaxation tables.
class SixLevelModel {
  public:
    SixLevelModel(const LevelSystem& sys, const DecoherenceSpec* dec,
                  double member_detuning_hz, CouplingMask mask);

    // drho/dt at global time t under the given segment drive.
    Matrix6cd rhs(double t_global, const Matrix6cd& rho,
                  const SegmentDrive& seg, double seg_start) const;
    Matrix6cd hamiltonian(double t_global, const SegmentDrive& seg,
                          double seg_start) const;
    bool dissipative() const { return dissipative_; }

  private:
    struct Coupling {
        int ground, excited;  // excited as 0..2
        int tone;             // 0 = p, 1 = s
        double scale;         // sqrt(strength ratio to the tone's carrier)
        double delta_rad;     // tone minus shifted transition, rad/s
    };
    std::vector<Coupling> couplings_;
    Eigen::Matrix<double, 6, 6> coherence_decay_;  // elementwise rates
    Eigen::Matrix3d feed_;                         // feed_(g,e): e -> g rate
    double excited_loss_ = 0.0;                    // 1/t1
    bool dissipative_ = false;
};

// Propagates rho through one segment starting at global time t0; advances and
// returns the new global time.  Throws on integrator failure; physics checks
// throw std::runtime_error when violated beyond tolerance.
double propagate_segment(Matrix6cd& rho, const SegmentDrive& seg,
                         const SixLevelModel& model, double t0_global,
                         const PropagationSettings& st,
                         IntegrationStats* stats = nullptr);

// ----- state helpers -----

Vector6cd ground_state(int ground);           // basis vector
Vector6cd qubit_state(double theta, double phi);  // sin th |0> + cos th e^{i phi}|1>
Vector6d populations(const Matrix6cd& rho);
double excited_population(const Matrix6cd& rho);
// <target|rho|target> restricted to nothing: target is a full 6-vector.
double state_fidelity(const Matrix6cd& rho, const Vector6cd& target);
// Bloch components of the qubit block, |0> at the north pole:
//   X = 2 Re <0|rho|1>,  Y = 2 Im <1|rho|0>,  Z = rho_00 - rho_11.
Eigen::Vector3d qubit_bloch(const Matrix6cd& rho);

// ----- ensemble reduction -----

struct EnsembleOutcome {
    double fidelity = 0.0;             // equal-weight member mean
    Vector6d mean_populations = Vector6d::Zero();
    Matrix6cd mean_state = Matrix6cd::Zero();  // equal-weight member mean
    double spectator_excitation = 0.0; // summed over spectator classes
    std::vector<double> member_fidelities;
};

// Runs the drive sequence for every ensemble member from psi0 and scores
// against target; spectator classes start in `spectator_ground` and report
// excited-state gain.  Member order is fixed, so the reduction is identical
// for any thread count.
EnsembleOutcome ensemble_transfer(const std::vector<SegmentDrive>& sequence,
                                  const Vector6cd& psi0, const Vector6cd& target,
                                  const ModelBundle& model, bool with_decoherence,
                                  const PropagationSettings& st, int threads = 1,
                                  bool with_spectators = true,
                                  int spectator_ground = kZero);

}  // namespace stapulse
