#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stapulse/ansatz.hpp"
#include "stapulse/dynamics.hpp"

namespace stapulse {

// Scoring context for one candidate coefficient set.  The synthesized pulse
// is propagated at quadrature detunings inside the addressed band and the
// final states are compared with `target` on the qubit block; excitation
// picked up by the spectator classes enters as a weighted penalty.
struct ScoreSpec {
    double band_halfwidth_hz = 500e3;
    // Band detunings are the ensemble's quantile nodes for this many members,
    // restricted to the band, all with equal weight.
    int band_samples = 9;
    double spectator_weight = 1.0;
    // Pure-state projector supported on the qubit block.
    Matrix6cd target = Matrix6cd::Zero();

    // Pulse synthesis parameters for every candidate.
    double theta = 1.5707963267948966;
    double phi = 0.0;
    double t_f = 4e-6;
    int n_samples = kDefaultPulseSamples;

    bool with_decoherence = true;
    PropagationSettings propagation;
    int threads = 1;

    void validate() const;
};

// Normalized |v><v|; the global phase of `state` drops out.
Matrix6cd pure_projector(const Vector6cd& state);

// Mean squared Frobenius distance to the target over the band, plus
// spectator_weight times the summed spectator excitation.  Zero means a
// perfect transfer at every band detuning with no spectator gain; lower is
// better.  The coefficients must satisfy both sum rules (callers built them
// with with_dependents_solved; violations throw).  Propagation failures
// propagate rather than inflating the score.
double candidate_score(const AnsatzCoefficients& a, const ScoreSpec& spec,
                       const ModelBundle& model);

struct OptimizerSettings {
    // Annealing stage: one Gaussian proposal per iteration on the six free
    // coefficients, Metropolis acceptance, geometric cooling.
    int sa_iterations = 400;
    double sa_initial_temperature = 0.05;
    double sa_cooling = 0.97;
    // Proposal sigma per coordinate; shrinks with temperature to a floor of
    // a tenth of its starting value.
    double sa_step_scale = 0.05;

    // Simplex refinement stage.
    double simplex_tol = 1e-6;
    int simplex_max_iterations = 400;

    std::uint64_t seed = 1;

    // Per-coefficient search box for (a1..a6); proposals are projected onto
    // the box, so every evaluated candidate lies inside it.
    std::array<double, 6> lower{-2.0, -2.0, -2.0, -2.0, -2.0, -2.0};
    std::array<double, 6> upper{2.0, 2.0, 2.0, 2.0, 2.0, 2.0};

    void validate() const;
};

struct OptimizeResult {
    AnsatzCoefficients best;      // dependents solved, sum rules exact
    double best_score = 0.0;
    // Best score seen so far, one entry per evaluation (monotone).
    std::vector<double> history;
    long evaluations = 0;
    // The best point sits on the search box; widen the bounds.
    bool on_boundary = false;
};

// Simulated annealing over the free coefficients followed by Nelder-Mead
// refinement of the annealing winner.  Identical inputs give bit-identical
// results for any ScoreSpec thread count.
OptimizeResult optimize_coefficients(const AnsatzCoefficients& initial,
                                     const ScoreSpec& spec,
                                     const OptimizerSettings& settings,
                                     const ModelBundle& model);

}  // namespace stapulse
