#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stapulse/dynamics.hpp"
#include "stapulse/tomography.hpp"

namespace stapulse {

// Outcome of one N-transfer sequence against its parity target.
struct TransferRecord {
    int n = 0;
    double phase_rad = 0.0;           // preparation phase, population runs use 0
    double overall_fidelity = 0.0;    // F(N)
    Eigen::Vector3d bloch = Eigen::Vector3d::Zero();
    Vector6d populations = Vector6d::Zero();
};

struct FidelityEstimate {
    double per_transfer_fidelity = 0.0;
    double uncertainty = 0.0;
    std::string basis;                // which ratio structure produced it
    std::vector<int> n_used;          // the N of each F(N+2)/F(N) pair
};

struct ProtocolSettings {
    PropagationSettings propagation;  // tolerances, coupling mask, checks
    bool with_decoherence = true;
    int threads = 1;
    // Residual excited population relaxes during this pre-readout wait.
    // Population runs only; superposition runs score at the last pulse edge
    // because the qubit coherence would not survive the wait.
    bool free_decay = true;
    double free_decay_s = 1e-3;
    // Superposition runs: score odd N through the tomography chain instead
    // of against the numerically known state.
    bool qst_scoring = false;
    TomographySpec tomography;
};

// N alternating transfers |1> -> |0> -> |1> -> ... on a fresh ensemble for
// each N in 1..n_max.  `forward` moves |1> to |0>; `backward` is the
// tone-swapped counterpart moving |0> back.  F(N) is scored against |0> for
// odd N and |1> for even N.
std::vector<TransferRecord> run_population_protocol(
    int n_max, const SampledPulsePair& forward, const SampledPulsePair& backward,
    const ModelBundle& model, const ProtocolSettings& s = {});

// Per-N products F(N+2)/F(N) over n_lo..n_hi-2: axis-independent readout
// factors cancel in each ratio, the square root assumes equal fidelity both
// ways, and the uncertainty is the sample spread across the ratios.
FidelityEstimate extract_pair_fidelity(const std::vector<TransferRecord>& records,
                                       int n_lo, int n_hi);

struct SuperpositionRun {
    std::vector<TransferRecord> records;    // one per (N, phase)
    std::vector<double> phases_rad;
    std::vector<double> averaged_fidelity;  // phase average, index N-1
};

// Alternating |1> -> s(phase) -> |1> sequences for every preparation phase
// in {0, pi/2, pi, 3pi/2}.  `forward` prepares the superposition from |1>
// (its phi field is overridden per phase); `backward` is the re-optimized
// time-reversed restore pulse.  Odd N scores against s(phase), even against
// |1>.
SuperpositionRun run_superposition_protocol(
    int n_max, const SampledPulsePair& forward, const SampledPulsePair& backward,
    const ModelBundle& model, const ProtocolSettings& s = {});

// Ratio extraction on the phase-averaged F(N) curve.
FidelityEstimate extract_superposition_fidelity(const SuperpositionRun& run,
                                                int n_lo, int n_hi);

// Readout-fidelity distribution over random near-equator states, each also
// measured after 90/180/270 degree rotations about Z.
struct QstStudySummary {
    std::vector<double> single_fidelity;    // 4 per drawn state
    std::vector<double> averaged_fidelity;  // four-state mean per drawn state
    double single_min = 0.0, single_max = 0.0;
    double averaged_min = 0.0, averaged_max = 0.0;
    double single_spread() const { return single_max - single_min; }
    double averaged_spread() const { return averaged_max - averaged_min; }
};

// Draws n_states pure states with Z uniform in [-0.2, 0.2] and uniform
// azimuth.  Readout uses the spec's mode on the single center-detuning ion.
QstStudySummary qst_symmetry_study(int n_states, std::uint64_t seed,
                                   const TomographySpec& spec,
                                   const ModelBundle& model,
                                   const ProtocolSettings& s = {});

// ----- tabular result files -----

// Versioned whitespace table of records: n, phase, F, bloch, populations.
void write_records(const std::string& path, const std::vector<TransferRecord>& records);
std::vector<TransferRecord> read_records(const std::string& path);

}  // namespace stapulse
