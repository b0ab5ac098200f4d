#pragma once

#include <string>
#include <vector>

#include "stapulse/levels.hpp"
#include "stapulse/optimizer.hpp"
#include "stapulse/pulses.hpp"
#include "stapulse/tomography.hpp"

namespace stapulse {

// JSON configuration loaders.  Shared rules:
//   - every recognized key is listed per section; an unrecognized key is a
//     hard error naming the key and its section, never a silent ignore
//   - keys starting with "_" are annotations and are skipped everywhere
//   - units are in the key names: *_hz, *_s, *_rad
//   - all schema violations throw std::invalid_argument with the key name
//
// Each loader has a *_text form (parses the given string) and a file form.
// Defaulted sections may be omitted entirely.  `notes`, when non-null,
// collects one line per defaulted value that the schema promises to echo.

// Sections: "system", "decoherence", "ensemble".
//   system: ground_hz {aux?, one, zero}, excited_hz {e1, e2, e3},
//           strength (3x3, rows aux/one/zero, columns e1/e2/e3),
//           qubit_excited ("e1"|"e2"|"e3"), carrier_p_hz, carrier_s_hz.
//           A missing ground_hz.aux defaults to one + 17.3e6 and is echoed.
//   decoherence: t1_optical_s, t2_optical_s, t2_spin_s, branching ([3]).
//   ensemble: detuning_fwhm_hz, n_members, spectator_offsets_hz ([...]),
//             spectator_weight.
ModelBundle load_model_text(const std::string& json_text,
                            std::vector<std::string>* notes = nullptr);
ModelBundle load_model_file(const std::string& path,
                            std::vector<std::string>* notes = nullptr);

// Pulse synthesis request.  Exactly one coefficient source:
//   "case":   "swap" | "prepare" | "restore" (case1..3 spellings accepted);
//             theta defaults to the preset's design angle
//   "a":      [8] full harmonics, validated downstream against the sum rules
//   "free_a": [6] leading harmonics, a7/a8 solved from the closure rules
// Plus: theta_rad (required with "a"/"free_a"), phi_rad, t_f_s, n_samples.
struct SynthRequest {
    AnsatzCoefficients coefficients;
    double theta = 0.0;
    double phi = 0.0;
    double t_f = 4e-6;
    int n_samples = kDefaultPulseSamples;
};
SynthRequest load_synth_text(const std::string& json_text);
SynthRequest load_synth_file(const std::string& path);

// Keys: kind ("ideal"|"sech_pair"), n_samples, sech {peak_rabi_hz, beta_hz,
// mu, truncation, center_detuning_hz}.  Rabi and sweep rates are plain
// frequencies in the file and angular inside TomographySpec.
TomographySpec load_tomography_text(const std::string& json_text);
TomographySpec load_tomography_file(const std::string& path);

// Keys: score {band_halfwidth_hz, band_samples, spectator_weight, target,
// theta_rad, phi_rad, t_f_s, n_samples, with_decoherence}, optimizer
// {sa_iterations, sa_initial_temperature, sa_cooling, sa_step_scale,
// simplex_tol, simplex_max_iterations, seed, lower ([6]), upper ([6])},
// initial {"case" | "free_a"}.  target is {"level": "zero"|"one"} or
// {"theta_rad", "phi_rad"} for a qubit-block superposition.
struct OptimizeRequest {
    ScoreSpec score;
    OptimizerSettings optimizer;
    AnsatzCoefficients initial;
};
OptimizeRequest load_optimize_text(const std::string& json_text);
OptimizeRequest load_optimize_file(const std::string& path);

}  // namespace stapulse
