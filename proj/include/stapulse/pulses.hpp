#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stapulse/ansatz.hpp"

namespace stapulse {

// A two-tone drive sampled on a uniform closed grid [0, t_f].  Envelopes are
// signed Rabi frequencies in rad/s; the constant field phase phi sits on the
// p tone (the one addressing |1> <-> |e>).  Between samples the drive is the
// linear interpolant, which is what every propagator in this project sees.
struct SampledPulsePair {
    double t_f = 0.0;    // s
    double theta = 0.0;  // target colatitude, rad
    double phi = 0.0;    // target azimuth / p-tone phase, rad
    bool reversed = false;
    std::array<double, 8> coeffs{};  // generating harmonics, metadata only
    std::vector<double> omega_p;     // rad/s
    std::vector<double> omega_s;

    std::size_t size() const { return omega_p.size(); }
    double dt() const { return t_f / double(size() - 1); }
    double sample_p(double t) const;
    double sample_s(double t) const;
    double peak_amplitude() const;  // max |omega| over both tones
};

inline constexpr int kMinPulseSamples = 257;
inline constexpr int kDefaultPulseSamples = 1025;

// Envelope synthesis from the invariant parametrization:
//   Omega_p = -gamma' [(pi - theta) cos(gamma) sin(beta) + 2 cos(beta)]
//   Omega_s = -gamma' [(pi - theta) cos(gamma) cos(beta) - 2 sin(beta)]
// With exactly constrained coefficients both envelopes are zero at t = 0, t_f.
SampledPulsePair synthesize_pulses(const AnsatzCoefficients& c, double theta,
                                   double phi, double t_f,
                                   int n_samples = kDefaultPulseSamples);

// Omega'(t) = -Omega(t_f - t) on both tones: runs the transfer backwards, so
// the pair drives target -> |1> where the original drove |1> -> target.
// An involution at the sample level (reversing twice restores every double).
SampledPulsePair reverse_pulses(const SampledPulsePair& p);

// Exchanges the two tone envelopes; with phi = 0 this turns the |1> -> |0>
// swap into the |0> -> |1> swap used for the return half of a transfer pair.
SampledPulsePair swap_tones(const SampledPulsePair& p);

// Columnar text format, version-tagged header, round-trips doubles exactly.
void write_pulse(std::ostream& os, const SampledPulsePair& p);
SampledPulsePair read_pulse(std::istream& is);
void write_pulse_file(const std::string& path, const SampledPulsePair& p);
SampledPulsePair read_pulse_file(const std::string& path);

}  // namespace stapulse
