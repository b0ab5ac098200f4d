#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stapulse/dynamics.hpp"
#include "stapulse/levels.hpp"

namespace stapulse {

// Absorption trace on a strictly increasing frequency grid.  alphaL is the
// optical depth per bin.  Synthesis keeps the noiseless component
// nonnegative by construction; additive noise is deliberately left unclamped
// because truncating it at zero would bias every subsequent peak fit.
struct Spectrum {
    std::vector<double> freq_hz;
    std::vector<double> alphaL;

    void validate() const;  // grid shape only
};

// The scanned window.  The defaults cover the five readout lines and stop
// short of the third |1> line and the aux manifold.
struct SpectrumWindow {
    double lo_hz = -1.5e6;
    double hi_hz = 16.8e6;
    int n_bins = 1831;

    void validate() const;
};

// Sum of Gaussian peaks, one per transition whose line falls inside the
// window, with area = ground population times oscillator strength.  A
// positive noise amplitude adds seeded white Gaussian noise per bin.
Spectrum synthesize_spectrum(const Vector6d& populations, const LevelSystem& sys,
                             double fwhm_hz, double noise_amplitude = 0.0,
                             std::uint64_t seed = 0,
                             const SpectrumWindow& window = {});

// One fitted line.  area carries the Gaussian identity
// area = amplitude * fwhm * sqrt(pi / (4 ln 2)), and area_uncertainty is the
// 68% confidence radius from the local-linearization covariance.
struct PeakFit {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
    double amplitude = 0.0;
    double area = 0.0;
    double area_uncertainty = 0.0;
};

// Five-group averaging pipeline: the traces (a positive multiple of five,
// all on one grid) are split into five consecutive groups, each group is
// averaged and every in-window line fitted on it, and the returned per-peak
// area and uncertainty are the plain means over the five groups.  The
// amplitude is re-derived from the averaged area and width so the Gaussian
// identity survives the averaging.  Fits are reported in ascending line
// order; non-convergence names the group and line.
std::vector<PeakFit> fit_peaks(const std::vector<Spectrum>& traces,
                               const LevelSystem& sys);

struct PopulationSplit {
    double p0 = 0.0;        // share in |0>
    double p1 = 0.0;        // share in |1>, exactly 1 - p0
    double p0_sigma = 0.0;
    double p1_sigma = 0.0;
};

// Strength-normalized area pairs: the two |0> lines give P', the two |1>
// lines give P'', and the split is P' : P'' renormalized, with first-order
// error propagation from the area uncertainties.  Throws when the four
// required lines are missing or the total vanishes.
PopulationSplit populations_from_areas(const std::vector<PeakFit>& fits,
                                       const LevelSystem& sys);

// ----- files -----

// Two-column text (freq_hz, alphaL), version-tagged.
void write_spectrum_file(const std::string& path, const Spectrum& s);
Spectrum read_spectrum_file(const std::string& path);

// Per-peak rows (center, fwhm, amplitude, area, uncertainty), version-tagged.
void write_fit_report(const std::string& path, const std::vector<PeakFit>& fits);
std::vector<PeakFit> read_fit_report(const std::string& path);

}  // namespace stapulse
