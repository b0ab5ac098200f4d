#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stapulse/spectra.hpp"

using namespace stapulse;

namespace {

const double kAreaFactor = std::sqrt(3.14159265358979323846 / (4.0 * 0.69314718055994531));

Vector6d ground_pops(double aux, double one, double zero) {
    Vector6d p = Vector6d::Zero();
    p(kAux) = aux;
    p(kOne) = one;
    p(kZero) = zero;
    return p;
}

double value_at(const Spectrum& s, double freq) {
    size_t best = 0;
    for (size_t i = 1; i < s.freq_hz.size(); ++i)
        if (std::abs(s.freq_hz[i] - freq) < std::abs(s.freq_hz[best] - freq)) best = i;
    return s.alphaL[best];
}

std::vector<Spectrum> copies(const Spectrum& s, int n) {
    return std::vector<Spectrum>(n, s);
}

}  // namespace

TEST_CASE("synthesis places peaks on the populated lines only") {
    const LevelSystem sys = default_model().system;

    const Spectrum one = synthesize_spectrum(ground_pops(0, 1, 0), sys, 170e3);
    CHECK(value_at(one, 10.2e6) > 1e-7);
    CHECK(value_at(one, 14.8e6) > 1e-7);
    for (double f : {0.0, 4.6e6, 9.4e6}) CHECK(value_at(one, f) < 1e-30);

    const Spectrum none = synthesize_spectrum(ground_pops(0, 0, 0), sys, 170e3);
    for (double a : none.alphaL) CHECK(a == 0.0);

    // |0> row: three in-window lines whose heights follow the strength row.
    const Spectrum zero = synthesize_spectrum(ground_pops(0, 0, 1), sys, 170e3);
    const double a1 = value_at(zero, 0.0);
    const double a2 = value_at(zero, 4.6e6);
    const double a3 = value_at(zero, 9.4e6);
    CHECK(a2 / a1 == doctest::Approx(sys.strength(kZero, kE2) / sys.strength(kZero, kE1))
                         .epsilon(1e-9));
    CHECK(a3 / a1 == doctest::Approx(sys.strength(kZero, kE3) / sys.strength(kZero, kE1))
                         .epsilon(1e-9));

    // Aux population only feeds lines beyond the window.
    const Spectrum aux = synthesize_spectrum(ground_pops(1, 0, 0), sys, 170e3);
    for (double a : aux.alphaL) CHECK(a == 0.0);
}

TEST_CASE("noiseless fits recover the synthetic peaks") {
    const LevelSystem sys = default_model().system;
    const double fwhm = 170e3;
    const Spectrum s = synthesize_spectrum(ground_pops(0.1, 0.6, 0.3), sys, fwhm);
    const auto fits = fit_peaks(copies(s, 5), sys);
    REQUIRE(fits.size() == 5);

    const double want_area[5] = {
        0.3 * sys.strength(kZero, kE1), 0.3 * sys.strength(kZero, kE2),
        0.3 * sys.strength(kZero, kE3), 0.6 * sys.strength(kOne, kE1),
        0.6 * sys.strength(kOne, kE2)};
    const double want_center[5] = {0.0, 4.6e6, 9.4e6, 10.2e6, 14.8e6};
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(fits[k].area - want_area[k]) < 1e-6 * want_area[k]);
        CHECK(std::abs(fits[k].center_hz - want_center[k]) < 1.0);
        CHECK(std::abs(fits[k].fwhm_hz - fwhm) < 1e-3 * fwhm);
        // Gaussian identity between the averaged quantities.
        CHECK(std::abs(fits[k].area - fits[k].amplitude * fits[k].fwhm_hz * kAreaFactor) <
              1e-9 * fits[k].area);
    }

    const PopulationSplit split = populations_from_areas(fits, sys);
    CHECK(split.p0 == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(split.p0 + split.p1 == 1.0);
}

TEST_CASE("area arithmetic of the population split") {
    const LevelSystem sys = default_model().system;
    auto fit_for = [&](int g, int e, double scale, double sigma) {
        PeakFit f;
        f.center_hz = sys.transition_hz(g, e);
        f.fwhm_hz = 170e3;
        f.area = scale * sys.strength(g, e);
        f.amplitude = f.area / (f.fwhm_hz * kAreaFactor);
        f.area_uncertainty = sigma;
        return f;
    };

    // Equal strength-normalized areas on both levels.
    std::vector<PeakFit> fits = {fit_for(kZero, kE1, 0.5, 0.0),
                                 fit_for(kZero, kE2, 0.5, 0.0),
                                 fit_for(kOne, kE1, 0.5, 0.0),
                                 fit_for(kOne, kE2, 0.5, 0.0)};
    PopulationSplit split = populations_from_areas(fits, sys);
    CHECK(split.p0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(split.p0_sigma == 0.0);

    // Empty |1> lines.
    fits[2].area = fits[3].area = 0.0;
    split = populations_from_areas(fits, sys);
    CHECK(split.p0 == 1.0);
    CHECK(split.p1 == 0.0);

    // First-order propagation against the closed form.
    fits = {fit_for(kZero, kE1, 1.0, 0.01), fit_for(kZero, kE2, 1.0, 0.02),
            fit_for(kOne, kE1, 1.0, 0.03), fit_for(kOne, kE2, 1.0, 0.04)};
    split = populations_from_areas(fits, sys);
    const double sz = 0.5 * std::hypot(0.01 / sys.strength(kZero, kE1),
                                       0.02 / sys.strength(kZero, kE2));
    const double so = 0.5 * std::hypot(0.03 / sys.strength(kOne, kE1),
                                       0.04 / sys.strength(kOne, kE2));
    const double want = std::hypot(1.0 * sz, 1.0 * so) / 4.0;
    CHECK(split.p0_sigma == doctest::Approx(want).epsilon(1e-12));
    CHECK(split.p1_sigma == split.p0_sigma);

    // Guards: a missing line, then a vanished total.
    fits.pop_back();
    CHECK_THROWS_AS((void)populations_from_areas(fits, sys), std::invalid_argument);
    fits = {fit_for(kZero, kE1, 0.0, 0.0), fit_for(kZero, kE2, 0.0, 0.0),
            fit_for(kOne, kE1, 0.0, 0.0), fit_for(kOne, kE2, 0.0, 0.0)};
    CHECK_THROWS_AS((void)populations_from_areas(fits, sys), std::runtime_error);
}

TEST_CASE("normalization invariance of the split") {
    const LevelSystem sys = default_model().system;
    const Spectrum a = synthesize_spectrum(ground_pops(0, 0.03, 0.97), sys, 170e3);
    const Spectrum b = synthesize_spectrum(ground_pops(0, 0.06, 1.94), sys, 170e3);
    const PopulationSplit sa = populations_from_areas(fit_peaks(copies(a, 5), sys), sys);
    const PopulationSplit sb = populations_from_areas(fit_peaks(copies(b, 5), sys), sys);
    CHECK(std::abs(sa.p0 - sb.p0) < 1e-9);
}

TEST_CASE("the noisy pipeline lands a 97/3 split inside its error bars") {
    const LevelSystem sys = default_model().system;
    const Vector6d pops = ground_pops(0.0, 0.03, 0.97);
    const Spectrum clean = synthesize_spectrum(pops, sys, 170e3);
    const double noise = 0.01 * *std::max_element(clean.alphaL.begin(), clean.alphaL.end());

    std::vector<Spectrum> traces;
    for (int k = 0; k < 100; ++k)
        traces.push_back(synthesize_spectrum(pops, sys, 170e3, noise, 1000 + k));
    const auto fits = fit_peaks(traces, sys);
    const PopulationSplit split = populations_from_areas(fits, sys);
    CHECK(std::abs(split.p0 - 0.97) < 0.02);
    CHECK(split.p0_sigma < 0.02);
    CHECK(split.p0_sigma > 0.0);
}

TEST_CASE("area confidence intervals are calibrated") {
    const LevelSystem sys = default_model().system;
    const Vector6d pops = ground_pops(0.0, 0.5, 0.5);
    const Spectrum clean = synthesize_spectrum(pops, sys, 170e3);
    const double noise = 0.01 * *std::max_element(clean.alphaL.begin(), clean.alphaL.end());
    const double truth = 0.5 * sys.strength(kZero, kE1);

    int covered = 0;
    const int n_seeds = 25;
    for (int seed = 0; seed < n_seeds; ++seed) {
        std::vector<Spectrum> traces;
        for (int k = 0; k < 100; ++k)
            traces.push_back(
                synthesize_spectrum(pops, sys, 170e3, noise, seed * 1000 + k));
        const auto fits = fit_peaks(traces, sys);
        if (std::abs(fits[0].area - truth) <= fits[0].area_uncertainty) ++covered;
    }
    // Nominal 68% coverage; the acceptance bar is deliberately looser.
    CHECK(covered >= 15);
}

TEST_CASE("spectrum and fit-report files round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "stapulse_spectra";
    std::filesystem::create_directories(dir);
    const LevelSystem sys = default_model().system;

    const Spectrum s =
        synthesize_spectrum(ground_pops(0, 0.4, 0.6), sys, 170e3, 1e-8, 7);
    const std::string spath = (dir / "trace.txt").string();
    write_spectrum_file(spath, s);
    const Spectrum back = read_spectrum_file(spath);
    CHECK(back.freq_hz == s.freq_hz);
    CHECK(back.alphaL == s.alphaL);

    const auto fits = fit_peaks(copies(s, 5), sys);
    const std::string fpath = (dir / "fits.txt").string();
    write_fit_report(fpath, fits);
    const auto fback = read_fit_report(fpath);
    REQUIRE(fback.size() == fits.size());
    for (size_t i = 0; i < fits.size(); ++i) {
        CHECK(fback[i].center_hz == fits[i].center_hz);
        CHECK(fback[i].fwhm_hz == fits[i].fwhm_hz);
        CHECK(fback[i].amplitude == fits[i].amplitude);
        CHECK(fback[i].area == fits[i].area);
        CHECK(fback[i].area_uncertainty == fits[i].area_uncertainty);
    }
    CHECK_THROWS_AS((void)read_spectrum_file((dir / "nope.txt").string()),
                    std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("input validation") {
    const LevelSystem sys = default_model().system;
    CHECK_THROWS_AS((void)synthesize_spectrum(ground_pops(0, -0.1, 0), sys, 170e3),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)synthesize_spectrum(ground_pops(0, 1, 0), sys, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)synthesize_spectrum(ground_pops(0, 1, 0), sys, 170e3, -1.0),
                    std::invalid_argument);

    const Spectrum s = synthesize_spectrum(ground_pops(0, 1, 0), sys, 170e3);
    CHECK_THROWS_AS((void)fit_peaks(copies(s, 4), sys), std::invalid_argument);
    CHECK_THROWS_AS((void)fit_peaks({}, sys), std::invalid_argument);
    auto mixed = copies(s, 5);
    mixed[3].freq_hz[0] -= 1.0;
    CHECK_THROWS_AS((void)fit_peaks(mixed, sys), std::invalid_argument);

    Spectrum bad = s;
    bad.freq_hz[5] = bad.freq_hz[4];
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.alphaL.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    SpectrumWindow w;
    w.hi_hz = w.lo_hz;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
