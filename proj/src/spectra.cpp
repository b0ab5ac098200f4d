#include "stapulse/spectra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "stapulse/rng.hpp"

namespace stapulse {

namespace {

constexpr double kLn2 = std::numbers::ln2;
// Area of a unit-amplitude Gaussian of unit FWHM.
const double kAreaFactor = std::sqrt(std::numbers::pi / (4.0 * kLn2));

double gaussian(double x, double amp, double center, double fwhm) {
    const double u = (x - center) / fwhm;
    return amp * std::exp(-4.0 * kLn2 * u * u);
}

struct GroupFit {
    double center, fwhm, amplitude, area, sigma;
};

// Half-width of the per-line fit window; the closest line pair sits 800 kHz
// apart, so this keeps each window single-peaked.
constexpr double kFitHalfwidth = 400e3;

// Damped least squares on one window in scaled units (frequency in units of
// the initial width around the nominal center, amplitude in units of the
// initial amplitude).  Scaling keeps the normal matrix well conditioned.
GroupFit fit_one_peak(const std::vector<double>& freq, const std::vector<double>& y,
                      double nominal_hz, int group, const char* label) {
    std::vector<double> x;
    std::vector<double> v;
    for (size_t i = 0; i < freq.size(); ++i) {
        if (std::abs(freq[i] - nominal_hz) > kFitHalfwidth) continue;
        x.push_back(freq[i] - nominal_hz);
        v.push_back(y[i]);
    }
    if (x.size() < 8)
        throw std::runtime_error(std::string("too few bins to fit the ") + label +
                                 " line");

    const double amp0 = *std::max_element(v.begin(), v.end());
    if (!(amp0 > 0.0)) {
        // Nothing above the (noiseless) floor: report an empty line.
        return {nominal_hz, kFitHalfwidth / 4.0, 0.0, 0.0, 0.0};
    }

    // Moment-based width seed, clamped to sane window fractions.
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double w = std::max(v[i], 0.0);
        m0 += w;
        m1 += w * x[i];
        m2 += w * x[i] * x[i];
    }
    double w0 = kFitHalfwidth / 4.0;
    if (m0 > 0.0) {
        const double mu = m1 / m0;
        const double var = std::max(m2 / m0 - mu * mu, 0.0);
        w0 = std::clamp(std::sqrt(8.0 * kLn2 * var), kFitHalfwidth / 40.0,
                        kFitHalfwidth);
    }

    // Scaled parameters p = (amplitude, center, fwhm) starting at (1, 0, 1).
    Eigen::Vector3d p{1.0, 0.0, 1.0};
    auto chi2_of = [&](const Eigen::Vector3d& q) {
        double c = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            const double r = v[i] / amp0 - gaussian(x[i] / w0, q(0), q(1), q(2));
            c += r * r;
        }
        return c;
    };
    double chi2 = chi2_of(p);
    double lambda = 1e-3;
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    bool converged = false;
    for (int it = 0; it < 300 && !converged; ++it) {
        jtj.setZero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (size_t i = 0; i < x.size(); ++i) {
            const double s = x[i] / w0;
            const double u = (s - p(1)) / p(2);
            const double e = std::exp(-4.0 * kLn2 * u * u);
            const double r = v[i] / amp0 - p(0) * e;
            Eigen::Vector3d j;
            j(0) = e;
            j(1) = p(0) * e * 8.0 * kLn2 * u / p(2);
            j(2) = p(0) * e * 8.0 * kLn2 * u * u / p(2);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        while (true) {
            Eigen::Matrix3d damped = jtj;
            for (int d = 0; d < 3; ++d)
                damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
            const Eigen::Vector3d step = damped.ldlt().solve(jtr);
            Eigen::Vector3d q = p + step;
            q(1) = std::clamp(q(1), -kFitHalfwidth / w0, kFitHalfwidth / w0);
            q(2) = std::clamp(q(2), 0.02, 2.0 * kFitHalfwidth / w0);
            const double c = chi2_of(q);
            if (c <= chi2 + 1e-18) {
                if (chi2 - c < 1e-14 * std::max(chi2, 1e-30) &&
                    step.cwiseAbs().maxCoeff() < 1e-8)
                    converged = true;
                p = q;
                chi2 = c;
                lambda = std::max(lambda / 3.0, 1e-12);
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12)
                throw std::runtime_error(
                    std::string("peak fit did not converge in group ") +
                    std::to_string(group + 1) + " on the " + label + " line");
        }
    }
    if (!converged)
        throw std::runtime_error(std::string("peak fit did not converge in group ") +
                                 std::to_string(group + 1) + " on the " + label +
                                 " line");

    // 68% confidence on the area from the local covariance; the center does
    // not enter the area, so only the (amplitude, fwhm) block contributes.
    const int dof = int(x.size()) - 3;
    const double s2 = dof > 0 ? chi2 / double(dof) : 0.0;
    const Eigen::Matrix3d cov = s2 * jtj.inverse();
    const Eigen::Vector3d g{p(2) * kAreaFactor, 0.0, p(0) * kAreaFactor};
    const double var = std::max(0.0, double(g.transpose() * cov * g));

    GroupFit out;
    out.amplitude = p(0) * amp0;
    out.center = nominal_hz + p(1) * w0;
    out.fwhm = p(2) * w0;
    out.area = p(0) * p(2) * kAreaFactor * amp0 * w0;
    out.sigma = std::sqrt(var) * amp0 * w0;
    return out;
}

}  // namespace

void Spectrum::validate() const {
    if (freq_hz.size() != alphaL.size())
        throw std::invalid_argument("spectrum columns must match in length");
    if (freq_hz.size() < 2) throw std::invalid_argument("spectrum needs >= 2 bins");
    for (size_t i = 1; i < freq_hz.size(); ++i)
        if (!(freq_hz[i] > freq_hz[i - 1]))
            throw std::invalid_argument("frequency grid must increase strictly");
}

void SpectrumWindow::validate() const {
    if (!(hi_hz > lo_hz)) throw std::invalid_argument("window must have positive span");
    if (n_bins < 2) throw std::invalid_argument("window needs >= 2 bins");
}

Spectrum synthesize_spectrum(const Vector6d& populations, const LevelSystem& sys,
                             double fwhm_hz, double noise_amplitude,
                             std::uint64_t seed, const SpectrumWindow& window) {
    sys.validate();
    window.validate();
    if (!(fwhm_hz > 0.0)) throw std::invalid_argument("fwhm must be positive");
    if (noise_amplitude < 0.0)
        throw std::invalid_argument("noise amplitude must be nonnegative");
    for (int g = 0; g < 3; ++g)
        if (populations(g) < 0.0)
            throw std::invalid_argument("ground populations must be nonnegative");

    Spectrum s;
    s.freq_hz.resize(window.n_bins);
    s.alphaL.assign(window.n_bins, 0.0);
    const double step = (window.hi_hz - window.lo_hz) / double(window.n_bins - 1);
    for (int i = 0; i < window.n_bins; ++i) s.freq_hz[i] = window.lo_hz + step * i;

    for (const TransitionLine& line : transition_table(sys)) {
        if (line.freq_hz < window.lo_hz || line.freq_hz > window.hi_hz) continue;
        const double area = populations(line.ground) * line.strength;
        if (area == 0.0) continue;
        const double amp = area / (fwhm_hz * kAreaFactor);
        for (int i = 0; i < window.n_bins; ++i)
            s.alphaL[i] += gaussian(s.freq_hz[i], amp, line.freq_hz, fwhm_hz);
    }

    if (noise_amplitude > 0.0) {
        std::mt19937_64 rng(seed);
        for (double& a : s.alphaL) a += noise_amplitude * normal01(rng);
    }
    return s;
}

std::vector<PeakFit> fit_peaks(const std::vector<Spectrum>& traces,
                               const LevelSystem& sys) {
    if (traces.empty() || traces.size() % 5 != 0)
        throw std::invalid_argument("trace count must be a positive multiple of 5");
    traces.front().validate();
    const std::vector<double>& grid = traces.front().freq_hz;
    for (const Spectrum& t : traces)
        if (t.freq_hz != grid || t.alphaL.size() != grid.size())
            throw std::invalid_argument("all traces must share one frequency grid");

    struct Line {
        double freq;
        std::string label;
    };
    std::vector<Line> lines;
    for (const TransitionLine& line : transition_table(sys))
        if (line.freq_hz >= grid.front() && line.freq_hz <= grid.back()) {
            char label[32];
            std::snprintf(label, sizeof label, "%.3f MHz", line.freq_hz / 1e6);
            lines.push_back({line.freq_hz, label});
        }

    const size_t per_group = traces.size() / 5;
    std::vector<std::vector<GroupFit>> group_fits(5);
    for (int g = 0; g < 5; ++g) {
        std::vector<double> avg(grid.size(), 0.0);
        for (size_t t = 0; t < per_group; ++t) {
            const std::vector<double>& a = traces[g * per_group + t].alphaL;
            for (size_t i = 0; i < a.size(); ++i) avg[i] += a[i];
        }
        for (double& a : avg) a /= double(per_group);
        for (const Line& line : lines)
            group_fits[g].push_back(
                fit_one_peak(grid, avg, line.freq, g, line.label.c_str()));
    }

    std::vector<PeakFit> out;
    for (size_t k = 0; k < lines.size(); ++k) {
        PeakFit f;
        for (int g = 0; g < 5; ++g) {
            f.center_hz += group_fits[g][k].center / 5.0;
            f.fwhm_hz += group_fits[g][k].fwhm / 5.0;
            f.area += group_fits[g][k].area / 5.0;
            f.area_uncertainty += group_fits[g][k].sigma / 5.0;
        }
        f.amplitude = f.area / (f.fwhm_hz * kAreaFactor);
        out.push_back(f);
    }
    return out;
}

PopulationSplit populations_from_areas(const std::vector<PeakFit>& fits,
                                       const LevelSystem& sys) {
    sys.validate();
    auto line_area = [&](int ground, int excited, double* sigma) {
        const double want = sys.transition_hz(ground, excited);
        for (const PeakFit& f : fits)
            if (std::abs(f.center_hz - want) < 0.5 * kFitHalfwidth) {
                *sigma = f.area_uncertainty;
                return f.area;
            }
        throw std::invalid_argument("missing fitted line near " +
                                    std::to_string(want * 1e-6) + " MHz");
    };

    double s1, s2, s4, s5;
    const double pa1 = line_area(kZero, kE1, &s1);
    const double pa2 = line_area(kZero, kE2, &s2);
    const double pa4 = line_area(kOne, kE1, &s4);
    const double pa5 = line_area(kOne, kE2, &s5);
    const double f01 = sys.strength(kZero, kE1);
    const double f02 = sys.strength(kZero, kE2);
    const double f11 = sys.strength(kOne, kE1);
    const double f12 = sys.strength(kOne, kE2);
    if (!(f01 > 0.0) || !(f02 > 0.0) || !(f11 > 0.0) || !(f12 > 0.0))
        throw std::invalid_argument("readout lines need positive strengths");

    const double pz = 0.5 * (pa1 / f01 + pa2 / f02);
    const double po = 0.5 * (pa4 / f11 + pa5 / f12);
    const double sz = 0.5 * std::hypot(s1 / f01, s2 / f02);
    const double so = 0.5 * std::hypot(s4 / f11, s5 / f12);
    const double total = pz + po;
    if (!(total > 0.0))
        throw std::runtime_error("no population detected in either qubit level");

    PopulationSplit split;
    split.p0 = pz / total;
    split.p1 = 1.0 - split.p0;  // keeps the shares summing to one exactly
    const double d = total * total;
    split.p0_sigma = std::hypot(po * sz, pz * so) / d;
    split.p1_sigma = split.p0_sigma;
    return split;
}

void write_spectrum_file(const std::string& path, const Spectrum& s) {
    s.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# spectrum v1\n# freq_hz alphaL\n";
    char buf[80];
    for (size_t i = 0; i < s.freq_hz.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", s.freq_hz[i], s.alphaL[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

Spectrum read_spectrum_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# spectrum v1")
        throw std::runtime_error("unrecognized spectrum file header");
    Spectrum s;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double f, a;
        if (!(row >> f >> a)) throw std::runtime_error("malformed spectrum row: " + line);
        s.freq_hz.push_back(f);
        s.alphaL.push_back(a);
    }
    s.validate();
    return s;
}

void write_fit_report(const std::string& path, const std::vector<PeakFit>& fits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# peak-fits v1\n# center_hz fwhm_hz amplitude area area_sigma\n";
    char buf[160];
    for (const PeakFit& f : fits) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g\n", f.center_hz,
                      f.fwhm_hz, f.amplitude, f.area, f.area_uncertainty);
        out << buf;
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<PeakFit> read_fit_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# peak-fits v1")
        throw std::runtime_error("unrecognized fit report header");
    std::vector<PeakFit> fits;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        PeakFit f;
        if (!(row >> f.center_hz >> f.fwhm_hz >> f.amplitude >> f.area >>
              f.area_uncertainty))
            throw std::runtime_error("malformed fit row: " + line);
        fits.push_back(f);
    }
    return fits;
}

}  // namespace stapulse
