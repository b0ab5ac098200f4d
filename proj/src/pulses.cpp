#include "stapulse/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stapulse {

namespace {

double lerp_sample(const std::vector<double>& v, double t, double t_f) {
    if (t <= 0.0) return v.front();
    if (t >= t_f) return v.back();
    const double x = t / t_f * double(v.size() - 1);
    const auto i = std::min<std::size_t>(std::size_t(x), v.size() - 2);
    const double w = x - double(i);
    return v[i] + w * (v[i + 1] - v[i]);
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

double SampledPulsePair::sample_p(double t) const { return lerp_sample(omega_p, t, t_f); }
double SampledPulsePair::sample_s(double t) const { return lerp_sample(omega_s, t, t_f); }

double SampledPulsePair::peak_amplitude() const {
    double m = 0.0;
    for (double v : omega_p) m = std::max(m, std::abs(v));
    for (double v : omega_s) m = std::max(m, std::abs(v));
    return m;
}

SampledPulsePair synthesize_pulses(const AnsatzCoefficients& c, double theta,
                                   double phi, double t_f, int n_samples) {
    if (t_f <= 0.0) throw std::invalid_argument("pulse duration must be positive");
    if (n_samples < kMinPulseSamples)
        throw std::invalid_argument("pulse grid too coarse (need >= 257 samples)");

    SampledPulsePair out;
    out.t_f = t_f;
    out.theta = theta;
    out.phi = phi;
    out.coeffs = c.a;
    out.omega_p.resize(n_samples);
    out.omega_s.resize(n_samples);

    const double pt = std::acos(-1.0) - theta;
    for (int k = 0; k < n_samples; ++k) {
        const double s = double(k) / double(n_samples - 1);
        const double g = transfer_angle(c, s);
        const double b = mixing_angle(g, theta);
        const double gdot = transfer_angle_rate_scaled(c, s) / t_f;
        out.omega_p[k] = -gdot * (pt * std::cos(g) * std::sin(b) + 2.0 * std::cos(b));
        out.omega_s[k] = -gdot * (pt * std::cos(g) * std::cos(b) - 2.0 * std::sin(b));
    }
    return out;
}

SampledPulsePair reverse_pulses(const SampledPulsePair& p) {
    SampledPulsePair out = p;
    std::reverse(out.omega_p.begin(), out.omega_p.end());
    std::reverse(out.omega_s.begin(), out.omega_s.end());
    for (double& v : out.omega_p) v = -v;
    for (double& v : out.omega_s) v = -v;
    out.reversed = !p.reversed;
    return out;
}

SampledPulsePair swap_tones(const SampledPulsePair& p) {
    SampledPulsePair out = p;
    std::swap(out.omega_p, out.omega_s);
    return out;
}

void write_pulse(std::ostream& os, const SampledPulsePair& p) {
    os << "# stapulse pulse v1\n";
    os << "# t_f_s " << fmt_double(p.t_f) << "\n";
    os << "# theta_rad " << fmt_double(p.theta) << "\n";
    os << "# phi_rad " << fmt_double(p.phi) << "\n";
    os << "# reversed " << (p.reversed ? 1 : 0) << "\n";
    os << "# coeffs";
    for (double a : p.coeffs) os << ' ' << fmt_double(a);
    os << "\n# columns time_s omega_p_rad_s omega_s_rad_s\n";
    const double dt = p.dt();
    for (std::size_t k = 0; k < p.size(); ++k)
        os << fmt_double(double(k) * dt) << ' ' << fmt_double(p.omega_p[k]) << ' '
           << fmt_double(p.omega_s[k]) << "\n";
}

SampledPulsePair read_pulse(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "# stapulse pulse v1")
        throw std::runtime_error("not a stapulse pulse file (bad or missing version header)");

    SampledPulsePair p;
    bool have_tf = false;
    while (is.peek() == '#') {
        std::getline(is, line);
        std::istringstream ls(line.substr(1));
        std::string key;
        ls >> key;
        if (key == "t_f_s") { ls >> p.t_f; have_tf = true; }
        else if (key == "theta_rad") ls >> p.theta;
        else if (key == "phi_rad") ls >> p.phi;
        else if (key == "reversed") { int r = 0; ls >> r; p.reversed = r != 0; }
        else if (key == "coeffs") for (double& a : p.coeffs) ls >> a;
        else if (key == "columns") { /* descriptive only */ }
        else throw std::runtime_error("unknown pulse header field: " + key);
        if (ls.fail()) throw std::runtime_error("malformed pulse header line: " + line);
    }
    if (!have_tf) throw std::runtime_error("pulse file missing t_f_s header");

    double t, wp, ws;
    while (is >> t >> wp >> ws) {
        p.omega_p.push_back(wp);
        p.omega_s.push_back(ws);
    }
    if (p.size() < std::size_t(kMinPulseSamples))
        throw std::runtime_error("pulse file has fewer than 257 samples");
    return p;
}

void write_pulse_file(const std::string& path, const SampledPulsePair& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_pulse(os, p);
    if (!os) throw std::runtime_error("write failed: " + path);
}

SampledPulsePair read_pulse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_pulse(is);
}

}  // namespace stapulse
