#include "stapulse/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "stapulse/dynamics.hpp"

namespace stapulse {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925287;
constexpr double kAuxDefaultGapHz = 17.3e6;  // aux above |1>, literature value

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
}

json parse_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

// Underscore-prefixed keys are annotations; anything else off the list is
// a schema error.
void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument(section + " must be an object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (!key.empty() && key[0] == '_') continue;
        bool known = false;
        for (const char* k : allowed)
            if (key == k) { known = true; break; }
        if (!known)
            throw std::invalid_argument("unknown key \"" + key + "\" in " + section);
    }
}

const json& member(const json& j, const std::string& section, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument("missing key \"" + std::string(key) + "\" in " + section);
    return j.at(key);
}

double as_number(const json& v, const std::string& section, const char* key) {
    if (!v.is_number())
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must be a number");
    return v.get<double>();
}

double num(const json& j, const std::string& section, const char* key) {
    return as_number(member(j, section, key), section, key);
}

double num_or(const json& j, const std::string& section, const char* key, double dflt) {
    return j.contains(key) ? as_number(j.at(key), section, key) : dflt;
}

int int_or(const json& j, const std::string& section, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must be an integer");
    return v.get<int>();
}

bool bool_or(const json& j, const std::string& section, const char* key, bool dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must be a boolean");
    return v.get<bool>();
}

std::string str(const json& j, const std::string& section, const char* key) {
    const json& v = member(j, section, key);
    if (!v.is_string())
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must be a string");
    return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& section,
                                const char* key, int expected) {
    if (!v.is_array())
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must be an array");
    if (expected >= 0 && int(v.size()) != expected)
        throw std::invalid_argument("key \"" + std::string(key) + "\" in " + section +
                                    " must have " + std::to_string(expected) + " entries");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) out.push_back(as_number(e, section, key));
    return out;
}

int parse_excited_label(const std::string& name, const std::string& section) {
    if (name == "e1") return kE1;
    if (name == "e2") return kE2;
    if (name == "e3") return kE3;
    throw std::invalid_argument("qubit_excited in " + section +
                                " must be \"e1\", \"e2\" or \"e3\", got \"" + name + "\"");
}

void load_system(const json& j, LevelSystem& sys, std::vector<std::string>* notes) {
    const std::string sec = "system";
    check_keys(j, sec, {"ground_hz", "excited_hz", "strength", "qubit_excited",
                        "carrier_p_hz", "carrier_s_hz"});

    const json& g = member(j, sec, "ground_hz");
    check_keys(g, "system.ground_hz", {"aux", "one", "zero"});
    sys.ground_hz[kOne] = num(g, "system.ground_hz", "one");
    sys.ground_hz[kZero] = num(g, "system.ground_hz", "zero");
    if (g.contains("aux")) {
        sys.ground_hz[kAux] = as_number(g.at("aux"), "system.ground_hz", "aux");
    } else {
        sys.ground_hz[kAux] = sys.ground_hz[kOne] + kAuxDefaultGapHz;
        if (notes) {
            std::ostringstream msg;
            msg << "system.ground_hz.aux defaulted to 17.3 MHz above |1>: "
                << sys.ground_hz[kAux] << " Hz";
            notes->push_back(msg.str());
        }
    }

    const json& e = member(j, sec, "excited_hz");
    check_keys(e, "system.excited_hz", {"e1", "e2", "e3"});
    sys.excited_hz[kE1] = num(e, "system.excited_hz", "e1");
    sys.excited_hz[kE2] = num(e, "system.excited_hz", "e2");
    sys.excited_hz[kE3] = num(e, "system.excited_hz", "e3");

    const json& s = member(j, sec, "strength");
    if (!s.is_array() || s.size() != 3)
        throw std::invalid_argument("strength in system must be 3 rows of 3");
    for (int r = 0; r < 3; ++r) {
        const auto row = number_list(s.at(r), sec, "strength", 3);
        for (int c = 0; c < 3; ++c) sys.strength(r, c) = row[c];
    }

    if (j.contains("qubit_excited"))
        sys.qubit_excited = parse_excited_label(str(j, sec, "qubit_excited"), sec);
    sys.carrier_p_hz = num_or(j, sec, "carrier_p_hz", 0.0);
    sys.carrier_s_hz = num_or(j, sec, "carrier_s_hz", 0.0);
}

void load_decoherence(const json& j, DecoherenceSpec& dec) {
    const std::string sec = "decoherence";
    check_keys(j, sec, {"t1_optical_s", "t2_optical_s", "t2_spin_s", "branching"});
    dec.t1_optical_s = num_or(j, sec, "t1_optical_s", dec.t1_optical_s);
    dec.t2_optical_s = num_or(j, sec, "t2_optical_s", dec.t2_optical_s);
    dec.t2_spin_s = num_or(j, sec, "t2_spin_s", dec.t2_spin_s);
    if (j.contains("branching") && !j.at("branching").is_null()) {
        const auto b = number_list(j.at("branching"), sec, "branching", 3);
        dec.branching = std::array<double, 3>{b[0], b[1], b[2]};
    }
}

void load_ensemble(const json& j, EnsembleSpec& es) {
    const std::string sec = "ensemble";
    check_keys(j, sec, {"detuning_fwhm_hz", "n_members", "spectator_offsets_hz",
                        "spectator_weight"});
    es.detuning_fwhm_hz = num_or(j, sec, "detuning_fwhm_hz", es.detuning_fwhm_hz);
    es.n_members = int_or(j, sec, "n_members", es.n_members);
    if (j.contains("spectator_offsets_hz"))
        es.spectator_offsets_hz =
            number_list(j.at("spectator_offsets_hz"), sec, "spectator_offsets_hz", -1);
    es.spectator_weight = num_or(j, sec, "spectator_weight", es.spectator_weight);
}

// Coefficient source shared by synth and the optimizer's starting point.
// `section` scopes the error messages.
AnsatzCoefficients load_coefficients(const json& j, const std::string& section,
                                     bool allow_full, Preset* preset_out) {
    const int sources = int(j.contains("case")) + int(j.contains("free_a")) +
                        int(allow_full && j.contains("a"));
    if (sources != 1)
        throw std::invalid_argument(section + " needs exactly one of \"case\"" +
                                    (allow_full ? ", \"a\"" : "") + " and \"free_a\"");
    if (j.contains("case")) {
        const Preset p = parse_preset(str(j, section, "case"));
        if (preset_out) *preset_out = p;
        return preset_coefficients(p);
    }
    if (j.contains("free_a")) {
        const auto f = number_list(j.at("free_a"), section, "free_a", 6);
        return with_dependents_solved({f[0], f[1], f[2], f[3], f[4], f[5]});
    }
    const auto full = number_list(j.at("a"), section, "a", 8);
    AnsatzCoefficients c;
    for (int i = 0; i < 8; ++i) c.a[i] = full[i];
    return c;
}

Matrix6cd load_target(const json& j, const std::string& section) {
    check_keys(j, section, {"level", "theta_rad", "phi_rad"});
    if (j.contains("level")) {
        const std::string level = str(j, section, "level");
        if (level == "zero") return pure_projector(ground_state(kZero));
        if (level == "one") return pure_projector(ground_state(kOne));
        throw std::invalid_argument("level in " + section +
                                    " must be \"zero\" or \"one\", got \"" + level + "\"");
    }
    const double theta = num(j, section, "theta_rad");
    const double phi = num_or(j, section, "phi_rad", 0.0);
    return pure_projector(qubit_state(theta, phi));
}

}  // namespace

ModelBundle load_model_text(const std::string& json_text,
                            std::vector<std::string>* notes) {
    const json j = parse(json_text);
    check_keys(j, "model config", {"system", "decoherence", "ensemble"});
    ModelBundle m = default_model();
    if (j.contains("system")) load_system(j.at("system"), m.system, notes);
    if (j.contains("decoherence")) load_decoherence(j.at("decoherence"), m.decoherence);
    if (j.contains("ensemble")) load_ensemble(j.at("ensemble"), m.ensemble);
    m.system.validate();
    m.decoherence.validate();
    m.ensemble.validate();
    return m;
}

ModelBundle load_model_file(const std::string& path, std::vector<std::string>* notes) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model_text(buf.str(), notes);
}

SynthRequest load_synth_text(const std::string& json_text) {
    const json j = parse(json_text);
    const std::string sec = "synth config";
    check_keys(j, sec, {"case", "a", "free_a", "theta_rad", "phi_rad", "t_f_s",
                        "n_samples"});
    SynthRequest r;
    Preset preset{};
    Preset* preset_ptr = j.contains("case") ? &preset : nullptr;
    r.coefficients = load_coefficients(j, sec, true, preset_ptr);
    if (preset_ptr)
        r.theta = num_or(j, sec, "theta_rad", preset_theta(preset));
    else
        r.theta = num(j, sec, "theta_rad");
    r.phi = num_or(j, sec, "phi_rad", 0.0);
    r.t_f = num_or(j, sec, "t_f_s", 4e-6);
    if (!(r.t_f > 0.0)) throw std::invalid_argument("t_f_s must be positive");
    r.n_samples = int_or(j, sec, "n_samples", kDefaultPulseSamples);
    return r;
}

SynthRequest load_synth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_synth_text(buf.str());
}

TomographySpec load_tomography_text(const std::string& json_text) {
    const json j = parse(json_text);
    const std::string sec = "tomography config";
    check_keys(j, sec, {"kind", "n_samples", "sech"});
    TomographySpec spec;
    if (j.contains("kind")) {
        const std::string kind = str(j, sec, "kind");
        if (kind == "ideal")
            spec.kind = TomographyKind::ideal;
        else if (kind == "sech_pair")
            spec.kind = TomographyKind::sech_pair;
        else
            throw std::invalid_argument(
                "kind in " + sec + " must be \"ideal\" or \"sech_pair\", got \"" + kind + "\"");
    }
    spec.n_samples = int_or(j, sec, "n_samples", spec.n_samples);
    if (j.contains("sech")) {
        const json& s = j.at("sech");
        const std::string ssec = "tomography.sech";
        check_keys(s, ssec, {"peak_rabi_hz", "beta_hz", "mu", "truncation",
                             "center_detuning_hz"});
        SechParams& p = spec.sech;
        p.peak_rabi_rad = kTwoPi * num_or(s, ssec, "peak_rabi_hz", p.peak_rabi_rad / kTwoPi);
        p.beta_rad = kTwoPi * num_or(s, ssec, "beta_hz", p.beta_rad / kTwoPi);
        p.mu = num_or(s, ssec, "mu", p.mu);
        p.truncation = num_or(s, ssec, "truncation", p.truncation);
        p.center_detuning_hz = num_or(s, ssec, "center_detuning_hz", p.center_detuning_hz);
        // A sech block in the file is checked even when the kind is ideal;
        // a config should not carry values that would fail on first use.
        p.validate();
    }
    spec.validate();
    return spec;
}

TomographySpec load_tomography_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_tomography_text(buf.str());
}

OptimizeRequest load_optimize_text(const std::string& json_text) {
    const json j = parse(json_text);
    check_keys(j, "optimize config", {"score", "optimizer", "initial"});
    OptimizeRequest r;

    const json& s = member(j, "optimize config", "score");
    const std::string ssec = "score";
    check_keys(s, ssec, {"band_halfwidth_hz", "band_samples", "spectator_weight",
                         "target", "theta_rad", "phi_rad", "t_f_s", "n_samples",
                         "with_decoherence"});
    r.score.band_halfwidth_hz = num_or(s, ssec, "band_halfwidth_hz", r.score.band_halfwidth_hz);
    r.score.band_samples = int_or(s, ssec, "band_samples", r.score.band_samples);
    r.score.spectator_weight = num_or(s, ssec, "spectator_weight", r.score.spectator_weight);
    r.score.target = load_target(member(s, ssec, "target"), "score.target");
    r.score.theta = num_or(s, ssec, "theta_rad", r.score.theta);
    r.score.phi = num_or(s, ssec, "phi_rad", r.score.phi);
    r.score.t_f = num_or(s, ssec, "t_f_s", r.score.t_f);
    r.score.n_samples = int_or(s, ssec, "n_samples", r.score.n_samples);
    r.score.with_decoherence = bool_or(s, ssec, "with_decoherence", r.score.with_decoherence);

    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        const std::string osec = "optimizer";
        check_keys(o, osec, {"sa_iterations", "sa_initial_temperature", "sa_cooling",
                             "sa_step_scale", "simplex_tol", "simplex_max_iterations",
                             "seed", "lower", "upper"});
        OptimizerSettings& t = r.optimizer;
        t.sa_iterations = int_or(o, osec, "sa_iterations", t.sa_iterations);
        t.sa_initial_temperature =
            num_or(o, osec, "sa_initial_temperature", t.sa_initial_temperature);
        t.sa_cooling = num_or(o, osec, "sa_cooling", t.sa_cooling);
        t.sa_step_scale = num_or(o, osec, "sa_step_scale", t.sa_step_scale);
        t.simplex_tol = num_or(o, osec, "simplex_tol", t.simplex_tol);
        t.simplex_max_iterations =
            int_or(o, osec, "simplex_max_iterations", t.simplex_max_iterations);
        if (o.contains("seed")) {
            const json& v = o.at("seed");
            if (!v.is_number_unsigned() && !v.is_number_integer())
                throw std::invalid_argument("key \"seed\" in optimizer must be an integer");
            t.seed = v.get<std::uint64_t>();
        }
        if (o.contains("lower")) {
            const auto lo = number_list(o.at("lower"), osec, "lower", 6);
            std::copy(lo.begin(), lo.end(), t.lower.begin());
        }
        if (o.contains("upper")) {
            const auto hi = number_list(o.at("upper"), osec, "upper", 6);
            std::copy(hi.begin(), hi.end(), t.upper.begin());
        }
    }

    const json& init = member(j, "optimize config", "initial");
    check_keys(init, "initial", {"case", "free_a"});
    r.initial = load_coefficients(init, "initial", false, nullptr);

    r.score.validate();
    r.optimizer.validate();
    return r;
}

OptimizeRequest load_optimize_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_optimize_text(buf.str());
}

}  // namespace stapulse
