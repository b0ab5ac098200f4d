// Command-line front end: pulse synthesis, open-system simulation, transfer
// protocols, coefficient optimization, the readout-symmetry study and
// absorption-spectrum analysis.  Every command writes its result tables plus
// a manifest that digests the exact input bytes, so identical manifests
// (wall time aside) imply byte-identical result files.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical
// failure (including coefficient-constraint violations), 4 --check failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stapulse/config.hpp"
#include "stapulse/dynamics.hpp"
#include "stapulse/manifest.hpp"
#include "stapulse/optimizer.hpp"
#include "stapulse/protocol.hpp"
#include "stapulse/spectra.hpp"
#include "stapulse/tomography.hpp"

namespace {

using namespace stapulse;

// Raised when a --check bound is violated; mapped to exit code 4.
struct CheckFailure : std::exception {
    std::string message;
    explicit CheckFailure(std::string m) : message(std::move(m)) {}
    const char* what() const noexcept override { return message.c_str(); }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Inputs are digested on first touch, so the manifest pins what was read
// even when a later stage fails.
struct RunContext {
    RunManifest manifest;
    std::string manifest_path;  // empty: next to the first output
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit RunContext(std::string command) { manifest.command = std::move(command); }

    void input(const std::string& path) {
        manifest.config_digests.push_back({path, sha256_file(path)});
    }
    void param(const std::string& key, const std::string& value) {
        manifest.parameters.push_back({key, value});
    }
    void output(const std::string& path) { manifest.outputs.push_back(path); }
    void seed(std::uint64_t s) {
        manifest.seeded = true;
        manifest.seed = s;
    }

    void finish() {
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string path = manifest_path;
        if (path.empty())
            path = (manifest.outputs.empty() ? manifest.command : manifest.outputs.front()) +
                   ".manifest.json";
        write_manifest(path, manifest);
        std::cout << "manifest " << path << "\n";
    }
};

ModelBundle load_model(const std::string& path, RunContext& ctx) {
    if (path.empty()) return default_model();
    ctx.input(path);
    std::vector<std::string> notes;
    ModelBundle m = load_model_file(path, &notes);
    for (const std::string& note : notes) std::cout << "note: " << note << "\n";
    return m;
}

CouplingMask parse_mask(const std::string& name) {
    if (name == "resonant") return CouplingMask::resonant_only;
    if (name == "qubit") return CouplingMask::qubit_only;
    return CouplingMask::all;
}

// ----- synth -----

struct SynthArgs {
    std::string config, preset, reverse_in, swap_in, out, manifest;
    double theta = NAN, phi = NAN, t_f = NAN;
    int n_samples = 0;
};

void run_synth(const SynthArgs& a) {
    RunContext ctx("synth");
    ctx.manifest_path = a.manifest;

    const int sources = int(!a.config.empty()) + int(!a.preset.empty()) +
                        int(!a.reverse_in.empty()) + int(!a.swap_in.empty());
    if (sources != 1)
        throw std::invalid_argument(
            "synth needs exactly one of --config, --case, --reverse, --swap-tones");

    SampledPulsePair pulse;
    if (!a.reverse_in.empty()) {
        ctx.input(a.reverse_in);
        pulse = reverse_pulses(read_pulse_file(a.reverse_in));
        ctx.param("reverse", a.reverse_in);
    } else if (!a.swap_in.empty()) {
        ctx.input(a.swap_in);
        pulse = swap_tones(read_pulse_file(a.swap_in));
        ctx.param("swap-tones", a.swap_in);
    } else {
        SynthRequest req;
        if (!a.config.empty()) {
            ctx.input(a.config);
            req = load_synth_file(a.config);
        } else {
            const Preset p = parse_preset(a.preset);
            req.coefficients = preset_coefficients(p);
            req.theta = preset_theta(p);
            ctx.param("case", preset_name(p));
        }
        if (!std::isnan(a.theta)) req.theta = a.theta;
        if (!std::isnan(a.phi)) req.phi = a.phi;
        if (!std::isnan(a.t_f)) req.t_f = a.t_f;
        if (a.n_samples > 0) req.n_samples = a.n_samples;

        // The closure rules carry the zero-endpoint guarantee; violating
        // them is a numerical defect of the coefficients, not a parse
        // problem, and is reported under the numerical-failure exit code.
        constexpr double kRuleTol = 1e-6;
        const double odd = req.coefficients.odd_rule_residual();
        if (std::abs(odd) > kRuleTol)
            throw std::runtime_error(
                "coefficient constraint violated: a1 + 3 a3 + 5 a5 + 7 a7 = " + fmt(odd) +
                ", must vanish");
        const double even = req.coefficients.even_rule_residual();
        if (std::abs(even) > kRuleTol)
            throw std::runtime_error(
                "coefficient constraint violated: a2 + 2 a4 + 3 a6 + 4 a8 + 1/2 = " +
                fmt(even) + ", must vanish");

        pulse = synthesize_pulses(req.coefficients, req.theta, req.phi, req.t_f,
                                  req.n_samples);
        ctx.param("theta_rad", fmt(req.theta));
        ctx.param("phi_rad", fmt(req.phi));
        ctx.param("t_f_s", fmt(req.t_f));
        ctx.param("n_samples", std::to_string(req.n_samples));
    }

    write_pulse_file(a.out, pulse);
    ctx.output(a.out);
    std::cout << "samples " << pulse.size() << "\n"
              << "peak_rabi_rad_per_s " << fmt(pulse.peak_amplitude()) << "\n"
              << "wrote " << a.out << "\n";
    ctx.finish();
}

// ----- simulate -----

struct SimulateArgs {
    std::string pulses, model, out, manifest;
    std::string start = "one", mask = "all";
    double detuning_hz = 0.0, start_theta = NAN, start_phi = 0.0;
    double rel_tol = 1e-6, abs_tol = 1e-6;
    int rows = 201;
    bool no_decoherence = false;
};

void run_simulate(const SimulateArgs& a) {
    RunContext ctx("simulate");
    ctx.manifest_path = a.manifest;

    ctx.input(a.pulses);
    const SampledPulsePair pulse = read_pulse_file(a.pulses);
    const ModelBundle model = load_model(a.model, ctx);

    const SixLevelModel ion(model.system,
                            a.no_decoherence ? nullptr : &model.decoherence,
                            a.detuning_hz, parse_mask(a.mask));
    PropagationSettings st;
    st.rel_tol = a.rel_tol;
    st.abs_tol = a.abs_tol;
    st.mask = parse_mask(a.mask);

    Vector6cd psi0;
    if (!std::isnan(a.start_theta)) {
        psi0 = qubit_state(a.start_theta, a.start_phi);
    } else if (a.start == "one") {
        psi0 = ground_state(kOne);
    } else if (a.start == "zero") {
        psi0 = ground_state(kZero);
    } else {
        psi0 = ground_state(kAux);
    }
    Matrix6cd rho = psi0 * psi0.adjoint();

    const SegmentDrive full = SegmentDrive::from_pulse(pulse);
    const int n = int(pulse.size());
    const int rows = std::max(2, std::min(a.rows, n));
    const double dt = pulse.dt();

    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write trajectory: " + a.out);
    out << "# trajectory v1\n"
        << "# t_s p_aux p_one p_zero p_e1 p_e2 p_e3 coh01\n";
    const auto emit = [&](double t) {
        const Vector6d p = populations(rho);
        out << fmt(t);
        for (int i = 0; i < 6; ++i) out << " " << fmt(p[i]);
        out << " " << fmt(std::abs(rho(kOne, kZero))) << "\n";
    };

    emit(0.0);
    double t0 = 0.0;
    int prev = 0;
    for (int j = 1; j < rows; ++j) {
        const int k = int(std::lround(double(j) * (n - 1) / (rows - 1)));
        if (k <= prev) continue;
        SegmentDrive sub;
        sub.duration = double(k - prev) * dt;
        if (!full.amp_p.empty()) {
            sub.amp_p.assign(full.amp_p.begin() + prev, full.amp_p.begin() + k + 1);
            sub.amp_s.assign(full.amp_s.begin() + prev, full.amp_s.begin() + k + 1);
        }
        t0 = propagate_segment(rho, sub, ion, t0, st);
        emit(double(k) * dt);
        prev = k;
    }
    ctx.output(a.out);

    const Vector6d p = populations(rho);
    std::cout << "final_populations";
    for (int i = 0; i < 6; ++i) std::cout << " " << fmt(p[i]);
    std::cout << "\n";
    ctx.param("detuning_hz", fmt(a.detuning_hz));
    ctx.param("mask", a.mask);
    ctx.finish();
}

// ----- protocol -----

struct ProtocolArgs {
    std::string mode = "population", preset, forward, backward, model, out, manifest;
    std::string tomography;
    int n_max = 4, n_lo = 1, n_hi = 0, threads = 1, members = 0;
    double t2_s = NAN, t_f = 4e-6, free_decay_s = NAN;
    int n_samples = kDefaultPulseSamples;
    bool no_decoherence = false, no_free_decay = false, qst = false, check = false;
    double check_lo = NAN, check_hi = NAN;
};

void run_protocol(const ProtocolArgs& a) {
    RunContext ctx("protocol");
    ctx.manifest_path = a.manifest;

    ModelBundle model = load_model(a.model, ctx);
    if (!std::isnan(a.t2_s)) model.decoherence.t2_optical_s = a.t2_s;
    if (a.members > 0) model.ensemble.n_members = a.members;
    model.decoherence.validate();
    model.ensemble.validate();

    ProtocolSettings s;
    s.threads = a.threads;
    s.with_decoherence = !a.no_decoherence;
    if (a.no_free_decay) s.free_decay = false;
    if (!std::isnan(a.free_decay_s)) s.free_decay_s = a.free_decay_s;
    if (a.qst) {
        if (a.mode != "superposition")
            throw std::invalid_argument("--qst applies to superposition mode only");
        s.qst_scoring = true;
        if (!a.tomography.empty()) {
            ctx.input(a.tomography);
            s.tomography = load_tomography_file(a.tomography);
        }
    }

    const bool population = a.mode == "population";
    SampledPulsePair forward, backward;
    if (!a.forward.empty() != !a.backward.empty())
        throw std::invalid_argument("--forward and --backward come as a pair");
    if (!a.forward.empty()) {
        ctx.input(a.forward);
        ctx.input(a.backward);
        forward = read_pulse_file(a.forward);
        backward = read_pulse_file(a.backward);
    } else if (population) {
        const Preset p = a.preset.empty() ? Preset::swap : parse_preset(a.preset);
        forward = synthesize_pulses(preset_coefficients(p), preset_theta(p), 0.0,
                                    a.t_f, a.n_samples);
        backward = swap_tones(forward);
        ctx.param("case", preset_name(p));
    } else {
        // The return pulse family is optimized for the reversed transfer;
        // time reversal of its synthesis drives target -> |1>.
        forward = synthesize_pulses(preset_coefficients(Preset::prepare),
                                    preset_theta(Preset::prepare), 0.0, a.t_f,
                                    a.n_samples);
        backward = reverse_pulses(
            synthesize_pulses(preset_coefficients(Preset::restore),
                              preset_theta(Preset::restore), 0.0, a.t_f, a.n_samples));
        ctx.param("case", "prepare/restore");
    }

    const int n_hi = a.n_hi > 0 ? a.n_hi : a.n_max;
    const bool extractable = n_hi >= a.n_lo + 2;
    if (a.check && !extractable)
        throw std::invalid_argument("--check needs an extraction window spanning N and N+2");
    FidelityEstimate est;
    if (population) {
        const auto records = run_population_protocol(a.n_max, forward, backward, model, s);
        write_records(a.out, records);
        if (extractable) est = extract_pair_fidelity(records, a.n_lo, n_hi);
    } else {
        const auto run = run_superposition_protocol(a.n_max, forward, backward, model, s);
        write_records(a.out, run.records);
        if (extractable) est = extract_superposition_fidelity(run, a.n_lo, n_hi);
    }
    ctx.output(a.out);

    ctx.param("mode", a.mode);
    ctx.param("nmax", std::to_string(a.n_max));
    ctx.param("t2_optical_s", fmt(model.decoherence.t2_optical_s));
    ctx.param("n_members", std::to_string(model.ensemble.n_members));
    if (extractable) {
        std::cout << "per_transfer_fidelity " << fmt(est.per_transfer_fidelity) << "\n"
                  << "uncertainty " << fmt(est.uncertainty) << "\n"
                  << "basis " << est.basis << "\n";
        ctx.param("per_transfer_fidelity", fmt(est.per_transfer_fidelity));
    } else {
        std::cout << "note: window too short for ratio extraction, records only\n";
    }

    if (a.check) {
        const double lo = std::isnan(a.check_lo) ? (population ? 0.95 : 0.97) : a.check_lo;
        const double hi = std::isnan(a.check_hi) ? 0.99 : a.check_hi;
        if (!(est.per_transfer_fidelity >= lo && est.per_transfer_fidelity <= hi))
            throw CheckFailure("per-transfer fidelity " + fmt(est.per_transfer_fidelity) +
                               " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
        std::cout << "check passed: fidelity within [" << fmt(lo) << ", " << fmt(hi)
                  << "]\n";
    }
    ctx.finish();
}

// ----- optimize -----

struct OptimizeArgs {
    std::string config, model, out_prefix, manifest;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void run_optimize(const OptimizeArgs& a) {
    RunContext ctx("optimize");
    ctx.manifest_path = a.manifest;

    ctx.input(a.config);
    OptimizeRequest req = load_optimize_file(a.config);
    const ModelBundle model = load_model(a.model, ctx);
    if (a.seed_given) req.optimizer.seed = a.seed;
    req.score.threads = a.threads;
    ctx.seed(req.optimizer.seed);

    const OptimizeResult result =
        optimize_coefficients(req.initial, req.score, req.optimizer, model);

    const std::string pulse_path = a.out_prefix + ".pulse";
    write_pulse_file(pulse_path,
                     synthesize_pulses(result.best, req.score.theta, req.score.phi,
                                       req.score.t_f, req.score.n_samples));
    ctx.output(pulse_path);

    const std::string trace_path = a.out_prefix + ".trace";
    {
        std::ofstream out(trace_path);
        if (!out) throw std::runtime_error("cannot write score trace: " + trace_path);
        out << "# score-trace v1\n# evaluation best_score\n";
        for (std::size_t i = 0; i < result.history.size(); ++i)
            out << i << " " << fmt(result.history[i]) << "\n";
    }
    ctx.output(trace_path);

    std::cout << "best_score " << fmt(result.best_score) << "\n";
    std::cout << "coefficients";
    for (double v : result.best.a) std::cout << " " << fmt(v);
    std::cout << "\nevaluations " << result.evaluations << "\n";
    if (result.on_boundary)
        std::cout << "note: best point sits on the search box; widen the bounds\n";
    std::ostringstream coeffs;
    for (double v : result.best.a) coeffs << fmt(v) << " ";
    ctx.param("best_score", fmt(result.best_score));
    ctx.param("best_coefficients", coeffs.str());
    ctx.param("evaluations", std::to_string(result.evaluations));
    ctx.finish();
}

// ----- qst-study -----

struct QstStudyArgs {
    std::string tomography, model, out, manifest;
    int n_states = 100, threads = 1;
    std::uint64_t seed = 7;
};

void run_qst_study(const QstStudyArgs& a) {
    RunContext ctx("qst-study");
    ctx.manifest_path = a.manifest;

    const ModelBundle model = load_model(a.model, ctx);
    TomographySpec spec;
    if (!a.tomography.empty()) {
        ctx.input(a.tomography);
        spec = load_tomography_file(a.tomography);
    }
    ProtocolSettings s;
    s.threads = a.threads;
    ctx.seed(a.seed);

    const QstStudySummary study = qst_symmetry_study(a.n_states, a.seed, spec, model, s);

    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write study table: " + a.out);
    out << "# qst-study v1\n# state f_0 f_90 f_180 f_270 f_avg\n";
    for (int k = 0; k < a.n_states; ++k) {
        out << k;
        for (int r = 0; r < 4; ++r) out << " " << fmt(study.single_fidelity[4 * k + r]);
        out << " " << fmt(study.averaged_fidelity[k]) << "\n";
    }
    out.close();
    ctx.output(a.out);

    std::cout << "single_min " << fmt(study.single_min) << "\n"
              << "single_max " << fmt(study.single_max) << "\n"
              << "single_spread " << fmt(study.single_spread()) << "\n"
              << "averaged_min " << fmt(study.averaged_min) << "\n"
              << "averaged_max " << fmt(study.averaged_max) << "\n"
              << "averaged_spread " << fmt(study.averaged_spread()) << "\n";
    ctx.param("n_states", std::to_string(a.n_states));
    ctx.param("mode", spec.kind == TomographyKind::ideal ? "ideal" : "sech_pair");
    ctx.finish();
}

// ----- spectra -----

struct SpectraArgs {
    bool synth = false;
    std::vector<std::string> fit_files;
    std::string model, out, manifest;
    double p_aux = 0.0, p_one = 0.03, p_zero = 0.97;
    double fwhm_hz = 170e3, noise = 0.0, noise_rel = NAN;
    int traces = 5;
    std::uint64_t seed = 1;
    bool check = false;
    double expect_p0 = NAN, tol = 0.02;
};

void run_spectra(const SpectraArgs& a) {
    RunContext ctx("spectra");
    ctx.manifest_path = a.manifest;
    const ModelBundle model = load_model(a.model, ctx);

    if (a.synth == !a.fit_files.empty())
        throw std::invalid_argument("spectra needs exactly one of --synth and --fit");

    if (a.synth) {
        Vector6d pops = Vector6d::Zero();
        pops[kAux] = a.p_aux;
        pops[kOne] = a.p_one;
        pops[kZero] = a.p_zero;
        ctx.seed(a.seed);

        double noise = a.noise;
        if (!std::isnan(a.noise_rel)) {
            // Relative noise is anchored to the tallest noiseless feature.
            const Spectrum clean =
                synthesize_spectrum(pops, model.system, a.fwhm_hz, 0.0, 0);
            const double peak =
                *std::max_element(clean.alphaL.begin(), clean.alphaL.end());
            noise = a.noise_rel * peak;
        }

        for (int k = 0; k < a.traces; ++k) {
            const Spectrum s = synthesize_spectrum(pops, model.system, a.fwhm_hz,
                                                   noise, a.seed + std::uint64_t(k));
            char name[32];
            std::snprintf(name, sizeof name, "_%03d.spec", k);
            const std::string path = a.out + name;
            write_spectrum_file(path, s);
            ctx.output(path);
        }
        std::cout << "wrote " << a.traces << " traces\n";
        ctx.param("p_zero", fmt(a.p_zero));
        ctx.param("p_one", fmt(a.p_one));
        ctx.param("noise_amplitude", fmt(noise));
        ctx.finish();
        return;
    }

    std::vector<Spectrum> traces;
    traces.reserve(a.fit_files.size());
    for (const std::string& path : a.fit_files) {
        ctx.input(path);
        traces.push_back(read_spectrum_file(path));
    }
    const std::vector<PeakFit> fits = fit_peaks(traces, model.system);
    write_fit_report(a.out, fits);
    ctx.output(a.out);

    const PopulationSplit split = populations_from_areas(fits, model.system);
    std::cout << "p0 " << fmt(split.p0) << "\n"
              << "p1 " << fmt(split.p1) << "\n"
              << "p0_sigma " << fmt(split.p0_sigma) << "\n";
    ctx.param("p0", fmt(split.p0));
    ctx.param("p0_sigma", fmt(split.p0_sigma));

    if (a.check) {
        if (std::isnan(a.expect_p0))
            throw std::invalid_argument("--check needs --expect-p0");
        if (!(std::abs(split.p0 - a.expect_p0) <= a.tol))
            throw CheckFailure("recovered p0 " + fmt(split.p0) + " deviates from " +
                               fmt(a.expect_p0) + " by more than " + fmt(a.tol));
        std::cout << "check passed: p0 within " << fmt(a.tol) << " of "
                  << fmt(a.expect_p0) << "\n";
    }
    ctx.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-tone pulse toolkit: synthesis, six-level simulation, "
                 "transfer protocols, coefficient optimization, readout studies "
                 "and spectrum analysis"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cs = app.add_subcommand("synth", "Synthesize or transform a pulse file");
    cs->add_option("--config", synth.config, "Synthesis request (JSON)")
        ->check(CLI::ExistingFile);
    cs->add_option("--case", synth.preset, "Built-in coefficient set (swap|prepare|restore)");
    cs->add_option("--reverse", synth.reverse_in, "Time-reverse this pulse file")
        ->check(CLI::ExistingFile);
    cs->add_option("--swap-tones", synth.swap_in, "Exchange the tones of this pulse file")
        ->check(CLI::ExistingFile);
    cs->add_option("--theta", synth.theta, "Target colatitude, rad");
    cs->add_option("--phi", synth.phi, "Target azimuth, rad");
    cs->add_option("--tf", synth.t_f, "Pulse duration, s");
    cs->add_option("--samples", synth.n_samples, "Envelope grid points");
    cs->add_option("-o,--output", synth.out, "Pulse file to write")->required();
    cs->add_option("--manifest", synth.manifest, "Manifest path");
    cs->callback([&] { run_synth(synth); });

    SimulateArgs sim;
    auto* ci = app.add_subcommand("simulate",
                                  "Propagate one ion under a pulse file, dump trajectory");
    ci->add_option("--pulses", sim.pulses, "Pulse file")->required()->check(CLI::ExistingFile);
    ci->add_option("--model", sim.model, "Medium config (JSON)")->check(CLI::ExistingFile);
    ci->add_option("--detuning", sim.detuning_hz, "Ion detuning, Hz");
    ci->add_option("--start", sim.start, "Initial level (aux|one|zero)")
        ->check(CLI::IsMember({"aux", "one", "zero"}));
    ci->add_option("--start-theta", sim.start_theta, "Superposition start colatitude, rad");
    ci->add_option("--start-phi", sim.start_phi, "Superposition start azimuth, rad");
    ci->add_option("--mask", sim.mask, "Driven transitions (resonant|qubit|all)")
        ->check(CLI::IsMember({"resonant", "qubit", "all"}));
    ci->add_option("--rel-tol", sim.rel_tol, "Integrator relative tolerance");
    ci->add_option("--abs-tol", sim.abs_tol, "Integrator absolute tolerance");
    ci->add_option("--rows", sim.rows, "Trajectory rows");
    ci->add_flag("--no-decoherence", sim.no_decoherence, "Closed-system propagation");
    ci->add_option("-o,--output", sim.out, "Trajectory file to write")->required();
    ci->add_option("--manifest", sim.manifest, "Manifest path");
    ci->callback([&] { run_simulate(sim); });

    ProtocolArgs prot;
    auto* cp = app.add_subcommand("protocol",
                                  "Back-and-forth transfer sequences with fidelity extraction");
    cp->add_option("--mode", prot.mode, "population|superposition")
        ->check(CLI::IsMember({"population", "superposition"}));
    cp->add_option("--nmax", prot.n_max, "Longest sequence length");
    cp->add_option("--nlo", prot.n_lo, "First N of the extraction window");
    cp->add_option("--nhi", prot.n_hi, "Last N of the extraction window");
    cp->add_option("--case", prot.preset, "Coefficient set for synthesized pulses");
    cp->add_option("--forward", prot.forward, "Forward pulse file")->check(CLI::ExistingFile);
    cp->add_option("--backward", prot.backward, "Backward pulse file")->check(CLI::ExistingFile);
    cp->add_option("--tf", prot.t_f, "Synthesized pulse duration, s");
    cp->add_option("--samples", prot.n_samples, "Synthesized envelope grid points");
    cp->add_option("--model", prot.model, "Medium config (JSON)")->check(CLI::ExistingFile);
    cp->add_option("--t2", prot.t2_s, "Optical T2 override, s");
    cp->add_option("--members", prot.members, "Ensemble members override");
    cp->add_option("--threads", prot.threads, "Worker threads");
    cp->add_flag("--no-decoherence", prot.no_decoherence, "Closed-system propagation");
    cp->add_flag("--no-free-decay", prot.no_free_decay, "Skip the pre-readout wait");
    cp->add_option("--free-decay-s", prot.free_decay_s, "Pre-readout wait, s");
    cp->add_flag("--qst", prot.qst, "Score odd sequences through simulated tomography");
    cp->add_option("--tomography", prot.tomography, "Readout config (JSON)")
        ->check(CLI::ExistingFile);
    cp->add_flag("--check", prot.check, "Fail unless the extracted fidelity is in band");
    cp->add_option("--check-lo", prot.check_lo, "Check band lower edge");
    cp->add_option("--check-hi", prot.check_hi, "Check band upper edge");
    cp->add_option("-o,--output", prot.out, "Records table to write")->required();
    cp->add_option("--manifest", prot.manifest, "Manifest path");
    cp->callback([&] { run_protocol(prot); });

    OptimizeArgs opt;
    auto* co = app.add_subcommand("optimize", "Search the free ansatz coefficients");
    co->add_option("--config", opt.config, "Optimization request (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    co->add_option("--model", opt.model, "Medium config (JSON)")->check(CLI::ExistingFile);
    co->add_option("--seed", opt.seed, "Search seed override");
    co->add_option("--threads", opt.threads, "Worker threads");
    co->add_option("-o,--output", opt.out_prefix, "Output prefix (.pulse, .trace)")
        ->required();
    co->add_option("--manifest", opt.manifest, "Manifest path");
    co->callback([&] {
        opt.seed_given = co->count("--seed") > 0;
        run_optimize(opt);
    });

    QstStudyArgs study;
    auto* cq = app.add_subcommand("qst-study",
                                  "Readout fidelity over random near-equator states");
    cq->add_option("-n,--n", study.n_states, "Number of drawn states");
    cq->add_option("--seed", study.seed, "Draw seed");
    cq->add_option("--tomography", study.tomography, "Readout config (JSON)")
        ->check(CLI::ExistingFile);
    cq->add_option("--model", study.model, "Medium config (JSON)")->check(CLI::ExistingFile);
    cq->add_option("--threads", study.threads, "Worker threads");
    cq->add_option("-o,--output", study.out, "Study table to write")->required();
    cq->add_option("--manifest", study.manifest, "Manifest path");
    cq->callback([&] { run_qst_study(study); });

    SpectraArgs spec;
    auto* cx = app.add_subcommand("spectra",
                                  "Synthesize absorption traces or fit them back to populations");
    cx->add_flag("--synth", spec.synth, "Write synthetic traces");
    cx->add_option("--fit", spec.fit_files, "Spectrum files to fit")
        ->check(CLI::ExistingFile);
    cx->add_option("--model", spec.model, "Medium config (JSON)")->check(CLI::ExistingFile);
    cx->add_option("--paux", spec.p_aux, "aux population");
    cx->add_option("--p1", spec.p_one, "|1> population");
    cx->add_option("--p0", spec.p_zero, "|0> population");
    cx->add_option("--fwhm", spec.fwhm_hz, "Peak width, Hz");
    cx->add_option("--noise", spec.noise, "Additive noise amplitude");
    cx->add_option("--noise-rel", spec.noise_rel, "Noise relative to the tallest peak");
    cx->add_option("--traces", spec.traces, "Trace count");
    cx->add_option("--seed", spec.seed, "Noise seed");
    cx->add_flag("--check", spec.check, "Fail unless recovered p0 matches --expect-p0");
    cx->add_option("--expect-p0", spec.expect_p0, "Expected |0> share");
    cx->add_option("--tol", spec.tol, "Allowed |p0 - expected|");
    cx->add_option("-o,--output", spec.out, "Trace prefix (synth) or report path (fit)")
        ->required();
    cx->add_option("--manifest", spec.manifest, "Manifest path");
    cx->callback([&] { run_spectra(spec); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
