#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stapulse/config.hpp"
#include "stapulse/dynamics.hpp"
#include "stapulse/manifest.hpp"

using namespace stapulse;

namespace {

std::string scratch_path(const std::string& name) {
    std::filesystem::create_directories("test_config_scratch");
    return "test_config_scratch/" + name;
}

std::string config_path(const std::string& name) {
    return std::string(STAPULSE_CONFIG_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("digest matches the published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK(sha256_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("digest padding boundaries and binary bytes") {
    // 55 bytes leaves exactly room for the marker and length in one block,
    // 56 forces the two-block tail, 64 is a full block plus padding block.
    CHECK(sha256_hex(std::string(55, 'a')) ==
          "9f4390f8d30c2dd92ec9f095b65e2b9ae9b0a925a5258e241c9f1e910f734318");
    CHECK(sha256_hex(std::string(56, 'a')) ==
          "b35439a4ac6f0948b6d6f9e3c6af0f5f590ce20f1bde7090ef7970686ec6738a");
    CHECK(sha256_hex(std::string(64, 'a')) ==
          "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
    std::string all_bytes(256, '\0');
    for (int i = 0; i < 256; ++i) all_bytes[i] = char(i);
    CHECK(sha256_hex(all_bytes) ==
          "40aff2e9d2d8922e47afd4648e6967497158785fbd1da870e7110266bf944880");
}

TEST_CASE("file digest equals content digest") {
    const std::string path = scratch_path("digest_me.txt");
    {
        std::ofstream out(path, std::ios::binary);
        out << "abc";
    }
    CHECK(sha256_file(path) == sha256_hex("abc"));
    CHECK_THROWS_AS(sha256_file(scratch_path("no_such_file")), std::runtime_error);
}

TEST_CASE("manifest file carries every field under a format tag") {
    RunManifest m;
    m.command = "synth";
    m.config_digests.push_back({"configs/synth_swap.json", sha256_hex("x")});
    m.seeded = true;
    m.seed = 42;
    m.parameters.push_back({"--case", "swap"});
    m.outputs.push_back("out.pulse");
    m.wall_time_s = 0.25;

    const std::string path = scratch_path("manifest.json");
    write_manifest(path, m);

    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j.at("format") == "run-manifest v1");
    CHECK(j.at("command") == "synth");
    CHECK(j.at("tool_version") == std::string(kToolVersion));
    CHECK(j.at("config_digests").at("configs/synth_swap.json") == sha256_hex("x"));
    CHECK(j.at("seed") == 42);
    CHECK(j.at("parameters").at("--case") == "swap");
    CHECK(j.at("outputs").at(0) == "out.pulse");
    CHECK(j.at("wall_time_s").get<double>() == doctest::Approx(0.25));

    // The format tag leads the document so version sniffing needs one line.
    CHECK(slurp(path).substr(0, 40).find("run-manifest v1") != std::string::npos);

    m.seeded = false;
    write_manifest(path, m);
    CHECK(nlohmann::json::parse(slurp(path)).at("seed").is_null());
}

TEST_CASE("shipped medium config reproduces the built-in model") {
    std::vector<std::string> notes;
    const ModelBundle loaded = load_model_file(config_path("pr_ion.json"), &notes);
    const ModelBundle builtin = default_model();

    for (int i = 0; i < 3; ++i) {
        CHECK(loaded.system.ground_hz[i] == builtin.system.ground_hz[i]);
        CHECK(loaded.system.excited_hz[i] == builtin.system.excited_hz[i]);
    }
    CHECK((loaded.system.strength - builtin.system.strength).norm() == 0.0);
    CHECK(loaded.system.qubit_excited == builtin.system.qubit_excited);
    CHECK(loaded.decoherence.t1_optical_s == builtin.decoherence.t1_optical_s);
    CHECK(loaded.decoherence.t2_optical_s == builtin.decoherence.t2_optical_s);
    CHECK(loaded.decoherence.t2_spin_s == builtin.decoherence.t2_spin_s);
    CHECK_FALSE(loaded.decoherence.branching.has_value());
    CHECK(loaded.ensemble.detuning_fwhm_hz == builtin.ensemble.detuning_fwhm_hz);
    CHECK(loaded.ensemble.n_members == builtin.ensemble.n_members);
    CHECK(loaded.ensemble.spectator_offsets_hz == builtin.ensemble.spectator_offsets_hz);
    CHECK(notes.empty());

    // Scan-axis landmarks: the five lines out of the qubit levels.
    CHECK(loaded.system.transition_hz(kZero, kE1) == doctest::Approx(0.0));
    CHECK(loaded.system.transition_hz(kZero, kE2) == doctest::Approx(4.6e6));
    CHECK(loaded.system.transition_hz(kZero, kE3) == doctest::Approx(9.4e6));
    CHECK(loaded.system.transition_hz(kOne, kE1) == doctest::Approx(10.2e6));
    CHECK(loaded.system.transition_hz(kOne, kE2) == doctest::Approx(14.8e6));
}

TEST_CASE("model loader defaults, echoes and rejections") {
    CHECK(load_model_text("{}").system.ground_hz[kAux] == 27.5e6);

    const char* no_aux = R"({
      "system": {
        "_note": "aux omitted on purpose",
        "ground_hz": {"one": 10.2e6, "zero": 0.0},
        "excited_hz": {"e1": 0.0, "e2": 4.6e6, "e3": 9.4e6},
        "strength": [[0.05,0.02,0.93],[0.39,0.60,0.01],[0.56,0.38,0.06]]
      }
    })";
    std::vector<std::string> notes;
    const ModelBundle m = load_model_text(no_aux, &notes);
    CHECK(m.system.ground_hz[kAux] == doctest::Approx(27.5e6));
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("ground_hz.aux") != std::string::npos);
    CHECK(notes[0].find("17.3") != std::string::npos);

    CHECK_THROWS_WITH_AS(load_model_text(R"({"sistem": {}})"),
                         doctest::Contains("sistem"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        load_model_text(R"({"ensemble": {"members": 41}})"),
        doctest::Contains("members"), std::invalid_argument);
    CHECK_THROWS_AS(load_model_text("{"), std::invalid_argument);
    CHECK_THROWS_AS(load_model_file(scratch_path("missing.json")),
                    std::invalid_argument);

    // A negative oscillator strength violates the level-system invariants.
    std::string bad = no_aux;
    bad.replace(bad.find("0.93"), 4, "-0.9");
    CHECK_THROWS_AS(load_model_text(bad), std::invalid_argument);

    CHECK(load_model_text(R"({"decoherence": {"t2_optical_s": 44e-6}})")
              .decoherence.t2_optical_s == 44e-6);
    CHECK(load_model_text(R"({"ensemble": {"n_members": 9}})").ensemble.n_members == 9);
}

TEST_CASE("synthesis request forms") {
    const SynthRequest by_case = load_synth_text(R"({"case": "swap"})");
    CHECK(by_case.theta == preset_theta(Preset::swap));
    CHECK(by_case.coefficients.a == preset_coefficients(Preset::swap).a);
    CHECK(by_case.t_f == 4e-6);
    CHECK(by_case.n_samples == kDefaultPulseSamples);

    const SynthRequest by_free = load_synth_text(
        R"({"free_a": [-0.9911,-0.5120,0.4216,0.1530,0.0056,-0.0350],
            "theta_rad": 1.5707963267948966, "t_f_s": 2e-6, "n_samples": 513})");
    CHECK(by_free.coefficients.odd_rule_residual() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(by_free.coefficients.even_rule_residual() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(by_free.t_f == 2e-6);
    CHECK(by_free.n_samples == 513);

    // Full rows pass through untouched; rule checking is the consumer's call.
    const SynthRequest by_full = load_synth_text(
        R"({"a": [1,2,3,4,5,6,7,8], "theta_rad": 0.5})");
    CHECK(by_full.coefficients.a[7] == 8.0);

    CHECK_THROWS_WITH_AS(load_synth_text(R"({"case": "swap", "free_a": [0,0,0,0,0,0]})"),
                         doctest::Contains("exactly one"), std::invalid_argument);
    CHECK_THROWS_AS(load_synth_text(R"({"phi_rad": 0.0})"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_synth_text(R"({"a": [1,2,3,4,5,6,7,8]})"),
                         doctest::Contains("theta_rad"), std::invalid_argument);
    CHECK_THROWS_AS(load_synth_text(R"({"case": "swap", "t_f_s": -1.0})"),
                    std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_synth_text(R"({"case": "swap", "samples": 3})"),
                         doctest::Contains("samples"), std::invalid_argument);

    const SynthRequest shipped = load_synth_file(config_path("synth_swap.json"));
    CHECK(shipped.coefficients.a == preset_coefficients(Preset::swap).a);
}

TEST_CASE("tomography config round trip") {
    const TomographySpec shipped = load_tomography_file(config_path("tomography_sech.json"));
    CHECK(shipped.kind == TomographyKind::sech_pair);
    CHECK(shipped.sech.peak_rabi_rad == doctest::Approx(2.0 * M_PI * 400e3));
    CHECK(shipped.sech.beta_rad == doctest::Approx(2.0 * M_PI * 85e3));
    CHECK(shipped.sech.mu == 2.0);
    CHECK(shipped.sech.truncation == 4.0);

    // The shipped tuning matches the compiled-in readout defaults.
    const SechParams defaults;
    CHECK(shipped.sech.peak_rabi_rad == doctest::Approx(defaults.peak_rabi_rad));
    CHECK(shipped.sech.beta_rad == doctest::Approx(defaults.beta_rad));

    CHECK(load_tomography_text("{}").kind == TomographyKind::ideal);
    CHECK_THROWS_WITH_AS(load_tomography_text(R"({"kind": "magic"})"),
                         doctest::Contains("magic"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_tomography_text(R"({"sech": {"beta_rad": 1.0}})"),
                         doctest::Contains("beta_rad"), std::invalid_argument);
    CHECK_THROWS_AS(load_tomography_text(R"({"sech": {"mu": -1.0}})"),
                    std::invalid_argument);
}

TEST_CASE("optimization request loads score, settings and start point") {
    const OptimizeRequest r = load_optimize_file(config_path("optimize_swap.json"));
    CHECK(r.score.band_samples == 9);
    CHECK(r.score.band_halfwidth_hz == 500e3);
    CHECK((r.score.target - pure_projector(ground_state(kZero))).norm() == 0.0);
    CHECK(r.optimizer.seed == 1);
    CHECK(r.optimizer.lower[0] == -2.0);
    CHECK(r.initial.a == preset_coefficients(Preset::swap).a);

    const OptimizeRequest sup = load_optimize_text(R"({
      "score": {"target": {"theta_rad": 0.7853981633974483, "phi_rad": 0.5}},
      "initial": {"free_a": [-1.0, -0.44, 0.24, -0.04, 0.0, 0.03]}
    })");
    const Matrix6cd want = pure_projector(qubit_state(0.7853981633974483, 0.5));
    CHECK((sup.score.target - want).norm() < 1e-15);
    CHECK(sup.optimizer.sa_iterations == OptimizerSettings{}.sa_iterations);

    CHECK_THROWS_WITH_AS(load_optimize_text(R"({"score": {}, "initial": {"case": "swap"}})"),
                         doctest::Contains("target"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        load_optimize_text(R"({"score": {"target": {"level": "aux"}},
                               "initial": {"case": "swap"}})"),
        doctest::Contains("aux"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        load_optimize_text(R"({"score": {"target": {"level": "zero"}},
                               "initial": {"a": [1,2,3,4,5,6,7,8]}})"),
        doctest::Contains("unknown key \"a\""), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        load_optimize_text(R"({"score": {"target": {"level": "zero"}},
                               "optimizer": {"cooling": 0.9},
                               "initial": {"case": "swap"}})"),
        doctest::Contains("cooling"), std::invalid_argument);
}
