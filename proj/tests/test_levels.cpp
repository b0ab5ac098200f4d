#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "stapulse/levels.hpp"

using namespace stapulse;

TEST_CASE("built-in model passes its own validation") {
    const ModelBundle m = default_model();
    CHECK_NOTHROW(m.system.validate());
    CHECK_NOTHROW(m.decoherence.validate());
    CHECK_NOTHROW(m.ensemble.validate());
}

TEST_CASE("strength table is doubly stochastic and carriers are the strong lines") {
    const LevelSystem sys = default_model().system;
    for (int g = 0; g < 3; ++g)
        CHECK(sys.strength.row(g).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int e = 0; e < 3; ++e)
        CHECK(sys.strength.col(e).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sys.p_carrier_strength() == doctest::Approx(0.60));
    CHECK(sys.s_carrier_strength() == doctest::Approx(0.38));
    CHECK(sys.qubit_excited == kE2);
}

TEST_CASE("transition table covers the nine documented lines in order") {
    const LevelSystem sys = default_model().system;
    const auto lines = transition_table(sys);
    REQUIRE(lines.size() == 9);
    const double expected[9] = {0.0,    4.6e6,  9.4e6,  10.2e6, 14.8e6,
                                19.6e6, 27.5e6, 32.1e6, 36.9e6};
    for (int i = 0; i < 9; ++i)
        CHECK(lines[i].freq_hz == doctest::Approx(expected[i]).epsilon(1e-12));
    // The two tones sit on the strong central pair.
    CHECK(sys.transition_hz(kOne, sys.qubit_excited) == doctest::Approx(14.8e6));
    CHECK(sys.transition_hz(kZero, sys.qubit_excited) == doctest::Approx(4.6e6));
    // Auxiliary lines sit beyond the pumped-out region edge.
    for (const auto& l : lines)
        if (l.ground == kAux) CHECK(l.freq_hz >= 27.5e6);
}

TEST_CASE("structural validation rejects broken systems") {
    LevelSystem sys = default_model().system;
    SUBCASE("nonzero reference ground level") {
        sys.ground_hz[kZero] = 1.0;
        CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    }
    SUBCASE("nonzero reference excited level") {
        sys.excited_hz[kE1] = -5.0;
        CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    }
    SUBCASE("row sum off") {
        sys.strength(1, 1) = 0.7;
        CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    }
    SUBCASE("negative strength") {
        sys.strength(0, 0) = -0.05;
        sys.strength(0, 2) = 1.03;
        CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    }
    SUBCASE("qubit excited index out of range") {
        sys.qubit_excited = 3;
        CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    }
}

TEST_CASE("decoherence defaults and branching") {
    const ModelBundle m = default_model();
    CHECK(m.decoherence.t1_optical_s == doctest::Approx(164e-6));
    CHECK(m.decoherence.t2_optical_s == doctest::Approx(132e-6));
    CHECK(m.decoherence.t2_spin_s == doctest::Approx(500e-6));

    // Default branching follows the strength column of each excited level.
    const auto b2 = m.decoherence.branching_for(m.system, kE2);
    CHECK(b2[kAux] == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(b2[kOne] == doctest::Approx(0.60).epsilon(1e-12));
    CHECK(b2[kZero] == doctest::Approx(0.38).epsilon(1e-12));
    for (int e = 0; e < 3; ++e) {
        const auto b = m.decoherence.branching_for(m.system, e);
        CHECK(b[0] + b[1] + b[2] == doctest::Approx(1.0).epsilon(1e-12));
    }

    DecoherenceSpec dec = m.decoherence;
    dec.branching = {{0.5, 0.25, 0.25}};
    const auto bo = dec.branching_for(m.system, kE1);
    CHECK(bo[0] == 0.5);
    CHECK(bo[1] == 0.25);

    SUBCASE("t2 exceeding the lifetime limit is rejected") {
        dec.branching.reset();
        dec.t2_optical_s = 2.0 * dec.t1_optical_s + 1e-9;
        CHECK_THROWS_AS(dec.validate(), std::invalid_argument);
    }
    SUBCASE("unnormalized branching is rejected") {
        dec.branching = {{0.5, 0.2, 0.2}};
        CHECK_THROWS_AS(dec.validate(), std::invalid_argument);
    }
    SUBCASE("nonpositive times are rejected") {
        dec.branching.reset();
        dec.t2_spin_s = 0.0;
        CHECK_THROWS_AS(dec.validate(), std::invalid_argument);
    }
}

TEST_CASE("ensemble detunings are antisymmetric equal-weight quantiles") {
    EnsembleSpec es;
    es.detuning_fwhm_hz = 170e3;
    es.n_members = 41;
    const auto d = ensemble_detunings_hz(es);
    REQUIRE(d.size() == 41);
    CHECK(d[20] == 0.0);
    for (int k = 0; k < 41; ++k) {
        CHECK(d[k] == -d[40 - k]);
        if (k > 0) CHECK(d[k] > d[k - 1]);
    }
    const double sigma = 170e3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CHECK(std::abs(d.back()) < 2.5 * sigma);
    CHECK(std::abs(d.back()) > 2.0 * sigma);

    // Doubling the width scales every member linearly.
    EnsembleSpec wide = es;
    wide.detuning_fwhm_hz = 340e3;
    const auto dw = ensemble_detunings_hz(wide);
    for (int k = 0; k < 41; ++k)
        CHECK(dw[k] == doctest::Approx(2.0 * d[k]).epsilon(1e-12));
}

TEST_CASE("even member counts straddle zero symmetrically") {
    EnsembleSpec es;
    es.n_members = 8;
    const auto d = ensemble_detunings_hz(es);
    REQUIRE(d.size() == 8);
    for (int k = 0; k < 8; ++k) CHECK(d[k] == -d[7 - k]);
    CHECK(d[3] < 0.0);
    CHECK(d[4] > 0.0);
}

TEST_CASE("inverse normal CDF against known quantiles and the forward CDF") {
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-12));
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
        const double x = inverse_normal_cdf(p);
        const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
        CHECK(back == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK(inverse_normal_cdf(0.2) == doctest::Approx(-inverse_normal_cdf(0.8)).epsilon(1e-13));
    CHECK_THROWS_AS((void)inverse_normal_cdf(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("ensemble validation") {
    EnsembleSpec es;
    es.n_members = 0;
    CHECK_THROWS_AS(es.validate(), std::invalid_argument);
    es.n_members = 5;
    es.detuning_fwhm_hz = 0.0;
    CHECK_THROWS_AS(es.validate(), std::invalid_argument);
}
