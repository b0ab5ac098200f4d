#include "stapulse/dynamics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stapulse/threading.hpp"

namespace stapulse {

namespace {

constexpr std::complex<double> kMinusI{0.0, -1.0};

std::complex<double> lerp_sample(const std::vector<std::complex<double>>& v,
                                 double duration, double t) {
    if (v.empty()) return {0.0, 0.0};
    if (v.size() == 1 || t <= 0.0) return v.front();
    if (t >= duration) return v.back();
    const double x = t / duration * double(v.size() - 1);
    const auto i = std::min<std::size_t>(std::size_t(x), v.size() - 2);
    const double w = x - double(i);
    return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace

SegmentDrive SegmentDrive::from_pulse(const SampledPulsePair& p) {
    SegmentDrive s;
    s.duration = p.t_f;
    // The constant field phase lives on the p tone, matching the
    // <1|H|e> = -(Omega_p/2) e^{i phi} coupling of the three-level form.
    const std::complex<double> ph = std::polar(1.0, p.phi);
    s.amp_p.reserve(p.omega_p.size());
    s.amp_s.reserve(p.omega_s.size());
    for (double w : p.omega_p) s.amp_p.push_back(w * ph);
    for (double w : p.omega_s) s.amp_s.emplace_back(w, 0.0);
    return s;
}

SegmentDrive SegmentDrive::with_common_phase(double chi) const {
    SegmentDrive s = *this;
    const std::complex<double> ph = std::polar(1.0, chi);
    for (auto& a : s.amp_p) a *= ph;
    for (auto& a : s.amp_s) a *= ph;
    return s;
}

std::complex<double> SegmentDrive::sample_p(double t) const {
    return lerp_sample(amp_p, duration, t);
}

std::complex<double> SegmentDrive::sample_s(double t) const {
    return lerp_sample(amp_s, duration, t);
}

Vector3cd propagate_pure(const SampledPulsePair& pulse, const Vector3cd& psi0,
                         double delta_hz, const AdaptiveSettings& st) {
    const double delta_rad = 2.0 * std::numbers::pi * delta_hz;
    auto rhs = [&](double t, const Vector3cd& y) -> Vector3cd {
        const Matrix3cd h = drive_hamiltonian3(pulse.sample_p(t), pulse.sample_s(t),
                                               pulse.phi, delta_rad);
        return kMinusI * (h * y);
    };
    Vector3cd psi = psi0;
    integrate_adaptive(rhs, psi, 0.0, pulse.t_f, st);
    return psi;
}

double pure_state_fidelity(const Vector3cd& target, const Vector3cd& psi) {
    const double nn = target.squaredNorm() * psi.squaredNorm();
    if (nn <= 0.0) throw std::invalid_argument("pure_state_fidelity: zero state");
    return std::norm(target.dot(psi)) / nn;
}

SixLevelModel::SixLevelModel(const LevelSystem& sys, const DecoherenceSpec* dec,
                             double member_detuning_hz, CouplingMask mask) {
    sys.validate();
    const double two_pi = 2.0 * std::numbers::pi;
    // Both tones sit a configurable trim away from their carrier transition of
    // the unshifted ion; a member detuning moves every optical line together.
    const double tone_hz[2] = {
        sys.transition_hz(kOne, sys.qubit_excited) + sys.carrier_p_hz,
        sys.transition_hz(kZero, sys.qubit_excited) + sys.carrier_s_hz};
    const double carrier_strength[2] = {sys.p_carrier_strength(),
                                        sys.s_carrier_strength()};
    const int carrier_ground[2] = {kOne, kZero};
    for (int tone = 0; tone < 2; ++tone) {
        for (int g = 0; g < 3; ++g) {
            if (mask != CouplingMask::all && g == kAux) continue;
            for (int e = 0; e < 3; ++e) {
                if (mask == CouplingMask::resonant_only &&
                    (g != carrier_ground[tone] || e != sys.qubit_excited))
                    continue;
                const double f = sys.strength(g, e);
                if (f <= 0.0) continue;
                Coupling c;
                c.ground = g;
                c.excited = e;
                c.tone = tone;
                c.scale = std::sqrt(f / carrier_strength[tone]);
                c.delta_rad =
                    two_pi * (tone_hz[tone] -
                              (sys.transition_hz(g, e) + member_detuning_hz));
                couplings_.push_back(c);
            }
        }
    }

    coherence_decay_.setZero();
    feed_.setZero();
    if (dec == nullptr) return;
    dec->validate();
    dissipative_ = true;
    const double g1 = 1.0 / dec->t1_optical_s;
    const double gs = 1.0 / dec->t2_spin_s;
    // Pure optical dephasing on top of lifetime decay and the spin-dephasing
    // leakage into the optical coherences; together the optical coherence
    // decay rate is exactly 1/t2_optical.
    const double r_opt =
        std::max(0.0, 1.0 / dec->t2_optical_s - 0.5 * g1 - 0.25 * gs);
    for (int g = 0; g < 3; ++g) {
        for (int e = 0; e < 3; ++e) {
            double rate = 0.5 * g1 + r_opt;
            if (g != kAux) rate += 0.25 * gs;
            coherence_decay_(g, 3 + e) = rate;
            coherence_decay_(3 + e, g) = rate;
        }
    }
    for (int e = 0; e < 3; ++e)
        for (int f2 = 0; f2 < 3; ++f2)
            if (e != f2) coherence_decay_(3 + e, 3 + f2) = g1;
    coherence_decay_(kOne, kZero) = coherence_decay_(kZero, kOne) = gs;
    coherence_decay_(kAux, kOne) = coherence_decay_(kOne, kAux) = 0.25 * gs;
    coherence_decay_(kAux, kZero) = coherence_decay_(kZero, kAux) = 0.25 * gs;
    for (int e = 0; e < 3; ++e) {
        const auto b = dec->branching_for(sys, e);
        for (int g = 0; g < 3; ++g) feed_(g, e) = b[g] * g1;
    }
    excited_loss_ = g1;
}

Matrix6cd SixLevelModel::hamiltonian(double t_global, const SegmentDrive& seg,
                                     double seg_start) const {
    Matrix6cd h = Matrix6cd::Zero();
    const double tau = t_global - seg_start;
    const std::complex<double> amp[2] = {seg.sample_p(tau), seg.sample_s(tau)};
    for (const Coupling& c : couplings_) {
        const std::complex<double> a = amp[c.tone];
        if (a.real() == 0.0 && a.imag() == 0.0) continue;
        // Phases rotate with the global clock so a tone stays coherent with
        // itself across segment boundaries.
        const std::complex<double> v =
            -0.5 * c.scale * a * std::polar(1.0, c.delta_rad * t_global);
        h(c.ground, 3 + c.excited) += v;
        h(3 + c.excited, c.ground) += std::conj(v);
    }
    return h;
}

Matrix6cd SixLevelModel::rhs(double t_global, const Matrix6cd& rho,
                             const SegmentDrive& seg, double seg_start) const {
    Matrix6cd d;
    if (seg.amp_p.empty() && seg.amp_s.empty()) {
        d.setZero();
    } else {
        const Matrix6cd h = hamiltonian(t_global, seg, seg_start);
        d = kMinusI * (h * rho - rho * h);
    }
    if (!dissipative_) return d;
    for (int i = 0; i < kLevels; ++i)
        for (int j = 0; j < kLevels; ++j)
            if (i != j) d(i, j) -= coherence_decay_(i, j) * rho(i, j);
    for (int g = 0; g < 3; ++g) {
        std::complex<double> gain{0.0, 0.0};
        for (int e = 0; e < 3; ++e) gain += feed_(g, e) * rho(3 + e, 3 + e);
        d(g, g) += gain;
    }
    for (int e = 0; e < 3; ++e)
        d(3 + e, 3 + e) -= excited_loss_ * rho(3 + e, 3 + e);
    return d;
}

double propagate_segment(Matrix6cd& rho, const SegmentDrive& seg,
                         const SixLevelModel& model, double t0_global,
                         const PropagationSettings& st,
                         IntegrationStats* stats) {
    if (seg.duration < 0.0)
        throw std::invalid_argument("propagate_segment: negative duration");
    const double t1 = t0_global + seg.duration;
    if (seg.duration == 0.0) return t1;

    const double trace_in = rho.trace().real();
    AdaptiveSettings as;
    as.rel_tol = st.rel_tol;
    as.abs_tol = st.abs_tol;
    auto rhs = [&](double t, const Matrix6cd& r) {
        return model.rhs(t, r, seg, t0_global);
    };
    integrate_adaptive(rhs, rho, t0_global, t1, as, stats);

    if (st.check_physics) {
        const double trace_defect = std::abs(rho.trace().real() - trace_in);
        if (trace_defect > 1e-6)
            throw std::runtime_error("propagate_segment: trace drift " +
                                     std::to_string(trace_defect));
        const double herm_defect =
            0.5 * (rho - Matrix6cd(rho.adjoint())).cwiseAbs().maxCoeff();
        if (herm_defect > 1e-9)
            throw std::runtime_error("propagate_segment: Hermiticity defect " +
                                     std::to_string(herm_defect));
        const Matrix6cd sym = 0.5 * (rho + Matrix6cd(rho.adjoint()));
        rho = sym;
        Eigen::SelfAdjointEigenSolver<Matrix6cd> es(rho,
                                                    Eigen::EigenvaluesOnly);
        const double lam_min = es.eigenvalues().minCoeff();
        // Global error runs about ten times the local tolerance, so the hard
        // -1e-6 floor applies once tolerances are 1e-7 or tighter; looser
        // runs are allowed the matching slack.
        const double lam_floor =
            -std::max(1e-6, 10.0 * std::max(st.rel_tol, st.abs_tol));
        if (lam_min < lam_floor)
            throw std::runtime_error(
                "propagate_segment: negative eigenvalue " +
                std::to_string(lam_min) + " (tolerances too loose?)");
    }
    return t1;
}

Vector6cd ground_state(int ground) {
    if (ground < 0 || ground > 2)
        throw std::invalid_argument("ground_state: index out of range");
    Vector6cd v = Vector6cd::Zero();
    v(ground) = 1.0;
    return v;
}

Vector6cd qubit_state(double theta, double phi) {
    Vector6cd v = Vector6cd::Zero();
    v(kOne) = std::cos(theta) * std::polar(1.0, phi);
    v(kZero) = std::sin(theta);
    return v;
}

Vector6d populations(const Matrix6cd& rho) {
    return rho.diagonal().real();
}

double excited_population(const Matrix6cd& rho) {
    return rho.diagonal().real().tail<3>().sum();
}

double state_fidelity(const Matrix6cd& rho, const Vector6cd& target) {
    const double nn = target.squaredNorm();
    if (nn <= 0.0) throw std::invalid_argument("state_fidelity: zero target");
    return std::real(target.dot(rho * target)) / nn;
}

Eigen::Vector3d qubit_bloch(const Matrix6cd& rho) {
    const std::complex<double> c = rho(kZero, kOne);  // <0|rho|1>
    return {2.0 * c.real(), -2.0 * c.imag(),
            rho(kZero, kZero).real() - rho(kOne, kOne).real()};
}

EnsembleOutcome ensemble_transfer(const std::vector<SegmentDrive>& sequence,
                                  const Vector6cd& psi0, const Vector6cd& target,
                                  const ModelBundle& model, bool with_decoherence,
                                  const PropagationSettings& st, int threads,
                                  bool with_spectators, int spectator_ground) {
    model.system.validate();
    model.ensemble.validate();
    const DecoherenceSpec* dec = with_decoherence ? &model.decoherence : nullptr;
    const std::vector<double> detunings = ensemble_detunings_hz(model.ensemble);
    const int n = int(detunings.size());

    auto run_member = [&](double detuning_hz, const Vector6cd& start) {
        SixLevelModel member(model.system, dec, detuning_hz, st.mask);
        Matrix6cd rho = start * start.adjoint() / start.squaredNorm();
        double t = 0.0;
        for (const SegmentDrive& seg : sequence)
            t = propagate_segment(rho, seg, member, t, st);
        return rho;
    };

    EnsembleOutcome out;
    out.member_fidelities.assign(n, 0.0);
    std::vector<Matrix6cd> states(n, Matrix6cd::Zero());
    parallel_for(n, threads, [&](int k) {
        states[k] = run_member(detunings[k], psi0);
        out.member_fidelities[k] = state_fidelity(states[k], target);
    });
    // Fixed-order reduction keeps the result bitwise independent of `threads`.
    for (int k = 0; k < n; ++k) {
        out.fidelity += out.member_fidelities[k];
        out.mean_state += states[k];
    }
    out.fidelity /= double(n);
    out.mean_state /= double(n);
    out.mean_populations = populations(out.mean_state);

    if (with_spectators && !model.ensemble.spectator_offsets_hz.empty()) {
        const auto& offsets = model.ensemble.spectator_offsets_hz;
        std::vector<double> gain(offsets.size(), 0.0);
        const Vector6cd spec0 = ground_state(spectator_ground);
        parallel_for(int(offsets.size()), threads, [&](int k) {
            gain[k] = excited_population(run_member(offsets[k], spec0));
        });
        for (double g : gain) out.spectator_excitation += g;
    }
    return out;
}

}  // namespace stapulse
