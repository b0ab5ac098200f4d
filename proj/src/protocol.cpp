#include "stapulse/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "stapulse/rng.hpp"
#include "stapulse/threading.hpp"

namespace stapulse {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<SegmentDrive> alternating_sequence(int n, const SampledPulsePair& forward,
                                               const SampledPulsePair& backward,
                                               double wait_s) {
    std::vector<SegmentDrive> seq;
    seq.reserve(n + 1);
    for (int k = 0; k < n; ++k)
        seq.push_back(SegmentDrive::from_pulse(k % 2 == 0 ? forward : backward));
    if (wait_s > 0.0) seq.push_back(SegmentDrive::wait(wait_s));
    return seq;
}

Eigen::Vector3d bloch_of_state(double theta, double phi) {
    return {std::sin(2.0 * theta) * std::cos(phi),
            std::sin(2.0 * theta) * std::sin(phi), -std::cos(2.0 * theta)};
}

void check_protocol_args(int n_max, const SampledPulsePair& forward,
                         const SampledPulsePair& backward) {
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    if (forward.omega_p.size() < 2 || backward.omega_p.size() < 2)
        throw std::invalid_argument("transfer pulses must be sampled");
}

FidelityEstimate ratio_estimate(const std::map<int, double>& fidelity, int n_lo,
                                int n_hi, const std::string& basis) {
    if (n_lo < 1 || n_hi < n_lo + 2)
        throw std::invalid_argument("ratio extraction needs N and N+2 pairs");
    std::vector<double> per_transfer;
    FidelityEstimate est;
    est.basis = basis;
    for (int n = n_lo; n + 2 <= n_hi; ++n) {
        const auto lo = fidelity.find(n);
        const auto hi = fidelity.find(n + 2);
        if (lo == fidelity.end() || hi == fidelity.end())
            throw std::invalid_argument("records do not cover the requested N range");
        if (!(lo->second > 0.0))
            throw std::invalid_argument("F(N) vanished, ratio undefined");
        per_transfer.push_back(std::sqrt(hi->second / lo->second));
        est.n_used.push_back(n);
    }
    double mean = 0.0;
    for (double f : per_transfer) mean += f;
    mean /= double(per_transfer.size());
    double var = 0.0;
    for (double f : per_transfer) var += (f - mean) * (f - mean);
    est.per_transfer_fidelity = mean;
    est.uncertainty = per_transfer.size() > 1
                          ? std::sqrt(var / double(per_transfer.size() - 1))
                          : 0.0;
    return est;
}

}  // namespace

std::vector<TransferRecord> run_population_protocol(int n_max,
                                                    const SampledPulsePair& forward,
                                                    const SampledPulsePair& backward,
                                                    const ModelBundle& model,
                                                    const ProtocolSettings& s) {
    check_protocol_args(n_max, forward, backward);
    const Vector6cd start = ground_state(kOne);
    std::vector<TransferRecord> records;
    records.reserve(n_max);
    const double wait_s = s.free_decay ? s.free_decay_s : 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const Vector6cd target = ground_state(n % 2 == 1 ? kZero : kOne);
        const auto seq = alternating_sequence(n, forward, backward, wait_s);
        const EnsembleOutcome out =
            ensemble_transfer(seq, start, target, model, s.with_decoherence,
                              s.propagation, s.threads, false);
        TransferRecord rec;
        rec.n = n;
        rec.overall_fidelity = out.fidelity;
        rec.bloch = qubit_bloch(out.mean_state);
        rec.populations = out.mean_populations;
        records.push_back(rec);
    }
    return records;
}

FidelityEstimate extract_pair_fidelity(const std::vector<TransferRecord>& records,
                                       int n_lo, int n_hi) {
    std::map<int, double> fidelity;
    for (const TransferRecord& r : records) fidelity[r.n] = r.overall_fidelity;
    return ratio_estimate(fidelity, n_lo, n_hi, "pair-ratio");
}

SuperpositionRun run_superposition_protocol(int n_max,
                                            const SampledPulsePair& forward,
                                            const SampledPulsePair& backward,
                                            const ModelBundle& model,
                                            const ProtocolSettings& s) {
    check_protocol_args(n_max, forward, backward);
    SuperpositionRun run;
    run.phases_rad = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
    run.averaged_fidelity.assign(n_max, 0.0);
    const Vector6cd start = ground_state(kOne);

    for (const double phase : run.phases_rad) {
        SampledPulsePair fwd = forward;
        SampledPulsePair bwd = backward;
        fwd.phi = bwd.phi = phase;
        const Vector6cd sup = qubit_state(forward.theta, phase);
        for (int n = 1; n <= n_max; ++n) {
            const bool odd = n % 2 == 1;
            const Vector6cd target = odd ? sup : ground_state(kOne);
            // Tomography happens at the final pulse edge.  A readout-scale
            // wait would dephase the very coherence being scored, both through
            // the inhomogeneous detuning spread and through spin decoherence,
            // so the free-decay option applies only to population runs.
            const auto seq = alternating_sequence(n, fwd, bwd, 0.0);
            const EnsembleOutcome out =
                ensemble_transfer(seq, start, target, model, s.with_decoherence,
                                  s.propagation, s.threads, false);
            TransferRecord rec;
            rec.n = n;
            rec.phase_rad = phase;
            rec.bloch = qubit_bloch(out.mean_state);
            rec.populations = out.mean_populations;
            if (odd && s.qst_scoring) {
                const Eigen::Vector3d est =
                    qst_readout(out.mean_state, s.tomography, model,
                                s.with_decoherence, s.propagation);
                rec.overall_fidelity =
                    qst_fidelity(est, bloch_of_state(forward.theta, phase));
            } else {
                rec.overall_fidelity = out.fidelity;
            }
            run.averaged_fidelity[n - 1] += rec.overall_fidelity / 4.0;
            run.records.push_back(rec);
        }
    }
    return run;
}

FidelityEstimate extract_superposition_fidelity(const SuperpositionRun& run,
                                                int n_lo, int n_hi) {
    std::map<int, double> fidelity;
    for (int n = 1; n <= int(run.averaged_fidelity.size()); ++n)
        fidelity[n] = run.averaged_fidelity[n - 1];
    return ratio_estimate(fidelity, n_lo, n_hi, "phase-averaged-ratio");
}

QstStudySummary qst_symmetry_study(int n_states, std::uint64_t seed,
                                   const TomographySpec& spec,
                                   const ModelBundle& model,
                                   const ProtocolSettings& s) {
    if (n_states < 1) throw std::invalid_argument("need at least one state");
    spec.validate();

    // All draws happen up front so the worker count cannot reorder them.
    std::mt19937_64 rng(seed);
    std::vector<double> z(n_states), azimuth(n_states);
    for (int i = 0; i < n_states; ++i) {
        z[i] = -0.2 + 0.4 * uniform01(rng);
        azimuth[i] = 2.0 * kPi * uniform01(rng);
    }

    QstStudySummary sum;
    sum.single_fidelity.assign(std::size_t(n_states) * 4, 0.0);
    sum.averaged_fidelity.assign(n_states, 0.0);
    parallel_for(n_states, s.threads, [&](int i) {
        const double r = std::sqrt(1.0 - z[i] * z[i]);
        double four = 0.0;
        // qubit_state(th, phi) sits at Bloch Z = -cos(2 th).
        const double th = 0.5 * std::acos(-z[i]);
        for (int k = 0; k < 4; ++k) {
            const double zeta = azimuth[i] + 0.5 * kPi * k;
            const Eigen::Vector3d truth{r * std::cos(zeta), r * std::sin(zeta), z[i]};
            const Vector6cd v = qubit_state(th, zeta);
            const Matrix6cd rho = v * v.adjoint();
            const Eigen::Vector3d est =
                qst_readout(rho, spec, model, s.with_decoherence, s.propagation);
            const double f = qst_fidelity(est, truth);
            sum.single_fidelity[std::size_t(i) * 4 + k] = f;
            four += 0.25 * f;
        }
        sum.averaged_fidelity[i] = four;
    });

    sum.single_min = *std::min_element(sum.single_fidelity.begin(), sum.single_fidelity.end());
    sum.single_max = *std::max_element(sum.single_fidelity.begin(), sum.single_fidelity.end());
    sum.averaged_min = *std::min_element(sum.averaged_fidelity.begin(), sum.averaged_fidelity.end());
    sum.averaged_max = *std::max_element(sum.averaged_fidelity.begin(), sum.averaged_fidelity.end());
    return sum;
}

void write_records(const std::string& path, const std::vector<TransferRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# transfer-records v1\n";
    out << "# n phase_rad fidelity bloch_x bloch_y bloch_z"
           " p_aux p_one p_zero p_e1 p_e2 p_e3\n";
    char buf[64];
    for (const TransferRecord& r : records) {
        out << r.n;
        auto put = [&](double v) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        };
        put(r.phase_rad);
        put(r.overall_fidelity);
        for (int i = 0; i < 3; ++i) put(r.bloch(i));
        for (int i = 0; i < 6; ++i) put(r.populations(i));
        out << "\n";
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<TransferRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# transfer-records v1")
        throw std::runtime_error("unrecognized record file header");
    std::vector<TransferRecord> records;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        TransferRecord r;
        row >> r.n >> r.phase_rad >> r.overall_fidelity;
        for (int i = 0; i < 3; ++i) row >> r.bloch(i);
        for (int i = 0; i < 6; ++i) row >> r.populations(i);
        if (!row) throw std::runtime_error("malformed record row: " + line);
        records.push_back(r);
    }
    return records;
}

}  // namespace stapulse
