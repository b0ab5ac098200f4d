#include "stapulse/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "stapulse/rng.hpp"
#include "stapulse/threading.hpp"

namespace stapulse {

namespace {

constexpr double kRuleTol = 1e-6;

bool in_qubit_block(int r, int c) {
    const bool rq = r == kOne || r == kZero;
    const bool cq = c == kOne || c == kZero;
    return rq && cq;
}

void check_target(const Matrix6cd& t) {
    if ((t - t.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("target must be hermitian");
    if (std::abs(t.trace().real() - 1.0) > 1e-6)
        throw std::invalid_argument("target must have unit trace");
    if (std::abs((t * t - t).cwiseAbs().maxCoeff()) > 1e-6)
        throw std::invalid_argument("target must be a pure-state projector");
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            if (!in_qubit_block(r, c) && std::abs(t(r, c)) > 1e-9)
                throw std::invalid_argument("target must live on the qubit block");
}

std::vector<double> band_detunings(const ScoreSpec& spec, const ModelBundle& model) {
    EnsembleSpec quad = model.ensemble;
    quad.n_members = spec.band_samples;
    std::vector<double> nodes;
    for (double d : ensemble_detunings_hz(quad))
        if (std::abs(d) <= spec.band_halfwidth_hz) nodes.push_back(d);
    if (nodes.empty())
        throw std::invalid_argument("band excludes every quadrature node");
    return nodes;
}

}  // namespace

void ScoreSpec::validate() const {
    if (!(band_halfwidth_hz > 0.0))
        throw std::invalid_argument("band_halfwidth_hz must be positive");
    if (band_samples < 1) throw std::invalid_argument("band_samples must be positive");
    if (!(spectator_weight >= 0.0))
        throw std::invalid_argument("spectator_weight must be nonnegative");
    if (!(theta > 0.0) || !(theta < 3.14159265358979323846))
        throw std::invalid_argument("theta must lie in (0, pi)");
    if (!(t_f > 0.0)) throw std::invalid_argument("t_f must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be positive");
    check_target(target);
}

Matrix6cd pure_projector(const Vector6cd& state) {
    const double n = state.norm();
    if (!(n > 0.0)) throw std::invalid_argument("cannot project the zero vector");
    const Vector6cd v = state / n;
    return v * v.adjoint();
}

double candidate_score(const AnsatzCoefficients& a, const ScoreSpec& spec,
                       const ModelBundle& model) {
    spec.validate();
    if (std::abs(a.odd_rule_residual()) > kRuleTol ||
        std::abs(a.even_rule_residual()) > kRuleTol)
        throw std::invalid_argument("candidate violates the endpoint sum rules");

    const SampledPulsePair pulse =
        synthesize_pulses(a, spec.theta, spec.phi, spec.t_f, spec.n_samples);
    const SegmentDrive seg = SegmentDrive::from_pulse(pulse);
    const DecoherenceSpec* dec = spec.with_decoherence ? &model.decoherence : nullptr;

    const std::vector<double> nodes = band_detunings(spec, model);
    const auto& offsets = model.ensemble.spectator_offsets_hz;
    const bool spectators = spec.spectator_weight > 0.0 && !offsets.empty();
    const int n_nodes = int(nodes.size());
    const int n_tasks = n_nodes + (spectators ? int(offsets.size()) : 0);

    const Eigen::Matrix2cd bt = spec.target.block<2, 2>(kOne, kOne);
    std::vector<double> part(n_tasks, 0.0);
    parallel_for(n_tasks, spec.threads, [&](int k) {
        const bool member = k < n_nodes;
        const double detuning = member ? nodes[k] : offsets[k - n_nodes];
        const SixLevelModel m(model.system, dec, detuning, spec.propagation.mask);
        Matrix6cd rho = pure_projector(ground_state(member ? kOne : kZero));
        propagate_segment(rho, seg, m, 0.0, spec.propagation);
        if (member) {
            const Eigen::Matrix2cd br = rho.block<2, 2>(kOne, kOne);
            part[k] = (br - bt).squaredNorm();
        } else {
            part[k] = excited_population(rho);
        }
    });

    double distance = 0.0;
    for (int k = 0; k < n_nodes; ++k) distance += part[k];
    distance /= double(n_nodes);
    double gain = 0.0;
    for (int k = n_nodes; k < n_tasks; ++k) gain += part[k];
    return distance + spec.spectator_weight * gain;
}

void OptimizerSettings::validate() const {
    if (sa_iterations < 0) throw std::invalid_argument("sa_iterations must be >= 0");
    if (!(sa_initial_temperature > 0.0))
        throw std::invalid_argument("sa_initial_temperature must be positive");
    if (!(sa_cooling > 0.0) || sa_cooling > 1.0)
        throw std::invalid_argument("sa_cooling must lie in (0, 1]");
    if (!(sa_step_scale > 0.0))
        throw std::invalid_argument("sa_step_scale must be positive");
    if (!(simplex_tol > 0.0)) throw std::invalid_argument("simplex_tol must be positive");
    if (simplex_max_iterations < 0)
        throw std::invalid_argument("simplex_max_iterations must be >= 0");
    for (int i = 0; i < 6; ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("each lower bound must sit below its upper bound");
}

OptimizeResult optimize_coefficients(const AnsatzCoefficients& initial,
                                     const ScoreSpec& spec,
                                     const OptimizerSettings& settings,
                                     const ModelBundle& model) {
    settings.validate();
    spec.validate();

    using Free = std::array<double, 6>;
    auto clamped = [&](Free x) {
        for (int i = 0; i < 6; ++i)
            x[i] = std::clamp(x[i], settings.lower[i], settings.upper[i]);
        return x;
    };

    OptimizeResult result;
    double best = std::numeric_limits<double>::infinity();
    Free best_x{};
    auto eval = [&](const Free& x) {
        const double f = candidate_score(with_dependents_solved(x), spec, model);
        ++result.evaluations;
        if (f < best) {
            best = f;
            best_x = x;
        }
        result.history.push_back(best);
        return f;
    };

    Free x = clamped({initial.a[0], initial.a[1], initial.a[2], initial.a[3],
                      initial.a[4], initial.a[5]});
    double fx = eval(x);

    // Annealing chain: the proposal sigma follows the temperature down to a
    // floor so late iterations still move.
    std::mt19937_64 rng(settings.seed);
    double temp = settings.sa_initial_temperature;
    for (int it = 0; it < settings.sa_iterations; ++it) {
        const double sigma =
            settings.sa_step_scale *
            std::max(temp / settings.sa_initial_temperature, 0.1);
        Free y = x;
        for (int i = 0; i < 6; ++i) y[i] += sigma * normal01(rng);
        y = clamped(y);
        const double fy = eval(y);
        if (fy <= fx || uniform01(rng) < std::exp((fx - fy) / temp)) {
            x = y;
            fx = fy;
        }
        temp *= settings.sa_cooling;
    }

    // Nelder-Mead on the annealing winner, every vertex projected onto the
    // box.  Classic coefficients: reflect 1, expand 2, contract 1/2, shrink
    // 1/2.
    if (settings.simplex_max_iterations > 0) {
        constexpr int kDim = 6;
        std::array<Free, kDim + 1> vx;
        std::array<double, kDim + 1> vf;
        vx[0] = best_x;
        vf[0] = best;
        for (int i = 0; i < kDim; ++i) {
            Free v = best_x;
            const double h =
                v[i] + 0.02 <= settings.upper[i] ? 0.02 : -0.02;
            v[i] += h;
            vx[i + 1] = clamped(v);
            vf[i + 1] = eval(vx[i + 1]);
        }
        std::array<int, kDim + 1> order;
        for (int it = 0; it < settings.simplex_max_iterations; ++it) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return vf[a] < vf[b]; });
            if (vf[order[kDim]] - vf[order[0]] < settings.simplex_tol) break;

            Free centroid{};
            for (int i = 0; i < kDim; ++i)
                for (int j = 0; j < kDim; ++j) centroid[j] += vx[order[i]][j] / kDim;
            const int worst = order[kDim];
            auto along = [&](double c) {
                Free p;
                for (int j = 0; j < kDim; ++j)
                    p[j] = centroid[j] + c * (centroid[j] - vx[worst][j]);
                return clamped(p);
            };

            const Free refl = along(1.0);
            const double fr = eval(refl);
            if (fr < vf[order[0]]) {
                const Free expd = along(2.0);
                const double fe = eval(expd);
                if (fe < fr) {
                    vx[worst] = expd;
                    vf[worst] = fe;
                } else {
                    vx[worst] = refl;
                    vf[worst] = fr;
                }
            } else if (fr < vf[order[kDim - 1]]) {
                vx[worst] = refl;
                vf[worst] = fr;
            } else {
                const bool outside = fr < vf[worst];
                const Free ctr = along(outside ? 0.5 : -0.5);
                const double fc = eval(ctr);
                if (fc < std::min(fr, vf[worst])) {
                    vx[worst] = ctr;
                    vf[worst] = fc;
                } else {
                    for (int i = 1; i <= kDim; ++i) {
                        const int v = order[i];
                        for (int j = 0; j < kDim; ++j)
                            vx[v][j] = 0.5 * (vx[v][j] + vx[order[0]][j]);
                        vx[v] = clamped(vx[v]);
                        vf[v] = eval(vx[v]);
                    }
                }
            }
        }
    }

    result.best = with_dependents_solved(best_x);
    result.best_score = best;
    for (int i = 0; i < 6; ++i)
        if (best_x[i] - settings.lower[i] < 1e-12 ||
            settings.upper[i] - best_x[i] < 1e-12)
            result.on_boundary = true;
    return result;
}

}  // namespace stapulse
