// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/errors.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/mbqc.hpp"
#include "cvcluster/phase_space.hpp"
#include "cvcluster/random.hpp"

// Finite-squeezing distortion: each wire step with an ancilla of width Omega
// multiplies the output position wavefunction by exp(-Omega^2 (q - c)^2 / 2),
// a Gaussian envelope of variance 1/Omega^2, and renormalizes.
//
// Note on sign: the envelope decays. Written with a positive exponent it
// would not be normalizable; the decaying form is what the teleportation
// circuit with a finitely squeezed ancilla actually produces.

namespace cvc {

struct DistortionEnvelope {
    /// Position-space variance of the amplitude envelope (1 / Omega^2).
    double variance;
    double center = 0.0;
    /// Extra momentum-density noise beyond what the envelope implies, for mixed inputs.
    double extra_momentum_noise = 0.0;

    static DistortionEnvelope from_omega(double omega, double center = 0.0) {
        if (!(omega > 0.0)) throw InvalidArgument("envelope squeezing width must be positive");
        return {1.0 / (omega * omega), center};
    }

    /// Omega^2, the envelope curvature; 0 for an infinitely wide envelope.
    double strength() const {
        return std::isinf(variance) ? 0.0 : 1.0 / variance;
    }
};

/// rho -> M rho M^dag / Tr on one mode, M = exp(-(q - c)^2 / (2 variance)).
///
/// In Wigner terms: the momentum density is convolved with a Gaussian of
/// variance a/2 (a = 1/variance) and the position marginal is multiplied by
/// exp(-a (q - c)^2), i.e. conditioned on a q-reading c with noise 1/(2a).
inline GaussianState apply_envelope(const GaussianState &state, std::size_t mode, const DistortionEnvelope &env) {
    if (!(env.variance > 0.0)) throw InvalidArgument("envelope variance must be positive");
    if (env.extra_momentum_noise < 0.0) throw InvalidArgument("negative momentum noise");
    check_mode_list({mode}, state.modes());
    const std::size_t n = state.modes();
    const double a = env.strength();
    Vec mean = state.mean();
    Mat cov = state.cov();
    const auto qi = q_index(mode, n), pi = p_index(mode, n);
    cov(pi, pi) += a / 2.0 + env.extra_momentum_noise;
    if (a > 0.0) {
        const Vec col = cov.col(qi);
        const double denom = cov(qi, qi) + 1.0 / (2.0 * a);
        mean += col * ((env.center - mean(qi)) / denom);
        cov -= col * col.transpose() / denom;
    }
    return GaussianState::trusted(mean, cov);
}

inline GaussianState apply_envelope(const GaussianState &state, const DistortionEnvelope &env) {
    if (state.modes() != 1) throw InvalidArgument("apply_envelope: single-mode overload needs a 1-mode state");
    return apply_envelope(state, 0, env);
}

/// An envelope that acts after `frame`: V^-1 M V.
struct PulledBackEnvelope {
    SymplecticAffine frame;
    std::size_t mode;
    DistortionEnvelope envelope;
    std::size_t step;

    GaussianState apply(const GaussianState &state) const {
        GaussianState s = apply_affine(state, frame);
        s = apply_envelope(s, mode, envelope);
        return apply_affine(s, frame.inverse());
    }
};

/// Finite-squeezing output written as U0 * Mtilde: U0 is the ideal-cluster
/// map for the given outcomes and Mtilde the gathered distortion acting on the input.
struct DistortionDecomposition {
    SymplecticAffine u0;
    std::vector<PulledBackEnvelope> distortion;  // first applied first

    GaussianState distort(GaussianState input) const {
        for (const auto &d : distortion) input = d.apply(input);
        return input;
    }
    GaussianState predict(const GaussianState &input) const {
        return apply_affine(distort(input), u0);
    }
    /// Envelopes whose strength Omega^2 exceeds `threshold`.
    std::vector<PulledBackEnvelope> significant(double threshold) const {
        std::vector<PulledBackEnvelope> out;
        for (const auto &d : distortion) {
            if (d.envelope.strength() > threshold) out.push_back(d);
        }
        return out;
    }
};

inline DistortionDecomposition decompose_distortion(const CompiledProgram &compiled, const OutcomeMap &outcomes) {
    const auto &sched = compiled.schedule;
    const std::size_t n = sched.logical_modes;
    DistortionDecomposition out{SymplecticAffine::identity(n), {}};
    for (std::size_t k = 0; k < sched.steps.size(); ++k) {
        const auto &step = sched.steps[k];
        if (!step.gate.gaussian()) throw InvalidArgument("decompose_distortion: non-Gaussian instruction present");
        out.u0 = executed_action(step, outcomes, n) * out.u0;
        for (std::size_t j = 0; j < step.ancillas.size(); ++j) {
            const double omega = compiled.graph.nodes()[compiled.graph.index_of(step.ancillas[j])].omega;
            out.distortion.push_back({out.u0, step.gate.targets[j], DistortionEnvelope::from_omega(omega), k});
        }
    }
    return out;
}

inline DistortionDecomposition decompose_distortion(const GateProgram &program, const OutcomeMap &outcomes,
                                                    const CompileOptions &options) {
    return decompose_distortion(compile(program, options), outcomes);
}

struct NoiseBudget {
    /// Added variance per CZ link on each endpoint's q and p.
    double per_link_q = 0.0;
    double per_link_p = 0.0;
    /// Excess quadrature variance of a mixed (thermalized) input.
    double thermal_excess = 0.0;

    static NoiseBudget symmetric(double per_link) {
        return {per_link, per_link, 0.0};
    }
    void validate() const {
        if (per_link_q < 0.0 || per_link_p < 0.0 || thermal_excess < 0.0) {
            throw InvalidArgument("noise variances must be nonnegative");
        }
    }
    bool zero() const {
        return per_link_q == 0.0 && per_link_p == 0.0 && thermal_excess == 0.0;
    }
};

enum class NoiseSampling {
    /// Ensemble channel: covariance grows, mean untouched.
    Channel,
    /// One realization: mean gets a random kick, covariance untouched.
    Trajectory,
};

/// Additive QND noise: `links` x per-link variance on q and p of each listed mode.
inline GaussianState apply_qnd_noise(const GaussianState &state, const ModeList &modes, int links,
                                     const NoiseBudget &budget, NoiseSampling sampling = NoiseSampling::Channel,
                                     Rng *rng = nullptr) {
    if (links < 0) throw InvalidArgument("negative link count");
    budget.validate();
    check_mode_list(modes, state.modes());
    const std::size_t n = state.modes();
    Vec mean = state.mean();
    Mat cov = state.cov();
    const double vq = links * budget.per_link_q, vp = links * budget.per_link_p;
    for (auto m : modes) {
        if (sampling == NoiseSampling::Channel) {
            cov(q_index(m, n), q_index(m, n)) += vq;
            cov(p_index(m, n), p_index(m, n)) += vp;
        } else {
            if (rng == nullptr) throw InvalidArgument("trajectory noise requires a random source");
            mean(q_index(m, n)) += vq > 0.0 ? rng->normal(0.0, std::sqrt(vq)) : 0.0;
            mean(p_index(m, n)) += vp > 0.0 ? rng->normal(0.0, std::sqrt(vp)) : 0.0;
        }
    }
    return GaussianState::trusted(mean, cov);
}

/// Cluster preparation with QND noise: after the links are applied each node
/// has taken degree x per-link noise on both quadratures; inputs carry the
/// budget's thermal excess.
inline GaussianState prepare_noisy_cluster(const ClusterGraph &graph, const GaussianState *inputs,
                                           const NoiseBudget &budget) {
    budget.validate();
    std::optional<GaussianState> thermalized;
    if (inputs != nullptr && budget.thermal_excess > 0.0) {
        Mat cov = inputs->cov();
        cov.diagonal().array() += budget.thermal_excess;
        thermalized = GaussianState::trusted(inputs->mean(), cov);
        inputs = &*thermalized;
    }
    GaussianState state = prepare_cluster(graph, inputs);
    if (budget.per_link_q == 0.0 && budget.per_link_p == 0.0) return state;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const int links = static_cast<int>(graph.degree(graph.nodes()[i].id));
        state = apply_qnd_noise(state, {i}, links, budget);
    }
    return state;
}

struct SweepRow {
    double omega;
    std::string program_id;
    double fidelity_mean;
    double fidelity_stderr;
    std::size_t trials;
};

struct SweepOptions {
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    /// Pin every outcome to 0 instead of sampling.
    bool pinned_zero = true;
    NoiseBudget noise;
    std::string program_id = "program";
};

/// Frame-resolved output fidelity against the ideal program, per Omega.
inline std::vector<SweepRow> fidelity_vs_squeezing(const GateProgram &program, const std::vector<double> &omegas,
                                                   const std::vector<GaussianState> &inputs,
                                                   const SweepOptions &options = {}) {
    if (omegas.empty()) throw InvalidArgument("empty squeezing sweep");
    if (inputs.empty()) throw InvalidArgument("empty input family");
    if (!program.gaussian()) throw InvalidArgument("fidelity sweep needs a Gaussian program");
    const auto ideal = ideal_program(program);
    std::vector<SweepRow> rows;
    for (std::size_t w = 0; w < omegas.size(); ++w) {
        const auto compiled = compile(program, {omegas[w], {}});
        OutcomeMap pins;
        if (options.pinned_zero) {
            for (const auto &e : compiled.schedule.entries) pins[e.node] = 0.0;
        }
        double sum = 0.0, sum_sq = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto cluster = prepare_noisy_cluster(compiled.graph, &inputs[i], options.noise);
            const auto target = apply_affine(inputs[i], ideal);
            for (std::size_t t = 0; t < options.trials; ++t) {
                auto rng = Rng::substream(options.seed, {w, i, t});
                auto run = run_schedule(cluster, compiled.schedule, {}, pins, &rng);
                const double f = fidelity(resolve_frame(run.output, run.frame), target);
                sum += f;
                sum_sq += f * f;
                ++count;
            }
        }
        const double mean = sum / static_cast<double>(count);
        const double var = count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)) : 0.0;
        rows.push_back({omegas[w], options.program_id, mean, std::sqrt(var / static_cast<double>(count)), count});
    }
    return rows;
}

}  // namespace cvc
