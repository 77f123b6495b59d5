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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/error_model.hpp"
#include "cvcluster/errors.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/mbqc.hpp"
#include "cvcluster/phase_space.hpp"
#include "cvcluster/random.hpp"

namespace cvc {

/// One Monte-Carlo trial. `trial` together with `seed` names the random
/// substream it used; `outcomes` hold the raw readings needed to replay it.
struct TrialRecord {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::string strategy;
    std::size_t attempts = 1;
    bool accepted = true;
    std::vector<MeasurementRecord> outcomes;
    /// Frame-resolved output; empty when the trial never got accepted.
    std::optional<GaussianState> output;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct FidelityStats {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;

    static FidelityStats of(const std::vector<double> &values) {
        FidelityStats s;
        s.count = values.size();
        if (values.empty()) return s;
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                                    static_cast<double>(values.size()))
                                        : 0.0;
        return s;
    }
};

// ---------------------------------------------------------------------------
// General program driver.

struct ProgramConfig {
    GateProgram program;
    CompileOptions compile;
    NoiseBudget noise;
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    /// Logical input register; vacuum on every mode if unset.
    std::optional<GaussianState> input;
    OutcomeMap pins;
    PinMode pin_mode = PinMode::Logical;

    void validate() const {
        program.validate();
        noise.validate();
        if (trials < 1) throw InvalidArgument("trials must be at least 1");
        for (std::size_t k = 0; k < program.ops.size(); ++k) {
            if (!program.ops[k].gaussian()) {
                throw Unsupported("instruction " + std::to_string(k) + " (" + to_string(program.ops[k].nongaussian) +
                                  ") is non-Gaussian; the Gaussian engine cannot run it, use the Fock oracle");
            }
        }
        if (input && input->modes() != program.modes) {
            throw InvalidArgument("input state has " + std::to_string(input->modes()) + " modes, program has " +
                                  std::to_string(program.modes));
        }
    }
    GaussianState input_state() const {
        return input ? *input : vacuum(program.modes);
    }
};

inline std::uint64_t trial_stream_tag(const std::string &strategy) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : strategy) h = (h ^ c) * 1099511628211ULL;
    return h;
}

class ProgramRunner {
   public:
    explicit ProgramRunner(ProgramConfig config) : config_(std::move(config)) {
        config_.validate();
        compiled_ = compile(config_.program, config_.compile);
        const auto input = config_.input_state();
        cluster_.emplace(prepare_noisy_cluster(compiled_.graph, &input, config_.noise));
        target_.emplace(apply_affine(input, ideal_program(config_.program)));
    }

    const CompiledProgram &compiled() const {
        return compiled_;
    }

    /// Runs trial `index`; extra pins (raw or logical per `mode`) override the config's.
    TrialRecord trial(std::uint64_t index, const OutcomeMap *override_pins = nullptr,
                      PinMode mode = PinMode::Raw) const {
        auto rng = Rng::substream(config_.seed, {index, trial_stream_tag("run")});
        const OutcomeMap &pins = override_pins ? *override_pins : config_.pins;
        const PinMode pin_mode = override_pins ? mode : config_.pin_mode;
        auto run = run_schedule(*cluster_, compiled_.schedule, {}, pins, &rng, pin_mode);
        TrialRecord rec;
        rec.trial = index;
        rec.seed = config_.seed;
        rec.strategy = "run";
        rec.outcomes = std::move(run.record);
        rec.output = resolve_frame(run.output, run.frame);
        rec.output->check_physical();
        rec.fidelity = fidelity(*rec.output, *target_);
        return rec;
    }

    /// Re-executes a logged trial with every outcome pinned to its raw reading.
    TrialRecord replay(const TrialRecord &logged) const {
        OutcomeMap pins;
        for (const auto &m : logged.outcomes) pins[m.node] = m.raw;
        return trial(logged.trial, &pins, PinMode::Raw);
    }

    void run(const std::function<void(const TrialRecord &)> &sink) const {
        for (std::uint64_t t = 0; t < config_.trials; ++t) sink(trial(t));
    }

   private:
    ProgramConfig config_;
    CompiledProgram compiled_;
    std::optional<GaussianState> cluster_;
    std::optional<GaussianState> target_;
};

inline std::vector<TrialRecord> run_program(const ProgramConfig &config) {
    ProgramRunner runner(config);
    std::vector<TrialRecord> out;
    runner.run([&](const TrialRecord &r) { out.push_back(r); });
    return out;
}

// ---------------------------------------------------------------------------
// Mini-cluster post-selection on a single wire.
//
// Strategy A measures every wire node of the full chain. Strategy B builds the
// chain without the input node, measures the nodes that do not touch the
// input link, keeps the mini-cluster only if the rule accepts those outcomes,
// then attaches the input and measures the remaining two nodes.

/// Decides from the pre-measured logical outcomes whether to keep a mini-cluster.
using AcceptRule = std::function<bool(const std::vector<MeasurementRecord> &, double window)>;

/// Accept when every pre-measured displacement satisfies |s| <= window.
inline bool small_displacement_rule(const std::vector<MeasurementRecord> &pre, double window) {
    for (const auto &m : pre) {
        if (!(std::abs(m.logical) <= window)) return false;
    }
    return true;
}

/// n teleportation steps whose ideal product is the identity.
inline GateProgram identity_wire(std::size_t steps = 4) {
    GateProgram p;
    p.modes = 1;
    for (std::size_t k = 0; k < steps; ++k) p.ops.push_back(Instruction::f(0));
    const std::size_t extra = (4 - steps % 4) % 4;
    for (std::size_t k = 0; k < extra; ++k) p.ops.push_back(Instruction::f(0));
    return p;
}

struct PostselectConfig {
    GateProgram program = identity_wire(4);
    double omega = 0.3;
    /// Per-ancilla widths (nodes 2, 3, ...); missing entries use `omega`.
    std::vector<double> omega_profile;
    NoiseBudget noise;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    double window = 0.5;
    /// Mini-cluster attempts per trial before it is given up.
    std::size_t max_attempts = 10000;
    GaussianState input = vacuum(1);
    AcceptRule rule = small_displacement_rule;

    void validate() const {
        program.validate();
        noise.validate();
        if (program.modes != 1) throw InvalidArgument("post-selection runs on a single wire");
        if (!program.gaussian()) throw InvalidArgument("post-selection needs a Gaussian program");
        if (program.ops.size() < 3) throw InvalidArgument("post-selection needs at least three wire steps");
        if (trials < 1) throw InvalidArgument("trials must be at least 1");
        if (!(window >= 0.0)) throw InvalidArgument("window must be nonnegative");
        if (max_attempts < 1) throw InvalidArgument("max_attempts must be at least 1");
        if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
        if (input.modes() != 1) throw InvalidArgument("post-selection input must be single-mode");
    }
};

struct PostselectSummary {
    FidelityStats baseline;
    FidelityStats postselected;
    std::size_t attempts = 0;
    std::size_t accepted = 0;
    double acceptance_rate = 0.0;
    /// Set when no trial was accepted at this window.
    bool zero_accepted = false;
    double window = 0.0;
    double omega = 0.0;
};

class PostselectionExperiment {
   public:
    explicit PostselectionExperiment(PostselectConfig config) : config_(std::move(config)) {
        config_.validate();
        compiled_ = compile(config_.program, {config_.omega, config_.omega_profile});
        const auto &sched = compiled_.schedule;
        input_node_ = sched.input_nodes.at(0);
        for (const auto &e : compiled_.graph.edges()) {
            if (e.a == input_node_ || e.b == input_node_) {
                link_node_ = e.a == input_node_ ? e.b : e.a;
                link_weight_ = e.weight;
            }
        }
        // Mini-cluster: every node but the input.
        for (const auto &node : compiled_.graph.nodes()) {
            if (node.id != input_node_) mini_graph_.add_node(node.id, node.omega);
        }
        for (const auto &e : compiled_.graph.edges()) {
            if (e.a != input_node_ && e.b != input_node_) mini_graph_.add_edge(e.a, e.b, e.weight);
        }
        for (std::size_t k = 0; k < sched.entries.size(); ++k) {
            const int node = sched.entries[k].node;
            (node == input_node_ || node == link_node_ ? live_entries_ : pre_entries_).push_back(k);
        }
        full_cluster_.emplace(prepare_noisy_cluster(compiled_.graph, &config_.input, config_.noise));
        mini_cluster_.emplace(prepare_noisy_cluster(mini_graph_, nullptr, config_.noise));
        Mat in_cov = config_.input.cov();
        in_cov.diagonal().array() += config_.noise.thermal_excess;
        noisy_input_.emplace(GaussianState::trusted(config_.input.mean(), in_cov));
        target_.emplace(apply_affine(config_.input, ideal_program(config_.program)));
    }

    const CompiledProgram &compiled() const {
        return compiled_;
    }
    const PostselectConfig &config() const {
        return config_;
    }
    std::vector<int> premeasured_nodes() const {
        std::vector<int> out;
        for (auto k : pre_entries_) out.push_back(compiled_.schedule.entries[k].node);
        return out;
    }

    /// Strategy A: the full chain, every wire node measured on live data.
    TrialRecord baseline_trial(std::uint64_t index, const OutcomeMap *raw_pins = nullptr) const {
        auto rng = Rng::substream(config_.seed, {index, trial_stream_tag("A")});
        const OutcomeMap none;
        auto run = run_schedule(*full_cluster_, compiled_.schedule, {}, raw_pins ? *raw_pins : none, &rng,
                                PinMode::Raw);
        TrialRecord rec;
        rec.trial = index;
        rec.seed = config_.seed;
        rec.strategy = "A";
        rec.outcomes = std::move(run.record);
        finish(rec, run.output, run.outcomes);
        return rec;
    }

    /// Strategy B with retries. Attempt a of trial i always draws from the same
    /// substream, so acceptance is monotone in the window.
    TrialRecord postselected_trial(std::uint64_t index, double window, const OutcomeMap *raw_pins = nullptr,
                                   std::size_t first_attempt = 0) const {
        TrialRecord rec;
        rec.trial = index;
        rec.seed = config_.seed;
        rec.strategy = "B";
        rec.accepted = false;
        rec.attempts = 0;
        const OutcomeMap none;
        const OutcomeMap &pins = raw_pins ? *raw_pins : none;
        for (std::size_t a = first_attempt; a < config_.max_attempts; ++a) {
            ++rec.attempts;
            auto rng = Rng::substream(config_.seed, {index, a, trial_stream_tag("B")});
            LiveRegister live{*mini_cluster_, mini_graph_node_ids()};
            std::vector<MeasurementRecord> pre;
            for (auto k : pre_entries_) pre.push_back(live.measure(compiled_.schedule.entries[k], pins, PinMode::Raw, &rng));
            if (!config_.rule(pre, window)) continue;
            rec.accepted = true;
            rec.attempts = a + 1;
            // Attach the input through the delayed link.
            live.state = attach(*noisy_input_, *live.state, {{0, live.mode_of(link_node_), link_weight_}});
            live.nodes.insert(live.nodes.begin(), input_node_);
            if (!config_.noise.zero()) {
                live.state = apply_qnd_noise(*live.state, {live.mode_of(input_node_), live.mode_of(link_node_)}, 1,
                                             config_.noise);
            }
            OutcomeMap outcomes;
            rec.outcomes = pre;
            for (auto k : live_entries_) {
                rec.outcomes.push_back(live.measure(compiled_.schedule.entries[k], pins, PinMode::Raw, &rng));
            }
            for (const auto &m : rec.outcomes) outcomes[m.node] = m.logical;
            finish(rec, live.output(compiled_.schedule.output_nodes), outcomes);
            return rec;
        }
        return rec;
    }

    /// Re-executes a logged trial with its raw readings pinned.
    TrialRecord replay(const TrialRecord &logged) const {
        OutcomeMap pins;
        for (const auto &m : logged.outcomes) pins[m.node] = m.raw;
        if (logged.strategy == "A") return baseline_trial(logged.trial, &pins);
        if (logged.strategy == "B") {
            if (!logged.accepted) throw InvalidArgument("a rejected trial has no outcomes to replay");
            auto rec = postselected_trial(logged.trial, std::numeric_limits<double>::infinity(), &pins,
                                          logged.attempts - 1);
            rec.attempts = logged.attempts;
            return rec;
        }
        throw InvalidArgument("unknown strategy '" + logged.strategy + "'");
    }

    PostselectSummary run(double window, const std::function<void(const TrialRecord &)> &sink = {}) const {
        PostselectSummary s;
        s.window = window;
        s.omega = config_.omega;
        std::vector<double> fa, fb;
        for (std::uint64_t t = 0; t < config_.trials; ++t) {
            auto a = baseline_trial(t);
            fa.push_back(a.fidelity);
            if (sink) sink(a);
            auto b = postselected_trial(t, window);
            s.attempts += b.attempts;
            if (b.accepted) {
                ++s.accepted;
                fb.push_back(b.fidelity);
            }
            if (sink) sink(b);
        }
        s.baseline = FidelityStats::of(fa);
        s.postselected = FidelityStats::of(fb);
        s.acceptance_rate = static_cast<double>(s.accepted) / static_cast<double>(s.attempts);
        s.zero_accepted = s.accepted == 0;
        return s;
    }

    /// Acceptance rate per window over the first `trials` trials (mini-cluster only).
    std::vector<std::pair<double, double>> acceptance_scan(const std::vector<double> &windows,
                                                           std::size_t trials) const {
        std::vector<std::pair<double, double>> out;
        for (double w : windows) {
            std::size_t attempts = 0, accepted = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                const auto rec = premeasure_only(t, w);
                attempts += rec.first;
                accepted += rec.second ? 1 : 0;
            }
            out.emplace_back(w, static_cast<double>(accepted) / static_cast<double>(attempts));
        }
        return out;
    }

   private:
    std::vector<int> mini_graph_node_ids() const {
        std::vector<int> ids;
        for (const auto &n : mini_graph_.nodes()) ids.push_back(n.id);
        return ids;
    }

    std::pair<std::size_t, bool> premeasure_only(std::uint64_t index, double window) const {
        const OutcomeMap none;
        for (std::size_t a = 0; a < config_.max_attempts; ++a) {
            auto rng = Rng::substream(config_.seed, {index, a, trial_stream_tag("B")});
            LiveRegister live{*mini_cluster_, mini_graph_node_ids()};
            std::vector<MeasurementRecord> pre;
            for (auto k : pre_entries_) pre.push_back(live.measure(compiled_.schedule.entries[k], none, PinMode::Raw, &rng));
            if (config_.rule(pre, window)) return {a + 1, true};
        }
        return {config_.max_attempts, false};
    }

    void finish(TrialRecord &rec, const GaussianState &output, const OutcomeMap &outcomes) const {
        auto frame = frame_from_outcomes(compiled_.schedule, outcomes);
        rec.output = resolve_frame(output, frame);
        rec.output->check_physical();
        rec.fidelity = fidelity(*rec.output, *target_);
    }

    PostselectConfig config_;
    CompiledProgram compiled_;
    ClusterGraph mini_graph_;
    int input_node_ = 0;
    int link_node_ = 0;
    double link_weight_ = 1.0;
    std::vector<std::size_t> pre_entries_;
    std::vector<std::size_t> live_entries_;
    std::optional<GaussianState> full_cluster_;
    std::optional<GaussianState> mini_cluster_;
    std::optional<GaussianState> noisy_input_;
    std::optional<GaussianState> target_;
};

// ---------------------------------------------------------------------------
// Tomography over trial outputs.

struct WignerGrid {
    double lo = -5.0;
    double hi = 5.0;
    std::size_t points = 101;
    /// values[i * points + j] at (q_i, p_j).
    std::vector<double> values;

    double step() const {
        return (hi - lo) / static_cast<double>(points - 1);
    }
    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * step() * step();
    }
};

struct TomographySummary {
    Vec mean;           // average of the output means
    Mat cov_of_means;   // spread of the output means
    Mat mixture_cov;    // covariance of the equal-weight mixture
    WignerGrid wigner;  // averaged Wigner function
};

inline TomographySummary tomography_summary(const std::vector<GaussianState> &states, double lo = -5.0,
                                            double hi = 5.0, std::size_t points = 101) {
    if (states.size() < 2) throw InvalidArgument("tomography needs at least two states");
    if (points < 2 || !(hi > lo)) throw InvalidArgument("degenerate Wigner grid");
    for (const auto &s : states) {
        if (s.modes() != 1) throw InvalidArgument("tomography summary takes single-mode states");
    }
    const auto k = static_cast<double>(states.size());
    TomographySummary out;
    out.mean = Vec::Zero(2);
    Mat avg_cov = Mat::Zero(2, 2);
    for (const auto &s : states) {
        out.mean += s.mean() / k;
        avg_cov += s.cov() / k;
    }
    out.cov_of_means = Mat::Zero(2, 2);
    for (const auto &s : states) {
        const Vec d = s.mean() - out.mean;
        out.cov_of_means += d * d.transpose() / (k - 1.0);
    }
    // Mixture covariance uses the population spread of the means.
    out.mixture_cov = avg_cov + out.cov_of_means * (k - 1.0) / k;
    out.wigner.lo = lo;
    out.wigner.hi = hi;
    out.wigner.points = points;
    out.wigner.values.assign(points * points, 0.0);
    const auto grid = phase_space_grid(lo, hi, points);
    for (const auto &s : states) {
        const auto w = wigner(s, grid);
        for (std::size_t i = 0; i < w.size(); ++i) out.wigner.values[i] += w[i] / k;
    }
    return out;
}

}  // namespace cvc
