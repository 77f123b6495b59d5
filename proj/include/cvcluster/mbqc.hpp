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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/errors.hpp"
#include "cvcluster/gates.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/homodyne.hpp"
#include "cvcluster/random.hpp"

namespace cvc {

enum class OpKind { Z, X, F, P, CZ, NonGaussian };
enum class NonGaussianKind { Cubic, PhotonCount };

inline std::string to_string(OpKind k) {
    switch (k) {
        case OpKind::Z: return "Z";
        case OpKind::X: return "X";
        case OpKind::F: return "F";
        case OpKind::P: return "P";
        case OpKind::CZ: return "CZ";
        case OpKind::NonGaussian: return "NONGAUSSIAN";
    }
    return "?";
}

inline std::string to_string(NonGaussianKind k) {
    return k == NonGaussianKind::Cubic ? "cubic" : "photon_count";
}

/// One gate of a logical program. `param` is s for Z/X, t for P, the link
/// weight g for CZ, and u for a cubic non-Gaussian measurement.
struct Instruction {
    OpKind kind;
    double param = 0.0;
    std::vector<std::size_t> targets;
    NonGaussianKind nongaussian = NonGaussianKind::Cubic;

    static Instruction z(std::size_t mode, double s) {
        return {OpKind::Z, s, {mode}};
    }
    static Instruction x(std::size_t mode, double s) {
        return {OpKind::X, s, {mode}};
    }
    static Instruction f(std::size_t mode) {
        return {OpKind::F, 0.0, {mode}};
    }
    static Instruction p(std::size_t mode, double t) {
        return {OpKind::P, t, {mode}};
    }
    static Instruction cz(std::size_t a, std::size_t b, double g = 1.0) {
        return {OpKind::CZ, g, {a, b}};
    }
    static Instruction cubic(std::size_t mode, double u) {
        return {OpKind::NonGaussian, u, {mode}, NonGaussianKind::Cubic};
    }
    static Instruction photon_count(std::size_t mode) {
        return {OpKind::NonGaussian, 0.0, {mode}, NonGaussianKind::PhotonCount};
    }

    bool gaussian() const {
        return kind != OpKind::NonGaussian;
    }
};

struct GateProgram {
    std::size_t modes = 1;
    std::vector<Instruction> ops;

    void validate() const {
        if (modes == 0) throw InvalidArgument("program needs at least one logical mode");
        for (std::size_t k = 0; k < ops.size(); ++k) {
            const auto &op = ops[k];
            const std::size_t arity = op.kind == OpKind::CZ ? 2 : 1;
            const std::string where = "instruction " + std::to_string(k) + " (" + to_string(op.kind) + ")";
            if (op.targets.size() != arity) throw InvalidArgument(where + ": wrong number of targets");
            if (!std::isfinite(op.param)) throw InvalidArgument(where + ": non-finite parameter");
            if (op.kind == OpKind::CZ && op.param == 0.0) throw InvalidArgument(where + ": zero CZ weight");
            check_mode_list(op.targets, modes);
        }
    }

    bool gaussian() const {
        return std::all_of(ops.begin(), ops.end(), [](const Instruction &i) { return i.gaussian(); });
    }
};

/// Intended action of a Gaussian instruction on the whole logical register.
inline SymplecticAffine ideal_action(const Instruction &op, std::size_t n_modes) {
    switch (op.kind) {
        case OpKind::Z: return gates::z_shift(op.param).embedded(op.targets, n_modes);
        case OpKind::X: return gates::x_shift(op.param).embedded(op.targets, n_modes);
        case OpKind::F: return gates::fourier().embedded(op.targets, n_modes);
        case OpKind::P: return gates::shear(op.param).embedded(op.targets, n_modes);
        case OpKind::CZ: return gates::cz(op.param).embedded(op.targets, n_modes);
        case OpKind::NonGaussian: break;
    }
    throw Unsupported("non-Gaussian instruction has no symplectic action");
}

inline SymplecticAffine ideal_program(const GateProgram &program) {
    program.validate();
    auto u = SymplecticAffine::identity(program.modes);
    for (const auto &op : program.ops) u = ideal_action(op, program.modes) * u;
    return u;
}

enum class BasisType { Homodyne, NonGaussian };

/// How one node is read out and how its raw reading becomes the logical outcome.
///
/// For homodyne bases the detected quadrature is p cos(theta) - q sin(theta),
/// so theta = 0 is plain p-detection. The logical outcome (the s in the
/// X(s)F byproduct) is raw / rescale + offset.
struct MeasurementBasis {
    BasisType type = BasisType::Homodyne;
    double theta = 0.0;
    double rescale = 1.0;
    double offset = 0.0;
    NonGaussianKind nongaussian = NonGaussianKind::Cubic;
    double nongaussian_param = 0.0;

    /// Same quadrature expressed as q cos(phi) + p sin(phi), the homodyne() convention.
    double detector_angle() const {
        return theta + std::numbers::pi / 2.0;
    }
    double logical(double raw) const {
        return raw / rescale + offset;
    }
    double raw(double logical_outcome) const {
        return (logical_outcome - offset) * rescale;
    }
};

/// Gate D, diagonal in q, that a wire teleportation step folds into its measurement basis.
struct DiagonalGate {
    enum class Kind { Identity, Z, P };
    Kind kind = Kind::Identity;
    double param = 0.0;

    static DiagonalGate identity() {
        return {};
    }
    static DiagonalGate z(double s) {
        return {Kind::Z, s};
    }
    static DiagonalGate p(double t) {
        return {Kind::P, t};
    }

    SymplecticAffine action() const {
        switch (kind) {
            case Kind::Identity: return SymplecticAffine::identity(1);
            case Kind::Z: return gates::z_shift(param);
            case Kind::P: return gates::shear(param);
        }
        return SymplecticAffine::identity(1);
    }

    /// Basis for D^dag p D: p for the identity; p read out and shifted by +s
    /// for Z(s); the quadrature rotated by arctan(-t) and rescaled by
    /// cos(theta) = (1 + t^2)^(-1/2) for P(t).
    MeasurementBasis basis() const {
        MeasurementBasis b;
        if (kind == Kind::Z) b.offset = param;
        if (kind == Kind::P) {
            b.theta = std::atan(-param);
            b.rescale = 1.0 / std::sqrt(1.0 + param * param);
        }
        return b;
    }
};

/// X(s) F, the residue of one wire teleportation step.
inline SymplecticAffine wire_byproduct(double s) {
    return gates::x_shift(s) * gates::fourier();
}

struct TeleportResult {
    double outcome;  // logical s
    double raw;
    GaussianState state;
    std::size_t output_mode;
    SymplecticAffine byproduct;  // X(s) F on the output mode
};

/// One wire step: append a squeezed ancilla, CZ it to `mode`, and measure
/// `mode` in the basis D^dag p D. The ancilla (last mode of the result)
/// carries M X(s) F D |psi>, M being the finite-squeezing envelope.
inline TeleportResult teleport_step(const GaussianState &state, std::size_t mode, double omega,
                                    const DiagonalGate &gate, std::optional<double> pinned, Rng *rng) {
    check_mode_list({mode}, state.modes());
    const std::size_t n = state.modes();
    GaussianState joined = tensor(state, squeezed_vacuum_p(omega));
    joined = apply_affine(joined, gates::cz(), {mode, n});
    const MeasurementBasis basis = gate.basis();
    std::optional<double> raw_pin;
    if (pinned) raw_pin = basis.raw(*pinned);
    auto h = homodyne(joined, mode, basis.detector_angle(), raw_pin, rng);
    const double s = pinned ? *pinned : basis.logical(h.outcome);
    return {s, h.outcome, std::move(*h.state), n - 1, wire_byproduct(s)};
}

struct CzStepResult {
    double outcome_a;
    double outcome_b;
    GaussianState state;
    std::size_t output_a;
    std::size_t output_b;
    SymplecticAffine byproduct;  // X(s_a)F (x) X(s_b)F on (output_a, output_b)
};

/// Two-wire CZ: fresh ancillas 3 and 4 linked 1-3, 2-4 and 1-2, then p
/// measured on 1 and 2. Outputs (last two modes) carry
/// (X(s1)F (x) X(s2)F) CZ |psi>.
inline CzStepResult cz_step(const GaussianState &state, std::size_t mode_a, std::size_t mode_b, double omega,
                            std::optional<double> pin_a, std::optional<double> pin_b, Rng *rng,
                            double weight = 1.0) {
    check_mode_list({mode_a, mode_b}, state.modes());
    const std::size_t n = state.modes();
    GaussianState joined = tensor(tensor(state, squeezed_vacuum_p(omega)), squeezed_vacuum_p(omega));
    joined = apply_affine(joined, gates::cz(), {mode_a, n});
    joined = apply_affine(joined, gates::cz(), {mode_b, n + 1});
    joined = apply_affine(joined, gates::cz(weight), {mode_a, mode_b});
    const MeasurementBasis basis;
    auto ha = homodyne(joined, mode_a, basis.detector_angle(), pin_a, rng);
    const std::size_t b_after = mode_b > mode_a ? mode_b - 1 : mode_b;
    auto hb = homodyne(*ha.state, b_after, basis.detector_angle(), pin_b, rng);
    const double sa = ha.outcome, sb = hb.outcome;
    const auto frame = wire_byproduct(sa).embedded({0}, 2) * wire_byproduct(sb).embedded({1}, 2);
    return {sa, sb, std::move(*hb.state), n - 2, n - 1, frame};
}

/// Node shape of the two-wire CZ pattern: inputs 1, 2; outputs 3, 4.
inline ClusterGraph cz_pattern_graph(double omega) {
    ClusterGraph g;
    g.add_node(1, 0.0, true);
    g.add_node(2, 0.0, true);
    g.add_node(3, omega);
    g.add_node(4, omega);
    g.add_edge(1, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 4);
    return g;
}

struct ScheduleEntry {
    int node;
    MeasurementBasis basis;
    /// Gaussian entries may be reordered freely; adaptive ones are barriers.
    bool order_free = true;
    std::size_t step;
};

/// A program instruction after lowering onto the cluster.
struct LoweredStep {
    Instruction gate;
    DiagonalGate diagonal;        // single-mode Gaussian steps only
    std::vector<int> measured;    // one node, or two for CZ
    std::vector<int> ancillas;    // the fresh nodes that receive the output
};

struct MeasurementSchedule {
    std::size_t logical_modes = 1;
    std::vector<ScheduleEntry> entries;
    std::vector<LoweredStep> steps;
    std::vector<int> node_ids;      // cluster mode i is node_ids[i]
    std::vector<int> input_nodes;   // per logical mode
    std::vector<int> output_nodes;  // per logical mode

    bool adaptive() const {
        return std::any_of(entries.begin(), entries.end(), [](const ScheduleEntry &e) { return !e.order_free; });
    }

    /// Rejects non-permutations and any order that moves an adaptive entry
    /// or carries an order-free entry across one.
    void check_order(const std::vector<std::size_t> &order) const {
        if (order.size() != entries.size()) throw InvalidArgument("execution order has the wrong length");
        std::vector<bool> seen(entries.size(), false);
        for (auto k : order) {
            if (k >= entries.size() || seen[k]) throw InvalidArgument("execution order is not a permutation");
            seen[k] = true;
        }
        std::vector<std::size_t> segment(entries.size());
        std::size_t barrier = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!entries[i].order_free) ++barrier;
            segment[i] = barrier;
        }
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const auto k = order[pos];
            if (!entries[k].order_free && k != pos) {
                throw InvalidArgument("execution order moves an adaptive measurement");
            }
            if (segment[k] != segment[pos]) {
                throw InvalidArgument("execution order crosses an adaptive barrier");
            }
        }
    }
};

struct CompileOptions {
    double omega = 0.1;
    /// Per-ancilla squeezing widths in creation order; missing entries use `omega`.
    std::vector<double> ancilla_omegas;
};

struct CompiledProgram {
    ClusterGraph graph;
    MeasurementSchedule schedule;
};

/// Lowers a program onto one wire per logical mode. Input node of mode i is
/// node i + 1; each instruction consumes the wire's current node and creates
/// fresh ancilla nodes. CZ adds the cross link of the two-wire pattern.
inline CompiledProgram compile(const GateProgram &program, const CompileOptions &options = {}) {
    program.validate();
    CompiledProgram out;
    auto &graph = out.graph;
    auto &sched = out.schedule;
    sched.logical_modes = program.modes;
    std::vector<int> current(program.modes);
    for (std::size_t m = 0; m < program.modes; ++m) {
        const int id = static_cast<int>(m) + 1;
        graph.add_node(id, 0.0, true);
        sched.input_nodes.push_back(id);
        current[m] = id;
    }
    int next_id = static_cast<int>(program.modes) + 1;
    std::size_t ancilla_count = 0;
    auto new_ancilla = [&]() {
        const double omega =
            ancilla_count < options.ancilla_omegas.size() ? options.ancilla_omegas[ancilla_count] : options.omega;
        ++ancilla_count;
        graph.add_node(next_id, omega);
        return next_id++;
    };

    for (std::size_t k = 0; k < program.ops.size(); ++k) {
        const auto &op = program.ops[k];
        LoweredStep step{op, DiagonalGate::identity(), {}, {}};
        if (op.kind == OpKind::CZ) {
            const auto a = op.targets[0], b = op.targets[1];
            const int na = new_ancilla(), nb = new_ancilla();
            graph.add_edge(current[a], na);
            graph.add_edge(current[b], nb);
            graph.add_edge(current[a], current[b], op.param);
            step.measured = {current[a], current[b]};
            step.ancillas = {na, nb};
            sched.entries.push_back({current[a], MeasurementBasis{}, true, k});
            sched.entries.push_back({current[b], MeasurementBasis{}, true, k});
            current[a] = na;
            current[b] = nb;
        } else {
            const auto m = op.targets[0];
            const int anc = new_ancilla();
            graph.add_edge(current[m], anc);
            MeasurementBasis basis;
            bool order_free = true;
            switch (op.kind) {
                case OpKind::Z: step.diagonal = DiagonalGate::z(op.param); break;
                case OpKind::P: step.diagonal = DiagonalGate::p(op.param); break;
                case OpKind::NonGaussian: order_free = false; break;
                default: break;
            }
            if (order_free) {
                basis = step.diagonal.basis();
            } else {
                basis.type = BasisType::NonGaussian;
                basis.nongaussian = op.nongaussian;
                basis.nongaussian_param = op.param;
            }
            step.measured = {current[m]};
            step.ancillas = {anc};
            sched.entries.push_back({current[m], basis, order_free, k});
            current[m] = anc;
        }
        sched.steps.push_back(step);
    }
    sched.output_nodes = current;
    for (const auto &node : graph.nodes()) sched.node_ids.push_back(node.id);
    return out;
}

class ByproductFrame;
inline GaussianState resolve_frame(const GaussianState &state, ByproductFrame &frame);

/// Outstanding Gaussian correction on the logical register: the executed
/// pattern equals frame * (ideal program). One n-mode map because CZ
/// conjugation makes per-mode records entangled.
class ByproductFrame {
   public:
    explicit ByproductFrame(SymplecticAffine affine) : affine_(std::move(affine)) {
    }
    static ByproductFrame empty(std::size_t n_modes) {
        return ByproductFrame(SymplecticAffine::identity(n_modes));
    }
    const SymplecticAffine &affine() const {
        return affine_;
    }
    std::size_t modes() const {
        return affine_.modes();
    }
    bool consumed() const {
        return consumed_;
    }

   private:
    friend GaussianState resolve_frame(const GaussianState &, ByproductFrame &);
    SymplecticAffine affine_;
    bool consumed_ = false;
};

/// Undoes the recorded byproducts so the state can be compared with the
/// ideal program output. A frame resolves once.
inline GaussianState resolve_frame(const GaussianState &state, ByproductFrame &frame) {
    if (frame.consumed_) throw InvalidArgument("byproduct frame already resolved");
    if (frame.modes() != state.modes()) throw InvalidArgument("frame/state mode-count mismatch");
    frame.consumed_ = true;
    return apply_affine(state, frame.affine_.inverse());
}

using OutcomeMap = std::map<int, double>;

/// Whether pinned values are logical outcomes or raw detector readings.
/// Replays pin raw readings so the conditioning sees the identical number.
enum class PinMode { Logical, Raw };

inline double outcome_for(const OutcomeMap &outcomes, int node) {
    auto it = outcomes.find(node);
    if (it == outcomes.end()) throw InvalidArgument("missing outcome for node " + std::to_string(node));
    return it->second;
}

/// What the cluster actually applies at one step, given its outcomes.
inline SymplecticAffine executed_action(const LoweredStep &step, const OutcomeMap &outcomes, std::size_t n_modes) {
    if (!step.gate.gaussian()) throw Unsupported("non-Gaussian step has no affine action");
    if (step.gate.kind == OpKind::CZ) {
        const auto a = step.gate.targets[0], b = step.gate.targets[1];
        return wire_byproduct(outcome_for(outcomes, step.measured[0])).embedded({a}, n_modes) *
               wire_byproduct(outcome_for(outcomes, step.measured[1])).embedded({b}, n_modes) *
               gates::cz(step.gate.param).embedded({a, b}, n_modes);
    }
    const double s = outcome_for(outcomes, step.measured[0]);
    return (wire_byproduct(s) * step.diagonal.action()).embedded(step.gate.targets, n_modes);
}

/// Rebuilds the frame from logged outcomes: frame_k = A_k * frame_{k-1} * G_k^-1.
inline ByproductFrame frame_from_outcomes(const MeasurementSchedule &schedule, const OutcomeMap &outcomes) {
    const std::size_t n = schedule.logical_modes;
    auto frame = SymplecticAffine::identity(n);
    for (const auto &step : schedule.steps) {
        frame = executed_action(step, outcomes, n) * frame * ideal_action(step.gate, n).inverse();
    }
    return ByproductFrame(frame);
}

struct MeasurementRecord {
    int node;
    double raw;
    double logical;
    double log_likelihood;
    double detector_angle;
};

struct RunResult {
    std::vector<MeasurementRecord> record;  // execution order
    OutcomeMap outcomes;                    // node -> logical outcome
    GaussianState output;                   // logical modes in order
    ByproductFrame frame;
};

/// Cluster modes still alive during execution, tagged by node id.
struct LiveRegister {
    std::optional<GaussianState> state;
    std::vector<int> nodes;

    std::size_t mode_of(int node) const {
        auto it = std::find(nodes.begin(), nodes.end(), node);
        if (it == nodes.end()) throw InvariantViolation("node " + std::to_string(node) + " is not live");
        return static_cast<std::size_t>(it - nodes.begin());
    }

    /// Measures one schedule entry. Nodes found in `pins` use the pinned
    /// outcome; the rest are sampled from `rng`.
    MeasurementRecord measure(const ScheduleEntry &entry, const OutcomeMap &pins, PinMode pin_mode, Rng *rng) {
        if (entry.basis.type != BasisType::Homodyne) {
            throw Unsupported("node " + std::to_string(entry.node) +
                              " needs a non-Gaussian measurement; use the Fock engine");
        }
        if (std::find(nodes.begin(), nodes.end(), entry.node) == nodes.end()) {
            throw InvariantViolation("node " + std::to_string(entry.node) + " measured twice");
        }
        const auto mode = mode_of(entry.node);
        std::optional<double> raw_pin;
        bool logical_pin = false;
        if (auto p = pins.find(entry.node); p != pins.end()) {
            logical_pin = pin_mode == PinMode::Logical;
            raw_pin = logical_pin ? entry.basis.raw(p->second) : p->second;
        }
        auto h = homodyne(*state, mode, entry.basis.detector_angle(), raw_pin, rng);
        const double logical = logical_pin ? pins.at(entry.node) : entry.basis.logical(h.outcome);
        nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(mode));
        state = std::move(h.state);
        return {entry.node, h.outcome, logical, h.log_likelihood, entry.basis.detector_angle()};
    }

    /// Marginal on `outputs`, which must be exactly the live nodes.
    GaussianState output(const std::vector<int> &outputs) const {
        ModeList order_out;
        for (int node : outputs) {
            if (std::find(nodes.begin(), nodes.end(), node) == nodes.end()) {
                throw InvariantViolation("output node " + std::to_string(node) + " was consumed");
            }
            order_out.push_back(mode_of(node));
        }
        if (nodes.size() != order_out.size()) throw InvariantViolation("unmeasured non-output nodes remain");
        return state->marginal(order_out);
    }
};

/// Executes a Gaussian schedule on a prepared cluster state.
///
/// `order` lists schedule entries in execution order (empty = as compiled).
inline RunResult run_schedule(const GaussianState &cluster, const MeasurementSchedule &schedule,
                              std::vector<std::size_t> order, const OutcomeMap &pins, Rng *rng,
                              PinMode pin_mode = PinMode::Logical) {
    if (cluster.modes() != schedule.node_ids.size()) {
        throw InvalidArgument("cluster state does not match the schedule's node count");
    }
    if (order.empty()) {
        order.resize(schedule.entries.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    }
    schedule.check_order(order);
    LiveRegister live{cluster, schedule.node_ids};
    std::vector<MeasurementRecord> record;
    OutcomeMap outcomes;
    for (auto k : order) {
        record.push_back(live.measure(schedule.entries[k], pins, pin_mode, rng));
        outcomes[record.back().node] = record.back().logical;
    }
    GaussianState output = live.output(schedule.output_nodes);
    return {std::move(record), outcomes, std::move(output), frame_from_outcomes(schedule, outcomes)};
}

}  // namespace cvc
