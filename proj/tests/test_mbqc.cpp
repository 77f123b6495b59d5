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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cvcluster/mbqc.hpp"
#include "cvcluster/phase_space.hpp"

using namespace cvc;

namespace {

OutcomeMap zero_pins(const MeasurementSchedule &s) {
    OutcomeMap pins;
    for (const auto &e : s.entries) pins[e.node] = 0.0;
    return pins;
}

double run_fidelity(const GateProgram &program, double omega, const GaussianState &input, Rng *rng,
                    const OutcomeMap *pins = nullptr) {
    const auto compiled = compile(program, {omega, {}});
    const auto cluster = prepare_cluster(compiled.graph, &input);
    auto run = run_schedule(cluster, compiled.schedule, {}, pins ? *pins : OutcomeMap{}, rng);
    const auto out = resolve_frame(run.output, run.frame);
    return fidelity(out, apply_affine(input, ideal_program(program)));
}

}  // namespace

TEST(MeasurementBasis, ShearBasisLaw) {
    for (double t : {-2.0, -0.5, 0.5, 1.0, 3.0}) {
        const auto b = DiagonalGate::p(t).basis();
        EXPECT_EQ(b.theta, std::atan(-t));
        EXPECT_EQ(b.rescale, 1.0 / std::sqrt(1.0 + t * t));
        // The detector reads (p + t q) / sqrt(1 + t^2).
        const Vec form = quadrature_form(0, b.detector_angle(), 1);
        EXPECT_NEAR(form(0), t * b.rescale, 2e-15);
        EXPECT_NEAR(form(1), b.rescale, 2e-15);
    }
}

TEST(MeasurementBasis, IdentityAndZBases) {
    const auto id = DiagonalGate::identity().basis();
    EXPECT_EQ(id.theta, 0.0);
    EXPECT_EQ(id.rescale, 1.0);
    EXPECT_DOUBLE_EQ(id.detector_angle(), std::numbers::pi / 2);
    const auto z = DiagonalGate::z(1.3).basis();
    EXPECT_EQ(z.offset, 1.3);
    EXPECT_EQ(z.logical(0.5), 1.8);
    EXPECT_EQ(z.raw(z.logical(0.5)), 0.5);
}

TEST(Teleport, OutputCarriesByproductAndGate) {
    // Omega -> 0 limit: resolved output approaches D|psi>.
    const auto in = coherent(1.2, -0.7);
    for (const auto &d : {DiagonalGate::identity(), DiagonalGate::z(1.3), DiagonalGate::p(0.7)}) {
        double prev = 0.0;
        for (double omega : {0.3, 0.1, 0.03, 0.01}) {
            const auto r = teleport_step(in, 0, omega, d, 0.0, nullptr);
            EXPECT_EQ(r.output_mode, 0u);
            const double f = fidelity(apply_affine(r.state, r.byproduct.inverse()), apply_affine(in, d.action()));
            EXPECT_GT(f, prev);
            prev = f;
        }
        EXPECT_GE(prev, 0.999);
    }
}

TEST(Teleport, SampledOutcomeFollowsLogicalMap) {
    const auto in = coherent(0.2, 0.4);
    Rng a(17), b(17);
    const auto d = DiagonalGate::p(-0.5);
    const auto sampled = teleport_step(in, 0, 0.2, d, std::nullopt, &a);
    EXPECT_NEAR(sampled.outcome, d.basis().logical(sampled.raw), 1e-15);
    const auto pinned = teleport_step(in, 0, 0.2, d, sampled.outcome, &b);
    EXPECT_LT((pinned.state.mean() - sampled.state.mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Teleport, CzPatternReproducesGate) {
    const auto in = tensor(coherent(0.5, -1.0), coherent(-1.5, 0.3));
    const auto ideal = apply_affine(in, gates::cz());
    const auto r = cz_step(in, 0, 1, 0.01, 0.0, 0.0, nullptr);
    EXPECT_EQ(r.output_a, 0u);
    EXPECT_EQ(r.output_b, 1u);
    EXPECT_GE(fidelity(apply_affine(r.state, r.byproduct.inverse()), ideal), 0.999);
    const auto g = cz_pattern_graph(0.1);
    const std::vector<std::pair<int, int>> adj{{1, 2}, {1, 3}, {2, 4}};
    EXPECT_EQ(g.adjacency(), adj);
}

TEST(Compile, WireShape) {
    GateProgram p{1, {Instruction::f(0), Instruction::p(0, 0.7), Instruction::z(0, 1.3)}};
    const auto c = compile(p, {0.2, {0.5}});
    EXPECT_EQ(c.graph.size(), 4u);
    EXPECT_EQ(c.schedule.input_nodes, std::vector<int>{1});
    EXPECT_EQ(c.schedule.output_nodes, std::vector<int>{4});
    ASSERT_EQ(c.schedule.entries.size(), 3u);
    EXPECT_EQ(c.schedule.entries[1].basis.theta, std::atan(-0.7));
    EXPECT_EQ(c.schedule.entries[2].basis.offset, 1.3);
    EXPECT_EQ(c.graph.nodes()[1].omega, 0.5);
    EXPECT_EQ(c.graph.nodes()[2].omega, 0.2);
    EXPECT_FALSE(c.schedule.adaptive());
}

TEST(Compile, TwoWireCzShape) {
    GateProgram p{2, {Instruction::cz(0, 1, 0.5)}};
    const auto c = compile(p, {0.1, {}});
    const std::vector<std::pair<int, int>> adj{{1, 2}, {1, 3}, {2, 4}};
    EXPECT_EQ(c.graph.adjacency(), adj);
    EXPECT_EQ(c.schedule.output_nodes, (std::vector<int>{3, 4}));
    EXPECT_EQ(c.graph.edges().back().weight, 0.5);
}

TEST(Compile, NonGaussianEntriesAreBarriers) {
    GateProgram p{1, {Instruction::f(0), Instruction::cubic(0, 0.2), Instruction::f(0), Instruction::f(0)}};
    const auto c = compile(p);
    EXPECT_TRUE(c.schedule.adaptive());
    EXPECT_FALSE(c.schedule.entries[1].order_free);
    EXPECT_EQ(c.schedule.entries[1].basis.type, BasisType::NonGaussian);
    EXPECT_NO_THROW(c.schedule.check_order({0, 1, 3, 2}));
    EXPECT_THROW(c.schedule.check_order({1, 0, 2, 3}), InvalidArgument);
    EXPECT_THROW(c.schedule.check_order({0, 2, 1, 3}), InvalidArgument);
    EXPECT_THROW(c.schedule.check_order({0, 1, 2, 2}), InvalidArgument);
    const auto in = vacuum(1);
    const auto cluster = prepare_cluster(c.graph, &in);
    Rng rng(1);
    EXPECT_THROW(run_schedule(cluster, c.schedule, {}, {}, &rng), Unsupported);
}

TEST(Compile, RejectsBadPrograms) {
    EXPECT_THROW(compile(GateProgram{1, {Instruction::cz(0, 0)}}), InvalidArgument);
    EXPECT_THROW(compile(GateProgram{1, {Instruction::f(1)}}), InvalidArgument);
    EXPECT_THROW(compile(GateProgram{0, {}}), InvalidArgument);
    EXPECT_THROW(compile(GateProgram{2, {Instruction::cz(0, 1, 0.0)}}), InvalidArgument);
    EXPECT_THROW(compile(GateProgram{1, {Instruction::p(0, NAN)}}), InvalidArgument);
}

TEST(Run, IdentityProgramIsTrivial) {
    const auto in = coherent(0.3, 0.3);
    Rng rng(1);
    EXPECT_NEAR(run_fidelity(GateProgram{1, {}}, 0.1, in, &rng), 1.0, 1e-14);
}

TEST(Run, ProgramsConvergeAsSqueezingGrows) {
    GateProgram p{2,
                  {Instruction::f(0), Instruction::p(1, 0.7), Instruction::cz(0, 1), Instruction::x(0, 0.5),
                   Instruction::z(1, -1.3), Instruction::f(1)}};
    const auto in = tensor(coherent(0.4, -0.2), coherent(1.0, 0.5));
    const auto pins = zero_pins(compile(p).schedule);
    double prev = 0.0;
    for (double omega : {0.3, 0.1, 0.03, 0.01}) {
        const double f = run_fidelity(p, omega, in, nullptr, &pins);
        EXPECT_GT(f, prev);
        prev = f;
    }
    EXPECT_GE(prev, 0.999);
}

TEST(Run, SampledProgramWithFrame) {
    GateProgram p{1, {Instruction::p(0, -1.0), Instruction::f(0), Instruction::z(0, 0.25)}};
    Rng rng(42);
    for (int k = 0; k < 20; ++k) EXPECT_GE(run_fidelity(p, 0.01, coherent(1.5, -1.0), &rng), 0.999);
}

TEST(Frame, ResolvesOnceAndRebuildsFromOutcomes) {
    GateProgram p{2, {Instruction::cz(0, 1), Instruction::f(0)}};
    const auto c = compile(p, {0.2, {}});
    const auto in = vacuum(2);
    const auto cluster = prepare_cluster(c.graph, &in);
    Rng rng(8);
    auto run = run_schedule(cluster, c.schedule, {}, {}, &rng);
    const auto rebuilt = frame_from_outcomes(c.schedule, run.outcomes);
    EXPECT_LT((rebuilt.affine().S - run.frame.affine().S).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((rebuilt.affine().d - run.frame.affine().d).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NO_THROW(resolve_frame(run.output, run.frame));
    EXPECT_TRUE(run.frame.consumed());
    EXPECT_THROW(resolve_frame(run.output, run.frame), InvalidArgument);
    auto empty = ByproductFrame::empty(1);
    EXPECT_THROW(resolve_frame(run.output, empty), InvalidArgument);
    EXPECT_THROW(frame_from_outcomes(c.schedule, {}), InvalidArgument);
}

TEST(Parallelism, AllOrdersGiveTheSameOutput) {
    GateProgram p{2, {Instruction::p(0, 0.3), Instruction::cz(0, 1, -0.7), Instruction::f(1)}};
    const auto c = compile(p, {0.15, {}});
    const auto in = tensor(coherent(0.1, 0.2), squeezed_vacuum_p(0.8));
    const auto cluster = prepare_cluster(c.graph, &in);
    OutcomeMap pins;
    double v = 0.3;
    for (const auto &e : c.schedule.entries) pins[e.node] = (v *= -1.7);
    std::vector<std::size_t> order(c.schedule.entries.size());
    std::iota(order.begin(), order.end(), 0);
    const auto ref = run_schedule(cluster, c.schedule, order, pins, nullptr);
    int count = 0;
    do {
        const auto r = run_schedule(cluster, c.schedule, order, pins, nullptr);
        ASSERT_LT((r.output.mean() - ref.output.mean()).cwiseAbs().maxCoeff(), 1e-10);
        ASSERT_LT((r.output.cov() - ref.output.cov()).cwiseAbs().maxCoeff(), 1e-10);
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    EXPECT_EQ(count, 24);
}

TEST(Run, LiveRegisterGuards) {
    const auto c = compile(GateProgram{1, {Instruction::f(0)}});
    const auto in = vacuum(1);
    const auto cluster = prepare_cluster(c.graph, &in);
    EXPECT_THROW(run_schedule(vacuum(3), c.schedule, {}, {}, nullptr), InvalidArgument);
    LiveRegister live{cluster, c.schedule.node_ids};
    live.measure(c.schedule.entries[0], {{1, 0.0}}, PinMode::Logical, nullptr);
    EXPECT_THROW(live.measure(c.schedule.entries[0], {{1, 0.0}}, PinMode::Logical, nullptr), InvariantViolation);
    EXPECT_THROW(live.output({1}), InvariantViolation);
}

TEST(Run, RawPinsReproduceSampledRun) {
    GateProgram p{1, {Instruction::p(0, 2.0), Instruction::z(0, 0.5)}};
    const auto c = compile(p, {0.3, {}});
    const auto in = coherent(0.5, 0.5);
    const auto cluster = prepare_cluster(c.graph, &in);
    Rng rng(77);
    const auto sampled = run_schedule(cluster, c.schedule, {}, {}, &rng);
    OutcomeMap raw;
    for (const auto &m : sampled.record) raw[m.node] = m.raw;
    const auto again = run_schedule(cluster, c.schedule, {}, raw, nullptr, PinMode::Raw);
    EXPECT_EQ(again.output.mean(), sampled.output.mean());
    EXPECT_EQ(again.output.cov(), sampled.output.cov());
    for (std::size_t k = 0; k < sampled.record.size(); ++k) {
        EXPECT_EQ(again.record[k].logical, sampled.record[k].logical);
    }
}
