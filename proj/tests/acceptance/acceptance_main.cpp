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

// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "cvcluster.hpp"

using namespace cvc;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Outcome()> &body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r{false, ""};
    try {
        r = body();
    } catch (const std::exception &e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool ok = r.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s %2d %s: %s [%.2fs / %.0fs budget%s]\n", ok ? "PASS" : "FAIL", id, name, r.detail.c_str(), secs,
                budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double max_abs(const Mat &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

GateProgram random_program(Rng &rng, std::size_t modes, int measurements) {
    GateProgram p{modes, {}};
    int used = 0;
    while (used < measurements) {
        const auto m = static_cast<std::size_t>(rng.uniform(0, static_cast<double>(modes)));
        const int pick = static_cast<int>(rng.uniform(0, modes == 2 && used + 2 <= measurements ? 5 : 4));
        switch (pick) {
            case 0: p.ops.push_back(Instruction::f(m)); break;
            case 1: p.ops.push_back(Instruction::p(m, rng.normal(0, 1))); break;
            case 2: p.ops.push_back(Instruction::z(m, rng.normal(0, 1))); break;
            case 3: p.ops.push_back(Instruction::x(m, rng.normal(0, 1))); break;
            default: p.ops.push_back(Instruction::cz(0, 1, rng.uniform(0.3, 1.5))); ++used; break;
        }
        ++used;
    }
    return p;
}

GaussianState random_input(Rng &rng, std::size_t modes) {
    GaussianState s = apply_affine(coherent(rng.normal(0, 1), rng.normal(0, 1)), gates::shear(rng.normal(0, 0.5)));
    for (std::size_t m = 1; m < modes; ++m) {
        s = tensor(s, apply_affine(squeezed_vacuum_p(rng.uniform(0.5, 1.5)), gates::rotation(rng.uniform(0, 3))));
    }
    return s;
}

Outcome convention_lock() {
    const auto v = vacuum(3);
    double err = max_abs(v.cov() - 0.5 * Mat::Identity(6, 6));
    const auto fm = fock::moments(fock::vacuum(fock::default_cutoff(1)));
    err = std::max(err, std::abs(fm.cov(0, 0) - 0.5));
    err = std::max(err, std::abs(fm.cov(1, 1) - 0.5));
    return {err <= 1e-12, fmt("max |<x^2> - 1/2| = %.3g (Gaussian and Fock vacuum)", err)};
}

Outcome nullifier_law() {
    Rng rng(2024);
    double worst = 0.0;
    for (int g = 0; g < 50; ++g) {
        const int n = 2 + static_cast<int>(rng.uniform(0, 7));
        ClusterGraph graph;
        for (int i = 1; i <= n; ++i) graph.add_node(i, rng.uniform(0.05, 1.0));
        for (int a = 1; a <= n; ++a) {
            for (int b = a + 1; b <= n; ++b) {
                if (rng.uniform() < 0.4) graph.add_edge(a, b, rng.uniform() < 0.5 ? 1.0 : rng.uniform(-2.0, 2.0) + 2.5);
            }
        }
        const auto state = build_cluster(graph);
        const auto rep = nullifier_variances(state, graph);
        for (std::size_t i = 0; i < rep.variances.size(); ++i) {
            const double omega = graph.nodes()[i].omega;
            worst = std::max(worst, std::abs(rep.variances[i] - omega * omega / 2.0));
        }
    }
    return {worst <= 1e-10, fmt("50 graphs, max |Var - Omega^2/2| = %.3g", worst)};
}

Outcome teleport_soundness() {
    const std::vector<double> omegas{0.3, 0.1, 0.03, 0.01};
    std::vector<GaussianState> inputs;
    for (double q : {-1.4, 0.0, 1.4}) {
        for (double p : {-1.4, 0.0, 1.4}) inputs.push_back(coherent(q, p));
    }
    inputs.push_back(coherent(2.0, 0.0));
    inputs.push_back(coherent(0.0, -2.0));
    bool monotone = true;
    double worst_pinned = 1.0, worst_sampled = 1.0;
    for (const auto &d : {DiagonalGate::identity(), DiagonalGate::z(1.3), DiagonalGate::p(0.7)}) {
        for (const auto &in : inputs) {
            const auto target = apply_affine(in, d.action());
            double prev = -1.0;
            for (double omega : omegas) {
                const auto r = teleport_step(in, 0, omega, d, 0.0, nullptr);
                const double f = fidelity(apply_affine(r.state, r.byproduct.inverse()), target);
                monotone = monotone && f > prev;
                prev = f;
            }
            worst_pinned = std::min(worst_pinned, prev);
            Rng rng(17);
            for (int k = 0; k < 100; ++k) {
                const auto r = teleport_step(in, 0, 0.01, d, std::nullopt, &rng);
                worst_sampled =
                    std::min(worst_sampled, fidelity(apply_affine(r.state, r.byproduct.inverse()), target));
            }
        }
    }
    return {monotone && worst_pinned >= 0.999 && worst_sampled >= 0.999,
            fmt("min F at Omega=0.01: pinned %.6f, sampled %.6f; monotone=%g", worst_pinned, worst_sampled,
                monotone ? 1.0 : 0.0)};
}

Outcome cz_soundness() {
    double worst = 1.0;
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const auto in = tensor(coherent(rng.uniform(-2, 2), rng.uniform(-2, 2)),
                               coherent(rng.uniform(-2, 2), rng.uniform(-2, 2)));
        const auto r = cz_step(in, 0, 1, 0.01, 0.0, 0.0, nullptr);
        worst = std::min(worst, fidelity(apply_affine(r.state, r.byproduct.inverse()), apply_affine(in, gates::cz())));
        // Same pattern through the compiler and schedule runner.
        const auto compiled = compile(GateProgram{2, {Instruction::cz(0, 1)}}, {0.01, {}});
        const auto cluster = prepare_cluster(compiled.graph, &in);
        auto run = run_schedule(cluster, compiled.schedule, {}, {{1, 0.0}, {2, 0.0}}, nullptr);
        worst = std::min(worst, fidelity(resolve_frame(run.output, run.frame), apply_affine(in, gates::cz())));
    }
    return {worst >= 0.999, fmt("min frame-resolved F = %.6f over 20 input pairs", worst)};
}

Outcome shear_basis_law() {
    double worst = 0.0;
    for (double t : {-2.0, -0.5, 0.5, 1.0, 3.0}) {
        const auto compiled = compile(GateProgram{1, {Instruction::p(0, t)}});
        const auto &b = compiled.schedule.entries[0].basis;
        worst = std::max(worst, std::abs(b.theta - std::atan(-t)));
        worst = std::max(worst, std::abs(b.rescale - 1.0 / std::sqrt(1.0 + t * t)));
    }
    return {worst <= 1e-15, fmt("max deviation %.3g", worst)};
}

Outcome parallelism() {
    Rng rng(31);
    double worst = 0.0;
    int schedules = 0, orders = 0;
    for (int k = 0; k < 12; ++k) {
        const std::size_t modes = 1 + k % 2;
        const int count = 2 + k % 4;  // 2..5 homodynes
        const auto program = random_program(rng, modes, count);
        const auto compiled = compile(program, {rng.uniform(0.1, 0.6), {}});
        const auto in = random_input(rng, modes);
        const auto cluster = prepare_cluster(compiled.graph, &in);
        OutcomeMap pins;
        for (const auto &e : compiled.schedule.entries) pins[e.node] = rng.normal(0, 1);
        std::vector<std::size_t> order(compiled.schedule.entries.size());
        std::iota(order.begin(), order.end(), 0);
        const auto ref = run_schedule(cluster, compiled.schedule, order, pins, nullptr);
        do {
            const auto r = run_schedule(cluster, compiled.schedule, order, pins, nullptr);
            worst = std::max({worst, max_abs(r.output.mean() - ref.output.mean()),
                              max_abs(r.output.cov() - ref.output.cov())});
            ++orders;
        } while (std::next_permutation(order.begin(), order.end()));
        ++schedules;
    }

    // Sampled mode: forward vs reversed order, 10^4 trials each.
    const GateProgram program{2, {Instruction::p(0, 0.5), Instruction::cz(0, 1), Instruction::f(1), Instruction::z(0, 0.3)}};
    const auto compiled = compile(program, {0.3, {}});
    const auto in = tensor(coherent(0.5, -0.5), vacuum(1));
    const auto cluster = prepare_cluster(compiled.graph, &in);
    std::vector<std::size_t> fwd(compiled.schedule.entries.size());
    std::iota(fwd.begin(), fwd.end(), 0);
    std::vector<std::size_t> rev(fwd.rbegin(), fwd.rend());
    const int n = 10000;
    auto stats = [&](const std::vector<std::size_t> &order, std::uint64_t seed) {
        // Per logical outcome and per resolved output mean: sum and sum of squares.
        const std::size_t k = compiled.schedule.entries.size() + 4;
        std::vector<double> s(k, 0.0), ss(k, 0.0);
        for (int t = 0; t < n; ++t) {
            auto r = Rng::substream(seed, {static_cast<std::uint64_t>(t)});
            auto run = run_schedule(cluster, compiled.schedule, order, {}, &r);
            const auto out = resolve_frame(run.output, run.frame);
            std::vector<double> v;
            for (const auto &e : compiled.schedule.entries) v.push_back(run.outcomes.at(e.node));
            for (Eigen::Index i = 0; i < 4; ++i) v.push_back(out.mean()(i));
            for (std::size_t i = 0; i < k; ++i) {
                s[i] += v[i];
                ss[i] += v[i] * v[i];
            }
        }
        return std::pair{s, ss};
    };
    const auto [s1, ss1] = stats(fwd, 1);
    const auto [s2, ss2] = stats(rev, 2);
    double worst_z = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        const double m1 = s1[i] / n, m2 = s2[i] / n;
        const double v1 = ss1[i] / n - m1 * m1, v2 = ss2[i] / n - m2 * m2;
        const double se = std::sqrt((v1 + v2) / n);
        worst_z = std::max(worst_z, std::abs(m1 - m2) / se);
    }
    return {worst <= 1e-10 && worst_z < 5.0,
            fmt("%g schedules, %g orders, max pinned deviation %.3g; sampled max |z| = %.2f", schedules, orders, worst,
                worst_z)};
}

Outcome distortion_decomposition() {
    Rng rng(77);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t modes = 1 + k % 2;
        const int count = 1 + k % 6;
        const auto program = random_program(rng, modes, count);
        const auto compiled = compile(program, {rng.uniform(0.1, 1.0), {}});
        const auto in = random_input(rng, modes);
        const auto cluster = prepare_cluster(compiled.graph, &in);
        auto run = run_schedule(cluster, compiled.schedule, {}, {}, &rng);
        const auto predicted = decompose_distortion(compiled, run.outcomes).predict(in);
        worst = std::max({worst, max_abs(predicted.mean() - run.output.mean()),
                          max_abs(predicted.cov() - run.output.cov())});
    }
    return {worst <= 1e-8, fmt("200 random programs (1-6 measurements), max deviation %.3g", worst)};
}

Outcome oracle_agreement() {
    std::string detail;
    bool ok = true;
    for (std::size_t scale : {1u, 2u}) {
        const auto rep = run_validation(scale);
        double worst = 0.0;
        for (const auto &c : rep.cases) worst = std::max({worst, c.mean_error, c.cov_error, c.fidelity_error});
        ok = ok && rep.passed();
        if (!detail.empty()) detail += "; ";
        detail += fmt("cutoff x%g: %g cases, worst %.3g", static_cast<double>(scale),
                      static_cast<double>(rep.cases.size()), worst);
    }
    return {ok, detail};
}

Outcome nongaussian_equivalence() {
    const double u = 0.2;
    const std::size_t cutoff = fock::default_cutoff(1);
    const fock::NonlinearQuadratureBasis basis(cutoff, u);
    const auto direct = fock::binned_distribution(fock::vacuum(cutoff), 0, std::cref(basis), -5, 7);
    const auto gated = fock::binned_distribution(fock::cubic(fock::vacuum(cutoff), 0, u), 0,
                                                 fock::quadrature_basis(cutoff, std::numbers::pi / 2), -5, 7);
    double tv = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < direct.probabilities.size(); ++i) {
        tv += 0.5 * std::abs(direct.probabilities[i] - gated.probabilities[i]);
        mass += direct.probabilities[i];
    }
    return {tv <= 2e-3 && std::abs(mass - 1.0) < 1e-3,
            fmt("u = 0.2, %g bins of width 0.05, TV = %.3g, covered mass %.9f",
                static_cast<double>(direct.probabilities.size()), tv, mass)};
}

Outcome postselection() {
    PostselectConfig cfg;
    cfg.omega = 0.3;
    cfg.window = 0.5;
    cfg.trials = 10000;
    PostselectionExperiment exp(cfg);
    const auto s = exp.run(0.5);
    const double se = std::hypot(s.baseline.std_error, s.postselected.std_error);
    const double gain = s.postselected.mean - s.baseline.mean;
    const bool better = gain > 3.0 * se;

    const std::vector<double> windows{0.25, 0.5, 1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
    const auto scan = exp.acceptance_scan(windows, 1000);
    bool monotone = true;
    for (std::size_t k = 1; k < scan.size(); ++k) monotone = monotone && scan[k].second >= scan[k - 1].second;

    const auto wide = exp.run(std::numeric_limits<double>::infinity());
    const double se_inf = std::hypot(wide.baseline.std_error, wide.postselected.std_error);
    const bool coincide = std::abs(wide.postselected.mean - wide.baseline.mean) < 3.0 * se_inf;

    std::string d = fmt("A %.6f+-%.6f, B(w=0.5) %.6f+-%.6f", s.baseline.mean, s.baseline.std_error,
                        s.postselected.mean, s.postselected.std_error);
    d += fmt(", gain %.2f stderr (need > 3) ", gain / se) + (better ? "ok" : "NOT MET");
    d += fmt("; acceptance %.4f, monotone over %g windows ", s.acceptance_rate, static_cast<double>(windows.size())) +
         (monotone ? "ok" : "NOT MET");
    d += fmt("; w=inf B-A %.2f stderr ", (wide.postselected.mean - wide.baseline.mean) / se_inf) +
         (coincide ? "ok" : "NOT MET");
    return {better && monotone && coincide, d};
}

Outcome replay_determinism() {
    bool ok = true;
    std::size_t checked = 0;
    auto same = [&](const TrialRecord &a, const TrialRecord &b) {
        bool eq = a.outcomes.size() == b.outcomes.size() && a.fidelity == b.fidelity &&
                  a.output->mean() == b.output->mean() && a.output->cov() == b.output->cov();
        for (std::size_t k = 0; eq && k < a.outcomes.size(); ++k) {
            eq = a.outcomes[k].raw == b.outcomes[k].raw && a.outcomes[k].logical == b.outcomes[k].logical &&
                 a.outcomes[k].node == b.outcomes[k].node;
        }
        ++checked;
        return eq;
    };

    ProgramConfig pc;
    pc.program = GateProgram{2, {Instruction::f(0), Instruction::cz(0, 1, 0.7), Instruction::p(1, -1.1),
                                 Instruction::x(0, 0.2), Instruction::z(1, 0.4)}};
    pc.compile.omega = 0.2;
    pc.noise = NoiseBudget::symmetric(0.001);
    pc.trials = 50;
    pc.seed = 123;
    ProgramRunner runner(pc);
    runner.run([&](const TrialRecord &r) {
        // Round-trip through the JSONL form, as a logged record would be.
        const auto logged = io::trial_from_json(io::parse_json(io::to_json(r).dump()));
        ok = ok && same(r, runner.replay(logged)) && same(r, runner.trial(r.trial));
    });

    PostselectConfig cfg;
    cfg.trials = 30;
    cfg.seed = 9;
    cfg.noise = NoiseBudget::symmetric(0.002);
    PostselectionExperiment exp(cfg);
    exp.run(1.0, [&](const TrialRecord &r) {
        if (!r.accepted) return;
        const auto logged = io::trial_from_json(io::parse_json(io::to_json(r).dump()));
        ok = ok && same(r, exp.replay(logged));
    });
    return {ok, fmt("%g replays of logged records, all bit-identical=%g", static_cast<double>(checked),
                    ok ? 1.0 : 0.0)};
}

}  // namespace

int main() {
    criterion(1, "convention lock", 1, convention_lock);
    criterion(2, "nullifier law", 5, nullifier_law);
    criterion(3, "teleport soundness", 10, teleport_soundness);
    criterion(4, "CZ pattern soundness", 10, cz_soundness);
    criterion(5, "P(t) basis law", 1, shear_basis_law);
    criterion(6, "parallelism", 60, parallelism);
    criterion(7, "distortion decomposition", 30, distortion_decomposition);
    criterion(8, "oracle agreement", 120, oracle_agreement);
    criterion(9, "non-Gaussian equivalence", 60, nongaussian_equivalence);
    criterion(10, "post-selection experiment", 120, postselection);
    criterion(11, "replay determinism", 5, replay_determinism);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
