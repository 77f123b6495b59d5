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

// Command-line driver: run, postselect, sweep, validate.
//
// Exit codes: 0 success, 2 bad config or arguments, 3 invariant violation.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cvcluster.hpp"

namespace fs = std::filesystem;
using cvc::io::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> window;
    std::optional<double> omega;
    std::string out;
    std::string pins;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--trials", f.trials, "number of trials")->check(CLI::PositiveNumber);
    cmd->add_option("--window", f.window, "post-selection half-width w")->check(CLI::NonNegativeNumber);
    cmd->add_option("--omega", f.omega, "ancilla squeezing width")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--pin", f.pins, "pinned outcomes node=value,...");
}

// Loads the config and folds command-line overrides into it, so the hash
// in every output header covers what actually ran.
cvc::io::RunConfig resolve_config(const CommonFlags &f) {
    json doc = json::object();
    fs::path base;
    if (!f.config.empty()) {
        doc = cvc::io::parse_json(cvc::io::read_file(f.config));
        base = fs::path(f.config).parent_path();
    }
    if (!doc.is_object()) throw cvc::ParseError("config: expected a JSON object");
    if (f.seed) doc["seed"] = *f.seed;
    if (f.trials) doc["trials"] = *f.trials;
    if (f.window) doc["window"] = *f.window;
    if (f.omega) doc["omega"] = *f.omega;
    if (!f.pins.empty()) {
        json pins = json::object();
        for (const auto &[node, value] : cvc::io::parse_pins(f.pins)) pins[std::to_string(node)] = value;
        doc["pins"] = pins;
    }
    return cvc::io::config_from_json(doc, base);
}

std::ofstream open_output(const std::string &dir, const std::string &name) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw cvc::ParseError("cannot write '" + (fs::path(dir) / name).string() + "'");
    return out;
}

std::string fmt(double v) {
    return cvc::io::format_double(v);
}

int cmd_run(const CommonFlags &f) {
    const auto cfg = resolve_config(f);
    const cvc::io::OutputHeader header{cvc::io::config_hash(cfg.document), cfg.seed};

    if (!cfg.program) {
        if (!cfg.graph) throw cvc::ParseError("config: 'run' needs a program or a graph");
        // Graph only: build the cluster and check its nullifiers.
        const auto &g = *cfg.graph;
        if (!g.input_nodes().empty()) throw cvc::ParseError("config: a bare graph run cannot have input nodes");
        const auto state = cvc::build_cluster(g);
        const auto report = cvc::nullifier_variances(state, g);
        std::ofstream file;
        if (!f.out.empty()) file = open_output(f.out, "nullifiers.csv");
        std::ostream &out = f.out.empty() ? std::cout : file;
        cvc::io::CsvWriter csv(out, header, {"node", "omega", "nullifier_variance", "expected"});
        bool ok = true;
        for (std::size_t i = 0; i < report.node_ids.size(); ++i) {
            const double omega = g.nodes()[i].omega;
            const double expected = omega * omega / 2.0;
            ok = ok && std::abs(report.variances[i] - expected) <= 1e-10 * std::max(1.0, expected);
            csv.row({std::to_string(report.node_ids[i]), fmt(omega), fmt(report.variances[i]), fmt(expected)});
        }
        if (!ok) {
            std::cerr << "error: nullifier variances deviate from omega^2/2\n";
            return kExitInvariant;
        }
        return 0;
    }

    cvc::ProgramConfig pc;
    pc.program = *cfg.program;
    pc.compile.omega = cfg.omega.value_or(0.1);
    pc.compile.ancilla_omegas = cfg.omega_profile;
    pc.noise = cfg.noise;
    pc.trials = cfg.trials.value_or(1);
    pc.seed = cfg.seed;
    pc.input = cfg.input;
    pc.pins = cfg.pins;
    cvc::ProgramRunner runner(pc);

    std::ofstream records_file;
    if (!f.out.empty()) {
        records_file = open_output(f.out, "trials.jsonl");
        auto sched = open_output(f.out, "schedule.json");
        json doc = cvc::io::to_json(runner.compiled().schedule);
        doc["config_hash"] = header.config_hash;
        doc["seed"] = header.seed;
        doc["graph"] = cvc::io::to_json(runner.compiled().graph);
        sched << doc.dump(2) << '\n';
    }
    std::ostream &rec_out = f.out.empty() ? std::cout : records_file;
    cvc::io::JsonLinesWriter lines(rec_out, header, "trial_records");
    std::vector<double> fids;
    runner.run([&](const cvc::TrialRecord &r) {
        lines.write(cvc::io::to_json(r));
        fids.push_back(r.fidelity);
    });
    const auto stats = cvc::FidelityStats::of(fids);
    if (!f.out.empty()) {
        auto summary = open_output(f.out, "summary.csv");
        cvc::io::CsvWriter csv(summary, header, {"program_id", "omega", "fidelity_mean", "fidelity_stderr", "trials"});
        csv.row({cfg.program_id, fmt(pc.compile.omega), fmt(stats.mean), fmt(stats.std_error),
                 std::to_string(stats.count)});
    }
    std::cerr << "fidelity " << stats.mean << " +- " << stats.std_error << " over " << stats.count << " trials\n";
    return 0;
}

int cmd_postselect(const CommonFlags &f) {
    const auto cfg = resolve_config(f);
    const cvc::io::OutputHeader header{cvc::io::config_hash(cfg.document), cfg.seed};
    cvc::PostselectConfig pc;
    if (cfg.program) pc.program = *cfg.program;
    pc.omega = cfg.omega.value_or(0.3);
    pc.omega_profile = cfg.omega_profile;
    pc.noise = cfg.noise;
    pc.trials = cfg.trials.value_or(10000);
    pc.seed = cfg.seed;
    pc.window = cfg.window;
    pc.max_attempts = cfg.max_attempts;
    if (cfg.input) pc.input = *cfg.input;
    cvc::PostselectionExperiment exp(pc);

    std::ofstream records_file;
    std::optional<cvc::io::JsonLinesWriter> lines;
    if (!f.out.empty()) {
        records_file = open_output(f.out, "trials.jsonl");
        lines.emplace(records_file, header, "trial_records");
    }
    std::vector<cvc::GaussianState> out_a, out_b;
    const auto summary = exp.run(pc.window, [&](const cvc::TrialRecord &r) {
        if (lines) lines->write(cvc::io::to_json(r));
        if (r.output) (r.strategy == "A" ? out_a : out_b).push_back(*r.output);
    });

    std::vector<double> windows = cfg.windows;
    if (windows.empty()) windows = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
    const auto scan = exp.acceptance_scan(windows, std::min<std::size_t>(pc.trials, 1000));
    bool monotone = true;
    for (std::size_t i = 1; i < scan.size(); ++i) {
        if (scan[i].first >= scan[i - 1].first && scan[i].second < scan[i - 1].second) monotone = false;
    }

    std::ofstream summary_file, scan_file;
    if (!f.out.empty()) {
        summary_file = open_output(f.out, "summary.csv");
        scan_file = open_output(f.out, "acceptance.csv");
    }
    std::ostream &sout = f.out.empty() ? std::cout : summary_file;
    cvc::io::CsvWriter csv(sout, header,
                           {"strategy", "omega", "window", "fidelity_mean", "fidelity_stderr", "trials",
                            "attempts", "acceptance_rate", "zero_accepted"});
    csv.row({"A", fmt(pc.omega), fmt(pc.window), fmt(summary.baseline.mean), fmt(summary.baseline.std_error),
             std::to_string(summary.baseline.count), std::to_string(summary.baseline.count), "1", "false"});
    csv.row({"B", fmt(pc.omega), fmt(pc.window), fmt(summary.postselected.mean),
             fmt(summary.postselected.std_error), std::to_string(summary.postselected.count),
             std::to_string(summary.attempts), fmt(summary.acceptance_rate),
             summary.zero_accepted ? "true" : "false"});
    std::ostream &aout = f.out.empty() ? std::cout : scan_file;
    cvc::io::CsvWriter acsv(aout, header, {"window", "acceptance_rate"});
    for (const auto &[w, rate] : scan) acsv.row({fmt(w), fmt(rate)});
    aout << "# monotone=" << (monotone ? "true" : "false") << '\n';

    if (!f.out.empty()) {
        if (out_a.size() >= 2) {
            auto wf = open_output(f.out, "wigner_baseline.txt");
            cvc::io::write_wigner_grid(wf, header, cvc::tomography_summary(out_a).wigner);
        }
        if (out_b.size() >= 2) {
            auto wf = open_output(f.out, "wigner_postselected.txt");
            cvc::io::write_wigner_grid(wf, header, cvc::tomography_summary(out_b).wigner);
        }
    }
    if (summary.zero_accepted) std::cerr << "warning: no mini-cluster accepted at window " << pc.window << '\n';
    if (!monotone) {
        std::cerr << "error: acceptance rate is not monotone in the window\n";
        return kExitInvariant;
    }
    return 0;
}

int cmd_sweep(const CommonFlags &f) {
    const auto cfg = resolve_config(f);
    if (!cfg.program) throw cvc::ParseError("config: 'sweep' needs a program");
    const cvc::io::OutputHeader header{cvc::io::config_hash(cfg.document), cfg.seed};
    std::vector<double> omegas = cfg.omegas;
    if (omegas.empty()) omegas = cfg.omega ? std::vector<double>{*cfg.omega} : std::vector<double>{0.3, 0.1, 0.03, 0.01};
    cvc::SweepOptions opt;
    opt.trials = cfg.trials.value_or(1);
    opt.seed = cfg.seed;
    opt.pinned_zero = !cfg.sampled;
    opt.noise = cfg.noise;
    opt.program_id = cfg.program_id;
    const auto input = cfg.input ? *cfg.input : cvc::vacuum(cfg.program->modes);
    const auto rows = cvc::fidelity_vs_squeezing(*cfg.program, omegas, {input}, opt);
    std::ofstream file;
    if (!f.out.empty()) file = open_output(f.out, "sweep.csv");
    cvc::io::write_sweep_csv(f.out.empty() ? std::cout : file, header, rows);
    return 0;
}

int cmd_validate(const CommonFlags &f) {
    const auto cfg = resolve_config(f);
    const cvc::io::OutputHeader header{cvc::io::config_hash(cfg.document), cfg.seed};
    std::ofstream file;
    if (!f.out.empty()) file = open_output(f.out, "validation.csv");
    std::ostream &out = f.out.empty() ? std::cout : file;
    cvc::io::CsvWriter csv(out, header,
                           {"case", "cutoff", "mean_error", "cov_error", "fidelity_error", "leakage", "passed"});
    bool ok = true;
    for (std::size_t scale : {1, 2}) {
        const auto report = cvc::run_validation(scale);
        for (const auto &c : report.cases) {
            csv.row({c.name, std::to_string(c.cutoff), fmt(c.mean_error), fmt(c.cov_error), fmt(c.fidelity_error),
                     fmt(c.leakage), c.passed() ? "true" : "false"});
        }
        ok = ok && report.passed();
    }
    if (!ok) {
        std::cerr << "error: engines disagree beyond tolerance\n";
        return kExitInvariant;
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Continuous-variable cluster-state simulator"};
    app.require_subcommand(1);
    CommonFlags flags;
    auto *run = app.add_subcommand("run", "execute a gate program (or check a bare graph)");
    auto *post = app.add_subcommand("postselect", "five-node mini-cluster post-selection experiment");
    auto *sweep = app.add_subcommand("sweep", "fidelity versus squeezing");
    auto *validate = app.add_subcommand("validate", "Gaussian engine versus number-basis oracle");
    for (auto *cmd : {run, post, sweep, validate}) add_common(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (post->parsed()) return cmd_postselect(flags);
        if (sweep->parsed()) return cmd_sweep(flags);
        return cmd_validate(flags);
    } catch (const cvc::ParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cvc::InvalidArgument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cvc::Unsupported &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cvc::InvariantViolation &e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const cvc::IllConditioned &e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    }
}
