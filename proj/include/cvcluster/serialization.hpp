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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/error_model.hpp"
#include "cvcluster/errors.hpp"
#include "cvcluster/experiment.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/mbqc.hpp"

// JSON documents (schema 1) for graphs, programs, schedules and run configs,
// plus the line/CSV/grid writers used by the command-line tool.

namespace cvc::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parses JSON text; syntax errors carry the line and column.
inline json parse_json(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string msg = e.what();
        if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
        throw ParseError("malformed JSON: " + msg, line, column);
    }
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

[[noreturn]] inline void fail(const std::string &where, const std::string &what) {
    throw ParseError(where + ": " + what);
}

inline const json &field(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.is_object()) fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, "missing field '" + key + "'");
    return *it;
}

inline double number(const json &v, const std::string &where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

inline long long integer(const json &v, const std::string &where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<long long>();
}

inline std::uint64_t unsigned_integer(const json &v, const std::string &where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto i = integer(v, where);
    if (i < 0) fail(where, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(i);
}

inline double number_or(const json &obj, const std::string &key, double fallback, const std::string &where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, where + "/" + key);
}

inline void check_schema(const json &doc, const std::string &where) {
    if (!doc.is_object()) fail(where, "expected an object");
    auto it = doc.find("schema");
    if (it == doc.end()) return;
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
        fail(where + "/schema", "unsupported schema version (expected 1)");
    }
}

template <class F>
auto wrap(const std::string &where, F &&body) -> decltype(body()) {
    try {
        return body();
    } catch (const ParseError &) {
        throw;
    } catch (const std::exception &e) {
        fail(where, e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graphs.

inline json to_json(const ClusterGraph &g) {
    json nodes = json::array(), edges = json::array();
    for (const auto &n : g.nodes()) {
        json node{{"id", n.id}, {"omega", n.omega}};
        if (n.input) node["input"] = true;
        nodes.push_back(node);
    }
    for (const auto &e : g.edges()) edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}});
    return {{"schema", kSchemaVersion}, {"nodes", nodes}, {"edges", edges}};
}

inline ClusterGraph graph_from_json(const json &doc, const std::string &where = "graph") {
    detail::check_schema(doc, where);
    ClusterGraph g;
    const auto &nodes = detail::field(doc, "nodes", where);
    if (!nodes.is_array()) detail::fail(where + "/nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string at = where + "/nodes/" + std::to_string(i);
        const auto id = detail::integer(detail::field(nodes[i], "id", at), at + "/id");
        const bool input = nodes[i].value("input", false);
        const double omega = input ? detail::number_or(nodes[i], "omega", 0.0, at)
                                   : detail::number(detail::field(nodes[i], "omega", at), at + "/omega");
        detail::wrap(at, [&] { g.add_node(static_cast<int>(id), omega, input); });
    }
    auto edges_it = doc.find("edges");
    if (edges_it != doc.end()) {
        if (!edges_it->is_array()) detail::fail(where + "/edges", "expected an array");
        for (std::size_t i = 0; i < edges_it->size(); ++i) {
            const auto &e = (*edges_it)[i];
            const std::string at = where + "/edges/" + std::to_string(i);
            const auto a = detail::integer(detail::field(e, "a", at), at + "/a");
            const auto b = detail::integer(detail::field(e, "b", at), at + "/b");
            const double w = detail::number_or(e, "weight", 1.0, at);
            detail::wrap(at, [&] { g.add_edge(static_cast<int>(a), static_cast<int>(b), w); });
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Programs.

inline std::string kind_name(const Instruction &op) {
    return op.kind == OpKind::NonGaussian ? to_string(op.nongaussian) : to_string(op.kind);
}

inline json to_json(const GateProgram &p) {
    json ops = json::array();
    for (const auto &op : p.ops) {
        json params = json::array();
        if (op.kind != OpKind::F && !(op.kind == OpKind::NonGaussian && op.nongaussian == NonGaussianKind::PhotonCount)) {
            params.push_back(op.param);
        }
        ops.push_back({{"kind", kind_name(op)}, {"params", params}, {"targets", op.targets}});
    }
    return {{"schema", kSchemaVersion}, {"modes", p.modes}, {"ops", ops}};
}

inline GateProgram program_from_json(const json &doc, const std::string &where = "program") {
    detail::check_schema(doc, where);
    GateProgram p;
    const auto modes = detail::integer(detail::field(doc, "modes", where), where + "/modes");
    if (modes < 1) detail::fail(where + "/modes", "must be at least 1");
    p.modes = static_cast<std::size_t>(modes);
    const auto &ops = detail::field(doc, "ops", where);
    if (!ops.is_array()) detail::fail(where + "/ops", "expected an array");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::string at = where + "/ops/" + std::to_string(i);
        const auto &kind_v = detail::field(ops[i], "kind", at);
        if (!kind_v.is_string()) detail::fail(at + "/kind", "expected a string");
        const auto kind = kind_v.get<std::string>();
        std::vector<double> params;
        if (auto it = ops[i].find("params"); it != ops[i].end()) {
            if (!it->is_array()) detail::fail(at + "/params", "expected an array");
            for (std::size_t k = 0; k < it->size(); ++k) {
                params.push_back(detail::number((*it)[k], at + "/params/" + std::to_string(k)));
            }
        }
        std::vector<std::size_t> targets;
        const auto &tv = detail::field(ops[i], "targets", at);
        if (!tv.is_array()) detail::fail(at + "/targets", "expected an array");
        for (std::size_t k = 0; k < tv.size(); ++k) {
            const auto t = detail::integer(tv[k], at + "/targets/" + std::to_string(k));
            if (t < 0) detail::fail(at + "/targets/" + std::to_string(k), "negative mode index");
            targets.push_back(static_cast<std::size_t>(t));
        }
        auto need = [&](std::size_t count) {
            if (params.size() != count) {
                detail::fail(at + "/params", "'" + kind + "' takes " + std::to_string(count) + " parameter(s)");
            }
        };
        Instruction op{OpKind::F, 0.0, targets};
        if (kind == "Z" || kind == "X" || kind == "P") {
            need(1);
            op.kind = kind == "Z" ? OpKind::Z : kind == "X" ? OpKind::X : OpKind::P;
            op.param = params[0];
        } else if (kind == "F") {
            need(0);
        } else if (kind == "CZ") {
            if (params.size() > 1) detail::fail(at + "/params", "'CZ' takes at most one parameter");
            op.kind = OpKind::CZ;
            op.param = params.empty() ? 1.0 : params[0];
        } else if (kind == "cubic") {
            need(1);
            op.kind = OpKind::NonGaussian;
            op.nongaussian = NonGaussianKind::Cubic;
            op.param = params[0];
        } else if (kind == "photon_count") {
            need(0);
            op.kind = OpKind::NonGaussian;
            op.nongaussian = NonGaussianKind::PhotonCount;
        } else {
            detail::fail(at + "/kind", "unknown instruction '" + kind + "'");
        }
        p.ops.push_back(op);
    }
    detail::wrap(where, [&] { p.validate(); });
    return p;
}

// ---------------------------------------------------------------------------
// Schedules (emitted only).

inline json to_json(const MeasurementBasis &b) {
    if (b.type == BasisType::Homodyne) {
        return {{"type", "homodyne"}, {"theta", b.theta}, {"rescale", b.rescale}, {"offset", b.offset}};
    }
    return {{"type", to_string(b.nongaussian)}, {"param", b.nongaussian_param}};
}

inline json to_json(const MeasurementSchedule &s) {
    json entries = json::array();
    for (const auto &e : s.entries) {
        entries.push_back({{"node", e.node}, {"basis", to_json(e.basis)}, {"order_free", e.order_free}, {"step", e.step}});
    }
    return {{"schema", kSchemaVersion},
            {"logical_modes", s.logical_modes},
            {"input_nodes", s.input_nodes},
            {"output_nodes", s.output_nodes},
            {"entries", entries}};
}

// ---------------------------------------------------------------------------
// States and records.

inline json to_json(const GaussianState &s) {
    json mean = json::array(), cov = json::array();
    for (Eigen::Index i = 0; i < s.mean().size(); ++i) mean.push_back(s.mean()(i));
    for (Eigen::Index i = 0; i < s.cov().rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < s.cov().cols(); ++j) row.push_back(s.cov()(i, j));
        cov.push_back(row);
    }
    return {{"mean", mean}, {"cov", cov}};
}

inline GaussianState state_from_json(const json &doc, const std::string &where) {
    const auto &mean_v = detail::field(doc, "mean", where);
    const auto &cov_v = detail::field(doc, "cov", where);
    if (!mean_v.is_array() || !cov_v.is_array()) detail::fail(where, "mean and cov must be arrays");
    const auto dim = static_cast<Eigen::Index>(mean_v.size());
    Vec mean(dim);
    Mat cov(dim, dim);
    if (static_cast<Eigen::Index>(cov_v.size()) != dim) detail::fail(where + "/cov", "dimension mismatch");
    for (Eigen::Index i = 0; i < dim; ++i) {
        mean(i) = detail::number(mean_v[static_cast<std::size_t>(i)], where + "/mean");
        const auto &row = cov_v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
            detail::fail(where + "/cov", "dimension mismatch");
        }
        for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = detail::number(row[static_cast<std::size_t>(j)], where + "/cov");
    }
    return detail::wrap(where, [&] { return GaussianState(mean, cov); });
}

inline json to_json(const MeasurementRecord &m) {
    return {{"node", m.node},
            {"raw", m.raw},
            {"logical", m.logical},
            {"log_likelihood", m.log_likelihood},
            {"detector_angle", m.detector_angle}};
}

inline json to_json(const TrialRecord &r) {
    json outcomes = json::array();
    for (const auto &m : r.outcomes) outcomes.push_back(to_json(m));
    json j{{"trial", r.trial},       {"seed", r.seed},         {"strategy", r.strategy},
           {"attempts", r.attempts}, {"accepted", r.accepted}, {"outcomes", outcomes}};
    j["output"] = r.output ? to_json(*r.output) : json(nullptr);
    j["fidelity"] = std::isnan(r.fidelity) ? json(nullptr) : json(r.fidelity);
    return j;
}

inline TrialRecord trial_from_json(const json &doc, const std::string &where = "record") {
    TrialRecord r;
    r.trial = detail::unsigned_integer(detail::field(doc, "trial", where), where + "/trial");
    r.seed = detail::unsigned_integer(detail::field(doc, "seed", where), where + "/seed");
    r.strategy = detail::field(doc, "strategy", where).get<std::string>();
    r.attempts = detail::unsigned_integer(detail::field(doc, "attempts", where), where + "/attempts");
    r.accepted = detail::field(doc, "accepted", where).get<bool>();
    for (const auto &m : detail::field(doc, "outcomes", where)) {
        r.outcomes.push_back({static_cast<int>(detail::integer(detail::field(m, "node", where), where)),
                              detail::number(detail::field(m, "raw", where), where),
                              detail::number(detail::field(m, "logical", where), where),
                              detail::number(detail::field(m, "log_likelihood", where), where),
                              detail::number(detail::field(m, "detector_angle", where), where)});
    }
    if (auto it = doc.find("output"); it != doc.end() && !it->is_null()) r.output = state_from_json(*it, where + "/output");
    if (auto it = doc.find("fidelity"); it != doc.end() && !it->is_null()) r.fidelity = detail::number(*it, where);
    return r;
}

// ---------------------------------------------------------------------------
// Run configuration.

/// Everything a CLI run needs, parsed from one JSON document.
struct RunConfig {
    json document;  // canonical form, hashed into output headers
    std::optional<GateProgram> program;
    std::optional<ClusterGraph> graph;
    std::optional<double> omega;
    std::vector<double> omega_profile;
    std::vector<double> omegas;  // sweep grid
    NoiseBudget noise;
    std::optional<std::size_t> trials;
    std::uint64_t seed = 1;
    double window = 0.5;
    std::vector<double> windows;  // acceptance scan
    std::size_t max_attempts = 10000;
    std::optional<GaussianState> input;
    OutcomeMap pins;
    std::string program_id = "program";
    /// Sweeps sample outcomes instead of pinning them to 0.
    bool sampled = false;
};

inline GaussianState input_from_json(const json &doc, const std::string &where) {
    if (doc.is_array()) {
        if (doc.empty()) detail::fail(where, "empty input list");
        GaussianState s = input_from_json(doc[0], where + "/0");
        for (std::size_t i = 1; i < doc.size(); ++i) s = tensor(s, input_from_json(doc[i], where + "/" + std::to_string(i)));
        return s;
    }
    if (doc.contains("mean")) return state_from_json(doc, where);
    const auto &kind_v = detail::field(doc, "kind", where);
    if (!kind_v.is_string()) detail::fail(where + "/kind", "expected a string");
    const auto kind = kind_v.get<std::string>();
    return detail::wrap(where, [&]() -> GaussianState {
        if (kind == "vacuum") return vacuum(1);
        if (kind == "coherent") {
            return coherent(detail::number_or(doc, "q", 0.0, where), detail::number_or(doc, "p", 0.0, where));
        }
        if (kind == "squeezed") return squeezed_vacuum_p(detail::number(detail::field(doc, "omega", where), where));
        if (kind == "thermal") return thermal(detail::number(detail::field(doc, "variance", where), where));
        detail::fail(where + "/kind", "unknown input kind '" + kind + "'");
    });
}

inline OutcomeMap parse_pins(const std::string &text) {
    OutcomeMap pins;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("pin '" + item + "' is not node=value");
        try {
            std::size_t used = 0;
            const int node = std::stoi(item.substr(0, eq), &used);
            if (used != eq) throw std::invalid_argument("node");
            const std::string value_text = item.substr(eq + 1);
            const double value = std::stod(value_text, &used);
            if (used != value_text.size()) throw std::invalid_argument("value");
            pins[node] = value;
        } catch (const std::logic_error &) {
            throw ParseError("pin '" + item + "' is not node=value");
        }
    }
    return pins;
}

/// Parses a config document; relative program/graph paths resolve against `base`.
inline RunConfig config_from_json(json doc, const std::filesystem::path &base = {}) {
    const std::string where = "config";
    detail::check_schema(doc, where);
    RunConfig c;
    auto load_ref = [&](const char *inline_key, const char *path_key) -> std::optional<json> {
        if (auto it = doc.find(inline_key); it != doc.end()) return *it;
        if (auto it = doc.find(path_key); it != doc.end()) {
            if (!it->is_string()) detail::fail(where + "/" + path_key, "expected a path string");
            auto path = std::filesystem::path(it->get<std::string>());
            if (path.is_relative()) path = base / path;
            json loaded = parse_json(read_file(path));
            doc[inline_key] = loaded;  // hash what was actually run
            doc.erase(path_key);
            return loaded;
        }
        return std::nullopt;
    };
    if (auto p = load_ref("program", "program_path")) c.program = program_from_json(*p);
    if (auto g = load_ref("graph", "graph_path")) c.graph = graph_from_json(*g);
    if (auto it = doc.find("omega"); it != doc.end()) {
        c.omega = detail::number(*it, where + "/omega");
        if (!(*c.omega > 0.0)) detail::fail(where + "/omega", "must be positive");
    }
    auto numbers = [&](const char *key) {
        std::vector<double> out;
        if (auto it = doc.find(key); it != doc.end()) {
            if (!it->is_array()) detail::fail(where + "/" + key, "expected an array");
            for (std::size_t i = 0; i < it->size(); ++i) {
                out.push_back(detail::number((*it)[i], where + "/" + key + "/" + std::to_string(i)));
            }
        }
        return out;
    };
    c.omega_profile = numbers("omega_profile");
    c.omegas = numbers("omegas");
    c.windows = numbers("windows");
    if (auto it = doc.find("noise"); it != doc.end()) {
        c.noise.per_link_q = detail::number_or(*it, "per_link_q", 0.0, where + "/noise");
        c.noise.per_link_p = detail::number_or(*it, "per_link_p", 0.0, where + "/noise");
        c.noise.thermal_excess = detail::number_or(*it, "thermal_excess", 0.0, where + "/noise");
        detail::wrap(where + "/noise", [&] { c.noise.validate(); });
    }
    if (auto it = doc.find("trials"); it != doc.end()) {
        c.trials = detail::unsigned_integer(*it, where + "/trials");
        if (*c.trials < 1) detail::fail(where + "/trials", "must be at least 1");
    }
    if (auto it = doc.find("seed"); it != doc.end()) c.seed = detail::unsigned_integer(*it, where + "/seed");
    c.window = detail::number_or(doc, "window", c.window, where);
    if (!(c.window >= 0.0)) detail::fail(where + "/window", "must be nonnegative");
    if (auto it = doc.find("max_attempts"); it != doc.end()) {
        c.max_attempts = detail::unsigned_integer(*it, where + "/max_attempts");
    }
    if (auto it = doc.find("input"); it != doc.end()) c.input = input_from_json(*it, where + "/input");
    if (auto it = doc.find("pins"); it != doc.end()) {
        if (!it->is_object()) detail::fail(where + "/pins", "expected an object of node: value");
        for (const auto &[k, v] : it->items()) {
            try {
                c.pins[std::stoi(k)] = detail::number(v, where + "/pins/" + k);
            } catch (const std::logic_error &) {
                detail::fail(where + "/pins/" + k, "node id must be an integer");
            }
        }
    }
    if (auto it = doc.find("program_id"); it != doc.end()) {
        if (!it->is_string()) detail::fail(where + "/program_id", "expected a string");
        c.program_id = it->get<std::string>();
    }
    c.sampled = doc.value("sampled", false);
    c.document = std::move(doc);
    return c;
}

inline RunConfig load_config(const std::filesystem::path &path) {
    return config_from_json(parse_json(read_file(path)), path.parent_path());
}

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON text, as 16 hex digits.
inline std::string config_hash(const json &doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

// ---------------------------------------------------------------------------
// Writers. Every file opens with the config hash and seed.

struct OutputHeader {
    std::string config_hash;
    std::uint64_t seed;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class JsonLinesWriter {
   public:
    JsonLinesWriter(std::ostream &out, const OutputHeader &h, const std::string &kind) : out_(out) {
        out_ << json{{"header", {{"config_hash", h.config_hash}, {"seed", h.seed}, {"kind", kind}}}}.dump() << '\n';
    }
    void write(const json &line) {
        out_ << line.dump() << '\n';
    }

   private:
    std::ostream &out_;
};

class CsvWriter {
   public:
    CsvWriter(std::ostream &out, const OutputHeader &h, const std::vector<std::string> &columns) : out_(out) {
        out_ << "# config_hash=" << h.config_hash << " seed=" << h.seed << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }
    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

   private:
    std::ostream &out_;
};

inline void write_sweep_csv(std::ostream &out, const OutputHeader &h, const std::vector<SweepRow> &rows) {
    CsvWriter w(out, h, {"omega", "program_id", "fidelity_mean", "fidelity_stderr", "trials"});
    for (const auto &r : rows) {
        w.row({format_double(r.omega), r.program_id, format_double(r.fidelity_mean), format_double(r.fidelity_stderr),
               std::to_string(r.trials)});
    }
}

/// Dense text grid: one row per q value, columns over p.
inline void write_wigner_grid(std::ostream &out, const OutputHeader &h, const WignerGrid &g) {
    out << "# config_hash=" << h.config_hash << " seed=" << h.seed << " lo=" << format_double(g.lo)
        << " hi=" << format_double(g.hi) << " points=" << g.points << " rows=q cols=p\n";
    for (std::size_t i = 0; i < g.points; ++i) {
        for (std::size_t j = 0; j < g.points; ++j) {
            out << (j ? " " : "") << format_double(g.values[i * g.points + j]);
        }
        out << '\n';
    }
}

}  // namespace cvc::io
