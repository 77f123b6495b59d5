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
#include <string>
#include <vector>

#include "cvcluster/errors.hpp"
#include "cvcluster/gates.hpp"
#include "cvcluster/gaussian_state.hpp"

namespace cvc {

struct ClusterNode {
    int id;
    double omega;
    // Input nodes carry an externally supplied state instead of a squeezed ancilla.
    bool input = false;
};

struct ClusterEdge {
    int a;
    int b;
    double weight = 1.0;
};

/// Weighted graph of squeezed modes; each edge is a CZ_g link. Mode i of a
/// built cluster state is nodes()[i].
class ClusterGraph {
   public:
    ClusterGraph() = default;

    /// Linear chain with ids 1..n, one CZ between consecutive nodes.
    static ClusterGraph linear_chain(std::size_t n, double omega) {
        ClusterGraph g;
        for (std::size_t i = 1; i <= n; ++i) g.add_node(static_cast<int>(i), omega);
        for (std::size_t i = 1; i < n; ++i) g.add_edge(static_cast<int>(i), static_cast<int>(i + 1));
        return g;
    }

    void add_node(int id, double omega, bool input = false) {
        if (index_.count(id)) throw InvalidArgument("duplicate node id " + std::to_string(id));
        if (!input && !(omega > 0.0 && std::isfinite(omega))) {
            throw InvalidArgument("node " + std::to_string(id) + " needs a positive squeezing width");
        }
        index_[id] = nodes_.size();
        nodes_.push_back({id, omega, input});
    }

    void add_edge(int a, int b, double weight = 1.0) {
        if (a == b) throw InvalidArgument("self-loop on node " + std::to_string(a));
        if (!index_.count(a) || !index_.count(b)) {
            throw InvalidArgument("edge references missing node (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ")");
        }
        if (!std::isfinite(weight) || weight == 0.0) {
            throw InvalidArgument("edge weight must be finite and nonzero");
        }
        edges_.push_back({a, b, weight});
    }

    const std::vector<ClusterNode> &nodes() const {
        return nodes_;
    }
    const std::vector<ClusterEdge> &edges() const {
        return edges_;
    }
    std::size_t size() const {
        return nodes_.size();
    }
    bool contains(int id) const {
        return index_.count(id) != 0;
    }
    std::size_t index_of(int id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw InvalidArgument("unknown node id " + std::to_string(id));
        return it->second;
    }

    /// (neighbor id, weight) pairs; parallel edges are reported separately.
    std::vector<std::pair<int, double>> neighbors(int id) const {
        std::vector<std::pair<int, double>> out;
        for (const auto &e : edges_) {
            if (e.a == id) out.emplace_back(e.b, e.weight);
            if (e.b == id) out.emplace_back(e.a, e.weight);
        }
        return out;
    }

    std::size_t degree(int id) const {
        return neighbors(id).size();
    }

    std::vector<int> input_nodes() const {
        std::vector<int> out;
        for (const auto &n : nodes_) {
            if (n.input) out.push_back(n.id);
        }
        return out;
    }

    /// Sorted, deduplicated adjacency as (min id, max id) pairs.
    std::vector<std::pair<int, int>> adjacency() const {
        std::vector<std::pair<int, int>> out;
        for (const auto &e : edges_) out.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

   private:
    std::vector<ClusterNode> nodes_;
    std::vector<ClusterEdge> edges_;
    std::map<int, std::size_t> index_;
};

/// Applies CZ_g for each edge, in the order given by `edge_order` (indices into graph.edges()).
inline GaussianState apply_cluster_links(GaussianState state, const ClusterGraph &graph,
                                         const std::vector<std::size_t> &edge_order) {
    for (auto k : edge_order) {
        const auto &e = graph.edges().at(k);
        state = apply_affine(state, gates::cz(e.weight), {graph.index_of(e.a), graph.index_of(e.b)});
    }
    return state;
}

/// Squeezed vacuum per ancilla node, `inputs` (one mode per input node, in
/// node order) on the input nodes, then a CZ per edge.
inline GaussianState prepare_cluster(const ClusterGraph &graph, const GaussianState *inputs,
                                     double omega_floor = kDefaultOmegaFloor) {
    if (graph.size() == 0) throw InvalidArgument("empty register: graph has no nodes");
    const auto input_ids = graph.input_nodes();
    if (!input_ids.empty() && (inputs == nullptr || inputs->modes() != input_ids.size())) {
        throw InvalidArgument("graph has " + std::to_string(input_ids.size()) +
                              " input nodes but the supplied input state does not match");
    }
    const std::size_t n = graph.size();
    Vec mean = Vec::Zero(static_cast<Eigen::Index>(2 * n));
    Mat cov = Mat::Zero(mean.size(), mean.size());
    std::vector<std::size_t> input_slots;
    for (std::size_t i = 0; i < n; ++i) {
        const auto &node = graph.nodes()[i];
        if (node.input) {
            input_slots.push_back(i);
            continue;
        }
        const auto sq = squeezed_vacuum_p(node.omega, omega_floor);
        const auto idx = quadrature_indices({i}, n);
        cov(idx, idx) = sq.cov();
    }
    if (!input_slots.empty()) {
        ModeList src(input_slots.size());
        for (std::size_t k = 0; k < src.size(); ++k) src[k] = k;
        const auto dst = quadrature_indices(ModeList(input_slots.begin(), input_slots.end()), n);
        const auto from = quadrature_indices(src, inputs->modes());
        mean(dst) = inputs->mean()(from);
        cov(dst, dst) = inputs->cov()(from, from);
    }
    std::vector<std::size_t> order(graph.edges().size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    return apply_cluster_links(GaussianState::trusted(mean, cov), graph, order);
}

/// Cluster state of a graph with no input nodes.
inline GaussianState build_cluster(const ClusterGraph &graph, double omega_floor = kDefaultOmegaFloor) {
    if (!graph.input_nodes().empty()) {
        throw InvalidArgument("graph has input nodes; use prepare_cluster with an input state");
    }
    return prepare_cluster(graph, nullptr, omega_floor);
}

struct NullifierReport {
    std::vector<int> node_ids;
    /// Var(p_i - sum_j g_ij q_j) per node.
    std::vector<double> variances;
};

inline NullifierReport nullifier_variances(const GaussianState &state, const ClusterGraph &graph) {
    const std::size_t n = graph.size();
    if (state.modes() != n) throw InvalidArgument("nullifier_variances: state/graph dimension mismatch");
    NullifierReport report;
    for (const auto &node : graph.nodes()) {
        Vec form = Vec::Zero(static_cast<Eigen::Index>(2 * n));
        form(p_index(graph.index_of(node.id), n)) = 1.0;
        for (const auto &[nb, w] : graph.neighbors(node.id)) {
            form(q_index(graph.index_of(nb), n)) -= w;
        }
        report.node_ids.push_back(node.id);
        report.variances.push_back(form.dot(state.cov() * form));
    }
    return report;
}

/// Link across two registers: mode `a` of the first, mode `b` of the second.
struct CrossLink {
    std::size_t a;
    std::size_t b;
    double weight = 1.0;
};

/// a (x) b followed by CZ per listed cross link (b's modes are offset by a.modes()).
inline GaussianState attach(const GaussianState &a, const GaussianState &b,
                            const std::vector<CrossLink> &links) {
    GaussianState joined = tensor(a, b);
    for (const auto &link : links) {
        if (link.a >= a.modes() || link.b >= b.modes()) {
            throw InvalidArgument("attach: edge references a missing mode");
        }
        joined = apply_affine(joined, gates::cz(link.weight), {link.a, a.modes() + link.b});
    }
    return joined;
}

}  // namespace cvc
