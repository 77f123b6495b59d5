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
#include <numeric>
#include <random>

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/gates.hpp"

using namespace cvc;

namespace {

ClusterGraph random_graph(std::mt19937_64 &gen, std::size_t n, double edge_prob, bool weighted) {
    std::uniform_real_distribution<double> omega(0.05, 1.0), coin(0.0, 1.0), weight(-2.0, 2.0);
    ClusterGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node(static_cast<int>(10 + 3 * i), omega(gen));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (coin(gen) < edge_prob) {
                double w = weighted ? weight(gen) : 1.0;
                if (w == 0.0) w = 1.0;
                g.add_edge(g.nodes()[i].id, g.nodes()[j].id, w);
            }
        }
    }
    return g;
}

}  // namespace

TEST(ClusterGraph, Validation) {
    ClusterGraph g;
    g.add_node(1, 0.5);
    g.add_node(2, 0.5);
    EXPECT_THROW(g.add_node(1, 0.5), InvalidArgument);
    EXPECT_THROW(g.add_node(3, 0.0), InvalidArgument);
    EXPECT_THROW(g.add_edge(1, 1), InvalidArgument);
    EXPECT_THROW(g.add_edge(1, 7), InvalidArgument);
    EXPECT_THROW(g.add_edge(1, 2, 0.0), InvalidArgument);
    EXPECT_THROW(build_cluster(ClusterGraph{}), InvalidArgument);
    EXPECT_NO_THROW(g.add_node(4, 0.0, true));
    EXPECT_THROW(build_cluster(g), InvalidArgument);
}

TEST(ClusterGraph, LinearChainNullifiers) {
    const auto g = ClusterGraph::linear_chain(5, 0.3);
    const auto report = nullifier_variances(build_cluster(g), g);
    ASSERT_EQ(report.variances.size(), 5u);
    for (double v : report.variances) EXPECT_NEAR(v, 0.045, 1e-12);
    EXPECT_EQ(g.degree(1), 1u);
    EXPECT_EQ(g.degree(3), 2u);
}

TEST(ClusterGraph, NullifierLawOnRandomWeightedGraphs) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = random_graph(gen, 1 + static_cast<std::size_t>(trial % 8), 0.5, trial % 2 == 1);
        const auto report = nullifier_variances(build_cluster(g), g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = g.nodes()[i].omega;
            ASSERT_NEAR(report.variances[i], w * w / 2.0, 1e-10);
        }
    }
}

TEST(ClusterGraph, LinkOrderDoesNotMatter) {
    std::mt19937_64 gen(7);
    const auto g = random_graph(gen, 6, 0.6, true);
    const auto base = build_cluster(g);
    std::vector<std::size_t> order(g.edges().size());
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < 10; ++k) {
        std::shuffle(order.begin(), order.end(), gen);
        // Re-run the links from the bare squeezed product.
        ClusterGraph bare;
        for (const auto &n : g.nodes()) bare.add_node(n.id, n.omega);
        const auto shuffled = apply_cluster_links(build_cluster(bare), g, order);
        EXPECT_LT((shuffled.cov() - base.cov()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ClusterGraph, InputNodesCarryTheInputState) {
    ClusterGraph g;
    g.add_node(1, 0.0, true);
    g.add_node(2, 0.4);
    g.add_edge(1, 2);
    const auto in = coherent(0.5, -0.3);
    const auto s = prepare_cluster(g, &in);
    EXPECT_NEAR(s.mean_q(0), 0.5, 1e-15);
    EXPECT_NEAR(s.mean_p(1), 0.5, 1e-15);  // p2 picks up q1
    EXPECT_EQ(g.input_nodes(), std::vector<int>{1});
    EXPECT_THROW(prepare_cluster(g, nullptr), InvalidArgument);
    const auto two = vacuum(2);
    EXPECT_THROW(prepare_cluster(g, &two), InvalidArgument);
}

TEST(ClusterGraph, AttachMatchesJointPreparation) {
    // Two chains joined by one cross link equal the union graph's cluster.
    auto left = ClusterGraph::linear_chain(2, 0.5);
    ClusterGraph right;
    right.add_node(3, 0.7);
    right.add_node(4, 0.2);
    right.add_edge(3, 4, -1.5);
    const auto joined = attach(build_cluster(left), build_cluster(right), {{1, 0, 0.8}});
    ClusterGraph all = left;
    for (const auto &n : right.nodes()) all.add_node(n.id, n.omega);
    for (const auto &e : right.edges()) all.add_edge(e.a, e.b, e.weight);
    all.add_edge(2, 3, 0.8);
    EXPECT_LT((joined.cov() - build_cluster(all).cov()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(attach(build_cluster(left), build_cluster(right), {{2, 0, 1.0}}), InvalidArgument);
}

TEST(ClusterGraph, AdjacencyIsCanonical) {
    ClusterGraph g;
    for (int id : {5, 2, 9}) g.add_node(id, 0.5);
    g.add_edge(9, 2);
    g.add_edge(5, 2);
    g.add_edge(2, 9, 0.5);
    const std::vector<std::pair<int, int>> expect{{2, 5}, {2, 9}};
    EXPECT_EQ(g.adjacency(), expect);
    EXPECT_EQ(g.degree(2), 3u);
}
