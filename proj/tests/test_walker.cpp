#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "in2v/graph.hpp"
#include "in2v/walk.hpp"
#include "test_util.hpp"

using namespace in2v;

TEST_CASE("forced transitions on a 2-node path") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    WalkParams params;
    params.walk_length = 3;
    Rng rng(1);
    auto walk = sample_walk(g, 0, params, rng);
    REQUIRE(walk.size() == 4);
    CHECK(walk == std::vector<NodeId>{0, 1, 0, 1});
}

TEST_CASE("isolated start yields a single-node walk") {
    Graph g = Graph::from_edges(3, {{0, 1}});
    WalkParams params;
    Rng rng(2);
    CHECK(sample_walk(g, 2, params, rng) == std::vector<NodeId>{2});
}

TEST_CASE("first step from a triangle corner is uniform (chi-square, 99%)") {
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    WalkParams params;
    params.walk_length = 2;
    Rng rng(3);
    const int trials = 100000;
    int count1 = 0;
    for (int i = 0; i < trials; ++i) {
        auto w = sample_walk(g, 0, params, rng);
        REQUIRE(w.size() >= 2);
        if (w[1] == 1) ++count1;
    }
    const double expected = trials / 2.0;
    const double chi2 = 2.0 * (count1 - expected) * (count1 - expected) / expected;
    CHECK(chi2 < 6.635); // chi-square(1 dof) at 99%
}

TEST_CASE("every adjacent pair in every emitted walk is an edge") {
    Rng gen(4);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < 30; ++u)
        for (NodeId v = u + 1; v < 30; ++v)
            if (gen.next_double() < 0.1) edges.emplace_back(u, v);
    Graph g = Graph::from_edges(30, edges);
    WalkParams params;
    params.p = 0.5;
    params.q = 2.0;
    params.walks_per_node = 3;
    WalkBatch batch = epoch_walks(g, params, 5);
    CHECK(batch.walks.size() == 30 * 3);
    for (const auto& w : batch.walks) {
        REQUIRE(!w.empty());
        for (std::size_t i = 0; i + 1 < w.size(); ++i) CHECK(g.has_edge(w[i], w[i + 1]));
    }
}

TEST_CASE("epoch_walks count and determinism") {
    Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    WalkParams params;
    params.walks_per_node = 10;
    WalkBatch a = epoch_walks(g, params, 42);
    WalkBatch b = epoch_walks(g, params, 42);
    CHECK(a.walks.size() == 50);
    CHECK(a.walks == b.walks);
    CHECK(epoch_walks(g, params, 43).walks != a.walks);
}

TEST_CASE("p -> infinity forbids immediate backtracking on a cycle") {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < 10; ++v) edges.emplace_back(v, (v + 1) % 10);
    Graph g = Graph::from_edges(10, edges);
    WalkParams params;
    params.p = 1e6;
    params.walk_length = 20;
    params.walks_per_node = 10;
    WalkBatch batch = epoch_walks(g, params, 7);
    for (const auto& w : batch.walks)
        for (std::size_t i = 0; i + 2 < w.size(); ++i) CHECK(w[i + 2] != w[i]);
}

TEST_CASE("second-order transition frequencies match the brute-force weights") {
    // fixed 6-node graph with branching so 1/p, 1, and 1/q all occur
    Graph g = Graph::from_edges(
        6, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 4}, {4, 5}, {2, 4}, {0, 2}});
    WalkParams params;
    params.p = 4.0;
    params.q = 0.25;
    params.walk_length = 2;

    // oracle: unnormalized weight of stepping t -> v -> x
    auto weight = [&](NodeId t, NodeId v, NodeId x) {
        if (x == t) return 1.0 / params.p;
        if (g.has_edge(t, x)) return 1.0;
        return 1.0 / params.q;
    };

    Rng rng(11);
    std::map<std::pair<std::pair<NodeId, NodeId>, NodeId>, int> counts;
    std::map<std::pair<NodeId, NodeId>, int> totals;
    for (int i = 0; i < 400000; ++i) {
        auto w = sample_walk(g, static_cast<NodeId>(i % 6), params, rng);
        if (w.size() < 3) continue;
        counts[{{w[0], w[1]}, w[2]}] += 1;
        totals[{w[0], w[1]}] += 1;
    }
    for (const auto& [tv, total] : totals) {
        if (total < 5000) continue;
        auto [t, v] = tv;
        double z = 0.0;
        for (NodeId x : g.neighbors(v)) z += weight(t, v, x);
        for (NodeId x : g.neighbors(v)) {
            const double expected = weight(t, v, x) / z;
            const double observed =
                static_cast<double>(counts.count({tv, x}) ? counts[{tv, x}] : 0) / total;
            CHECK(observed == doctest::Approx(expected).epsilon(0.08));
        }
    }
}

TEST_CASE("p=q=1 visit frequency matches an independent simple-random-walk oracle") {
    Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    WalkParams params;
    params.walk_length = 20;
    params.walks_per_node = 500; // ~5 * 500 * 21 visited nodes per batch
    std::vector<std::size_t> ours(5, 0);
    std::size_t total_ours = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        WalkBatch batch = epoch_walks(g, params, seed);
        for (const auto& w : batch.walks)
            for (NodeId v : w) {
                ++ours[v];
                ++total_ours;
            }
    }

    // independently coded unbiased walker on a different RNG
    std::mt19937_64 mt(987654321);
    std::vector<std::size_t> oracle(5, 0);
    std::size_t total_oracle = 0;
    for (int rep = 0; rep < 10000; ++rep)
        for (NodeId start = 0; start < 5; ++start) {
            NodeId cur = start;
            ++oracle[cur];
            ++total_oracle;
            for (std::uint32_t s = 0; s < params.walk_length; ++s) {
                auto ns = g.neighbors(cur);
                if (ns.empty()) break;
                cur = ns[std::uniform_int_distribution<std::size_t>(0, ns.size() - 1)(mt)];
                ++oracle[cur];
                ++total_oracle;
            }
        }
    for (NodeId v = 0; v < 5; ++v) {
        const double f_ours = static_cast<double>(ours[v]) / total_ours;
        const double f_oracle = static_cast<double>(oracle[v]) / total_oracle;
        CHECK(std::abs(f_ours - f_oracle) < 0.02);
    }
}
