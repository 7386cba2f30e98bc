#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "in2v/errors.hpp"
#include "in2v/extend.hpp"
#include "in2v/rng.hpp"
#include "test_util.hpp"

using namespace in2v;
using testutil::quant_rand;

namespace {

// Literal dense implementation of the synchronous update rule, kept
// deliberately naive: full n x n adjacency, means recomputed from the
// previous snapshot, lookup vector refreshed after each pass.
EmbeddingMatrix naive_extend(const EmbeddingMatrix& emb_train, const Graph& g,
                             const std::vector<NodeId>& sub_to_full,
                             const std::vector<bool>& train_mask, double lambda,
                             std::uint32_t delay) {
    const NodeId n = g.num_nodes();
    const std::uint32_t d = emb_train.d;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) adj[u][v] = true;

    std::vector<std::vector<double>> h(n, std::vector<double>(d, 0.0));
    for (std::uint32_t i = 0; i < emb_train.n; ++i)
        for (std::uint32_t k = 0; k < d; ++k) h[sub_to_full[i]][k] = emb_train.row(i)[k];
    std::vector<bool> s(train_mask);

    // BFS by hand for the iteration budget
    std::vector<int> dist(n, -1);
    std::vector<NodeId> frontier;
    for (NodeId v = 0; v < n; ++v)
        if (train_mask[v]) {
            dist[v] = 0;
            frontier.push_back(v);
        }
    int max_hop = 0;
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId v : frontier)
            for (NodeId u = 0; u < n; ++u)
                if (adj[v][u] && dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    max_hop = std::max(max_hop, dist[u]);
                    next.push_back(u);
                }
        frontier = std::move(next);
    }

    const std::uint32_t T = static_cast<std::uint32_t>(max_hop) + delay;
    for (std::uint32_t t = 0; t < T; ++t) {
        std::vector<std::vector<double>> nh(n, std::vector<double>(d, 0.0));
        std::vector<bool> ns(s);
        for (NodeId v = 0; v < n; ++v) {
            std::vector<double> mean(d, 0.0);
            int cnt = 0;
            for (NodeId u = 0; u < n; ++u)
                if (adj[v][u] && s[u]) {
                    for (std::uint32_t k = 0; k < d; ++k) mean[k] += h[u][k];
                    ++cnt;
                }
            if (cnt == 0) {
                nh[v] = h[v]; // (1a)
            } else if (s[v]) {
                for (std::uint32_t k = 0; k < d; ++k)
                    nh[v][k] = lambda * h[v][k] + (1.0 - lambda) * mean[k] / cnt; // (1b)
            } else {
                for (std::uint32_t k = 0; k < d; ++k) nh[v][k] = mean[k] / cnt; // (1c)
                ns[v] = true;
            }
        }
        h = std::move(nh);
        s = std::move(ns);
    }

    EmbeddingMatrix out(n, d);
    for (NodeId v = 0; v < n; ++v)
        for (std::uint32_t k = 0; k < d; ++k) out.row(v)[k] = static_cast<float>(h[v][k]);
    return out;
}

struct Setup {
    Graph g;
    EmbeddingMatrix emb_train;
    std::vector<NodeId> sub_to_full;
    std::vector<bool> mask;
};

Setup make_setup(const Graph& g, const std::vector<NodeId>& train, std::uint32_t d,
                 std::uint64_t seed) {
    Setup s;
    s.g = g;
    s.sub_to_full = train;
    s.mask.assign(g.num_nodes(), false);
    for (NodeId v : train) s.mask[v] = true;
    s.emb_train = EmbeddingMatrix(static_cast<std::uint32_t>(train.size()), d);
    Rng rng(seed);
    for (auto& x : s.emb_train.values) x = quant_rand(rng);
    return s;
}

} // namespace

TEST_CASE("one iteration gives the middle node the average of its trained ends") {
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    Setup s = make_setup(g, {0, 2}, 2, 1);
    ExtendConfig cfg; // lambda 1, delay 0 -> exactly 1 iteration (max hop 1)
    ExtendReport report;
    EmbeddingMatrix out = in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, cfg, &report);
    CHECK(report.iterations_run == 1);
    for (std::uint32_t k = 0; k < 2; ++k)
        CHECK(out.row(1)[k] ==
              doctest::Approx(0.5 * (s.emb_train.row(0)[k] + s.emb_train.row(1)[k])));
    // trained rows untouched at lambda=1
    CHECK(std::equal(out.row(0).begin(), out.row(0).end(), s.emb_train.row(0).begin()));
    CHECK(std::equal(out.row(2).begin(), out.row(2).end(), s.emb_train.row(1).begin()));
}

TEST_CASE("lambda=1 propagates a lone endpoint undiluted along a 4-hop path") {
    Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    Setup s = make_setup(g, {0}, 3, 2);
    ExtendConfig cfg;
    ExtendReport report;
    EmbeddingMatrix out = in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, cfg, &report);
    CHECK(report.iterations_run == 4);
    for (NodeId v = 1; v < 5; ++v)
        CHECK(std::equal(out.row(v).begin(), out.row(v).end(), s.emb_train.row(0).begin()));
}

TEST_CASE("edge with both ends trained, lambda=0.5: one synchronous step mixes to the middle") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    EmbeddingMatrix emb(2, 1);
    emb.values = {1.0f, 0.0f};
    std::vector<bool> mask{true, true};
    ExtendConfig cfg;
    cfg.lambda = 0.5;
    cfg.delay = 1; // max hop 0 -> T = 1
    ExtendReport report;
    EmbeddingMatrix out = in2v_extend(emb, g, {0, 1}, mask, cfg, &report);
    CHECK(report.iterations_run == 1);
    CHECK(out.row(0)[0] == doctest::Approx(0.5));
    CHECK(out.row(1)[0] == doctest::Approx(0.5));
}

TEST_CASE("in2v_extend matches the naive dense oracle on random graphs") {
    Rng gen(77);
    for (int trial = 0; trial < 60; ++trial) {
        const NodeId n = 2 + static_cast<NodeId>(gen.next_below(5));
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (gen.next_double() < 0.4) edges.emplace_back(u, v);
        Graph g = Graph::from_edges(n, edges);
        std::vector<NodeId> train;
        for (NodeId v = 0; v < n; ++v)
            if (gen.next_double() < 0.5) train.push_back(v);
        if (train.empty()) train.push_back(0);
        Setup s = make_setup(g, train, 2, 1000 + trial);
        for (double lam : {0.0, 0.5, 1.0})
            for (std::uint32_t delay : {0u, 3u}) {
                ExtendConfig cfg;
                cfg.lambda = lam;
                cfg.delay = delay;
                EmbeddingMatrix ours = in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, cfg);
                EmbeddingMatrix oracle =
                    naive_extend(s.emb_train, g, s.sub_to_full, s.mask, lam, delay);
                REQUIRE(ours.n == oracle.n);
                for (std::size_t k = 0; k < ours.values.size(); ++k)
                    CHECK(ours.values[k] == doctest::Approx(oracle.values[k]).epsilon(1e-5));
            }
    }
}

TEST_CASE("lambda=1 output is invariant to extra delay (frozen fixed point)") {
    Rng gen(88);
    for (int trial = 0; trial < 10; ++trial) {
        const NodeId n = 40;
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (gen.next_double() < 0.06) edges.emplace_back(u, v);
        Graph g = Graph::from_edges(n, edges);
        std::vector<NodeId> train{0, 1, 2, 3, 4};
        Setup s = make_setup(g, train, 4, 2000 + trial);
        ExtendConfig base;
        EmbeddingMatrix ref = in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, base);
        for (std::uint32_t delay : {1u, 2u, 7u}) {
            ExtendConfig cfg;
            cfg.delay = delay;
            CHECK(in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, cfg) == ref);
        }
    }
}

TEST_CASE("coverage report counts reachable and unreachable nodes") {
    Graph g = Graph::from_edges(5, {{0, 1}, {1, 2}}); // 3 and 4 isolated
    Setup s = make_setup(g, {0}, 2, 3);
    ExtendConfig cfg;
    ExtendReport report;
    EmbeddingMatrix out = in2v_extend(s.emb_train, g, s.sub_to_full, s.mask, cfg, &report);
    CHECK(report.nodes_covered == 3);
    CHECK(report.nodes_unreachable == 2);
    // unreachable rows legitimately stay zero
    for (NodeId v : {3u, 4u})
        for (float x : out.row(v)) CHECK(x == 0.0f);
}

TEST_CASE("mean reversion: lambda<1 pulls a trained outlier toward its cliques") {
    // two trained cliques A {0..3}, B {4..7} joined through trained node 8
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < 4; ++u)
        for (NodeId v = u + 1; v < 4; ++v) {
            edges.emplace_back(u, v);
            edges.emplace_back(u + 4, v + 4);
        }
    edges.emplace_back(3, 8);
    edges.emplace_back(8, 4);
    Graph g = Graph::from_edges(9, edges);

    EmbeddingMatrix emb(9, 2);
    for (NodeId v = 0; v < 4; ++v) emb.row(v)[0] = 1.0f;   // clique A at (1, 0)
    for (NodeId v = 4; v < 8; ++v) emb.row(v)[1] = 1.0f;   // clique B at (0, 1)
    emb.row(8)[0] = 40.0f;                                 // outlier
    emb.row(8)[1] = -40.0f;
    std::vector<NodeId> train(9);
    for (NodeId v = 0; v < 9; ++v) train[v] = v;
    std::vector<bool> mask(9, true);

    auto dist_to_center = [&](const EmbeddingMatrix& out) {
        // midpoint of the original clique means (0.5, 0.5)
        const double dx = out.row(8)[0] - 0.5, dy = out.row(8)[1] - 0.5;
        return std::sqrt(dx * dx + dy * dy);
    };
    ExtendConfig frozen;
    frozen.delay = 5;
    ExtendConfig soft = frozen;
    soft.lambda = 0.75;
    const double d_frozen = dist_to_center(in2v_extend(emb, g, train, mask, frozen));
    const double d_soft = dist_to_center(in2v_extend(emb, g, train, mask, soft));
    CHECK(d_soft < d_frozen);
}

TEST_CASE("feature propagation on K2 copies the trained endpoint") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    EmbeddingMatrix emb(1, 2);
    emb.values = {0.25f, -0.5f};
    std::vector<bool> mask{true, false};
    for (std::uint32_t iters : {1u, 5u, 40u}) {
        EmbeddingMatrix out = feature_propagation(emb, g, {0}, mask, iters);
        CHECK(out.row(1)[0] == doctest::Approx(0.25));
        CHECK(out.row(1)[1] == doctest::Approx(-0.5));
    }
}

TEST_CASE("feature propagation clamps training rows bit-exactly") {
    Rng gen(99);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < 25; ++u)
        for (NodeId v = u + 1; v < 25; ++v)
            if (gen.next_double() < 0.15) edges.emplace_back(u, v);
    Graph g = Graph::from_edges(25, edges);
    std::vector<NodeId> train{0, 3, 7, 12, 20};
    std::vector<bool> mask(25, false);
    for (NodeId v : train) mask[v] = true;
    EmbeddingMatrix emb(5, 3);
    Rng rng(4);
    for (auto& x : emb.values) x = quant_rand(rng);
    EmbeddingMatrix out = feature_propagation(emb, g, train, mask, 60);
    for (std::uint32_t i = 0; i < 5; ++i)
        CHECK(std::equal(out.row(train[i]).begin(), out.row(train[i]).end(),
                         emb.row(i).begin()));
}

TEST_CASE("feature propagation with no test nodes is the identity") {
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    EmbeddingMatrix emb(3, 2);
    Rng rng(6);
    for (auto& x : emb.values) x = quant_rand(rng);
    std::vector<bool> mask(3, true);
    CHECK(feature_propagation(emb, g, {0, 1, 2}, mask, 17) == emb);
}

TEST_CASE("feature propagation successive differences shrink on a connected graph") {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v + 1 < 12; ++v) edges.emplace_back(v, v + 1);
    edges.emplace_back(0, 6);
    edges.emplace_back(3, 9);
    Graph g = Graph::from_edges(12, edges);
    std::vector<NodeId> train{0, 1};
    std::vector<bool> mask(12, false);
    mask[0] = mask[1] = true;
    EmbeddingMatrix emb(2, 2);
    emb.values = {1.0f, -1.0f, 0.5f, 2.0f};

    auto iterate = [&](std::uint32_t t) {
        return feature_propagation(emb, g, train, mask, t);
    };
    std::vector<double> diffs;
    EmbeddingMatrix prev = iterate(1);
    for (std::uint32_t t = 2; t <= 25; ++t) {
        EmbeddingMatrix cur = iterate(t);
        double d2 = 0.0;
        for (std::size_t k = 0; k < cur.values.size(); ++k) {
            const double d = static_cast<double>(cur.values[k]) - prev.values[k];
            d2 += d * d;
        }
        diffs.push_back(std::sqrt(d2));
        prev = cur;
    }
    for (std::size_t i = 5; i + 1 < diffs.size(); ++i) CHECK(diffs[i + 1] <= diffs[i]);
}

TEST_CASE("matmul baseline: one row-normalized multiply on the 3-path") {
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    EmbeddingMatrix emb(2, 1);
    emb.values = {6.0f, 2.0f}; // h_0 and h_2 trained
    std::vector<bool> mask{true, false, true};
    EmbeddingMatrix out = matmul_extend(emb, g, {0, 2}, mask, 1);
    CHECK(out.row(1)[0] == doctest::Approx(4.0)); // (h_0 + h_2) / 2
    CHECK(out.row(0)[0] == doctest::Approx(0.0)); // middle node started at 0; no clamping
    CHECK(out.row(2)[0] == doctest::Approx(0.0));
}

TEST_CASE("matmul rejects zero iterations") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    EmbeddingMatrix emb(1, 1);
    emb.values = {1.0f};
    std::vector<bool> mask{true, false};
    CHECK_THROWS_AS(matmul_extend(emb, g, {0}, mask, 0), ValidationError);
    CHECK_THROWS_AS(feature_propagation(emb, g, {0}, mask, 0), ValidationError);
}

TEST_CASE("matmul power iteration converges to the common mean on a regular graph") {
    // cycle: 2-regular, connected, aperiodic via one chord pair kept regular by
    // using an odd cycle (odd cycles are non-bipartite, so D^-1 A powers converge)
    const NodeId n = 11;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
    Graph g = Graph::from_edges(n, edges);
    EmbeddingMatrix emb(n, 1);
    Rng rng(13);
    std::vector<NodeId> train(n);
    std::vector<bool> mask(n, true);
    double mean = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        train[v] = v;
        emb.row(v)[0] = quant_rand(rng);
        mean += emb.row(v)[0];
    }
    mean /= n;
    EmbeddingMatrix out = matmul_extend(emb, g, train, mask, 500);
    for (NodeId v = 0; v < n; ++v) CHECK(std::abs(out.row(v)[0] - mean) < 1e-3);
}

TEST_CASE("matmul norm variants differ as expected on a star") {
    Graph g = Graph::from_edges(3, {{0, 1}, {0, 2}});
    EmbeddingMatrix emb(1, 1);
    emb.values = {8.0f}; // center trained
    std::vector<bool> mask{true, false, false};
    // raw: leaf gets the full center value; row: same here (deg 1);
    // sym: leaf gets 8 / sqrt(2*1)
    EmbeddingMatrix raw = matmul_extend(emb, g, {0}, mask, 1, AdjacencyNorm::Raw);
    EmbeddingMatrix row = matmul_extend(emb, g, {0}, mask, 1, AdjacencyNorm::Row);
    EmbeddingMatrix sym = matmul_extend(emb, g, {0}, mask, 1, AdjacencyNorm::Sym);
    CHECK(raw.row(1)[0] == doctest::Approx(8.0));
    CHECK(row.row(1)[0] == doctest::Approx(8.0));
    CHECK(sym.row(1)[0] == doctest::Approx(8.0 / std::sqrt(2.0)));
    CHECK(raw.row(0)[0] == doctest::Approx(0.0));
}
