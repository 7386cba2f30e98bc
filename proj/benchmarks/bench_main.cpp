#include <benchmark/benchmark.h>

#include "in2v/extend.hpp"
#include "in2v/graph.hpp"
#include "in2v/rng.hpp"
#include "in2v/train.hpp"
#include "in2v/walk.hpp"

using namespace in2v;

namespace {

Graph random_graph(NodeId n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.next_double() < p) edges.emplace_back(u, v);
    return Graph::from_edges(n, edges);
}

void bm_walk_epoch(benchmark::State& state) {
    const Graph g = random_graph(static_cast<NodeId>(state.range(0)), 0.01, 7);
    WalkParams params;
    params.p = 4.0;
    params.q = 0.25;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        WalkBatch batch = epoch_walks(g, params, seed++);
        benchmark::DoNotOptimize(batch.walks.data());
    }
}
BENCHMARK(bm_walk_epoch)->Arg(500)->Arg(2000);

void bm_sgns_batch(benchmark::State& state) {
    const std::uint32_t d = static_cast<std::uint32_t>(state.range(0));
    EmbeddingMatrix emb = init_embeddings(1000, d, 3);
    Rng rng(11);
    std::vector<NodePair> pos, neg;
    for (int i = 0; i < 128; ++i) {
        pos.emplace_back(static_cast<NodeId>(rng.next_below(1000)),
                         static_cast<NodeId>(rng.next_below(1000)));
        neg.emplace_back(static_cast<NodeId>(rng.next_below(1000)),
                         static_cast<NodeId>(rng.next_below(1000)));
    }
    for (auto _ : state) {
        SparseGrad grad(d);
        benchmark::DoNotOptimize(sgns_loss_and_grad(emb, pos, neg, grad));
    }
}
BENCHMARK(bm_sgns_batch)->Arg(64)->Arg(128)->Arg(256);

void bm_in2v_extend(benchmark::State& state) {
    const NodeId n = static_cast<NodeId>(state.range(0));
    const Graph g = random_graph(n, 10.0 / n, 13);
    std::vector<NodeId> train;
    std::vector<bool> mask(n, false);
    Rng rng(5);
    for (NodeId v = 0; v < n; ++v)
        if (rng.next_double() < 0.1) {
            train.push_back(v);
            mask[v] = true;
        }
    EmbeddingMatrix emb = init_embeddings(static_cast<std::uint32_t>(train.size()), 128, 1);
    ExtendConfig cfg;
    cfg.lambda = 0.75;
    cfg.delay = 5;
    for (auto _ : state) {
        EmbeddingMatrix out = in2v_extend(emb, g, train, mask, cfg);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(bm_in2v_extend)->Arg(2000)->Arg(10000);

void bm_feature_propagation(benchmark::State& state) {
    const NodeId n = 5000;
    const Graph g = random_graph(n, 10.0 / n, 17);
    std::vector<NodeId> train;
    std::vector<bool> mask(n, false);
    Rng rng(5);
    for (NodeId v = 0; v < n; ++v)
        if (rng.next_double() < 0.1) {
            train.push_back(v);
            mask[v] = true;
        }
    EmbeddingMatrix emb = init_embeddings(static_cast<std::uint32_t>(train.size()), 128, 1);
    const auto iters = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) {
        EmbeddingMatrix out = feature_propagation(emb, g, train, mask, iters);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(bm_feature_propagation)->Arg(10)->Arg(40);

} // namespace

BENCHMARK_MAIN();
