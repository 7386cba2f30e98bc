#include "in2v/walk.hpp"

#include <algorithm>

#include "in2v/errors.hpp"

namespace in2v {

std::vector<NodeId> sample_walk(const Graph& g, NodeId start, const WalkParams& params,
                                Rng& rng) {
    if (start >= g.num_nodes()) throw ValidationError("sample_walk: start out of range");
    if (!(params.p > 0.0) || !(params.q > 0.0))
        throw ValidationError("sample_walk: p and q must be positive");

    std::vector<NodeId> walk;
    walk.reserve(params.walk_length + 1);
    walk.push_back(start);
    if (params.walk_length == 0) return walk;

    auto cur_ns = g.neighbors(start);
    if (cur_ns.empty()) return walk; // isolated start

    NodeId prev = start;
    NodeId cur = cur_ns[rng.next_below(cur_ns.size())];
    walk.push_back(cur);

    const double inv_p = 1.0 / params.p;
    const double inv_q = 1.0 / params.q;
    const double max_w = std::max({1.0, inv_p, inv_q});

    for (std::uint32_t step = 1; step < params.walk_length; ++step) {
        auto ns = g.neighbors(cur);
        if (ns.empty()) break; // dead end: truncate
        // Rejection sampling against the maximal transition weight.
        NodeId next;
        for (;;) {
            next = ns[rng.next_below(ns.size())];
            double w = (next == prev) ? inv_p : (g.has_edge(prev, next) ? 1.0 : inv_q);
            if (w >= max_w || rng.next_double() * max_w < w) break;
        }
        walk.push_back(next);
        prev = cur;
        cur = next;
    }
    return walk;
}

WalkBatch epoch_walks(const Graph& g, const WalkParams& params, std::uint64_t seed) {
    WalkBatch batch;
    batch.walks.resize(static_cast<std::size_t>(g.num_nodes()) * params.walks_per_node);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        for (std::uint32_t i = 0; i < params.walks_per_node; ++i) {
            Rng rng(stream_key(seed, v, i));
            batch.walks[static_cast<std::size_t>(v) * params.walks_per_node + i] =
                sample_walk(g, v, params, rng);
        }
    }
    return batch;
}

} // namespace in2v
