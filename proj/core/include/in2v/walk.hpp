#pragma once

#include <cstdint>
#include <vector>

#include "in2v/graph.hpp"
#include "in2v/rng.hpp"

namespace in2v {

// Second-order biased walk parameters (return parameter p, in-out parameter q).
struct WalkParams {
    double p = 1.0;
    double q = 1.0;
    std::uint32_t walk_length = 20;   // steps per walk; walks hold <= length+1 nodes
    std::uint32_t walks_per_node = 10;
};

struct WalkBatch {
    std::vector<std::vector<NodeId>> walks;
};

// Single biased walk from `start`. First step uniform over N(start); later
// steps weight a candidate x by 1/p if x is the previous node, 1 if x
// neighbors the previous node, and 1/q otherwise. Truncates at dead ends.
std::vector<NodeId> sample_walk(const Graph& g, NodeId start, const WalkParams& params,
                                Rng& rng);

// walks_per_node walks per node. Walk i of node v draws from an RNG stream
// keyed by (seed, v, i), so the batch is independent of generation order.
WalkBatch epoch_walks(const Graph& g, const WalkParams& params, std::uint64_t seed);

} // namespace in2v
