#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "in2v/graph.hpp"

namespace in2v {

// Disjoint train/val/test node-index sets; together they cover [0, n).
// |val| and |test| differ by at most one.
struct SplitAssignment {
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;

    NodeId num_nodes() const {
        return static_cast<NodeId>(train.size() + val.size() + test.size());
    }
    bool operator==(const SplitAssignment&) const = default;
};

// Seeded uniform permutation of [0, n); first floor(f*n) nodes are train,
// the rest split evenly into val/test (test gets the odd node).
SplitAssignment make_split(NodeId n, double train_fraction, std::uint64_t seed);

void save_split(const SplitAssignment& s, const std::string& path);
SplitAssignment load_split(const std::string& path);

} // namespace in2v
