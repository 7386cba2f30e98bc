#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "in2v/embedding.hpp"
#include "in2v/graph.hpp"

namespace in2v {

enum class ExtendMethod { In2v, FeaturePropagation, MatMul };

enum class AdjacencyNorm { Raw, Row, Sym };

struct ExtendConfig {
    ExtendMethod method = ExtendMethod::In2v;
    double lambda = 1.0;              // convex mix of own vs mean neighbor embedding
    std::uint32_t delay = 0;          // extra iterations after full coverage
    std::uint32_t fp_iterations = 40;
    std::uint32_t matmul_iterations = 10;
    AdjacencyNorm matmul_norm = AdjacencyNorm::Row;
};

struct ExtendReport {
    std::string method;
    double lambda = 0.0;
    std::uint32_t delay = 0;
    std::uint32_t iterations_run = 0;
    std::uint32_t nodes_covered = 0;
    std::uint32_t nodes_unreachable = 0;

    std::string to_json() const;
};

// Scatters trained subgraph rows into a zero-initialized full-graph matrix.
EmbeddingMatrix scatter_to_full(const EmbeddingMatrix& emb_train, NodeId full_nodes,
                                const std::vector<NodeId>& sub_to_full);

// Iterative mean-neighbor extension filtered by the has-embedding vector s.
// Runs (max finite BFS hop from the train set) + delay synchronous iterations;
// each reads only the previous snapshot, and s is updated after each pass.
EmbeddingMatrix in2v_extend(const EmbeddingMatrix& emb_train, const Graph& g_full,
                            const std::vector<NodeId>& sub_to_full,
                            const std::vector<bool>& train_mask, const ExtendConfig& cfg,
                            ExtendReport* report = nullptr);

// Symmetric-normalized diffusion h <- D^{-1/2} A D^{-1/2} h with training rows
// reset to their originals after every iteration.
EmbeddingMatrix feature_propagation(const EmbeddingMatrix& emb_train, const Graph& g_full,
                                    const std::vector<NodeId>& sub_to_full,
                                    const std::vector<bool>& train_mask,
                                    std::uint32_t iterations,
                                    ExtendReport* report = nullptr);

// Repeated multiplication by the (normalized) adjacency without clamping.
EmbeddingMatrix matmul_extend(const EmbeddingMatrix& emb_train, const Graph& g_full,
                              const std::vector<NodeId>& sub_to_full,
                              const std::vector<bool>& train_mask, std::uint32_t iterations,
                              AdjacencyNorm norm = AdjacencyNorm::Row,
                              ExtendReport* report = nullptr);

} // namespace in2v
