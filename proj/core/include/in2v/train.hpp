#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "in2v/embedding.hpp"
#include "in2v/graph.hpp"
#include "in2v/rng.hpp"
#include "in2v/walk.hpp"

namespace in2v {

struct TrainConfig {
    WalkParams walk_params;
    std::uint32_t dim = 64;
    std::uint32_t context_size = 10;
    std::uint32_t negatives_per_positive = 1;
    std::uint32_t batch_size = 128;
    double learning_rate = 0.01;
    double alpha = 0.0;       // weight of the neighborhood-closeness loss
    double beta = 0.0;        // weight of the neighbor-diversity loss
    double sample_rate = 0.0; // per-epoch mean-neighbor replacement probability r
    std::uint32_t patience = 50;
    std::uint32_t max_epochs = 500;
    std::uint64_t seed = 0;
};

using NodePair = std::pair<NodeId, NodeId>;

// Sparse per-row gradient accumulator for a minibatch.
class SparseGrad {
public:
    explicit SparseGrad(std::uint32_t dim) : dim_(dim) {}

    // grad[v] += scale * g
    void add(NodeId v, std::span<const float> g, double scale);

    std::uint32_t dim() const { return dim_; }
    const std::unordered_map<NodeId, std::vector<double>>& rows() const { return rows_; }

private:
    std::uint32_t dim_;
    std::unordered_map<NodeId, std::vector<double>> rows_;
};

// Entries i.i.d. uniform on [-1/(2d), 1/(2d)], deterministic per seed.
EmbeddingMatrix init_embeddings(std::uint32_t n, std::uint32_t d, std::uint64_t seed);

// Skip-gram (center, context) pairs within the window.
std::vector<NodePair> context_pairs(const std::vector<NodeId>& walk, std::uint32_t window);

// SGNS loss over positive and negative pairs with a single shared matrix;
// gradients are accumulated into `grad`.
double sgns_loss_and_grad(const EmbeddingMatrix& emb, std::span<const NodePair> positives,
                          std::span<const NodePair> negatives, SparseGrad& grad);

// Arithmetic mean of neighbor rows (includes v itself iff a self-loop exists).
std::vector<float> mean_neighbor_embedding(const EmbeddingMatrix& emb, const Graph& g,
                                           NodeId v);

// -log sigma(h_v . m_{N(v)}); gradient flows to h_v and each neighbor row.
double loss_close(const EmbeddingMatrix& emb, const Graph& g, NodeId v, SparseGrad& grad);

// Mean pairwise cosine similarity over ordered neighbor pairs (incl. u = w).
double loss_div(const EmbeddingMatrix& emb, const Graph& g, NodeId v, SparseGrad& grad);

// Synchronously replaces each non-isolated row by its mean neighbor embedding
// with probability r, reading only the pre-replacement matrix.
EmbeddingMatrix apply_sampling_mod(const EmbeddingMatrix& emb, const Graph& g, double r,
                                   Rng& rng);

// Mutable training state: embeddings plus Adam moments.
struct TrainState {
    EmbeddingMatrix emb;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    std::uint64_t adam_step = 0;

    explicit TrainState(EmbeddingMatrix e)
        : emb(std::move(e)),
          adam_m(emb.values.size(), 0.0),
          adam_v(emb.values.size(), 0.0) {}
};

// One training pass: optional sampling modification, fresh walks, SGNS
// minibatches interleaved round-robin with the auxiliary losses (each node
// is an auxiliary center exactly once). Returns the summed epoch loss.
double train_epoch(TrainState& state, const Graph& g_train, const TrainConfig& config,
                   std::uint32_t epoch);

struct TrainResult {
    EmbeddingMatrix emb; // snapshot at the best-loss epoch
    double best_loss = 0.0;
    std::uint32_t epochs_run = 0;
    std::uint32_t best_epoch = 0;
};

// Runs train_epoch with early stopping on epoch training loss.
TrainResult train(const Graph& g_train, const TrainConfig& config);

} // namespace in2v
