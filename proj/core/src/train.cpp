#include "in2v/train.hpp"

#include <algorithm>
#include <cmath>

#include "in2v/errors.hpp"

namespace in2v {

namespace {

constexpr std::uint64_t kInitTag = 0x494e4954ULL; // "INIT"
constexpr std::uint64_t kWalkTag = 0x57414c4bULL; // "WALK"
constexpr std::uint64_t kShufTag = 0x53485546ULL; // "SHUF"
constexpr std::uint64_t kNegTag = 0x4e454753ULL;  // "NEGS"
constexpr std::uint64_t kAuxTag = 0x41555801ULL;  // "AUX"
constexpr std::uint64_t kSampTag = 0x53414d50ULL; // "SAMP"

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Numerically stable -log(sigmoid(x)) = log(1 + exp(-x)).
double log1p_exp_neg(double x) {
    if (x > 0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += static_cast<double>(a[k]) * b[k];
    return s;
}

// Flat accumulator for the hot training loop: one pre-sized buffer plus a
// touched-row list, so batch gradients avoid per-row hashing and allocation.
// Accumulation order per row matches SparseGrad, so results are identical.
struct DenseGrad {
    std::uint32_t dim;
    std::vector<double> buf;
    std::vector<NodeId> touched;
    std::vector<bool> seen;

    DenseGrad(std::uint32_t d, NodeId n)
        : dim(d), buf(static_cast<std::size_t>(n) * d, 0.0), seen(n, false) {}

    void add(NodeId v, std::span<const float> g, double scale) {
        if (!seen[v]) {
            seen[v] = true;
            touched.push_back(v);
        }
        double* __restrict r = buf.data() + static_cast<std::size_t>(v) * dim;
        const float* __restrict gp = g.data();
        for (std::uint32_t k = 0; k < dim; ++k) r[k] += scale * gp[k];
    }

    void clear() {
        for (NodeId v : touched) {
            std::fill_n(buf.data() + static_cast<std::size_t>(v) * dim, dim, 0.0);
            seen[v] = false;
        }
        touched.clear();
    }
};

template <typename GradT>
double sgns_core(const EmbeddingMatrix& emb, std::span<const NodePair> positives,
                 std::span<const NodePair> negatives, GradT& grad) {
    double loss = 0.0;
    for (auto [u, v] : positives) {
        auto hu = emb.row(u), hv = emb.row(v);
        const double x = dot(hu, hv);
        loss += log1p_exp_neg(x);
        const double g = -(1.0 - sigmoid(x)); // d/dx of -log sigma(x)
        grad.add(u, hv, g);
        grad.add(v, hu, g);
    }
    for (auto [u, w] : negatives) {
        auto hu = emb.row(u), hw = emb.row(w);
        const double x = dot(hu, hw);
        loss += log1p_exp_neg(-x);
        const double g = sigmoid(x); // d/dx of -log sigma(-x)
        grad.add(u, hw, g);
        grad.add(w, hu, g);
    }
    if (!std::isfinite(loss))
        throw NumericalError("sgns loss is non-finite (learning rate too high?)");
    return loss;
}

} // namespace

void SparseGrad::add(NodeId v, std::span<const float> g, double scale) {
    auto& row = rows_[v];
    if (row.empty()) row.assign(dim_, 0.0);
    for (std::uint32_t k = 0; k < dim_; ++k) row[k] += scale * g[k];
}

EmbeddingMatrix init_embeddings(std::uint32_t n, std::uint32_t d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw ValidationError("init_embeddings: n and d must be >= 1");
    EmbeddingMatrix emb(n, d);
    const double half = 0.5 / d;
    Rng rng(stream_key(seed, kInitTag));
    for (auto& x : emb.values) x = static_cast<float>(rng.next_double(-half, half));
    return emb;
}

std::vector<NodePair> context_pairs(const std::vector<NodeId>& walk, std::uint32_t window) {
    if (window < 1) throw ValidationError("context_pairs: window must be >= 1");
    std::vector<NodePair> pairs;
    const std::size_t len = walk.size();
    for (std::size_t i = 0; i < len; ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(len, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j)
            if (j != i) pairs.emplace_back(walk[i], walk[j]);
    }
    return pairs;
}

double sgns_loss_and_grad(const EmbeddingMatrix& emb, std::span<const NodePair> positives,
                          std::span<const NodePair> negatives, SparseGrad& grad) {
    return sgns_core(emb, positives, negatives, grad);
}

std::vector<float> mean_neighbor_embedding(const EmbeddingMatrix& emb, const Graph& g,
                                           NodeId v) {
    auto ns = g.neighbors(v);
    if (ns.empty())
        throw DegenerateInputError("mean_neighbor_embedding: node " + std::to_string(v) +
                                   " has no neighbors");
    std::vector<float> m(emb.d, 0.0f);
    for (NodeId u : ns) {
        auto hu = emb.row(u);
        for (std::uint32_t k = 0; k < emb.d; ++k) m[k] += hu[k];
    }
    const float inv = 1.0f / static_cast<float>(ns.size());
    for (auto& x : m) x *= inv;
    return m;
}

double loss_close(const EmbeddingMatrix& emb, const Graph& g, NodeId v, SparseGrad& grad) {
    auto ns = g.neighbors(v);
    if (ns.empty())
        throw DegenerateInputError("loss_close: node has no neighbors");
    // mean in double so the loss is FD-checkable against the float rows
    std::vector<double> md(emb.d, 0.0);
    for (NodeId u : ns) {
        auto hu = emb.row(u);
        for (std::uint32_t k = 0; k < emb.d; ++k) md[k] += hu[k];
    }
    for (auto& x : md) x /= static_cast<double>(ns.size());
    auto hv = emb.row(v);
    double x = 0.0;
    for (std::uint32_t k = 0; k < emb.d; ++k) x += hv[k] * md[k];
    const double loss = log1p_exp_neg(x);
    const double gx = -(1.0 - sigmoid(x));
    std::vector<float> m(emb.d);
    for (std::uint32_t k = 0; k < emb.d; ++k) m[k] = static_cast<float>(md[k]);
    grad.add(v, std::span<const float>(m), gx);
    const double per_neighbor = gx / static_cast<double>(ns.size());
    for (NodeId u : ns) grad.add(u, hv, per_neighbor);
    return loss;
}

double loss_div(const EmbeddingMatrix& emb, const Graph& g, NodeId v, SparseGrad& grad) {
    auto ns = g.neighbors(v);
    if (ns.empty())
        throw DegenerateInputError("loss_div: node has no neighbors");
    const std::uint32_t d = emb.d;
    const double k = static_cast<double>(ns.size());

    // sum_{u,w} cos(h_u, h_w) = |S|^2 with S the sum of unit neighbor rows;
    // zero-norm rows contribute 0 (cosine defined as 0 for them).
    std::vector<double> unit_sum(d, 0.0);
    std::vector<double> norms(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        auto h = emb.row(ns[i]);
        norms[i] = std::sqrt(dot(h, h));
        if (norms[i] > 0)
            for (std::uint32_t c = 0; c < d; ++c) unit_sum[c] += h[c] / norms[i];
    }
    double s_sq = 0.0;
    for (double x : unit_sum) s_sq += x * x;
    const double loss = s_sq / (k * k);

    // dL/dh_u = (2 / k^2) * (S - (hat_u . S) hat_u) / |h_u|
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (norms[i] == 0) continue;
        auto h = emb.row(ns[i]);
        double hat_dot_s = 0.0;
        for (std::uint32_t c = 0; c < d; ++c)
            hat_dot_s += (h[c] / norms[i]) * unit_sum[c];
        const double scale = 2.0 / (k * k * norms[i]);
        std::vector<float> gvec(d);
        for (std::uint32_t c = 0; c < d; ++c)
            gvec[c] = static_cast<float>(scale * (unit_sum[c] - hat_dot_s * h[c] / norms[i]));
        grad.add(ns[i], gvec, 1.0);
    }
    return loss;
}

EmbeddingMatrix apply_sampling_mod(const EmbeddingMatrix& emb, const Graph& g, double r,
                                   Rng& rng) {
    if (r < 0.0 || r > 1.0) throw ValidationError("apply_sampling_mod: r must be in [0,1]");
    EmbeddingMatrix out = emb;
    if (r == 0.0) return out;
    for (NodeId v = 0; v < emb.n; ++v) {
        if (g.degree(v) == 0) continue;
        if (rng.next_double() < r) {
            // Mean computed from the pre-replacement matrix.
            const auto m = mean_neighbor_embedding(emb, g, v);
            std::copy(m.begin(), m.end(), out.row(v).begin());
        }
    }
    return out;
}

namespace {

// Adam on the touched rows; bias correction uses a global step counter.
void adam_apply(TrainState& state, DenseGrad& grad, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    state.adam_step += 1;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.adam_step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.adam_step));
    const std::uint32_t d = state.emb.d;
    std::sort(grad.touched.begin(), grad.touched.end()); // deterministic order
    for (NodeId v : grad.touched) {
        const std::size_t base = static_cast<std::size_t>(v) * d;
        const double* __restrict gr = grad.buf.data() + base;
        double* __restrict m = state.adam_m.data() + base;
        double* __restrict s = state.adam_v.data() + base;
        float* __restrict row = state.emb.values.data() + base;
        for (std::uint32_t k = 0; k < d; ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * gr[k];
            s[k] = b2 * s[k] + (1.0 - b2) * gr[k] * gr[k];
            row[k] -= static_cast<float>(lr * (m[k] / c1) / (std::sqrt(s[k] / c2) + eps));
        }
    }
    grad.clear();
}

} // namespace

double train_epoch(TrainState& state, const Graph& g_train, const TrainConfig& config,
                   std::uint32_t epoch) {
    const NodeId n = g_train.num_nodes();
    if (state.emb.n != n)
        throw ValidationError("train_epoch: embedding rows do not match graph nodes");

    if (config.sample_rate > 0.0) {
        Rng rng(stream_key(config.seed, kSampTag, epoch));
        state.emb = apply_sampling_mod(state.emb, g_train, config.sample_rate, rng);
    }

    const WalkBatch batch =
        epoch_walks(g_train, config.walk_params, stream_key(config.seed, kWalkTag, epoch));
    std::vector<NodePair> pairs;
    for (const auto& walk : batch.walks) {
        auto wp = context_pairs(walk, config.context_size);
        pairs.insert(pairs.end(), wp.begin(), wp.end());
    }
    {
        Rng rng(stream_key(config.seed, kShufTag, epoch));
        for (std::size_t i = pairs.size(); i > 1; --i)
            std::swap(pairs[i - 1], pairs[rng.next_below(i)]);
    }

    const bool aux = config.alpha != 0.0 || config.beta != 0.0;
    std::vector<NodeId> aux_order;
    if (aux) {
        aux_order.resize(n);
        for (NodeId v = 0; v < n; ++v) aux_order[v] = v;
        Rng rng(stream_key(config.seed, kAuxTag, epoch));
        for (std::size_t i = n; i > 1; --i)
            std::swap(aux_order[i - 1], aux_order[rng.next_below(i)]);
    }

    Rng neg_rng(stream_key(config.seed, kNegTag, epoch));
    const std::size_t num_batches =
        pairs.empty() ? 1 : (pairs.size() + config.batch_size - 1) / config.batch_size;

    double epoch_loss = 0.0;
    std::size_t aux_done = 0;
    DenseGrad grad(state.emb.d, n);
    std::vector<NodePair> negatives;
    for (std::size_t b = 0; b < num_batches; ++b) {
        const std::size_t lo = b * config.batch_size;
        const std::size_t hi = std::min(pairs.size(), lo + config.batch_size);
        if (hi > lo) {
            negatives.clear();
            negatives.reserve((hi - lo) * config.negatives_per_positive);
            for (std::size_t i = lo; i < hi; ++i)
                for (std::uint32_t j = 0; j < config.negatives_per_positive; ++j)
                    negatives.emplace_back(pairs[i].first,
                                           static_cast<NodeId>(neg_rng.next_below(n)));
            epoch_loss += sgns_core(state.emb, std::span(pairs).subspan(lo, hi - lo),
                                    std::span<const NodePair>(negatives), grad);
            adam_apply(state, grad, config.learning_rate);
        }
        if (aux) {
            // Round-robin: spread the per-epoch auxiliary centers over batches.
            const std::size_t target = ((b + 1) * n) / num_batches;
            if (target > aux_done) {
                for (std::size_t i = aux_done; i < target; ++i) {
                    const NodeId v = aux_order[i];
                    if (g_train.degree(v) == 0) continue; // isolated: contributes 0
                    if (config.alpha != 0.0) {
                        SparseGrad gc(state.emb.d);
                        epoch_loss += config.alpha * loss_close(state.emb, g_train, v, gc);
                        for (const auto& [row, gvec] : gc.rows()) {
                            std::vector<float> gf(gvec.begin(), gvec.end());
                            grad.add(row, gf, config.alpha);
                        }
                    }
                    if (config.beta != 0.0) {
                        SparseGrad gd(state.emb.d);
                        epoch_loss += config.beta * loss_div(state.emb, g_train, v, gd);
                        for (const auto& [row, gvec] : gd.rows()) {
                            std::vector<float> gf(gvec.begin(), gvec.end());
                            grad.add(row, gf, config.beta);
                        }
                    }
                }
                aux_done = target;
                if (!grad.touched.empty()) adam_apply(state, grad, config.learning_rate);
            }
        }
    }
    if (!std::isfinite(epoch_loss))
        throw NumericalError("epoch loss is non-finite");
    return epoch_loss;
}

TrainResult train(const Graph& g_train, const TrainConfig& config) {
    TrainState state(init_embeddings(g_train.num_nodes(), config.dim, config.seed));
    TrainResult result;
    result.emb = state.emb;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t since_best = 0;
    for (std::uint32_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double loss = train_epoch(state, g_train, config, epoch);
        result.epochs_run = epoch + 1;
        if (loss < best) {
            best = loss;
            result.best_loss = loss;
            result.best_epoch = epoch;
            result.emb = state.emb;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

} // namespace in2v
