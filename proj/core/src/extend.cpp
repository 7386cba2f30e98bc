#include "in2v/extend.hpp"

#include <cmath>

#include <json.hpp>

#include "in2v/errors.hpp"

namespace in2v {

std::string ExtendReport::to_json() const {
    nlohmann::json j{{"method", method},
                     {"lambda", lambda},
                     {"delay", delay},
                     {"iterations_run", iterations_run},
                     {"nodes_covered", nodes_covered},
                     {"nodes_unreachable", nodes_unreachable}};
    return j.dump(2);
}

EmbeddingMatrix scatter_to_full(const EmbeddingMatrix& emb_train, NodeId full_nodes,
                                const std::vector<NodeId>& sub_to_full) {
    if (sub_to_full.size() != emb_train.n)
        throw ValidationError("scatter_to_full: mapping size does not match rows");
    EmbeddingMatrix out(full_nodes, emb_train.d);
    for (std::uint32_t i = 0; i < emb_train.n; ++i) {
        auto src = emb_train.row(i);
        auto dst = out.row(sub_to_full[i]);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

namespace {

std::vector<NodeId> train_nodes_of(const std::vector<bool>& mask) {
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < mask.size(); ++v)
        if (mask[v]) nodes.push_back(v);
    if (nodes.empty()) throw ValidationError("extend: empty train mask");
    return nodes;
}

void fill_coverage(const std::vector<NodeId>& hops, ExtendReport* report,
                   std::uint32_t iterations) {
    if (!report) return;
    report->iterations_run = iterations;
    report->nodes_covered = 0;
    report->nodes_unreachable = 0;
    for (NodeId h : hops)
        (h == kUnreachable ? report->nodes_unreachable : report->nodes_covered) += 1;
}

} // namespace

EmbeddingMatrix in2v_extend(const EmbeddingMatrix& emb_train, const Graph& g_full,
                            const std::vector<NodeId>& sub_to_full,
                            const std::vector<bool>& train_mask, const ExtendConfig& cfg,
                            ExtendReport* report) {
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
        throw ValidationError("in2v_extend: lambda must be in [0,1]");
    const NodeId n = g_full.num_nodes();
    const auto sources = train_nodes_of(train_mask);
    const auto hops = bfs_hops_from_set(g_full, sources);
    NodeId max_hop = 0;
    for (NodeId h : hops)
        if (h != kUnreachable) max_hop = std::max(max_hop, h);
    const std::uint32_t iterations = max_hop + cfg.delay;

    EmbeddingMatrix cur = scatter_to_full(emb_train, n, sub_to_full);
    EmbeddingMatrix next(n, cur.d);
    std::vector<bool> s(train_mask);

    const auto lam = static_cast<float>(cfg.lambda);
    for (std::uint32_t t = 0; t < iterations; ++t) {
        std::vector<bool> s_next = s;
        for (NodeId v = 0; v < n; ++v) {
            auto dst = next.row(v);
            auto src = cur.row(v);
            // mean over neighbors that had an embedding before this iteration
            std::size_t cnt = 0;
            std::fill(dst.begin(), dst.end(), 0.0f);
            for (NodeId u : g_full.neighbors(v)) {
                if (!s[u]) continue;
                auto hu = cur.row(u);
                for (std::uint32_t k = 0; k < cur.d; ++k) dst[k] += hu[k];
                ++cnt;
            }
            if (cnt == 0) { // (1a): no embedded neighbor, keep h_v
                std::copy(src.begin(), src.end(), dst.begin());
                continue;
            }
            const float inv = 1.0f / static_cast<float>(cnt);
            if (s[v]) { // (1b): convex combination with the mean
                for (std::uint32_t k = 0; k < cur.d; ++k)
                    dst[k] = lam * src[k] + (1.0f - lam) * (dst[k] * inv);
            } else { // (1c): adopt the mean
                for (std::uint32_t k = 0; k < cur.d; ++k) dst[k] *= inv;
                s_next[v] = true;
            }
        }
        cur.values.swap(next.values);
        s = std::move(s_next);
    }
    if (report) {
        report->method = "in2v";
        report->lambda = cfg.lambda;
        report->delay = cfg.delay;
        fill_coverage(hops, report, iterations);
    }
    return cur;
}

EmbeddingMatrix feature_propagation(const EmbeddingMatrix& emb_train, const Graph& g_full,
                                    const std::vector<NodeId>& sub_to_full,
                                    const std::vector<bool>& train_mask,
                                    std::uint32_t iterations, ExtendReport* report) {
    if (iterations < 1) throw ValidationError("feature_propagation: iterations must be >= 1");
    const NodeId n = g_full.num_nodes();
    const auto sources = train_nodes_of(train_mask);

    EmbeddingMatrix original = scatter_to_full(emb_train, n, sub_to_full);
    EmbeddingMatrix cur = original;
    EmbeddingMatrix next(n, cur.d);

    std::vector<float> inv_sqrt_deg(n, 0.0f);
    for (NodeId v = 0; v < n; ++v)
        if (g_full.degree(v) > 0)
            inv_sqrt_deg[v] = 1.0f / std::sqrt(static_cast<float>(g_full.degree(v)));

    for (std::uint32_t t = 0; t < iterations; ++t) {
        for (NodeId v = 0; v < n; ++v) {
            auto dst = next.row(v);
            if (g_full.degree(v) == 0) { // zero-degree rows pass through
                auto src = cur.row(v);
                std::copy(src.begin(), src.end(), dst.begin());
                continue;
            }
            std::fill(dst.begin(), dst.end(), 0.0f);
            for (NodeId u : g_full.neighbors(v)) {
                const float w = inv_sqrt_deg[v] * inv_sqrt_deg[u];
                auto hu = cur.row(u);
                for (std::uint32_t k = 0; k < cur.d; ++k) dst[k] += w * hu[k];
            }
        }
        // training rows stay fixed to their originals
        for (NodeId v = 0; v < n; ++v) {
            if (!train_mask[v]) continue;
            auto src = original.row(v);
            auto dst = next.row(v);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        cur.values.swap(next.values);
    }
    if (report) {
        report->method = "feature_propagation";
        report->lambda = 0.0;
        report->delay = 0;
        fill_coverage(bfs_hops_from_set(g_full, sources), report, iterations);
    }
    return cur;
}

EmbeddingMatrix matmul_extend(const EmbeddingMatrix& emb_train, const Graph& g_full,
                              const std::vector<NodeId>& sub_to_full,
                              const std::vector<bool>& train_mask, std::uint32_t iterations,
                              AdjacencyNorm norm, ExtendReport* report) {
    if (iterations < 1) throw ValidationError("matmul_extend: iterations must be >= 1");
    const NodeId n = g_full.num_nodes();
    const auto sources = train_nodes_of(train_mask);

    EmbeddingMatrix cur = scatter_to_full(emb_train, n, sub_to_full);
    EmbeddingMatrix next(n, cur.d);

    std::vector<float> inv_sqrt_deg(n, 0.0f);
    for (NodeId v = 0; v < n; ++v)
        if (g_full.degree(v) > 0)
            inv_sqrt_deg[v] = 1.0f / std::sqrt(static_cast<float>(g_full.degree(v)));

    for (std::uint32_t t = 0; t < iterations; ++t) {
        for (NodeId v = 0; v < n; ++v) {
            auto dst = next.row(v);
            std::fill(dst.begin(), dst.end(), 0.0f);
            const std::size_t deg = g_full.degree(v);
            if (deg == 0) { // no mass in or out of an isolated node
                auto src = cur.row(v);
                std::copy(src.begin(), src.end(), dst.begin());
                continue;
            }
            for (NodeId u : g_full.neighbors(v)) {
                float w = 1.0f;
                switch (norm) {
                    case AdjacencyNorm::Raw: w = 1.0f; break;
                    case AdjacencyNorm::Row: w = 1.0f / static_cast<float>(deg); break;
                    case AdjacencyNorm::Sym: w = inv_sqrt_deg[v] * inv_sqrt_deg[u]; break;
                }
                auto hu = cur.row(u);
                for (std::uint32_t k = 0; k < cur.d; ++k) dst[k] += w * hu[k];
            }
        }
        cur.values.swap(next.values);
    }
    if (report) {
        report->method = "matmul";
        report->lambda = 0.0;
        report->delay = 0;
        fill_coverage(bfs_hops_from_set(g_full, sources), report, iterations);
    }
    return cur;
}

} // namespace in2v
