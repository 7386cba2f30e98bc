#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace in2v {

using NodeId = std::uint32_t;

inline constexpr NodeId kUnreachable = std::numeric_limits<NodeId>::max();

// Immutable undirected graph in compressed adjacency (CSR) form.
// Neighbor lists are strictly increasing; adjacency is symmetric.
// A self-loop appears exactly once in its node's list.
class Graph {
public:
    Graph() = default;

    // Builds from an undirected edge list. Each (u,v) yields both directions;
    // duplicates are collapsed; a self-loop is stored once.
    static Graph from_edges(NodeId num_nodes,
                            const std::vector<std::pair<NodeId, NodeId>>& edges);

    NodeId num_nodes() const { return num_nodes_; }
    // Each undirected edge counted twice, self-loops once.
    std::size_t directed_edge_count() const { return neighbors_.size(); }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(NodeId u, NodeId v) const;

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<NodeId>& flat_neighbors() const { return neighbors_; }

private:
    NodeId num_nodes_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> neighbors_;
};

struct NodeLabels {
    std::vector<std::int32_t> labels;
    std::int32_t num_classes = 0;
};

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<float> values; // row-major rows x dim

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

// Mapping between a dense induced subgraph and the full graph.
struct SubgraphMapping {
    std::vector<NodeId> sub_to_full;
    std::unordered_map<NodeId, NodeId> full_to_sub;
};

// Loads a "u v" per-line edge file; "#" comments; optional "#nodes N" header.
Graph load_edge_list(const std::string& path);

// Loads "node_id<TAB>label" lines; num_classes = 1 + max label.
NodeLabels load_labels(const std::string& path, NodeId num_nodes);

// Loads "node_id<TAB>f1,f2,...,fd" lines.
FeatureMatrix load_features(const std::string& path, NodeId num_nodes);

// Subgraph with exactly the edges of g whose endpoints are both kept,
// re-indexed densely in ascending full-id order.
std::pair<Graph, SubgraphMapping> induced_subgraph(const Graph& g,
                                                   const std::vector<NodeId>& keep);

// Multi-source BFS; dist[v] = hops from the nearest source, kUnreachable if none.
std::vector<NodeId> bfs_hops_from_set(const Graph& g, const std::vector<NodeId>& sources);

// Class-imbalance-adjusted edge homophily.
double adjusted_homophily(const Graph& g, const NodeLabels& y);

} // namespace in2v
