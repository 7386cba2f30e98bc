#include "in2v/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "in2v/errors.hpp"

namespace in2v {

Graph Graph::from_edges(NodeId num_nodes,
                        const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::vector<std::vector<NodeId>> adj(num_nodes);
    for (auto [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes)
            throw ValidationError("edge endpoint out of range");
        adj[u].push_back(v);
        if (u != v) adj[v].push_back(u);
    }
    Graph g;
    g.num_nodes_ = num_nodes;
    g.offsets_.assign(1, 0);
    g.offsets_.reserve(num_nodes + 1);
    for (NodeId v = 0; v < num_nodes; ++v) {
        auto& lst = adj[v];
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
        g.neighbors_.insert(g.neighbors_.end(), lst.begin(), lst.end());
        g.offsets_.push_back(g.neighbors_.size());
    }
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto ns = neighbors(u);
    return std::binary_search(ns.begin(), ns.end(), v);
}

namespace {

long long parse_id(std::string_view tok, std::size_t line_no) {
    long long id = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("malformed node id '" + std::string(tok) + "' at line " +
                         std::to_string(line_no));
    if (id < 0)
        throw ValidationError("negative node id at line " + std::to_string(line_no));
    return id;
}

} // namespace

Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge file: " + path);

    std::vector<std::pair<NodeId, NodeId>> edges;
    long long declared_nodes = -1;
    long long max_id = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') {
            std::istringstream hs(line.substr(start + 1));
            std::string key;
            long long n;
            if (hs >> key >> n && key == "nodes") declared_nodes = n;
            continue;
        }
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra))
            throw ParseError("malformed edge line " + std::to_string(line_no) +
                             ": '" + line + "'");
        long long u = parse_id(a, line_no);
        long long v = parse_id(b, line_no);
        max_id = std::max({max_id, u, v});
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    long long n = max_id + 1;
    if (declared_nodes >= 0) {
        if (declared_nodes < n)
            throw ValidationError("#nodes header " + std::to_string(declared_nodes) +
                                  " is smaller than max id + 1 = " + std::to_string(n));
        n = declared_nodes;
    }
    if (n <= 0) throw ValidationError("edge file contains no nodes: " + path);
    return Graph::from_edges(static_cast<NodeId>(n), edges);
}

NodeLabels load_labels(const std::string& path, NodeId num_nodes) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open labels file: " + path);
    NodeLabels out;
    out.labels.assign(num_nodes, -1);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long id, lab;
        if (!(ls >> id >> lab))
            throw ParseError("malformed label line " + std::to_string(line_no));
        if (id < 0 || id >= static_cast<long long>(num_nodes))
            throw ValidationError("label node id out of range at line " +
                                  std::to_string(line_no));
        if (lab < 0)
            throw ValidationError("negative label at line " + std::to_string(line_no));
        out.labels[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(lab);
        out.num_classes = std::max(out.num_classes, static_cast<std::int32_t>(lab) + 1);
    }
    for (NodeId v = 0; v < num_nodes; ++v)
        if (out.labels[v] < 0)
            throw ValidationError("node " + std::to_string(v) + " has no label");
    return out;
}

FeatureMatrix load_features(const std::string& path, NodeId num_nodes) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open features file: " + path);
    FeatureMatrix out;
    out.rows = num_nodes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long id;
        std::string rest;
        if (!(ls >> id >> rest))
            throw ParseError("malformed feature line " + std::to_string(line_no));
        if (id < 0 || id >= static_cast<long long>(num_nodes))
            throw ValidationError("feature node id out of range at line " +
                                  std::to_string(line_no));
        std::vector<float> row;
        std::stringstream vs(rest);
        std::string tok;
        while (std::getline(vs, tok, ',')) {
            float f = std::stof(tok);
            if (!std::isfinite(f))
                throw ValidationError("non-finite feature at line " + std::to_string(line_no));
            row.push_back(f);
        }
        if (out.dim == 0) {
            out.dim = row.size();
            out.values.assign(out.rows * out.dim, 0.0f);
        } else if (row.size() != out.dim) {
            throw ParseError("inconsistent feature width at line " + std::to_string(line_no));
        }
        std::copy(row.begin(), row.end(),
                  out.values.begin() + static_cast<std::size_t>(id) * out.dim);
    }
    return out;
}

std::pair<Graph, SubgraphMapping> induced_subgraph(const Graph& g,
                                                   const std::vector<NodeId>& keep) {
    if (keep.empty()) throw ValidationError("induced_subgraph: empty node set");
    SubgraphMapping m;
    m.sub_to_full = keep;
    std::sort(m.sub_to_full.begin(), m.sub_to_full.end());
    m.sub_to_full.erase(std::unique(m.sub_to_full.begin(), m.sub_to_full.end()),
                        m.sub_to_full.end());
    for (NodeId i = 0; i < m.sub_to_full.size(); ++i) {
        if (m.sub_to_full[i] >= g.num_nodes())
            throw ValidationError("induced_subgraph: node out of range");
        m.full_to_sub[m.sub_to_full[i]] = i;
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < m.sub_to_full.size(); ++i) {
        NodeId u = m.sub_to_full[i];
        for (NodeId w : g.neighbors(u)) {
            if (w < u) continue; // each undirected edge once
            auto it = m.full_to_sub.find(w);
            if (it != m.full_to_sub.end()) edges.emplace_back(i, it->second);
        }
    }
    return {Graph::from_edges(static_cast<NodeId>(m.sub_to_full.size()), edges),
            std::move(m)};
}

std::vector<NodeId> bfs_hops_from_set(const Graph& g, const std::vector<NodeId>& sources) {
    if (sources.empty()) throw ValidationError("bfs_hops_from_set: empty source set");
    std::vector<NodeId> dist(g.num_nodes(), kUnreachable);
    std::deque<NodeId> queue;
    for (NodeId s : sources) {
        if (s >= g.num_nodes()) throw ValidationError("bfs source out of range");
        if (dist[s] != 0) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId w : g.neighbors(v)) {
            if (dist[w] == kUnreachable) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

double adjusted_homophily(const Graph& g, const NodeLabels& y) {
    if (g.directed_edge_count() == 0)
        throw DegenerateInputError("adjusted_homophily: graph has no edges");
    const double two_e = static_cast<double>(g.directed_edge_count());
    std::vector<double> class_degree(y.num_classes, 0.0);
    double same = 0.0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        class_degree[y.labels[v]] += static_cast<double>(g.degree(v));
        for (NodeId w : g.neighbors(v))
            if (y.labels[v] == y.labels[w]) same += 1.0;
    }
    double h_edge = same / two_e;
    double sum_sq = 0.0;
    for (double cd : class_degree) {
        double frac = cd / two_e;
        sum_sq += frac * frac;
    }
    if (1.0 - sum_sq <= 0.0)
        throw DegenerateInputError("adjusted_homophily: single effective class");
    return (h_edge - sum_sq) / (1.0 - sum_sq);
}

} // namespace in2v
