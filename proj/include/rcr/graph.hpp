#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rcr/vertex_set.hpp"

namespace rcr {

// Connected simple undirected graph with a fixed vertex enumeration.
// Vertex ids double as the total vertex order used by the level process.
class Graph {
public:
    // Validates simplicity (no loops, no parallel edges) and connectivity.
    Graph(int n, std::vector<std::pair<int, int>> edges, std::string name);

    // width x height grid graph, vertices numbered row-major.
    static Graph grid(int width, int height);

    // Edge-list text: first line "n m", then m lines "u v" (0-based).
    // Lines starting with '#' are comments. Errors name the offending line.
    static Graph parse_edge_list(std::istream& in, std::string name);

    int vertex_count() const { return n_; }
    int edge_count() const { return m_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    const std::string& name() const { return name_; }

    VertexSet all_vertices() const { return VertexSet::full(n_); }

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<std::vector<int>> adj_;
    std::string name_;
};

// Hop distances between all vertex pairs, precomputed by BFS from every
// vertex. Immutable after construction and freely shareable across threads.
class DistanceMatrix {
public:
    static constexpr int kInfinity = std::numeric_limits<int>::max();

    DistanceMatrix() = default;
    DistanceMatrix(int n, std::vector<int> dist) : n_(n), dist_(std::move(dist)) {}

    int operator()(int u, int v) const { return dist_[static_cast<std::size_t>(u) * n_ + v]; }

    // min over w in s of d(v, w); kInfinity for the empty set.
    int distance_to_set(int v, const VertexSet& s) const {
        int best = kInfinity;
        for (int w = s.first(); w >= 0; w = s.next_after(w))
            best = std::min(best, (*this)(v, w));
        return best;
    }

    int size() const { return n_; }

    int diameter() const {
        int d = 0;
        for (int v : dist_) d = std::max(d, v);
        return d;
    }

private:
    int n_ = 0;
    std::vector<int> dist_;
};

DistanceMatrix all_pairs_distances(const Graph& g);

// True iff s is nonempty and the subgraph induced by s is connected.
// The empty set counts as disconnected.
bool is_connected_induced(const Graph& g, const VertexSet& s);

// Connected component of `start` inside the subgraph induced by `allowed`.
VertexSet reach_within(const Graph& g, const VertexSet& allowed, int start);

// Maximal connected pieces of the subgraph induced by s.
std::vector<VertexSet> connected_components(const Graph& g, const VertexSet& s);

// Articulation points of the induced subgraph, which must be connected.
// Neither endpoint of a two-vertex graph is a cut vertex.
VertexSet cut_vertices(const Graph& g, const VertexSet& s);

// Vertex sets of the biconnected components of the induced subgraph
// (connected, |s| >= 2). Components may share cut vertices.
std::vector<VertexSet> biconnected_components(const Graph& g, const VertexSet& s);

}  // namespace rcr
