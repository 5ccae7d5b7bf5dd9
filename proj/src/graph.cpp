#include "rcr/graph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <set>
#include <sstream>

#include "rcr/common.hpp"

namespace rcr {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges, std::string name)
    : n_(n), adj_(n), name_(std::move(name)) {
    detail::require_arg(n >= 1, "graph: vertex count must be positive");
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
        detail::require_arg(u >= 0 && u < n && v >= 0 && v < n,
                            "graph: edge endpoint out of range");
        detail::require_arg(u != v, "graph: loops are not allowed");
        std::pair<int, int> key{std::min(u, v), std::max(u, v)};
        detail::require_arg(seen.insert(key).second, "graph: duplicate edge");
        adj_[u].push_back(v);
        adj_[v].push_back(u);
        ++m_;
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());

    if (n > 1) {
        VertexSet reached = reach_within(*this, all_vertices(), 0);
        detail::require_arg(reached.count() == n, "graph: input graph is disconnected");
    }
}

Graph Graph::grid(int width, int height) {
    detail::require_arg(width >= 1 && height >= 1, "grid: dimensions must be positive");
    std::vector<std::pair<int, int>> edges;
    auto id = [width](int row, int col) { return row * width + col; };
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            if (col + 1 < width) edges.emplace_back(id(row, col), id(row, col + 1));
            if (row + 1 < height) edges.emplace_back(id(row, col), id(row + 1, col));
        }
    }
    return Graph(width * height,
                 std::move(edges),
                 "grid:" + std::to_string(width) + "x" + std::to_string(height));
}

Graph Graph::parse_edge_list(std::istream& in, std::string name) {
    auto fail = [](int line_no, const std::string& what) {
        throw std::invalid_argument("edge list, line " + std::to_string(line_no) + ": " + what);
    };

    std::string line;
    int line_no = 0;
    auto next_content_line = [&](std::string& out) {
        while (std::getline(in, line)) {
            ++line_no;
            std::size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            out = line;
            return true;
        }
        return false;
    };

    std::string header;
    if (!next_content_line(header)) throw std::invalid_argument("edge list: empty input");
    std::istringstream hs(header);
    long long n = 0, m = 0;
    if (!(hs >> n >> m) || n < 1 || m < 0) fail(line_no, "expected header \"n m\"");

    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(m));
    std::set<std::pair<int, int>> seen;
    for (long long i = 0; i < m; ++i) {
        std::string body;
        if (!next_content_line(body)) fail(line_no, "unexpected end of input, expected edge");
        std::istringstream es(body);
        long long u = -1, v = -1;
        std::string trailing;
        if (!(es >> u >> v) || (es >> trailing)) fail(line_no, "expected edge \"u v\"");
        if (u < 0 || u >= n || v < 0 || v >= n) fail(line_no, "endpoint out of range");
        if (u == v) fail(line_no, "loop edge");
        std::pair<int, int> key{static_cast<int>(std::min(u, v)),
                                static_cast<int>(std::max(u, v))};
        if (!seen.insert(key).second) fail(line_no, "duplicate edge");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    return Graph(static_cast<int>(n), std::move(edges), std::move(name));
}

DistanceMatrix all_pairs_distances(const Graph& g) {
    const int n = g.vertex_count();
    std::vector<int> dist(static_cast<std::size_t>(n) * n, DistanceMatrix::kInfinity);
    std::deque<int> queue;
    for (int src = 0; src < n; ++src) {
        int* row = dist.data() + static_cast<std::size_t>(src) * n;
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int w : g.neighbors(v)) {
                if (row[w] == DistanceMatrix::kInfinity) {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    return DistanceMatrix(n, std::move(dist));
}

VertexSet reach_within(const Graph& g, const VertexSet& allowed, int start) {
    detail::require_arg(start >= 0 && start < g.vertex_count() && allowed.test(start),
                        "reach_within: start vertex not in allowed set");
    VertexSet seen(g.vertex_count());
    seen.set(start);
    std::vector<int> stack{start};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(v)) {
            if (allowed.test(w) && !seen.test(w)) {
                seen.set(w);
                stack.push_back(w);
            }
        }
    }
    return seen;
}

bool is_connected_induced(const Graph& g, const VertexSet& s) {
    int size = s.count();
    if (size == 0) return false;
    return reach_within(g, s, s.first()).count() == size;
}

std::vector<VertexSet> connected_components(const Graph& g, const VertexSet& s) {
    std::vector<VertexSet> out;
    VertexSet remaining = s;
    while (!remaining.empty()) {
        VertexSet comp = reach_within(g, remaining, remaining.first());
        out.push_back(comp);
        remaining -= comp;
    }
    return out;
}

namespace {

// Iterative lowpoint DFS shared by cut_vertices and biconnected_components.
// `sink(u, v)` receives tree/back edges when an edge stack is wanted.
struct LowpointDfs {
    const Graph& g;
    const VertexSet& s;
    std::vector<int> disc, low, parent;
    int timer = 0;

    explicit LowpointDfs(const Graph& graph, const VertexSet& sub)
        : g(graph), s(sub),
          disc(graph.vertex_count(), -1),
          low(graph.vertex_count(), 0),
          parent(graph.vertex_count(), -1) {}
};

}  // namespace

VertexSet cut_vertices(const Graph& g, const VertexSet& s) {
    const int n = g.vertex_count();
    detail::require_arg(s.count() >= 1, "cut_vertices: empty vertex set");
    detail::require_arg(is_connected_induced(g, s),
                        "cut_vertices: induced subgraph must be connected");
    VertexSet out(n);
    if (s.count() <= 2) return out;

    LowpointDfs dfs(g, s);
    const int root = s.first();
    int root_children = 0;
    std::vector<std::pair<int, std::size_t>> stack;
    dfs.disc[root] = dfs.low[root] = dfs.timer++;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        int v = stack.back().first;
        std::size_t i = stack.back().second;
        const auto& nb = g.neighbors(v);
        if (i < nb.size()) {
            ++stack.back().second;
            int w = nb[i];
            if (!s.test(w)) continue;
            if (dfs.disc[w] < 0) {
                dfs.parent[w] = v;
                if (v == root) ++root_children;
                dfs.disc[w] = dfs.low[w] = dfs.timer++;
                stack.emplace_back(w, 0);
            } else if (w != dfs.parent[v]) {
                dfs.low[v] = std::min(dfs.low[v], dfs.disc[w]);
            }
        } else {
            stack.pop_back();
            int u = dfs.parent[v];
            if (u >= 0) {
                dfs.low[u] = std::min(dfs.low[u], dfs.low[v]);
                if (u != root && dfs.low[v] >= dfs.disc[u]) out.set(u);
            }
        }
    }
    if (root_children >= 2) out.set(root);
    return out;
}

std::vector<VertexSet> biconnected_components(const Graph& g, const VertexSet& s) {
    const int n = g.vertex_count();
    detail::require_arg(s.count() >= 2, "biconnected_components: need at least two vertices");
    detail::require_arg(is_connected_induced(g, s),
                        "biconnected_components: induced subgraph must be connected");

    LowpointDfs dfs(g, s);
    const int root = s.first();
    std::vector<VertexSet> out;
    std::vector<std::pair<int, int>> edge_stack;
    std::vector<std::pair<int, std::size_t>> stack;
    dfs.disc[root] = dfs.low[root] = dfs.timer++;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        int v = stack.back().first;
        std::size_t i = stack.back().second;
        const auto& nb = g.neighbors(v);
        if (i < nb.size()) {
            ++stack.back().second;
            int w = nb[i];
            if (!s.test(w)) continue;
            if (dfs.disc[w] < 0) {
                dfs.parent[w] = v;
                edge_stack.emplace_back(v, w);
                dfs.disc[w] = dfs.low[w] = dfs.timer++;
                stack.emplace_back(w, 0);
            } else if (w != dfs.parent[v] && dfs.disc[w] < dfs.disc[v]) {
                edge_stack.emplace_back(v, w);
                dfs.low[v] = std::min(dfs.low[v], dfs.disc[w]);
            }
        } else {
            stack.pop_back();
            int u = dfs.parent[v];
            if (u < 0) continue;
            dfs.low[u] = std::min(dfs.low[u], dfs.low[v]);
            if (dfs.low[v] >= dfs.disc[u]) {
                // Everything above the tree edge (u, v) forms one block.
                VertexSet comp(n);
                while (!edge_stack.empty()) {
                    auto [a, b] = edge_stack.back();
                    edge_stack.pop_back();
                    comp.set(a);
                    comp.set(b);
                    if (a == u && b == v) break;
                }
                out.push_back(comp);
            }
        }
    }
    return out;
}

}  // namespace rcr
