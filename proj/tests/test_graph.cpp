#include <doctest.h>

#include <deque>
#include <sstream>

#include "rcr/graph.hpp"
#include "rcr/rng.hpp"

using namespace rcr;

namespace {

Graph path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph(n, std::move(edges), "P" + std::to_string(n));
}

// Two triangles sharing vertex 2.
Graph bowtie() {
    return Graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}}, "bowtie");
}

VertexSet make_set(int n, std::initializer_list<int> members) {
    VertexSet s(n);
    for (int v : members) s.set(v);
    return s;
}

// Independent single-source BFS used to cross-check the distance matrix.
std::vector<int> bfs_from(const Graph& g, int src) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::deque<int> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int w : g.neighbors(v))
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
    }
    return dist;
}

Graph random_connected_graph(int n, double edge_prob, RandomStream& rng) {
    while (true) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(edge_prob)) edges.emplace_back(i, j);
        try {
            return Graph(n, std::move(edges), "random");
        } catch (const std::invalid_argument&) {
            continue;  // disconnected draw, retry
        }
    }
}

}  // namespace

TEST_CASE("vertex set basics") {
    VertexSet s(130);
    CHECK(s.empty());
    s.set(0);
    s.set(64);
    s.set(129);
    CHECK(s.count() == 3);
    CHECK(s.first() == 0);
    CHECK(s.next_after(0) == 64);
    CHECK(s.next_after(64) == 129);
    CHECK(s.next_after(129) == -1);
    VertexSet t = ~s;
    CHECK(t.count() == 127);
    CHECK(!t.intersects(s));
    CHECK((t | s) == VertexSet::full(130));
    CHECK(make_set(130, {0, 64}).is_subset_of(s));
}

TEST_CASE("grid construction") {
    Graph g1 = Graph::grid(1, 1);
    CHECK(g1.vertex_count() == 1);
    CHECK(g1.edge_count() == 0);

    Graph g2 = Graph::grid(2, 2);
    CHECK(g2.vertex_count() == 4);
    CHECK(g2.edge_count() == 4);

    Graph g5 = Graph::grid(5, 5);
    CHECK(g5.vertex_count() == 25);
    CHECK(g5.edge_count() == 40);
    // Row-major ids: vertex 7 is row 1, col 2; neighbours differ by 1 or 5.
    CHECK(g5.neighbors(7) == std::vector<int>{2, 6, 8, 12});

    CHECK_THROWS_AS(Graph::grid(0, 3), std::invalid_argument);
}

TEST_CASE("edge list parsing") {
    std::istringstream ok("3 2\n0 1\n1 2\n");
    Graph g = Graph::parse_edge_list(ok, "p3");
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 2);

    std::istringstream with_comment("# header\n3 2\n0 1\n# middle\n1 2\n");
    CHECK(Graph::parse_edge_list(with_comment, "c").edge_count() == 2);

    std::istringstream loop("2 1\n0 0\n");
    CHECK_THROWS_WITH_AS(Graph::parse_edge_list(loop, "l"),
                         doctest::Contains("line 2"), std::invalid_argument);

    std::istringstream disconnected("4 2\n0 1\n2 3\n");
    CHECK_THROWS_WITH_AS(Graph::parse_edge_list(disconnected, "d"),
                         doctest::Contains("disconnected"), std::invalid_argument);

    std::istringstream out_of_range("2 1\n0 5\n");
    CHECK_THROWS_AS(Graph::parse_edge_list(out_of_range, "r"), std::invalid_argument);

    std::istringstream duplicate("3 3\n0 1\n1 2\n1 0\n");
    CHECK_THROWS_WITH_AS(Graph::parse_edge_list(duplicate, "dup"),
                         doctest::Contains("duplicate"), std::invalid_argument);

    std::istringstream malformed("3 2\n0 x\n1 2\n");
    CHECK_THROWS_AS(Graph::parse_edge_list(malformed, "m"), std::invalid_argument);
}

TEST_CASE("distances") {
    Graph p3 = path_graph(3);
    DistanceMatrix dm = all_pairs_distances(p3);
    CHECK(dm(0, 2) == 2);
    CHECK(dm(1, 1) == 0);
    CHECK(dm(0, 1) == 1);
    CHECK(dm.diameter() == 2);

    Graph p5 = path_graph(5);
    DistanceMatrix dm5 = all_pairs_distances(p5);
    CHECK(dm5.distance_to_set(4, make_set(5, {0, 3})) == 1);
    CHECK(dm5.distance_to_set(3, make_set(5, {0, 3})) == 0);
    CHECK(dm5.distance_to_set(2, VertexSet(5)) == DistanceMatrix::kInfinity);
}

TEST_CASE("distance matrix equals independent bfs on random graphs") {
    RandomStream rng(20240801);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_connected_graph(9, 0.3, rng);
        DistanceMatrix dm = all_pairs_distances(g);
        for (int v = 0; v < g.vertex_count(); ++v) {
            auto row = bfs_from(g, v);
            for (int w = 0; w < g.vertex_count(); ++w) REQUIRE(dm(v, w) == row[w]);
        }
    }
}

TEST_CASE("induced connectivity") {
    Graph p3 = path_graph(3);
    CHECK_FALSE(is_connected_induced(p3, make_set(3, {0, 2})));
    CHECK(is_connected_induced(p3, make_set(3, {1})));
    CHECK_FALSE(is_connected_induced(p3, VertexSet(3)));
    CHECK(is_connected_induced(Graph::grid(2, 2), VertexSet::full(4)));
}

TEST_CASE("reach_within") {
    Graph p4 = path_graph(4);
    CHECK(reach_within(p4, make_set(4, {0, 1, 3}), 0) == make_set(4, {0, 1}));
    CHECK(reach_within(p4, make_set(4, {2}), 2) == make_set(4, {2}));
    CHECK(reach_within(p4, VertexSet::full(4), 1) == VertexSet::full(4));
    CHECK_THROWS_AS(reach_within(p4, make_set(4, {0, 1}), 3), std::invalid_argument);
}

TEST_CASE("connectivity equivalence with reach_within") {
    RandomStream rng(7);
    Graph g = Graph::grid(3, 3);
    for (int trial = 0; trial < 500; ++trial) {
        VertexSet s(9);
        for (int v = 0; v < 9; ++v)
            if (rng.bernoulli(0.5)) s.set(v);
        bool expected = !s.empty() && reach_within(g, s, s.first()) == s;
        CHECK(is_connected_induced(g, s) == expected);
    }
}

TEST_CASE("connected components") {
    Graph p4 = path_graph(4);
    auto comps = connected_components(p4, make_set(4, {0, 1, 3}));
    REQUIRE(comps.size() == 2);
    CHECK(comps[0] == make_set(4, {0, 1}));
    CHECK(comps[1] == make_set(4, {3}));
    CHECK(connected_components(p4, VertexSet(4)).empty());

    Graph p5 = path_graph(5);
    auto comps5 = connected_components(p5, make_set(5, {0, 1, 3, 4}));
    REQUIRE(comps5.size() == 2);
    CHECK(comps5[0] == make_set(5, {0, 1}));
    CHECK(comps5[1] == make_set(5, {3, 4}));
}

TEST_CASE("cut vertices") {
    Graph p3 = path_graph(3);
    CHECK(cut_vertices(p3, VertexSet::full(3)) == make_set(3, {1}));

    Graph c4 = Graph::grid(2, 2);
    CHECK(cut_vertices(c4, VertexSet::full(4)).empty());

    Graph p5 = path_graph(5);
    CHECK(cut_vertices(p5, VertexSet::full(5)) == make_set(5, {1, 2, 3}));
    CHECK(cut_vertices(p5, make_set(5, {1, 2})).empty());
    CHECK(cut_vertices(p5, make_set(5, {2})).empty());
    CHECK_THROWS_AS(cut_vertices(p5, make_set(5, {0, 2})), std::invalid_argument);
}

TEST_CASE("cut vertex definition cross-check") {
    // v is a cut vertex iff removing it splits the induced subgraph.
    RandomStream rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        Graph g = random_connected_graph(8, 0.35, rng);
        VertexSet s(8);
        for (int v = 0; v < 8; ++v)
            if (rng.bernoulli(0.8)) s.set(v);
        if (!is_connected_induced(g, s)) continue;
        VertexSet cut = cut_vertices(g, s);
        for (int v = s.first(); v >= 0; v = s.next_after(v)) {
            VertexSet rest = s;
            rest.reset(v);
            bool splits = connected_components(g, rest).size() >= 2;
            CHECK(cut.test(v) == splits);
        }
    }
}

TEST_CASE("biconnected components") {
    Graph p3 = path_graph(3);
    auto blocks = biconnected_components(p3, VertexSet::full(3));
    REQUIRE(blocks.size() == 2);
    CHECK(((blocks[0] == make_set(3, {0, 1}) && blocks[1] == make_set(3, {1, 2})) ||
           (blocks[0] == make_set(3, {1, 2}) && blocks[1] == make_set(3, {0, 1}))));

    Graph c4 = Graph::grid(2, 2);
    auto cycle_blocks = biconnected_components(c4, VertexSet::full(4));
    REQUIRE(cycle_blocks.size() == 1);
    CHECK(cycle_blocks[0] == VertexSet::full(4));

    Graph bt = bowtie();
    auto bt_blocks = biconnected_components(bt, VertexSet::full(5));
    REQUIRE(bt_blocks.size() == 2);
    VertexSet left = make_set(5, {0, 1, 2});
    VertexSet right = make_set(5, {2, 3, 4});
    CHECK(((bt_blocks[0] == left && bt_blocks[1] == right) ||
           (bt_blocks[0] == right && bt_blocks[1] == left)));

    CHECK_THROWS_AS(biconnected_components(p3, make_set(3, {1})), std::invalid_argument);
}

TEST_CASE("biconnected component structure on random graphs") {
    RandomStream rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        Graph g = random_connected_graph(9, 0.3, rng);
        VertexSet all = VertexSet::full(9);
        auto blocks = biconnected_components(g, all);
        VertexSet cut = cut_vertices(g, all);

        VertexSet covered(9);
        for (const auto& b : blocks) covered |= b;
        CHECK(covered == all);

        for (std::size_t i = 0; i < blocks.size(); ++i) {
            for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                VertexSet shared = blocks[i] & blocks[j];
                CHECK(shared.count() <= 1);
                for (int v = shared.first(); v >= 0; v = shared.next_after(v))
                    CHECK(cut.test(v));
            }
        }
    }
}
