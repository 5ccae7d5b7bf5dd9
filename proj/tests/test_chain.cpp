#include <doctest.h>

#include <cmath>
#include <map>
#include <unordered_map>

#include "rcr/chain.hpp"
#include "rcr/graph.hpp"
#include "rcr/rng.hpp"

using namespace rcr;

namespace {

Graph path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph(n, std::move(edges), "P" + std::to_string(n));
}

VertexSet make_set(int n, std::initializer_list<int> members) {
    VertexSet s(n);
    for (int v : members) s.set(v);
    return s;
}

VertexSet from_subset_value(int n, const SubsetValue& l) {
    VertexSet s(n);
    for (int v : l) s.set(v);
    return s;
}

VertexSet from_mask(int n, unsigned mask) {
    VertexSet s(n);
    for (int v = 0; v < n; ++v)
        if (mask >> v & 1) s.set(v);
    return s;
}

Particle make_particle(const VertexSet& up, const VertexSet& down, int level, int R) {
    return Particle{up, down, level, R, 1.0, true};
}

}  // namespace

TEST_CASE("generate_subset") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);

    CHECK(generate_subset(p5, dm, VertexSet(5), 2, 0).empty());

    // r = R degenerates to the identity on the up set.
    VertexSet x = make_set(5, {0, 1, 3, 4});
    CHECK(generate_subset(p5, dm, x, 2, 2) == SubsetValue{0, 1, 3, 4});

    // Hand trace: 3 is the first vertex past 0 at distance > 2; 4 is within
    // distance 1 of 3 and is skipped.
    CHECK(generate_subset(p5, dm, x, 2, 0) == SubsetValue{0, 3});
}

TEST_CASE("up_set") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);

    CHECK(up_set(p5, dm, SubsetValue{}, 2, 0).empty());
    CHECK(up_set(p5, dm, SubsetValue{0, 3}, 2, 0) == VertexSet::full(5));

    // Radius-0 balls: the up set is the subset itself.
    SubsetValue l{0, 2, 4};
    CHECK(up_set(p5, dm, l, 3, 3) == make_set(5, {0, 2, 4}));
}

TEST_CASE("possible_set") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);

    CHECK(possible_set(p5, dm, VertexSet(5), 2, 1).empty());
    CHECK(possible_set(p5, dm, make_set(5, {0, 3}), 2, 0) == VertexSet::full(5));

    VertexSet x = make_set(5, {0, 2, 4});
    CHECK(possible_set(p5, dm, x, 3, 3) == x);
}

TEST_CASE("subset_probability basics") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);

    CHECK(subset_probability(p5, dm, SubsetValue{0, 3}, 2, 0, 0.5) == doctest::Approx(0.25));

    // p = 1 is the indicator of a full up-set.
    CHECK(subset_probability(p5, dm, SubsetValue{0, 3}, 2, 0, 1.0) == 1.0);
    CHECK(subset_probability(p5, dm, SubsetValue{0}, 2, 0, 1.0) == 0.0);
}

TEST_CASE("subset_probability equals the sum over generating configurations") {
    Graph g = Graph::grid(3, 3);
    DistanceMatrix dm = all_pairs_distances(g);
    const int R = 2;
    for (double p : {0.5, 0.3}) {
        for (int r = 0; r <= R; ++r) {
            std::map<std::vector<int>, double> totals;
            for (unsigned mask = 0; mask < 512; ++mask) {
                VertexSet x = from_mask(9, mask);
                SubsetValue l = generate_subset(g, dm, x, R, r);
                int ups = x.count();
                totals[l] += std::pow(p, ups) * std::pow(1.0 - p, 9 - ups);
            }
            for (const auto& [l, total] : totals) {
                if (l.empty()) continue;
                CHECK(subset_probability(g, dm, l, R, r, p) ==
                      doctest::Approx(total).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("init_particle limits") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);

    // All draws down: dead particle.
    RandomStream rng_dead(1);
    Particle dead = init_particle(p5, dm, 2, 1e-12, rng_dead);
    CHECK_FALSE(dead.alive);
    CHECK(dead.known_up.empty());
    CHECK(dead.known_down == VertexSet::full(5));

    // p -> 1: the scan is deterministic.
    RandomStream rng_up(2);
    Particle up = init_particle(p5, dm, 2, 1.0 - 1e-12, rng_up);
    CHECK(up.alive);
    CHECK(up.known_up ==
          from_subset_value(5, generate_subset(p5, dm, VertexSet::full(5), 2, 0)));
    CHECK(up.level == 0);
    CHECK(up.weight == 1.0);
}

TEST_CASE("init_particle frequency matches the subset probability") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);
    const int trials = 100000;
    RandomStream rng(20240802);
    VertexSet target = make_set(5, {0, 3});
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
        Particle pt = init_particle(p5, dm, 2, 0.5, rng);
        if (pt.known_up == target) ++hits;
    }
    double freq = static_cast<double>(hits) / trials;
    double sigma = std::sqrt(0.25 * 0.75 / trials);
    CHECK(std::abs(freq - 0.25) <= 3 * sigma);
}

TEST_CASE("advance_particle on a fully determined particle") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);
    Particle pt = make_particle(make_set(5, {0, 1}), make_set(5, {2, 3, 4}), 1, 2);
    RandomStream rng(3);
    advance_particle(p5, dm, pt, 0.5, VertexSet(5), rng);
    CHECK(pt.level == 2);
    CHECK(pt.known_up == make_set(5, {0, 1}));
    CHECK(pt.known_down == make_set(5, {2, 3, 4}));
    CHECK(pt.weight == 1.0);
}

TEST_CASE("advance_particle errors") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);
    RandomStream rng(4);

    Particle dead{VertexSet(5), VertexSet::full(5), 0, 2, 1.0, false};
    CHECK_THROWS_AS(advance_particle(p5, dm, dead, 0.5, VertexSet(5), rng),
                    std::logic_error);

    Particle done = make_particle(make_set(5, {0}), make_set(5, {1, 2, 3, 4}), 2, 2);
    CHECK_THROWS_AS(advance_particle(p5, dm, done, 0.5, VertexSet(5), rng),
                    std::logic_error);

    Particle pt = make_particle(make_set(5, {0}), make_set(5, {4}), 0, 2);
    CHECK_THROWS_AS(advance_particle(p5, dm, pt, 0.5, make_set(5, {4}), rng),
                    std::invalid_argument);
}

TEST_CASE("advance_particle transition law matches brute-force conditioning") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);
    const double p = 0.5;
    const int R = 1;

    // d_0 = {0,2}: possible completions add any subset of {1,3}.
    VertexSet d0 = make_set(5, {0, 2});
    VertexSet p0 = up_set(p5, dm, SubsetValue{0, 2}, R, 0);
    REQUIRE(p0 == make_set(5, {0, 1, 2, 3}));

    std::map<std::string, double> expected;  // known_up -> probability
    for (unsigned mask = 0; mask < 4; ++mask) {
        VertexSet x = d0;
        if (mask & 1) x.set(1);
        if (mask & 2) x.set(3);
        int extra = (mask & 1 ? 1 : 0) + (mask & 2 ? 1 : 0);
        expected[x.to_string()] += std::pow(p, extra) * std::pow(1 - p, 2 - extra);
    }

    const int trials = 100000;
    RandomStream rng(20240803);
    std::map<std::string, int> observed;
    for (int i = 0; i < trials; ++i) {
        Particle pt = make_particle(d0, ~p0, 0, R);
        advance_particle(p5, dm, pt, p, VertexSet(5), rng);
        CHECK(pt.level == 1);
        ++observed[pt.known_up.to_string()];
    }
    REQUIRE(observed.size() == expected.size());
    for (const auto& [key, prob] : expected) {
        double sigma = std::sqrt(prob * (1 - prob) * trials);
        CHECK(std::abs(observed[key] - prob * trials) <= 4 * sigma);
    }
}

TEST_CASE("advance_particle applies forced-up weights") {
    Graph p5 = path_graph(5);
    DistanceMatrix dm = all_pairs_distances(p5);
    RandomStream rng(5);
    Particle pt = make_particle(make_set(5, {0, 2}),
                                ~up_set(p5, dm, SubsetValue{0, 2}, 1, 0), 0, 1);
    advance_particle(p5, dm, pt, 0.25, make_set(5, {1, 2}), rng);  // 1 is new, 2 known
    CHECK(pt.weight == doctest::Approx(0.25));
    CHECK(pt.known_up.test(1));
}

TEST_CASE("is_feasible") {
    Graph p3 = path_graph(3);
    CHECK(is_feasible(p3, make_particle(make_set(3, {0, 2}), VertexSet(3), 0, 2)));
    CHECK_FALSE(is_feasible(p3, make_particle(make_set(3, {0, 2}), make_set(3, {1}), 0, 2)));
    CHECK_FALSE(is_feasible(p3, Particle{VertexSet(3), VertexSet(3), 0, 2, 1.0, false}));
}

TEST_CASE("required_cut_set") {
    Graph p5 = path_graph(5);

    Particle ends = make_particle(make_set(5, {0, 4}), VertexSet(5), 1, 3);
    CHECK(required_cut_set(p5, ends, CutMode::separating) == make_set(5, {1, 2, 3}));
    CHECK(required_cut_set(p5, ends, CutMode::all) == make_set(5, {1, 2, 3}));

    Graph c4 = Graph::grid(2, 2);
    Particle on_cycle = make_particle(make_set(4, {0, 3}), VertexSet(4), 1, 3);
    CHECK(required_cut_set(c4, on_cycle, CutMode::all).empty());
    CHECK(required_cut_set(c4, on_cycle, CutMode::separating).empty());

    Particle tail = make_particle(make_set(5, {3, 4}), VertexSet(5), 1, 3);
    CHECK(required_cut_set(p5, tail, CutMode::separating).empty());
    CHECK(required_cut_set(p5, tail, CutMode::all) == make_set(5, {1, 2, 3}));

    Particle split_up = make_particle(make_set(5, {0, 2}), make_set(5, {1}), 1, 3);
    CHECK_THROWS_AS(required_cut_set(p5, split_up, CutMode::all), std::logic_error);
}

TEST_CASE("chain properties on the 5x5 grid") {
    Graph g = Graph::grid(5, 5);
    DistanceMatrix dm = all_pairs_distances(g);
    const int n = 25;
    RandomStream rng(20240804);

    for (int trial = 0; trial < 500; ++trial) {
        VertexSet x(n);
        double p = 0.2 + 0.6 * rng.next_double();
        for (int v = 0; v < n; ++v)
            if (rng.bernoulli(p)) x.set(v);

        for (int R : {1, 2, 3}) {
            VertexSet d(n);  // running union of the scan values
            for (int r = 0; r <= R; ++r) {
                SubsetValue l = generate_subset(g, dm, x, R, r);
                VertexSet ls = from_subset_value(n, l);

                // Sandwich: l <= x <= up_set(l).
                CHECK(ls.is_subset_of(x));
                CHECK(x.is_subset_of(up_set(g, dm, l, R, r)));

                // Minimum preservation.
                if (!x.empty()) CHECK(ls.first() == x.first());

                // Idempotence and subsequence closure.
                CHECK(generate_subset(g, dm, ls, R, r) == l);
                if (l.size() >= 2) {
                    VertexSet sub(n);
                    for (std::size_t i = 0; i < l.size(); ++i)
                        if (rng.bernoulli(0.5)) sub.set(l[i]);
                    SubsetValue sub_l = sub.to_vector();
                    CHECK(generate_subset(g, dm, sub, R, r) == sub_l);
                }

                // Recovery: the definitely-up set reproduces earlier scans.
                d |= ls;
                for (int s = 0; s <= r; ++s)
                    CHECK(generate_subset(g, dm, d, R, s) ==
                          generate_subset(g, dm, x, R, s));
            }
        }
    }
}

TEST_CASE("unconditioned particles recover their possible set") {
    Graph g = Graph::grid(3, 3);
    DistanceMatrix dm = all_pairs_distances(g);
    RandomStream rng(20240805);
    const int R = 3;
    for (int trial = 0; trial < 2000; ++trial) {
        Particle pt = init_particle(g, dm, R, 0.4, rng);
        if (!pt.alive) continue;
        CHECK(possible_set(g, dm, pt.known_up, R, 0) == ~pt.known_down);
        for (int r = 1; r <= R; ++r) {
            advance_particle(g, dm, pt, 0.4, VertexSet(9), rng);
            CHECK(possible_set(g, dm, pt.known_up, R, r) == ~pt.known_down);
        }
        CHECK(~pt.known_down == pt.known_up);  // everything resolved at level R
    }
}
