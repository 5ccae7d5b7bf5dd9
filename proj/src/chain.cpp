#include "rcr/chain.hpp"

#include <algorithm>
#include <cmath>

#include "rcr/common.hpp"

namespace rcr {

namespace {

// Shared scan skeleton. Walks vertices in increasing order; a vertex is a
// candidate while its distance to the chosen set exceeds R - r. Candidates
// are resolved through `state_of`, which may reveal fresh Bernoulli draws.
// Appending a vertex only shrinks distances of later vertices, so a single
// ascending pass visits exactly the candidates of the iterative definition.
template <typename StateFn>
SubsetValue scan_subset(const Graph& g, const DistanceMatrix& dm, int R, int r,
                        StateFn&& state_of) {
    const int n = g.vertex_count();
    const int radius = R - r;
    SubsetValue chosen;
    std::vector<int> dist_to_chosen(n, DistanceMatrix::kInfinity);
    for (int v = 0; v < n; ++v) {
        if (dist_to_chosen[v] <= radius) continue;
        if (!state_of(v)) continue;
        chosen.push_back(v);
        for (int w = v + 1; w < n; ++w)
            dist_to_chosen[w] = std::min(dist_to_chosen[w], dm(v, w));
    }
    return chosen;
}

double pow_prob(double p, int k) {
    if (k == 0) return 1.0;
    if (k > 1000) return std::exp(k * std::log(p));
    return std::pow(p, k);
}

// Finishes a level transition: everything outside the upper bound of the
// fresh scan value is down from here on.
void close_level(const Graph& g, const DistanceMatrix& dm, Particle& pt,
                 const SubsetValue& l, int r) {
    VertexSet up = up_set(g, dm, l, pt.max_radius, r);
    detail::require_state(pt.known_up.is_subset_of(up),
                          "particle: known-up vertex escaped the upper bound");
    pt.known_down |= ~up;
    detail::require_state(!pt.known_up.intersects(pt.known_down),
                          "particle: up/down overlap after level close");
}

}  // namespace

SubsetValue generate_subset(const Graph& g, const DistanceMatrix& dm,
                            const VertexSet& x, int R, int r) {
    detail::require_arg(0 <= r && r <= R, "generate_subset: radius out of range");
    return scan_subset(g, dm, R, r, [&x](int v) { return x.test(v); });
}

VertexSet up_set(const Graph& g, const DistanceMatrix& dm,
                 const SubsetValue& l, int R, int r) {
    const int n = g.vertex_count();
    const int radius = R - r;
    VertexSet out(n);
    for (int x : l) {
        for (int w = x; w < n; ++w)
            if (dm(x, w) <= radius) out.set(w);
    }
    return out;
}

VertexSet possible_set(const Graph& g, const DistanceMatrix& dm,
                       const VertexSet& d, int R, int r) {
    VertexSet acc = VertexSet::full(g.vertex_count());
    for (int s = 0; s <= r; ++s)
        acc &= up_set(g, dm, generate_subset(g, dm, d, R, s), R, s);
    return acc;
}

double subset_probability(const Graph& g, const DistanceMatrix& dm,
                          const SubsetValue& l, int R, int r, double p) {
    const int n = g.vertex_count();
    const int ups = static_cast<int>(l.size());
    const int downs = n - up_set(g, dm, l, R, r).count();
    if (p <= 0.0) return ups == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return downs == 0 ? 1.0 : 0.0;
    if (ups + downs > 1000)
        return std::exp(ups * std::log(p) + downs * std::log1p(-p));
    return pow_prob(p, ups) * pow_prob(1.0 - p, downs);
}

Particle init_particle(const Graph& g, const DistanceMatrix& dm, int R, double p,
                       RandomStream& rng) {
    detail::require_arg(p > 0.0 && p < 1.0, "init_particle: p must lie in (0,1)");
    detail::require_arg(R >= 1, "init_particle: max radius must be positive");
    const int n = g.vertex_count();
    Particle pt{VertexSet(n), VertexSet(n), 0, R, 1.0, false};
    SubsetValue l = scan_subset(g, dm, R, 0, [&](int v) {
        bool up = rng.bernoulli(p);
        if (up)
            pt.known_up.set(v);
        else
            pt.known_down.set(v);
        return up;
    });
    close_level(g, dm, pt, l, 0);
    pt.alive = !pt.known_up.empty();
    return pt;
}

void advance_particle(const Graph& g, const DistanceMatrix& dm, Particle& pt,
                      double p, const VertexSet& forced_up, RandomStream& rng) {
    detail::require_state(pt.alive, "advance_particle: particle is dead");
    detail::require_state(pt.level < pt.max_radius,
                          "advance_particle: already at the last level");
    detail::require_arg(!forced_up.intersects(pt.known_down),
                        "advance_particle: forced vertex is known down");

    const int newly_forced = (forced_up - pt.known_up).count();
    pt.known_up |= forced_up;
    pt.weight *= pow_prob(p, newly_forced);

    const int r = pt.level + 1;
    SubsetValue l = scan_subset(g, dm, pt.max_radius, r, [&](int v) {
        if (pt.known_up.test(v)) return true;
        if (pt.known_down.test(v)) return false;
        bool up = rng.bernoulli(p);
        if (up)
            pt.known_up.set(v);
        else
            pt.known_down.set(v);
        return up;
    });
    close_level(g, dm, pt, l, r);
    pt.level = r;
}

bool is_feasible(const Graph& g, const Particle& pt) {
    if (pt.known_up.empty()) return false;
    VertexSet possible = ~pt.known_down;
    return reach_within(g, possible, pt.known_up.first()).contains_all(pt.known_up);
}

VertexSet required_cut_set(const Graph& g, const Particle& pt, CutMode mode) {
    const int n = g.vertex_count();
    detail::require_state(pt.alive && !pt.known_up.empty(),
                          "required_cut_set: dead particle");
    VertexSet possible = ~pt.known_down;
    VertexSet comp = reach_within(g, possible, pt.known_up.first());
    detail::require_state(comp.contains_all(pt.known_up),
                          "required_cut_set: possible set disconnected across known_up");
    if (comp.count() < 2) return VertexSet(n);

    // Work on the component holding known_up; other fragments of the
    // possible set cannot take part in any connected completion.
    VertexSet cut = cut_vertices(g, comp);
    if (mode == CutMode::all) return cut;

    VertexSet out(n);
    for (int c = cut.first(); c >= 0; c = cut.next_after(c)) {
        VertexSet rest = comp;
        rest.reset(c);
        int hits = 0;
        for (const VertexSet& piece : connected_components(g, rest)) {
            if (piece.intersects(pt.known_up) && ++hits >= 2) break;
        }
        if (hits >= 2) out.set(c);
    }
    return out;
}

}  // namespace rcr
