#pragma once

#include <vector>

#include "rcr/graph.hpp"
#include "rcr/rng.hpp"

namespace rcr {

// Value of the lower-bound process at one level: an increasing vertex
// sequence where each entry lies at distance greater than R - r from all
// earlier entries.
using SubsetValue = std::vector<int>;

// Radius-r scan: starting from the smallest member of x, repeatedly append
// the smallest member of x above the current maximum whose distance to the
// chosen set exceeds R - r. Returns the empty sequence for empty x.
SubsetValue generate_subset(const Graph& g, const DistanceMatrix& dm,
                            const VertexSet& x, int R, int r);

// Vertices that could still be up given the level-r scan produced l:
// union over x in l of the closed radius-(R-r) ball around x, cut to [x, n).
VertexSet up_set(const Graph& g, const DistanceMatrix& dm,
                 const SubsetValue& l, int R, int r);

// Intersection of the upper bounds of levels 0..r recovered from the
// definitely-up set d.
VertexSet possible_set(const Graph& g, const DistanceMatrix& dm,
                       const VertexSet& d, int R, int r);

// P(level-r scan of a Bernoulli(p) vertex configuration yields l):
// p^|l| * (1-p)^(n - |up_set(l)|).
double subset_probability(const Graph& g, const DistanceMatrix& dm,
                          const SubsetValue& l, int R, int r, double p);

// Partial knowledge of the vertex states, advanced one radius level at a
// time. known_up and known_down are disjoint; vertices in neither are
// undetermined and are revealed lazily by Bernoulli(p) draws as the scan
// demands them.
struct Particle {
    VertexSet known_up;
    VertexSet known_down;
    int level = 0;
    int max_radius = 0;
    double weight = 1.0;
    bool alive = false;
};

// Simulates the level-0 state. Dead (alive == false) when every scanned
// vertex came up down.
Particle init_particle(const Graph& g, const DistanceMatrix& dm, int R, double p,
                       RandomStream& rng);

// One transition of the level process. forced_up vertices are treated as up
// before the scan and the weight is multiplied by p^|forced_up \ known_up|,
// the probability of the conditioning event. Throws if the particle is dead,
// already at the last level, or forced_up meets known_down.
void advance_particle(const Graph& g, const DistanceMatrix& dm, Particle& particle,
                      double p, const VertexSet& forced_up, RandomStream& rng);

// Whether a connected completion between known_up and the complement of
// known_down still exists: one search from the smallest known-up vertex must
// reach all of known_up. False for empty known_up.
bool is_feasible(const Graph& g, const Particle& particle);

enum class CutMode {
    all,        // every articulation point of the possible set
    separating  // only those splitting the possible set across known_up
};

// Cut vertices of the particle's possible set that any connected completion
// must contain. The result may include vertices already known up; callers
// subtract known_up when computing weights. mode::all is only a sound
// requirement at the second-to-last level.
VertexSet required_cut_set(const Graph& g, const Particle& particle, CutMode mode);

}  // namespace rcr
