#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcr/chain.hpp"
#include "rcr/graph.hpp"
#include "rcr/rng.hpp"

namespace rcr {

enum class Method { crude, cond, rvr, split, sis_basic, sis, sir };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct EstimatorConfig {
    Method method = Method::crude;
    double p = 0.5;
    int R = 1;                 // number of levels for the chain-based methods
    long long N = 100000;      // samples / initial particles
    std::vector<int> factors;  // splitting factors k_0..k_{R-1} (split/sis only)
    std::uint64_t seed = 1;
};

struct EstimateResult {
    double estimate = 0.0;
    long long n_samples = 0;
    double wall_time_s = 0.0;
    std::map<std::string, double> diag;
};

// Plain Monte Carlo over i.i.d. Bernoulli(p) vertex states.
EstimateResult crude_mc(const Graph& g, const DistanceMatrix& dm,
                        const EstimatorConfig& cfg, RandomStream& rng);

// Reveals vertices in random order until the first up vertex, grows its
// component, then integrates out the untouched vertices analytically.
EstimateResult conditional_mc(const Graph& g, const EstimatorConfig& cfg,
                              RandomStream& rng);

// Recursive variance reduction: conditions on the position of the first
// failed vertex, one sampled path per replicate.
EstimateResult rvr(const Graph& g, const EstimatorConfig& cfg, RandomStream& rng);

// Fixed splitting over the level process with integer factors.
EstimateResult splitting(const Graph& g, const DistanceMatrix& dm,
                         const EstimatorConfig& cfg, RandomStream& rng);

// Splitting with importance sampling at the last level: all cut vertices of
// the possible set are forced up, with weight p^|cut \ known_up|.
EstimateResult sis_basic(const Graph& g, const DistanceMatrix& dm,
                         const EstimatorConfig& cfg, RandomStream& rng);

// As sis_basic, with per-biconnected-block connectivity counting at the last
// level to squeeze more out of each conditional sample.
EstimateResult sis(const Graph& g, const DistanceMatrix& dm,
                   const EstimatorConfig& cfg, RandomStream& rng);

// Sequential importance resampling: multinomial resampling each level and
// conditioning on the separating cut vertices of the possible set.
EstimateResult sir(const Graph& g, const DistanceMatrix& dm,
                   const EstimatorConfig& cfg, RandomStream& rng);

EstimateResult run_method(const Graph& g, const DistanceMatrix& dm,
                          const EstimatorConfig& cfg, RandomStream& rng);

// All-ones pilot run estimating per-level survival fractions; returns
// k_r = max(1, round(1 / rho_r)) for r = 0..R-1, with 1 substituted for
// levels that lost every particle.
std::vector<int> pilot_split_factors(const Graph& g, const DistanceMatrix& dm,
                                     double p, int R, long long N, RandomStream& rng);

// Reciprocal rounding behind pilot_split_factors; a fraction of 0 maps to 1.
std::vector<int> factors_from_survival(const std::vector<double>& survival_fractions);

// Importance-weighted mean of |X|/n over final connected samples of the sis
// or sir estimator; estimates E[|X|/n | X connected].
double weighted_up_fraction(const Graph& g, const DistanceMatrix& dm,
                            const EstimatorConfig& cfg, RandomStream& rng);

// Single-replicate contributions, exposed for distribution tests.
double conditional_mc_replicate(const Graph& g, double p, RandomStream& rng);
double rvr_replicate(const Graph& g, double p, RandomStream& rng);

// Position of the first failure among m slots, truncated to [1, m]:
// P(I = i) = p^(i-1)(1-p) / (1 - p^m), sampled by inverse transform.
int sample_first_failure(double p, int m, RandomStream& rng);

}  // namespace rcr
