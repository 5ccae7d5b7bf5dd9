#include "rcr/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "rcr/common.hpp"

namespace rcr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_common(const EstimatorConfig& cfg) {
    detail::require_arg(cfg.p > 0.0 && cfg.p < 1.0, "estimator: p must lie in (0,1)");
    detail::require_arg(cfg.N >= 1, "estimator: sample count must be positive");
    detail::require_arg(cfg.R >= 1, "estimator: level count must be at least 1");
}

void validate_factors(const EstimatorConfig& cfg) {
    detail::require_arg(static_cast<int>(cfg.factors.size()) == cfg.R,
                        "estimator: need exactly R splitting factors");
    for (int k : cfg.factors)
        detail::require_arg(k >= 1, "estimator: splitting factors must be positive");
    long long total = cfg.N;
    for (int k : cfg.factors) {
        detail::require_arg(total <= std::numeric_limits<long long>::max() / k,
                            "estimator: N * prod(k) overflows 64 bits");
        total *= k;
    }
}

double pow_prob(double p, int k) { return k == 0 ? 1.0 : std::pow(p, k); }

// Connected final samples handed out by the sis/sir internals, used by
// weighted_up_fraction.
struct FinalSampleSink {
    double weight_sum = 0.0;
    double weighted_fraction_sum = 0.0;
    void add(double weight, int up_count, int n) {
        weight_sum += weight;
        weighted_fraction_sum += weight * (static_cast<double>(up_count) / n);
    }
};

// Splitting phase shared by splitting/sis_basic/sis: initial particles plus
// advances through level `last_level`, splitting by cfg.factors along the
// way. Survival counts land in diag.
std::vector<Particle> run_split_phase(const Graph& g, const DistanceMatrix& dm,
                                      const EstimatorConfig& cfg, int last_level,
                                      RandomStream& rng,
                                      std::map<std::string, double>* diag) {
    std::vector<Particle> survivors;
    survivors.reserve(cfg.N);
    for (long long i = 0; i < cfg.N; ++i) {
        Particle pt = init_particle(g, dm, cfg.R, cfg.p, rng);
        if (pt.alive && is_feasible(g, pt)) survivors.push_back(std::move(pt));
    }
    if (diag) {
        (*diag)["entering_0"] = static_cast<double>(cfg.N);
        (*diag)["surviving_0"] = static_cast<double>(survivors.size());
    }
    std::vector<Particle> next;
    for (int r = 1; r <= last_level; ++r) {
        next.clear();
        const int k = cfg.factors[r - 1];
        for (const Particle& pt : survivors) {
            for (int j = 0; j < k; ++j) {
                Particle child = pt;
                advance_particle(g, dm, child, cfg.p, VertexSet(g.vertex_count()), rng);
                if (is_feasible(g, child)) next.push_back(std::move(child));
            }
        }
        if (diag) {
            (*diag)["entering_" + std::to_string(r)] =
                static_cast<double>(survivors.size()) * k;
            (*diag)["surviving_" + std::to_string(r)] = static_cast<double>(next.size());
        }
        survivors.swap(next);
    }
    return survivors;
}

double split_normalizer(const EstimatorConfig& cfg) {
    double denom = static_cast<double>(cfg.N);
    for (int k : cfg.factors) denom *= k;
    return denom;
}

long long ipow_capped(long long base, int exp, long long cap) {
    long long v = 1;
    for (int i = 0; i < exp; ++i) {
        if (v > cap / std::max<long long>(base, 1)) return cap + 1;
        v *= base;
    }
    return v;
}

// Largest m with m^b <= k.
int floor_kth_root(long long k, int b) {
    int m = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(k), 1.0 / b))));
    while (ipow_capped(m + 1, b, k) <= k) ++m;
    while (m > 1 && ipow_capped(m, b, k) > k) --m;
    return m;
}

EstimateResult sis_impl(const Graph& g, const DistanceMatrix& dm,
                        const EstimatorConfig& cfg, RandomStream& rng,
                        bool per_block, FinalSampleSink* sink) {
    validate_common(cfg);
    validate_factors(cfg);
    auto start = Clock::now();
    EstimateResult res;
    res.n_samples = cfg.N;

    std::vector<Particle> survivors =
        run_split_phase(g, dm, cfg, cfg.R - 1, rng, &res.diag);
    const long long k_last = cfg.factors[cfg.R - 1];
    const int n = g.vertex_count();

    double weight_total = 0.0;
    for (const Particle& pt : survivors) {
        VertexSet possible = ~pt.known_down;
        VertexSet cut = required_cut_set(g, pt, CutMode::all);
        const double cond_weight = pow_prob(cfg.p, (cut - pt.known_up).count());

        if (!per_block || possible.count() < 2) {
            // Either plain final-level importance sampling, or the possible
            // set is a single vertex and every completion is that vertex.
            long long hits = 0;
            if (possible.count() < 2) {
                hits = k_last;
                if (sink)
                    for (long long i = 0; i < k_last; ++i)
                        sink->add(cond_weight, pt.known_up.count(), n);
            } else {
                for (long long i = 0; i < k_last; ++i) {
                    Particle attempt = pt;
                    advance_particle(g, dm, attempt, cfg.p, cut, rng);
                    if (is_connected_induced(g, attempt.known_up)) {
                        ++hits;
                        if (sink) sink->add(cond_weight, attempt.known_up.count(), n);
                    }
                }
            }
            weight_total += cond_weight * static_cast<double>(hits);
            continue;
        }

        std::vector<VertexSet> blocks = biconnected_components(g, possible);
        const int b = static_cast<int>(blocks.size());
        const int m = floor_kth_root(k_last, b);
        const long long m_pow = ipow_capped(m, b, k_last);

        std::vector<long long> block_hits(b, 0);
        for (int i = 0; i < m; ++i) {
            Particle attempt = pt;
            advance_particle(g, dm, attempt, cfg.p, cut, rng);
            bool all_connected = true;
            for (int j = 0; j < b; ++j) {
                if (is_connected_induced(g, attempt.known_up & blocks[j]))
                    ++block_hits[j];
                else
                    all_connected = false;
            }
            if (sink && all_connected)
                sink->add(cond_weight, attempt.known_up.count(), n);
        }
        long long resid = 0;
        for (long long i = m_pow; i < k_last; ++i) {
            Particle attempt = pt;
            advance_particle(g, dm, attempt, cfg.p, cut, rng);
            if (is_connected_induced(g, attempt.known_up)) {
                ++resid;
                if (sink) sink->add(cond_weight, attempt.known_up.count(), n);
            }
        }
        double prod = 1.0;
        for (long long h : block_hits) prod *= static_cast<double>(h);
        weight_total += cond_weight * (prod + static_cast<double>(resid));
    }

    res.estimate = weight_total / split_normalizer(cfg);
    res.diag["final_particles"] = static_cast<double>(survivors.size());
    res.wall_time_s = seconds_since(start);
    return res;
}

EstimateResult sir_impl(const Graph& g, const DistanceMatrix& dm,
                        const EstimatorConfig& cfg, RandomStream& rng,
                        FinalSampleSink* sink) {
    validate_common(cfg);
    auto start = Clock::now();
    EstimateResult res;
    res.n_samples = cfg.N;
    const int n = g.vertex_count();

    std::vector<Particle> particles;
    particles.reserve(cfg.N);
    for (long long i = 0; i < cfg.N; ++i) {
        Particle pt = init_particle(g, dm, cfg.R, cfg.p, rng);
        if (pt.alive && is_feasible(g, pt)) particles.push_back(std::move(pt));
    }
    res.diag["surviving_0"] = static_cast<double>(particles.size());

    std::vector<Particle> next;
    std::vector<double> cumulative;
    for (int r = 1; r <= cfg.R; ++r) {
        if (particles.empty()) {
            res.estimate = 0.0;
            res.diag["died_at_level"] = r - 1;
            res.wall_time_s = seconds_since(start);
            return res;
        }
        double weight_sum = 0.0;
        cumulative.clear();
        cumulative.reserve(particles.size());
        for (const Particle& pt : particles) {
            weight_sum += pt.weight;
            cumulative.push_back(weight_sum);
        }
        const double average_weight = weight_sum / static_cast<double>(particles.size());

        next.clear();
        for (long long i = 0; i < cfg.N; ++i) {
            double u = rng.next_double() * weight_sum;
            std::size_t idx = std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                              cumulative.begin();
            if (idx >= particles.size()) idx = particles.size() - 1;
            Particle child = particles[idx];
            child.weight = average_weight;  // resampling resets the weight
            VertexSet cond = required_cut_set(g, child, CutMode::separating);
            advance_particle(g, dm, child, cfg.p, cond, rng);
            if (is_feasible(g, child)) next.push_back(std::move(child));
        }
        particles.swap(next);
        res.diag["surviving_" + std::to_string(r)] = static_cast<double>(particles.size());
    }

    double total = 0.0;
    for (const Particle& pt : particles) {
        if (is_connected_induced(g, pt.known_up)) {
            total += pt.weight;
            if (sink) sink->add(pt.weight, pt.known_up.count(), n);
        }
    }
    res.estimate = total / static_cast<double>(cfg.N);
    res.wall_time_s = seconds_since(start);
    return res;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::crude: return "crude";
        case Method::cond: return "cond";
        case Method::rvr: return "rvr";
        case Method::split: return "split";
        case Method::sis_basic: return "sis_basic";
        case Method::sis: return "sis";
        case Method::sir: return "sir";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::crude, Method::cond, Method::rvr, Method::split,
                     Method::sis_basic, Method::sis, Method::sir})
        if (name == method_name(m)) return m;
    throw std::invalid_argument("unknown method: \"" + name + "\"");
}

EstimateResult crude_mc(const Graph& g, const DistanceMatrix&,
                        const EstimatorConfig& cfg, RandomStream& rng) {
    validate_common(cfg);
    auto start = Clock::now();
    const int n = g.vertex_count();
    long long hits = 0;
    VertexSet x(n);
    for (long long i = 0; i < cfg.N; ++i) {
        for (int v = 0; v < n; ++v) {
            if (rng.bernoulli(cfg.p))
                x.set(v);
            else
                x.reset(v);
        }
        if (is_connected_induced(g, x)) ++hits;
    }
    EstimateResult res;
    res.estimate = static_cast<double>(hits) / static_cast<double>(cfg.N);
    res.n_samples = cfg.N;
    res.wall_time_s = seconds_since(start);
    return res;
}

double conditional_mc_replicate(const Graph& g, double p, RandomStream& rng) {
    const int n = g.vertex_count();
    // 0 unknown, 1 up, 2 down
    std::vector<char> state(n, 0);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    int omega = -1;
    int revealed = 0;
    for (int k = 0; k < n; ++k) {
        std::size_t j = k + rng.below(n - k);
        std::swap(order[k], order[j]);
        int v = order[k];
        ++revealed;
        if (rng.bernoulli(p)) {
            state[v] = 1;
            omega = v;
            break;
        }
        state[v] = 2;
    }
    if (omega < 0) return 0.0;  // no up vertex: the empty graph is down

    // Grow omega's component, revealing unknown neighbours on demand.
    std::vector<int> stack{omega};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(v)) {
            if (state[w] == 0) {
                ++revealed;
                state[w] = rng.bernoulli(p) ? 1 : 2;
                if (state[w] == 1) stack.push_back(w);
            }
        }
    }
    int unknown = n - revealed;
    return std::pow(1.0 - p, unknown);
}

EstimateResult conditional_mc(const Graph& g, const EstimatorConfig& cfg,
                              RandomStream& rng) {
    validate_common(cfg);
    auto start = Clock::now();
    double sum = 0.0;
    for (long long i = 0; i < cfg.N; ++i) sum += conditional_mc_replicate(g, cfg.p, rng);
    EstimateResult res;
    res.estimate = sum / static_cast<double>(cfg.N);
    res.n_samples = cfg.N;
    res.wall_time_s = seconds_since(start);
    return res;
}

int sample_first_failure(double p, int m, RandomStream& rng) {
    double u = rng.next_double();
    double t = 1.0 - u * (1.0 - std::pow(p, m));
    int i = static_cast<int>(std::ceil(std::log(t) / std::log(p) - 1e-12));
    return std::clamp(i, 1, m);
}

double rvr_replicate(const Graph& g, double p, RandomStream& rng) {
    const int n = g.vertex_count();
    VertexSet known_up(n), known_down(n);
    std::vector<int> unknown(n);
    std::iota(unknown.begin(), unknown.end(), 0);

    double value = 0.0;
    double coeff = 1.0;
    while (true) {
        if (!known_up.empty()) {
            VertexSet possible = ~known_down;
            if (!reach_within(g, possible, known_up.first()).contains_all(known_up))
                break;  // no completion can reconnect known_up
        }
        if (unknown.empty()) {
            value += coeff * (is_connected_induced(g, known_up) ? 1.0 : 0.0);
            break;
        }
        const int m = static_cast<int>(unknown.size());
        const double pm = std::pow(p, m);
        VertexSet everything = known_up;
        for (int v : unknown) everything.set(v);
        value += coeff * pm * (is_connected_induced(g, everything) ? 1.0 : 0.0);
        coeff *= 1.0 - pm;

        int i = sample_first_failure(p, m, rng);
        for (int k = 0; k < i - 1; ++k) known_up.set(unknown[k]);
        known_down.set(unknown[i - 1]);
        unknown.erase(unknown.begin(), unknown.begin() + i);
    }
    return value;
}

EstimateResult rvr(const Graph& g, const EstimatorConfig& cfg, RandomStream& rng) {
    validate_common(cfg);
    auto start = Clock::now();
    double sum = 0.0;
    for (long long i = 0; i < cfg.N; ++i) sum += rvr_replicate(g, cfg.p, rng);
    EstimateResult res;
    res.estimate = sum / static_cast<double>(cfg.N);
    res.n_samples = cfg.N;
    res.wall_time_s = seconds_since(start);
    return res;
}

EstimateResult splitting(const Graph& g, const DistanceMatrix& dm,
                         const EstimatorConfig& cfg, RandomStream& rng) {
    validate_common(cfg);
    validate_factors(cfg);
    auto start = Clock::now();
    EstimateResult res;
    res.n_samples = cfg.N;
    std::vector<Particle> final_particles =
        run_split_phase(g, dm, cfg, cfg.R, rng, &res.diag);
    long long hits = 0;
    for (const Particle& pt : final_particles)
        if (is_connected_induced(g, pt.known_up)) ++hits;
    res.estimate = static_cast<double>(hits) / split_normalizer(cfg);
    res.wall_time_s = seconds_since(start);
    return res;
}

EstimateResult sis_basic(const Graph& g, const DistanceMatrix& dm,
                         const EstimatorConfig& cfg, RandomStream& rng) {
    return sis_impl(g, dm, cfg, rng, /*per_block=*/false, nullptr);
}

EstimateResult sis(const Graph& g, const DistanceMatrix& dm,
                   const EstimatorConfig& cfg, RandomStream& rng) {
    return sis_impl(g, dm, cfg, rng, /*per_block=*/true, nullptr);
}

EstimateResult sir(const Graph& g, const DistanceMatrix& dm,
                   const EstimatorConfig& cfg, RandomStream& rng) {
    return sir_impl(g, dm, cfg, rng, nullptr);
}

EstimateResult run_method(const Graph& g, const DistanceMatrix& dm,
                          const EstimatorConfig& cfg, RandomStream& rng) {
    switch (cfg.method) {
        case Method::crude: return crude_mc(g, dm, cfg, rng);
        case Method::cond: return conditional_mc(g, cfg, rng);
        case Method::rvr: return rvr(g, cfg, rng);
        case Method::split: return splitting(g, dm, cfg, rng);
        case Method::sis_basic: return sis_basic(g, dm, cfg, rng);
        case Method::sis: return sis(g, dm, cfg, rng);
        case Method::sir: return sir(g, dm, cfg, rng);
    }
    throw std::invalid_argument("run_method: unknown method");
}

std::vector<int> factors_from_survival(const std::vector<double>& survival_fractions) {
    std::vector<int> factors;
    factors.reserve(survival_fractions.size());
    for (double rho : survival_fractions) {
        if (rho <= 0.0)
            factors.push_back(1);
        else
            factors.push_back(std::max(1, static_cast<int>(std::llround(1.0 / rho))));
    }
    return factors;
}

std::vector<int> pilot_split_factors(const Graph& g, const DistanceMatrix& dm,
                                     double p, int R, long long N, RandomStream& rng) {
    EstimatorConfig cfg;
    cfg.method = Method::split;
    cfg.p = p;
    cfg.R = R;
    cfg.N = N;
    cfg.factors.assign(R, 1);
    EstimateResult pilot = splitting(g, dm, cfg, rng);

    std::vector<double> fractions(R, 0.0);
    for (int r = 0; r < R; ++r) {
        double entering = pilot.diag["entering_" + std::to_string(r)];
        double surviving = pilot.diag["surviving_" + std::to_string(r)];
        fractions[r] = entering > 0.0 ? surviving / entering : 0.0;
    }
    return factors_from_survival(fractions);
}

double weighted_up_fraction(const Graph& g, const DistanceMatrix& dm,
                            const EstimatorConfig& cfg, RandomStream& rng) {
    detail::require_arg(cfg.method == Method::sis || cfg.method == Method::sir,
                        "weighted_up_fraction: only sis and sir carry weights");
    FinalSampleSink sink;
    if (cfg.method == Method::sis)
        sis_impl(g, dm, cfg, rng, /*per_block=*/true, &sink);
    else
        sir_impl(g, dm, cfg, rng, &sink);
    if (sink.weight_sum <= 0.0)
        throw std::runtime_error("weighted_up_fraction: no connected sample was produced");
    return sink.weighted_fraction_sum / sink.weight_sum;
}

}  // namespace rcr
