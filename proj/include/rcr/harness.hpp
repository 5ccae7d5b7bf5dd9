#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcr/estimators.hpp"
#include "rcr/graph.hpp"

namespace rcr {

// Flag/config errors that should exit with status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ReferencePolicy { exact_tm, exact_brute, external, best_method };

const char* reference_policy_name(ReferencePolicy r);
ReferencePolicy reference_policy_from_name(const std::string& name);

struct ExperimentSpec {
    std::string graph_spec;            // "grid:WxH" or an edge-list file path
    std::vector<Method> methods;
    std::vector<std::string> p_labels; // decimal strings, kept exact for oracles
    int R = 0;                         // 0 = graph diameter
    long long N = 100000;
    int reps = 20;
    std::uint64_t seed = 1;
    ReferencePolicy reference = ReferencePolicy::exact_tm;
    double external_reference = 0.0;
    int threads = 1;
};

struct ReplicateRecord {
    Method method;
    int p_index = 0;
    int rep = 0;
    double estimate = 0.0;
    double wall_time_s = 0.0;
};

struct ExperimentResult {
    std::string graph_name;
    int R = 0;
    std::vector<double> p_values;
    std::vector<std::string> p_labels;
    std::vector<double> references;              // per p index
    std::map<int, std::vector<int>> pilot_factors;  // per p index, when used
    std::vector<ReplicateRecord> records;
};

struct SummaryRow {
    std::string graph;
    std::string method;
    std::string p_label;
    double p = 0.0;
    int R = 0;
    long long N = 0;
    int reps = 0;
    double mean = 0.0;
    double variance = 0.0;
    double re = 0.0;
    double wnrv = 0.0;
    double time_mean_s = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double reference = 0.0;
    std::uint64_t seed = 0;
};

// "grid:WxH" or a path to an edge-list file.
Graph load_graph(const std::string& spec);

// Executes reps x |methods| x |p| replicates. Pilot runs for the splitting
// family happen once per p before the replications and are excluded from the
// replicate wall times. Deterministic in (spec, seed) for any thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::vector<SummaryRow> summarize(const ExperimentSpec& spec, const ExperimentResult& result);

// Percentile bootstrap: B resamples with replacement, empirical
// (alpha/2, 1-alpha/2) quantiles of the statistic.
std::pair<double, double> bootstrap_ci(const std::vector<double>& values,
                                       const std::function<double(const std::vector<double>&)>& statistic,
                                       int B, double alpha, RandomStream& rng);

// CSV columns, in order: graph,method,p,R,N,reps,mean,variance,re,wnrv,
// time_mean_s,ci_low,ci_high,reference,seed.
void write_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
void write_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> read_csv(std::istream& in);

// Minimal static chart: log10(re) against p, one polyline per method.
void emit_svg(const std::vector<SummaryRow>& rows, std::ostream& out);
void emit_svg(const std::vector<SummaryRow>& rows, const std::string& path);

// Runs fn(0..n_tasks-1) across a pool; task outputs must go to per-index
// slots so the result is independent of scheduling.
void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn);

}  // namespace rcr
