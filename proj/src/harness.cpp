#include "rcr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rcr/common.hpp"
#include "rcr/exact_oracle.hpp"

namespace rcr {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

bool parse_grid_spec(const std::string& spec, int& width, int& height) {
    if (spec.rfind("grid:", 0) != 0) return false;
    std::size_t x = spec.find('x', 5);
    if (x == std::string::npos) return false;
    try {
        width = std::stoi(spec.substr(5, x - 5));
        height = std::stoi(spec.substr(x + 1));
    } catch (const std::exception&) {
        return false;
    }
    return width >= 1 && height >= 1;
}

bool needs_pilot(const std::vector<Method>& methods) {
    for (Method m : methods)
        if (m == Method::split || m == Method::sis_basic || m == Method::sis) return true;
    return false;
}

bool uses_factors(Method m) {
    return m == Method::split || m == Method::sis_basic || m == Method::sis;
}

}  // namespace

const char* reference_policy_name(ReferencePolicy r) {
    switch (r) {
        case ReferencePolicy::exact_tm: return "exact-tm";
        case ReferencePolicy::exact_brute: return "exact-brute";
        case ReferencePolicy::external: return "external";
        case ReferencePolicy::best_method: return "best-method";
    }
    return "?";
}

ReferencePolicy reference_policy_from_name(const std::string& name) {
    for (ReferencePolicy r : {ReferencePolicy::exact_tm, ReferencePolicy::exact_brute,
                              ReferencePolicy::external, ReferencePolicy::best_method})
        if (name == reference_policy_name(r)) return r;
    throw ConfigError("unknown reference policy: \"" + name + "\"");
}

Graph load_graph(const std::string& spec) {
    int w, h;
    if (parse_grid_spec(spec, w, h)) return Graph::grid(w, h);
    if (spec.rfind("grid:", 0) == 0)
        throw ConfigError("bad grid spec \"" + spec + "\", expected grid:WxH");
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open graph file: " + spec);
    return Graph::parse_edge_list(in, spec);
}

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n_tasks));
    if (threads <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        int i;
        while ((i = next.fetch_add(1)) < n_tasks) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.methods.empty()) throw ConfigError("experiment: no methods selected");
    if (spec.p_labels.empty()) throw ConfigError("experiment: empty p grid");
    if (spec.reps < 2) throw ConfigError("experiment: need at least 2 replications");
    if (spec.N < 1) throw ConfigError("experiment: sample count must be positive");

    Graph g = load_graph(spec.graph_spec);
    DistanceMatrix dm = all_pairs_distances(g);

    ExperimentResult result;
    result.graph_name = spec.graph_spec;
    result.R = spec.R > 0 ? spec.R : std::max(1, dm.diameter());
    result.p_labels = spec.p_labels;
    for (const std::string& label : spec.p_labels) {
        BigRat p = parse_probability(label);
        double pd = static_cast<double>(p);
        if (pd <= 0.0 || pd >= 1.0)
            throw ConfigError("experiment: p must lie strictly inside (0,1), got " + label);
        result.p_values.push_back(pd);
    }

    // Reference values.
    result.references.assign(result.p_values.size(), 0.0);
    if (spec.reference == ReferencePolicy::exact_tm ||
        spec.reference == ReferencePolicy::exact_brute) {
        CountVector counts;
        if (spec.reference == ReferencePolicy::exact_tm) {
            int w, h;
            if (!parse_grid_spec(spec.graph_spec, w, h))
                throw ConfigError("exact-tm reference needs a grid:WxH graph");
            counts = tm_counts(w, h);
        } else {
            try {
                counts = brute_force_counts(g);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        for (std::size_t i = 0; i < result.p_labels.size(); ++i)
            result.references[i] = static_cast<double>(
                rcr_from_counts(counts, parse_probability(result.p_labels[i])));
    } else if (spec.reference == ReferencePolicy::external) {
        if (spec.external_reference <= 0.0)
            throw ConfigError("external reference requires a positive value");
        for (auto& r : result.references) r = spec.external_reference;
    }

    const std::uint64_t graph_salt = fnv1a(spec.graph_spec);

    // One pilot per p feeds every splitting-family method at that p.
    if (needs_pilot(spec.methods)) {
        for (std::size_t pi = 0; pi < result.p_values.size(); ++pi) {
            RandomStream rng = derive_stream(
                spec.seed, {graph_salt, fnv1a("pilot"), static_cast<std::uint64_t>(pi)});
            result.pilot_factors[static_cast<int>(pi)] = pilot_split_factors(
                g, dm, result.p_values[pi], result.R, spec.N, rng);
        }
    }

    const int n_methods = static_cast<int>(spec.methods.size());
    const int n_p = static_cast<int>(result.p_values.size());
    const int n_tasks = n_methods * n_p * spec.reps;
    result.records.assign(n_tasks, ReplicateRecord{});

    parallel_for(n_tasks, spec.threads, [&](int task) {
        const int mi = task / (n_p * spec.reps);
        const int pi = task / spec.reps % n_p;
        const int rep = task % spec.reps;
        EstimatorConfig cfg;
        cfg.method = spec.methods[mi];
        cfg.p = result.p_values[pi];
        cfg.R = result.R;
        cfg.N = spec.N;
        cfg.seed = spec.seed;
        if (uses_factors(cfg.method)) cfg.factors = result.pilot_factors.at(pi);
        RandomStream rng = derive_stream(
            spec.seed, {graph_salt, fnv1a(method_name(cfg.method)),
                        static_cast<std::uint64_t>(pi), static_cast<std::uint64_t>(rep)});
        EstimateResult est = run_method(g, dm, cfg, rng);
        ReplicateRecord& rec = result.records[task];
        rec.method = cfg.method;
        rec.p_index = pi;
        rec.rep = rep;
        rec.estimate = est.estimate;
        rec.wall_time_s = est.wall_time_s;
    });

    // The best-method policy mirrors the reference rule used for grids where
    // no exact value is available: conditional MC below p = 0.25, SIR above.
    if (spec.reference == ReferencePolicy::best_method) {
        for (int pi = 0; pi < n_p; ++pi) {
            Method wanted = result.p_values[pi] <= 0.25 ? Method::cond : Method::sir;
            double sum = 0.0;
            int count = 0;
            for (const ReplicateRecord& rec : result.records) {
                if (rec.p_index == pi && rec.method == wanted) {
                    sum += rec.estimate;
                    ++count;
                }
            }
            if (count == 0)
                throw ConfigError(
                    std::string("best-method reference needs method \"") +
                    method_name(wanted) + "\" in the method list");
            result.references[pi] = sum / count;
        }
    }
    for (double r : result.references)
        if (r <= 0.0) throw ConfigError("experiment: reference value must be positive");
    return result;
}

std::pair<double, double> bootstrap_ci(
    const std::vector<double>& values,
    const std::function<double(const std::vector<double>&)>& statistic,
    int B, double alpha, RandomStream& rng) {
    detail::require_arg(values.size() >= 2, "bootstrap_ci: need at least two values");
    detail::require_arg(B >= 100, "bootstrap_ci: need at least 100 resamples");
    detail::require_arg(alpha > 0.0 && alpha < 1.0, "bootstrap_ci: alpha outside (0,1)");

    bool degenerate = std::all_of(values.begin(), values.end(),
                                  [&](double v) { return v == values[0]; });
    if (degenerate) {
        double s = statistic(values);
        return {s, s};
    }
    std::vector<double> stats(B);
    std::vector<double> resample(values.size());
    for (int b = 0; b < B; ++b) {
        for (auto& v : resample) v = values[rng.below(values.size())];
        stats[b] = statistic(resample);
    }
    std::sort(stats.begin(), stats.end());
    auto quantile_index = [&](double q) {
        int idx = static_cast<int>(std::floor(q * (B - 1) + 0.5));
        return std::clamp(idx, 0, B - 1);
    };
    return {stats[quantile_index(alpha / 2)], stats[quantile_index(1.0 - alpha / 2)]};
}

std::vector<SummaryRow> summarize(const ExperimentSpec& spec, const ExperimentResult& result) {
    std::vector<SummaryRow> rows;
    for (Method m : spec.methods) {
        for (std::size_t pi = 0; pi < result.p_values.size(); ++pi) {
            std::vector<double> estimates;
            std::vector<double> times;
            for (const ReplicateRecord& rec : result.records) {
                if (rec.method == m && rec.p_index == static_cast<int>(pi)) {
                    estimates.push_back(rec.estimate);
                    times.push_back(rec.wall_time_s);
                }
            }
            if (estimates.size() < 2) throw ConfigError("summarize: need at least 2 replications");
            const double reference = result.references[pi];
            if (reference <= 0.0) throw ConfigError("summarize: reference must be positive");

            const int reps = static_cast<int>(estimates.size());
            double mean = 0.0;
            for (double e : estimates) mean += e;
            mean /= reps;
            double variance = 0.0;
            for (double e : estimates) variance += (e - mean) * (e - mean);
            variance /= reps - 1;
            double time_mean = 0.0;
            for (double t : times) time_mean += t;
            time_mean /= reps;

            auto re_statistic = [reference](const std::vector<double>& vals) {
                double mu = 0.0;
                for (double v : vals) mu += v;
                mu /= vals.size();
                double var = 0.0;
                for (double v : vals) var += (v - mu) * (v - mu);
                var /= static_cast<double>(vals.size()) - 1;
                return std::sqrt(var) / reference;
            };
            RandomStream boot_rng = derive_stream(
                spec.seed, {fnv1a(spec.graph_spec), fnv1a(method_name(m)),
                            static_cast<std::uint64_t>(pi), fnv1a("bootstrap")});
            auto [lo, hi] = bootstrap_ci(estimates, re_statistic, 1000, 0.05, boot_rng);

            SummaryRow row;
            row.graph = spec.graph_spec;
            row.method = method_name(m);
            row.p_label = result.p_labels[pi];
            row.p = result.p_values[pi];
            row.R = result.R;
            row.N = spec.N;
            row.reps = reps;
            row.mean = mean;
            row.variance = variance;
            row.re = std::sqrt(variance) / reference;
            row.wnrv = time_mean * variance / (reference * reference);
            row.time_mean_s = time_mean;
            row.ci_low = lo;
            row.ci_high = hi;
            row.reference = reference;
            row.seed = spec.seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << "graph,method,p,R,N,reps,mean,variance,re,wnrv,time_mean_s,"
           "ci_low,ci_high,reference,seed\n";
    for (const SummaryRow& r : rows) {
        out << r.graph << ',' << r.method << ',' << r.p_label << ',' << r.R << ','
            << r.N << ',' << r.reps << ',' << format_double(r.mean) << ','
            << format_double(r.variance) << ',' << format_double(r.re) << ','
            << format_double(r.wnrv) << ',' << format_double(r.time_mean_s) << ','
            << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
            << format_double(r.reference) << ',' << r.seed << '\n';
    }
}

void write_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    write_csv(rows, out);
}

std::vector<SummaryRow> read_csv(std::istream& in) {
    std::vector<SummaryRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 15) throw std::runtime_error("csv: bad row: " + line);
        SummaryRow r;
        r.graph = fields[0];
        r.method = fields[1];
        r.p_label = fields[2];
        r.p = std::stod(fields[2]);
        r.R = std::stoi(fields[3]);
        r.N = std::stoll(fields[4]);
        r.reps = std::stoi(fields[5]);
        r.mean = std::stod(fields[6]);
        r.variance = std::stod(fields[7]);
        r.re = std::stod(fields[8]);
        r.wnrv = std::stod(fields[9]);
        r.time_mean_s = std::stod(fields[10]);
        r.ci_low = std::stod(fields[11]);
        r.ci_high = std::stod(fields[12]);
        r.reference = std::stod(fields[13]);
        r.seed = std::stoull(fields[14]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_svg(const std::vector<SummaryRow>& rows, std::ostream& out) {
    detail::require_arg(!rows.empty(), "emit_svg: no rows");
    const int width = 640, height = 440;
    const double left = 70, right = 610, top = 30, bottom = 390;

    double p_min = rows[0].p, p_max = rows[0].p;
    double y_min = 1e300, y_max = -1e300;
    auto log_re = [](double re) { return std::log10(std::max(re, 1e-16)); };
    for (const SummaryRow& r : rows) {
        p_min = std::min(p_min, r.p);
        p_max = std::max(p_max, r.p);
        y_min = std::min(y_min, log_re(r.re));
        y_max = std::max(y_max, log_re(r.re));
    }
    if (p_max == p_min) p_max = p_min + 1e-3;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto sx = [&](double p) { return left + (p - p_min) / (p_max - p_min) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

    std::vector<std::string> methods;
    for (const SummaryRow& r : rows)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-size=\"14\">p</text>\n"
        << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">log10(RE)</text>\n";

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<std::pair<double, double>> pts;
        for (const SummaryRow& r : rows)
            if (r.method == methods[mi]) pts.emplace_back(r.p, log_re(r.re));
        std::sort(pts.begin(), pts.end());
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[mi % 7]
            << "\" stroke-width=\"1.5\" points=\"";
        for (auto [p, y] : pts) out << sx(p) << ',' << sy(y) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << right - 90 << "\" y=\"" << top + 16 * (mi + 1)
            << "\" font-size=\"12\" fill=\"" << kPalette[mi % 7] << "\">" << methods[mi]
            << "</text>\n";
    }
    out << "</svg>\n";
}

void emit_svg(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    emit_svg(rows, out);
}

}  // namespace rcr
