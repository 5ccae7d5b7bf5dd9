#include "rcr/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "rcr/estimators.hpp"
#include "rcr/exact_oracle.hpp"
#include "rcr/harness.hpp"

namespace rcr {

namespace {

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    if (list == "all") {
        for (Method m : {Method::crude, Method::cond, Method::rvr, Method::split,
                         Method::sis_basic, Method::sis, Method::sir})
            out.push_back(m);
        return out;
    }
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(method_from_name(item));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (out.empty()) throw ConfigError("empty method list");
    return out;
}

// Comma list of decimals, or "start:stop:step" expanded in exact arithmetic.
std::vector<std::string> parse_p_grid(const std::string& text) {
    std::vector<std::string> labels;
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
            throw ConfigError("bad p grid range, expected start:stop:step");
        BigRat start = parse_probability(a), stop = parse_probability(b),
               step = parse_probability(c);
        if (step <= 0) throw ConfigError("p grid step must be positive");
        for (BigRat p = start; p <= stop; p += step)
            labels.push_back(decimal_string(p, 9));
        return labels;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        parse_probability(item);  // validates
        labels.push_back(item);
    }
    if (labels.empty()) throw ConfigError("empty p grid");
    return labels;
}

std::string sanitize_filename(std::string s) {
    for (char& c : s)
        if (c == ':' || c == '/' || c == '\\') c = '_';
    return s;
}

int grid_width_of(const std::string& spec) {
    if (spec.rfind("grid:", 0) != 0) return -1;
    std::size_t x = spec.find('x', 5);
    if (x == std::string::npos) return -1;
    try {
        return std::stoi(spec.substr(5, x - 5));
    } catch (const std::exception&) {
        return -1;
    }
}

struct GlobalOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";
};

void apply_thread_env(GlobalOptions& opts) {
    if (const char* env = std::getenv("RCR_THREADS")) {
        try {
            opts.threads = std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw ConfigError("RCR_THREADS is not a number");
        }
    }
}

int run_estimate(const GlobalOptions& g_opts, const std::string& graph_spec,
                 const std::string& method_str, const std::string& p_str,
                 long long samples, int radius, const std::string& factors_str,
                 std::ostream& out) {
    Graph g = load_graph(graph_spec);
    DistanceMatrix dm = all_pairs_distances(g);

    EstimatorConfig cfg;
    cfg.method = method_from_name(method_str);
    cfg.p = static_cast<double>(parse_probability(p_str));
    if (cfg.p <= 0.0 || cfg.p >= 1.0) throw ConfigError("p must lie strictly inside (0,1)");
    cfg.N = samples;
    cfg.R = radius > 0 ? radius : std::max(1, dm.diameter());
    cfg.seed = g_opts.seed;

    bool family = cfg.method == Method::split || cfg.method == Method::sis_basic ||
                  cfg.method == Method::sis;
    if (family) {
        if (!factors_str.empty()) {
            std::stringstream ss(factors_str);
            std::string item;
            while (std::getline(ss, item, ',')) cfg.factors.push_back(std::stoi(item));
        } else {
            RandomStream pilot_rng =
                derive_stream(g_opts.seed, {fnv1a(graph_spec), fnv1a("pilot")});
            cfg.factors = pilot_split_factors(g, dm, cfg.p, cfg.R, cfg.N, pilot_rng);
            out << "pilot factors:";
            for (int k : cfg.factors) out << ' ' << k;
            out << '\n';
        }
        if (static_cast<int>(cfg.factors.size()) != cfg.R)
            throw ConfigError("need exactly R = " + std::to_string(cfg.R) +
                              " splitting factors");
    }

    RandomStream rng = derive_stream(
        g_opts.seed, {fnv1a(graph_spec), fnv1a(method_name(cfg.method)), fnv1a(p_str)});
    EstimateResult res = run_method(g, dm, cfg, rng);
    out << "graph: " << graph_spec << "  method: " << method_name(cfg.method)
        << "  p: " << p_str << "  N: " << cfg.N << "  R: " << cfg.R
        << "  seed: " << g_opts.seed << '\n';
    out << "estimate: ";
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", res.estimate);
        out << buf << '\n';
    }
    for (const auto& [key, value] : res.diag) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", value);
        out << "diag " << key << ": " << buf << '\n';
    }
    return 0;
}

int run_exact(const std::string& graph_spec, const std::string& method,
              const std::string& p_str, bool states, int digits,
              const std::string& cache_path, std::ostream& out) {
    if (method != "tm" && method != "brute")
        throw ConfigError("exact method must be tm or brute");

    if (states) {
        int w = grid_width_of(graph_spec);
        if (w < 1) throw ConfigError("--states needs a grid:WxH graph");
        out << tm_state_space(w).size() << " interface states\n";
        return 0;
    }

    CountVector counts;
    bool loaded = false;
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        std::ifstream in(cache_path);
        counts = read_counts(in);
        loaded = true;
    }
    if (!loaded) {
        if (method == "tm") {
            int w = grid_width_of(graph_spec);
            std::size_t x = graph_spec.find('x', 5);
            if (w < 1 || x == std::string::npos)
                throw ConfigError("tm method needs a grid:WxH graph");
            int h = std::stoi(graph_spec.substr(x + 1));
            counts = tm_counts(w, h);
        } else {
            counts = brute_force_counts(load_graph(graph_spec));
        }
        if (!cache_path.empty()) {
            std::ofstream co(cache_path);
            if (!co) throw std::runtime_error("cannot write counts cache: " + cache_path);
            write_counts(counts, co);
        }
    }

    if (p_str.empty()) {
        write_counts(counts, out);
        return 0;
    }
    BigRat p = parse_probability(p_str);
    BigRat value = rcr_from_counts(counts, p);
    out << boost::multiprecision::numerator(value) << '/'
        << boost::multiprecision::denominator(value) << " = "
        << decimal_string(value, digits) << '\n';
    return 0;
}

int run_pilot(const GlobalOptions& g_opts, const std::string& graph_spec,
              const std::string& p_str, long long samples, int radius,
              std::ostream& out) {
    Graph g = load_graph(graph_spec);
    DistanceMatrix dm = all_pairs_distances(g);
    double p = static_cast<double>(parse_probability(p_str));
    if (p <= 0.0 || p >= 1.0) throw ConfigError("p must lie strictly inside (0,1)");
    int R = radius > 0 ? radius : std::max(1, dm.diameter());
    RandomStream rng = derive_stream(g_opts.seed, {fnv1a(graph_spec), fnv1a("pilot")});
    std::vector<int> factors = pilot_split_factors(g, dm, p, R, samples, rng);
    for (std::size_t i = 0; i < factors.size(); ++i)
        out << (i ? " " : "") << factors[i];
    out << '\n';
    return 0;
}

// Flat key=value file mirroring the experiment flags; '#' starts a comment.
std::map<std::string, std::string> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value");
        std::string key = line.substr(start, eq - start);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            std::size_t end = s.find_last_not_of(" \t\r");
            s.erase(end == std::string::npos ? 0 : end + 1);
        };
        trim(key);
        trim(value);
        kv[key] = value;
    }
    return kv;
}

int run_experiment_cmd(const GlobalOptions& g_opts,
                       const std::vector<std::string>& graphs,
                       const std::string& methods_str, const std::string& p_grid_str,
                       long long samples, int reps, int radius,
                       const std::string& reference_str, double reference_value,
                       std::ostream& out) {
    std::vector<SummaryRow> all_rows;
    std::filesystem::create_directories(g_opts.out_dir);
    for (const std::string& graph_spec : graphs) {
        ExperimentSpec spec;
        spec.graph_spec = graph_spec;
        spec.methods = parse_methods(methods_str);
        spec.p_labels = parse_p_grid(p_grid_str);
        spec.N = samples;
        spec.reps = reps;
        spec.R = radius;
        spec.seed = g_opts.seed;
        spec.threads = g_opts.threads;
        spec.reference = reference_policy_from_name(reference_str);
        spec.external_reference = reference_value;

        ExperimentResult result = run_experiment(spec);
        std::vector<SummaryRow> rows = summarize(spec, result);
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());

        std::string svg_path = g_opts.out_dir + "/re_" + sanitize_filename(graph_spec) + ".svg";
        emit_svg(rows, svg_path);
        out << "wrote " << svg_path << '\n';
    }
    std::string csv_path = g_opts.out_dir + "/summary.csv";
    write_csv(all_rows, csv_path);
    out << "wrote " << csv_path << '\n';
    return 0;
}

int run_pstar(const std::string& counts_path, double tol, std::ostream& out) {
    std::ifstream in(counts_path);
    if (!in) throw ConfigError("cannot open counts file: " + counts_path);
    CountVector counts = read_counts(in);
    PStarResult res = p_star(counts, tol);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", res.value);
    out << "p* = " << buf;
    if (res.boundary)
        out << " (boundary root, no interior crossing)";
    else
        out << " (sign changes: " << res.sign_changes << ")";
    out << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Residual connectedness reliability estimation toolkit"};
    app.require_subcommand(1);

    GlobalOptions g_opts;
    app.add_option("--seed", g_opts.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g_opts.threads, "worker threads (RCR_THREADS overrides)")
        ->capture_default_str();
    app.add_option("--out", g_opts.out_dir, "output directory")->capture_default_str();

    auto* est = app.add_subcommand("estimate", "run one estimator once");
    std::string est_graph, est_method, est_p, est_factors;
    long long est_samples = 100000;
    int est_radius = 0;
    est->add_option("--graph", est_graph, "grid:WxH or edge-list file")->required();
    est->add_option("--method", est_method, "crude|cond|rvr|split|sis_basic|sis|sir")
        ->required();
    est->add_option("--p", est_p, "vertex reliability")->required();
    est->add_option("--samples", est_samples, "sample count")->capture_default_str();
    est->add_option("--radius", est_radius, "level count R (default: graph diameter)");
    est->add_option("--factors", est_factors, "splitting factors k_0,..,k_{R-1}");

    auto* exact = app.add_subcommand("exact", "exact counts / reliability");
    std::string ex_graph, ex_method, ex_p, ex_cache;
    bool ex_states = false;
    int ex_digits = 12;
    exact->add_option("--graph", ex_graph, "grid:WxH (tm) or any graph (brute)")->required();
    exact->add_option("--method", ex_method, "tm|brute")->required();
    exact->add_option("--p", ex_p, "evaluate the reliability at this p");
    exact->add_flag("--states", ex_states, "print the interface state count only");
    exact->add_option("--digits", ex_digits, "decimal digits")->capture_default_str();
    exact->add_option("--cache", ex_cache, "counts file to reuse or create");

    auto* pilot = app.add_subcommand("pilot", "estimate splitting factors");
    std::string pi_graph, pi_p;
    long long pi_samples = 100000;
    int pi_radius = 0;
    pilot->add_option("--graph", pi_graph)->required();
    pilot->add_option("--p", pi_p)->required();
    pilot->add_option("--samples", pi_samples)->capture_default_str();
    pilot->add_option("--radius", pi_radius);

    auto* exp = app.add_subcommand("experiment", "replicated comparison study");
    std::vector<std::string> exp_graphs{"grid:4x4", "grid:8x8"};
    std::string exp_methods = "all", exp_p_grid = "0.1:0.65:0.05";
    std::string exp_reference = "exact-tm", exp_config;
    long long exp_samples = 100000;
    int exp_reps = 20, exp_radius = 0;
    double exp_reference_value = 0.0;
    exp->add_option("--config", exp_config, "flat key=value file mirroring these flags");
    auto* opt_graph =
        exp->add_option("--graph", exp_graphs, "graphs to test")->capture_default_str();
    auto* opt_methods =
        exp->add_option("--methods", exp_methods, "comma list or \"all\"")
            ->capture_default_str();
    auto* opt_p_grid = exp->add_option("--p-grid", exp_p_grid,
                                       "comma list or start:stop:step")
                           ->capture_default_str();
    auto* opt_samples = exp->add_option("--samples", exp_samples)->capture_default_str();
    auto* opt_reps = exp->add_option("--reps", exp_reps)->capture_default_str();
    auto* opt_radius = exp->add_option("--radius", exp_radius);
    auto* opt_reference =
        exp->add_option("--reference", exp_reference,
                        "exact-tm|exact-brute|external|best-method")
            ->capture_default_str();
    auto* opt_reference_value =
        exp->add_option("--reference-value", exp_reference_value,
                        "value for --reference external");

    auto* pstar_cmd = app.add_subcommand("pstar", "fixed point of the conditional up-fraction");
    std::string ps_counts;
    double ps_tol = 1e-4;
    pstar_cmd->add_option("--counts", ps_counts, "counts file")->required();
    pstar_cmd->add_option("--tol", ps_tol, "bisection width")->capture_default_str();

    try {
        app.parse(argc, argv);
        apply_thread_env(g_opts);
        if (est->parsed())
            return run_estimate(g_opts, est_graph, est_method, est_p, est_samples,
                                est_radius, est_factors, out);
        if (exact->parsed())
            return run_exact(ex_graph, ex_method, ex_p, ex_states, ex_digits, ex_cache, out);
        if (pilot->parsed())
            return run_pilot(g_opts, pi_graph, pi_p, pi_samples, pi_radius, out);
        if (exp->parsed()) {
            if (!exp_config.empty()) {
                // Explicit flags win over config file values.
                auto kv = read_flat_config(exp_config);
                auto take = [&](const char* key, const CLI::Option* opt, auto& target) {
                    auto it = kv.find(key);
                    if (it == kv.end() || opt->count() > 0) return;
                    std::istringstream ss(it->second);
                    ss >> target;
                    if (ss.fail())
                        throw ConfigError(std::string("config: bad value for ") + key);
                    kv.erase(it);
                };
                if (auto it = kv.find("graph"); it != kv.end()) {
                    if (opt_graph->count() == 0) {
                        exp_graphs.clear();
                        std::stringstream ss(it->second);
                        std::string g;
                        while (std::getline(ss, g, ','))
                            if (!g.empty()) exp_graphs.push_back(g);
                    }
                    kv.erase(it);
                }
                take("methods", opt_methods, exp_methods);
                take("p-grid", opt_p_grid, exp_p_grid);
                take("samples", opt_samples, exp_samples);
                take("reps", opt_reps, exp_reps);
                take("radius", opt_radius, exp_radius);
                take("reference", opt_reference, exp_reference);
                take("reference-value", opt_reference_value, exp_reference_value);
                if (auto it = kv.find("seed"); it != kv.end()) {
                    g_opts.seed = std::stoull(it->second);
                    kv.erase(it);
                }
                if (auto it = kv.find("threads"); it != kv.end()) {
                    g_opts.threads = std::max(1, std::stoi(it->second));
                    kv.erase(it);
                }
                if (auto it = kv.find("out"); it != kv.end()) {
                    g_opts.out_dir = it->second;
                    kv.erase(it);
                }
                if (!kv.empty())
                    throw ConfigError("config: unknown key \"" + kv.begin()->first + "\"");
                apply_thread_env(g_opts);  // the environment still wins
            }
            return run_experiment_cmd(g_opts, exp_graphs, exp_methods, exp_p_grid,
                                      exp_samples, exp_reps, exp_radius, exp_reference,
                                      exp_reference_value, out);
        }
        if (pstar_cmd->parsed()) return run_pstar(ps_counts, ps_tol, out);
        err << app.help();
        return 2;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rcr
