#include "rcr/exact_oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "rcr/common.hpp"

namespace rcr {

namespace {

constexpr int kMaxTmWidth = 12;

int popcount32(std::uint32_t x) { return std::popcount(x); }

}  // namespace

CountVector brute_force_counts(const Graph& g, int max_vertices) {
    const int n = g.vertex_count();
    detail::require_arg(
        n <= max_vertices && n <= 63,
        "brute_force_counts: graph has " + std::to_string(n) +
            " vertices, enumeration limit is " + std::to_string(std::min(max_vertices, 63)));

    std::vector<std::uint64_t> adj(n, 0);
    for (int v = 0; v < n; ++v)
        for (int w : g.neighbors(v)) adj[v] |= std::uint64_t{1} << w;

    std::vector<long long> counts(n + 1, 0);
    const std::uint64_t limit = std::uint64_t{1} << n;
    for (std::uint64_t sub = 1; sub < limit; ++sub) {
        std::uint64_t comp = sub & (~sub + 1);  // lowest member
        std::uint64_t frontier = comp;
        while (frontier) {
            std::uint64_t next = 0;
            while (frontier) {
                int v = std::countr_zero(frontier);
                frontier &= frontier - 1;
                next |= adj[v];
            }
            next &= sub & ~comp;
            comp |= next;
            frontier = next;
        }
        if (comp == sub) ++counts[std::popcount(sub)];
    }

    CountVector out;
    out.n = n;
    out.counts.assign(counts.begin(), counts.end());
    return out;
}

namespace {

// Maximal runs of set bits, low to high. Fills cell -> run index (-1 gaps).
int extract_runs(std::uint32_t occ, int width, std::array<int, kMaxTmWidth>& run_of_cell) {
    int runs = 0;
    bool in_run = false;
    for (int i = 0; i < width; ++i) {
        if (occ >> i & 1) {
            if (!in_run) {
                ++runs;
                in_run = true;
            }
            run_of_cell[i] = runs - 1;
        } else {
            run_of_cell[i] = -1;
            in_run = false;
        }
    }
    return runs;
}

struct TinyUnionFind {
    std::array<int, 2 * kMaxTmWidth> parent;
    void init(int k) { std::iota(parent.begin(), parent.begin() + k, 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

constexpr std::uint32_t kPhasePre = 0;
constexpr std::uint32_t kPhaseActive = 1;
constexpr std::uint32_t kPhaseFinished = 2;

// Key layout: phase (2 bits) | occupancy (12 bits) | run class ids (4 bits each).
std::uint64_t encode_state(std::uint32_t phase, std::uint32_t occ,
                           const int* classes, int runs) {
    std::uint64_t key = phase | (static_cast<std::uint64_t>(occ) << 2);
    for (int i = 0; i < runs; ++i)
        key |= static_cast<std::uint64_t>(classes[i]) << (14 + 4 * i);
    return key;
}

// Per-row occupancy metadata, shared across all source states.
struct RowPattern {
    std::uint32_t occ;
    int runs;
    int cells;
    std::array<int, kMaxTmWidth> run_of_cell;
};

std::vector<RowPattern> build_row_patterns(int width) {
    std::vector<RowPattern> out(std::size_t{1} << width);
    for (std::uint32_t occ = 0; occ < out.size(); ++occ) {
        out[occ].occ = occ;
        out[occ].cells = popcount32(occ);
        out[occ].runs = extract_runs(occ, width, out[occ].run_of_cell);
    }
    return out;
}

// Computes the successor state key, or -1 when the transition would strand a
// component. `classes`/`runs` describe the source state (active phase only).
std::int64_t transition(std::uint32_t phase, std::uint32_t occ, const int* classes,
                        int runs, int class_count, const RowPattern& next_row) {
    if (phase == kPhasePre) {
        if (next_row.occ == 0) return encode_state(kPhasePre, 0, nullptr, 0);
        std::array<int, kMaxTmWidth> fresh{};
        std::iota(fresh.begin(), fresh.begin() + next_row.runs, 0);
        return encode_state(kPhaseActive, next_row.occ, fresh.data(), next_row.runs);
    }
    if (phase == kPhaseFinished) {
        if (next_row.occ != 0) return -1;
        return encode_state(kPhaseFinished, 0, nullptr, 0);
    }

    if (next_row.occ == 0) {
        // Every class loses interface contact; legal only when one component
        // remains, which then seals.
        if (class_count != 1) return -1;
        return encode_state(kPhaseFinished, 0, nullptr, 0);
    }

    TinyUnionFind uf;
    uf.init(class_count + next_row.runs);
    std::uint32_t shared = occ & next_row.occ;
    std::array<int, kMaxTmWidth> old_run_of_cell{};
    extract_runs(occ, kMaxTmWidth, old_run_of_cell);
    for (std::uint32_t bits = shared; bits;) {
        int cell = std::countr_zero(bits);
        bits &= bits - 1;
        uf.unite(classes[old_run_of_cell[cell]], class_count + next_row.run_of_cell[cell]);
    }

    // Roots of components that touch the new row.
    std::uint32_t live_roots = 0;
    for (int j = 0; j < next_row.runs; ++j)
        live_roots |= std::uint32_t{1} << uf.find(class_count + j);
    for (int c = 0; c < class_count; ++c)
        if (!(live_roots >> uf.find(c) & 1)) return -1;  // stranded component

    std::array<int, kMaxTmWidth> new_classes{};
    std::array<int, 2 * kMaxTmWidth> root_to_class{};
    root_to_class.fill(-1);
    int next_class = 0;
    for (int j = 0; j < next_row.runs; ++j) {
        int root = uf.find(class_count + j);
        if (root_to_class[root] < 0) root_to_class[root] = next_class++;
        new_classes[j] = root_to_class[root];
    }
    return encode_state(kPhaseActive, next_row.occ, new_classes.data(), next_row.runs);
}

void decode_state(std::uint64_t key, std::uint32_t& phase, std::uint32_t& occ,
                  std::array<int, kMaxTmWidth>& classes, int& runs, int& class_count) {
    phase = key & 3;
    occ = static_cast<std::uint32_t>(key >> 2) & 0xfff;
    std::array<int, kMaxTmWidth> run_of_cell{};
    runs = extract_runs(occ, kMaxTmWidth, run_of_cell);
    class_count = 0;
    for (int i = 0; i < runs; ++i) {
        classes[i] = static_cast<int>(key >> (14 + 4 * i) & 0xf);
        class_count = std::max(class_count, classes[i] + 1);
    }
}

bool has_crossing(const std::vector<int>& part) {
    const int r = static_cast<int>(part.size());
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
            for (int k = j + 1; k < r; ++k)
                for (int l = k + 1; l < r; ++l)
                    if (part[i] == part[k] && part[j] == part[l] && part[i] != part[j])
                        return true;
    return false;
}

void enumerate_partitions(int r, std::vector<int>& cur, int max_used,
                          const std::function<void(const std::vector<int>&)>& emit) {
    if (static_cast<int>(cur.size()) == r) {
        emit(cur);
        return;
    }
    for (int c = 0; c <= max_used + 1; ++c) {
        cur.push_back(c);
        enumerate_partitions(r, cur, std::max(max_used, c), emit);
        cur.pop_back();
    }
}

}  // namespace

std::vector<TMState> tm_state_space(int width) {
    detail::require_arg(width >= 1 && width <= kMaxTmWidth,
                        "tm_state_space: width must lie in [1, " +
                            std::to_string(kMaxTmWidth) + "]");
    std::vector<TMState> out;
    out.push_back({TMState::Phase::pre, 0, {}});
    out.push_back({TMState::Phase::finished, 0, {}});
    std::array<int, kMaxTmWidth> run_of_cell{};
    for (std::uint32_t occ = 1; occ < (std::uint32_t{1} << width); ++occ) {
        int runs = extract_runs(occ, width, run_of_cell);
        std::vector<int> cur;
        enumerate_partitions(runs, cur, -1, [&](const std::vector<int>& part) {
            if (has_crossing(part)) return;
            out.push_back({TMState::Phase::active, occ, part});
        });
    }
    return out;
}

CountVector tm_counts(int width, int height) {
    detail::require_arg(width >= 1 && width <= kMaxTmWidth,
                        "tm_counts: width must lie in [1, " + std::to_string(kMaxTmWidth) + "]");
    detail::require_arg(height >= 1, "tm_counts: height must be positive");
    const int n = width * height;

    const std::vector<RowPattern> rows = build_row_patterns(width);
    using Poly = std::vector<BigInt>;  // coefficient of z^i = subgraphs with i vertices
    std::unordered_map<std::uint64_t, Poly> cur;
    cur[encode_state(kPhasePre, 0, nullptr, 0)] = Poly{BigInt(1)};

    for (int row = 0; row < height; ++row) {
        std::unordered_map<std::uint64_t, Poly> next;
        next.reserve(cur.size() * 2);
        for (const auto& [key, poly] : cur) {
            std::uint32_t phase, occ;
            std::array<int, kMaxTmWidth> classes{};
            int runs, class_count;
            decode_state(key, phase, occ, classes, runs, class_count);
            for (const RowPattern& nr : rows) {
                std::int64_t target =
                    transition(phase, occ, classes.data(), runs, class_count, nr);
                if (target < 0) continue;
                Poly& dst = next[static_cast<std::uint64_t>(target)];
                if (dst.size() < poly.size() + nr.cells)
                    dst.resize(poly.size() + nr.cells);
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    if (!poly[i].is_zero()) dst[i + nr.cells] += poly[i];
                }
            }
        }
        cur = std::move(next);
    }

    CountVector out;
    out.n = n;
    out.counts.assign(n + 1, BigInt(0));
    for (const auto& [key, poly] : cur) {
        std::uint32_t phase, occ;
        std::array<int, kMaxTmWidth> classes{};
        int runs, class_count;
        decode_state(key, phase, occ, classes, runs, class_count);
        bool accept = phase == kPhaseFinished || (phase == kPhaseActive && class_count == 1);
        if (!accept) continue;
        for (std::size_t i = 0; i < poly.size() && i <= static_cast<std::size_t>(n); ++i)
            out.counts[i] += poly[i];
    }
    return out;
}

BigRat rcr_from_counts(const CountVector& c, const BigRat& p) {
    detail::require_arg(p >= 0 && p <= 1, "rcr_from_counts: p outside [0,1]");
    const int n = c.n;
    const BigRat q = 1 - p;
    BigRat acc = 0;
    BigRat p_pow = 1;
    std::vector<BigRat> q_pows(n + 1);
    q_pows[0] = 1;
    for (int i = 1; i <= n; ++i) q_pows[i] = q_pows[i - 1] * q;
    for (int i = 0; i <= n; ++i) {
        if (!c.counts[i].is_zero()) acc += BigRat(c.counts[i]) * p_pow * q_pows[n - i];
        p_pow *= p;
    }
    return acc;
}

BigRat conditional_mean_size(const CountVector& c, const BigRat& p) {
    const int n = c.n;
    const BigRat q = 1 - p;
    BigRat num = 0, den = 0;
    BigRat p_pow = 1;
    std::vector<BigRat> q_pows(n + 1);
    q_pows[0] = 1;
    for (int i = 1; i <= n; ++i) q_pows[i] = q_pows[i - 1] * q;
    for (int i = 0; i <= n; ++i) {
        if (!c.counts[i].is_zero()) {
            BigRat w = BigRat(c.counts[i]) * p_pow * q_pows[n - i];
            num += i * w;
            den += w;
        }
        p_pow *= p;
    }
    if (den.is_zero()) throw std::runtime_error("conditional_mean_size: zero denominator");
    return num / den;
}

namespace {

// Sign of g(a/b) = E[|X| | F]/n - a/b, cleared of positive denominators:
// sign( b * sum_i i c_i a^i (b-a)^(n-i)  -  n a * sum_i c_i a^i (b-a)^(n-i) ).
int fixed_point_sign(const CountVector& c, const BigInt& a, const BigInt& b) {
    const int n = c.n;
    BigInt bma = b - a;
    std::vector<BigInt> a_pows(n + 1), bma_pows(n + 1);
    a_pows[0] = 1;
    bma_pows[0] = 1;
    for (int i = 1; i <= n; ++i) {
        a_pows[i] = a_pows[i - 1] * a;
        bma_pows[i] = bma_pows[i - 1] * bma;
    }
    BigInt s0 = 0, s1 = 0;
    for (int i = 0; i <= n; ++i) {
        if (c.counts[i].is_zero()) continue;
        BigInt w = c.counts[i] * a_pows[i] * bma_pows[n - i];
        s0 += w;
        s1 += i * w;
    }
    BigInt lhs = b * s1 - n * a * s0;
    return lhs.sign();
}

}  // namespace

PStarResult p_star(const CountVector& c, double tol) {
    detail::require_arg(tol > 0, "p_star: tolerance must be positive");
    detail::require_arg(c.n >= 1 && !c.counts[c.n].is_zero(),
                        "p_star: counts must come from a connected graph");

    constexpr int kScan = 256;  // sign scan resolution over (0, 1)
    std::array<int, kScan> sign{};
    for (int j = 1; j < kScan; ++j) sign[j] = fixed_point_sign(c, j, kScan);

    struct Bracket {
        BigRat lo, hi;
        double mid;
    };
    std::vector<Bracket> brackets;
    for (int j = 1; j + 1 < kScan; ++j) {
        if (sign[j] == 0) {
            BigRat point(j, kScan);
            brackets.push_back({point, point, static_cast<double>(j) / kScan});
        } else if (sign[j] * sign[j + 1] < 0) {
            brackets.push_back({BigRat(j, kScan), BigRat(j + 1, kScan),
                                (j + 0.5) / kScan});
        }
    }

    PStarResult result;
    result.sign_changes = static_cast<int>(brackets.size());
    if (brackets.empty()) {
        // g(0+) > 0 and g(1) = 0 exactly: the fixed point sits on the
        // boundary, as for graphs whose conditional mean only reaches p at 1.
        result.value = 1.0;
        result.boundary = true;
        return result;
    }

    const Bracket* best = &brackets[0];
    for (const Bracket& b : brackets)
        if (std::abs(b.mid - 0.5) < std::abs(best->mid - 0.5)) best = &b;

    BigRat lo = best->lo, hi = best->hi;
    if (lo != hi) {
        int lo_sign = fixed_point_sign(c, boost::multiprecision::numerator(lo),
                                       boost::multiprecision::denominator(lo));
        const BigRat width_limit(tol);
        while (hi - lo > width_limit) {
            BigRat mid = (lo + hi) / 2;
            int s = fixed_point_sign(c, boost::multiprecision::numerator(mid),
                                     boost::multiprecision::denominator(mid));
            if (s == 0) {
                lo = hi = mid;
                break;
            }
            if (s == lo_sign)
                lo = mid;
            else
                hi = mid;
        }
    }
    result.value = static_cast<double>((lo + hi) / 2);
    return result;
}

BigRat parse_probability(const std::string& text) {
    std::size_t dot = text.find('.');
    std::string digits = text;
    int frac_len = 0;
    if (dot != std::string::npos) {
        digits = text.substr(0, dot) + text.substr(dot + 1);
        frac_len = static_cast<int>(text.size() - dot - 1);
    }
    detail::require_arg(!digits.empty() &&
                            digits.find_first_not_of("0123456789") == std::string::npos,
                        "invalid probability string: \"" + text + "\"");
    // Strip leading zeros; the big-integer parser would read them as octal.
    std::size_t nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    BigInt num(digits);
    BigInt den = 1;
    for (int i = 0; i < frac_len; ++i) den *= 10;
    BigRat value(num, den);
    detail::require_arg(value >= 0 && value <= 1,
                        "probability out of [0,1]: \"" + text + "\"");
    return value;
}

std::string decimal_string(const BigRat& value, int digits) {
    detail::require_arg(digits >= 1, "decimal_string: digits must be positive");
    BigInt num = boost::multiprecision::numerator(value);
    BigInt den = boost::multiprecision::denominator(value);
    std::string sign;
    if (num < 0) {
        sign = "-";
        num = -num;
    }
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    BigInt scaled = num * scale;
    BigInt q = scaled / den;
    if (2 * (scaled % den) >= den) ++q;  // round half up
    BigInt int_part = q / scale;
    BigInt frac_part = q % scale;
    std::string frac = frac_part.str();
    frac.insert(frac.begin(), digits - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    std::string out = sign + int_part.str();
    if (!frac.empty()) out += "." + frac;
    return out;
}

void write_counts(const CountVector& c, std::ostream& out) {
    out << c.n << '\n';
    for (int i = 0; i <= c.n; ++i) out << i << ' ' << c.counts[i] << '\n';
}

CountVector read_counts(std::istream& in) {
    CountVector c;
    if (!(in >> c.n) || c.n < 1)
        throw std::invalid_argument("counts file: bad vertex count");
    c.counts.assign(c.n + 1, BigInt(0));
    for (int i = 0; i <= c.n; ++i) {
        int idx;
        std::string value;
        if (!(in >> idx >> value) || idx != i ||
            value.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("counts file: bad entry at index " + std::to_string(i));
        std::size_t nz = value.find_first_not_of('0');
        c.counts[i] = BigInt(nz == std::string::npos ? "0" : value.substr(nz));
    }
    return c;
}

}  // namespace rcr
