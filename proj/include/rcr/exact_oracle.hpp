#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcr/graph.hpp"

namespace rcr {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// counts[i] = number of i-vertex subsets inducing a connected subgraph.
// The empty set counts as disconnected, so counts[0] == 0.
struct CountVector {
    int n = 0;
    std::vector<BigInt> counts;  // size n + 1
};

// Enumerates all 2^n vertex subsets. Refuses above `max_vertices`.
CountVector brute_force_counts(const Graph& g, int max_vertices = 26);

// Interface state of the row-by-row subgraph sweep: which cells of the
// current row are occupied, and how the maximal runs of occupied cells are
// partitioned into classes connected through rows already placed. The two
// empty phases distinguish "nothing placed yet" from "one component sealed".
struct TMState {
    enum class Phase { pre, active, finished };
    Phase phase = Phase::pre;
    std::uint32_t occupancy = 0;        // bit i = cell i occupied
    std::vector<int> run_classes;       // class id per run, restricted growth
};

// All valid interface states for the given row width (both empty phases plus
// every occupancy with a non-crossing run partition). Guarded to width <= 12.
std::vector<TMState> tm_state_space(int width);

// Connected-induced-subgraph counts of the width x height grid graph via the
// interface-state dynamic program, tracking subgraph size exactly.
CountVector tm_counts(int width, int height);

// Exact residual connectedness reliability: sum_i c_i p^i (1-p)^(n-i).
BigRat rcr_from_counts(const CountVector& c, const BigRat& p);

// Exact E[|X| | X connected] = sum_i i c_i w_i / sum_i c_i w_i.
BigRat conditional_mean_size(const CountVector& c, const BigRat& p);

struct PStarResult {
    double value = 0.0;
    int sign_changes = 0;   // at the scan resolution
    bool boundary = false;  // no interior crossing; p = 1 is always a root
};

// Fixed point of p = E[|X|/n | X connected], located by sign scan plus
// bisection in exact integer arithmetic. Multiple crossings resolve to the
// one nearest 1/2.
PStarResult p_star(const CountVector& c, double tol);

// Decimal probability string ("0.3") to an exact rational.
BigRat parse_probability(const std::string& text);

// Rounded decimal rendering with trailing zeros stripped.
std::string decimal_string(const BigRat& value, int digits);

// Counts file: line 1 "n", then n+1 lines "i c_i".
void write_counts(const CountVector& c, std::ostream& out);
CountVector read_counts(std::istream& in);

}  // namespace rcr
