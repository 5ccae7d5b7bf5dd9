#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "rcr/common.hpp"

namespace rcr {

// Set of vertex ids over a fixed universe [0, n), stored as a bit vector.
// All binary operations require both operands to share the same universe.
class VertexSet {
public:
    VertexSet() = default;

    explicit VertexSet(int universe)
        : n_(universe), words_((universe + 63) / 64, 0) {
        detail::require_arg(universe >= 0, "VertexSet: negative universe");
    }

    static VertexSet full(int universe) {
        VertexSet s(universe);
        for (auto& w : s.words_) w = ~std::uint64_t{0};
        s.trim();
        return s;
    }

    int universe_size() const { return n_; }

    bool test(int v) const { return (words_[v >> 6] >> (v & 63)) & 1u; }
    void set(int v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
    void reset(int v) { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }

    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    int count() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    // Smallest member, or -1 when empty.
    int first() const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i]) return static_cast<int>(i * 64 + std::countr_zero(words_[i]));
        return -1;
    }

    // Smallest member strictly greater than v, or -1.
    int next_after(int v) const {
        ++v;
        if (v >= n_) return -1;
        std::size_t i = static_cast<std::size_t>(v) >> 6;
        std::uint64_t w = words_[i] >> (v & 63);
        if (w) return v + std::countr_zero(w);
        for (++i; i < words_.size(); ++i)
            if (words_[i]) return static_cast<int>(i * 64 + std::countr_zero(words_[i]));
        return -1;
    }

    VertexSet& operator|=(const VertexSet& o) {
        check_same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }

    VertexSet& operator&=(const VertexSet& o) {
        check_same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }

    // Set difference.
    VertexSet& operator-=(const VertexSet& o) {
        check_same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    // Complement within the universe.
    VertexSet operator~() const {
        VertexSet r(n_);
        for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
        r.trim();
        return r;
    }

    friend VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
    friend VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
    friend VertexSet operator-(VertexSet a, const VertexSet& b) { return a -= b; }

    bool operator==(const VertexSet& o) const {
        return n_ == o.n_ && words_ == o.words_;
    }

    bool is_subset_of(const VertexSet& o) const {
        check_same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    bool contains_all(const VertexSet& o) const { return o.is_subset_of(*this); }

    bool intersects(const VertexSet& o) const {
        check_same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    std::vector<int> to_vector() const {
        std::vector<int> out;
        out.reserve(count());
        for (int v = first(); v >= 0; v = next_after(v)) out.push_back(v);
        return out;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(n_);
        for (auto w : words_) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

    std::string to_string() const {
        std::string s = "{";
        for (int v = first(); v >= 0; v = next_after(v)) {
            if (s.size() > 1) s += ',';
            s += std::to_string(v);
        }
        s += '}';
        return s;
    }

    struct Hash {
        std::size_t operator()(const VertexSet& s) const { return s.hash(); }
    };

private:
    void trim() {
        int extra = static_cast<int>(words_.size()) * 64 - n_;
        if (extra > 0 && !words_.empty())
            words_.back() &= ~std::uint64_t{0} >> extra;
    }

    void check_same_universe(const VertexSet& o) const {
        detail::require_arg(n_ == o.n_, "VertexSet: universe mismatch");
    }

    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace rcr
