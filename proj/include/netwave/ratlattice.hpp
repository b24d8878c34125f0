#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netwave/rational.hpp"

namespace netwave {

// Delay vector in generator form: Lambda = B * ell with B a nonnegative integer
// N x h matrix of full column rank. A numeric instantiation carries rational
// generator values; a symbolic one carries only B.
struct DelayVector {
    std::vector<std::vector<std::int64_t>> B;  // N rows, h columns
    std::vector<Rational> ell;                 // size h, empty when symbolic

    int num_delays() const { return static_cast<int>(B.size()); }
    int num_generators() const { return B.empty() ? 0 : static_cast<int>(B.front().size()); }
    bool symbolic() const { return ell.empty(); }

    // Throws InvalidInput if the invariants fail (shape, nonnegativity,
    // nonzero rows, full column rank, positive instantiated delays).
    void validate() const;

    std::vector<Rational> lengths() const;  // B * ell (numeric only)
    Rational length_max() const;
    Rational length_min() const;
};

struct ClassKey {
    std::vector<std::int64_t> k;  // value B^T n

    friend bool operator==(const ClassKey& a, const ClassKey& b) { return a.k == b.k; }
    friend bool operator<(const ClassKey& a, const ClassKey& b) { return a.k < b.k; }
    std::string str() const;
};

struct ClassKeyHash {
    std::size_t operator()(const ClassKey& key) const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : key.k) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// Basis of Z(Lambda) = Ker B^T over the integers, via exact unimodular column
// elimination. Basis vectors are normalized (leading nonzero positive) and
// sorted; empty when the kernel is {0}. Throws on rank deficiency.
std::vector<std::vector<std::int64_t>> integer_kernel(const std::vector<std::vector<std::int64_t>>& B);

ClassKey class_key(const std::vector<std::int64_t>& n, const DelayVector& delays);

// Exact enumeration of [n] ∩ N^N for the class identified by `key`,
// lexicographically sorted. Finite because every row of B is nonzero.
std::vector<std::vector<std::int64_t>> class_members(const ClassKey& key, const DelayVector& delays);

// L = B ell' solvable over the rationals; witness returned on success.
std::optional<std::vector<Rational>> membership_V(const std::vector<Rational>& L, const DelayVector& delays);

// Symbolic variant: every column of L.B must lie in range(B).
bool membership_V_symbolic(const DelayVector& L, const DelayVector& delays);

// Z(L) == Z(Lambda) as lattices; both sides must be symbolic generator forms.
bool membership_W(const DelayVector& L, const DelayVector& delays);

// Partition of the delay indices by symbolically-equal delay (equal rows of B).
std::vector<std::vector<int>> delay_index_classes(const DelayVector& delays);

}  // namespace netwave
