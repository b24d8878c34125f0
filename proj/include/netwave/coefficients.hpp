#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "netwave/errors.hpp"
#include "netwave/matrix.hpp"
#include "netwave/ratlattice.hpp"
#include "netwave/signal.hpp"

namespace netwave {

// Representation coefficients for u(t) = sum_j A_j(t) u(t - L_j) where the
// delays L = B * ell share the generator matrix B of the reference structure
// Lambda. Classes of multi-indices are identified by the integer key B^T n,
// so they depend on B only, while levels L.n are evaluated through ell.
//
// Memo tables are single-writer: build sequentially, then read concurrently.
template <typename S>
class CoefficientEngine {
  public:
    CoefficientEngine(DelayVector delays, SwitchingSignal<S> signal)
        : delays_(std::move(delays)), signal_(std::move(signal)) {
        delays_.validate();
        signal_.validate();
        if (signal_.num_delays() != delays_.num_delays())
            throw InvalidInput("coefficients: signal tuple length != number of delays");
        lengths_ = delays_.lengths();
        classes_ = delay_index_classes(delays_);
    }

    static constexpr int kMaxDepth = 64;

    int num_delays() const { return delays_.num_delays(); }
    int dim() const { return signal_.dim(); }
    const DelayVector& delays() const { return delays_; }
    const std::vector<Rational>& lengths() const { return lengths_; }
    const SwitchingSignal<S>& signal() const { return signal_; }
    const std::vector<std::vector<int>>& delay_classes() const { return classes_; }

    Rational level(const ClassKey& key) const {
        Rational x(0);
        for (std::size_t j = 0; j < key.k.size(); ++j) x += Rational(key.k[j]) * delays_.ell[j];
        return x;
    }

    // Xi_{n,t} by the left-factor recursion.
    Mat<S> xi(const std::vector<int>& n, const Rational& t) {
        for (int v : n)
            if (v < 0) return Mat<S>::zero(dim());
        return xi_memo(n, t);
    }

    // Sum over all increasing paths from 0 to n of the ordered products; the
    // independent oracle for xi. Cost is the multinomial of n.
    Mat<S> xi_pathsum(const std::vector<int>& n, const Rational& t, int depth_bound = 12) {
        int total = 0;
        for (int v : n) {
            if (v < 0) throw InvalidInput("xi_pathsum: negative multi-index component");
            total += v;
        }
        if (total > depth_bound) throw CapExceeded("xi_pathsum: |n|_1 exceeds the configured bound");
        if (total == 0) return Mat<S>::identity(dim());

        Mat<S> acc = Mat<S>::zero(dim());
        std::vector<int> remaining = n;
        std::vector<Rational> partial_level{Rational(0)};
        auto rec = [&](auto&& self, const Mat<S>& prefix, int depth) -> void {
            if (depth == total) {
                acc += prefix;
                return;
            }
            for (int k = 0; k < num_delays(); ++k) {
                if (remaining[k] == 0) continue;
                --remaining[k];
                Mat<S> next = prefix * signal_.coeff(k, t - partial_level.back());
                partial_level.push_back(partial_level.back() + lengths_[k]);
                self(self, next, depth + 1);
                partial_level.pop_back();
                ++remaining[k];
            }
        };
        rec(rec, Mat<S>::identity(dim()), 0);
        return acc;
    }

    // Right-factor recursion (second oracle).
    Mat<S> xi_reverse(const std::vector<int>& n, const Rational& t) {
        for (int v : n)
            if (v < 0) return Mat<S>::zero(dim());
        int total = 0;
        for (int v : n) total += v;
        if (total == 0) return Mat<S>::identity(dim());
        if (total > kMaxDepth) throw CapExceeded("xi_reverse: recursion depth cap exceeded");

        MemoKey mk{flatten(n), t};
        if (auto it = rev_memo_.find(mk); it != rev_memo_.end()) return it->second;

        Rational level_n(0);
        for (int k = 0; k < num_delays(); ++k) level_n += Rational(n[k]) * lengths_[k];
        Mat<S> acc = Mat<S>::zero(dim());
        std::vector<int> m = n;
        for (int k = 0; k < num_delays(); ++k) {
            if (n[k] == 0) continue;
            --m[k];
            acc += xi_reverse(m, t) * signal_.coeff(k, t - level_n + lengths_[k]);
            ++m[k];
        }
        rev_memo_.emplace(std::move(mk), acc);
        return acc;
    }

    const std::vector<std::vector<std::int64_t>>& members(const ClassKey& key) {
        auto it = members_.find(key);
        if (it == members_.end()) it = members_.emplace(key, class_members(key, delays_)).first;
        return it->second;
    }

    // XiHat_{[n],t} = sum over [n] ∩ N^N of Xi; zero when the class misses N^N.
    Mat<S> xi_hat(const ClassKey& key, const Rational& t) {
        MemoKey mk{key.k, t};
        if (auto it = hat_memo_.find(mk); it != hat_memo_.end()) return it->second;
        Mat<S> acc = Mat<S>::zero(dim());
        for (const auto& member : members(key)) {
            std::vector<int> n(member.begin(), member.end());
            int total = 0;
            for (int v : n) total += v;
            if (total > kMaxDepth) throw CapExceeded("xi_hat: member beyond recursion depth cap");
            acc += xi_memo(n, t);
        }
        hat_memo_.emplace(std::move(mk), acc);
        return acc;
    }

    // AHat_{[i]}(t): sum of the tuple entries over one delay-index class.
    Mat<S> a_hat(int delay_class, const Rational& t) {
        Mat<S> acc = Mat<S>::zero(dim());
        for (int j : classes_[delay_class]) acc += signal_.coeff(j, t);
        return acc;
    }

    // Theta_{[n],t} over delay classes meeting L.n - L_j <= t; zero for t < 0.
    Mat<S> theta(const ClassKey& key, const Rational& t) {
        if (t < 0) return Mat<S>::zero(dim());
        const Rational level_n = level(key);
        Mat<S> acc = Mat<S>::zero(dim());
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            const int j = classes_[c].front();
            if (level_n - lengths_[j] > t) continue;
            ClassKey shifted;
            shifted.k = key.k;
            bool feasible = true;
            for (std::size_t g = 0; g < shifted.k.size(); ++g) {
                shifted.k[g] -= delays_.B[j][g];
                if (shifted.k[g] < 0) feasible = false;
            }
            if (!feasible) continue;  // class of n - e_j misses N^N entirely
            acc += xi_hat(shifted, t) * a_hat(static_cast<int>(c), t - level_n + lengths_[j]);
        }
        return acc;
    }

  private:
    struct MemoKey {
        std::vector<std::int64_t> idx;
        Rational t;
        bool operator==(const MemoKey& o) const { return idx == o.idx && t == o.t; }
    };
    struct MemoKeyHash {
        std::size_t operator()(const MemoKey& k) const {
            std::size_t h = 1469598103934665603ull;
            for (auto v : k.idx) h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h ^= RationalHash{}(k.t) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return h;
        }
    };

    static std::vector<std::int64_t> flatten(const std::vector<int>& n) {
        return std::vector<std::int64_t>(n.begin(), n.end());
    }

    Mat<S> xi_memo(const std::vector<int>& n, const Rational& t) {
        int total = 0;
        for (int v : n) total += v;
        if (total == 0) return Mat<S>::identity(dim());
        if (total > kMaxDepth) throw CapExceeded("xi: recursion depth cap exceeded");

        MemoKey mk{flatten(n), t};
        if (auto it = xi_memo_.find(mk); it != xi_memo_.end()) return it->second;

        Mat<S> acc = Mat<S>::zero(dim());
        std::vector<int> m = n;
        for (int k = 0; k < num_delays(); ++k) {
            if (n[k] == 0) continue;
            --m[k];
            acc += signal_.coeff(k, t) * xi_memo(m, t - lengths_[k]);
            ++m[k];
        }
        xi_memo_.emplace(std::move(mk), acc);
        return acc;
    }

    DelayVector delays_;
    SwitchingSignal<S> signal_;
    std::vector<Rational> lengths_;
    std::vector<std::vector<int>> classes_;
    std::unordered_map<MemoKey, Mat<S>, MemoKeyHash> xi_memo_, rev_memo_, hat_memo_;
    std::unordered_map<ClassKey, std::vector<std::vector<std::int64_t>>, ClassKeyHash> members_;
};

using CCoefficientEngine = CoefficientEngine<std::complex<double>>;
using QCoefficientEngine = CoefficientEngine<CxRational>;

}  // namespace netwave
