#include "doctest.h"

#include <random>

#include "netwave/ratlattice.hpp"

using namespace netwave;

namespace {

DelayVector make(std::vector<std::vector<std::int64_t>> B, std::vector<std::string> ell = {}) {
    DelayVector dv;
    dv.B = std::move(B);
    for (const auto& s : ell) dv.ell.push_back(parse_rational(s));
    dv.validate();
    return dv;
}

}  // namespace

TEST_CASE("integer kernel of simple structures") {
    CHECK(integer_kernel({{1}, {2}}) == std::vector<std::vector<std::int64_t>>{{2, -1}});
    CHECK(integer_kernel({{1, 0}, {0, 1}}).empty());
    CHECK(integer_kernel({{1, 0}, {0, 1}, {1, 1}}) ==
          std::vector<std::vector<std::int64_t>>{{1, 1, -1}});
}

TEST_CASE("integer kernel rejects rank deficiency") {
    CHECK_THROWS_AS(integer_kernel({{1, 2}, {2, 4}}), InvalidInput);
}

TEST_CASE("kernel vectors annihilate B^T exactly") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        int N = 2 + static_cast<int>(rng() % 3);
        int h = 1 + static_cast<int>(rng() % N);
        std::vector<std::vector<std::int64_t>> B(N, std::vector<std::int64_t>(h, 0));
        for (auto& row : B) {
            bool nonzero = false;
            for (auto& v : row) {
                v = static_cast<std::int64_t>(rng() % 4);
                nonzero = nonzero || v > 0;
            }
            if (!nonzero) row[rng() % h] = 1;
        }
        std::vector<std::vector<std::int64_t>> basis;
        try {
            basis = integer_kernel(B);
        } catch (const InvalidInput&) {
            continue;  // rank-deficient draw
        }
        CHECK(basis.size() == static_cast<std::size_t>(N - h));
        for (const auto& z : basis)
            for (int j = 0; j < h; ++j) {
                std::int64_t dot = 0;
                for (int i = 0; i < N; ++i) dot += B[i][j] * z[i];
                CHECK(dot == 0);
            }
    }
}

TEST_CASE("class keys separate cosets of the kernel lattice") {
    auto dv = make({{1}, {2}}, {"1"});
    CHECK(class_key({0, 0}, dv).k == std::vector<std::int64_t>{0});
    CHECK(class_key({2, 0}, dv) == class_key({0, 1}, dv));
    CHECK(class_key({1, 0}, dv).k == std::vector<std::int64_t>{1});
    CHECK(class_key({0, 1}, dv).k == std::vector<std::int64_t>{2});
}

TEST_CASE("class_key constant on cosets and injective across them (exhaustive)") {
    for (auto Bcase : {std::vector<std::vector<std::int64_t>>{{1}, {2}},
                       std::vector<std::vector<std::int64_t>>{{1, 0}, {0, 1}, {1, 1}},
                       std::vector<std::vector<std::int64_t>>{{2}, {3}, {1}, {5}}}) {
        DelayVector dv;
        dv.B = Bcase;
        dv.validate();
        auto basis = integer_kernel(dv.B);
        const int N = dv.num_delays();
        // all n in Z^N with |n|_1 <= 8 restricted to a small box
        std::vector<std::vector<std::int64_t>> pts;
        std::vector<std::int64_t> n(N, 0);
        auto rec = [&](auto&& self, int i, int budget) -> void {
            if (i == N) {
                pts.push_back(n);
                return;
            }
            for (int v = -budget; v <= budget; ++v) {
                n[i] = v;
                self(self, i + 1, budget - std::abs(v));
            }
            n[i] = 0;
        };
        rec(rec, 0, N <= 2 ? 8 : 4);
        auto in_kernel_lattice = [&](std::vector<std::int64_t> diff) {
            // solve over the basis by brute-force small coefficients
            if (basis.empty()) {
                for (auto v : diff)
                    if (v != 0) return false;
                return true;
            }
            // basis has rank N-h; small search over coefficients in [-16,16]
            std::vector<std::int64_t> coef(basis.size(), 0);
            auto rec2 = [&](auto&& self, std::size_t bi) -> bool {
                if (bi == basis.size()) {
                    for (auto v : diff)
                        if (v != 0) return false;
                    return true;
                }
                for (std::int64_t c = -16; c <= 16; ++c) {
                    for (int i = 0; i < N; ++i) diff[i] -= c * basis[bi][i];
                    if (self(self, bi + 1)) return true;
                    for (int i = 0; i < N; ++i) diff[i] += c * basis[bi][i];
                }
                return false;
            };
            return rec2(rec2, 0);
        };
        for (std::size_t a = 0; a < pts.size(); a += 7)
            for (std::size_t b = a; b < pts.size(); b += 13) {
                std::vector<std::int64_t> diff(N);
                for (int i = 0; i < N; ++i) diff[i] = pts[a][i] - pts[b][i];
                bool same_key = class_key(pts[a], dv) == class_key(pts[b], dv);
                CHECK(same_key == in_kernel_lattice(diff));
            }
    }
}

TEST_CASE("class member enumeration") {
    auto dv = make({{1}, {2}}, {"1"});
    ClassKey two{{2}};
    CHECK(class_members(two, dv) ==
          std::vector<std::vector<std::int64_t>>{{0, 1}, {2, 0}});
    ClassKey neg{{-1}};
    CHECK(class_members(neg, dv).empty());

    auto id2 = make({{1, 0}, {0, 1}}, {"1", "1"});
    ClassKey k{{3, 5}};
    CHECK(class_members(k, id2) == std::vector<std::vector<std::int64_t>>{{3, 5}});
}

TEST_CASE("class_members complete against brute force") {
    auto dv = make({{1, 1}, {2, 0}, {0, 3}});
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::int64_t> n{static_cast<std::int64_t>(rng() % 4),
                                    static_cast<std::int64_t>(rng() % 4),
                                    static_cast<std::int64_t>(rng() % 4)};
        auto key = class_key(n, dv);
        auto members = class_members(key, dv);
        // brute force over a box
        std::vector<std::vector<std::int64_t>> expect;
        for (std::int64_t a = 0; a <= 12; ++a)
            for (std::int64_t b = 0; b <= 12; ++b)
                for (std::int64_t c = 0; c <= 12; ++c)
                    if (class_key({a, b, c}, dv) == key) expect.push_back({a, b, c});
        CHECK(members == expect);
        for (const auto& m : members) CHECK(class_key(m, dv) == key);
    }
}

TEST_CASE("membership in V by rational solve") {
    auto dv = make({{1}, {2}}, {"1"});
    auto w = membership_V({Rational(1), Rational(3)}, dv);
    CHECK(!w.has_value());
    auto w2 = membership_V({Rational(3, 2), Rational(3)}, dv);
    REQUIRE(w2.has_value());
    CHECK((*w2)[0] == Rational(3, 2));
    // Lambda itself
    auto w3 = membership_V(dv.lengths(), dv);
    REQUIRE(w3.has_value());
    CHECK((*w3)[0] == Rational(1));
}

TEST_CASE("membership in V is scaling invariant") {
    auto dv = make({{2, 1}, {1, 0}, {0, 3}}, {"2/3", "5/7"});
    for (auto s : {Rational(1, 2), Rational(3), Rational(7, 5)}) {
        auto L = dv.lengths();
        for (auto& v : L) v *= s;
        CHECK(membership_V(L, dv).has_value());
    }
}

TEST_CASE("membership in W compares kernel lattices of symbolic forms") {
    auto dv = make({{1}, {2}});
    CHECK(membership_W(dv, dv));
    auto id2 = make({{1, 0}, {0, 1}});
    CHECK(!membership_W(id2, dv));
    auto same = make({{1}, {1}});
    auto doubled = make({{2}, {2}});
    CHECK(membership_W(doubled, same));
    auto numeric = make({{1}, {2}}, {"1"});
    CHECK_THROWS_AS(membership_W(numeric, dv), InvalidInput);
}

TEST_CASE("delay index classes group equal rows") {
    auto dv = make({{1}, {1}, {2}});
    auto classes = delay_index_classes(dv);
    REQUIRE(classes.size() == 2);
    CHECK(classes[0] == std::vector<int>{0, 1});
    CHECK(classes[1] == std::vector<int>{2});
}
