#include "doctest.h"

#include <set>

#include "netwave/coefficients.hpp"
#include "test_util.hpp"

using namespace netwave;
using netwave::testutil::random_rational;
using netwave::testutil::random_signal;

namespace {

DelayVector delays_1_2() {
    DelayVector dv;
    dv.B = {{1}, {2}};
    dv.ell = {Rational(1)};
    return dv;
}

QSignal constant_scalar_pair(const Rational& a, const Rational& b) {
    QMat ma(1), mb(1);
    ma(0, 0) = CxRational{a};
    mb(0, 0) = CxRational{b};
    MatrixTuple<CxRational> tup;
    tup.A = {ma, mb};
    return QSignal::constant(tup);
}

// Random delay structures with small entries; N delays over h generators.
DelayVector random_structure(std::mt19937_64& rng, int N) {
    while (true) {
        int h = 1 + static_cast<int>(rng() % N);
        DelayVector dv;
        dv.B.assign(N, std::vector<std::int64_t>(h, 0));
        for (auto& row : dv.B) {
            bool nz = false;
            for (auto& v : row) {
                v = static_cast<std::int64_t>(rng() % 3);
                nz = nz || v > 0;
            }
            if (!nz) row[rng() % h] = 1 + static_cast<std::int64_t>(rng() % 2);
        }
        for (int j = 0; j < h; ++j)
            dv.ell.push_back(Rational(1 + static_cast<std::int64_t>(rng() % 6),
                                      1 + static_cast<std::int64_t>(rng() % 3)));
        try {
            dv.validate();
        } catch (const InvalidInput&) {
            continue;
        }
        return dv;
    }
}

}  // namespace

TEST_CASE("xi base cases") {
    std::mt19937_64 rng(3);
    auto dv = random_structure(rng, 2);
    auto sig = random_signal<CxRational>(rng, 2, 2);
    QCoefficientEngine eng(dv, sig);

    Rational t(5, 3);
    CHECK(eng.xi({0, 0}, t) == QMat::identity(2));
    CHECK(eng.xi({1, 0}, t) == sig.coeff(0, t));
    CHECK(eng.xi({0, 1}, t) == sig.coeff(1, t));
    CHECK(eng.xi({-1, 2}, t) == QMat::zero(2));
}

TEST_CASE("xi geometric in the scalar single-delay case") {
    DelayVector dv;
    dv.B = {{1}};
    dv.ell = {Rational(1)};
    QMat a(1);
    a(0, 0) = CxRational{Rational(1, 2)};
    MatrixTuple<CxRational> tup;
    tup.A = {a};
    QCoefficientEngine eng(dv, QSignal::constant(tup));
    CxRational expect = ScalarTraits<CxRational>::one();
    for (int n = 0; n <= 8; ++n) {
        CHECK(eng.xi({n}, Rational(7, 2))(0, 0) == expect);
        expect = expect * CxRational{Rational(1, 2)};
    }
}

TEST_CASE("xi equals both oracles on random rational instances") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        int N = 1 + static_cast<int>(rng() % 3);
        int d = 1 + static_cast<int>(rng() % 3);
        auto dv = random_structure(rng, N);
        auto sig = random_signal<CxRational>(rng, N, d);
        QCoefficientEngine eng(dv, sig);
        Rational t = random_rational(rng, 6, 3);
        std::vector<int> n(N, 0);
        auto rec = [&](auto&& self, int i, int budget) -> void {
            if (i == N) {
                auto direct = eng.xi(n, t);
                CHECK(direct == eng.xi_pathsum(n, t));
                CHECK(direct == eng.xi_reverse(n, t));
                return;
            }
            for (int v = 0; v <= budget; ++v) {
                n[i] = v;
                self(self, i + 1, budget - v);
            }
            n[i] = 0;
        };
        rec(rec, 0, 4);
    }
}

TEST_CASE("pathsum rejects out-of-bound requests") {
    std::mt19937_64 rng(23);
    auto dv = random_structure(rng, 2);
    auto sig = random_signal<CxRational>(rng, 2, 1);
    QCoefficientEngine eng(dv, sig);
    CHECK_THROWS_AS(eng.xi_pathsum({-1, 0}, Rational(0)), InvalidInput);
    CHECK_THROWS_AS(eng.xi_pathsum({20, 20}, Rational(0), 12), CapExceeded);
}

TEST_CASE("xi_hat on the trivial lattice is xi") {
    std::mt19937_64 rng(29);
    DelayVector dv;
    dv.B = {{1, 0}, {0, 1}};
    dv.ell = {Rational(1), Rational(4, 3)};
    auto sig = random_signal<CxRational>(rng, 2, 2);
    QCoefficientEngine eng(dv, sig);
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b) {
            ClassKey key = class_key({a, b}, dv);
            CHECK(eng.xi_hat(key, Rational(1, 3)) == eng.xi({a, b}, Rational(1, 3)));
        }
}

TEST_CASE("xi_hat aggregates the dependent-delay class") {
    auto dv = delays_1_2();
    Rational a(2, 3), b(-1, 4);
    QCoefficientEngine eng(dv, constant_scalar_pair(a, b));
    ClassKey key{{2}};
    CHECK(eng.xi_hat(key, Rational(9, 7))(0, 0) == CxRational{a * a + b});
    ClassKey empty{{-3}};
    CHECK(eng.xi_hat(empty, Rational(1)) == QMat::zero(1));
}

TEST_CASE("xi_hat satisfies both class recursions") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        int N = 1 + static_cast<int>(rng() % 3);
        int d = 1 + static_cast<int>(rng() % 2);
        auto dv = random_structure(rng, N);
        auto sig = random_signal<CxRational>(rng, N, d);
        QCoefficientEngine eng(dv, sig);
        auto L = dv.lengths();
        Rational t = random_rational(rng, 5, 2);
        const auto& J = eng.delay_classes();

        std::vector<int> n(N, 0);
        auto rec = [&](auto&& self, int i, int budget) -> void {
            if (i == N) {
                int total = 0;
                for (int v : n) total += v;
                if (total == 0) return;
                std::vector<std::int64_t> n64(n.begin(), n.end());
                ClassKey key = class_key(n64, dv);
                Rational level = eng.level(key);
                QMat left = QMat::zero(d), right = QMat::zero(d);
                for (std::size_t c = 0; c < J.size(); ++c) {
                    int j = J[c].front();
                    ClassKey shifted = key;
                    bool ok = true;
                    for (std::size_t g = 0; g < shifted.k.size(); ++g) {
                        shifted.k[g] -= dv.B[j][g];
                        if (shifted.k[g] < 0) ok = false;
                    }
                    QMat hat = ok ? eng.xi_hat(shifted, t - L[j]) : QMat::zero(d);
                    QMat hat_same_t = ok ? eng.xi_hat(shifted, t) : QMat::zero(d);
                    left += eng.a_hat(static_cast<int>(c), t) * hat;
                    right += hat_same_t * eng.a_hat(static_cast<int>(c), t - level + L[j]);
                }
                CHECK(eng.xi_hat(key, t) == left);
                CHECK(eng.xi_hat(key, t) == right);
                return;
            }
            for (int v = 0; v <= budget; ++v) {
                n[i] = v;
                self(self, i + 1, budget - v);
            }
            n[i] = 0;
        };
        rec(rec, 0, 5 / N + 1);
    }
}

TEST_CASE("a_hat sums tuple entries over a delay class") {
    DelayVector dv;
    dv.B = {{1}, {1}};
    dv.ell = {Rational(1)};
    std::mt19937_64 rng(37);
    auto sig = random_signal<CxRational>(rng, 2, 2);
    QCoefficientEngine eng(dv, sig);
    REQUIRE(eng.delay_classes().size() == 1);
    Rational t(1, 5);
    CHECK(eng.a_hat(0, t) == sig.coeff(0, t) + sig.coeff(1, t));
}

TEST_CASE("theta basics") {
    auto dv = delays_1_2();
    Rational a(1, 2), b(1, 3);
    QCoefficientEngine eng(dv, constant_scalar_pair(a, b));

    CHECK(eng.theta(ClassKey{{3}}, Rational(-1, 2)) == QMat::zero(1));
    CHECK(eng.theta(ClassKey{{0}}, Rational(1, 2)) == QMat::zero(1));
}

TEST_CASE("theta is the geometric coefficient for one scalar delay") {
    DelayVector dv;
    dv.B = {{1}};
    dv.ell = {Rational(1)};
    QMat a(1);
    a(0, 0) = CxRational{Rational(1, 2)};
    MatrixTuple<CxRational> tup;
    tup.A = {a};
    QCoefficientEngine eng(dv, QSignal::constant(tup));
    CxRational an = CxRational{Rational(1, 2)};
    for (int n = 1; n <= 6; ++n) {
        for (Rational t : {Rational(n) - Rational(1, 2), Rational(n) - Rational(1, 7)}) {
            CHECK(eng.theta(ClassKey{{n}}, t)(0, 0) == an);
        }
        an = an * CxRational{Rational(1, 2)};
    }
}

TEST_CASE("time-shift covariance of xi and xi_hat") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 8; ++trial) {
        int N = 1 + static_cast<int>(rng() % 2);
        auto dv = random_structure(rng, N);
        auto sig = random_signal<CxRational>(rng, N, 2);
        Rational tau = random_rational(rng, 4, 3);
        QCoefficientEngine eng(dv, sig);
        QCoefficientEngine eng_shift(dv, sig.shifted(tau));
        std::vector<int> n(N, 1);
        Rational t = random_rational(rng, 3, 2);
        CHECK(eng.xi(n, t + tau) == eng_shift.xi(n, t));
        std::vector<std::int64_t> n64(n.begin(), n.end());
        ClassKey key = class_key(n64, dv);
        CHECK(eng.xi_hat(key, t + tau) == eng_shift.xi_hat(key, t));
    }
}

TEST_CASE("theta is insensitive to kernel-equivalent structures") {
    // B and 2B have the same integer kernel; classes coincide, so theta does.
    DelayVector dv1, dv2;
    dv1.B = {{1}, {2}};
    dv1.ell = {Rational(1)};
    dv2.B = {{2}, {4}};
    dv2.ell = {Rational(1, 2)};  // same numeric delays L = (1, 2)
    std::mt19937_64 rng(43);
    auto sig = random_signal<CxRational>(rng, 2, 2);
    QCoefficientEngine e1(dv1, sig), e2(dv2, sig);
    for (int n1 = 0; n1 <= 3; ++n1)
        for (int n2 = 0; n2 <= 3; ++n2) {
            if (n1 + n2 == 0) continue;
            std::vector<std::int64_t> n{n1, n2};
            Rational t(11, 3);
            CHECK(e1.theta(class_key(n, dv1), t) == e2.theta(class_key(n, dv2), t));
        }
}

TEST_CASE("recursion depth cap is enforced") {
    DelayVector dv;
    dv.B = {{1}};
    dv.ell = {Rational(1)};
    QMat a(1);
    a(0, 0) = CxRational{Rational(1, 2)};
    MatrixTuple<CxRational> tup;
    tup.A = {a};
    QCoefficientEngine eng(dv, QSignal::constant(tup));
    CHECK_THROWS_AS(eng.xi({65}, Rational(0)), CapExceeded);
    CHECK_THROWS_AS(eng.xi_reverse({70}, Rational(0)), CapExceeded);
}
