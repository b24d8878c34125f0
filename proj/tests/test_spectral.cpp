#include "doctest.h"

#include <cmath>

#include "netwave/coefficients.hpp"
#include "netwave/diffeq.hpp"
#include "netwave/spectral.hpp"
#include "test_util.hpp"

using namespace netwave;
using netwave::testutil::random_tuple;

namespace {

DelayVector delays_1_2() {
    DelayVector dv;
    dv.B = {{1}, {2}};
    dv.ell = {Rational(1)};
    return dv;
}

MatrixTuple<std::complex<double>> scalar_tuple(std::initializer_list<double> entries) {
    MatrixTuple<std::complex<double>> t;
    for (double e : entries) {
        CMat m(1);
        m(0, 0) = e;
        t.A.push_back(m);
    }
    return t;
}

}  // namespace

TEST_CASE("level lattice enumerates delay-weighted sums") {
    auto lat = level_lattice(delays_1_2(), Rational(5), true);
    REQUIRE(lat.levels.size() == 6);
    for (int i = 0; i <= 5; ++i) CHECK(lat.levels[i] == Rational(i));
    CHECK(lat.index_of(Rational(7)) == -1);
    CHECK(lat.index_of(Rational(3)) == 3);

    DelayVector dv;
    dv.B = {{1, 0}, {0, 1}};
    dv.ell = {Rational(1), Rational(1, 3)};
    auto lat2 = level_lattice(dv, Rational(1), true);
    // levels: 0, 1/3, 2/3, 1
    REQUIRE(lat2.levels.size() == 4);
    CHECK(lat2.levels[1] == Rational(1, 3));
}

TEST_CASE("level_dp matches the scalar recursions") {
    auto dv = delays_1_2();
    auto lat = level_lattice(dv, Rational(12), true);
    std::vector<MatrixTuple<std::complex<double>>> fam{scalar_tuple({0.25, 0.125})};
    std::vector<int> choices(lat.levels.size(), 0);
    auto G = level_dp(fam, choices, dv.lengths(), lat, 1);
    CHECK(G[0](0, 0) == std::complex<double>(1.0));
    // G(x) = a G(x-1) + b G(x-2)
    for (std::size_t r = 2; r < lat.levels.size(); ++r) {
        std::complex<double> expect = 0.25 * G[r - 1](0, 0) + 0.125 * G[r - 2](0, 0);
        CHECK(std::abs(G[r](0, 0) - expect) < 1e-15);
    }

    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    auto lat1 = level_lattice(one, Rational(8), true);
    std::vector<MatrixTuple<std::complex<double>>> fam1{scalar_tuple({0.5})};
    auto G1 = level_dp(fam1, std::vector<int>(lat1.levels.size(), 0), one.lengths(), lat1, 1);
    for (std::size_t r = 0; r < lat1.levels.size(); ++r)
        CHECK(G1[r](0, 0) == std::complex<double>(std::pow(0.5, static_cast<double>(r))));
}

TEST_CASE("level_dp equals brute-force path enumeration exactly") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 6; ++trial) {
        DelayVector dv;
        if (trial % 2 == 0) {
            dv = delays_1_2();
        } else {
            dv.B = {{1, 0}, {0, 1}, {1, 1}};
            dv.ell = {Rational(1), Rational(2)};
        }
        auto lat = level_lattice(dv, Rational(6), true);
        REQUIRE(lat.levels.size() <= 8);
        std::vector<MatrixTuple<CxRational>> fam;
        for (int e = 0; e < 2; ++e)
            fam.push_back(random_tuple<CxRational>(rng, dv.num_delays(), 2));
        std::vector<int> choices(lat.levels.size());
        for (auto& c : choices) c = static_cast<int>(rng() % fam.size());
        auto G = level_dp(fam, choices, dv.lengths(), lat, 2);
        for (std::size_t r = 0; r < lat.levels.size(); ++r) {
            auto brute = level_pathsum(fam, choices, dv.lengths(), lat, lat.levels[r], 2);
            CHECK(G[r] == brute);
        }
    }
}

TEST_CASE("level_dp rejects incomplete choice maps") {
    auto dv = delays_1_2();
    auto lat = level_lattice(dv, Rational(4), true);
    std::vector<MatrixTuple<std::complex<double>>> fam{scalar_tuple({0.5, 0.5})};
    CHECK_THROWS_AS(level_dp(fam, std::vector<int>{0}, dv.lengths(), lat, 1), InvalidInput);
}

TEST_CASE("mu estimate: scalar singleton is exact per level") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.7})};
    auto rep = mu_estimate(one, fam, Rational(16));
    for (std::size_t r = 1; r < rep.levels.size(); ++r) {
        double per_level = std::pow(rep.sup_values[r], 1.0 / to_double(rep.levels[r]));
        CHECK(per_level == doctest::Approx(0.7).epsilon(1e-12));
    }
    CHECK(rep.mu_hat == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rep.mu_tail_max == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("mu estimate: zero family collapses to zero") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.0})};
    auto rep = mu_estimate(one, fam, Rational(10));
    CHECK(rep.mu_hat == 0.0);
    CHECK(rep.mu_tail_max == 0.0);
}

TEST_CASE("mu estimate: companion-root benchmark") {
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.25, 0.125})};
    auto rep = mu_estimate(delays_1_2(), fam, Rational(40));
    CHECK(std::abs(rep.mu_hat - 0.5) / 0.5 < 0.01);
    // the literal tail max carries the (2/3)^{1/x} prefactor bias
    CHECK(rep.mu_tail_max == doctest::Approx(0.5 * std::pow(2.0 / 3.0, 1.0 / 40)).epsilon(1e-10));
}

TEST_CASE("mu tail max never decreases when the family grows") {
    std::mt19937_64 rng(67);
    auto dv = delays_1_2();
    for (int trial = 0; trial < 5; ++trial) {
        MatrixFamily small, large;
        small.elements = {random_tuple<std::complex<double>>(rng, 2, 2)};
        large.elements = small.elements;
        large.elements.push_back(random_tuple<std::complex<double>>(rng, 2, 2));
        auto rs = mu_estimate(dv, small, Rational(8));
        auto rl = mu_estimate(dv, large, Rational(8));
        CHECK(rl.mu_tail_max >= rs.mu_tail_max - 1e-12);
        for (std::size_t r = 0; r < rs.sup_values.size(); ++r)
            CHECK(rl.sup_values[r] >= rs.sup_values[r] - 1e-12);
    }
}

TEST_CASE("mu estimate honors the exhaustive cap") {
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.5, 0.5}), scalar_tuple({0.25, 0.25})};
    CHECK_THROWS_AS(mu_estimate(delays_1_2(), fam, Rational(40), SearchMode::exhaustive, 100),
                    CapExceeded);
    auto rep = mu_estimate(delays_1_2(), fam, Rational(40), SearchMode::sampled, 100, 7, 20);
    CHECK(rep.lower_bound_only);
}

TEST_CASE("rho_hs basics") {
    // single delay: the phase is a similarity, rho is that of A1
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    std::mt19937_64 rng(71);
    auto tup = random_tuple<std::complex<double>>(rng, 1, 3);
    CMat a = tup.A[0];
    CHECK(rho_hs(one, tup, 16) == doctest::Approx(spectral_radius(a)).epsilon(1e-9));

    // independent delays, scalars: moduli align at some grid phase
    DelayVector id2;
    id2.B = {{1, 0}, {0, 1}};
    id2.ell = {Rational(1), Rational(1)};
    auto st = scalar_tuple({0.3, -0.4});
    CHECK(rho_hs(id2, st, 64) == doctest::Approx(0.7).epsilon(1e-3));

    // dependent delays (1,2): max over theta of |a e^{i t} + b e^{2 i t}| = a + b
    auto st2 = scalar_tuple({0.3, 0.4});
    CHECK(rho_hs(delays_1_2(), st2, 128) == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("mu_hs basics and singleton equivalence") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.6})};
    auto rep = mu_hs_estimate(one, fam, 12, 8);
    CHECK(rep.value == doctest::Approx(0.6).epsilon(1e-12));

    MatrixFamily zero;
    zero.elements = {scalar_tuple({0.0})};
    CHECK(mu_hs_estimate(one, zero, 8, 8).value == 0.0);
}

TEST_CASE("mu_hs of a singleton approaches rho_hs as n grows") {
    std::mt19937_64 rng(73);
    auto dv = delays_1_2();
    MatrixFamily fam;
    fam.elements = {random_tuple<std::complex<double>>(rng, 2, 2)};
    const double rho = rho_hs(dv, fam.elements[0], 128);
    double prev_err = std::numeric_limits<double>::infinity();
    for (int n : {5, 10, 20}) {
        auto rep = mu_hs_estimate(dv, fam, n, 128);
        const double err = std::abs(rep.tail_max - rho);
        CHECK(err <= prev_err + 1e-9);
        prev_err = err;
    }
    auto rep = mu_hs_estimate(dv, fam, 20, 128);
    CHECK(std::abs(rep.value - rho) / rho < 0.02);
}

TEST_CASE("delay stability verdicts on the scalar benchmarks") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};

    MatrixFamily half;
    half.elements = {scalar_tuple({0.5})};
    auto v1 = stability_verdict_delays(one, half, Rational(30));
    CHECK(v1.status == 0);
    CHECK(v1.stable);
    CHECK(std::abs(v1.lambda_hat - std::log(0.5)) <= 0.02);

    MatrixFamily two;
    two.elements = {scalar_tuple({2.0})};
    auto v2 = stability_verdict_delays(one, two, Rational(30));
    CHECK(v2.status == 3);
    CHECK(std::abs(v2.lambda_hat - std::log(2.0)) <= 0.02);

    MatrixFamily unit;
    unit.elements = {scalar_tuple({1.0})};
    auto v3 = stability_verdict_delays(one, unit, Rational(30));
    CHECK(v3.status == 4);
}

TEST_CASE("switching signal realizes the level products") {
    auto dv = delays_1_2();
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.5, 0.25}), scalar_tuple({-0.5, 1.0})};
    const Rational x(5);
    auto lat = level_lattice(dv, x, false);
    std::vector<int> choices;
    for (std::size_t i = 0; i < lat.levels.size(); ++i) choices.push_back(static_cast<int>(i % 2));
    auto sig = signal_from_choices(choices, fam, dv, x, Rational(1, 4));

    CCoefficientEngine eng(dv, sig);
    auto lat_incl = level_lattice(dv, x, true);
    std::vector<int> choices_full = choices;
    choices_full.push_back(0);  // value at the top level is never consumed
    auto G = level_dp(fam.elements, choices_full, dv.lengths(), lat_incl, 1);
    for (std::size_t r = 0; r < lat_incl.levels.size(); ++r) {
        REQUIRE(lat_incl.keys[r].size() == 1);
        auto hat = eng.xi_hat(lat_incl.keys[r][0], Rational(0));
        CHECK(std::abs(hat(0, 0) - G[r](0, 0)) < 1e-14);
    }
}

TEST_CASE("signal_from_choices edge cases") {
    auto dv = delays_1_2();
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.5, 0.25})};
    auto sig = signal_from_choices({}, fam, dv, Rational(0), Rational(1, 8));
    CHECK(sig.breakpoints.empty());  // constant filler signal
    CHECK_THROWS_AS(signal_from_choices(std::vector<int>(5, 0), fam, dv, Rational(5), Rational(2)),
                    InvalidInput);
}

TEST_CASE("stable verdicts imply negative lyapunov estimates over the family") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.5}), scalar_tuple({0.3})};
    auto verdict = stability_verdict_delays(one, fam, Rational(12));
    REQUIRE(verdict.stable);

    std::mt19937_64 rng(2024);
    std::vector<CSignal> signals;
    for (int s = 0; s < 20; ++s) {
        CSignal sig;
        const int nb = 1 + static_cast<int>(rng() % 3);
        for (int b = 0; b < nb; ++b) sig.breakpoints.push_back(Rational(2 * b + 1, 2));
        for (int b = 0; b <= nb; ++b)
            sig.values.push_back(fam.elements[rng() % fam.elements.size()]);
        sig.validate();
        signals.push_back(std::move(sig));
    }
    auto rep = lyapunov_theta(signals, one, Rational(24));
    REQUIRE(rep.found);
    CHECK(rep.estimate < 0.0);
}

TEST_CASE("bisection rate agrees with the direct lyapunov estimate") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily fam;
    fam.elements = {scalar_tuple({0.7})};
    auto verdict = stability_verdict_delays(one, fam, Rational(30));
    auto rep = lyapunov_theta({CSignal::constant(fam.elements[0])}, one, Rational(30));
    REQUIRE(rep.found);
    CHECK(std::abs(verdict.lambda_hat - rep.estimate) <= 0.05);
}

TEST_CASE("mu_hs level choices: the dominating element wins every level") {
    DelayVector one;
    one.B = {{1}};
    one.ell = {Rational(1)};
    MatrixFamily pair;
    pair.elements = {scalar_tuple({0.0}), scalar_tuple({0.6})};
    auto rep = mu_hs_estimate(one, pair, 6, 4, SearchMode::exhaustive, 1 << 10);
    MatrixFamily solo;
    solo.elements = {scalar_tuple({0.6})};
    auto ref = mu_hs_estimate(one, solo, 6, 4);
    CHECK(rep.value == doctest::Approx(ref.value).epsilon(1e-12));
    for (std::size_t i = 0; i < rep.per_n.size(); ++i)
        CHECK(rep.per_n[i] == doctest::Approx(ref.per_n[i]).epsilon(1e-12));
    CHECK_THROWS_AS(mu_hs_estimate(one, pair, 20, 4, SearchMode::exhaustive, 100), CapExceeded);
}
