#include "doctest.h"

#include <cmath>

#include "netwave/transport.hpp"
#include "test_util.hpp"

using namespace netwave;

namespace {

CSignal constant_matrix(const CMat& m) {
    MatrixTuple<std::complex<double>> t;
    t.A = {m};
    return CSignal::constant(t);
}

CVec sample_profile(const std::function<double(double)>& f, const Rational& length,
                    const Rational& h) {
    const std::int64_t steps = exact_index(length, h);
    CVec out(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t m = 0; m <= steps; ++m)
        out[static_cast<std::size_t>(m)] = f(to_double(h * m));
    return out;
}

}  // namespace

TEST_CASE("column decomposition of the transmission matrix") {
    std::mt19937_64 rng(81);
    auto m = netwave::testutil::random_matrix<std::complex<double>>(rng, 3);
    auto sig = to_difference(constant_matrix(m));
    CHECK(sig.num_delays() == 3);
    // sum of the pieces restores M, and each piece carries one column
    CMat sum(3);
    for (int i = 0; i < 3; ++i) sum += sig.values[0].A[i];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            CHECK(sum(r, c) == m(r, c));
            for (int i = 0; i < 3; ++i)
                if (i != c) CHECK(sig.values[0].A[i](r, c) == std::complex<double>(0.0));
        }

    CMat id = CMat::identity(2);
    auto idsig = to_difference(constant_matrix(id));
    for (int i = 0; i < 2; ++i)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                CHECK(idsig.values[0].A[i](r, c) ==
                      std::complex<double>((r == c && c == i) ? 1.0 : 0.0));
}

TEST_CASE("single-edge circular transport") {
    TransportSystem sys;
    sys.lengths = {Rational(1)};
    sys.transmission = constant_matrix(CMat::identity(1));
    const Rational h(1, 16);
    auto prof = sample_profile([](double x) { return std::sin(2 * M_PI * x); }, Rational(1), h);
    TransportSim sim(sys, {prof}, h, Rational(4));
    // u(t, x) = u0((x - t) mod L)
    for (std::int64_t k = 0; k <= sim.horizon_steps(); k += 5) {
        for (std::int64_t m = 0; m <= 16; ++m) {
            const double x = to_double(h * m), t = to_double(h * k);
            double expect = std::sin(2 * M_PI * (x - t - std::floor(x - t)));
            CHECK(std::abs(sim.field(0, k, m).real() - expect) < 1e-12);
        }
    }
}

TEST_CASE("t = 0 reproduces the initial profiles (compatible data)") {
    TransportSystem sys;
    sys.lengths = {Rational(1), Rational(3, 2)};
    CMat m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    sys.transmission = constant_matrix(m);
    const Rational h(1, 8);
    // compatible at t=0: u_1(0,0) = u_2(0, L_2), u_2(0,0) = u_1(0, L_1)
    auto p1 = sample_profile([](double x) { return std::cos(2 * M_PI * x); }, sys.lengths[0], h);
    auto p2 = sample_profile([](double x) { return std::cos(2 * M_PI * x / 1.5); }, sys.lengths[1], h);
    TransportSim sim(sys, {p1, p2}, h, Rational(2));
    auto f0 = sim.field_at(0);
    for (std::size_t mdx = 0; mdx < p1.size(); ++mdx) CHECK(std::abs(f0[0][mdx] - p1[mdx]) < 1e-12);
    for (std::size_t mdx = 1; mdx < p2.size(); ++mdx) CHECK(std::abs(f0[1][mdx] - p2[mdx]) < 1e-12);
}

TEST_CASE("zero data stays zero and the boundary law holds") {
    std::mt19937_64 rng(83);
    TransportSystem sys;
    sys.lengths = {Rational(1), Rational(1, 2)};
    auto m = netwave::testutil::random_matrix<std::complex<double>>(rng, 2);
    sys.transmission = constant_matrix(m);
    const Rational h(1, 8);
    TransportSim zero(sys, {CVec(9, {0, 0}), CVec(5, {0, 0})}, h, Rational(3));
    for (std::int64_t k = 0; k <= zero.horizon_steps(); ++k)
        CHECK(inf_norm(zero.field_at(k)[0]) == 0.0);

    auto p1 = sample_profile([](double x) { return x * (1 - x); }, sys.lengths[0], h);
    auto p2 = sample_profile([](double x) { return std::cos(x); }, sys.lengths[1], h);
    TransportSim sim(sys, {p1, p2}, h, Rational(3));
    for (std::int64_t k = 0; k <= sim.horizon_steps(); ++k) {
        const CVec w = sim.end_values(k);
        const CVec lhs = {sim.field(0, k, 0), sim.field(1, k, 0)};
        for (int i = 0; i < 2; ++i) {
            std::complex<double> rhs{0, 0};
            for (int j = 0; j < 2; ++j) rhs += m(i, j) * w[j];
            CHECK(std::abs(lhs[i] - rhs) <= 1e-12);
        }
    }
}

TEST_CASE("transport property on the grid") {
    std::mt19937_64 rng(87);
    TransportSystem sys;
    sys.lengths = {Rational(1), Rational(2)};
    auto m = netwave::testutil::random_matrix<std::complex<double>>(rng, 2);
    sys.transmission = constant_matrix(m);
    const Rational h(1, 4);
    auto p1 = sample_profile([](double x) { return std::sin(x) + 0.3; }, sys.lengths[0], h);
    auto p2 = sample_profile([](double x) { return x * x - 1; }, sys.lengths[1], h);
    TransportSim sim(sys, {p1, p2}, h, Rational(5));
    for (int edge = 0; edge < 2; ++edge)
        for (std::int64_t k = 1; k + 6 <= sim.horizon_steps(); k += 3)
            for (std::int64_t mm = 0; mm + 2 <= sim.edge_steps(edge); ++mm)
                CHECK(sim.field(edge, k + 2, mm + 2) == sim.field(edge, k, mm));
}

TEST_CASE("off-grid boundary evaluation matches the grid at grid points") {
    TransportSystem sys;
    sys.lengths = {Rational(1)};
    CMat half(1);
    half(0, 0) = 0.5;
    sys.transmission = constant_matrix(half);
    const Rational h(1, 4);
    auto prof = sample_profile([](double x) { return 1.0 + x; }, Rational(1), h);
    TransportSim sim(sys, {prof}, h, Rational(3));
    for (std::int64_t k = 0; k <= 12; ++k)
        CHECK(std::abs(sim.boundary_exact(h * k)[0] - sim.trace(0, k)) < 1e-14);
    // between grid points the evaluator still satisfies the recursion
    const Rational t(17, 24);
    auto v = sim.boundary_exact(t);
    auto w = sim.boundary_exact(t - 1);
    CHECK(std::abs(v[0] - 0.5 * w[0]) < 1e-14);
}

TEST_CASE("invariance residuals") {
    // R = 0 rows: both residuals vanish trivially
    TransportSystem sys;
    sys.lengths = {Rational(1), Rational(1)};
    CMat rot(2);
    rot(0, 1) = 1.0;
    rot(1, 0) = 1.0;
    sys.transmission = constant_matrix(rot);
    const Rational h(1, 8);
    auto p1 = sample_profile([](double x) { return std::sin(2 * M_PI * x); }, Rational(1), h);
    auto p2 = sample_profile([](double x) { return std::sin(4 * M_PI * x); }, Rational(1), h);
    TransportSim sim(sys, {p1, p2}, h, Rational(4));

    ConstraintMatrix empty;
    auto r0 = invariance_residual(empty, sim);
    CHECK(r0.algebraic == 0.0);
    CHECK(r0.integral == 0.0);

    // M = id: algebraic residual vanishes for any R
    TransportSystem idsys = sys;
    idsys.transmission = constant_matrix(CMat::identity(2));
    TransportSim idsim(idsys, {p1, p2}, h, Rational(4));
    ConstraintMatrix R;
    R.rows = {{{1.0, 0.0}, {-2.0, 0.0}}};
    auto r1 = invariance_residual(R, idsim);
    CHECK(r1.algebraic == 0.0);
    CHECK(r1.integral <= 1e-12);

    // permutation matrix preserves row sums: R = (1 1) is invariant
    ConstraintMatrix sum_row;
    sum_row.rows = {{{1.0, 0.0}, {1.0, 0.0}}};
    auto r2 = invariance_residual(sum_row, sim);
    CHECK(r2.algebraic <= 1e-12);
    CHECK(r2.integral <= 1e-10);
}

TEST_CASE("quadrature membership checks") {
    std::vector<Rational> lengths{Rational(1)};
    const Rational h(1, 64);
    auto zero_mean = sample_profile([](double x) { return std::sin(2 * M_PI * x); }, Rational(1), h);
    auto ones = sample_profile([](double) { return 1.0; }, Rational(1), h);
    ConstraintMatrix R;
    R.rows = {{{1.0, 0.0}}};
    CHECK(y_projection_check({zero_mean}, lengths, R, 1e-12));
    CHECK(!y_projection_check({ones}, lengths, R, 1e-6));
    CHECK(y_projection_check({CVec(65, {0.0, 0.0})}, lengths, R, 0.0));
}
