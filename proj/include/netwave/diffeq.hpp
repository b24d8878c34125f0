#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "netwave/coefficients.hpp"
#include "netwave/matrix.hpp"
#include "netwave/ratlattice.hpp"
#include "netwave/signal.hpp"

namespace netwave {

// Piecewise-polynomial initial condition on [-L_max, 0) with rational
// breakpoints and exact pointwise evaluation.
struct InitialCondition {
    std::vector<Rational> breaks;  // b_0 = -L_max < ... < b_k = 0
    // segment -> coordinate -> polynomial coefficients in ascending powers of t
    std::vector<std::vector<std::vector<std::complex<double>>>> segments;

    int dim() const { return segments.empty() ? 0 : static_cast<int>(segments.front().size()); }
    Rational domain_start() const { return breaks.front(); }
    void validate() const;

    CVec eval(const Rational& t) const;

    static InitialCondition zero(int d, const Rational& L_max);
    static InitialCondition constant(const CVec& value, const Rational& L_max);
    // Unit-height hat supported on (center - delta, center + delta) along one coordinate.
    static InitialCondition bump(int d, int coord, const Rational& center, const Rational& delta,
                                 const Rational& L_max);

    InitialCondition scaled(std::complex<double> factor) const;
};

struct Trajectory {
    std::vector<Rational> times;
    std::vector<CVec> values;
    std::string method;  // "direct" | "representation"
};

// Exact pointwise recursion u(t) = sum_j A_j(t) u(t - L_j), memoized on exact
// rational times; terminates in the initial interval [-L_max, 0).
class DirectEvaluator {
  public:
    DirectEvaluator(DelayVector delays, CSignal signal, InitialCondition u0);

    const CVec& value(const Rational& t);
    int dim() const { return signal_.dim(); }
    const std::vector<Rational>& lengths() const { return lengths_; }
    Rational length_max() const { return lmax_; }
    Rational length_min() const { return lmin_; }
    const DelayVector& delays() const { return delays_; }
    const InitialCondition& initial() const { return u0_; }

    // ||u_t||_p realized on a window grid of step L_min / grid_per_lmin
    // (composite trapezoid; max of samples for p = infinity).
    double window_norm(const Rational& t, double p, int grid_per_lmin = 256);

    Trajectory sample(const Rational& t0, const Rational& t1, const Rational& step);

  private:
    DelayVector delays_;
    CSignal signal_;
    InitialCondition u0_;
    std::vector<Rational> lengths_;
    Rational lmax_, lmin_;
    std::unordered_map<Rational, CVec, RationalHash> memo_;
};

// Representation-formula evaluation at time t >= 0: sum over classes with
// t < L.n <= t + L_max of Theta_{[n],t} u0(t - L.n).
CVec evaluate_representation(CCoefficientEngine& engine, const InitialCondition& u0, const Rational& t);

struct LyapunovReport {
    bool found = false;       // false when every sampled Theta vanished
    double estimate = 0.0;    // max of ln|Theta|/t over the truncation window
    Rational window_lo, window_hi;
    std::size_t classes_examined = 0;
    std::size_t samples_examined = 0;
};

LyapunovReport lyapunov_theta(const std::vector<CSignal>& signals, const DelayVector& delays,
                              const Rational& horizon);

struct EnvelopeCheck {
    bool ok = true;
    double violation_time = 0.0;  // meaningful when !ok
    double lhs = 0.0, rhs = 0.0;
    double fitted_constant = 0.0;
};

// Verifies ||u_t||_p <= C (t+1)^{N-1} max_{[t-Lmax,t]} f * ||u_0||_p on a time
// grid, with C fitted at t = 0.
EnvelopeCheck exponential_bound_check(DirectEvaluator& ev, const std::function<double(double)>& f,
                                      double p, const Rational& horizon, int time_samples = 64);

struct WitnessReport {
    InitialCondition u0;
    int coordinate = 0;       // j0, the column of Theta with the largest norm
    double theta_norm = 0.0;  // |Theta_{[n0],t0}|
    Rational level;           // L . n0
};

// Bump initial condition realizing the lower-bound construction at (key, t0).
WitnessReport adversarial_witness(CCoefficientEngine& engine, const ClassKey& key, const Rational& t0,
                                  const Rational& delta);

}  // namespace netwave
