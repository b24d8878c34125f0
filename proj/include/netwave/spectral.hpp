#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netwave/matrix.hpp"
#include "netwave/ratlattice.hpp"
#include "netwave/signal.hpp"

namespace netwave {

// The switching value set: a finite collection of N-tuples of d x d matrices.
struct MatrixFamily {
    std::vector<MatrixTuple<std::complex<double>>> elements;

    int num_delays() const { return elements.empty() ? 0 : elements.front().size(); }
    int dim() const { return elements.empty() ? 0 : elements.front().dim(); }
    void validate() const;

    MatrixFamily exponentially_shifted(const std::vector<Rational>& lengths, double nu) const;
};

// Sorted level values {Lambda . n} below a cutoff, with the class keys that
// realize each level.
struct LevelLattice {
    std::vector<Rational> levels;                 // strictly increasing, levels[0] = 0
    std::vector<std::vector<ClassKey>> keys;      // keys per level

    int index_of(const Rational& level) const;    // -1 when absent
};

LevelLattice level_lattice(const DelayVector& delays, const Rational& cutoff, bool inclusive);

// Accumulated switching products G over the level lattice for one assignment
// of family elements to levels (choices[i] picks the element at levels[i]).
// Returns G at every lattice level; G(0) = id. Right-multiplication keeps the
// ordered path products intact.
template <typename S>
std::vector<Mat<S>> level_dp(const std::vector<MatrixTuple<S>>& elements,
                             const std::vector<int>& choices, const std::vector<Rational>& lengths,
                             const LevelLattice& lattice, int dim);

// Brute-force oracle: enumerate every lattice point with Lambda.n = x and every
// increasing path to it; exact reference for level_dp.
template <typename S>
Mat<S> level_pathsum(const std::vector<MatrixTuple<S>>& elements, const std::vector<int>& choices,
                     const std::vector<Rational>& lengths, const LevelLattice& lattice,
                     const Rational& x, int dim);

enum class SearchMode { exhaustive, sampled };

struct MuReport {
    std::vector<Rational> levels;
    std::vector<double> sup_values;     // sup over switching choices of |G(level)|
    double mu_hat = 0.0;                // headline estimate (tail ratio, prefactor-cancelling)
    double mu_tail_max = 0.0;           // max over the tail window of sup^{1/level}
    Rational window_lo, window_hi;      // tail window [x_max/2, x_max]
    SearchMode mode = SearchMode::exhaustive;
    bool lower_bound_only = false;      // sampled search: no sup certificate
    std::uint64_t seed = 0;
    std::uint64_t assignments_examined = 0;
};

MuReport mu_estimate(const DelayVector& delays, const MatrixFamily& family, const Rational& x_max,
                     SearchMode mode = SearchMode::exhaustive, std::uint64_t cap = 1000000,
                     std::uint64_t seed = 0, int sample_count = 200);

// Spectral radius of sum_j A_j e^{i theta_j} maximized over the subtorus
// {B nu mod 2pi}; uniform m-point grid per generator coordinate.
double rho_hs(const DelayVector& delays, const MatrixTuple<std::complex<double>>& tuple, int grid_m);

struct MuHsReport {
    std::vector<double> per_n;          // index n-1: sup of |T(n)|^{1/n}
    double value = 0.0;                 // headline (per-theta tail ratio)
    double tail_max = 0.0;
    int n_max = 0;
    int grid = 0;
    SearchMode mode = SearchMode::exhaustive;
    bool lower_bound_only = false;
    std::uint64_t seed = 0;
};

MuHsReport mu_hs_estimate(const DelayVector& delays, const MatrixFamily& family, int n_max,
                          int grid_m, SearchMode mode = SearchMode::exhaustive,
                          std::uint64_t cap = 1000000, std::uint64_t seed = 0);

struct DelayVerdict {
    int status = 4;                     // 0 stable, 3 unstable, 4 inconclusive
    bool stable = false;
    double mu_hat = 0.0;
    double margin = 0.0;
    double lambda_hat = 0.0;            // inf{nu : mu(B_{-nu}) < 1} by bisection
    MuReport report;
};

DelayVerdict stability_verdict_delays(const DelayVector& delays, const MatrixFamily& family,
                                      const Rational& x_max, double margin = 0.02,
                                      std::uint64_t cap = 1000000);

// Piecewise-constant signal realizing the chosen per-level products: value
// B^{r} on (-r - zeta, -r + zeta) for each level r < x, first element elsewhere.
CSignal signal_from_choices(const std::vector<int>& choices, const MatrixFamily& family,
                            const DelayVector& delays, const Rational& x, const Rational& zeta);

// Spectral radius of a dense complex matrix (eigenvalues for d <= 64, norm
// iteration above).
double spectral_radius(const CMat& m);

}  // namespace netwave
