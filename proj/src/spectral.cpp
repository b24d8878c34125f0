#include "netwave/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include "netwave/errors.hpp"

namespace netwave {

namespace {

int worker_count() {
    if (const char* env = std::getenv("NETWAVE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

// max of fn(i) over [0, count); grid points are independent, reduced by max
double parallel_max(std::int64_t count, const std::function<double(std::int64_t)>& fn) {
    const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(count, 1)));
    if (workers <= 1) {
        double best = 0.0;
        for (std::int64_t i = 0; i < count; ++i) best = std::max(best, fn(i));
        return best;
    }
    std::vector<double> partial(workers, 0.0);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            double best = 0.0;
            for (std::int64_t i = w; i < count; i += workers) best = std::max(best, fn(i));
            partial[w] = best;
        });
    }
    for (auto& t : pool) t.join();
    return *std::max_element(partial.begin(), partial.end());
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

// Tail estimates shared by the mu estimators: the literal tail max of
// sup^{1/x}, plus the prefactor-cancelling ratio estimate
// (sup(x_hi)/sup(x_lo))^{1/(x_hi - x_lo)} across the tail window.
struct TailEstimates {
    double tail_max = 0.0;
    double ratio = 0.0;
    bool ratio_defined = false;
};

TailEstimates tail_estimates(const std::vector<double>& sups, const std::vector<double>& xs,
                             double window_lo) {
    TailEstimates te;
    int hi = -1, lo = -1;
    for (std::size_t i = 0; i < sups.size(); ++i) {
        if (sups[i] <= 0) continue;
        if (xs[i] > 0 && xs[i] >= window_lo)
            te.tail_max = std::max(te.tail_max, std::pow(sups[i], 1.0 / xs[i]));
        if (xs[i] <= window_lo || lo < 0) lo = static_cast<int>(i);
        hi = static_cast<int>(i);
    }
    if (hi >= 0 && lo >= 0 && xs[hi] > xs[lo]) {
        te.ratio = std::pow(sups[hi] / sups[lo], 1.0 / (xs[hi] - xs[lo]));
        te.ratio_defined = true;
    }
    return te;
}

}  // namespace

void MatrixFamily::validate() const {
    if (elements.empty()) throw InvalidInput("matrix family: must be nonempty");
    const int N = num_delays(), d = dim();
    if (N == 0 || d == 0) throw InvalidInput("matrix family: empty tuples");
    for (const auto& e : elements) {
        if (e.size() != N) throw InvalidInput("matrix family: tuple length varies");
        for (const auto& m : e.A)
            if (m.dim() != d) throw InvalidInput("matrix family: dimension varies");
    }
}

MatrixFamily MatrixFamily::exponentially_shifted(const std::vector<Rational>& lengths,
                                                 double nu) const {
    MatrixFamily out = *this;
    for (auto& tuple : out.elements)
        for (int j = 0; j < tuple.size(); ++j)
            tuple.A[j] = scale(tuple.A[j], std::exp(-nu * to_double(lengths[j])));
    return out;
}

int LevelLattice::index_of(const Rational& level) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it == levels.end() || *it != level) return -1;
    return static_cast<int>(it - levels.begin());
}

LevelLattice level_lattice(const DelayVector& delays, const Rational& cutoff, bool inclusive) {
    delays.validate();
    const auto L = delays.lengths();
    const int N = delays.num_delays();
    std::map<Rational, std::set<ClassKey>> acc;
    std::vector<std::int64_t> n(N, 0);
    Rational level(0);
    auto within = [&](const Rational& x) { return inclusive ? x <= cutoff : x < cutoff; };
    auto rec = [&](auto&& self, int i) -> void {
        if (i == N) {
            acc[level].insert(class_key(n, delays));
            return;
        }
        self(self, i + 1);
        std::int64_t added = 0;
        while (within(level + L[i])) {
            ++n[i];
            ++added;
            level += L[i];
            self(self, i + 1);
        }
        level -= L[i] * added;
        n[i] -= added;
    };
    if (within(Rational(0))) rec(rec, 0);
    LevelLattice lat;
    for (auto& [lev, ks] : acc) {
        lat.levels.push_back(lev);
        lat.keys.emplace_back(ks.begin(), ks.end());
    }
    return lat;
}

template <typename S>
std::vector<Mat<S>> level_dp(const std::vector<MatrixTuple<S>>& elements,
                             const std::vector<int>& choices, const std::vector<Rational>& lengths,
                             const LevelLattice& lattice, int dim) {
    const std::size_t K = lattice.levels.size();
    if (K > 0 && choices.size() < K - 1) throw InvalidInput("level_dp: incomplete choice map");
    std::vector<Mat<S>> G(K, Mat<S>::zero(dim));
    if (K == 0) return G;
    G[0] = Mat<S>::identity(dim);
    for (std::size_t r = 1; r < K; ++r) {
        for (std::size_t j = 0; j < lengths.size(); ++j) {
            const Rational prev = lattice.levels[r] - lengths[j];
            if (prev < 0) continue;
            const int pi = lattice.index_of(prev);
            if (pi < 0) continue;
            G[r] += G[pi] * elements[choices[pi]].A[j];
        }
    }
    return G;
}

template <typename S>
Mat<S> level_pathsum(const std::vector<MatrixTuple<S>>& elements, const std::vector<int>& choices,
                     const std::vector<Rational>& lengths, const LevelLattice& lattice,
                     const Rational& x, int dim) {
    const int N = static_cast<int>(lengths.size());
    Mat<S> acc = Mat<S>::zero(dim);
    std::vector<std::int64_t> n(N, 0);
    Rational level(0);
    auto paths = [&](const std::vector<std::int64_t>& target) {
        std::vector<std::int64_t> remaining = target;
        Rational partial(0);
        auto rec = [&](auto&& self, const Mat<S>& prefix, std::int64_t left) -> void {
            if (left == 0) {
                acc += prefix;
                return;
            }
            for (int k = 0; k < N; ++k) {
                if (remaining[k] == 0) continue;
                --remaining[k];
                const int idx = lattice.index_of(partial);
                if (idx < 0) throw InvalidInput("level_pathsum: point off the lattice");
                Mat<S> next = prefix * elements[choices[idx]].A[k];
                partial += lengths[k];
                self(self, next, left - 1);
                partial -= lengths[k];
                ++remaining[k];
            }
        };
        std::int64_t total = 0;
        for (auto v : target) total += v;
        rec(rec, Mat<S>::identity(dim), total);
    };
    auto rec = [&](auto&& self, int i) -> void {
        if (i == N) {
            if (level == x) paths(n);
            return;
        }
        self(self, i + 1);
        std::int64_t added = 0;
        while (level + lengths[i] <= x) {
            ++n[i];
            ++added;
            level += lengths[i];
            self(self, i + 1);
        }
        level -= lengths[i] * added;
        n[i] -= added;
    };
    rec(rec, 0);
    return acc;
}

template std::vector<Mat<std::complex<double>>> level_dp(
    const std::vector<MatrixTuple<std::complex<double>>>&, const std::vector<int>&,
    const std::vector<Rational>&, const LevelLattice&, int);
template std::vector<Mat<CxRational>> level_dp(const std::vector<MatrixTuple<CxRational>>&,
                                               const std::vector<int>&, const std::vector<Rational>&,
                                               const LevelLattice&, int);
template Mat<std::complex<double>> level_pathsum(const std::vector<MatrixTuple<std::complex<double>>>&,
                                                 const std::vector<int>&, const std::vector<Rational>&,
                                                 const LevelLattice&, const Rational&, int);
template Mat<CxRational> level_pathsum(const std::vector<MatrixTuple<CxRational>>&,
                                       const std::vector<int>&, const std::vector<Rational>&,
                                       const LevelLattice&, const Rational&, int);

MuReport mu_estimate(const DelayVector& delays, const MatrixFamily& family, const Rational& x_max,
                     SearchMode mode, std::uint64_t cap, std::uint64_t seed, int sample_count) {
    family.validate();
    if (family.num_delays() != delays.num_delays())
        throw InvalidInput("mu_estimate: family tuple length != number of delays");
    const auto lengths = delays.lengths();
    const LevelLattice lat = level_lattice(delays, x_max, true);
    const std::size_t K = lat.levels.size();
    const std::size_t n_choices = K > 0 ? K - 1 : 0;  // the top level needs no choice
    const std::size_t n_elems = family.elements.size();

    MuReport rep;
    rep.levels = lat.levels;
    rep.sup_values.assign(K, 0.0);
    rep.window_lo = x_max / 2;
    rep.window_hi = x_max;
    rep.mode = mode;
    rep.seed = seed;

    auto absorb = [&](const std::vector<int>& choices) {
        auto G = level_dp(family.elements, choices, lengths, lat, family.dim());
        for (std::size_t r = 0; r < K; ++r)
            rep.sup_values[r] = std::max(rep.sup_values[r], inf_norm(G[r]));
        double obj = 0;
        for (std::size_t r = 0; r < K; ++r)
            if (lat.levels[r] >= rep.window_lo && lat.levels[r] > 0 && inf_norm(G[r]) > 0)
                obj = std::max(obj, std::pow(inf_norm(G[r]), 1.0 / to_double(lat.levels[r])));
        return obj;
    };

    if (mode == SearchMode::exhaustive) {
        const std::uint64_t total = checked_pow(n_elems, n_choices, cap);
        if (total > cap)
            throw CapExceeded("mu_estimate: |family|^levels exceeds the exhaustive-search cap");
        std::vector<int> choices(std::max<std::size_t>(n_choices, 1), 0);
        while (true) {
            absorb(choices);
            ++rep.assignments_examined;
            std::size_t pos = 0;
            while (pos < n_choices && ++choices[pos] == static_cast<int>(n_elems)) {
                choices[pos] = 0;
                ++pos;
            }
            if (pos >= n_choices) break;
        }
    } else {
        rep.lower_bound_only = n_elems > 1;
        std::mt19937_64 rng(seed);
        std::vector<int> best(n_choices, 0);
        double best_obj = absorb(best);
        ++rep.assignments_examined;
        for (int s = 1; s < sample_count; ++s) {
            std::vector<int> c(n_choices);
            for (auto& v : c) v = static_cast<int>(rng() % n_elems);
            double obj = absorb(c);
            ++rep.assignments_examined;
            if (obj > best_obj) {
                best_obj = obj;
                best = c;
            }
        }
        bool improved = !best.empty();
        while (improved) {
            improved = false;
            for (std::size_t pos = 0; pos < n_choices; ++pos) {
                const int keep = best[pos];
                for (int alt = 0; alt < static_cast<int>(n_elems); ++alt) {
                    if (alt == keep) continue;
                    best[pos] = alt;
                    double obj = absorb(best);
                    ++rep.assignments_examined;
                    if (obj > best_obj) {
                        best_obj = obj;
                        improved = true;
                    } else {
                        best[pos] = keep;
                    }
                }
            }
        }
    }

    std::vector<double> xs(K);
    for (std::size_t r = 0; r < K; ++r) xs[r] = to_double(lat.levels[r]);
    auto te = tail_estimates(rep.sup_values, xs, to_double(rep.window_lo));
    rep.mu_tail_max = te.tail_max;
    rep.mu_hat = te.ratio_defined ? te.ratio : te.tail_max;
    return rep;
}

double spectral_radius(const CMat& m) {
    const int d = m.dim();
    if (d <= 64) {
        Eigen::MatrixXcd e(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) e(i, j) = m(i, j);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(e, false);
        double rho = 0;
        for (int i = 0; i < d; ++i) rho = std::max(rho, std::abs(solver.eigenvalues()[i]));
        return rho;
    }
    // norm iteration |M^{2^k}|^{1/2^k} with rescaling
    CMat p = m;
    double log_scale = 0.0;
    double weight = 1.0;
    for (int k = 0; k < 24; ++k) {
        double nrm = inf_norm(p);
        if (nrm == 0) return 0;
        p = scale(p, 1.0 / nrm);
        log_scale += weight * std::log(nrm);
        weight /= 2;
        p = p * p;
    }
    log_scale += weight * std::log(std::max(inf_norm(p), 1e-300));
    return std::exp(log_scale);
}

namespace {

// theta(grid point) = B nu with nu on the uniform grid of [0, 2pi)^h
std::vector<double> torus_phases(const DelayVector& delays, std::int64_t flat_index, int grid_m) {
    const int h = delays.num_generators();
    const int N = delays.num_delays();
    std::vector<double> nu(h);
    for (int g = 0; g < h; ++g) {
        nu[g] = 2.0 * M_PI * static_cast<double>(flat_index % grid_m) / grid_m;
        flat_index /= grid_m;
    }
    std::vector<double> theta(N, 0.0);
    for (int j = 0; j < N; ++j)
        for (int g = 0; g < h; ++g) theta[j] += static_cast<double>(delays.B[j][g]) * nu[g];
    return theta;
}

CMat phase_combination(const MatrixTuple<std::complex<double>>& tuple,
                       const std::vector<double>& theta) {
    CMat s(tuple.dim());
    for (int j = 0; j < tuple.size(); ++j) {
        const std::complex<double> ph = std::polar(1.0, theta[j]);
        for (int a = 0; a < tuple.dim(); ++a)
            for (int b = 0; b < tuple.dim(); ++b) s(a, b) += tuple.A[j](a, b) * ph;
    }
    return s;
}

}  // namespace

double rho_hs(const DelayVector& delays, const MatrixTuple<std::complex<double>>& tuple, int grid_m) {
    if (grid_m < 2) throw InvalidInput("rho_hs: grid resolution must be at least 2");
    delays.validate();
    if (tuple.size() != delays.num_delays())
        throw InvalidInput("rho_hs: tuple length != number of delays");
    const int h = delays.num_generators();
    std::int64_t total = 1;
    for (int g = 0; g < h; ++g) {
        total *= grid_m;
        if (total > (std::int64_t(1) << 40)) throw CapExceeded("rho_hs: torus grid too large");
    }
    return parallel_max(total, [&](std::int64_t idx) {
        return spectral_radius(phase_combination(tuple, torus_phases(delays, idx, grid_m)));
    });
}

MuHsReport mu_hs_estimate(const DelayVector& delays, const MatrixFamily& family, int n_max,
                          int grid_m, SearchMode mode, std::uint64_t cap, std::uint64_t seed) {
    family.validate();
    delays.validate();
    if (family.num_delays() != delays.num_delays())
        throw InvalidInput("mu_hs_estimate: family tuple length != number of delays");
    if (n_max < 2) throw InvalidInput("mu_hs_estimate: n_max must be at least 2");

    MuHsReport rep;
    rep.n_max = n_max;
    rep.grid = grid_m;
    rep.mode = mode;
    rep.seed = seed;

    const int h = delays.num_generators();
    const int d = family.dim();
    std::int64_t grid_total = 1;
    for (int g = 0; g < h; ++g) {
        grid_total *= grid_m;
        if (grid_total > (std::int64_t(1) << 30))
            throw CapExceeded("mu_hs_estimate: torus grid too large");
    }

    const int n_mid = n_max / 2;
    std::vector<double> sup_per_n(n_max + 1, 0.0);
    double best_ratio = 0.0;
    bool ratio_defined = false;

    if (family.elements.size() == 1) {
        // singleton collapses to matrix powers of the phase combination
        for (std::int64_t idx = 0; idx < grid_total; ++idx) {
            const CMat m = phase_combination(family.elements[0], torus_phases(delays, idx, grid_m));
            CMat p = CMat::identity(d);
            double w_mid = 0;
            for (int n = 1; n <= n_max; ++n) {
                p = p * m;
                const double w = inf_norm(p);
                sup_per_n[n] = std::max(sup_per_n[n], w);
                if (n == n_mid) w_mid = w;
            }
            if (w_mid > 0) {
                best_ratio =
                    std::max(best_ratio, std::pow(inf_norm(p) / w_mid, 1.0 / (n_max - n_mid)));
                ratio_defined = true;
            }
        }
    } else {
        // path positions live on the lattice up to n_max * Lambda_max inclusive;
        // choices are consumed only at step origins, which stay strictly below
        const auto lengths = delays.lengths();
        const Rational cutoff = delays.length_max() * n_max;
        const LevelLattice lat = level_lattice(delays, cutoff, true);
        const std::size_t K = lat.levels.size() > 0 ? lat.levels.size() - 1 : 0;
        const std::uint64_t total_assign = checked_pow(family.elements.size(), K, cap);
        if (mode == SearchMode::exhaustive && total_assign > cap)
            throw CapExceeded("mu_hs_estimate: |family|^levels exceeds the exhaustive-search cap");
        rep.lower_bound_only = mode == SearchMode::sampled && family.elements.size() > 1;
        const std::uint64_t n_assign =
            mode == SearchMode::exhaustive ? total_assign : std::min<std::uint64_t>(cap, 200);

        std::mt19937_64 rng(seed);
        for (std::int64_t idx = 0; idx < grid_total; ++idx) {
            const auto theta = torus_phases(delays, idx, grid_m);
            std::vector<MatrixTuple<std::complex<double>>> folded = family.elements;
            for (auto& tuple : folded)
                for (int j = 0; j < tuple.size(); ++j) {
                    const std::complex<double> ph = std::polar(1.0, theta[j]);
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b) tuple.A[j](a, b) *= ph;
                }

            std::vector<int> choices(std::max<std::size_t>(K, 1), 0);
            double w_mid_theta = 0, w_hi_theta = 0;
            for (std::uint64_t a = 0; a < n_assign; ++a) {
                if (mode == SearchMode::sampled)
                    for (auto& c : choices) c = static_cast<int>(rng() % family.elements.size());
                // DP over (level, path length)
                std::map<int, CMat> row;
                row[0] = CMat::identity(d);
                for (int n = 1; n <= n_max; ++n) {
                    std::map<int, CMat> next;
                    CMat tn = CMat::zero(d);
                    for (const auto& [pi, g] : row) {
                        for (std::size_t j = 0; j < lengths.size(); ++j) {
                            const Rational lev = lat.levels[pi] + lengths[j];
                            const int ni = lat.index_of(lev);
                            if (ni < 0) continue;  // path leaves the choice lattice
                            CMat prod = g * folded[choices[pi]].A[j];
                            auto [it, fresh] = next.try_emplace(ni, CMat::zero(d));
                            (void)fresh;
                            it->second += prod;
                        }
                    }
                    for (const auto& [ni, g] : next) {
                        (void)ni;
                        tn += g;
                    }
                    const double w = inf_norm(tn);
                    sup_per_n[n] = std::max(sup_per_n[n], w);
                    if (n == n_mid) w_mid_theta = std::max(w_mid_theta, w);
                    if (n == n_max) w_hi_theta = std::max(w_hi_theta, w);
                    row = std::move(next);
                }
                if (mode == SearchMode::exhaustive) {
                    std::size_t pos = 0;
                    while (pos < K && ++choices[pos] == static_cast<int>(family.elements.size())) {
                        choices[pos] = 0;
                        ++pos;
                    }
                    if (pos >= K) break;
                }
            }
            if (w_mid_theta > 0) {
                best_ratio = std::max(best_ratio,
                                      std::pow(w_hi_theta / w_mid_theta, 1.0 / (n_max - n_mid)));
                ratio_defined = true;
            }
        }
    }

    rep.per_n.assign(n_max, 0.0);
    double tail = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        rep.per_n[n - 1] = sup_per_n[n] > 0 ? std::pow(sup_per_n[n], 1.0 / n) : 0.0;
        if (n >= n_max / 2) tail = std::max(tail, rep.per_n[n - 1]);
    }
    rep.tail_max = tail;
    rep.value = ratio_defined ? best_ratio : tail;
    return rep;
}

DelayVerdict stability_verdict_delays(const DelayVector& delays, const MatrixFamily& family,
                                      const Rational& x_max, double margin, std::uint64_t cap) {
    DelayVerdict v;
    v.report = mu_estimate(delays, family, x_max, SearchMode::exhaustive, cap);
    v.mu_hat = v.report.mu_hat;
    v.margin = std::max(margin, std::abs(v.report.mu_hat - v.report.mu_tail_max));
    if (v.mu_hat + v.margin < 1.0) {
        v.stable = true;
        v.status = 0;
    } else if (v.mu_hat - v.margin > 1.0) {
        v.stable = false;
        v.status = 3;
    } else {
        v.stable = false;
        v.status = 4;
    }

    // lambda = inf{nu : mu(B_{-nu}) < 1} by bisection over the shift
    const auto lengths = delays.lengths();
    auto mu_of = [&](double nu) {
        return mu_estimate(delays, family.exponentially_shifted(lengths, nu), x_max,
                           SearchMode::exhaustive, cap)
            .mu_hat;
    };
    double lo = -4, hi = 4;
    for (int guard = 0; guard < 16 && mu_of(lo) < 1.0; ++guard) lo -= 4;
    for (int guard = 0; guard < 16 && mu_of(hi) >= 1.0; ++guard) hi += 4;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mu_of(mid) < 1.0) hi = mid;
        else lo = mid;
    }
    v.lambda_hat = 0.5 * (lo + hi);
    return v;
}

CSignal signal_from_choices(const std::vector<int>& choices, const MatrixFamily& family,
                            const DelayVector& delays, const Rational& x, const Rational& zeta) {
    family.validate();
    const LevelLattice lat = level_lattice(delays, x, false);
    const std::size_t K = lat.levels.size();
    if (choices.size() < K) throw InvalidInput("signal_from_choices: incomplete choice map");
    if (zeta <= 0) throw InvalidInput("signal_from_choices: zeta must be positive");
    for (std::size_t r = 1; r < K; ++r)
        if (!(2 * zeta < lat.levels[r] - lat.levels[r - 1]))
            throw InvalidInput("signal_from_choices: zeta too large for the level spacing");

    CSignal sig;
    sig.values.push_back(family.elements[0]);  // before the most negative window
    for (std::size_t i = K; i-- > 0;) {
        sig.breakpoints.push_back(-lat.levels[i] - zeta);
        sig.values.push_back(family.elements[choices[i]]);
        sig.breakpoints.push_back(-lat.levels[i] + zeta);
        sig.values.push_back(family.elements[0]);
    }
    sig.validate();
    return sig;
}

}  // namespace netwave
