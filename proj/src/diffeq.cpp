#include "netwave/diffeq.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "netwave/errors.hpp"

namespace netwave {

void InitialCondition::validate() const {
    if (breaks.size() < 2) throw InvalidInput("initial condition: needs at least one segment");
    if (breaks.back() != 0) throw InvalidInput("initial condition: domain must end at 0");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i - 1] < breaks[i])) throw InvalidInput("initial condition: breakpoints not increasing");
    if (segments.size() != breaks.size() - 1)
        throw InvalidInput("initial condition: segment count mismatch");
    const int d = dim();
    for (const auto& seg : segments)
        if (static_cast<int>(seg.size()) != d)
            throw InvalidInput("initial condition: coordinate count varies");
}

CVec InitialCondition::eval(const Rational& t) const {
    const int d = dim();
    CVec out(d, {0.0, 0.0});
    if (t < breaks.front() || t >= breaks.back()) return out;
    std::size_t lo = 0, hi = breaks.size() - 1;
    while (lo + 1 < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (breaks[mid] <= t) lo = mid;
        else hi = mid;
    }
    const double td = to_double(t);
    for (int i = 0; i < d; ++i) {
        const auto& coeffs = segments[lo][i];
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * td + coeffs[k];
        out[i] = acc;
    }
    return out;
}

InitialCondition InitialCondition::zero(int d, const Rational& L_max) {
    InitialCondition ic;
    ic.breaks = {-L_max, Rational(0)};
    ic.segments = {std::vector<std::vector<std::complex<double>>>(d)};
    return ic;
}

InitialCondition InitialCondition::constant(const CVec& value, const Rational& L_max) {
    InitialCondition ic;
    ic.breaks = {-L_max, Rational(0)};
    ic.segments.emplace_back();
    for (const auto& v : value) ic.segments.back().push_back({v});
    return ic;
}

InitialCondition InitialCondition::bump(int d, int coord, const Rational& center, const Rational& delta,
                                        const Rational& L_max) {
    if (delta <= 0) throw InvalidInput("bump: delta must be positive");
    if (center - delta <= -L_max || center + delta >= 0)
        throw InvalidInput("bump: support must lie inside (-L_max, 0)");
    InitialCondition ic;
    ic.breaks = {-L_max, center - delta, center, center + delta, Rational(0)};
    ic.segments.assign(4, std::vector<std::vector<std::complex<double>>>(d));
    const double c = to_double(center), del = to_double(delta);
    // rising edge (t - (c - delta)) / delta, falling edge ((c + delta) - t) / delta
    ic.segments[1][coord] = {std::complex<double>(-(c - del) / del, 0.0),
                             std::complex<double>(1.0 / del, 0.0)};
    ic.segments[2][coord] = {std::complex<double>((c + del) / del, 0.0),
                             std::complex<double>(-1.0 / del, 0.0)};
    return ic;
}

InitialCondition InitialCondition::scaled(std::complex<double> factor) const {
    InitialCondition out = *this;
    for (auto& seg : out.segments)
        for (auto& coord : seg)
            for (auto& c : coord) c *= factor;
    return out;
}

DirectEvaluator::DirectEvaluator(DelayVector delays, CSignal signal, InitialCondition u0)
    : delays_(std::move(delays)), signal_(std::move(signal)), u0_(std::move(u0)) {
    delays_.validate();
    signal_.validate();
    u0_.validate();
    if (signal_.num_delays() != delays_.num_delays())
        throw InvalidInput("direct evaluator: signal tuple length != number of delays");
    if (u0_.dim() != signal_.dim())
        throw InvalidInput("direct evaluator: initial condition dimension mismatch");
    lengths_ = delays_.lengths();
    lmax_ = delays_.length_max();
    lmin_ = delays_.length_min();
    if (u0_.domain_start() > -lmax_)
        throw InvalidInput("direct evaluator: initial condition domain shorter than L_max");
}

const CVec& DirectEvaluator::value(const Rational& t) {
    if (auto it = memo_.find(t); it != memo_.end()) return it->second;
    CVec out;
    if (t < 0) {
        out = u0_.eval(t);
    } else {
        out.assign(dim(), {0.0, 0.0});
        for (int j = 0; j < delays_.num_delays(); ++j) {
            const auto& prev = value(t - lengths_[j]);
            const auto& m = signal_.coeff(j, t);
            for (int i = 0; i < dim(); ++i)
                for (int k = 0; k < dim(); ++k) out[i] += m(i, k) * prev[k];
        }
    }
    return memo_.emplace(t, std::move(out)).first->second;
}

double DirectEvaluator::window_norm(const Rational& t, double p, int grid_per_lmin) {
    const Rational eta = lmin_ / grid_per_lmin;
    const Rational ratio = lmax_ / eta;
    if (denominator(ratio) != 1)
        throw InvalidInput("window_norm: window is not a multiple of the grid step");
    const std::int64_t steps = numerator(ratio).convert_to<std::int64_t>();
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t i = 0; i <= steps; ++i) {
        const Rational s = t - lmax_ + eta * i;
        const CVec& v = value(s);
        if (std::isinf(p)) {
            double m = 0;
            for (const auto& x : v) m = std::max(m, std::abs(x));
            samples.push_back(m);
        } else {
            double acc = 0;
            for (const auto& x : v) acc += std::pow(std::abs(x), p);
            samples.push_back(acc);
        }
    }
    if (std::isinf(p)) return *std::max_element(samples.begin(), samples.end());
    double integral = 0;
    const double h = to_double(eta);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) integral += 0.5 * h * (samples[i] + samples[i + 1]);
    return std::pow(integral, 1.0 / p);
}

Trajectory DirectEvaluator::sample(const Rational& t0, const Rational& t1, const Rational& step) {
    if (step <= 0) throw InvalidInput("sample: step must be positive");
    Trajectory tr;
    tr.method = "direct";
    for (Rational t = t0; t <= t1; t += step) {
        tr.times.push_back(t);
        tr.values.push_back(value(t));
    }
    return tr;
}

CVec evaluate_representation(CCoefficientEngine& engine, const InitialCondition& u0, const Rational& t) {
    if (t < 0) throw InvalidInput("evaluate_representation: t must be nonnegative");
    const auto& L = engine.lengths();
    const int N = engine.num_delays();
    const Rational lmax = engine.delays().length_max();
    const Rational hi = t + lmax;

    // distinct classes with t < L.n <= t + L_max
    std::map<ClassKey, Rational> classes;
    std::vector<std::int64_t> n(N, 0);
    Rational level(0);
    auto rec = [&](auto&& self, int i) -> void {
        if (i == N) {
            if (level > t && level <= hi) classes.emplace(class_key(n, engine.delays()), level);
            return;
        }
        self(self, i + 1);
        std::int64_t added = 0;
        while (level + L[i] <= hi) {
            ++n[i];
            ++added;
            level += L[i];
            self(self, i + 1);
        }
        level -= L[i] * added;
        n[i] -= added;
    };
    rec(rec, 0);

    CVec out(engine.dim(), {0.0, 0.0});
    for (const auto& [key, lev] : classes) {
        const CMat th = engine.theta(key, t);
        const CVec u0v = u0.eval(t - lev);
        for (int i = 0; i < engine.dim(); ++i)
            for (int j = 0; j < engine.dim(); ++j) out[i] += th(i, j) * u0v[j];
    }
    return out;
}

LyapunovReport lyapunov_theta(const std::vector<CSignal>& signals, const DelayVector& delays,
                              const Rational& horizon) {
    const Rational lmax = delays.length_max();
    if (horizon < 3 * lmax) throw InvalidInput("lyapunov_theta: horizon must be at least 3 L_max");
    LyapunovReport rep;
    rep.window_lo = horizon / 2;
    rep.window_hi = horizon;

    // classes with horizon/2 <= L.n <= horizon
    const auto L = delays.lengths();
    const int N = delays.num_delays();
    std::map<ClassKey, Rational> classes;
    std::vector<std::int64_t> n(N, 0);
    Rational level(0);
    auto rec = [&](auto&& self, int i) -> void {
        if (i == N) {
            if (level >= rep.window_lo && level <= rep.window_hi)
                classes.emplace(class_key(n, delays), level);
            return;
        }
        self(self, i + 1);
        std::int64_t added = 0;
        while (level + L[i] <= rep.window_hi) {
            ++n[i];
            ++added;
            level += L[i];
            self(self, i + 1);
        }
        level -= L[i] * added;
        n[i] -= added;
    };
    rec(rec, 0);
    rep.classes_examined = classes.size();

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& signal : signals) {
        CCoefficientEngine eng(delays, signal);
        for (const auto& [key, x] : classes) {
            // sample the window (x - L_max, x): endpoints, interior signal
            // breakpoints, and midpoints of the induced subintervals
            std::set<Rational> pts{x - lmax, x};
            for (const auto& b : signal.breakpoints)
                if (b > x - lmax && b < x) pts.insert(b);
            std::vector<Rational> base(pts.begin(), pts.end());
            for (std::size_t i = 0; i + 1 < base.size(); ++i) pts.insert((base[i] + base[i + 1]) / 2);
            for (const auto& s : pts) {
                if (s <= 0) continue;
                ++rep.samples_examined;
                const double norm = inf_norm(eng.theta(key, s));
                if (norm > 0) {
                    rep.found = true;
                    best = std::max(best, std::log(norm) / to_double(s));
                }
            }
        }
    }
    rep.estimate = best;
    return rep;
}

EnvelopeCheck exponential_bound_check(DirectEvaluator& ev, const std::function<double(double)>& f,
                                      double p, const Rational& horizon, int time_samples) {
    EnvelopeCheck res;
    const double lmax = to_double(ev.length_max());
    auto window_max_f = [&](double t) {
        double m = 0;
        const int k = 64;
        for (int i = 0; i <= k; ++i) m = std::max(m, f(t - lmax + lmax * i / k));
        return m;
    };
    const double u0_norm = ev.window_norm(Rational(0), p);
    if (u0_norm == 0.0) return res;  // zero solution satisfies any positive envelope
    if (f(0.0) <= 0) throw InvalidInput("exponential_bound_check: envelope must be positive");
    res.fitted_constant = 1.0 / f(0.0);

    const int N = ev.delays().num_delays();
    for (int i = 0; i <= time_samples; ++i) {
        const Rational t = horizon * i / time_samples;
        const double td = to_double(t);
        const double lhs = ev.window_norm(t, p);
        const double rhs =
            res.fitted_constant * std::pow(td + 1.0, N - 1) * window_max_f(td) * u0_norm;
        if (lhs > rhs * (1.0 + 1e-9)) {
            res.ok = false;
            res.violation_time = td;
            res.lhs = lhs;
            res.rhs = rhs;
            return res;
        }
    }
    return res;
}

WitnessReport adversarial_witness(CCoefficientEngine& engine, const ClassKey& key, const Rational& t0,
                                  const Rational& delta) {
    const Rational x = engine.level(key);
    const Rational lmax = engine.delays().length_max();
    if (!(t0 > x - lmax && t0 < x)) throw InvalidInput("adversarial_witness: t0 outside (L.n - L_max, L.n)");

    // minimal spacing between distinct levels: every level is a multiple of
    // the rational gcd of the delays
    const auto L = engine.lengths();
    Rational gap = L.front();
    for (const auto& l : L) gap = rational_gcd(gap, l);
    Rational bound = std::min({Rational(2 * t0), Rational(x - t0), Rational(t0 - x + lmax), gap});
    if (!(2 * delta < bound))
        throw InvalidInput("adversarial_witness: delta too large for the lattice spacing");

    const CMat th = engine.theta(key, t0);
    if (inf_norm(th) == 0.0) throw InvalidInput("adversarial_witness: Theta vanishes at (key, t0)");
    int j0 = 0;
    double best = -1;
    for (int j = 0; j < th.dim(); ++j) {
        double col = 0;
        for (int i = 0; i < th.dim(); ++i) col = std::max(col, std::abs(th(i, j)));
        if (col > best) {
            best = col;
            j0 = j;
        }
    }

    WitnessReport rep;
    rep.coordinate = j0;
    rep.theta_norm = inf_norm(th);
    rep.level = x;
    rep.u0 = InitialCondition::bump(engine.dim(), j0, t0 - x, delta, lmax);
    return rep;
}

}  // namespace netwave
