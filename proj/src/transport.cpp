#include "netwave/transport.hpp"

#include <algorithm>
#include <cmath>

#include "netwave/errors.hpp"

namespace netwave {

void TransportSystem::validate() const {
    if (lengths.empty()) throw InvalidInput("transport: needs at least one edge");
    for (const auto& l : lengths)
        if (l <= 0) throw InvalidInput("transport: lengths must be positive");
    transmission.validate();
    if (transmission.num_delays() != 1)
        throw InvalidInput("transport: transmission signal must carry a single matrix per interval");
    if (transmission.dim() != num_edges())
        throw InvalidInput("transport: transmission matrix must be N x N");
}

CSignal to_difference(const CSignal& m_signal) {
    m_signal.validate();
    if (m_signal.num_delays() != 1)
        throw InvalidInput("to_difference: expected a single-matrix signal");
    const int n = m_signal.dim();
    CSignal out;
    out.breakpoints = m_signal.breakpoints;
    for (const auto& tuple : m_signal.values) {
        const CMat& m = tuple.A.front();
        MatrixTuple<std::complex<double>> a;
        for (int i = 0; i < n; ++i) {
            CMat ai(n);
            for (int r = 0; r < n; ++r) ai(r, i) = m(r, i);
            a.A.push_back(std::move(ai));
        }
        out.values.push_back(std::move(a));
    }
    return out;
}

TransportSim::TransportSim(TransportSystem system, std::vector<CVec> initial_profiles,
                           Rational grid_step, Rational horizon)
    : system_(std::move(system)), profiles_(std::move(initial_profiles)), h_(std::move(grid_step)) {
    system_.validate();
    if (h_ <= 0) throw InvalidInput("transport: grid step must be positive");
    const int n = system_.num_edges();
    if (static_cast<int>(profiles_.size()) != n)
        throw InvalidInput("transport: one initial profile per edge required");
    edge_steps_.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!divides(h_, system_.lengths[i]))
            throw InvalidInput("transport: grid step must divide every edge length");
        edge_steps_[i] = exact_index(system_.lengths[i], h_);
        if (static_cast<std::int64_t>(profiles_[i].size()) != edge_steps_[i] + 1)
            throw InvalidInput("transport: initial profile sample count mismatch");
    }
    if (!divides(h_, horizon)) throw InvalidInput("transport: grid step must divide the horizon");
    horizon_steps_ = exact_index(horizon, h_);
    max_steps_ = *std::max_element(edge_steps_.begin(), edge_steps_.end());

    trace_.assign(static_cast<std::size_t>(max_steps_ + horizon_steps_ + 1), CVec(n, {0.0, 0.0}));
    // initial trace: v_i(s) = u_{i,0}(-s) on [-L_i, 0), zero on [-L_max, -L_i)
    for (std::int64_t k = -max_steps_; k < 0; ++k) {
        CVec& row = trace_[static_cast<std::size_t>(k + max_steps_)];
        for (int i = 0; i < n; ++i)
            if (-k <= edge_steps_[i]) row[i] = profiles_[i][static_cast<std::size_t>(-k)];
    }
    // advance: v(t) = M(t) w(t) with w_j(t) = v_j(t - L_j)
    for (std::int64_t k = 0; k <= horizon_steps_; ++k) {
        const CMat& m = system_.transmission.at(h_ * k).A.front();
        CVec w(n);
        for (int j = 0; j < n; ++j) w[j] = trace(j, k - edge_steps_[j]);
        trace_[static_cast<std::size_t>(k + max_steps_)] = m.apply(w);
    }
}

std::complex<double> TransportSim::trace(int edge, std::int64_t k) const {
    if (k < -max_steps_ || k > horizon_steps_) throw InvalidInput("transport: trace index out of range");
    return trace_[static_cast<std::size_t>(k + max_steps_)][edge];
}

std::complex<double> TransportSim::field(int edge, std::int64_t k, std::int64_t m) const {
    if (m < 0 || m > edge_steps_[edge]) throw InvalidInput("transport: field position out of range");
    const std::int64_t shift = k - m;
    if (shift >= 0 || -shift <= edge_steps_[edge]) return trace(edge, shift);
    return {0.0, 0.0};
}

std::vector<CVec> TransportSim::field_at(std::int64_t k) const {
    std::vector<CVec> out(num_edges());
    for (int i = 0; i < num_edges(); ++i) {
        out[i].resize(static_cast<std::size_t>(edge_steps_[i]) + 1);
        for (std::int64_t m = 0; m <= edge_steps_[i]; ++m) out[i][static_cast<std::size_t>(m)] = field(i, k, m);
    }
    return out;
}

CVec TransportSim::end_values(std::int64_t k) const {
    CVec w(num_edges());
    for (int j = 0; j < num_edges(); ++j) w[j] = trace(j, k - edge_steps_[j]);
    return w;
}

const CVec& TransportSim::boundary_exact(const Rational& t) const {
    if (auto it = exact_memo_.find(t); it != exact_memo_.end()) return it->second;
    const int n = num_edges();
    CVec out(n, {0.0, 0.0});
    if (t >= 0) {
        const CMat& m = system_.transmission.at(t).A.front();
        CVec w(n);
        for (int j = 0; j < n; ++j) w[j] = boundary_exact(t - system_.lengths[j])[j];
        out = m.apply(w);
    } else {
        // initial data: piecewise-linear interpolation of the stored samples
        for (int i = 0; i < n; ++i) {
            const Rational x = -t;
            if (x > system_.lengths[i]) continue;
            const Rational pos = x / h_;
            const BigInt lo = rational_floor(pos);
            const std::int64_t m = lo.convert_to<std::int64_t>();
            const Rational frac = pos - Rational(lo);
            if (frac == 0) {
                out[i] = profiles_[i][static_cast<std::size_t>(m)];
            } else {
                const double w = to_double(frac);
                out[i] = profiles_[i][static_cast<std::size_t>(m)] * (1.0 - w) +
                         profiles_[i][static_cast<std::size_t>(m + 1)] * w;
            }
        }
    }
    return exact_memo_.emplace(t, std::move(out)).first->second;
}

namespace {

CVec apply_rows(const ConstraintMatrix& R, const CVec& x) {
    CVec out(R.num_rows(), {0.0, 0.0});
    for (int i = 0; i < R.num_rows(); ++i)
        for (int j = 0; j < R.num_cols(); ++j) out[i] += R.rows[i][j] * x[j];
    return out;
}

}  // namespace

InvarianceResidual invariance_residual(const ConstraintMatrix& R, const TransportSim& sim) {
    const int n = sim.num_edges();
    if (R.num_rows() > 0 && R.num_cols() != n)
        throw InvalidInput("invariance_residual: constraint width mismatch");
    InvarianceResidual res;
    if (R.num_rows() == 0) return res;

    const double h = to_double(sim.step());
    CVec lambda(R.num_rows(), {0.0, 0.0});
    CVec prev;
    for (std::int64_t k = 0; k <= sim.horizon_steps(); ++k) {
        const CMat& m = sim.system().transmission.at(sim.step() * k).A.front();
        const CVec w = sim.end_values(k);
        CVec mw = m.apply(w);
        for (int j = 0; j < n; ++j) mw[j] -= w[j];
        const CVec g = apply_rows(R, mw);
        res.algebraic = std::max(res.algebraic, inf_norm(g));
        if (k > 0)
            for (int i = 0; i < R.num_rows(); ++i) lambda[i] += 0.5 * h * (prev[i] + g[i]);
        res.integral = std::max(res.integral, inf_norm(lambda));
        prev = g;
    }
    return res;
}

double y_projection_residual(const std::vector<CVec>& profiles, const std::vector<Rational>& lengths,
                             const ConstraintMatrix& R) {
    if (R.num_rows() == 0) return 0.0;
    if (R.num_cols() != static_cast<int>(profiles.size()))
        throw InvalidInput("y_projection: constraint width mismatch");
    std::vector<std::complex<double>> integrals(profiles.size());
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        const auto& p = profiles[j];
        if (p.size() < 2) throw InvalidInput("y_projection: profiles need at least two samples");
        const double h = to_double(lengths[j]) / static_cast<double>(p.size() - 1);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t m = 0; m + 1 < p.size(); ++m) acc += 0.5 * h * (p[m] + p[m + 1]);
        integrals[j] = acc;
    }
    double worst = 0.0;
    for (int i = 0; i < R.num_rows(); ++i) {
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < R.num_cols(); ++j) acc += R.rows[i][j] * integrals[j];
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

bool y_projection_check(const std::vector<CVec>& profiles, const std::vector<Rational>& lengths,
                        const ConstraintMatrix& R, double tol) {
    return y_projection_residual(profiles, lengths, R) <= tol;
}

}  // namespace netwave
