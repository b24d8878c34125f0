#pragma once

#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "netwave/matrix.hpp"
#include "netwave/rational.hpp"
#include "netwave/signal.hpp"

namespace netwave {

// Unit-speed transport on N intervals [0, L_i], coupled at the left endpoints
// by the time-varying transmission matrix M(t).
struct TransportSystem {
    std::vector<Rational> lengths;
    CSignal transmission;  // N x N matrix values (tuple of size 1 not used here)

    int num_edges() const { return static_cast<int>(lengths.size()); }
    void validate() const;
};

// A_i(.) = M(.) P_i: the i-th tuple entry carries column i of M.
CSignal to_difference(const CSignal& m_signal);

struct ConstraintMatrix {
    std::vector<std::vector<std::complex<double>>> rows;  // r x N

    int num_rows() const { return static_cast<int>(rows.size()); }
    int num_cols() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

// Exact method-of-characteristics simulation on a grid whose step divides
// every edge length; the boundary trace v_i(t) = u_i(t, 0) is stored densely
// on the step grid and the field is reconstructed as u_i(t, x) = v_i(t - x).
class TransportSim {
  public:
    TransportSim(TransportSystem system, std::vector<CVec> initial_profiles, Rational grid_step,
                 Rational horizon);

    const Rational& step() const { return h_; }
    std::int64_t horizon_steps() const { return horizon_steps_; }
    std::int64_t edge_steps(int edge) const { return edge_steps_[edge]; }
    int num_edges() const { return system_.num_edges(); }
    const TransportSystem& system() const { return system_; }

    // boundary trace at grid index k (k >= -edge_steps for the initial part)
    std::complex<double> trace(int edge, std::int64_t k) const;
    // field sample u_edge(k h, m h); t = k h >= 0, 0 <= m <= edge_steps(edge)
    std::complex<double> field(int edge, std::int64_t k, std::int64_t m) const;
    std::vector<CVec> field_at(std::int64_t k) const;
    // w_j(t) = u_j(t, L_j)
    CVec end_values(std::int64_t k) const;

    // exact off-grid evaluation of the boundary trace through the underlying
    // difference recursion (piecewise-linear interpolation of the initial data)
    const CVec& boundary_exact(const Rational& t) const;

  private:
    TransportSystem system_;
    std::vector<CVec> profiles_;
    Rational h_;
    std::int64_t horizon_steps_ = 0;
    std::int64_t max_steps_ = 0;
    std::vector<std::int64_t> edge_steps_;
    std::vector<CVec> trace_;  // index k + max_steps_, each entry an N-vector
    mutable std::unordered_map<Rational, CVec, RationalHash> exact_memo_;
};

struct InvarianceResidual {
    double algebraic = 0.0;  // max_t |R (M(t) - id) w(t)|
    double integral = 0.0;   // max_t |lambda(t)| with trapezoid accumulation
};

InvarianceResidual invariance_residual(const ConstraintMatrix& R, const TransportSim& sim);

// Row constraints |sum_j rho_ij integral(u_j)| <= tol with composite trapezoid.
bool y_projection_check(const std::vector<CVec>& profiles, const std::vector<Rational>& lengths,
                        const ConstraintMatrix& R, double tol);

double y_projection_residual(const std::vector<CVec>& profiles, const std::vector<Rational>& lengths,
                             const ConstraintMatrix& R);

}  // namespace netwave
