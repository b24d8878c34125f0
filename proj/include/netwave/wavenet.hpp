#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "netwave/matrix.hpp"
#include "netwave/rational.hpp"
#include "netwave/transport.hpp"

namespace netwave {

enum class VertexRole { interior, damped, undamped };

// Finite connected oriented graph with positive edge lengths and a partition
// of the exterior vertices into damped and undamped ones.
struct Network {
    std::vector<std::string> vertex_names;
    std::vector<VertexRole> roles;
    struct Edge {
        int tail = 0;  // alpha(e), the x = 0 end
        int head = 0;  // omega(e), the x = L end
        Rational length;
    };
    std::vector<Edge> edges;

    int num_vertices() const { return static_cast<int>(roles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int degree(int v) const;
    void validate() const;

    std::vector<int> damped_vertices() const;    // ascending
    std::vector<int> undamped_vertices() const;  // ascending
    std::vector<Rational> lengths() const;
    // a grid step dividing every edge length: gcd(lengths) / refine
    Rational grid_step(int refine) const;
    Network with_scaled_lengths(const Rational& factor) const;
    Network with_flipped_edge(int edge) const;
};

struct PathRecord {
    std::vector<int> vertices;  // q_1 ... q_n (first == last for cycles)
    std::vector<int> edges;
    bool is_cycle = false;
    std::vector<int> signature;  // per edge: -1, 0, +1
};

struct Classification {
    bool is_tree = false;
    std::vector<int> exterior, interior;
    std::vector<PathRecord> qualifying_paths;  // cycles and undamped-pair paths
};

Classification classify(const Network& net);

// One row per qualifying path on the doubled transport components:
// rho_{i,2j-1} = rho_{i,2j} = s_i(j).
ConstraintMatrix build_R(const Network& net, const Classification& cls);

// Boundary transmission matrix (2N x 2N, real entries in [-1,1]) for damping
// values eta ordered like damped_vertices().
CMat build_M(const Network& net, const std::vector<double>& eta);

// |M^T M - (id - sum_q 4 eta_q / (1+eta_q)^2 Pin_q^T Pin_q)|_inf
double check_M_identity(const CMat& M, const Network& net, const std::vector<double>& eta);

// |R M - R|_inf
double check_RM(const ConstraintMatrix& R, const CMat& M);

// Sampled wave state: displacement derivative and velocity on the closed grid
// of each edge.
struct WaveState {
    std::vector<CVec> du, v;

    void validate(const Network& net, const Rational& grid_step) const;
    static WaveState zero(const Network& net, const Rational& grid_step);
};

// Traveling-wave components: 2N profiles, pair (2e, 2e+1) per edge e.
std::vector<CVec> dalembert_forward(const WaveState& state, const Network& net);

struct InverseResult {
    WaveState state;
    std::vector<CVec> displacement;  // path-anchored antiderivative per edge
    double y_residual = 0.0;         // membership residual of the input profiles
};

// Inverse decomposition; rejects profiles whose membership residual exceeds
// y_tol (the anchored antiderivative is path-independent only on that space).
InverseResult dalembert_inverse(const std::vector<CVec>& profiles, const Network& net,
                                double y_tol = 1e-8);

// Piecewise-constant damping signal: one nonnegative value per damped vertex.
struct DampingSignal {
    std::vector<Rational> breakpoints;
    std::vector<std::vector<double>> values;  // breakpoints.size() + 1 rows

    static DampingSignal constant(std::vector<double> eta);
    void validate(int n_damped) const;
    const std::vector<double>& at(const Rational& t) const;
    DampingSignal snapped(const Rational& grid_step) const;
};

struct WaveTrajectory {
    Rational grid_step;
    std::vector<double> times;      // every grid step from 0 to horizon
    std::vector<double> energies;   // discrete transport-side energy
    // per damped vertex: |du/dx|^2 at the vertex end of its edge, and eta(t)
    std::vector<std::vector<double>> damped_du_sq;
    std::vector<std::vector<double>> eta_trace;
    std::vector<std::int64_t> state_steps;
    std::vector<WaveState> states;
};

WaveTrajectory simulate_wave(const WaveState& initial, const Network& net,
                             const DampingSignal& damping, const Rational& horizon,
                             const Rational& grid_step, std::int64_t state_stride = 0);

// max over sample pairs (t, t+s) of |E(t+s) - E(t) + integral of the damped
// boundary flux|, flux integrated by trapezoid over every `stride`-th grid
// sample. The quadrature error scales with the square of the sampling step.
double energy_identity_residual(const WaveTrajectory& traj, std::int64_t stride = 1);

struct DampingSet {
    bool is_box = false;
    std::vector<double> lo, hi;               // box bounds per damped vertex
    std::vector<std::vector<double>> values;  // finite set alternative

    double coordinate_infimum(int coordinate) const;
};

struct WaveVerdict {
    bool stable = false;
    std::vector<std::string> reasons;  // failed clauses when unstable
};

// Exponential stability under arbitrary switching in the damping set: tree
// topology, a single undamped vertex, and damping bounded away from zero.
WaveVerdict stability_verdict_wave(const Network& net, const DampingSet& dampings);

// Standing-wave state along a qualifying path; keeps its energy regardless of
// the damping signal. Requires integer path-edge lengths.
WaveState periodic_witness(const Network& net, const PathRecord& path, const Rational& grid_step);

struct DecayFit {
    double rate = 0.0;
    double r_squared = 0.0;
};

// Least-squares slope of ln(energy) against time over the trailing half.
DecayFit decay_rate_fit(const std::vector<double>& times, const std::vector<double>& energies);

}  // namespace netwave
