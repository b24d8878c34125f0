#include "netwave/wavenet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "netwave/errors.hpp"

namespace netwave {

namespace {

constexpr double kPi = 3.14159265358979323846;

// transport component indices of edge e: 2e runs head -> tail (x = 0 at the
// head), 2e+1 runs tail -> head (x = 0 at the tail)
std::vector<int> in_indices(const Network& net, int q) {
    std::vector<int> idx;
    for (int e = 0; e < net.num_edges(); ++e) {
        if (net.edges[e].head == q) idx.push_back(2 * e + 1);
        if (net.edges[e].tail == q) idx.push_back(2 * e);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<int> out_indices(const Network& net, int q) {
    std::vector<int> idx;
    for (int e = 0; e < net.num_edges(); ++e) {
        if (net.edges[e].tail == q) idx.push_back(2 * e + 1);
        if (net.edges[e].head == q) idx.push_back(2 * e);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

double damping_of(const Network& net, const std::vector<double>& eta, int q) {
    const auto damped = net.damped_vertices();
    auto it = std::lower_bound(damped.begin(), damped.end(), q);
    return eta[static_cast<std::size_t>(it - damped.begin())];
}

std::complex<double> trapezoid(const CVec& samples, double h) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t m = 0; m + 1 < samples.size(); ++m) acc += 0.5 * h * (samples[m] + samples[m + 1]);
    return acc;
}

}  // namespace

int Network::degree(int v) const {
    int d = 0;
    for (const auto& e : edges) d += (e.tail == v) + (e.head == v);
    return d;
}

void Network::validate() const {
    const int nv = num_vertices();
    if (vertex_names.size() != roles.size())
        throw InvalidInput("network: vertex name/role count mismatch");
    if (nv == 0 || edges.empty()) throw InvalidInput("network: needs vertices and edges");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.tail < 0 || e.tail >= nv || e.head < 0 || e.head >= nv)
            throw InvalidInput("network: edge endpoint out of range");
        if (e.tail == e.head) throw InvalidInput("network: edge endpoints must be distinct");
        if (e.length <= 0) throw InvalidInput("network: edge lengths must be positive");
        auto key = std::minmax(e.tail, e.head);
        if (!seen.insert({key.first, key.second}).second)
            throw InvalidInput("network: parallel edges are not supported");
    }
    // connectivity
    std::vector<char> vis(nv, 0);
    std::queue<int> bfs;
    bfs.push(0);
    vis[0] = 1;
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (const auto& e : edges) {
            int other = -1;
            if (e.tail == v) other = e.head;
            else if (e.head == v) other = e.tail;
            if (other >= 0 && !vis[other]) {
                vis[other] = 1;
                bfs.push(other);
            }
        }
    }
    for (int v = 0; v < nv; ++v)
        if (!vis[v]) throw InvalidInput("network: graph is disconnected");
    // roles vs degrees
    bool has_damped = false, has_undamped = false;
    for (int v = 0; v < nv; ++v) {
        const int deg = degree(v);
        if (roles[v] == VertexRole::interior) {
            if (deg <= 1) throw InvalidInput("network: exterior vertex marked interior");
        } else {
            if (deg > 1) throw InvalidInput("network: damped/undamped vertex must be exterior");
            has_damped = has_damped || roles[v] == VertexRole::damped;
            has_undamped = has_undamped || roles[v] == VertexRole::undamped;
        }
    }
    if (!has_damped || !has_undamped)
        throw InvalidInput("network: needs at least one damped and one undamped vertex");
}

std::vector<int> Network::damped_vertices() const {
    std::vector<int> out;
    for (int v = 0; v < num_vertices(); ++v)
        if (roles[v] == VertexRole::damped) out.push_back(v);
    return out;
}

std::vector<int> Network::undamped_vertices() const {
    std::vector<int> out;
    for (int v = 0; v < num_vertices(); ++v)
        if (roles[v] == VertexRole::undamped) out.push_back(v);
    return out;
}

std::vector<Rational> Network::lengths() const {
    std::vector<Rational> out;
    for (const auto& e : edges) out.push_back(e.length);
    return out;
}

Rational Network::grid_step(int refine) const {
    if (refine <= 0) throw InvalidInput("network: grid refinement must be positive");
    Rational g = edges.front().length;
    for (const auto& e : edges) g = rational_gcd(g, e.length);
    return g / refine;
}

Network Network::with_scaled_lengths(const Rational& factor) const {
    if (factor <= 0) throw InvalidInput("network: length scaling must be positive");
    Network out = *this;
    for (auto& e : out.edges) e.length *= factor;
    return out;
}

Network Network::with_flipped_edge(int edge) const {
    Network out = *this;
    std::swap(out.edges[edge].tail, out.edges[edge].head);
    return out;
}

Classification classify(const Network& net) {
    net.validate();
    Classification cls;
    const int nv = net.num_vertices();
    cls.is_tree = net.num_edges() == nv - 1;
    for (int v = 0; v < nv; ++v)
        (net.degree(v) <= 1 ? cls.exterior : cls.interior).push_back(v);

    // adjacency with edge ids
    std::vector<std::vector<std::pair<int, int>>> adj(nv);  // (neighbor, edge)
    for (int e = 0; e < net.num_edges(); ++e) {
        adj[net.edges[e].tail].push_back({net.edges[e].head, e});
        adj[net.edges[e].head].push_back({net.edges[e].tail, e});
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    auto signature_of = [&](const std::vector<int>& verts, const std::vector<int>& edge_ids) {
        std::vector<int> s(net.num_edges(), 0);
        for (std::size_t i = 0; i < edge_ids.size(); ++i) {
            const int e = edge_ids[i];
            s[e] = net.edges[e].tail == verts[i] ? 1 : -1;
        }
        return s;
    };

    // elementary paths between unordered pairs of undamped vertices
    const auto undamped = net.undamped_vertices();
    for (std::size_t a = 0; a < undamped.size(); ++a)
        for (std::size_t b = a + 1; b < undamped.size(); ++b) {
            const int from = undamped[a], to = undamped[b];
            std::vector<int> verts{from}, edge_ids;
            std::vector<char> used(nv, 0);
            used[from] = 1;
            auto dfs = [&](auto&& self, int v) -> void {
                if (v == to) {
                    PathRecord rec;
                    rec.vertices = verts;
                    rec.edges = edge_ids;
                    rec.is_cycle = false;
                    rec.signature = signature_of(verts, edge_ids);
                    cls.qualifying_paths.push_back(std::move(rec));
                    return;
                }
                for (const auto& [w, e] : adj[v]) {
                    if (used[w]) continue;
                    used[w] = 1;
                    verts.push_back(w);
                    edge_ids.push_back(e);
                    self(self, w);
                    edge_ids.pop_back();
                    verts.pop_back();
                    used[w] = 0;
                }
            };
            dfs(dfs, from);
        }

    // cycles, anchored at their smallest vertex, one orientation each
    for (int s = 0; s < nv; ++s) {
        std::vector<int> verts{s}, edge_ids;
        std::vector<char> used(nv, 0);
        used[s] = 1;
        auto dfs = [&](auto&& self, int v) -> void {
            for (const auto& [w, e] : adj[v]) {
                if (w == s && verts.size() >= 3) {
                    // close the cycle; dedupe the reversed traversal
                    if (verts[1] < verts.back()) {
                        PathRecord rec;
                        rec.vertices = verts;
                        rec.vertices.push_back(s);
                        rec.edges = edge_ids;
                        rec.edges.push_back(e);
                        rec.is_cycle = true;
                        rec.signature = signature_of(rec.vertices, rec.edges);
                        cls.qualifying_paths.push_back(std::move(rec));
                    }
                    continue;
                }
                if (w <= s || used[w]) continue;
                used[w] = 1;
                verts.push_back(w);
                edge_ids.push_back(e);
                self(self, w);
                edge_ids.pop_back();
                verts.pop_back();
                used[w] = 0;
            }
        };
        dfs(dfs, s);
    }
    return cls;
}

ConstraintMatrix build_R(const Network& net, const Classification& cls) {
    ConstraintMatrix R;
    for (const auto& path : cls.qualifying_paths) {
        std::vector<std::complex<double>> row(2 * net.num_edges(), {0.0, 0.0});
        for (int e = 0; e < net.num_edges(); ++e) {
            row[2 * e] = static_cast<double>(path.signature[e]);
            row[2 * e + 1] = static_cast<double>(path.signature[e]);
        }
        R.rows.push_back(std::move(row));
    }
    return R;
}

CMat build_M(const Network& net, const std::vector<double>& eta) {
    net.validate();
    const auto damped = net.damped_vertices();
    if (eta.size() != damped.size())
        throw InvalidInput("build_M: one damping value per damped vertex required");
    for (double v : eta)
        if (v < 0) throw InvalidInput("build_M: damping must be nonnegative");

    const int n2 = 2 * net.num_edges();
    CMat sum(n2);
    for (int q = 0; q < net.num_vertices(); ++q) {
        const auto in = in_indices(net, q);
        const auto out = out_indices(net, q);
        const int nq = static_cast<int>(in.size());
        if (nq == 0) continue;
        double lambda = 1.0, jweight = 0.0;
        if (net.roles[q] == VertexRole::interior) {
            jweight = 2.0 / nq;
        } else if (net.roles[q] == VertexRole::damped) {
            const double e = damping_of(net, eta, q);
            lambda = (1.0 - e) / (1.0 + e);
        }
        for (int a = 0; a < nq; ++a)
            for (int b = 0; b < nq; ++b) {
                const double k = (a == b ? lambda : 0.0) - jweight;
                sum(out[a], in[b]) += k;
            }
    }
    CMat m(n2);
    auto dsign = [](int i) { return i % 2 == 0 ? -1.0 : 1.0; };
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) m(i, j) = -dsign(i) * sum(i, j) * dsign(j);
    return m;
}

double check_M_identity(const CMat& M, const Network& net, const std::vector<double>& eta) {
    const int n2 = M.dim();
    CMat mtm(n2);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (int k = 0; k < n2; ++k) acc += std::conj(M(k, i)) * M(k, j);
            mtm(i, j) = acc;
        }
    CMat expected = CMat::identity(n2);
    for (int q : net.damped_vertices()) {
        const double e = damping_of(net, eta, q);
        const double c = 4.0 * e / ((1.0 + e) * (1.0 + e));
        for (int idx : in_indices(net, q)) expected(idx, idx) -= c;
    }
    double resid = 0;
    for (int i = 0; i < n2; ++i) {
        double row = 0;
        for (int j = 0; j < n2; ++j) row += std::abs(mtm(i, j) - expected(i, j));
        resid = std::max(resid, row);
    }
    return resid;
}

double check_RM(const ConstraintMatrix& R, const CMat& M) {
    double resid = 0;
    for (int i = 0; i < R.num_rows(); ++i) {
        double row = 0;
        for (int j = 0; j < M.dim(); ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (int k = 0; k < M.dim(); ++k) acc += R.rows[i][k] * M(k, j);
            row += std::abs(acc - R.rows[i][j]);
        }
        resid = std::max(resid, row);
    }
    return resid;
}

void WaveState::validate(const Network& net, const Rational& grid_step) const {
    if (static_cast<int>(du.size()) != net.num_edges() ||
        static_cast<int>(v.size()) != net.num_edges())
        throw InvalidInput("wave state: one (du, v) pair per edge required");
    for (int e = 0; e < net.num_edges(); ++e) {
        if (!divides(grid_step, net.edges[e].length))
            throw InvalidInput("wave state: grid step must divide every edge length");
        const auto steps = exact_index(net.edges[e].length, grid_step);
        if (static_cast<std::int64_t>(du[e].size()) != steps + 1 ||
            static_cast<std::int64_t>(v[e].size()) != steps + 1)
            throw InvalidInput("wave state: sample count mismatch");
    }
}

WaveState WaveState::zero(const Network& net, const Rational& grid_step) {
    WaveState s;
    for (int e = 0; e < net.num_edges(); ++e) {
        const auto steps = exact_index(net.edges[e].length, grid_step);
        s.du.emplace_back(static_cast<std::size_t>(steps) + 1, std::complex<double>{0.0, 0.0});
        s.v.emplace_back(static_cast<std::size_t>(steps) + 1, std::complex<double>{0.0, 0.0});
    }
    return s;
}

std::vector<CVec> dalembert_forward(const WaveState& state, const Network& net) {
    std::vector<CVec> f(2 * net.num_edges());
    for (int e = 0; e < net.num_edges(); ++e) {
        const std::size_t m_e = state.du[e].size() - 1;
        f[2 * e].resize(m_e + 1);
        f[2 * e + 1].resize(m_e + 1);
        for (std::size_t m = 0; m <= m_e; ++m) {
            f[2 * e][m] = state.du[e][m_e - m] + state.v[e][m_e - m];
            f[2 * e + 1][m] = state.du[e][m] - state.v[e][m];
        }
    }
    return f;
}

InverseResult dalembert_inverse(const std::vector<CVec>& profiles, const Network& net, double y_tol) {
    if (static_cast<int>(profiles.size()) != 2 * net.num_edges())
        throw InvalidInput("dalembert_inverse: 2N profiles required");
    InverseResult res;
    std::vector<Rational> doubled;
    for (const auto& e : net.edges) {
        doubled.push_back(e.length);
        doubled.push_back(e.length);
    }
    const auto cls = classify(net);
    const auto R = build_R(net, cls);
    res.y_residual = y_projection_residual(profiles, doubled, R);
    if (res.y_residual > y_tol)
        throw InvalidInput("dalembert_inverse: profiles violate the range constraints (residual " +
                           std::to_string(res.y_residual) + ")");

    for (int e = 0; e < net.num_edges(); ++e) {
        const std::size_t m_e = profiles[2 * e].size() - 1;
        if (profiles[2 * e + 1].size() != m_e + 1)
            throw InvalidInput("dalembert_inverse: paired profiles must share their grid");
        CVec du(m_e + 1), v(m_e + 1);
        for (std::size_t m = 0; m <= m_e; ++m) {
            du[m] = 0.5 * (profiles[2 * e][m_e - m] + profiles[2 * e + 1][m]);
            v[m] = 0.5 * (profiles[2 * e][m_e - m] - profiles[2 * e + 1][m]);
        }
        res.state.du.push_back(std::move(du));
        res.state.v.push_back(std::move(v));
    }

    // path-anchored displacement: potentials from the first undamped vertex
    const int anchor = net.undamped_vertices().front();
    std::vector<std::complex<double>> phi(net.num_vertices(), {0.0, 0.0});
    std::vector<char> have(net.num_vertices(), 0);
    have[anchor] = 1;
    std::queue<int> bfs;
    bfs.push(anchor);
    while (!bfs.empty()) {
        const int q = bfs.front();
        bfs.pop();
        for (int e = 0; e < net.num_edges(); ++e) {
            const auto& edge = net.edges[e];
            const double h = to_double(edge.length) / static_cast<double>(res.state.du[e].size() - 1);
            if (edge.tail == q && !have[edge.head]) {
                phi[edge.head] = phi[q] + trapezoid(res.state.du[e], h);
                have[edge.head] = 1;
                bfs.push(edge.head);
            } else if (edge.head == q && !have[edge.tail]) {
                phi[edge.tail] = phi[q] - trapezoid(res.state.du[e], h);
                have[edge.tail] = 1;
                bfs.push(edge.tail);
            }
        }
    }
    for (int e = 0; e < net.num_edges(); ++e) {
        const auto& du = res.state.du[e];
        const double h = to_double(net.edges[e].length) / static_cast<double>(du.size() - 1);
        CVec disp(du.size());
        disp[0] = phi[net.edges[e].tail];
        for (std::size_t m = 1; m < du.size(); ++m)
            disp[m] = disp[m - 1] + 0.5 * h * (du[m - 1] + du[m]);
        res.displacement.push_back(std::move(disp));
    }
    return res;
}

DampingSignal DampingSignal::constant(std::vector<double> eta) {
    DampingSignal s;
    s.values.push_back(std::move(eta));
    return s;
}

void DampingSignal::validate(int n_damped) const {
    if (values.size() != breakpoints.size() + 1)
        throw InvalidInput("damping signal: value count must be breakpoint count + 1");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw InvalidInput("damping signal: breakpoints must be strictly increasing");
    for (const auto& row : values) {
        if (static_cast<int>(row.size()) != n_damped)
            throw InvalidInput("damping signal: one value per damped vertex required");
        for (double v : row)
            if (v < 0) throw InvalidInput("damping signal: values must be nonnegative");
    }
}

const std::vector<double>& DampingSignal::at(const Rational& t) const {
    std::size_t lo = 0, hi = breakpoints.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (breakpoints[mid] <= t) lo = mid + 1;
        else hi = mid;
    }
    return values[lo];
}

DampingSignal DampingSignal::snapped(const Rational& grid_step) const {
    DampingSignal out;
    out.values.push_back(values.front());
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        const Rational snapped =
            Rational(rational_floor(breakpoints[i] / grid_step + Rational(1, 2))) * grid_step;
        if (!out.breakpoints.empty() && snapped <= out.breakpoints.back()) {
            out.values.back() = values[i + 1];  // interval collapsed by snapping
            continue;
        }
        out.breakpoints.push_back(snapped);
        out.values.push_back(values[i + 1]);
    }
    return out;
}

WaveTrajectory simulate_wave(const WaveState& initial, const Network& net,
                             const DampingSignal& damping, const Rational& horizon,
                             const Rational& grid_step, std::int64_t state_stride) {
    net.validate();
    initial.validate(net, grid_step);
    const auto damped = net.damped_vertices();
    damping.validate(static_cast<int>(damped.size()));
    const DampingSignal snapped = damping.snapped(grid_step);

    // transmission signal on the doubled transport components
    CSignal msig;
    msig.breakpoints = snapped.breakpoints;
    for (const auto& eta : snapped.values) {
        MatrixTuple<std::complex<double>> t;
        t.A = {build_M(net, eta)};
        msig.values.push_back(std::move(t));
    }

    TransportSystem sys;
    for (const auto& e : net.edges) {
        sys.lengths.push_back(e.length);
        sys.lengths.push_back(e.length);
    }
    sys.transmission = std::move(msig);
    TransportSim sim(sys, dalembert_forward(initial, net), grid_step, horizon);

    WaveTrajectory traj;
    traj.grid_step = grid_step;
    const std::int64_t K = sim.horizon_steps();
    const double h = to_double(grid_step);
    traj.times.reserve(K + 1);
    traj.energies.reserve(K + 1);
    traj.damped_du_sq.assign(damped.size(), {});
    traj.eta_trace.assign(damped.size(), {});

    for (std::int64_t k = 0; k <= K; ++k) {
        traj.times.push_back(h * static_cast<double>(k));
        // discrete transport energy: (1/2) sum_i trapz |f_i|^2
        double energy = 0.0;
        for (int i = 0; i < sim.num_edges(); ++i) {
            const std::int64_t mi = sim.edge_steps(i);
            double acc = 0.5 * std::norm(sim.field(i, k, 0)) + 0.5 * std::norm(sim.field(i, k, mi));
            for (std::int64_t m = 1; m < mi; ++m) acc += std::norm(sim.field(i, k, m));
            energy += acc * h;
        }
        traj.energies.push_back(0.5 * energy);

        const auto& eta = snapped.at(grid_step * k);
        for (std::size_t qi = 0; qi < damped.size(); ++qi) {
            const int q = damped[qi];
            int e = -1;
            for (int ei = 0; ei < net.num_edges(); ++ei)
                if (net.edges[ei].tail == q || net.edges[ei].head == q) e = ei;
            const std::int64_t me = sim.edge_steps(2 * e);
            std::complex<double> du_end;
            if (net.edges[e].tail == q)
                du_end = 0.5 * (sim.trace(2 * e, k - me) + sim.trace(2 * e + 1, k));
            else
                du_end = 0.5 * (sim.trace(2 * e, k) + sim.trace(2 * e + 1, k - me));
            traj.damped_du_sq[qi].push_back(std::norm(du_end));
            traj.eta_trace[qi].push_back(eta[qi]);
        }

        if (state_stride > 0 && k % state_stride == 0) {
            WaveState s;
            for (int e = 0; e < net.num_edges(); ++e) {
                const std::int64_t me = sim.edge_steps(2 * e);
                CVec du(me + 1), v(me + 1);
                for (std::int64_t m = 0; m <= me; ++m) {
                    const auto fa = sim.field(2 * e, k, me - m);
                    const auto fb = sim.field(2 * e + 1, k, m);
                    du[static_cast<std::size_t>(m)] = 0.5 * (fa + fb);
                    v[static_cast<std::size_t>(m)] = 0.5 * (fa - fb);
                }
                s.du.push_back(std::move(du));
                s.v.push_back(std::move(v));
            }
            traj.state_steps.push_back(k);
            traj.states.push_back(std::move(s));
        }
    }
    return traj;
}

double energy_identity_residual(const WaveTrajectory& traj, std::int64_t stride) {
    if (stride < 1) throw InvalidInput("energy_identity_residual: stride must be positive");
    const std::int64_t K = static_cast<std::int64_t>(traj.energies.size()) - 1;
    if (K < stride) return 0.0;
    const double dt = to_double(traj.grid_step) * static_cast<double>(stride);
    // flux samples g(t) = sum_q 2 eta_q(t) |du(t, q)|^2 at the strided times
    std::vector<double> g;
    std::vector<double> energy;
    for (std::int64_t k = 0; k <= K; k += stride) {
        double acc = 0.0;
        for (std::size_t qi = 0; qi < traj.damped_du_sq.size(); ++qi)
            acc += 2.0 * traj.eta_trace[qi][k] * traj.damped_du_sq[qi][k];
        g.push_back(acc);
        energy.push_back(traj.energies[k]);
    }
    // E(b) - E(a) + trapz(g, a..b) telescopes through E + cumulative flux
    double cum = 0.0;
    double lo = energy.front(), hi = energy.front();
    for (std::size_t i = 1; i < g.size(); ++i) {
        cum += 0.5 * dt * (g[i - 1] + g[i]);
        lo = std::min(lo, energy[i] + cum);
        hi = std::max(hi, energy[i] + cum);
    }
    return hi - lo;
}

double DampingSet::coordinate_infimum(int coordinate) const {
    if (is_box) return lo[coordinate];
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : values) m = std::min(m, v[coordinate]);
    return m;
}

WaveVerdict stability_verdict_wave(const Network& net, const DampingSet& dampings) {
    const auto cls = classify(net);
    WaveVerdict v;
    if (!cls.is_tree) v.reasons.push_back("not a tree");
    if (net.undamped_vertices().size() != 1)
        v.reasons.push_back("more than one undamped vertex");
    const int nd = static_cast<int>(net.damped_vertices().size());
    if (!dampings.is_box && dampings.values.empty())
        throw InvalidInput("stability_verdict_wave: empty damping set");
    for (int c = 0; c < nd; ++c)
        if (!(dampings.coordinate_infimum(c) > 0)) {
            v.reasons.push_back("damping not bounded away from zero");
            break;
        }
    v.stable = v.reasons.empty();
    return v;
}

WaveState periodic_witness(const Network& net, const PathRecord& path, const Rational& grid_step) {
    if (path.edges.empty())
        throw InvalidInput("periodic_witness: no qualifying path (stable topology)");
    for (int e : path.edges)
        if (denominator(net.edges[e].length) != 1)
            throw InvalidInput(
                "periodic_witness: path edges need integer lengths (choose an integer "
                "representative of the delay structure)");
    WaveState s = WaveState::zero(net, grid_step);
    for (int e : path.edges) {
        const double sgn = static_cast<double>(path.signature[e]);
        const std::size_t steps = s.v[e].size() - 1;
        const double h = to_double(grid_step);
        for (std::size_t m = 0; m <= steps; ++m)
            s.v[e][m] = 2.0 * kPi * sgn * std::sin(2.0 * kPi * h * static_cast<double>(m));
    }
    return s;
}

DecayFit decay_rate_fit(const std::vector<double>& times, const std::vector<double>& energies) {
    if (times.size() != energies.size() || times.size() < 4)
        throw InvalidInput("decay_rate_fit: needs matching time/energy samples");
    const std::size_t start = times.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t i = start; i < times.size(); ++i) {
        if (!(energies[i] > 0)) throw InvalidInput("decay_rate_fit: nonpositive energy sample");
        const double x = times[i], y = std::log(energies[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    DecayFit fit;
    if (den == 0) return fit;
    fit.rate = (n * sxy - sx * sy) / den;
    const double ss_tot = syy - sy * sy / n;
    const double ss_res = ss_tot - fit.rate * (sxy - sx * sy / n);
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace netwave
