#include "netwave/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <fstream>
#include <sstream>

#include "netwave/errors.hpp"

namespace netwave {

namespace {

Rational rational_from_json(const Json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw InvalidInput("expected a rational as \"p/q\" string or integer, got: " + j.dump());
}

std::complex<double> complex_from_json(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_string()) return {to_double(parse_rational(j.get<std::string>())), 0.0};
    if (j.is_array() && j.size() == 2) {
        auto part = [](const Json& p) -> double {
            if (p.is_string()) return to_double(parse_rational(p.get<std::string>()));
            return p.get<double>();
        };
        return {part(j[0]), part(j[1])};
    }
    throw InvalidInput("expected a complex entry as [re, im], got: " + j.dump());
}

CMat matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw InvalidInput("expected a matrix as an array of rows");
    const int d = static_cast<int>(j.size());
    CMat m(d);
    for (int r = 0; r < d; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != d)
            throw InvalidInput("matrix rows must all have length " + std::to_string(d));
        for (int c = 0; c < d; ++c) m(r, c) = complex_from_json(j[r][c]);
    }
    return m;
}

Json matrix_to_json(const CMat& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.dim(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

MatrixTuple<std::complex<double>> tuple_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw InvalidInput("expected a tuple of matrices");
    MatrixTuple<std::complex<double>> t;
    for (const auto& mj : j) t.A.push_back(matrix_from_json(mj));
    return t;
}

Json tuple_to_json(const MatrixTuple<std::complex<double>>& t) {
    Json out = Json::array();
    for (const auto& m : t.A) out.push_back(matrix_to_json(m));
    return out;
}

}  // namespace

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidInput("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

DelayVector delays_from_json(const Json& j) {
    if (!j.contains("B")) throw InvalidInput("delay structure: missing \"B\"");
    DelayVector dv;
    for (const auto& row : j.at("B")) {
        std::vector<std::int64_t> r;
        for (const auto& v : row) r.push_back(v.get<std::int64_t>());
        dv.B.push_back(std::move(r));
    }
    if (j.contains("ell") && !(j.at("ell").is_string() && j.at("ell") == "symbolic")) {
        for (const auto& v : j.at("ell")) dv.ell.push_back(rational_from_json(v));
    }
    dv.validate();
    return dv;
}

Json delays_to_json(const DelayVector& dv) {
    Json j;
    j["B"] = dv.B;
    if (dv.symbolic()) {
        j["ell"] = "symbolic";
    } else {
        Json ell = Json::array();
        for (const auto& g : dv.ell) ell.push_back(to_string(g));
        j["ell"] = ell;
    }
    return j;
}

CSignal signal_from_json(const Json& j) {
    CSignal s;
    if (j.contains("breakpoints"))
        for (const auto& b : j.at("breakpoints")) s.breakpoints.push_back(rational_from_json(b));
    if (!j.contains("values")) throw InvalidInput("signal: missing \"values\"");
    for (const auto& v : j.at("values")) s.values.push_back(tuple_from_json(v));
    s.validate();
    return s;
}

Json signal_to_json(const CSignal& s) {
    Json j;
    Json bps = Json::array();
    for (const auto& b : s.breakpoints) bps.push_back(to_string(b));
    j["breakpoints"] = bps;
    Json vals = Json::array();
    for (const auto& v : s.values) vals.push_back(tuple_to_json(v));
    j["values"] = vals;
    return j;
}

MatrixFamily family_from_json(const Json& j) {
    MatrixFamily f;
    for (const auto& t : j) f.elements.push_back(tuple_from_json(t));
    f.validate();
    return f;
}

Json family_to_json(const MatrixFamily& f) {
    Json out = Json::array();
    for (const auto& t : f.elements) out.push_back(tuple_to_json(t));
    return out;
}

InitialCondition initial_from_json(const Json& j) {
    InitialCondition ic;
    for (const auto& b : j.at("breakpoints")) ic.breaks.push_back(rational_from_json(b));
    for (const auto& seg : j.at("segments")) {
        std::vector<std::vector<std::complex<double>>> coords;
        for (const auto& coord : seg) {
            std::vector<std::complex<double>> poly;
            for (const auto& c : coord) poly.push_back(complex_from_json(c));
            coords.push_back(std::move(poly));
        }
        ic.segments.push_back(std::move(coords));
    }
    ic.validate();
    return ic;
}

Network network_from_json(const Json& j) {
    Network net;
    std::map<std::string, int> index;
    for (const auto& v : j.at("vertices")) {
        const std::string name = v.at("name").get<std::string>();
        const std::string role = v.at("role").get<std::string>();
        index[name] = net.num_vertices();
        net.vertex_names.push_back(name);
        if (role == "interior") net.roles.push_back(VertexRole::interior);
        else if (role == "damped") net.roles.push_back(VertexRole::damped);
        else if (role == "undamped") net.roles.push_back(VertexRole::undamped);
        else throw InvalidInput("network: unknown vertex role '" + role + "'");
    }
    for (const auto& e : j.at("edges")) {
        Network::Edge edge;
        const auto resolve = [&](const Json& end) -> int {
            if (end.is_number_integer()) return end.get<int>();
            auto it = index.find(end.get<std::string>());
            if (it == index.end())
                throw InvalidInput("network: unknown vertex '" + end.get<std::string>() + "'");
            return it->second;
        };
        edge.tail = resolve(e.at("from"));
        edge.head = resolve(e.at("to"));
        edge.length = rational_from_json(e.at("length"));
        net.edges.push_back(edge);
    }
    net.validate();
    return net;
}

Json network_to_json(const Network& net) {
    Json j;
    Json verts = Json::array();
    for (int v = 0; v < net.num_vertices(); ++v) {
        const char* role = net.roles[v] == VertexRole::interior
                               ? "interior"
                               : (net.roles[v] == VertexRole::damped ? "damped" : "undamped");
        verts.push_back({{"name", net.vertex_names[v]}, {"role", role}});
    }
    j["vertices"] = verts;
    Json edges = Json::array();
    for (const auto& e : net.edges)
        edges.push_back({{"from", net.vertex_names[e.tail]},
                         {"to", net.vertex_names[e.head]},
                         {"length", to_string(e.length)}});
    j["edges"] = edges;
    return j;
}

DampingSignal damping_from_json(const Json& j) {
    DampingSignal d;
    if (j.contains("breakpoints"))
        for (const auto& b : j.at("breakpoints")) d.breakpoints.push_back(rational_from_json(b));
    for (const auto& row : j.at("values")) {
        std::vector<double> vals;
        for (const auto& v : row) vals.push_back(v.is_string()
                                                     ? to_double(parse_rational(v.get<std::string>()))
                                                     : v.get<double>());
        d.values.push_back(std::move(vals));
    }
    return d;
}

DampingSet damping_set_from_json(const Json& j) {
    DampingSet s;
    const std::string type = j.at("type").get<std::string>();
    if (type == "box") {
        s.is_box = true;
        for (const auto& v : j.at("lo")) s.lo.push_back(v.get<double>());
        for (const auto& v : j.at("hi")) s.hi.push_back(v.get<double>());
        if (s.lo.size() != s.hi.size()) throw InvalidInput("damping set: lo/hi size mismatch");
    } else if (type == "finite") {
        for (const auto& row : j.at("values")) {
            std::vector<double> vals;
            for (const auto& v : row) vals.push_back(v.get<double>());
            s.values.push_back(std::move(vals));
        }
        if (s.values.empty()) throw InvalidInput("damping set: empty finite set");
    } else {
        throw InvalidInput("damping set: unknown type '" + type + "'");
    }
    return s;
}

WaveState wave_state_from_json(const Json& j) {
    WaveState s;
    for (const auto& edge : j.at("du")) {
        CVec samples;
        for (const auto& v : edge) samples.push_back(complex_from_json(v));
        s.du.push_back(std::move(samples));
    }
    for (const auto& edge : j.at("v")) {
        CVec samples;
        for (const auto& v : edge) samples.push_back(complex_from_json(v));
        s.v.push_back(std::move(samples));
    }
    return s;
}

Json mu_report_to_json(const MuReport& rep) {
    Json j;
    j["mu_hat"] = rep.mu_hat;
    j["mu_tail_max"] = rep.mu_tail_max;
    j["window"] = {to_string(rep.window_lo), to_string(rep.window_hi)};
    j["mode"] = rep.mode == SearchMode::exhaustive ? "exhaustive" : "sampled";
    j["lower_bound_only"] = rep.lower_bound_only;
    j["seed"] = rep.seed;
    j["assignments_examined"] = rep.assignments_examined;
    Json levels = Json::array();
    for (std::size_t i = 0; i < rep.levels.size(); ++i)
        levels.push_back({{"level", to_string(rep.levels[i])}, {"sup", rep.sup_values[i]}});
    j["levels"] = levels;
    return j;
}

Json mu_hs_report_to_json(const MuHsReport& rep) {
    Json j;
    j["value"] = rep.value;
    j["tail_max"] = rep.tail_max;
    j["n_max"] = rep.n_max;
    j["grid"] = rep.grid;
    j["mode"] = rep.mode == SearchMode::exhaustive ? "exhaustive" : "sampled";
    j["lower_bound_only"] = rep.lower_bound_only;
    j["seed"] = rep.seed;
    j["per_n"] = rep.per_n;
    return j;
}

Json delay_verdict_to_json(const DelayVerdict& v) {
    Json j;
    j["status"] = v.status;
    j["stable"] = v.stable;
    j["mu_hat"] = v.mu_hat;
    j["margin"] = v.margin;
    j["lambda_hat"] = v.lambda_hat;
    j["mu_report"] = mu_report_to_json(v.report);
    return j;
}

Json wave_verdict_to_json(const WaveVerdict& v) {
    Json j;
    j["stable"] = v.stable;
    j["reasons"] = v.reasons;
    j["status"] = v.stable ? 0 : 3;
    return j;
}

Json lyapunov_report_to_json(const LyapunovReport& rep) {
    Json j;
    j["found"] = rep.found;
    if (rep.found) j["estimate"] = rep.estimate;
    else j["estimate"] = nullptr;
    j["window"] = {to_string(rep.window_lo), to_string(rep.window_hi)};
    j["classes_examined"] = rep.classes_examined;
    j["samples_examined"] = rep.samples_examined;
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "time";
    if (!tr.values.empty())
        for (std::size_t i = 0; i < tr.values.front().size(); ++i)
            os << ",re_u" << i + 1 << ",im_u" << i + 1;
    os << "\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << format_double(to_double(tr.times[k]));
        for (const auto& v : tr.values[k])
            os << ',' << format_double(v.real()) << ',' << format_double(v.imag());
        os << "\n";
    }
    return os.str();
}

std::string energy_csv(const WaveTrajectory& traj) {
    std::ostringstream os;
    os << "t,energy\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        os << format_double(traj.times[k]) << ',' << format_double(traj.energies[k]) << "\n";
    return os.str();
}

std::string wave_field_csv(const WaveTrajectory& traj, const Network& net) {
    std::ostringstream os;
    os << "edge,t,x,re_du,im_du,re_v,im_v\n";
    const double h = to_double(traj.grid_step);
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const double t = h * static_cast<double>(traj.state_steps[s]);
        for (int e = 0; e < net.num_edges(); ++e) {
            const auto& du = traj.states[s].du[e];
            const auto& v = traj.states[s].v[e];
            for (std::size_t m = 0; m < du.size(); ++m) {
                os << e + 1 << ',' << format_double(t) << ','
                   << format_double(h * static_cast<double>(m)) << ','
                   << format_double(du[m].real()) << ',' << format_double(du[m].imag()) << ','
                   << format_double(v[m].real()) << ',' << format_double(v[m].imag()) << "\n";
            }
        }
    }
    return os.str();
}

std::string transport_field_csv(const TransportSim& sim, std::int64_t time_stride) {
    std::ostringstream os;
    os << "edge,t,x,re,im\n";
    const double h = to_double(sim.step());
    for (std::int64_t k = 0; k <= sim.horizon_steps(); k += time_stride) {
        for (int e = 0; e < sim.num_edges(); ++e)
            for (std::int64_t m = 0; m <= sim.edge_steps(e); ++m) {
                const auto v = sim.field(e, k, m);
                os << e + 1 << ',' << format_double(h * static_cast<double>(k)) << ','
                   << format_double(h * static_cast<double>(m)) << ','
                   << format_double(v.real()) << ',' << format_double(v.imag()) << "\n";
            }
    }
    return os.str();
}

std::string levels_csv(const MuReport& rep) {
    std::ostringstream os;
    os << "level,sup,sup_pow\n";
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        const double x = to_double(rep.levels[i]);
        os << format_double(x) << ',' << format_double(rep.sup_values[i]) << ','
           << format_double(x > 0 && rep.sup_values[i] > 0 ? std::pow(rep.sup_values[i], 1.0 / x)
                                                           : 0.0)
           << "\n";
    }
    return os.str();
}

}  // namespace netwave
