#pragma once

#include <string>

#include "json.hpp"
#include "netwave/diffeq.hpp"
#include "netwave/ratlattice.hpp"
#include "netwave/signal.hpp"
#include "netwave/spectral.hpp"
#include "netwave/transport.hpp"
#include "netwave/wavenet.hpp"

namespace netwave {

using Json = nlohmann::json;

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// {"B": [[...]], "ell": ["p/q", ...] | "symbolic"}
DelayVector delays_from_json(const Json& j);
Json delays_to_json(const DelayVector& dv);

// {"breakpoints": ["p/q", ...], "values": [[matrix, ...], ...]},
// matrix rows of [re, im] entries; rational strings also accepted
CSignal signal_from_json(const Json& j);
Json signal_to_json(const CSignal& s);

MatrixFamily family_from_json(const Json& j);
Json family_to_json(const MatrixFamily& f);

// {"breakpoints": [...], "segments": [segment][coordinate][power] of [re, im]}
InitialCondition initial_from_json(const Json& j);

// {"vertices": [{"name": ..., "role": ...}], "edges": [{"from": ..., "to": ..., "length": ...}]}
Network network_from_json(const Json& j);
Json network_to_json(const Network& net);

DampingSignal damping_from_json(const Json& j);
DampingSet damping_set_from_json(const Json& j);

// {"du": [edge][sample][re, im], "v": ...}
WaveState wave_state_from_json(const Json& j);

Json mu_report_to_json(const MuReport& rep);
Json mu_hs_report_to_json(const MuHsReport& rep);
Json delay_verdict_to_json(const DelayVerdict& v);
Json wave_verdict_to_json(const WaveVerdict& v);
Json lyapunov_report_to_json(const LyapunovReport& rep);

std::string format_double(double v);  // fixed 17-significant-digit form

std::string trajectory_csv(const Trajectory& tr);
std::string energy_csv(const WaveTrajectory& traj);
std::string wave_field_csv(const WaveTrajectory& traj, const Network& net);
std::string transport_field_csv(const TransportSim& sim, std::int64_t time_stride);
std::string levels_csv(const MuReport& rep);

}  // namespace netwave
