#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "netwave/coefficients.hpp"
#include "netwave/diffeq.hpp"
#include "netwave/errors.hpp"
#include "netwave/jsonio.hpp"
#include "netwave/ratlattice.hpp"
#include "netwave/spectral.hpp"
#include "netwave/transport.hpp"
#include "netwave/wavenet.hpp"

namespace fs = std::filesystem;
using namespace netwave;

namespace {

struct Options {
    std::string config;
    std::vector<std::string> configs;  // batch
    std::string out = ".";
    std::uint64_t seed = 0;
    std::string grid_step;  // overrides, rational strings
    std::string horizon;
    std::uint64_t cap = 1000000;
    std::string format = "csv";
    double margin = 0.02;
};

Rational resolved_rational(const Json& cfg, const char* key, const std::string& flag,
                           const char* fallback) {
    if (!flag.empty()) return parse_rational(flag);
    if (cfg.contains(key)) {
        const auto& v = cfg.at(key);
        return v.is_string() ? parse_rational(v.get<std::string>())
                             : Rational(v.get<long long>());
    }
    return parse_rational(fallback);
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory: " + out);
}

Json base_metadata(const std::string& command, const Json& cfg, const Options& opt) {
    Json meta;
    meta["command"] = command;
    meta["config"] = cfg;
    meta["seed"] = opt.seed;
    meta["cap"] = opt.cap;
    meta["format"] = opt.format;
    return meta;
}

int run_lattice(const Options& opt) {
    const Json cfg = load_json_file(opt.config);
    const DelayVector dv = delays_from_json(cfg.contains("delays") ? cfg.at("delays") : cfg);
    ensure_out_dir(opt.out);

    Json out;
    out["config"] = cfg;
    out["delays"] = delays_to_json(dv);
    const auto kernel = integer_kernel(dv.B);
    out["kernel_basis"] = kernel;
    out["trivial_lattice"] = kernel.empty();
    if (!dv.symbolic()) {
        Json lengths = Json::array();
        for (const auto& l : dv.lengths()) lengths.push_back(to_string(l));
        out["lengths"] = lengths;
        // small class table around the origin
        Json classes = Json::array();
        const auto lat = level_lattice(dv, 4 * dv.length_max(), true);
        for (std::size_t i = 0; i < lat.levels.size(); ++i) {
            Json entry;
            entry["level"] = to_string(lat.levels[i]);
            Json keys = Json::array();
            for (const auto& k : lat.keys[i]) {
                Json members = Json::array();
                for (const auto& m : class_members(k, dv)) members.push_back(m);
                keys.push_back({{"key", k.k}, {"members", members}});
            }
            entry["classes"] = keys;
            classes.push_back(entry);
        }
        out["levels"] = classes;
    }
    Json meta = base_metadata("lattice", cfg, opt);
    meta["outputs"] = {"lattice.json"};
    write_text_file(opt.out + "/lattice.json", out.dump(2) + "\n");
    write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int run_simulate_difference(const Json& cfg, const Options& opt) {
    const DelayVector dv = delays_from_json(cfg.at("delays"));
    const CSignal sig = signal_from_json(cfg.at("signal"));
    const InitialCondition u0 = initial_from_json(cfg.at("initial"));
    const Rational horizon = resolved_rational(cfg, "horizon", opt.horizon, "10");
    const Rational step = resolved_rational(cfg, "grid_step", opt.grid_step, "1/8");
    const std::string method = cfg.value("method", "direct");

    Json meta = base_metadata("simulate", cfg, opt);
    meta["horizon"] = to_string(horizon);
    meta["grid_step"] = to_string(step);
    meta["method"] = method;
    Json outputs = Json::array();

    if (method == "direct" || method == "both") {
        DirectEvaluator ev(dv, sig, u0);
        auto tr = ev.sample(Rational(0), horizon, step);
        write_text_file(opt.out + "/trajectory.csv", trajectory_csv(tr));
        outputs.push_back("trajectory.csv");
    }
    if (method == "representation" || method == "both") {
        CCoefficientEngine eng(dv, sig);
        Trajectory tr;
        tr.method = "representation";
        for (Rational t(0); t <= horizon; t += step) {
            tr.times.push_back(t);
            tr.values.push_back(evaluate_representation(eng, u0, t));
        }
        write_text_file(opt.out + "/trajectory_representation.csv", trajectory_csv(tr));
        outputs.push_back("trajectory_representation.csv");
    }
    if (outputs.empty()) throw InvalidInput("simulate: unknown method '" + method + "'");
    meta["outputs"] = outputs;
    write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
    return 0;
}

int run_simulate_transport(const Json& cfg, const Options& opt) {
    TransportSystem sys;
    for (const auto& l : cfg.at("lengths"))
        sys.lengths.push_back(l.is_string() ? parse_rational(l.get<std::string>())
                                            : Rational(l.get<long long>()));
    sys.transmission = signal_from_json(cfg.at("transmission"));
    const Rational horizon = resolved_rational(cfg, "horizon", opt.horizon, "10");
    Rational fallback_step = sys.lengths.front();
    for (const auto& l : sys.lengths) fallback_step = rational_gcd(fallback_step, l);
    fallback_step /= 16;
    const Rational step = opt.grid_step.empty() && !cfg.contains("grid_step")
                              ? fallback_step
                              : resolved_rational(cfg, "grid_step", opt.grid_step, "1/16");

    std::vector<CVec> profiles;
    for (const auto& edge : cfg.at("initial_profiles")) {
        CVec p;
        for (const auto& v : edge)
            p.push_back(v.is_array() ? std::complex<double>(v[0].get<double>(), v[1].get<double>())
                                     : std::complex<double>(v.get<double>(), 0.0));
        profiles.push_back(std::move(p));
    }
    TransportSim sim(sys, profiles, step, horizon);
    const std::int64_t stride = std::max<std::int64_t>(1, sim.horizon_steps() / 64);

    ensure_out_dir(opt.out);
    write_text_file(opt.out + "/field.csv", transport_field_csv(sim, stride));
    Json meta = base_metadata("simulate", cfg, opt);
    meta["horizon"] = to_string(horizon);
    meta["grid_step"] = to_string(step);
    meta["time_stride"] = stride;
    meta["outputs"] = {"field.csv"};
    write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
    return 0;
}

int run_simulate_wave(const Json& cfg, const Options& opt) {
    const Network net = network_from_json(cfg.at("network"));
    const DampingSignal damping = damping_from_json(cfg.at("damping"));
    const Rational step = opt.grid_step.empty() && !cfg.contains("grid_step")
                              ? net.grid_step(16)
                              : resolved_rational(cfg, "grid_step", opt.grid_step, "1/16");
    const Rational horizon = resolved_rational(cfg, "horizon", opt.horizon, "20");

    WaveState state;
    if (cfg.contains("initial") && cfg.at("initial").contains("witness_path_index")) {
        const auto cls = classify(net);
        const int idx = cfg.at("initial").at("witness_path_index").get<int>();
        if (idx < 0 || idx >= static_cast<int>(cls.qualifying_paths.size()))
            throw InvalidInput("simulate: witness path index out of range");
        state = periodic_witness(net, cls.qualifying_paths[idx], step);
    } else {
        state = wave_state_from_json(cfg.at("initial"));
    }

    const std::int64_t total_steps = exact_index(horizon, step);
    const std::int64_t stride = std::max<std::int64_t>(1, total_steps / 32);
    auto traj = simulate_wave(state, net, damping, horizon, step, stride);

    ensure_out_dir(opt.out);
    write_text_file(opt.out + "/energy.csv", energy_csv(traj));
    write_text_file(opt.out + "/field.csv", wave_field_csv(traj, net));
    Json meta = base_metadata("simulate", cfg, opt);
    meta["horizon"] = to_string(horizon);
    meta["grid_step"] = to_string(step);
    meta["state_stride"] = stride;
    try {
        auto fit = decay_rate_fit(traj.times, traj.energies);
        meta["decay_fit"] = {{"rate", fit.rate}, {"r_squared", fit.r_squared}};
    } catch (const InvalidInput&) {
        meta["decay_fit"] = nullptr;  // vanished energies
    }
    meta["outputs"] = {"energy.csv", "field.csv"};
    write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
    return 0;
}

int run_simulate(const Options& opt) {
    const Json cfg = load_json_file(opt.config);
    ensure_out_dir(opt.out);
    const std::string kind = cfg.value("kind", "difference");
    if (kind == "difference") return run_simulate_difference(cfg, opt);
    if (kind == "transport") return run_simulate_transport(cfg, opt);
    if (kind == "wave") return run_simulate_wave(cfg, opt);
    throw InvalidInput("simulate: unknown kind '" + kind + "'");
}

int run_stability(const Options& opt) {
    const Json cfg = load_json_file(opt.config);
    ensure_out_dir(opt.out);
    const std::string kind = cfg.value("kind", "delays");
    if (kind == "delays") {
        const DelayVector dv = delays_from_json(cfg.at("delays"));
        const MatrixFamily fam = family_from_json(cfg.at("family"));
        const Rational x_max = resolved_rational(cfg, "x_max", opt.horizon, "30");
        const double margin = cfg.value("margin", opt.margin);
        const std::string mode = cfg.value("mode", "exhaustive");

        Json meta = base_metadata("stability", cfg, opt);
        meta["x_max"] = to_string(x_max);
        meta["margin"] = margin;
        if (mode == "sampled") {
            // sampled searches yield lower bounds, never verdicts
            auto rep = mu_estimate(dv, fam, x_max, SearchMode::sampled, opt.cap, opt.seed);
            Json out;
            out["config"] = cfg;
            out["status"] = 4;
            out["stable"] = false;
            out["reason"] = "sampled search gives a lower bound only";
            out["mu_report"] = mu_report_to_json(rep);
            write_text_file(opt.out + "/verdict.json", out.dump(2) + "\n");
            write_text_file(opt.out + "/levels.csv", levels_csv(rep));
            meta["outputs"] = {"verdict.json", "levels.csv"};
            write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
            std::cout << out.dump(2) << std::endl;
            return 4;
        }
        auto verdict = stability_verdict_delays(dv, fam, x_max, margin, opt.cap);
        Json out = delay_verdict_to_json(verdict);
        out["config"] = cfg;
        write_text_file(opt.out + "/verdict.json", out.dump(2) + "\n");
        write_text_file(opt.out + "/levels.csv", levels_csv(verdict.report));
        meta["outputs"] = {"verdict.json", "levels.csv"};
        write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
        std::cout << out.dump(2) << std::endl;
        return verdict.status;
    }
    if (kind == "wave") {
        const Network net = network_from_json(cfg.at("network"));
        const DampingSet set = damping_set_from_json(cfg.at("damping_set"));
        auto verdict = stability_verdict_wave(net, set);
        Json out = wave_verdict_to_json(verdict);
        out["config"] = cfg;
        Json meta = base_metadata("stability", cfg, opt);
        meta["outputs"] = {"verdict.json"};
        write_text_file(opt.out + "/verdict.json", out.dump(2) + "\n");
        write_text_file(opt.out + "/metadata.json", meta.dump(2) + "\n");
        std::cout << out.dump(2) << std::endl;
        return verdict.stable ? 0 : 3;
    }
    throw InvalidInput("stability: unknown kind '" + kind + "'");
}

int dispatch_one(const std::string& command, const Options& opt);

int run_batch(const Options& opt) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NETWAVE_THREADS")) workers = std::max(1, std::atoi(env));
    workers = std::max(1, std::min<int>(workers, static_cast<int>(opt.configs.size())));

    std::vector<int> status(opt.configs.size(), 0);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= opt.configs.size()) return;
                Options sub = opt;
                sub.config = opt.configs[i];
                sub.out = opt.out + "/run_" + std::to_string(i);
                try {
                    const Json cfg = load_json_file(sub.config);
                    status[i] = dispatch_one(cfg.value("command", "simulate"), sub);
                } catch (const IoError&) {
                    status[i] = 1;
                } catch (const InvalidInput&) {
                    status[i] = 2;
                } catch (const CapExceeded&) {
                    status[i] = 4;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    int worst = 0;
    for (std::size_t i = 0; i < status.size(); ++i) {
        std::cout << opt.configs[i] << " -> exit " << status[i] << "\n";
        worst = std::max(worst, status[i]);
    }
    return worst;
}

int dispatch_one(const std::string& command, const Options& opt) {
    if (command == "lattice") return run_lattice(opt);
    if (command == "simulate") return run_simulate(opt);
    if (command == "stability") return run_stability(opt);
    throw InvalidInput("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netwave: delay difference equations, transport systems, and damped waves on networks"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool batch) {
        if (batch) {
            sub->add_option("--config", opt.configs, "run configuration files")->required();
        } else {
            sub->add_option("--config", opt.config, "run configuration file")->required();
        }
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "random seed recorded in outputs");
        sub->add_option("--grid-step", opt.grid_step, "grid step as p/q (overrides the config)");
        sub->add_option("--horizon", opt.horizon, "time horizon or x_max as p/q");
        sub->add_option("--cap", opt.cap, "combinatorial search cap");
        sub->add_option("--format", opt.format, "csv|json output preference");
        sub->add_option("--margin", opt.margin, "stability truncation margin");
    };

    auto* lattice = app.add_subcommand("lattice", "kernel basis and class tables of a delay structure");
    add_common(lattice, false);
    auto* simulate = app.add_subcommand("simulate", "difference / transport / wave simulation");
    add_common(simulate, false);
    auto* stability = app.add_subcommand("stability", "stability verdicts (delays or wave networks)");
    add_common(stability, false);
    auto* batch = app.add_subcommand("batch", "run several configs across worker threads");
    add_common(batch, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(lattice)) return run_lattice(opt);
        if (app.got_subcommand(simulate)) return run_simulate(opt);
        if (app.got_subcommand(stability)) return run_stability(opt);
        if (app.got_subcommand(batch)) return run_batch(opt);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const CapExceeded& e) {
        std::cerr << "inconclusive: " << e.what() << std::endl;
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
