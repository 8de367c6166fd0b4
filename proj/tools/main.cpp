// Command-line front end: validation, stochastic and deterministic runs,
// thermodynamic monitoring, fixed-point / recurrence analysis, compartment
// networks and transport sweeps.  Every run is reproducible from its manifest
// (model hash, seed, parameters); CSV artifacts are byte-identical across
// repeated invocations with the same configuration.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "okin/compartments.hpp"
#include "okin/energy.hpp"
#include "okin/errors.hpp"
#include "okin/fixedpoint.hpp"
#include "okin/meanfield.hpp"
#include "okin/model.hpp"
#include "okin/rng.hpp"
#include "okin/ssa.hpp"
#include "okin/thermo.hpp"
#include "okin/trajectory.hpp"

namespace {

using nlohmann::json;
using namespace okin;

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool is_network_doc(const std::string& text) {
    const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    return doc.is_object() && doc.contains("compartments");
}

// Collects the CSV/JSON outputs of a run and their content hashes for the
// manifest.
class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DomainError("cannot write artifact '" + path.string() + "'");
        out << content;
        out.close();
        list_.push_back(
            {{"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    }

    template <typename Fn>
    void write_stream(const std::string& name, Fn&& fill) {
        std::ostringstream buf;
        fill(buf);
        write(name, buf.str());
    }

    const json& list() const { return list_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    json list_ = json::array();
};

struct Opts {
    std::string model_path;
    std::string out_dir = ".";
    double t_end = 1.0;
    double dt = 1e-3;
    int samples = 101;
    std::uint64_t seed = 1;
    int replicates = 1;
    int jobs = 1;
    std::uint64_t event_budget = 10'000'000;
    bool effective_rates = false;
    bool energy_resolved = false;
    int bins = 50;
    std::vector<double> guess;
    double scale_min = 0.0;
    double scale_max = 1.0;
    int scale_steps = 11;
};

ssa::SimulateOptions ssa_options(const Opts& o) {
    ssa::SimulateOptions s;
    s.t_end = o.t_end;
    s.samples = o.samples;
    s.seed = o.seed;
    s.max_events = o.event_budget;
    return s;
}

meanfield::OdeOptions ode_options(const Opts& o) {
    meanfield::OdeOptions m;
    m.t_end = o.t_end;
    m.dt = o.dt;
    m.samples = o.samples;
    return m;
}

NetworkModel load_model(const std::string& text, bool effective) {
    NetworkModel model = parse_model(text);
    if (effective) model = energy::with_effective_rates(model, model.beta);
    return model;
}

net::CompartmentNetwork load_network(const std::string& text, bool effective) {
    net::CompartmentNetwork network = net::parse_network(text);
    if (effective)
        for (auto& m : network.compartments) m = energy::with_effective_rates(m, m.beta);
    return network;
}

json conservation_report(const NetworkModel& model) {
    const auto dirs = fixedpoint::conserved_directions(model);
    json laws = json::array();
    for (int q = 0; q < model.atom_type_count(); ++q) {
        std::vector<double> column(model.species.size());
        json weights;
        for (int j = 0; j < model.species_count(); ++j) {
            const auto a = model.species[static_cast<std::size_t>(j)]
                               .atoms[static_cast<std::size_t>(q)];
            column[static_cast<std::size_t>(j)] = static_cast<double>(a);
            weights[model.species[static_cast<std::size_t>(j)].name] = a;
        }
        const bool conserved = std::find(dirs.begin(), dirs.end(), column) != dirs.end();
        laws.push_back(
            {{"atom_type", q}, {"weights", weights}, {"conserved_under_io", conserved}});
    }
    return laws;
}

// ---------------------------------------------------------------------------
// Command handlers.  Each returns command-specific manifest fields.
// ---------------------------------------------------------------------------

json cmd_validate(const Opts& opts, const std::string& text, Artifacts&) {
    json extra;
    if (is_network_doc(text)) {
        const auto network = net::parse_network(text);
        extra["kind"] = "network";
        extra["compartments"] = network.names;
        extra["edge_count"] = network.edges.size();
        extra["conservation_laws"] = conservation_report(network.base());
        std::cout << "network ok: " << network.compartment_count() << " compartments, "
                  << network.edges.size() << " edges\n";
    } else {
        const auto model = parse_model(text);
        extra["kind"] = "model";
        extra["conservation_laws"] = conservation_report(model);
        std::cout << "model ok: " << model.species_count() << " species, "
                  << model.reaction_count() << " reactions\n";
    }
    (void)opts;
    return extra;
}

json run_particle(const Opts& opts, const NetworkModel& model, Artifacts& artifacts) {
    if (opts.replicates != 1)
        throw DomainError("replicates apply to the count-level engine only");
    const auto init = energy::thermal_particles(model, Rng::derive(opts.seed, 1));
    energy::ParticleOptions popts;
    popts.base = ssa_options(opts);
    popts.base.seed = Rng::derive(opts.seed, 2);
    const auto run = energy::particle_simulate(model, init, popts);

    artifacts.write_stream("trajectory.csv",
                           [&](std::ostream& out) { write_trajectory_csv(out, run.counts); });
    artifacts.write_stream("energy.csv", [&](std::ostream& out) {
        energy::write_energy_csv(out, run.final_state, model);
    });
    json extra;
    extra["particles_final"] = run.final_state.types.size();
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    for (auto a : run.attempts) attempts += a;
    for (auto s : run.successes) successes += s;
    extra["attempts"] = attempts;
    extra["successes"] = successes;
    if (!run.final_state.types.empty()) {
        const auto hist = energy::empirical_energy_distribution(run.final_state, opts.bins);
        artifacts.write_stream("histogram.csv", [&](std::ostream& out) {
            energy::write_histogram_csv(out, hist);
        });
        extra["beta_hat"] = hist.beta_hat;
        extra["bath_ks_distance"] =
            energy::bath_ks_distance(run.final_state.kinetic, model.beta);
    }
    return extra;
}

json cmd_simulate(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    if (opts.energy_resolved) {
        if (opts.effective_rates)
            throw DomainError(
                "effective rates renormalise the count-level engine; the energy-resolved "
                "engine applies the energy gate directly");
        return run_particle(opts, parse_model(text), artifacts);
    }
    const auto model = load_model(text, opts.effective_rates);
    const auto init = ssa::counts_from_concentrations(model);
    json extra;
    if (opts.replicates == 1) {
        const auto traj = ssa::simulate(model, init, ssa_options(opts));
        artifacts.write_stream("trajectory.csv",
                               [&](std::ostream& out) { write_trajectory_csv(out, traj); });
        double events = 0.0;
        if (!traj.event_counts.empty())
            for (double v : traj.event_counts.back()) events += v;
        extra["total_events"] = events;
    } else {
        const auto ens =
            ssa::ensemble(model, init, ssa_options(opts), opts.replicates, opts.seed, opts.jobs);
        artifacts.write_stream("trajectory.csv",
                               [&](std::ostream& out) { write_trajectory_csv(out, ens.mean); });
        artifacts.write_stream("variance.csv", [&](std::ostream& out) {
            write_trajectory_csv(out, ens.variance);
        });
        double events = 0.0;
        if (!ens.mean.event_counts.empty())
            for (double v : ens.mean.event_counts.back()) events += v;
        extra["mean_events_per_replicate"] = events;
    }
    return extra;
}

void write_compartment_csv(std::ostream& out, const std::vector<std::string>& names,
                           const std::vector<Trajectory>& trajs) {
    out << "compartment,time";
    for (const auto& v : trajs.front().value_names) out << ',' << v;
    out << '\n';
    for (std::size_t a = 0; a < trajs.size(); ++a)
        for (std::size_t i = 0; i < trajs[a].times.size(); ++i) {
            out << names[a] << ',' << format_double(trajs[a].times[i]);
            for (double v : trajs[a].values[i]) out << ',' << format_double(v);
            out << '\n';
        }
}

json cmd_meanfield(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    json extra;
    if (is_network_doc(text)) {
        const auto network = load_network(text, opts.effective_rates);
        std::vector<std::vector<double>> history;
        for (const auto& m : network.compartments) history.push_back(m.initial);
        const auto trajs = net::meanfield_network(network, history, ode_options(opts));
        artifacts.write_stream("trajectory.csv", [&](std::ostream& out) {
            write_compartment_csv(out, network.names, trajs);
        });
        extra["kind"] = "network";
    } else {
        const auto model = load_model(text, opts.effective_rates);
        const auto result = meanfield::integrate_ode(model, model.initial, ode_options(opts));
        artifacts.write_stream("trajectory.csv", [&](std::ostream& out) {
            write_trajectory_csv(out, result.trajectory);
        });
        extra["kind"] = "model";
        extra["negative_clips"] = result.negative_clips;
    }
    return extra;
}

json cmd_thermo(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    const auto model = load_model(text, opts.effective_rates);
    const auto v = thermo::unary_rates(model);
    const auto pi = thermo::stationary_distribution(v);
    double c_tot = 0.0;
    for (double c : model.initial) c_tot += c;
    if (!(c_tot > 0.0)) throw DomainError("thermo needs a positive initial total concentration");
    std::vector<double> c_e(pi.size());
    for (std::size_t j = 0; j < pi.size(); ++j) c_e[j] = pi[j] * c_tot;

    const auto ode = meanfield::integrate_ode(model, model.initial, ode_options(opts));
    const auto report = thermo::monitor(ode.trajectory, model, c_e);
    const auto compat = thermo::compatibility_check(model, c_e);

    artifacts.write_stream("trajectory.csv", [&](std::ostream& out) {
        write_trajectory_csv(out, ode.trajectory);
    });
    artifacts.write_stream("thermo.csv", [&](std::ostream& out) {
        thermo::write_thermo_csv(out, report, model);
    });
    artifacts.write_stream("violations.csv", [&](std::ostream& out) {
        thermo::write_violations_csv(out, report);
    });

    double max_residual = 0.0;
    for (double r : report.identity_residual) max_residual = std::max(max_residual, std::abs(r));
    json extra;
    extra["compatible"] = compat.compatible;
    extra["max_potential_gap"] = compat.max_gap;
    extra["max_identity_residual"] = max_residual;
    extra["violations"] = report.violations.size();
    return extra;
}

json cmd_fixpoint(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    const auto model = load_model(text, opts.effective_rates);
    const std::vector<double> guess = opts.guess.empty() ? model.initial : opts.guess;
    if (opts.guess.empty())
        for (double g : guess)
            if (!(g > 0.0))
                throw DomainError(
                    "the initial concentrations contain non-positive entries; pass --guess "
                    "with positive starting concentrations");
    const auto fp = fixedpoint::solve_fixed_point(model, guess);

    json doc;
    json c_star;
    for (int j = 0; j < model.species_count(); ++j)
        c_star[model.species[static_cast<std::size_t>(j)].name] =
            fp.c_star[static_cast<std::size_t>(j)];
    doc["c_star"] = c_star;
    doc["residual"] = fp.residual;
    doc["jacobian_eigen_real_max"] = fp.jacobian_eigen_real_max;
    doc["stability"] = to_string(fp.stability);
    doc["iterations"] = fp.iterations;
    doc["reduced_dim"] = fp.reduced_dim;
    artifacts.write("fixedpoint.json", doc.dump(2) + "\n");

    json extra;
    extra["stability"] = to_string(fp.stability);
    extra["residual"] = fp.residual;
    return extra;
}

json cmd_classify(const Opts& opts, const std::string& text, Artifacts&) {
    const auto model = load_model(text, opts.effective_rates);
    const auto rec = fixedpoint::classify_recurrence(model);
    std::cout << to_string(rec) << "\n";
    double net = 0.0;
    for (const auto& ch : model.io)
        net += ch.input.constant_value() - ch.output.constant_value();
    json extra;
    extra["classification"] = to_string(rec);
    extra["total_net_flux"] = net;
    return extra;
}

json cmd_network(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    const auto network = load_network(text, opts.effective_rates);
    const auto init = net::network_counts(network);
    const auto run = net::simulate_network(network, init, ssa_options(opts));
    artifacts.write_stream("trajectory.csv", [&](std::ostream& out) {
        net::write_network_csv(out, network, run);
    });
    artifacts.write_stream("transit.csv", [&](std::ostream& out) {
        net::write_census_csv(out, network, run);
    });
    json extra;
    extra["compartments"] = network.names;
    extra["edge_count"] = network.edges.size();
    if (!run.census.empty()) extra["final_in_transit"] = run.census.back();
    return extra;
}

json cmd_sweep(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    const auto network = load_network(text, opts.effective_rates);
    if (opts.scale_steps < 1) throw DomainError("sweep needs at least one scale step");
    std::vector<double> scales;
    for (int k = 0; k < opts.scale_steps; ++k)
        scales.push_back(opts.scale_steps == 1
                             ? opts.scale_min
                             : opts.scale_min + (opts.scale_max - opts.scale_min) * k /
                                                    (opts.scale_steps - 1));
    std::vector<std::vector<double>> guess;
    for (const auto& m : network.compartments) guess.push_back(m.initial);
    const auto result = net::transport_sweep(network, scales, guess);
    artifacts.write_stream("sweep.csv", [&](std::ostream& out) {
        net::write_sweep_csv(out, network, result);
    });
    json extra;
    extra["max_jump"] = result.max_jump;
    int converged = 0;
    for (const auto& row : result.rows) converged += row.converged ? 1 : 0;
    extra["converged_rows"] = converged;
    extra["rows"] = result.rows.size();
    return extra;
}

json cmd_compare(const Opts& opts, const std::string& text, Artifacts& artifacts) {
    const auto model = load_model(text, opts.effective_rates);
    const auto init = ssa::counts_from_concentrations(model);
    const auto ens =
        ssa::ensemble(model, init, ssa_options(opts), opts.replicates, opts.seed, opts.jobs);
    const auto ode = meanfield::integrate_ode(model, model.initial, ode_options(opts));

    const auto& mean = ens.mean;
    const auto& det = ode.trajectory;
    if (mean.times.size() != det.times.size())
        throw DomainError("compare: engines returned different sample grids");

    double max_dev = 0.0;
    std::ostringstream out;
    out << "time";
    for (const auto& name : mean.value_names) out << ",dev_" << name;
    out << ",max_dev\n";
    for (std::size_t i = 0; i < mean.times.size(); ++i) {
        out << format_double(mean.times[i]);
        double row_max = 0.0;
        for (std::size_t j = 0; j < mean.value_names.size(); ++j) {
            const double dev =
                std::abs(mean.values[i][j] / model.volume - det.values[i][j]);
            row_max = std::max(row_max, dev);
            out << ',' << format_double(dev);
        }
        out << ',' << format_double(row_max) << '\n';
        max_dev = std::max(max_dev, row_max);
    }
    artifacts.write("deviation.csv", out.str());

    json extra;
    extra["max_deviation"] = max_dev;
    extra["replicates"] = opts.replicates;
    return extra;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"okin: stochastic reaction-network simulation and analysis"};
    app.set_version_flag("--version", std::string("okin ") + kVersion);
    app.set_config("--config", "", "File supplying any option; explicit flags override");
    app.require_subcommand(1);

    Opts opts;
    auto add_common = [&](CLI::App* sub, bool needs_model = true) {
        auto* m = sub->add_option("--model", opts.model_path, "Model or network document (JSON)");
        if (needs_model) m->required();
        sub->add_option("--out", opts.out_dir, "Output directory for artifacts");
        return sub;
    };
    auto add_time = [&](CLI::App* sub) {
        sub->add_option("--t-end", opts.t_end, "End time");
        sub->add_option("--samples", opts.samples, "Sample count of the uniform grid");
    };
    auto add_stochastic = [&](CLI::App* sub) {
        sub->add_option("--seed", opts.seed, "Master seed; all randomness derives from it");
        sub->add_option("--event-budget", opts.event_budget, "Event budget per run");
        sub->add_flag("--effective-rates", opts.effective_rates,
                      "Replace slow rate constants by their energy-averaged values");
    };

    auto* c_validate = add_common(app.add_subcommand("validate", "Parse and validate a document"));

    auto* c_simulate =
        add_common(app.add_subcommand("simulate", "Count-level stochastic simulation"));
    add_time(c_simulate);
    add_stochastic(c_simulate);
    c_simulate->add_option("--replicates", opts.replicates, "Independent replicates");
    c_simulate->add_option("--jobs", opts.jobs, "Worker threads (never affects results)");
    c_simulate->add_flag("--energy", opts.energy_resolved, "Use the energy-resolved engine");
    c_simulate->add_option("--bins", opts.bins, "Histogram bins (energy engine)");

    auto* c_particle =
        add_common(app.add_subcommand("particle-simulate", "Energy-resolved particle simulation"));
    add_time(c_particle);
    add_stochastic(c_particle);
    c_particle->add_option("--bins", opts.bins, "Histogram bins");

    auto* c_meanfield =
        add_common(app.add_subcommand("meanfield", "Deterministic rate equations (ODE/DDE)"));
    add_time(c_meanfield);
    c_meanfield->add_option("--dt", opts.dt, "Integrator step size");
    c_meanfield->add_flag("--effective-rates", opts.effective_rates,
                          "Replace slow rate constants by their energy-averaged values");

    auto* c_thermo = add_common(
        app.add_subcommand("thermo", "Free energy / entropy monitor along the ODE flow"));
    add_time(c_thermo);
    c_thermo->add_option("--dt", opts.dt, "Integrator step size");
    c_thermo->add_flag("--effective-rates", opts.effective_rates,
                       "Replace slow rate constants by their energy-averaged values");

    auto* c_fixpoint = add_common(app.add_subcommand("fixpoint", "Newton fixed-point solve"));
    c_fixpoint->add_option("--guess", opts.guess, "Starting concentrations (default: initial)");
    c_fixpoint->add_flag("--effective-rates", opts.effective_rates,
                         "Replace slow rate constants by their energy-averaged values");

    auto* c_classify =
        add_common(app.add_subcommand("classify", "Recurrence class of the open two-species walk"));

    auto* c_network =
        add_common(app.add_subcommand("network", "Stochastic compartment-network simulation"));
    add_time(c_network);
    add_stochastic(c_network);

    auto* c_sweep =
        add_common(app.add_subcommand("sweep", "Fixed points vs transport-rate scale"));
    c_sweep->add_option("--scale-min", opts.scale_min, "First edge-rate scale");
    c_sweep->add_option("--scale-max", opts.scale_max, "Last edge-rate scale");
    c_sweep->add_option("--scale-steps", opts.scale_steps, "Grid size (inclusive)");

    auto* c_compare = add_common(
        app.add_subcommand("compare", "Ensemble mean vs mean-field deviation table"));
    add_time(c_compare);
    add_stochastic(c_compare);
    c_compare->add_option("--dt", opts.dt, "Integrator step size");
    c_compare->add_option("--replicates", opts.replicates, "Independent replicates");
    c_compare->add_option("--jobs", opts.jobs, "Worker threads (never affects results)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        const std::string text = read_file(opts.model_path);
        Artifacts artifacts{opts.out_dir};

        json extra;
        std::string command;
        if (c_validate->parsed()) {
            command = "validate";
            extra = cmd_validate(opts, text, artifacts);
        } else if (c_simulate->parsed()) {
            command = "simulate";
            extra = cmd_simulate(opts, text, artifacts);
        } else if (c_particle->parsed()) {
            command = "particle-simulate";
            opts.energy_resolved = true;
            extra = run_particle(opts, parse_model(text), artifacts);
        } else if (c_meanfield->parsed()) {
            command = "meanfield";
            extra = cmd_meanfield(opts, text, artifacts);
        } else if (c_thermo->parsed()) {
            command = "thermo";
            extra = cmd_thermo(opts, text, artifacts);
        } else if (c_fixpoint->parsed()) {
            command = "fixpoint";
            extra = cmd_fixpoint(opts, text, artifacts);
        } else if (c_classify->parsed()) {
            command = "classify";
            extra = cmd_classify(opts, text, artifacts);
        } else if (c_network->parsed()) {
            command = "network";
            extra = cmd_network(opts, text, artifacts);
        } else if (c_sweep->parsed()) {
            command = "sweep";
            extra = cmd_sweep(opts, text, artifacts);
        } else if (c_compare->parsed()) {
            command = "compare";
            extra = cmd_compare(opts, text, artifacts);
        }

        json manifest;
        manifest["command"] = command;
        manifest["version"] = kVersion;
        manifest["model"] = {{"path", opts.model_path},
                             {"bytes", text.size()},
                             {"fnv1a64", hex64(fnv1a64(text))}};
        json params;
        params["t_end"] = opts.t_end;
        params["dt"] = opts.dt;
        params["samples"] = opts.samples;
        params["seed"] = opts.seed;
        params["replicates"] = opts.replicates;
        params["jobs"] = opts.jobs;
        params["event_budget"] = opts.event_budget;
        params["effective_rates"] = opts.effective_rates;
        params["energy_resolved"] = opts.energy_resolved;
        params["bins"] = opts.bins;
        if (c_sweep->parsed()) {
            params["scale_min"] = opts.scale_min;
            params["scale_max"] = opts.scale_max;
            params["scale_steps"] = opts.scale_steps;
        }
        if (!opts.guess.empty()) params["guess"] = opts.guess;
        manifest["params"] = params;
        manifest["result"] = extra;
        manifest["artifacts"] = artifacts.list();
        manifest["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();

        std::ofstream out(artifacts.dir() / "manifest.json", std::ios::binary);
        if (!out) throw DomainError("cannot write manifest");
        out << manifest.dump(2) << "\n";
        return 0;
    } catch (const SchemaError& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "Error: " << e.what() << "\n";
        return 2;
    }
}
