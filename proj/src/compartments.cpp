#include "okin/compartments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"
#include "okin/errors.hpp"
#include "okin/meanfield.hpp"

namespace okin::net {

double DelaySpec::sample(Rng& rng) const {
    switch (kind) {
        case DelayKind::Constant:
            return p1;
        case DelayKind::Exponential:
            // Mean zero is the degenerate immediate arrival; skip the draw.
            return p1 == 0.0 ? 0.0 : rng.exponential(1.0 / p1);
        case DelayKind::LogNormal:
            return std::exp(p1 + p2 * rng.normal());
    }
    return 0.0;
}

int CompartmentNetwork::compartment_index(const std::string& name) const {
    for (std::size_t a = 0; a < names.size(); ++a)
        if (names[a] == name) return static_cast<int>(a);
    return -1;
}

std::string CompartmentNetwork::edge_label(int e) const {
    const auto& ed = edges[static_cast<std::size_t>(e)];
    return names[static_cast<std::size_t>(ed.from)] + "->" +
           names[static_cast<std::size_t>(ed.to)];
}

void CompartmentNetwork::validate() const {
    if (names.empty()) throw ValidationError("network needs at least one compartment");
    if (names.size() != compartments.size())
        throw ValidationError("network names and compartments must align");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw ValidationError("compartment names must be non-empty");
        if (!seen.insert(n).second) throw ValidationError("duplicate compartment name '" + n + "'");
    }
    for (const auto& m : compartments) m.validate();

    // Transport moves particles between compartments, so the species tables
    // and the bath temperature must agree everywhere.
    const auto& ref = base();
    for (std::size_t a = 1; a < compartments.size(); ++a) {
        if (compartments[a].species != ref.species)
            throw ValidationError("compartment '" + names[a] +
                                  "' does not share the network species table");
        if (compartments[a].beta != ref.beta)
            throw ValidationError("compartment '" + names[a] +
                                  "' does not share the network beta");
    }

    const int A = compartment_count();
    const int J = ref.species_count();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& ed = edges[e];
        const std::string where = "edge[" + std::to_string(e) + "]";
        if (ed.from < 0 || ed.from >= A || ed.to < 0 || ed.to >= A)
            throw ValidationError(where + ": endpoint out of range");
        if (ed.species < 0 || ed.species >= J)
            throw ValidationError(where + ": species index out of range");
        validate_flux(ed.rate, where + ".rate");
        const auto& d = ed.delay;
        if (!std::isfinite(d.p1) || !std::isfinite(d.p2))
            throw ValidationError(where + ".delay: parameters must be finite");
        switch (d.kind) {
            case DelayKind::Constant:
            case DelayKind::Exponential:
                if (d.p1 < 0.0) throw ValidationError(where + ".delay: needs p1 >= 0");
                break;
            case DelayKind::LogNormal:
                if (d.p2 < 0.0) throw ValidationError(where + ".delay: needs sigma >= 0");
                break;
        }
    }
}

namespace {

using json = nlohmann::ordered_json;  // preserves document order of compartments

const json& require(const json& obj, const char* key, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(context + ": missing key '" + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& context) {
    if (!v.is_number()) throw SchemaError(context + ": expected a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& context) {
    if (!v.is_string()) throw SchemaError(context + ": expected a string");
    return v.get<std::string>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw SchemaError(context + ": unknown key '" + item.key() + "'");
    }
}

FluxFunction parse_edge_flux(const json& v, const std::string& context) {
    if (!v.is_object()) throw SchemaError(context + ": expected an object");
    reject_unknown_keys(v, {"form", "params"}, context);
    FluxFunction f;
    f.form = flux_form_from_string(as_string(require(v, "form", context), context + ".form"));
    if (const auto it = v.find("params"); it != v.end()) {
        if (!it->is_array()) throw SchemaError(context + ".params: expected an array");
        for (const auto& p : *it) f.params.push_back(as_number(p, context + ".params"));
    }
    validate_flux(f, context);
    return f;
}

DelaySpec parse_delay(const json& v, const std::string& context) {
    if (!v.is_object()) throw SchemaError(context + ": expected an object");
    reject_unknown_keys(v, {"kind", "params"}, context);
    const std::string kind = as_string(require(v, "kind", context), context + ".kind");
    std::vector<double> params;
    if (const auto it = v.find("params"); it != v.end()) {
        if (!it->is_array()) throw SchemaError(context + ".params: expected an array");
        for (const auto& p : *it) params.push_back(as_number(p, context + ".params"));
    }
    DelaySpec d;
    if (kind == "constant") {
        d.kind = DelayKind::Constant;
        if (params.size() != 1) throw SchemaError(context + ": constant delay takes [tau]");
        d.p1 = params[0];
    } else if (kind == "exponential") {
        d.kind = DelayKind::Exponential;
        if (params.size() != 1) throw SchemaError(context + ": exponential delay takes [mean]");
        d.p1 = params[0];
    } else if (kind == "lognormal") {
        d.kind = DelayKind::LogNormal;
        if (params.size() != 2)
            throw SchemaError(context + ": lognormal delay takes [mu, sigma]");
        d.p1 = params[0];
        d.p2 = params[1];
    } else {
        throw SchemaError(context + ": unknown delay kind '" + kind + "'");
    }
    return d;
}

}  // namespace

CompartmentNetwork parse_network(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("network document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("network document must be a JSON object");

    const json compartments = require(doc, "compartments", "network");
    if (!compartments.is_object() || compartments.empty())
        throw SchemaError("network.compartments: expected a non-empty object");
    json edges = json::array();
    if (const auto it = doc.find("edges"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("network.edges: expected an array");
        edges = *it;
    }

    // Everything else is the shared base model document; each compartment is
    // that document with its overrides substituted, run through the model
    // parser so the full model schema (and validation) applies per
    // compartment.
    json base = doc;
    base.erase("compartments");
    if (base.contains("edges")) base.erase("edges");

    CompartmentNetwork net;
    for (const auto& item : compartments.items()) {
        const std::string ctx = "compartments." + item.key();
        if (!item.value().is_object()) throw SchemaError(ctx + ": expected an object");
        reject_unknown_keys(
            item.value(),
            {"reactions", "io", "initial", "volume", "heat_rate", "scale_fast", "scale_bath"},
            ctx);
        json merged = base;
        for (const auto& field : item.value().items()) merged[field.key()] = field.value();
        net.names.push_back(item.key());
        try {
            net.compartments.push_back(parse_model(merged.dump()));
        } catch (const Error& e) {
            throw SchemaError(ctx + ": " + e.what());
        }
    }

    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::string ctx = "edges[" + std::to_string(e) + "]";
        const json& ej = edges[e];
        if (!ej.is_object()) throw SchemaError(ctx + ": expected an object");
        reject_unknown_keys(ej, {"species", "from", "to", "rate", "delay"}, ctx);
        TransportEdge edge;
        const std::string sp = as_string(require(ej, "species", ctx), ctx + ".species");
        edge.species = net.base().species_index(sp);
        if (edge.species < 0) throw SchemaError(ctx + ": unknown species '" + sp + "'");
        const std::string from = as_string(require(ej, "from", ctx), ctx + ".from");
        const std::string to = as_string(require(ej, "to", ctx), ctx + ".to");
        edge.from = net.compartment_index(from);
        edge.to = net.compartment_index(to);
        if (edge.from < 0) throw SchemaError(ctx + ": unknown compartment '" + from + "'");
        if (edge.to < 0) throw SchemaError(ctx + ": unknown compartment '" + to + "'");
        edge.rate = parse_edge_flux(require(ej, "rate", ctx), ctx + ".rate");
        if (const auto it = ej.find("delay"); it != ej.end())
            edge.delay = parse_delay(*it, ctx + ".delay");
        net.edges.push_back(std::move(edge));
    }

    net.validate();
    return net;
}

CompartmentNetwork parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open network file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::vector<ssa::CountState> network_counts(const CompartmentNetwork& network) {
    std::vector<ssa::CountState> init;
    init.reserve(network.compartments.size());
    for (const auto& m : network.compartments) init.push_back(ssa::counts_from_concentrations(m));
    return init;
}

namespace {

// A scheduled arrival; the sequence number breaks time ties first-scheduled
// first so the simulation is deterministic.
struct Transit {
    double time = 0.0;
    std::uint64_t seq = 0;
    int edge = 0;
};

struct TransitLater {
    bool operator()(const Transit& a, const Transit& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

// State change of one ssa-engine channel (reaction, then per-species input,
// then per-species output), mirroring the single-model engine.
void apply_ssa_channel(ssa::CountState& state, const NetworkModel& model, int channel) {
    const int J = model.species_count();
    const int R = model.reaction_count();
    if (channel < R) {
        const auto& rx = model.reactions[static_cast<std::size_t>(channel)];
        for (int j = 0; j < J; ++j)
            state.counts[static_cast<std::size_t>(j)] += rx.stoich[static_cast<std::size_t>(j)];
    } else if (channel < R + J) {
        state.counts[static_cast<std::size_t>(channel - R)] += 1;
    } else {
        state.counts[static_cast<std::size_t>(channel - R - J)] -= 1;
    }
}

}  // namespace

NetworkRunResult simulate_network(const CompartmentNetwork& network,
                                  const std::vector<ssa::CountState>& init,
                                  const ssa::SimulateOptions& opts) {
    network.validate();
    const int A = network.compartment_count();
    const int E = static_cast<int>(network.edges.size());
    if (static_cast<int>(init.size()) != A)
        throw DomainError("simulate_network: one initial state per compartment required");
    const double t0 = init.front().time;
    for (const auto& st : init) {
        if (st.counts.size() != network.base().species.size())
            throw DomainError("simulate_network: initial counts must align with species");
        for (auto n : st.counts)
            if (n < 0) throw DomainError("simulate_network: negative particle count");
        if (st.time != t0)
            throw DomainError("simulate_network: all compartments must start at the same time");
    }
    if (!(opts.t_end >= t0)) throw DomainError("t_end must not precede the initial time");

    std::vector<double> grid;
    if (!opts.grid.empty()) {
        for (std::size_t i = 1; i < opts.grid.size(); ++i)
            if (opts.grid[i] < opts.grid[i - 1])
                throw DomainError("sample grid must be ascending");
        grid = opts.grid;
    } else {
        grid = sample_grid(t0, opts.t_end, opts.samples);
    }

    // Outgoing / incoming edges per compartment, in declaration order.
    std::vector<std::vector<int>> out_edges(static_cast<std::size_t>(A));
    std::vector<std::vector<int>> in_edges(static_cast<std::size_t>(A));
    for (int e = 0; e < E; ++e) {
        out_edges[static_cast<std::size_t>(network.edges[static_cast<std::size_t>(e)].from)]
            .push_back(e);
        in_edges[static_cast<std::size_t>(network.edges[static_cast<std::size_t>(e)].to)]
            .push_back(e);
    }

    NetworkRunResult result;
    result.per_compartment.resize(static_cast<std::size_t>(A));
    std::vector<int> ssa_channels(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
        const auto& model = network.compartments[static_cast<std::size_t>(a)];
        auto& traj = result.per_compartment[static_cast<std::size_t>(a)];
        traj.seed = Rng::derive(opts.seed, static_cast<std::uint64_t>(a));
        for (const auto& sp : model.species) traj.value_names.push_back(sp.name);
        traj.channel_names = ssa::channel_names(model);
        ssa_channels[static_cast<std::size_t>(a)] = ssa::channel_count(model);
        for (int e : out_edges[static_cast<std::size_t>(a)])
            traj.channel_names.push_back("dep_e" + std::to_string(e));
        for (int e : in_edges[static_cast<std::size_t>(a)])
            traj.channel_names.push_back("arr_e" + std::to_string(e));
    }

    // Each compartment owns an independent random stream; with no edges the
    // draw sequence per compartment (holding time, then channel pick) is the
    // one the single-model engine makes, so trajectories coincide exactly.
    std::vector<Rng> rngs;
    rngs.reserve(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a)
        rngs.emplace_back(Rng::derive(opts.seed, static_cast<std::uint64_t>(a)));

    std::vector<ssa::CountState> state = init;
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(A));
    std::vector<double> lambda(static_cast<std::size_t>(A), 0.0);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> cand(static_cast<std::size_t>(A), kInf);
    std::vector<std::vector<double>> tallies(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a)
        tallies[static_cast<std::size_t>(a)]
            .assign(result.per_compartment[static_cast<std::size_t>(a)].channel_names.size(), 0.0);

    std::vector<std::int64_t> in_transit(static_cast<std::size_t>(E), 0);
    std::priority_queue<Transit, std::vector<Transit>, TransitLater> queue;
    std::uint64_t next_seq = 0;

    // Recomputes the channel weights of one compartment and draws a fresh
    // candidate time.  Called only when that compartment's state changed, so
    // unaffected compartments keep their (memoryless) pending times.
    auto redraw = [&](int a, double now) {
        const auto au = static_cast<std::size_t>(a);
        const auto& model = network.compartments[au];
        weights[au] = ssa::propensities(state[au], model);
        for (int e : out_edges[au]) {
            const auto& edge = network.edges[static_cast<std::size_t>(e)];
            const std::int64_t n = state[au].counts[static_cast<std::size_t>(edge.species)];
            const double c = static_cast<double>(n) / model.volume;
            weights[au].push_back(n == 0 ? 0.0 : edge.rate(c) * model.volume);
        }
        double total = 0.0;
        for (double w : weights[au]) total += w;
        lambda[au] = total;
        cand[au] = total > 0.0 ? now + rngs[au].exponential(total) : kInf;
    };
    for (int a = 0; a < A; ++a) redraw(a, t0);

    std::size_t gi = 0;
    auto record_through = [&](double horizon) {
        while (gi < grid.size() && grid[gi] < horizon) {
            for (int a = 0; a < A; ++a) {
                const auto au = static_cast<std::size_t>(a);
                auto& traj = result.per_compartment[au];
                traj.times.push_back(grid[gi]);
                std::vector<double> row(state[au].counts.size());
                for (std::size_t j = 0; j < row.size(); ++j)
                    row[j] = static_cast<double>(state[au].counts[j]);
                traj.values.push_back(std::move(row));
                traj.event_counts.push_back(tallies[au]);
            }
            result.census_times.push_back(grid[gi]);
            result.census.push_back(in_transit);
            ++gi;
        }
    };

    std::uint64_t events = 0;
    for (;;) {
        int next_comp = -1;
        double t_cand = kInf;
        for (int a = 0; a < A; ++a)
            if (cand[static_cast<std::size_t>(a)] < t_cand) {
                t_cand = cand[static_cast<std::size_t>(a)];
                next_comp = a;
            }
        const double t_arr = queue.empty() ? kInf : queue.top().time;
        const bool arrival_first = t_arr <= t_cand;  // arrivals win ties
        const double t_next = arrival_first ? t_arr : t_cand;
        if (!(t_next <= opts.t_end)) break;  // nothing left inside the horizon

        if (events >= opts.max_events) {
            if (opts.on_budget == ssa::OnBudget::Throw)
                throw EventBudgetExceeded("event budget " + std::to_string(opts.max_events) +
                                          " exhausted at t = " + format_double(t_next));
            break;  // freeze: the remaining samples keep the current state
        }

        record_through(t_next);

        if (arrival_first) {
            const Transit arrival = queue.top();
            queue.pop();
            const auto& edge = network.edges[static_cast<std::size_t>(arrival.edge)];
            const auto to = static_cast<std::size_t>(edge.to);
            state[to].counts[static_cast<std::size_t>(edge.species)] += 1;
            state[to].time = t_next;
            in_transit[static_cast<std::size_t>(arrival.edge)] -= 1;
            // Tally the arrival channel: it sits after this compartment's
            // ssa channels and departure channels.
            std::size_t ch = static_cast<std::size_t>(ssa_channels[to]) + out_edges[to].size();
            for (std::size_t k = 0; k < in_edges[to].size(); ++k)
                if (in_edges[to][k] == arrival.edge) {
                    ch += k;
                    break;
                }
            tallies[to][ch] += 1.0;
            redraw(edge.to, t_next);
        } else {
            const auto au = static_cast<std::size_t>(next_comp);
            const double target = rngs[au].uniform() * lambda[au];
            double acc = 0.0;
            int channel = static_cast<int>(weights[au].size()) - 1;
            for (std::size_t c = 0; c < weights[au].size(); ++c) {
                acc += weights[au][c];
                if (target < acc) {
                    channel = static_cast<int>(c);
                    break;
                }
            }
            const int n_ssa = ssa_channels[au];
            if (channel < n_ssa) {
                apply_ssa_channel(state[au], network.compartments[au], channel);
            } else {
                const int e = out_edges[au][static_cast<std::size_t>(channel - n_ssa)];
                const auto& edge = network.edges[static_cast<std::size_t>(e)];
                state[au].counts[static_cast<std::size_t>(edge.species)] -= 1;
                const double tau = edge.delay.sample(rngs[au]);
                queue.push({t_next + tau, next_seq++, e});
                in_transit[static_cast<std::size_t>(e)] += 1;
            }
            state[au].time = t_next;
            tallies[au][static_cast<std::size_t>(channel)] += 1.0;
            redraw(next_comp, t_next);
        }
        ++events;
    }

    record_through(kInf);
    return result;
}

std::vector<Trajectory> meanfield_network(const CompartmentNetwork& network,
                                          const std::vector<std::vector<double>>& history,
                                          const meanfield::OdeOptions& opts) {
    for (std::size_t e = 0; e < network.edges.size(); ++e)
        if (!network.edges[e].delay.is_constant())
            throw NonConstantDelay("edge " + std::to_string(e) +
                                   " carries a random delay; the deterministic limit needs "
                                   "constant delays");
    auto result = meanfield::integrate_dde(network, history, opts);
    return std::move(result.per_compartment);
}

SweepResult transport_sweep(const CompartmentNetwork& network, std::span<const double> scales,
                            const std::vector<std::vector<double>>& guess,
                            const fixedpoint::SolveOptions& solve_opts) {
    network.validate();
    const int A = network.compartment_count();
    const int J = network.base().species_count();
    if (static_cast<int>(guess.size()) != A)
        throw DomainError("transport_sweep: one guess per compartment required");
    for (const auto& g : guess)
        if (static_cast<int>(g.size()) != J)
            throw DomainError("transport_sweep: guess must align with species");
    for (double s : scales)
        if (!(s >= 0.0)) throw DomainError("transport_sweep: scales must be non-negative");

    std::vector<double> x0;
    x0.reserve(static_cast<std::size_t>(A * J));
    for (const auto& g : guess) x0.insert(x0.end(), g.begin(), g.end());

    // Atom directions conserved in every compartment stay conserved under
    // transport (an atom leaving one compartment arrives in another), with
    // volume weights turning concentrations back into particle totals.
    std::vector<std::vector<double>> shared_dirs;
    for (const auto& dir : fixedpoint::conserved_directions(network.base())) {
        bool everywhere = true;
        for (int a = 1; a < A && everywhere; ++a) {
            const auto dirs_a =
                fixedpoint::conserved_directions(network.compartments[static_cast<std::size_t>(a)]);
            everywhere = std::find(dirs_a.begin(), dirs_a.end(), dir) != dirs_a.end();
        }
        if (everywhere) shared_dirs.push_back(dir);
    }

    SweepResult result;
    std::vector<double> prev_state;  // last converged stacked solution

    for (double s : scales) {
        SweepRow row;
        row.scale = s;

        std::vector<TransportEdge> scaled = network.edges;
        for (auto& e : scaled) e.rate = e.rate.scaled(s);
        bool active = false;
        for (const auto& e : scaled)
            if (!e.rate.is_zero()) active = true;

        std::vector<std::vector<double>> dirs;
        if (!active) {
            // Decoupled compartments: each block keeps its own conserved
            // atom totals.
            for (int a = 0; a < A; ++a)
                for (const auto& dir : fixedpoint::conserved_directions(
                         network.compartments[static_cast<std::size_t>(a)])) {
                    std::vector<double> stacked(static_cast<std::size_t>(A * J), 0.0);
                    std::copy(dir.begin(), dir.end(),
                              stacked.begin() + static_cast<std::ptrdiff_t>(a * J));
                    dirs.push_back(std::move(stacked));
                }
        } else {
            for (const auto& dir : shared_dirs) {
                std::vector<double> stacked(static_cast<std::size_t>(A * J), 0.0);
                for (int a = 0; a < A; ++a)
                    for (int j = 0; j < J; ++j)
                        stacked[static_cast<std::size_t>(a * J + j)] =
                            network.compartments[static_cast<std::size_t>(a)].volume *
                            dir[static_cast<std::size_t>(j)];
                dirs.push_back(std::move(stacked));
            }
        }

        auto drift_fn = [&](const std::vector<double>& x) {
            std::vector<double> out(static_cast<std::size_t>(A * J), 0.0);
            std::vector<double> c(static_cast<std::size_t>(J));
            for (int a = 0; a < A; ++a) {
                for (int j = 0; j < J; ++j)
                    c[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(a * J + j)];
                const auto d =
                    meanfield::drift(network.compartments[static_cast<std::size_t>(a)], c);
                for (int j = 0; j < J; ++j) out[static_cast<std::size_t>(a * J + j)] =
                    d[static_cast<std::size_t>(j)];
            }
            for (const auto& e : scaled) {
                const double v = e.rate(x[static_cast<std::size_t>(e.from * J + e.species)]);
                const double v_from =
                    network.compartments[static_cast<std::size_t>(e.from)].volume;
                const double v_to = network.compartments[static_cast<std::size_t>(e.to)].volume;
                out[static_cast<std::size_t>(e.from * J + e.species)] -= v;
                out[static_cast<std::size_t>(e.to * J + e.species)] += v * v_from / v_to;
            }
            return out;
        };

        try {
            const auto fp = fixedpoint::solve_drift(drift_fn, x0, dirs, solve_opts);
            row.converged = true;
            row.residual = fp.residual;
            row.max_eig_real = fp.jacobian_eigen_real_max;
            row.stability = fp.stability;
            row.c_star.resize(static_cast<std::size_t>(A));
            for (int a = 0; a < A; ++a)
                row.c_star[static_cast<std::size_t>(a)]
                    .assign(fp.c_star.begin() + static_cast<std::ptrdiff_t>(a * J),
                            fp.c_star.begin() + static_cast<std::ptrdiff_t>((a + 1) * J));
            if (!prev_state.empty()) {
                double jump = 0.0;
                for (std::size_t i = 0; i < fp.c_star.size(); ++i)
                    jump = std::max(jump, std::abs(fp.c_star[i] - prev_state[i]));
                result.max_jump = std::max(result.max_jump, jump);
            }
            prev_state = fp.c_star;
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

void write_network_csv(std::ostream& out, const CompartmentNetwork& network,
                       const NetworkRunResult& result) {
    out << "compartment,time";
    for (const auto& sp : network.base().species) out << ',' << sp.name;
    out << '\n';
    for (int a = 0; a < network.compartment_count(); ++a) {
        const auto& traj = result.per_compartment[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            out << network.names[static_cast<std::size_t>(a)] << ','
                << format_double(traj.times[i]);
            for (double v : traj.values[i]) out << ',' << format_double(v);
            out << '\n';
        }
    }
}

void write_census_csv(std::ostream& out, const CompartmentNetwork& network,
                      const NetworkRunResult& result) {
    out << "time,species,edge,count\n";
    for (std::size_t i = 0; i < result.census_times.size(); ++i)
        for (std::size_t e = 0; e < network.edges.size(); ++e) {
            const auto& edge = network.edges[e];
            out << format_double(result.census_times[i]) << ','
                << network.base().species[static_cast<std::size_t>(edge.species)].name << ','
                << network.edge_label(static_cast<int>(e)) << ',' << result.census[i][e]
                << '\n';
        }
}

void write_sweep_csv(std::ostream& out, const CompartmentNetwork& network,
                     const SweepResult& result) {
    out << "scale,converged,residual,max_eig_real,stability,error";
    for (int a = 0; a < network.compartment_count(); ++a)
        for (const auto& sp : network.base().species)
            out << ",c_" << network.names[static_cast<std::size_t>(a)] << '_' << sp.name;
    out << '\n';
    for (const auto& row : result.rows) {
        out << format_double(row.scale) << ',' << (row.converged ? 1 : 0) << ',';
        if (row.converged)
            out << format_double(row.residual) << ',' << format_double(row.max_eig_real) << ','
                << to_string(row.stability);
        else
            out << ",,";
        std::string quoted = row.error;
        std::string::size_type pos = 0;
        while ((pos = quoted.find('"', pos)) != std::string::npos) {
            quoted.insert(pos, 1, '"');
            pos += 2;
        }
        out << ",\"" << quoted << '"';
        for (const auto& comp : row.c_star)
            for (double v : comp) out << ',' << format_double(v);
        if (!row.converged)
            for (int k = 0;
                 k < network.compartment_count() * network.base().species_count(); ++k)
                out << ',';
        out << '\n';
    }
}

}  // namespace okin::net
