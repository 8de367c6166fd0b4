#pragma once

// Networks of compartments exchanging matter along directed transport edges
// with random or constant delays.  A particle in transit belongs to no
// compartment: it contributes to no rate and reappears at its destination
// when its scheduled arrival time is reached.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "okin/fixedpoint.hpp"
#include "okin/flux.hpp"
#include "okin/model.hpp"
#include "okin/rng.hpp"
#include "okin/ssa.hpp"
#include "okin/trajectory.hpp"

namespace okin::meanfield {
struct OdeOptions;
}

namespace okin::net {

enum class DelayKind { Constant, Exponential, LogNormal };

struct DelaySpec {
    DelayKind kind = DelayKind::Constant;
    double p1 = 0.0;  // Constant: tau; Exponential: mean; LogNormal: log-scale mu
    double p2 = 0.0;  // LogNormal: log-scale sigma

    bool is_constant() const { return kind == DelayKind::Constant; }
    double sample(Rng& rng) const;  // always >= 0; Constant consumes no randomness

    bool operator==(const DelaySpec&) const = default;
};

struct TransportEdge {
    int species = 0;  // shared species table index
    int from = 0;     // source compartment index
    int to = 0;       // destination compartment index
    FluxFunction rate;  // departure propensity rate(c_source) * V_source
    DelaySpec delay;

    bool operator==(const TransportEdge&) const = default;
};

struct CompartmentNetwork {
    std::vector<std::string> names;           // compartment names, document order
    std::vector<NetworkModel> compartments;   // aligned with names; shared species/beta
    std::vector<TransportEdge> edges;

    int compartment_count() const { return static_cast<int>(names.size()); }
    const NetworkModel& base() const { return compartments.front(); }
    int compartment_index(const std::string& name) const;
    // Human-readable edge label "<from>-><to>" for CSV output.
    std::string edge_label(int e) const;

    void validate() const;
};

// Network document: the model schema plus `compartments` (name -> overrides
// of reactions/io/initial/volume/heat_rate/scale_fast/scale_bath) and
// `edges` ({species, from, to, rate, delay}).
CompartmentNetwork parse_network(const std::string& json_text);
CompartmentNetwork parse_network_file(const std::string& path);

struct NetworkRunResult {
    std::vector<Trajectory> per_compartment;        // aligned with network order
    std::vector<double> census_times;               // sample grid
    std::vector<std::vector<std::int64_t>> census;  // [sample][edge] in transit
};

// Event-driven simulation: each compartment runs its ssa-engine channels plus
// one departure channel per outgoing edge, all from its own random stream
// Rng::derive(seed, compartment index); a departure removes the particle and
// schedules an arrival after a sampled delay.  With no edges every
// compartment reproduces exactly the single-model ssa run with its sub-seed.
// Arrivals due at the same instant as a candidate event are processed first.
NetworkRunResult simulate_network(const CompartmentNetwork& network,
                                  const std::vector<ssa::CountState>& init,
                                  const ssa::SimulateOptions& opts);

// Initial counts per compartment from each compartment's initial
// concentrations.
std::vector<ssa::CountState> network_counts(const CompartmentNetwork& network);

// Mean-field limit of the network: delegates to meanfield::integrate_dde.
// Every edge must carry a constant delay (NonConstantDelay otherwise).
std::vector<Trajectory> meanfield_network(const CompartmentNetwork& network,
                                          const std::vector<std::vector<double>>& history,
                                          const meanfield::OdeOptions& opts);

struct SweepRow {
    double scale = 0.0;
    bool converged = false;
    std::string error;                  // non-empty when the solve failed
    std::vector<std::vector<double>> c_star;  // per compartment (when converged)
    double residual = 0.0;
    double max_eig_real = 0.0;
    fixedpoint::Stability stability = fixedpoint::Stability::Marginal;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double max_jump = 0.0;  // max infinity-norm jump between successive converged rows
};

// Steady states of the coupled network (delays drop out of stationarity) as
// all edge rates are scaled by each grid value; solver failures are recorded
// per row, not fatal.
SweepResult transport_sweep(const CompartmentNetwork& network, std::span<const double> scales,
                            const std::vector<std::vector<double>>& guess,
                            const fixedpoint::SolveOptions& solve_opts = {});

// CSV writers: trajectory rows gain a leading `compartment` column; the
// census is written as "time,species,edge,count".
void write_network_csv(std::ostream& out, const CompartmentNetwork& network,
                       const NetworkRunResult& result);
void write_census_csv(std::ostream& out, const CompartmentNetwork& network,
                      const NetworkRunResult& result);
void write_sweep_csv(std::ostream& out, const CompartmentNetwork& network,
                     const SweepResult& result);

}  // namespace okin::net
