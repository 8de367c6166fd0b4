#pragma once

// Energy-resolved particle dynamics.  Each particle carries a kinetic energy
// alongside its type; reactive events are gated by an energy-availability
// condition, elastic collisions and heat-bath contacts reshuffle kinetic
// energy without changing types.  Integrating the kinetic energies out of the
// gated dynamics yields "effective" thinned rate constants for the plain
// count-level engine; the helpers below compute them in closed form.
//
// The bath equilibrium for a single particle's kinetic energy is the
// gamma density with shape 3/2 and rate beta:
//     g_beta(x) = (2/sqrt(pi)) beta^(3/2) sqrt(x) exp(-beta x),  x >= 0,
// i.e. the energy of a three-dimensional Maxwell velocity distribution.

#include <cstdint>
#include <span>
#include <vector>

#include "okin/model.hpp"
#include "okin/rng.hpp"
#include "okin/ssa.hpp"
#include "okin/trajectory.hpp"

namespace okin::energy {

// Bath energy density g_beta(x); zero for negative x.
double bath_density(double x, double beta);

// Bath cumulative distribution P(X <= x), X ~ g_beta.
double bath_cdf(double x, double beta);

// Tail P(X > r) of one bath-distributed energy:
//     erfc(sqrt(y)) + (2/sqrt(pi)) sqrt(y) exp(-y),  y = beta r
// (the regularised upper incomplete gamma Q(3/2, y)); 1 for r <= 0.
double tail_gbeta(double r, double beta);

// Tail P(X1 + X2 > r) of the sum of two independent bath energies, a
// gamma with shape 3 and rate beta:
//     exp(-y) (1 + y + y^2/2),  y = beta r;  1 for r <= 0.
double tail_gbeta_sum2(double r, double beta);

// Energy released by a reaction: sum of substrate internal energies minus
// product internal energies (negative = uphill, needs kinetic energy).
double chem_energy_drop(const ReactionSpec& rx, const NetworkModel& model);

// Rate constant after integrating the energy gate against the bath
// distribution: unchanged when the reaction is downhill, thinned by
// tail_gbeta (unary) or tail_gbeta_sum2 (binary) of the uphill gap otherwise.
double effective_rate_const(const ReactionSpec& rx, const NetworkModel& model, double beta);

// Per-reaction effective constants, aligned with model.reactions (elastic
// channels keep their constant unchanged).
std::vector<double> effective_rate_consts(const NetworkModel& model, double beta);

// Copy of the model with every slow rate constant replaced by its effective
// value; the count-level engines then simulate the energy-averaged dynamics.
NetworkModel with_effective_rates(const NetworkModel& model, double beta);

// Effective conversion-rate matrix v[j][j'] for a model whose slow reactions
// are all unary one-substrate/one-product conversions; entry (j, j') sums the
// effective constants of every reaction j -> j'.  ModelKindError otherwise.
std::vector<std::vector<double>> effective_unary_rates(const NetworkModel& model, double beta);

// Effective constants for a model whose slow reactions are all binary;
// aligned with model.reactions.  ModelKindError otherwise.
std::vector<double> effective_binary_rates(const NetworkModel& model, double beta);

// Splits `total` over `n` product particles with Dirichlet(split_params)
// weights; empty params mean the symmetric Dirichlet(1, ..., 1).  A single
// product receives everything without consuming randomness.
std::vector<double> draw_split(double total, int n, std::span<const double> split_params,
                               Rng& rng);

// ---------------------------------------------------------------------------
// Particle engine
// ---------------------------------------------------------------------------

struct ParticleState {
    std::vector<int> types;        // species index per particle
    std::vector<double> kinetic;   // kinetic energy per particle, >= 0
    double time = 0.0;
};

// Particle counts per species.
std::vector<std::int64_t> type_counts(const ParticleState& state, int species_count);

// Total energy sum_i (kinetic_i + K_{type_i}); conserved by reactions and
// elastic collisions (only bath contacts and input/output move it).
double total_energy(const ParticleState& state, const NetworkModel& model);

// round(c_j * V) particles per species with kinetic energies drawn from the
// bath distribution at the model's beta.
ParticleState thermal_particles(const NetworkModel& model, std::uint64_t seed);

struct ParticleOptions {
    ssa::SimulateOptions base;           // grid, seed, budget
    std::vector<double> snapshot_times;  // full-state snapshots (ascending)
};

struct ParticleRunResult {
    // Per-species particle counts over the sample grid; event_counts hold
    // cumulative *successful* firings per channel, ordered
    // reactions..., elastic, bath, in_<species>..., out_<species>....
    Trajectory counts;
    ParticleState final_state;
    std::vector<ParticleState> snapshots;   // aligned with options' snapshot_times
    std::vector<std::uint64_t> attempts;    // per channel, including gated failures
    std::vector<std::uint64_t> successes;   // per channel
};

std::vector<std::string> particle_channel_names(const NetworkModel& model);

// Exact simulation of the energy-resolved jump process.  Channel intensities:
//   reaction r:     as in ssa::propensities; a firing attempt succeeds only
//                   if pooled kinetic + released internal energy is >= 0,
//                   and the pooled energy is redistributed over the products
//                   via draw_split;
//   elastic:        scale_fast * b_f / V per unordered particle pair, where
//                   b_f is the summed constant of the declared elastic
//                   channels (1 when none is declared); the pair's kinetic
//                   energy is resplit with a Beta(3/2, 3/2) fraction;
//   bath:           scale_bath * heat_rate per particle; the particle pools
//                   its kinetic energy with a fresh bath draw and keeps a
//                   Beta(3/2, 3/2) fraction of the pool;
//   input/output:   as in ssa::propensities; injected particles carry a
//                   bath-distributed kinetic energy.
// An attempt (successful or not) counts against the event budget.
ParticleRunResult particle_simulate(const NetworkModel& model, const ParticleState& init,
                                    const ParticleOptions& opts);

struct EnergyHistogram {
    std::vector<double> edges;        // bins + 1 ascending edges, starting at 0
    std::vector<std::uint64_t> counts;
    double beta_hat = 0.0;            // 1.5 / mean kinetic energy
};

// Histogram of kinetic energies and the bath-fit inverse temperature.
// DomainError when the state holds no particles.
EnergyHistogram empirical_energy_distribution(const ParticleState& state, int bins);

// Kolmogorov-Smirnov distance between the empirical kinetic-energy law and
// the bath distribution at the given beta.
double bath_ks_distance(std::span<const double> kinetic, double beta);

void write_energy_csv(std::ostream& out, const ParticleState& state, const NetworkModel& model);
void write_histogram_csv(std::ostream& out, const EnergyHistogram& hist);

}  // namespace okin::energy
