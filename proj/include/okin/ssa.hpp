#pragma once

// Exact stochastic simulation of the count-level jump process (Gillespie
// direct method).  Channels are, in fixed order: the declared reactions, one
// input channel per species, one output channel per species.  Elastic
// channels carry propensity zero here — they do not change counts; they are
// simulated by the energy-resolved engine.

#include <cstdint>
#include <span>
#include <vector>

#include "okin/model.hpp"
#include "okin/rng.hpp"
#include "okin/trajectory.hpp"

namespace okin::ssa {

struct CountState {
    std::vector<std::int64_t> counts;  // particles per species
    double time = 0.0;
};

// Initial counts round(c_j * V) from the model's initial concentrations.
CountState counts_from_concentrations(const NetworkModel& model);

// Total number of channels: reactions + per-species input and output.
int channel_count(const NetworkModel& model);

// Column labels for the event-count channels ("r0", ..., "in_A", "out_A").
std::vector<std::string> channel_names(const NetworkModel& model);

// Jump intensities of every channel at the given counts.
//
// A reaction of order m with constant a_r contributes
//   a_r * V^(1-m) * prod_j n_j^(multiplicity of j among substrates),
// masked to zero when any substrate count is below its multiplicity (the
// monomial would otherwise let a pair channel fire with one particle).
// Input channels contribute f_in(n_j/V) * V, output channels
// f_out(n_j/V) * V with the value forced to zero at n_j = 0.
//
// `rate_consts` optionally overrides the per-reaction constants (used for
// energy-renormalised effective rates); empty means the model's own.
std::vector<double> propensities(const CountState& state, const NetworkModel& model,
                                 std::span<const double> rate_consts = {});

enum class StepStatus {
    Fired,    // one channel fired; state advanced
    Extinct,  // all propensities vanished; state unchanged
};

struct StepResult {
    StepStatus status = StepStatus::Extinct;
    int channel = -1;   // channel that fired (valid when status == Fired)
    double wait = 0.0;  // holding time consumed by this event
};

// One jump of the direct method.  Consumes exactly two uniforms per fired
// event (holding time, then channel), none when extinct.
StepResult step(CountState& state, const NetworkModel& model, Rng& rng,
                std::span<const double> rate_consts = {});

enum class OnBudget {
    Throw,  // raise EventBudgetExceeded
    Stop,   // freeze the state and fill the remaining samples with it
};

struct SimulateOptions {
    double t_end = 1.0;
    int samples = 101;                // uniform grid size when `grid` is empty
    std::vector<double> grid;         // explicit sample times (ascending) if non-empty
    std::uint64_t seed = 1;
    std::uint64_t max_events = 10'000'000;
    OnBudget on_budget = OnBudget::Throw;
    std::vector<double> rate_consts;  // per-reaction override; empty = model's own
};

// Full trajectory with cumulative event tallies.  Each sample row holds the
// state after the last event at or before the sample time.
Trajectory simulate(const NetworkModel& model, const CountState& init,
                    const SimulateOptions& opts);

struct EnsembleResult {
    Trajectory mean;      // across replicates, per sample/column
    Trajectory variance;  // unbiased column variance (zeros for one replicate)
    int replicates = 0;
};

// Runs `n_rep` independent replicates; replicate k is seeded with
// Rng::derive(master_seed, k), so results do not depend on `jobs` (threads
// only schedule the work).
EnsembleResult ensemble(const NetworkModel& model, const CountState& init,
                        const SimulateOptions& opts, int n_rep, std::uint64_t master_seed,
                        int jobs = 1);

}  // namespace okin::ssa
