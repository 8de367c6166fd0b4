#include "okin/ssa.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "okin/errors.hpp"

namespace okin::ssa {

CountState counts_from_concentrations(const NetworkModel& model) {
    CountState state;
    state.counts.reserve(model.species.size());
    for (double c : model.initial)
        state.counts.push_back(static_cast<std::int64_t>(std::llround(c * model.volume)));
    return state;
}

int channel_count(const NetworkModel& model) {
    return model.reaction_count() + 2 * model.species_count();
}

std::vector<std::string> channel_names(const NetworkModel& model) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(channel_count(model)));
    for (int r = 0; r < model.reaction_count(); ++r) names.push_back("r" + std::to_string(r));
    for (const auto& sp : model.species) names.push_back("in_" + sp.name);
    for (const auto& sp : model.species) names.push_back("out_" + sp.name);
    return names;
}

namespace {

void check_state(const CountState& state, const NetworkModel& model) {
    if (state.counts.size() != model.species.size())
        throw DomainError("count state must align with species");
    for (std::int64_t n : state.counts)
        if (n < 0) throw DomainError("negative particle count");
}

}  // namespace

std::vector<double> propensities(const CountState& state, const NetworkModel& model,
                                 std::span<const double> rate_consts) {
    check_state(state, model);
    if (!rate_consts.empty() && rate_consts.size() != model.reactions.size())
        throw DomainError("rate constant override must align with reactions");

    const int J = model.species_count();
    const int R = model.reaction_count();
    const double V = model.volume;
    std::vector<double> lam(static_cast<std::size_t>(channel_count(model)), 0.0);

    for (int r = 0; r < R; ++r) {
        const auto& rx = model.reactions[static_cast<std::size_t>(r)];
        if (rx.kind != ReactionKind::Slow) continue;
        const double a =
            rate_consts.empty() ? rx.rate_const : rate_consts[static_cast<std::size_t>(r)];
        double p = a;
        int order = 0;
        for (int j = 0; j < J && p > 0.0; ++j) {
            const int nu = rx.stoich[static_cast<std::size_t>(j)];
            if (nu >= 0) continue;
            const std::int64_t n = state.counts[static_cast<std::size_t>(j)];
            if (n < -nu) {
                p = 0.0;
                break;
            }
            for (int k = 0; k < -nu; ++k) {
                p *= static_cast<double>(n);
                ++order;
            }
        }
        if (order == 2) p /= V;
        lam[static_cast<std::size_t>(r)] = p;
    }

    for (int j = 0; j < J; ++j) {
        const double c = static_cast<double>(state.counts[static_cast<std::size_t>(j)]) / V;
        const auto& ch = model.io[static_cast<std::size_t>(j)];
        lam[static_cast<std::size_t>(R + j)] = ch.input(c) * V;
        lam[static_cast<std::size_t>(R + J + j)] =
            state.counts[static_cast<std::size_t>(j)] == 0 ? 0.0 : ch.output(c) * V;
    }
    return lam;
}

namespace {

// Applies the state change of a fired channel.
void apply_channel(CountState& state, const NetworkModel& model, int channel) {
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

StepResult step(CountState& state, const NetworkModel& model, Rng& rng,
                std::span<const double> rate_consts) {
    const auto lam = propensities(state, model, rate_consts);
    double total = 0.0;
    for (double l : lam) total += l;
    if (!(total > 0.0)) return {StepStatus::Extinct, -1, 0.0};

    const double wait = rng.exponential(total);
    const double target = rng.uniform() * total;
    double acc = 0.0;
    int channel = static_cast<int>(lam.size()) - 1;
    for (std::size_t c = 0; c < lam.size(); ++c) {
        acc += lam[c];
        if (target < acc) {
            channel = static_cast<int>(c);
            break;
        }
    }
    apply_channel(state, model, channel);
    state.time += wait;
    return {StepStatus::Fired, channel, wait};
}

namespace {

std::vector<double> resolve_grid(const SimulateOptions& opts, double t0) {
    if (!opts.grid.empty()) {
        for (std::size_t i = 1; i < opts.grid.size(); ++i)
            if (opts.grid[i] < opts.grid[i - 1])
                throw DomainError("sample grid must be ascending");
        return opts.grid;
    }
    return sample_grid(t0, opts.t_end, opts.samples);
}

}  // namespace

Trajectory simulate(const NetworkModel& model, const CountState& init,
                    const SimulateOptions& opts) {
    check_state(init, model);
    if (!(opts.t_end >= init.time)) throw DomainError("t_end must not precede the initial time");
    const std::span<const double> rates{opts.rate_consts};
    if (!rates.empty() && rates.size() != model.reactions.size())
        throw DomainError("rate constant override must align with reactions");

    const auto grid = resolve_grid(opts, init.time);
    const int J = model.species_count();

    Trajectory traj;
    traj.seed = opts.seed;
    for (const auto& sp : model.species) traj.value_names.push_back(sp.name);
    traj.channel_names = channel_names(model);
    traj.times.reserve(grid.size());
    traj.values.reserve(grid.size());
    traj.event_counts.reserve(grid.size());

    CountState state = init;
    std::vector<double> tallies(static_cast<std::size_t>(channel_count(model)), 0.0);
    Rng rng(opts.seed);

    std::size_t gi = 0;
    auto record_through = [&](double horizon) {
        // Record every grid point strictly before `horizon` with the current
        // state: the state after the last event at or before that point.
        while (gi < grid.size() && grid[gi] < horizon) {
            traj.times.push_back(grid[gi]);
            std::vector<double> row(static_cast<std::size_t>(J));
            for (int j = 0; j < J; ++j)
                row[static_cast<std::size_t>(j)] =
                    static_cast<double>(state.counts[static_cast<std::size_t>(j)]);
            traj.values.push_back(std::move(row));
            traj.event_counts.push_back(tallies);
            ++gi;
        }
    };

    std::uint64_t events = 0;
    for (;;) {
        if (events >= opts.max_events) {
            if (opts.on_budget == OnBudget::Throw)
                throw EventBudgetExceeded("event budget " + std::to_string(opts.max_events) +
                                          " exhausted at t = " + format_double(state.time));
            break;
        }
        const auto lam = propensities(state, model, rates);
        double total = 0.0;
        for (double l : lam) total += l;
        if (!(total > 0.0)) break;  // extinct: nothing can fire any more

        const double wait = rng.exponential(total);
        const double t_next = state.time + wait;
        if (t_next > opts.t_end) break;

        const double target = rng.uniform() * total;
        double acc = 0.0;
        int channel = static_cast<int>(lam.size()) - 1;
        for (std::size_t c = 0; c < lam.size(); ++c) {
            acc += lam[c];
            if (target < acc) {
                channel = static_cast<int>(c);
                break;
            }
        }

        record_through(t_next);
        apply_channel(state, model, channel);
        state.time = t_next;
        tallies[static_cast<std::size_t>(channel)] += 1.0;
        ++events;
    }

    record_through(std::numeric_limits<double>::infinity());
    return traj;
}

EnsembleResult ensemble(const NetworkModel& model, const CountState& init,
                        const SimulateOptions& opts, int n_rep, std::uint64_t master_seed,
                        int jobs) {
    if (n_rep < 1) throw DomainError("ensemble: need at least one replicate");
    if (jobs < 1) jobs = 1;

    std::vector<Trajectory> runs(static_cast<std::size_t>(n_rep));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_rep) return;
            try {
                SimulateOptions o = opts;
                o.seed = Rng::derive(master_seed, static_cast<std::uint64_t>(k));
                runs[static_cast<std::size_t>(k)] = simulate(model, init, o);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Sequential reduction in replicate order keeps the result independent of
    // the thread schedule.
    EnsembleResult result;
    result.replicates = n_rep;
    result.mean = runs.front();
    result.mean.seed = master_seed;
    const std::size_t S = result.mean.times.size();
    const std::size_t C = result.mean.value_names.size();

    for (std::size_t k = 1; k < runs.size(); ++k)
        for (std::size_t i = 0; i < S; ++i) {
            for (std::size_t j = 0; j < C; ++j)
                result.mean.values[i][j] += runs[k].values[i][j];
            for (std::size_t c = 0; c < result.mean.event_counts[i].size(); ++c)
                result.mean.event_counts[i][c] += runs[k].event_counts[i][c];
        }
    const double inv = 1.0 / static_cast<double>(n_rep);
    for (std::size_t i = 0; i < S; ++i) {
        for (auto& v : result.mean.values[i]) v *= inv;
        for (auto& v : result.mean.event_counts[i]) v *= inv;
    }

    result.variance.times = result.mean.times;
    result.variance.value_names = result.mean.value_names;
    result.variance.seed = master_seed;
    result.variance.values.assign(S, std::vector<double>(C, 0.0));
    if (n_rep > 1) {
        for (std::size_t k = 0; k < runs.size(); ++k)
            for (std::size_t i = 0; i < S; ++i)
                for (std::size_t j = 0; j < C; ++j) {
                    const double d = runs[k].values[i][j] - result.mean.values[i][j];
                    result.variance.values[i][j] += d * d;
                }
        const double nv = 1.0 / static_cast<double>(n_rep - 1);
        for (std::size_t i = 0; i < S; ++i)
            for (auto& v : result.variance.values[i]) v *= nv;
    }
    return result;
}

}  // namespace okin::ssa
