#include "okin/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "okin/errors.hpp"

namespace okin::energy {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

double bath_density(double x, double beta) {
    if (x < 0.0) return 0.0;
    return 2.0 / kSqrtPi * beta * std::sqrt(beta * x) * std::exp(-beta * x);
}

double bath_cdf(double x, double beta) { return 1.0 - tail_gbeta(x, beta); }

double tail_gbeta(double r, double beta) {
    if (!(beta > 0.0)) throw DomainError("tail_gbeta: beta must be positive");
    if (r <= 0.0) return 1.0;
    const double y = beta * r;
    const double s = std::sqrt(y);
    return std::erfc(s) + 2.0 / kSqrtPi * s * std::exp(-y);
}

double tail_gbeta_sum2(double r, double beta) {
    if (!(beta > 0.0)) throw DomainError("tail_gbeta_sum2: beta must be positive");
    if (r <= 0.0) return 1.0;
    const double y = beta * r;
    return std::exp(-y) * (1.0 + y + 0.5 * y * y);
}

double chem_energy_drop(const ReactionSpec& rx, const NetworkModel& model) {
    double drop = 0.0;
    for (std::size_t j = 0; j < rx.stoich.size(); ++j)
        drop -= rx.stoich[j] * model.species[j].chem_energy;
    return drop;
}

double effective_rate_const(const ReactionSpec& rx, const NetworkModel& model, double beta) {
    if (rx.kind != ReactionKind::Slow) return rx.rate_const;
    const double drop = chem_energy_drop(rx, model);
    if (drop >= 0.0) return rx.rate_const;
    const double gap = -drop;
    return rx.order() == 1 ? rx.rate_const * tail_gbeta(gap, beta)
                           : rx.rate_const * tail_gbeta_sum2(gap, beta);
}

std::vector<double> effective_rate_consts(const NetworkModel& model, double beta) {
    std::vector<double> out;
    out.reserve(model.reactions.size());
    for (const auto& rx : model.reactions) out.push_back(effective_rate_const(rx, model, beta));
    return out;
}

NetworkModel with_effective_rates(const NetworkModel& model, double beta) {
    NetworkModel eff = model;
    for (auto& rx : eff.reactions) rx.rate_const = effective_rate_const(rx, model, beta);
    return eff;
}

std::vector<std::vector<double>> effective_unary_rates(const NetworkModel& model, double beta) {
    const int J = model.species_count();
    std::vector<std::vector<double>> v(static_cast<std::size_t>(J),
                                       std::vector<double>(static_cast<std::size_t>(J), 0.0));
    for (const auto& rx : model.reactions) {
        if (rx.kind != ReactionKind::Slow) continue;
        const auto subs = rx.substrates();
        const auto prods = rx.products();
        if (subs.size() != 1 || prods.size() != 1)
            throw ModelKindError(
                "effective_unary_rates needs one-substrate/one-product conversions only");
        v[static_cast<std::size_t>(subs[0])][static_cast<std::size_t>(prods[0])] +=
            effective_rate_const(rx, model, beta);
    }
    return v;
}

std::vector<double> effective_binary_rates(const NetworkModel& model, double beta) {
    for (const auto& rx : model.reactions)
        if (rx.kind == ReactionKind::Slow && rx.order() != 2)
            throw ModelKindError("effective_binary_rates needs binary reactions only");
    return effective_rate_consts(model, beta);
}

std::vector<double> draw_split(double total, int n, std::span<const double> split_params,
                               Rng& rng) {
    if (n < 1) throw DomainError("draw_split: need at least one product");
    if (total < 0.0) throw DomainError("draw_split: total energy must be non-negative");
    if (!split_params.empty() && static_cast<int>(split_params.size()) != n)
        throw DomainError("draw_split: one weight per product required");
    if (n == 1) return {total};
    std::vector<double> alpha(split_params.begin(), split_params.end());
    if (alpha.empty()) alpha.assign(static_cast<std::size_t>(n), 1.0);
    auto w = rng.dirichlet(alpha);
    for (auto& wi : w) wi *= total;
    return w;
}

// ---------------------------------------------------------------------------
// Particle engine
// ---------------------------------------------------------------------------

std::vector<std::int64_t> type_counts(const ParticleState& state, int species_count) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(species_count), 0);
    for (int t : state.types) {
        if (t < 0 || t >= species_count) throw DomainError("particle type out of range");
        ++counts[static_cast<std::size_t>(t)];
    }
    return counts;
}

double total_energy(const ParticleState& state, const NetworkModel& model) {
    if (state.types.size() != state.kinetic.size())
        throw DomainError("particle state arrays must align");
    double sum = 0.0;
    for (std::size_t i = 0; i < state.types.size(); ++i)
        sum += state.kinetic[i] + model.species[static_cast<std::size_t>(state.types[i])].chem_energy;
    return sum;
}

ParticleState thermal_particles(const NetworkModel& model, std::uint64_t seed) {
    ParticleState state;
    Rng rng(seed);
    for (int j = 0; j < model.species_count(); ++j) {
        const auto n = static_cast<std::int64_t>(
            std::llround(model.initial[static_cast<std::size_t>(j)] * model.volume));
        for (std::int64_t k = 0; k < n; ++k) {
            state.types.push_back(j);
            state.kinetic.push_back(rng.gamma(1.5, model.beta));
        }
    }
    return state;
}

std::vector<std::string> particle_channel_names(const NetworkModel& model) {
    std::vector<std::string> names;
    for (int r = 0; r < model.reaction_count(); ++r) names.push_back("r" + std::to_string(r));
    names.push_back("elastic");
    names.push_back("bath");
    for (const auto& sp : model.species) names.push_back("in_" + sp.name);
    for (const auto& sp : model.species) names.push_back("out_" + sp.name);
    return names;
}

namespace {

// Slot store with O(1) uniform sampling per type and over all particles.
// Slot ids are stable across removals (free slots are recycled), so several
// picks within one event stay valid while the event mutates the store.
class SlotStore {
public:
    explicit SlotStore(int types) : buckets_(static_cast<std::size_t>(types)) {}

    std::uint32_t add(int type, double kin) {
        std::uint32_t slot;
        if (!free_.empty()) {
            slot = free_.back();
            free_.pop_back();
            type_[slot] = type;
            kin_[slot] = kin;
        } else {
            slot = static_cast<std::uint32_t>(type_.size());
            type_.push_back(type);
            kin_.push_back(kin);
            pos_in_bucket_.push_back(0);
            pos_in_alive_.push_back(0);
        }
        auto& bucket = buckets_[static_cast<std::size_t>(type)];
        pos_in_bucket_[slot] = static_cast<std::uint32_t>(bucket.size());
        bucket.push_back(slot);
        pos_in_alive_[slot] = static_cast<std::uint32_t>(alive_.size());
        alive_.push_back(slot);
        return slot;
    }

    void remove(std::uint32_t slot) {
        detach_from_bucket(slot);
        const std::uint32_t pos = pos_in_alive_[slot];
        const std::uint32_t moved = alive_.back();
        alive_[pos] = moved;
        pos_in_alive_[moved] = pos;
        alive_.pop_back();
        type_[slot] = -1;
        free_.push_back(slot);
    }

    void retype(std::uint32_t slot, int new_type, double new_kin) {
        detach_from_bucket(slot);
        type_[slot] = new_type;
        kin_[slot] = new_kin;
        auto& bucket = buckets_[static_cast<std::size_t>(new_type)];
        pos_in_bucket_[slot] = static_cast<std::uint32_t>(bucket.size());
        bucket.push_back(slot);
    }

    std::uint32_t pick_of_type(int type, Rng& rng) const {
        const auto& bucket = buckets_[static_cast<std::size_t>(type)];
        return bucket[rng.uniform_index(bucket.size())];
    }

    // Unordered pair of distinct slots of one type (bucket size >= 2).
    std::pair<std::uint32_t, std::uint32_t> pick_pair_of_type(int type, Rng& rng) const {
        const auto& bucket = buckets_[static_cast<std::size_t>(type)];
        const std::uint64_t n = bucket.size();
        const std::uint64_t i1 = rng.uniform_index(n);
        std::uint64_t i2 = rng.uniform_index(n - 1);
        if (i2 >= i1) ++i2;
        return {bucket[i1], bucket[i2]};
    }

    std::pair<std::uint32_t, std::uint32_t> pick_pair_any(Rng& rng) const {
        const std::uint64_t n = alive_.size();
        const std::uint64_t i1 = rng.uniform_index(n);
        std::uint64_t i2 = rng.uniform_index(n - 1);
        if (i2 >= i1) ++i2;
        return {alive_[i1], alive_[i2]};
    }

    std::uint32_t pick_any(Rng& rng) const { return alive_[rng.uniform_index(alive_.size())]; }

    std::int64_t count_of_type(int type) const {
        return static_cast<std::int64_t>(buckets_[static_cast<std::size_t>(type)].size());
    }
    std::int64_t alive_count() const { return static_cast<std::int64_t>(alive_.size()); }

    double kinetic(std::uint32_t slot) const { return kin_[slot]; }
    void set_kinetic(std::uint32_t slot, double kin) { kin_[slot] = kin; }
    int type(std::uint32_t slot) const { return type_[slot]; }

    ParticleState capture(double time) const {
        ParticleState out;
        out.time = time;
        out.types.reserve(alive_.size());
        out.kinetic.reserve(alive_.size());
        for (std::uint32_t slot = 0; slot < type_.size(); ++slot) {
            if (type_[slot] < 0) continue;
            out.types.push_back(type_[slot]);
            out.kinetic.push_back(kin_[slot]);
        }
        return out;
    }

private:
    void detach_from_bucket(std::uint32_t slot) {
        auto& bucket = buckets_[static_cast<std::size_t>(type_[slot])];
        const std::uint32_t pos = pos_in_bucket_[slot];
        const std::uint32_t moved = bucket.back();
        bucket[pos] = moved;
        pos_in_bucket_[moved] = pos;
        bucket.pop_back();
    }

    std::vector<int> type_;       // -1 marks a free slot
    std::vector<double> kin_;
    std::vector<std::vector<std::uint32_t>> buckets_;
    std::vector<std::uint32_t> pos_in_bucket_;
    std::vector<std::uint32_t> pos_in_alive_;
    std::vector<std::uint32_t> alive_;
    std::vector<std::uint32_t> free_;
};

struct ReactionPlan {
    std::vector<int> subs;
    std::vector<int> prods;
    double chem_drop = 0.0;          // released internal energy (may be negative)
    std::vector<double> split;       // Dirichlet weights (empty = symmetric)
};

}  // namespace

ParticleRunResult particle_simulate(const NetworkModel& model, const ParticleState& init,
                                    const ParticleOptions& opts) {
    const int J = model.species_count();
    const int R = model.reaction_count();
    const double V = model.volume;
    if (init.types.size() != init.kinetic.size())
        throw DomainError("particle state arrays must align");
    for (double k : init.kinetic)
        if (!(k >= 0.0) || !std::isfinite(k))
            throw DomainError("kinetic energies must be finite and non-negative");
    if (!(opts.base.t_end >= init.time))
        throw DomainError("t_end must not precede the initial time");
    for (std::size_t i = 1; i < opts.snapshot_times.size(); ++i)
        if (opts.snapshot_times[i] < opts.snapshot_times[i - 1])
            throw DomainError("snapshot times must be ascending");

    SlotStore store(J);
    for (std::size_t i = 0; i < init.types.size(); ++i) {
        const int t = init.types[i];
        if (t < 0 || t >= J) throw DomainError("particle type out of range");
        store.add(t, init.kinetic[i]);
    }

    std::vector<ReactionPlan> plans(static_cast<std::size_t>(R));
    double b_elastic = 0.0;
    bool elastic_declared = false;
    for (int r = 0; r < R; ++r) {
        const auto& rx = model.reactions[static_cast<std::size_t>(r)];
        if (rx.kind == ReactionKind::FastElastic) {
            elastic_declared = true;
            b_elastic += rx.rate_const;
            continue;
        }
        auto& plan = plans[static_cast<std::size_t>(r)];
        plan.subs = rx.substrates();
        plan.prods = rx.products();
        plan.chem_drop = chem_energy_drop(rx, model);
        plan.split = rx.split_params;
    }
    if (!elastic_declared) b_elastic = 1.0;
    const double elastic_scale = model.scale_fast * b_elastic / V;
    const double bath_rate = model.scale_bath * model.heat_rate;

    const int channels = R + 2 + 2 * J;
    const int kElastic = R;
    const int kBath = R + 1;
    const int kInput = R + 2;
    const int kOutput = R + 2 + J;

    const auto grid = [&] {
        if (!opts.base.grid.empty()) {
            for (std::size_t i = 1; i < opts.base.grid.size(); ++i)
                if (opts.base.grid[i] < opts.base.grid[i - 1])
                    throw DomainError("sample grid must be ascending");
            return opts.base.grid;
        }
        return sample_grid(init.time, opts.base.t_end, opts.base.samples);
    }();

    ParticleRunResult result;
    result.counts.seed = opts.base.seed;
    for (const auto& sp : model.species) result.counts.value_names.push_back(sp.name);
    result.counts.channel_names = particle_channel_names(model);
    result.attempts.assign(static_cast<std::size_t>(channels), 0);
    result.successes.assign(static_cast<std::size_t>(channels), 0);

    std::vector<double> tallies(static_cast<std::size_t>(channels), 0.0);
    Rng rng(opts.base.seed);
    double time = init.time;

    std::size_t gi = 0;
    std::size_t si = 0;
    auto record_through = [&](double horizon) {
        while (gi < grid.size() && grid[gi] < horizon) {
            result.counts.times.push_back(grid[gi]);
            std::vector<double> row(static_cast<std::size_t>(J));
            for (int j = 0; j < J; ++j)
                row[static_cast<std::size_t>(j)] = static_cast<double>(store.count_of_type(j));
            result.counts.values.push_back(std::move(row));
            result.counts.event_counts.push_back(tallies);
            ++gi;
        }
        while (si < opts.snapshot_times.size() && opts.snapshot_times[si] < horizon) {
            result.snapshots.push_back(store.capture(opts.snapshot_times[si]));
            ++si;
        }
    };

    ssa::CountState counts;
    std::uint64_t events = 0;
    for (;;) {
        if (events >= opts.base.max_events) {
            if (opts.base.on_budget == ssa::OnBudget::Throw)
                throw EventBudgetExceeded("event budget " + std::to_string(opts.base.max_events) +
                                          " exhausted at t = " + format_double(time));
            break;
        }

        counts.counts.assign(static_cast<std::size_t>(J), 0);
        for (int j = 0; j < J; ++j) counts.counts[static_cast<std::size_t>(j)] = store.count_of_type(j);
        const auto lam_ssa = ssa::propensities(counts, model);

        const double n_alive = static_cast<double>(store.alive_count());
        const double lam_elastic = elastic_scale * 0.5 * n_alive * (n_alive - 1.0);
        const double lam_bath = bath_rate * n_alive;

        double total = lam_elastic + lam_bath;
        for (double l : lam_ssa) total += l;
        if (!(total > 0.0)) break;

        const double wait = rng.exponential(total);
        const double t_next = time + wait;
        if (t_next > opts.base.t_end) break;

        // Channel scan in the documented order: reactions, elastic, bath,
        // inputs, outputs.
        const double target = rng.uniform() * total;
        int channel = -1;
        double acc = 0.0;
        for (int r = 0; r < R && channel < 0; ++r) {
            acc += lam_ssa[static_cast<std::size_t>(r)];
            if (target < acc) channel = r;
        }
        if (channel < 0) {
            acc += lam_elastic;
            if (target < acc) channel = kElastic;
        }
        if (channel < 0) {
            acc += lam_bath;
            if (target < acc) channel = kBath;
        }
        for (int j = 0; j < J && channel < 0; ++j) {
            acc += lam_ssa[static_cast<std::size_t>(R + j)];
            if (target < acc) channel = kInput + j;
        }
        for (int j = 0; j < J && channel < 0; ++j) {
            acc += lam_ssa[static_cast<std::size_t>(R + J + j)];
            if (target < acc) channel = kOutput + j;
        }
        if (channel < 0) channel = channels - 1;

        record_through(t_next);
        ++events;
        ++result.attempts[static_cast<std::size_t>(channel)];
        bool success = true;

        if (channel < R) {
            const auto& plan = plans[static_cast<std::size_t>(channel)];
            std::uint32_t s1, s2 = 0;
            double pool = plan.chem_drop;
            if (plan.subs.size() == 1) {
                s1 = store.pick_of_type(plan.subs[0], rng);
                pool += store.kinetic(s1);
            } else if (plan.subs[0] == plan.subs[1]) {
                std::tie(s1, s2) = store.pick_pair_of_type(plan.subs[0], rng);
                pool += store.kinetic(s1) + store.kinetic(s2);
            } else {
                s1 = store.pick_of_type(plan.subs[0], rng);
                s2 = store.pick_of_type(plan.subs[1], rng);
                pool += store.kinetic(s1) + store.kinetic(s2);
            }
            if (pool < 0.0) {
                success = false;  // energy gate: attempt thinned away
            } else {
                const auto split = draw_split(pool, static_cast<int>(plan.prods.size()),
                                              plan.split, rng);
                store.retype(s1, plan.prods[0], split[0]);
                if (plan.prods.size() == 2) {
                    if (plan.subs.size() == 2)
                        store.retype(s2, plan.prods[1], split[1]);
                    else
                        store.add(plan.prods[1], split[1]);
                } else if (plan.subs.size() == 2) {
                    store.remove(s2);
                }
            }
        } else if (channel == kElastic) {
            const auto [p1, p2] = store.pick_pair_any(rng);
            const double pool = store.kinetic(p1) + store.kinetic(p2);
            const double first = rng.beta(1.5, 1.5) * pool;
            store.set_kinetic(p1, first);
            store.set_kinetic(p2, pool - first);
        } else if (channel == kBath) {
            const std::uint32_t p = store.pick_any(rng);
            const double pool = store.kinetic(p) + rng.gamma(1.5, model.beta);
            store.set_kinetic(p, rng.beta(1.5, 1.5) * pool);
        } else if (channel < kOutput) {
            const int j = channel - kInput;
            store.add(j, rng.gamma(1.5, model.beta));
        } else {
            const int j = channel - kOutput;
            store.remove(store.pick_of_type(j, rng));
        }

        time = t_next;
        if (success) {
            ++result.successes[static_cast<std::size_t>(channel)];
            tallies[static_cast<std::size_t>(channel)] += 1.0;
        }
    }

    record_through(std::numeric_limits<double>::infinity());
    result.final_state = store.capture(time);
    return result;
}

EnergyHistogram empirical_energy_distribution(const ParticleState& state, int bins) {
    if (state.kinetic.empty())
        throw DomainError("empirical_energy_distribution: no particles");
    if (bins < 1) throw DomainError("empirical_energy_distribution: need at least one bin");

    EnergyHistogram hist;
    double hi = 0.0;
    double mean = 0.0;
    for (double k : state.kinetic) {
        hi = std::max(hi, k);
        mean += k;
    }
    mean /= static_cast<double>(state.kinetic.size());
    hist.beta_hat = mean > 0.0 ? 1.5 / mean : std::numeric_limits<double>::infinity();

    if (hi <= 0.0) hi = 1.0;
    hist.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        hist.edges[static_cast<std::size_t>(b)] = hi * static_cast<double>(b) / bins;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double k : state.kinetic) {
        auto b = static_cast<std::size_t>(k / hi * bins);
        if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
        ++hist.counts[b];
    }
    return hist;
}

double bath_ks_distance(std::span<const double> kinetic, double beta) {
    if (kinetic.empty()) throw DomainError("bath_ks_distance: empty sample");
    std::vector<double> sorted(kinetic.begin(), kinetic.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = bath_cdf(sorted[i], beta);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

void write_energy_csv(std::ostream& out, const ParticleState& state, const NetworkModel& model) {
    out << "time,particle_type,kinetic_energy\n";
    for (std::size_t i = 0; i < state.types.size(); ++i)
        out << format_double(state.time) << ','
            << model.species[static_cast<std::size_t>(state.types[i])].name << ','
            << format_double(state.kinetic[i]) << '\n';
}

void write_histogram_csv(std::ostream& out, const EnergyHistogram& hist) {
    out << "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        out << format_double(hist.edges[b]) << ',' << format_double(hist.edges[b + 1]) << ','
            << hist.counts[b] << '\n';
}

}  // namespace okin::energy
