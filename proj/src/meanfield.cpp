#include "okin/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "okin/compartments.hpp"
#include "okin/errors.hpp"

namespace okin::meanfield {

namespace {

// Drift with stage inputs clamped at zero: RK4 stages may overshoot slightly
// below zero even when the solution stays non-negative.
void drift_into(const NetworkModel& model, const std::vector<double>& c,
                std::vector<double>& out) {
    const int J = model.species_count();
    out.assign(static_cast<std::size_t>(J), 0.0);
    for (const auto& rx : model.reactions) {
        if (rx.kind != ReactionKind::Slow) continue;
        double rate = rx.rate_const;
        for (int j = 0; j < J; ++j) {
            const int nu = rx.stoich[static_cast<std::size_t>(j)];
            for (int k = 0; k < -nu; ++k) rate *= std::max(c[static_cast<std::size_t>(j)], 0.0);
        }
        for (int j = 0; j < J; ++j) {
            const int nu = rx.stoich[static_cast<std::size_t>(j)];
            if (nu != 0) out[static_cast<std::size_t>(j)] += nu * rate;
        }
    }
    for (int j = 0; j < J; ++j) {
        const double cj = std::max(c[static_cast<std::size_t>(j)], 0.0);
        const auto& ch = model.io[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(j)] += ch.input(cj) - ch.output(cj);
    }
}

}  // namespace

std::vector<double> drift(const NetworkModel& model, const std::vector<double>& c) {
    if (c.size() != model.species.size())
        throw DomainError("drift: concentration vector must align with species");
    for (double cj : c)
        if (cj < 0.0) throw NegativeConcentrationError("drift: negative concentration");
    std::vector<double> out;
    drift_into(model, c, out);
    return out;
}

namespace {

// Shared RK4 driver for the plain ODE and the stacked DDE system.  `rhs`
// fills the derivative for a stage at (t, y); `commit` is called after every
// accepted step.
template <typename Rhs>
std::size_t rk4_march(std::vector<double>& y, double t0, double horizon,
                      const std::vector<double>& stops, double dt, double blowup_norm,
                      Rhs&& rhs, const std::function<void(double)>& on_sample) {
    std::size_t clips = 0;
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    double t = t0;
    std::size_t si = 0;
    // Report samples that coincide with the start.
    while (si < stops.size() && stops[si] <= t) {
        on_sample(stops[si]);
        ++si;
    }
    while (t < horizon - 1e-15 * std::max(1.0, std::abs(horizon))) {
        double target = horizon;
        if (si < stops.size()) target = std::min(target, stops[si]);
        const double h = std::min(dt, target - t);

        rhs(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (y[i] < 0.0) {
                y[i] = 0.0;
                ++clips;
            }
            if (!std::isfinite(y[i]) || std::abs(y[i]) > blowup_norm)
                throw BlowupError("integration diverged at t = " + format_double(t + h));
        }
        t += h;

        while (si < stops.size() && stops[si] <= t + 1e-12 * std::max(1.0, std::abs(t))) {
            on_sample(stops[si]);
            ++si;
        }
    }
    while (si < stops.size()) {
        on_sample(stops[si]);
        ++si;
    }
    return clips;
}

}  // namespace

OdeResult integrate_ode(const NetworkModel& model, const std::vector<double>& c0,
                        const OdeOptions& opts) {
    if (c0.size() != model.species.size())
        throw DomainError("integrate_ode: initial state must align with species");
    for (double c : c0)
        if (c < 0.0 || !std::isfinite(c))
            throw NegativeConcentrationError("integrate_ode: invalid initial concentration");
    if (!(opts.dt > 0.0)) throw DomainError("integrate_ode: dt must be positive");
    if (!(opts.t_end >= 0.0)) throw DomainError("integrate_ode: t_end must be non-negative");

    const auto grid = opts.grid.empty() ? sample_grid(0.0, opts.t_end, opts.samples) : opts.grid;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] < grid[i - 1]) throw DomainError("sample grid must be ascending");

    OdeResult result;
    for (const auto& sp : model.species) result.trajectory.value_names.push_back(sp.name);

    std::vector<double> y = c0;
    const double horizon = std::max(opts.t_end, grid.empty() ? 0.0 : grid.back());
    result.negative_clips = rk4_march(
        y, 0.0, horizon, grid, opts.dt, opts.blowup_norm,
        [&](double, const std::vector<double>& state, std::vector<double>& out) {
            drift_into(model, state, out);
        },
        [&](double ts) {
            result.trajectory.times.push_back(ts);
            result.trajectory.values.push_back(y);
        });
    return result;
}

// ---------------------------------------------------------------------------
// Constant-delay network integration (method of steps)
// ---------------------------------------------------------------------------

namespace {

// Piecewise cubic Hermite record of the integration so far.
struct HistoryTable {
    std::vector<double> t;
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> f;

    double lookup(double tq, std::size_t comp, const std::vector<double>& pre_start) const {
        if (tq <= t.front()) return pre_start[comp];
        // Find the segment [k, k+1] with t_k <= tq <= t_{k+1}.
        const auto it = std::lower_bound(t.begin(), t.end(), tq);
        std::size_t hi = static_cast<std::size_t>(it - t.begin());
        if (hi >= t.size()) hi = t.size() - 1;
        if (t[hi] == tq) return y[hi][comp];
        const std::size_t lo = hi - 1;
        const double h = t[hi] - t[lo];
        const double s = (tq - t[lo]) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        const double h10 = s3 - 2.0 * s2 + s;
        const double h01 = -2.0 * s3 + 3.0 * s2;
        const double h11 = s3 - s2;
        return h00 * y[lo][comp] + h10 * h * f[lo][comp] + h01 * y[hi][comp] +
               h11 * h * f[hi][comp];
    }
};

}  // namespace

DdeResult integrate_dde(const net::CompartmentNetwork& network,
                        const std::vector<std::vector<double>>& history,
                        const OdeOptions& opts) {
    network.validate();
    const int A = network.compartment_count();
    const int J = network.base().species_count();
    if (static_cast<int>(history.size()) != A)
        throw HistoryMissing("one pre-start concentration vector per compartment required");
    for (const auto& h : history) {
        if (static_cast<int>(h.size()) != J)
            throw HistoryMissing("history vectors must align with species");
        for (double c : h)
            if (c < 0.0 || !std::isfinite(c))
                throw NegativeConcentrationError("invalid history concentration");
    }
    if (!(opts.dt > 0.0)) throw DomainError("integrate_dde: dt must be positive");

    double min_delay = std::numeric_limits<double>::infinity();
    for (const auto& e : network.edges) {
        if (!e.delay.is_constant())
            throw NonConstantDelay("mean-field network needs constant delays");
        if (e.delay.p1 > 0.0) min_delay = std::min(min_delay, e.delay.p1);
    }
    if (opts.dt > min_delay)
        throw StepSizeError("dt must not exceed the smallest positive delay " +
                            format_double(min_delay));

    const auto grid = opts.grid.empty() ? sample_grid(0.0, opts.t_end, opts.samples) : opts.grid;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] < grid[i - 1]) throw DomainError("sample grid must be ascending");

    const std::size_t n = static_cast<std::size_t>(A) * static_cast<std::size_t>(J);
    std::vector<double> pre_start(n);
    std::vector<double> y(n);
    for (int a = 0; a < A; ++a)
        for (int j = 0; j < J; ++j) {
            pre_start[static_cast<std::size_t>(a * J + j)] =
                history[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(a * J + j)] =
                history[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
        }

    HistoryTable table;
    std::vector<double> block(static_cast<std::size_t>(J));
    std::vector<double> block_out;

    // Stacked drift: per-compartment kinetics plus transport exchange.
    // Outflow depends on the current stage state; inflow on the source state
    // one delay ago (stage state for zero delays), scaled by the volume ratio
    // so that particle counts, not concentrations, are what travels.
    auto rhs = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
        out.assign(n, 0.0);
        for (int a = 0; a < A; ++a) {
            const auto& m = network.compartments[static_cast<std::size_t>(a)];
            for (int j = 0; j < J; ++j)
                block[static_cast<std::size_t>(j)] = state[static_cast<std::size_t>(a * J + j)];
            drift_into(m, block, block_out);
            for (int j = 0; j < J; ++j)
                out[static_cast<std::size_t>(a * J + j)] = block_out[static_cast<std::size_t>(j)];
        }
        for (const auto& e : network.edges) {
            const std::size_t src = static_cast<std::size_t>(e.from * J + e.species);
            const std::size_t dst = static_cast<std::size_t>(e.to * J + e.species);
            const double c_now = std::max(state[src], 0.0);
            out[src] -= e.rate(c_now);
            const double c_then =
                e.delay.p1 == 0.0
                    ? c_now
                    : std::max(table.lookup(t - e.delay.p1, src, pre_start), 0.0);
            const double ratio = network.compartments[static_cast<std::size_t>(e.from)].volume /
                                 network.compartments[static_cast<std::size_t>(e.to)].volume;
            out[dst] += e.rate(c_then) * ratio;
        }
    };

    table.t.push_back(0.0);
    table.y.push_back(y);
    {
        std::vector<double> f0;
        rhs(0.0, y, f0);
        table.f.push_back(std::move(f0));
    }

    DdeResult result;
    result.per_compartment.resize(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a)
        for (const auto& sp : network.base().species)
            result.per_compartment[static_cast<std::size_t>(a)].value_names.push_back(sp.name);

    const double horizon = std::max(opts.t_end, grid.empty() ? 0.0 : grid.back());
    std::size_t clips = 0;
    {
        const std::size_t nn = n;
        std::vector<double> k1(nn), k2(nn), k3(nn), k4(nn), tmp(nn);
        double t = 0.0;
        std::size_t si = 0;
        auto sample_now = [&](double ts) {
            for (int a = 0; a < A; ++a) {
                auto& traj = result.per_compartment[static_cast<std::size_t>(a)];
                traj.times.push_back(ts);
                std::vector<double> row(static_cast<std::size_t>(J));
                for (int j = 0; j < J; ++j)
                    row[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(a * J + j)];
                traj.values.push_back(std::move(row));
            }
        };
        while (si < grid.size() && grid[si] <= t) {
            sample_now(grid[si]);
            ++si;
        }
        while (t < horizon - 1e-15 * std::max(1.0, std::abs(horizon))) {
            double target = horizon;
            if (si < grid.size()) target = std::min(target, grid[si]);
            const double h = std::min(opts.dt, target - t);

            rhs(t, y, k1);
            for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            rhs(t + 0.5 * h, tmp, k2);
            for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            rhs(t + 0.5 * h, tmp, k3);
            for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + h * k3[i];
            rhs(t + h, tmp, k4);
            for (std::size_t i = 0; i < nn; ++i) {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if (y[i] < 0.0) {
                    y[i] = 0.0;
                    ++clips;
                }
                if (!std::isfinite(y[i]) || std::abs(y[i]) > opts.blowup_norm)
                    throw BlowupError("integration diverged at t = " + format_double(t + h));
            }
            t += h;
            table.t.push_back(t);
            table.y.push_back(y);
            {
                std::vector<double> ff;
                rhs(t, y, ff);
                table.f.push_back(std::move(ff));
            }
            while (si < grid.size() && grid[si] <= t + 1e-12 * std::max(1.0, std::abs(t))) {
                sample_now(grid[si]);
                ++si;
            }
        }
        while (si < grid.size()) {
            sample_now(grid[si]);
            ++si;
        }
    }
    result.negative_clips = clips;
    return result;
}

}  // namespace okin::meanfield
