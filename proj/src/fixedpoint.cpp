#include "okin/fixedpoint.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "okin/errors.hpp"
#include "okin/meanfield.hpp"
#include "okin/rng.hpp"
#include "okin/ssa.hpp"
#include "okin/trajectory.hpp"

namespace okin::fixedpoint {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::Attracting: return "attracting";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "marginal";
}

std::string to_string(Recurrence r) {
    switch (r) {
        case Recurrence::Ergodic: return "ergodic";
        case Recurrence::NullRecurrent: return "null_recurrent";
        case Recurrence::Transient: return "transient";
    }
    return "null_recurrent";
}

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> clamped(std::vector<double> c, double floor) {
    for (auto& x : c) x = std::max(x, floor);
    return c;
}

}  // namespace

FixedPointResult solve_drift(
    const std::function<std::vector<double>(const std::vector<double>&)>& drift,
    const std::vector<double>& guess, const std::vector<std::vector<double>>& conserved,
    const SolveOptions& opts) {
    const auto n = static_cast<Eigen::Index>(guess.size());
    if (n == 0) throw DomainError("solve_drift: empty guess");
    for (double g : guess)
        if (!(g > 0.0)) throw DomainError("solve_drift: guess must be positive");

    // Orthonormal basis of the complement of the conserved directions; Newton
    // moves only inside it, so conserved totals stay pinned to the guess.
    Eigen::MatrixXd basis;
    if (conserved.empty()) {
        basis = Eigen::MatrixXd::Identity(n, n);
    } else {
        Eigen::MatrixXd at(static_cast<Eigen::Index>(conserved.size()), n);
        for (std::size_t q = 0; q < conserved.size(); ++q) {
            if (conserved[q].size() != guess.size())
                throw DomainError("solve_drift: conserved direction of wrong dimension");
            for (Eigen::Index j = 0; j < n; ++j)
                at(static_cast<Eigen::Index>(q), j) = conserved[q][static_cast<std::size_t>(j)];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(at, Eigen::ComputeFullV);
        svd.setThreshold(1e-12);
        const Eigen::Index rank = svd.rank();
        basis = svd.matrixV().rightCols(n - rank);
    }
    const Eigen::Index d = basis.cols();

    auto eval = [&](const std::vector<double>& c) { return drift(c); };

    std::vector<double> c = clamped(guess, opts.floor);
    std::vector<double> r_full = eval(c);
    double res = inf_norm(r_full);

    FixedPointResult result;
    result.reduced_dim = static_cast<int>(d);

    auto reduced_jacobian = [&](const std::vector<double>& at_c) {
        double scale = 0.0;
        for (double x : at_c) scale = std::max(scale, std::abs(x));
        const double h = opts.fd_step * std::max(1.0, scale);
        Eigen::MatrixXd jac(d, d);
        std::vector<double> cp(at_c.size()), cm(at_c.size());
        for (Eigen::Index i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < at_c.size(); ++j) {
                const double dir = basis(static_cast<Eigen::Index>(j), i);
                cp[j] = std::max(at_c[j] + h * dir, opts.floor);
                cm[j] = std::max(at_c[j] - h * dir, opts.floor);
            }
            const auto fp = eval(cp);
            const auto fm = eval(cm);
            for (Eigen::Index k = 0; k < d; ++k) {
                double num = 0.0;
                for (std::size_t j = 0; j < at_c.size(); ++j)
                    num += basis(static_cast<Eigen::Index>(j), k) * (fp[j] - fm[j]);
                jac(k, i) = num / (2.0 * h);
            }
        }
        return jac;
    };

    int it = 0;
    while (res > opts.tolerance) {
        if (it >= opts.max_iterations || d == 0)
            throw NoConvergence("no fixed point within " + std::to_string(it) +
                                " iterations; best residual " + format_double(res));
        ++it;

        const Eigen::MatrixXd jac = reduced_jacobian(c);
        Eigen::VectorXd r(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            double num = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j)
                num += basis(static_cast<Eigen::Index>(j), k) * r_full[j];
            r(k) = num;
        }
        const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);

        // Damping: halve until the full residual norm decreases.
        double lambda = 1.0;
        bool accepted = false;
        for (int b = 0; b <= opts.max_backtracks; ++b) {
            std::vector<double> trial = c;
            for (std::size_t j = 0; j < trial.size(); ++j) {
                double move = 0.0;
                for (Eigen::Index k = 0; k < d; ++k)
                    move += basis(static_cast<Eigen::Index>(j), k) * step(k);
                trial[j] = std::max(trial[j] + lambda * move, opts.floor);
            }
            const auto r_trial = eval(trial);
            const double res_trial = inf_norm(r_trial);
            if (res_trial < res) {
                c = std::move(trial);
                r_full = r_trial;
                res = res_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw NoConvergence("Newton stalled after " + std::to_string(it) +
                                " iterations; best residual " + format_double(res));
    }

    result.c_star = c;
    result.residual = res;
    result.iterations = it;

    if (d == 0) {
        // Fully constrained system: the guess itself is stationary.
        result.jacobian_eigen_real_max = 0.0;
        result.stability = Stability::Marginal;
        return result;
    }

    const Eigen::MatrixXd jac = reduced_jacobian(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(d - 1);
    if (!(smin > 0.0) || smax / smin > opts.cond_limit)
        throw DegenerateJacobianError(
            "Jacobian at the fixed point is numerically singular (condition " +
            format_double(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) +
            "): the fixed-point set is likely a continuum");

    const Eigen::EigenSolver<Eigen::MatrixXd> eig(jac);
    double max_real = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d; ++k)
        max_real = std::max(max_real, eig.eigenvalues()(k).real());
    result.jacobian_eigen_real_max = max_real;
    if (max_real < -opts.eigen_band)
        result.stability = Stability::Attracting;
    else if (max_real > opts.eigen_band)
        result.stability = Stability::Unstable;
    else
        result.stability = Stability::Marginal;
    return result;
}

namespace {

// An atom direction is structurally conserved when every species carrying it
// has at most constant external fluxes and the weighted net constant flux
// cancels exactly.
bool atom_type_conserved(const NetworkModel& model, int q) {
    double net = 0.0;
    bool any = false;
    for (int j = 0; j < model.species_count(); ++j) {
        const long a = model.species[static_cast<std::size_t>(j)].atoms[static_cast<std::size_t>(q)];
        if (a == 0) continue;
        any = true;
        const auto& ch = model.io[static_cast<std::size_t>(j)];
        if (!ch.input.is_constant() || !ch.output.is_constant()) return false;
        net += static_cast<double>(a) *
               (ch.input.constant_value() - ch.output.constant_value());
    }
    return any && net == 0.0;
}

}  // namespace

std::vector<std::vector<double>> conserved_directions(const NetworkModel& model) {
    std::vector<std::vector<double>> dirs;
    const int Q = model.atom_type_count();
    for (int q = 0; q < Q; ++q) {
        if (!atom_type_conserved(model, q)) continue;
        std::vector<double> dir(model.species.size());
        for (int j = 0; j < model.species_count(); ++j)
            dir[static_cast<std::size_t>(j)] = static_cast<double>(
                model.species[static_cast<std::size_t>(j)].atoms[static_cast<std::size_t>(q)]);
        dirs.push_back(std::move(dir));
    }
    return dirs;
}

FixedPointResult solve_fixed_point(const NetworkModel& model, const std::vector<double>& guess,
                                   const SolveOptions& opts) {
    if (guess.size() != model.species.size())
        throw DomainError("solve_fixed_point: guess must align with species");
    auto drift_fn = [&model](const std::vector<double>& c) {
        return meanfield::drift(model, c);
    };
    return solve_drift(drift_fn, guess, conserved_directions(model), opts);
}

Example1Solution example1_closed_form(double nu1, double nu2, double c_total,
                                      Example1FluxKind kind, double p1, double p2) {
    if (!(nu1 > 0.0) || !(nu2 > 0.0)) throw DomainError("example1: rates must be positive");
    if (!(c_total > 0.0)) throw DomainError("example1: total concentration must be positive");

    Example1Solution sol;
    if (kind == Example1FluxKind::Constant) {
        sol.c1 = (nu2 * c_total - p2) / (nu1 + nu2);
        sol.c2 = (nu1 * c_total - p1) / (nu1 + nu2);
    } else {
        // Linear net fluxes f_j(c) = a_j c_j: the coefficients must have
        // different signs and magnitude below nu1 + nu2.
        if (!(p1 * p2 < 0.0) || std::abs(p1) >= nu1 + nu2 || std::abs(p2) >= nu1 + nu2)
            throw NoPositiveFixedPoint(
                "linear fluxes need coefficients of different signs with |a| < nu1 + nu2");
        sol.c1 = nu2 * c_total / (nu1 + nu2 - p1);
        sol.c2 = c_total - sol.c1;
    }
    if (!(sol.c1 > 0.0) || !(sol.c2 > 0.0))
        throw NoPositiveFixedPoint("closed form has a non-positive component");
    return sol;
}

QssResult mm_qss(double k1, double k_m1, double k2, double e_total, double c_s) {
    if (!(k1 > 0.0) || !(k_m1 > 0.0) || !(k2 > 0.0))
        throw DomainError("mm_qss: rate constants must be positive");
    if (!(e_total > 0.0)) throw DomainError("mm_qss: enzyme total must be positive");
    if (c_s < 0.0) throw DomainError("mm_qss: substrate concentration must be non-negative");
    const double a = (k_m1 + k2) / (k1 * e_total);
    const double b = 1.0 / e_total;
    QssResult out;
    out.c_es = c_s == 0.0 ? 0.0 : c_s / (a + b * c_s);
    out.product_rate = k2 * out.c_es;
    return out;
}

Recurrence classify_recurrence(const NetworkModel& model, double tol) {
    if (model.species_count() != 2)
        throw ModelKindError("recurrence classification covers two-species systems only");
    for (const auto& rx : model.reactions) {
        if (rx.kind != ReactionKind::Slow) continue;
        if (rx.order() != 1 || rx.products().size() != 1)
            throw ModelKindError("recurrence classification needs unary conversions only");
    }
    double total = 0.0;
    for (const auto& ch : model.io) {
        if (!ch.input.is_constant() || !ch.output.is_constant())
            throw ModelKindError("recurrence classification needs constant fluxes");
        total += ch.input.constant_value() - ch.output.constant_value();
    }
    if (total < -tol) return Recurrence::Ergodic;
    if (total > tol) return Recurrence::Transient;
    return Recurrence::NullRecurrent;
}

DriftCheckResult empirical_drift_check(const NetworkModel& model, double t, int n_rep,
                                       std::uint64_t seed, int jobs) {
    if (!(t > 0.0)) throw DomainError("empirical_drift_check: t must be positive");
    if (n_rep < 1) throw DomainError("empirical_drift_check: need at least one replicate");
    double predicted = 0.0;
    for (const auto& ch : model.io) {
        if (!ch.input.is_constant() || !ch.output.is_constant())
            throw ModelKindError("empirical_drift_check needs constant fluxes");
        predicted += ch.input.constant_value() - ch.output.constant_value();
    }
    predicted *= model.volume;

    const auto init = ssa::counts_from_concentrations(model);
    double n0 = 0.0;
    for (auto n : init.counts) n0 += static_cast<double>(n);

    ssa::SimulateOptions base;
    base.t_end = t;
    base.grid = {t};

    std::vector<double> drifts(static_cast<std::size_t>(n_rep));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_rep) return;
            try {
                ssa::SimulateOptions o = base;
                o.seed = Rng::derive(seed, static_cast<std::uint64_t>(k));
                const auto traj = ssa::simulate(model, init, o);
                double nt = 0.0;
                for (double v : traj.values.back()) nt += v;
                drifts[static_cast<std::size_t>(k)] = (nt - n0) / t;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    DriftCheckResult result;
    result.replicates = n_rep;
    result.predicted = predicted;
    for (double dft : drifts) result.measured += dft;
    result.measured /= static_cast<double>(n_rep);
    if (n_rep > 1) {
        double var = 0.0;
        for (double dft : drifts) var += (dft - result.measured) * (dft - result.measured);
        var /= static_cast<double>(n_rep - 1);
        result.std_error = std::sqrt(var / static_cast<double>(n_rep));
    }
    return result;
}

}  // namespace okin::fixedpoint
