#include "okin/thermo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <queue>

#include "okin/errors.hpp"

namespace okin::thermo {

namespace {
constexpr double kTwoPi = 6.2831853071795864769;
}

double thermal_lambda(const SpeciesSpec& species, double beta) {
    if (!(beta > 0.0)) throw DomainError("thermal_lambda: beta must be positive");
    if (!(species.mass > 0.0)) throw DomainError("thermal_lambda: mass must be positive");
    return std::pow(kTwoPi / (beta * species.mass), 1.5);
}

double chemical_potential(double c, const SpeciesSpec& species, double beta) {
    if (!(c > 0.0)) throw DomainError("chemical_potential: concentration must be positive");
    return (std::log(c) - std::log(thermal_lambda(species, beta))) / beta + species.chem_energy;
}

double gibbs_density(const std::vector<double>& c, const NetworkModel& model) {
    if (c.size() != model.species.size())
        throw DomainError("gibbs_density: vector must align with species");
    double g = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        g += c[j] * chemical_potential(c[j], model.species[j], model.beta);
    return g;
}

namespace {

// Strong connectivity of the positive-rate digraph by forward and backward
// reachability from state 0.
bool strongly_connected(const std::vector<std::vector<double>>& v) {
    const std::size_t n = v.size();
    auto reach = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::queue<std::size_t> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
            const std::size_t a = q.front();
            q.pop();
            for (std::size_t b = 0; b < n; ++b) {
                const double rate = forward ? v[a][b] : v[b][a];
                if (a != b && rate > 0.0 && !seen[b]) {
                    seen[b] = 1;
                    q.push(b);
                }
            }
        }
        for (char s : seen)
            if (!s) return false;
        return true;
    };
    return reach(true) && reach(false);
}

}  // namespace

std::vector<std::vector<double>> unary_rates(const NetworkModel& model) {
    const auto J = static_cast<std::size_t>(model.species_count());
    std::vector<std::vector<double>> v(J, std::vector<double>(J, 0.0));
    for (const auto& rx : model.reactions) {
        if (rx.kind != ReactionKind::Slow) continue;
        const auto subs = rx.substrates();
        const auto prods = rx.products();
        if (subs.size() != 1 || prods.size() != 1)
            throw ModelKindError("unary_rates needs one-substrate/one-product conversions only");
        v[static_cast<std::size_t>(subs[0])][static_cast<std::size_t>(prods[0])] += rx.rate_const;
    }
    return v;
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& v) {
    const std::size_t n = v.size();
    if (n == 0) throw DomainError("stationary_distribution: empty rate matrix");
    for (const auto& row : v) {
        if (row.size() != n) throw DomainError("stationary_distribution: matrix must be square");
        for (double r : row)
            if (!std::isfinite(r)) throw DomainError("stationary_distribution: non-finite rate");
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && v[a][b] < 0.0)
                throw DomainError("stationary_distribution: negative rate");
    if (n == 1) return {1.0};
    if (!strongly_connected(v))
        throw ReducibleChain("rate matrix is not a single communicating class");

    // pi Q = 0 with the last balance equation replaced by normalisation:
    // solve (Q^T with last row of ones) pi = e_last.
    Eigen::MatrixXd m(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        double out = 0.0;
        for (std::size_t b = 0; b < n; ++b)
            if (b != a) out += v[a][b];
        for (std::size_t b = 0; b < n; ++b)
            m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) =
                (a == b) ? -out : v[a][b];
    }
    for (std::size_t a = 0; a < n; ++a)
        m(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(a)) = 1.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    rhs(static_cast<Eigen::Index>(n - 1)) = 1.0;
    const Eigen::VectorXd pi = m.colPivHouseholderQr().solve(rhs);

    std::vector<double> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        out[a] = pi(static_cast<Eigen::Index>(a));
        if (!(out[a] > 0.0))
            throw ReducibleChain("stationary solve produced a non-positive probability");
    }
    return out;
}

namespace {

double relative_entropy(std::span<const double> p, std::span<const double> q,
                        const char* what) {
    if (p.size() != q.size()) throw DomainError(std::string(what) + ": size mismatch");
    if (p.empty()) throw DomainError(std::string(what) + ": empty distribution");
    double sp = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] < 0.0 || q[j] < 0.0) throw DomainError(std::string(what) + ": negative entry");
        if (p[j] > 0.0 && q[j] == 0.0)
            throw DomainError(std::string(what) + ": reference vanishes where p > 0");
        sp += p[j];
        sq += q[j];
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw DomainError(std::string(what) + ": inputs must be probability vectors");
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) s += p[j] * std::log(p[j] / q[j]);
    return s;
}

}  // namespace

double markov_entropy(std::span<const double> p, std::span<const double> pi) {
    return relative_entropy(p, pi, "markov_entropy");
}

double boltzmann_entropy(std::span<const double> p, std::span<const double> p0) {
    return -relative_entropy(p, p0, "boltzmann_entropy");
}

CompatibilityResult compatibility_check(const NetworkModel& model,
                                        const std::vector<double>& c_e, double tol) {
    if (c_e.size() != model.species.size())
        throw DomainError("compatibility_check: vector must align with species");
    CompatibilityResult result;
    result.mu.reserve(c_e.size());
    for (std::size_t j = 0; j < c_e.size(); ++j)
        result.mu.push_back(chemical_potential(c_e[j], model.species[j], model.beta));
    double mean = 0.0;
    for (double m : result.mu) mean += m;
    mean /= static_cast<double>(result.mu.size());
    result.residuals.reserve(result.mu.size());
    for (double m : result.mu) result.residuals.push_back(m - mean);
    for (double m : result.mu)
        for (double k : result.mu) result.max_gap = std::max(result.max_gap, std::abs(m - k));
    result.compatible = result.max_gap <= tol;
    return result;
}

ThermoReport monitor(const Trajectory& trajectory, const NetworkModel& model,
                     const std::vector<double>& c_e, double tol) {
    const std::size_t J = model.species.size();
    if (trajectory.value_names.size() != J)
        throw DomainError("monitor: trajectory must carry one column per species");
    if (c_e.size() != J) throw DomainError("monitor: stationary vector must align with species");

    double ce_tot = 0.0;
    for (double c : c_e) {
        if (!(c > 0.0)) throw DomainError("monitor: stationary concentrations must be positive");
        ce_tot += c;
    }
    std::vector<double> pi(J);
    for (std::size_t j = 0; j < J; ++j) pi[j] = c_e[j] / ce_tot;

    // Common equilibrium potential: the mean over species (all equal when c_e
    // is compatible).
    double mu_e = 0.0;
    for (std::size_t j = 0; j < J; ++j)
        mu_e += chemical_potential(c_e[j], model.species[j], model.beta);
    mu_e /= static_cast<double>(J);

    ThermoReport report;
    report.times = trajectory.times;
    std::vector<double> p(J);
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        const auto& c = trajectory.values[i];
        double c_tot = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            if (!(c[j] > 0.0))
                throw DomainError("monitor: non-positive concentration at t = " +
                                  format_double(trajectory.times[i]));
            c_tot += c[j];
        }
        std::vector<double> mu(J);
        double g = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            mu[j] = chemical_potential(c[j], model.species[j], model.beta);
            g += c[j] * mu[j];
            p[j] = c[j] / c_tot;
        }
        const double s_m = markov_entropy(p, pi);
        report.mu.push_back(std::move(mu));
        report.g.push_back(g);
        report.S_M.push_back(s_m);
        report.identity_residual.push_back(g - mu_e * c_tot - c_tot / model.beta * s_m);
    }

    for (std::size_t i = 1; i < report.times.size(); ++i) {
        if (report.g[i] > report.g[i - 1] + tol)
            report.violations.push_back({report.times[i - 1], report.times[i], "g",
                                         report.g[i] - report.g[i - 1]});
        if (report.S_M[i] > report.S_M[i - 1] + tol)
            report.violations.push_back({report.times[i - 1], report.times[i], "S_M",
                                         report.S_M[i] - report.S_M[i - 1]});
    }
    return report;
}

void write_thermo_csv(std::ostream& out, const ThermoReport& report, const NetworkModel& model) {
    out << "time,g,S_M";
    for (const auto& sp : model.species) out << ",mu_" << sp.name;
    out << '\n';
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        out << format_double(report.times[i]) << ',' << format_double(report.g[i]) << ','
            << format_double(report.S_M[i]);
        for (double m : report.mu[i]) out << ',' << format_double(m);
        out << '\n';
    }
}

void write_violations_csv(std::ostream& out, const ThermoReport& report) {
    out << "t_from,t_to,quantity,increase\n";
    for (const auto& v : report.violations)
        out << format_double(v.t_from) << ',' << format_double(v.t_to) << ',' << v.quantity
            << ',' << format_double(v.increase) << '\n';
}

}  // namespace okin::thermo
