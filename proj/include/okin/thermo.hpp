#pragma once

// Thermodynamic diagnostics: chemical potentials, Gibbs free energy density,
// stationary laws of conversion chains, relative entropies, compatibility of
// stationary concentrations with a common chemical potential, and
// monotonicity monitoring along concentration trajectories.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "okin/model.hpp"
#include "okin/trajectory.hpp"

namespace okin::thermo {

// Thermal wavelength factor lambda_j = beta^(-3/2) (2 pi / m_j)^(3/2); the
// per-particle translational partition weight in three dimensions.
double thermal_lambda(const SpeciesSpec& species, double beta);

// mu_j(c) = -beta^(-1) ln lambda_j + beta^(-1) ln c + K_j.  DomainError for
// c <= 0.
double chemical_potential(double c, const SpeciesSpec& species, double beta);

// Gibbs free energy density g(c) = sum_j c_j mu_j(c_j); c > 0 componentwise.
double gibbs_density(const std::vector<double>& c, const NetworkModel& model);

// Conversion-rate matrix v[j][k] summing the model's own constants of every
// unary j -> k reaction; ModelKindError unless all slow reactions are
// one-substrate/one-product conversions.  (Energy-renormalised variants come
// from the energy module's effective rates.)
std::vector<std::vector<double>> unary_rates(const NetworkModel& model);

// Stationary probabilities of the conversion chain with rate matrix
// v[j][k] (j -> k, off-diagonal, >= 0): solves pi Q = 0, sum pi = 1 by dense
// linear algebra.  ReducibleChain unless the positive-rate graph is strongly
// connected.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& v);

// Relative entropy S_M = sum_j p_j ln(p_j / pi_j), with 0 ln 0 = 0; >= 0.
double markov_entropy(std::span<const double> p, std::span<const double> pi);

// S_H = -sum_j p_j ln(p_j / p0_j) = -markov_entropy(p, p0); <= 0.
double boltzmann_entropy(std::span<const double> p, std::span<const double> p0);

struct CompatibilityResult {
    bool compatible = false;          // max pairwise potential gap <= tolerance
    std::vector<double> mu;           // mu_j at the stationary concentrations
    std::vector<double> residuals;    // mu_j minus the mean potential
    double max_gap = 0.0;             // max pairwise |mu_j - mu_k|
};

// Checks whether stationary concentrations c_e equalize all chemical
// potentials (the defining property of a detailed-balance-compatible
// equilibrium).
CompatibilityResult compatibility_check(const NetworkModel& model,
                                        const std::vector<double>& c_e, double tol = 1e-9);

struct MonotoneViolation {
    double t_from = 0.0;
    double t_to = 0.0;
    std::string quantity;  // "g" or "S_M"
    double increase = 0.0;
};

struct ThermoReport {
    std::vector<double> times;
    std::vector<std::vector<double>> mu;      // [sample][species]
    std::vector<double> g;
    std::vector<double> S_M;
    std::vector<double> identity_residual;    // g - mu_e*c_tot - (c_tot/beta)*S_M
    std::vector<MonotoneViolation> violations;
};

// Evaluates mu, g and S_M (p_j = c_j/c_tot against pi_j = c_e,j/c_e,tot) at
// every sample of a concentration trajectory, records strict increases of g
// and S_M beyond `tol`, and reports the free-energy identity residual
//     g - mu_e c_tot - (c_tot / beta) S_M,
// where mu_e is the mean chemical potential at c_e (the common potential when
// c_e is compatible).  The residual vanishes for compatible closed systems;
// for incompatible or open models it is reported, not asserted.
ThermoReport monitor(const Trajectory& trajectory, const NetworkModel& model,
                     const std::vector<double>& c_e, double tol = 1e-9);

// CSV "time,g,S_M,mu_<species>..." (the identity residual stays in the
// report struct).
void write_thermo_csv(std::ostream& out, const ThermoReport& report,
                      const NetworkModel& model);
// CSV "t_from,t_to,quantity,increase".
void write_violations_csv(std::ostream& out, const ThermoReport& report);

}  // namespace okin::thermo
