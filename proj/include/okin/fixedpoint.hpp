#pragma once

// Fixed points of the concentration rate equations: a damped Newton solver
// with conservation-aware stability analysis, the two-species closed forms,
// the Michaelis-Menten quasi-steady-state law, and recurrence classification
// of constant-flux open systems.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "okin/model.hpp"

namespace okin::fixedpoint {

enum class Stability { Attracting, Unstable, Marginal };
std::string to_string(Stability s);

struct FixedPointResult {
    std::vector<double> c_star;
    double residual = 0.0;               // ||D(c*)||_inf
    double jacobian_eigen_real_max = 0.0;  // over the reduced Jacobian
    Stability stability = Stability::Marginal;
    int iterations = 0;
    int reduced_dim = 0;  // dimension Newton ran in after deflating conserved directions
};

struct SolveOptions {
    int max_iterations = 100;
    double tolerance = 1e-12;       // on ||D(c)||_inf
    double fd_step = 1e-6;          // central-difference scale, x max(1, |c|)
    double cond_limit = 1e14;       // DegenerateJacobianError beyond this at the solution
    int max_backtracks = 30;        // step halvings per iteration
    double floor = 1e-12;           // iterates projected to c >= floor
    double eigen_band = 1e-8;       // |max real part| <= band -> Marginal
};

// Damped Newton on a generic drift map.  `conserved` lists left null vectors
// a of the drift (a . D(c) = 0 identically); Newton runs on their orthogonal
// complement, which pins the conserved totals to the guess and removes the
// structurally singular directions from the stability analysis.
FixedPointResult solve_drift(
    const std::function<std::vector<double>(const std::vector<double>&)>& drift,
    const std::vector<double>& guess, const std::vector<std::vector<double>>& conserved,
    const SolveOptions& opts = {});

// Newton solve of the model's rate equations from a positive guess.  Atom
// directions whose species have either no external flux or constant fluxes
// with zero weighted net sum are detected as conserved and deflated, so
// closed systems (and constant-flux systems with balanced totals) are
// classified on the physically meaningful subspace instead of reporting the
// trivial zero eigenvalue.
FixedPointResult solve_fixed_point(const NetworkModel& model, const std::vector<double>& guess,
                                   const SolveOptions& opts = {});

// Conserved directions detected for a model (used by solve_fixed_point and
// the transport sweep); each entry is a species-space vector.
std::vector<std::vector<double>> conserved_directions(const NetworkModel& model);

enum class Example1FluxKind { Constant, Linear };

struct Example1Solution {
    double c1 = 0.0;
    double c2 = 0.0;
};

// Closed forms for the two-species conversion loop nu1: 1 -> 2, nu2: 2 -> 1
// with net external fluxes f_j (Constant kind: f(c) = f_j; Linear kind:
// f(c) = a_j c_j) and total concentration c_total:
//   Constant: c1 = (nu2 c - f2)/(nu1 + nu2), c2 = (nu1 c - f1)/(nu1 + nu2);
//   Linear:   requires a1, a2 of different signs with |a_j| < nu1 + nu2;
//             c1 = nu2 c/(nu1 + nu2 - a1), c2 = c - c1 (fixed-total reading).
// NoPositiveFixedPoint when the condition fails or a component is <= 0.
Example1Solution example1_closed_form(double nu1, double nu2, double c_total,
                                      Example1FluxKind kind, double p1, double p2);

struct QssResult {
    double c_es = 0.0;
    double product_rate = 0.0;
};

// Michaelis-Menten quasi-steady state at fixed substrate concentration:
//   a = (k_m1 + k2)/(k1 e_total), b = 1/e_total,
//   c_ES = c_S/(a + b c_S), product_rate = k2 c_ES.
QssResult mm_qss(double k1, double k_m1, double k2, double e_total, double c_s);

enum class Recurrence { Ergodic, NullRecurrent, Transient };
std::string to_string(Recurrence r);

// Sign rule for the two-species unary constant-flux walk: the total net flux
// sum_j (input_j - output_j) is negative -> Ergodic, positive -> Transient,
// within `tol` of zero -> NullRecurrent.  ModelKindError unless the model is
// a two-species unary conversion system with constant fluxes.
Recurrence classify_recurrence(const NetworkModel& model, double tol = 1e-12);

struct DriftCheckResult {
    double measured = 0.0;    // mean (n_total(t) - n_total(0)) / t over replicates
    double predicted = 0.0;   // (sum_j f_j) * V
    double std_error = 0.0;   // standard error of the measured mean
    int replicates = 0;
};

// Monte-Carlo check of the total-count drift against the constant-flux
// prediction; replicate k is seeded with Rng::derive(seed, k).
DriftCheckResult empirical_drift_check(const NetworkModel& model, double t, int n_rep,
                                       std::uint64_t seed, int jobs = 1);

}  // namespace okin::fixedpoint
