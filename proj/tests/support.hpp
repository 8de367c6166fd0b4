#pragma once

// Shared helpers for the unit and acceptance suites: small model builders,
// sample-moment utilities, and an adaptive Simpson integrator used as an
// independent numerical oracle for the closed-form tail expressions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "okin/flux.hpp"
#include "okin/model.hpp"

namespace testsupport {

inline okin::SpeciesSpec species(std::string name, double mass, double chem_energy,
                                 std::vector<long> atoms) {
    okin::SpeciesSpec s;
    s.name = std::move(name);
    s.mass = mass;
    s.chem_energy = chem_energy;
    s.atoms = std::move(atoms);
    return s;
}

inline okin::ReactionSpec reaction(std::vector<int> stoich, double rate_const,
                                   okin::ReactionKind kind = okin::ReactionKind::Slow) {
    okin::ReactionSpec r;
    r.stoich = std::move(stoich);
    r.rate_const = rate_const;
    r.kind = kind;
    return r;
}

// Two-species closed conversion loop A <-> B with unit masses and one shared
// atom type; the workhorse fixture for engine and thermodynamics tests.
inline okin::NetworkModel two_state_model(double v_ab, double v_ba, double c_a0, double c_b0,
                                          double volume, double k_a = 0.0, double k_b = 0.0) {
    okin::NetworkModel m;
    m.species = {species("A", 1.0, k_a, {1}), species("B", 1.0, k_b, {1})};
    m.reactions = {reaction({-1, 1}, v_ab), reaction({1, -1}, v_ba)};
    m.io.resize(2);
    m.initial = {c_a0, c_b0};
    m.volume = volume;
    return m;
}

// General closed unary conversion system from a dense rate matrix v[j][k]
// (entry = rate constant of j -> k; diagonal ignored).
inline okin::NetworkModel chain_model(const std::vector<std::vector<double>>& v,
                                      const std::vector<double>& initial,
                                      const std::vector<double>& chem_energy, double volume,
                                      double beta = 1.0) {
    const int n = static_cast<int>(v.size());
    okin::NetworkModel m;
    for (int j = 0; j < n; ++j)
        m.species.push_back(species("S" + std::to_string(j), 1.0, chem_energy[j], {1}));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k || v[j][k] == 0.0) continue;
            std::vector<int> stoich(n, 0);
            stoich[j] = -1;
            stoich[k] = 1;
            m.reactions.push_back(reaction(std::move(stoich), v[j][k]));
        }
    m.io.resize(n);
    m.initial = initial;
    m.volume = volume;
    m.beta = beta;
    return m;
}

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Adaptive Simpson quadrature with absolute tolerance `tol`; the recursion
// depth bound keeps pathological integrands from spinning.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace testsupport
