#pragma once

// Reaction network model: species with masses, internal (chemical) energies
// and atomic composition; reaction channels of order one or two; optional
// input/output flux per species; thermodynamic and engine parameters.
//
// Rate constants follow the density scaling convention: a channel of order m
// (m substrate particles) with constant a_r fires with total intensity
// a_r * V^(1-m) * [number of ordered substrate tuples], so concentrations
// obey a V-independent rate equation in the large-volume limit.

#include <cstdint>
#include <string>
#include <vector>

#include "okin/flux.hpp"

namespace okin {

struct SpeciesSpec {
    std::string name;
    double mass = 1.0;             // m_j > 0
    double chem_energy = 0.0;      // K_j >= 0, internal energy per particle
    std::vector<long> atoms;       // composition a_{jq} >= 0, one entry per atom type

    bool operator==(const SpeciesSpec&) const = default;
};

enum class ReactionKind {
    Slow,         // reactive channel, energy-gated in the particle engine
    FastElastic,  // elastic kinetic-energy exchange; no species change
};

struct ReactionSpec {
    std::vector<int> stoich;           // nu_{jr}, one signed entry per species
    double rate_const = 0.0;           // a_r >= 0
    ReactionKind kind = ReactionKind::Slow;
    std::vector<double> split_params;  // Dirichlet weights for splitting released
                                       // energy over products; empty = symmetric

    // Species indices repeated with multiplicity, derived from stoich.
    std::vector<int> substrates() const;
    std::vector<int> products() const;
    int order() const;  // number of substrate particles (1 or 2 for Slow)

    bool operator==(const ReactionSpec&) const = default;
};

struct SpeciesIO {
    FluxFunction input;   // particles injected at rate input(c_j) * V
    FluxFunction output;  // particles removed at rate output(c_j) * V (0 when n_j = 0)

    bool is_zero() const { return input.is_zero() && output.is_zero(); }
    bool operator==(const SpeciesIO&) const = default;
};

struct NetworkModel {
    std::vector<SpeciesSpec> species;
    std::vector<ReactionSpec> reactions;
    std::vector<SpeciesIO> io;      // aligned with species
    std::vector<double> initial;    // initial concentrations, aligned with species
    double beta = 1.0;              // inverse temperature of the heat bath
    double volume = 1.0;            // V, particles per unit concentration
    double heat_rate = 0.0;         // h, per-particle bath contact rate
    double scale_fast = 0.0;        // s_f, speed factor of the elastic channel
    double scale_bath = 0.0;        // s_b, speed factor of the bath channel

    int species_count() const { return static_cast<int>(species.size()); }
    int reaction_count() const { return static_cast<int>(reactions.size()); }
    int atom_type_count() const {
        return species.empty() ? 0 : static_cast<int>(species.front().atoms.size());
    }

    // Index of a species by name, -1 if absent.
    int species_index(const std::string& name) const;

    bool is_closed() const;  // no input/output channel anywhere

    // Throws ValidationError (or SchemaError for structural defects) unless
    // every model invariant holds; called by the parser.
    void validate() const;

    bool operator==(const NetworkModel&) const = default;
};

// Atom composition matrix a_{jq} (species rows, atom-type columns) and the
// conserved totals it induces.
struct ConservationMatrix {
    int species = 0;
    int atom_types = 0;
    std::vector<long> entries;  // row-major, species * atom_types

    long at(int j, int q) const { return entries[static_cast<std::size_t>(j) * atom_types + q]; }
};

ConservationMatrix conservation_matrix(const NetworkModel& model);

// Atom totals sum_j a_{jq} x_j for a count or concentration vector x.
std::vector<double> atom_totals(const NetworkModel& model, const std::vector<double>& x);

// JSON document <-> model.  Parsing validates; unknown keys are rejected.
NetworkModel parse_model(const std::string& json_text);
NetworkModel parse_model_file(const std::string& path);
std::string serialize_model(const NetworkModel& model, int indent = 2);

}  // namespace okin
