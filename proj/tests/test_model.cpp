#include <string>

#include "doctest.h"
#include "okin/errors.hpp"
#include "okin/flux.hpp"
#include "okin/model.hpp"
#include "support.hpp"

using okin::FluxForm;
using okin::FluxFunction;
using okin::NetworkModel;

TEST_CASE("flux forms evaluate as declared") {
    CHECK(FluxFunction::zero()(3.0) == 0.0);
    CHECK(FluxFunction::constant(2.5)(7.0) == 2.5);
    CHECK(FluxFunction::linear(0.5)(4.0) == 2.0);
    const auto poly = FluxFunction::polynomial({1.0, 2.0, 3.0});  // 1 + 2c + 3c^2
    CHECK(poly(2.0) == doctest::Approx(17.0));
    CHECK(poly(0.0) == 1.0);

    CHECK(FluxFunction::zero().is_zero());
    CHECK(FluxFunction::constant(0.0).is_zero());
    CHECK_FALSE(FluxFunction::constant(1.0).is_zero());
    CHECK(FluxFunction::constant(1.0).is_constant());
    CHECK_FALSE(FluxFunction::linear(1.0).is_constant());

    const auto scaled = FluxFunction::linear(2.0).scaled(0.25);
    CHECK(scaled(3.0) == doctest::Approx(1.5));
}

TEST_CASE("flux form names round-trip and reject unknowns") {
    for (auto form : {FluxForm::Zero, FluxForm::Constant, FluxForm::Linear, FluxForm::Polynomial})
        CHECK(okin::flux_form_from_string(okin::to_string(form)) == form);
    CHECK_THROWS_AS(okin::flux_form_from_string("cubic"), okin::SchemaError);
}

TEST_CASE("validate_flux pins parameter counts and signs") {
    CHECK_NOTHROW(okin::validate_flux(FluxFunction::constant(1.0), "x"));
    CHECK_THROWS_AS(okin::validate_flux({FluxForm::Constant, {}}, "x"), okin::ValidationError);
    CHECK_THROWS_AS(okin::validate_flux({FluxForm::Constant, {1.0, 2.0}}, "x"),
                    okin::ValidationError);
    CHECK_THROWS_AS(okin::validate_flux({FluxForm::Linear, {-1.0}}, "x"), okin::ValidationError);
    CHECK_THROWS_AS(okin::validate_flux({FluxForm::Polynomial, {}}, "x"), okin::ValidationError);
    CHECK_THROWS_AS(okin::validate_flux({FluxForm::Zero, {0.0}}, "x"), okin::ValidationError);
}

TEST_CASE("substrates, products and order derive from stoichiometry") {
    okin::ReactionSpec rx;
    rx.stoich = {-2, 1, 1};
    CHECK(rx.substrates() == std::vector<int>{0, 0});
    CHECK(rx.products() == std::vector<int>{1, 2});
    CHECK(rx.order() == 2);

    rx.stoich = {-1, 1, 0};
    CHECK(rx.order() == 1);
}

static const char* kModelDoc = R"({
  "species": [
    {"name": "A", "mass": 1.0, "chem_energy": 0.0, "atoms": [1, 0]},
    {"name": "B", "mass": 2.0, "chem_energy": 0.5, "atoms": [1, 0]},
    {"name": "C", "mass": 3.0, "chem_energy": 0.0, "atoms": [2, 0]}
  ],
  "reactions": [
    {"stoich": {"A": -1, "B": 1}, "rate_const": 1.5},
    {"stoich": {"A": -1, "B": -1, "C": 1}, "rate_const": 0.25, "split_params": [1.5]},
    {"stoich": {}, "rate_const": 2.0, "kind": "fast_elastic"}
  ],
  "io": {
    "A": {"input": {"form": "constant", "params": [0.4]}},
    "B": {"output": {"form": "linear", "params": [0.1]}}
  },
  "initial": {"A": 1.0, "B": 0.5, "C": 0.25},
  "beta": 2.0,
  "volume": 50.0,
  "heat_rate": 0.5,
  "scale_fast": 3.0,
  "scale_bath": 4.0
})";

TEST_CASE("model documents parse into the declared structure") {
    const NetworkModel m = okin::parse_model(kModelDoc);
    REQUIRE(m.species_count() == 3);
    REQUIRE(m.reaction_count() == 3);
    CHECK(m.species[1].mass == 2.0);
    CHECK(m.species[1].chem_energy == 0.5);
    CHECK(m.species[2].atoms == std::vector<long>{2, 0});
    CHECK(m.species_index("C") == 2);
    CHECK(m.species_index("Z") == -1);
    CHECK(m.reactions[0].stoich == std::vector<int>{-1, 1, 0});
    CHECK(m.reactions[1].order() == 2);
    CHECK(m.reactions[2].kind == okin::ReactionKind::FastElastic);
    CHECK(m.io[0].input(2.0) == doctest::Approx(0.4));
    CHECK(m.io[1].output(2.0) == doctest::Approx(0.2));
    CHECK_FALSE(m.is_closed());
    CHECK(m.initial == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(m.beta == 2.0);
    CHECK(m.volume == 50.0);
    CHECK(m.heat_rate == 0.5);
    CHECK(m.scale_fast == 3.0);
    CHECK(m.scale_bath == 4.0);
}

TEST_CASE("serialization round-trips the parsed model exactly") {
    const NetworkModel m = okin::parse_model(kModelDoc);
    const NetworkModel again = okin::parse_model(okin::serialize_model(m));
    CHECK(again == m);
}

TEST_CASE("optional keys fall back to defaults") {
    const NetworkModel m = okin::parse_model(R"({"species": [{"name": "A"}]})");
    CHECK(m.species[0].mass == 1.0);
    CHECK(m.species[0].chem_energy == 0.0);
    CHECK(m.species[0].atoms.empty());
    CHECK(m.reactions.empty());
    CHECK(m.is_closed());
    CHECK(m.initial == std::vector<double>{0.0});
    CHECK(m.beta == 1.0);
    CHECK(m.volume == 1.0);
}

TEST_CASE("schema violations are rejected with SchemaError") {
    CHECK_THROWS_AS(okin::parse_model("not json"), okin::SchemaError);
    CHECK_THROWS_AS(okin::parse_model("[1,2]"), okin::SchemaError);
    CHECK_THROWS_AS(okin::parse_model(R"({"species": []})"), okin::SchemaError);
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A"}], "extra": 1})"),
                    okin::SchemaError);
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A", "colour": "red"}]})"),
                    okin::SchemaError);
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}], "reactions": [{"stoich": {"Z": -1}, "rate_const": 1}]})"),
        okin::SchemaError);
    CHECK_THROWS_AS(
        okin::parse_model(R"({"species": [{"name": "A"}], "io": {"Z": {}}})"),
        okin::SchemaError);
    CHECK_THROWS_AS(
        okin::parse_model(R"({"species": [{"name": "A"}], "initial": {"Z": 1.0}})"),
        okin::SchemaError);
    CHECK_THROWS_AS(
        okin::parse_model(R"({"species": [{"name": "A"}], "reactions": [{"rate_const": 1}]})"),
        okin::SchemaError);
}

TEST_CASE("semantic violations are rejected with ValidationError") {
    // Duplicate species name.
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A"}, {"name": "A"}]})"),
                    okin::ValidationError);
    // Non-positive mass.
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A", "mass": 0}]})"),
                    okin::ValidationError);
    // Negative atom count.
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A", "atoms": [-1]}]})"),
                    okin::ValidationError);
    // Mismatched atom vector lengths.
    CHECK_THROWS_AS(okin::parse_model(
                        R"({"species": [{"name": "A", "atoms": [1]}, {"name": "B", "atoms": []}]})"),
                    okin::ValidationError);
    // Atom imbalance in a reaction: A (1 atom) -> B (2 atoms).
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A", "atoms": [1]}, {"name": "B", "atoms": [2]}],
                "reactions": [{"stoich": {"A": -1, "B": 1}, "rate_const": 1}]})"),
        okin::ValidationError);
    // Order three is out of scope.
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}, {"name": "B"}],
                "reactions": [{"stoich": {"A": -3, "B": 3}, "rate_const": 1}]})"),
        okin::ValidationError);
    // No products.
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}],
                "reactions": [{"stoich": {"A": -1}, "rate_const": 1}]})"),
        okin::ValidationError);
    // Negative rate constant.
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}, {"name": "B"}],
                "reactions": [{"stoich": {"A": -1, "B": 1}, "rate_const": -1}]})"),
        okin::ValidationError);
    // Elastic channel must not move species.
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}, {"name": "B"}],
                "reactions": [{"stoich": {"A": -1, "B": 1}, "rate_const": 1,
                               "kind": "fast_elastic"}]})"),
        okin::ValidationError);
    // split_params must align with product count.
    CHECK_THROWS_AS(
        okin::parse_model(
            R"({"species": [{"name": "A"}, {"name": "B"}],
                "reactions": [{"stoich": {"A": -1, "B": 1}, "rate_const": 1,
                               "split_params": [1, 1]}]})"),
        okin::ValidationError);
    // Negative initial concentration.
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A"}], "initial": {"A": -1}})"),
                    okin::ValidationError);
    // Non-positive volume / beta.
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A"}], "volume": 0})"),
                    okin::ValidationError);
    CHECK_THROWS_AS(okin::parse_model(R"({"species": [{"name": "A"}], "beta": -2})"),
                    okin::ValidationError);
}

TEST_CASE("conservation matrix and atom totals") {
    const NetworkModel m = okin::parse_model(kModelDoc);
    const auto cm = okin::conservation_matrix(m);
    CHECK(cm.species == 3);
    CHECK(cm.atom_types == 2);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(2, 0) == 2);
    CHECK(cm.at(2, 1) == 0);

    const auto totals = okin::atom_totals(m, {1.0, 0.5, 0.25});
    REQUIRE(totals.size() == 2);
    CHECK(totals[0] == doctest::Approx(1.0 + 0.5 + 0.5));
    CHECK(totals[1] == 0.0);
    CHECK_THROWS_AS(okin::atom_totals(m, {1.0}), okin::DomainError);
}

TEST_CASE("error hierarchy reports its kind") {
    try {
        okin::parse_model("{}");
        FAIL("expected SchemaError");
    } catch (const okin::Error& e) {
        CHECK(std::string(e.kind()) == "SchemaError");
        CHECK(std::string(e.what()).find("species") != std::string::npos);
    }
    try {
        okin::parse_model(R"({"species": [{"name": "A", "mass": 0}]})");
        FAIL("expected ValidationError");
    } catch (const okin::Error& e) {
        CHECK(std::string(e.kind()) == "ValidationError");
    }
}
