#include <cmath>
#include <vector>

#include "doctest.h"
#include "okin/errors.hpp"
#include "okin/fixedpoint.hpp"
#include "okin/meanfield.hpp"
#include "okin/model.hpp"
#include "support.hpp"

using namespace okin;
using fixedpoint::Example1FluxKind;
using fixedpoint::Recurrence;
using fixedpoint::Stability;
using testsupport::reaction;
using testsupport::species;

namespace {

// The two-species conversion loop with constant net fluxes (+f1, +f2):
// positive f enters as input, negative as output.
NetworkModel loop_with_constant_flux(double nu1, double nu2, double f1, double f2,
                                     double c10, double c20, double volume = 1.0) {
    auto m = testsupport::two_state_model(nu1, nu2, c10, c20, volume);
    if (f1 >= 0.0)
        m.io[0].input = FluxFunction::constant(f1);
    else
        m.io[0].output = FluxFunction::constant(-f1);
    if (f2 >= 0.0)
        m.io[1].input = FluxFunction::constant(f2);
    else
        m.io[1].output = FluxFunction::constant(-f2);
    return m;
}

}  // namespace

TEST_CASE("enum names") {
    CHECK(fixedpoint::to_string(Stability::Attracting) == "attracting");
    CHECK(fixedpoint::to_string(Stability::Unstable) == "unstable");
    CHECK(fixedpoint::to_string(Stability::Marginal) == "marginal");
    CHECK(fixedpoint::to_string(Recurrence::Ergodic) == "ergodic");
    CHECK(fixedpoint::to_string(Recurrence::NullRecurrent) == "null_recurrent");
    CHECK(fixedpoint::to_string(Recurrence::Transient) == "transient");
}

TEST_CASE("constant-flux closed form") {
    const auto sol =
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Constant, 0.5, -0.5);
    CHECK(sol.c1 == doctest::Approx(13.0 / 6.0).epsilon(1e-13));
    CHECK(sol.c2 == doctest::Approx(5.0 / 6.0).epsilon(1e-13));

    // The closed form is a genuine root of the rate equations.
    const auto m = loop_with_constant_flux(1.0, 2.0, 0.5, -0.5, 2.0, 1.0);
    const auto d = meanfield::drift(m, {sol.c1, sol.c2});
    CHECK(std::abs(d[0]) < 1e-14);
    CHECK(std::abs(d[1]) < 1e-14);

    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Constant, 0.5, 7.0),
        NoPositiveFixedPoint);
    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(0.0, 2.0, 3.0, Example1FluxKind::Constant, 0.0, 0.0),
        DomainError);
}

TEST_CASE("linear-flux closed form and its existence conditions") {
    const auto sol =
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Linear, -0.5, 0.5);
    CHECK(sol.c1 == doctest::Approx(12.0 / 7.0).epsilon(1e-13));
    CHECK(sol.c2 == doctest::Approx(9.0 / 7.0).epsilon(1e-13));

    // Coefficients of one sign are rejected.
    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Linear, 0.5, 0.5),
        NoPositiveFixedPoint);
    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Linear, -0.5, -0.5),
        NoPositiveFixedPoint);
    // |a| must stay below nu1 + nu2.
    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Linear, -3.5, 0.5),
        NoPositiveFixedPoint);
    // Formula produces a non-positive component.
    CHECK_THROWS_AS(
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Linear, 2.5, -0.5),
        NoPositiveFixedPoint);
}

TEST_CASE("solve_drift finds attracting and unstable scalar roots") {
    fixedpoint::SolveOptions opts;

    const auto stable = fixedpoint::solve_drift(
        [](const std::vector<double>& c) { return std::vector<double>{1.0 - c[0] * c[0]}; },
        {0.4}, {}, opts);
    CHECK(stable.c_star[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(stable.residual <= opts.tolerance);
    CHECK(stable.jacobian_eigen_real_max == doctest::Approx(-2.0).epsilon(1e-5));
    CHECK(stable.stability == Stability::Attracting);
    CHECK(stable.reduced_dim == 1);

    const auto unstable = fixedpoint::solve_drift(
        [](const std::vector<double>& c) { return std::vector<double>{c[0] * c[0] - 1.0}; },
        {0.4}, {}, opts);
    CHECK(unstable.c_star[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(unstable.stability == Stability::Unstable);
}

TEST_CASE("a rotation field is classified as marginal") {
    const auto res = fixedpoint::solve_drift(
        [](const std::vector<double>& c) {
            return std::vector<double>{c[1] - 1.0, -(c[0] - 1.0)};
        },
        {1.2, 0.7}, {});
    CHECK(res.c_star[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.c_star[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.stability == Stability::Marginal);  // eigenvalues are +-i
}

TEST_CASE("solve_drift rejects non-positive guesses") {
    auto id = [](const std::vector<double>& c) { return std::vector<double>{-c[0]}; };
    CHECK_THROWS_AS(fixedpoint::solve_drift(id, {0.0}, {}), DomainError);
    CHECK_THROWS_AS(fixedpoint::solve_drift(id, {}, {}), DomainError);
}

TEST_CASE("conserved directions come from atom types with balanced io") {
    // Closed loop: the single atom type is conserved.
    auto closed = testsupport::two_state_model(1.0, 2.0, 1.0, 1.0, 1.0);
    auto dirs = fixedpoint::conserved_directions(closed);
    REQUIRE(dirs.size() == 1);
    CHECK(dirs[0] == std::vector<double>{1.0, 1.0});

    // Different atom weights appear in the direction.
    NetworkModel pair;
    pair.species = {species("A", 1.0, 0.0, {1}), species("B", 1.0, 0.0, {2})};
    pair.reactions = {reaction({-2, 1}, 1.0)};
    pair.io.resize(2);
    pair.initial = {1.0, 0.0};
    dirs = fixedpoint::conserved_directions(pair);
    REQUIRE(dirs.size() == 1);
    CHECK(dirs[0] == std::vector<double>{1.0, 2.0});

    // Balanced constant fluxes keep the direction ...
    auto balanced = loop_with_constant_flux(1.0, 2.0, 0.5, -0.5, 1.0, 1.0);
    CHECK(fixedpoint::conserved_directions(balanced).size() == 1);
    // ... an unbalanced constant flux or a linear flux loses it.
    auto unbalanced = loop_with_constant_flux(1.0, 2.0, 0.5, -0.25, 1.0, 1.0);
    CHECK(fixedpoint::conserved_directions(unbalanced).empty());
    auto linear = testsupport::two_state_model(1.0, 2.0, 1.0, 1.0, 1.0);
    linear.io[0].output = FluxFunction::linear(1.0);
    CHECK(fixedpoint::conserved_directions(linear).empty());
}

TEST_CASE("the model solver reproduces the constant-flux closed form") {
    const auto m = loop_with_constant_flux(1.0, 2.0, 0.5, -0.5, 2.0, 1.0);
    const auto sol =
        fixedpoint::example1_closed_form(1.0, 2.0, 3.0, Example1FluxKind::Constant, 0.5, -0.5);

    // Guess with the same conserved total (2 + 1 = 3).
    const auto fp = fixedpoint::solve_fixed_point(m, {2.0, 1.0});
    REQUIRE(fp.c_star.size() == 2);
    CHECK(std::abs(fp.c_star[0] - sol.c1) < 1e-10);
    CHECK(std::abs(fp.c_star[1] - sol.c2) < 1e-10);
    CHECK(fp.reduced_dim == 1);  // one conserved direction deflated
    CHECK(fp.stability == Stability::Attracting);
    CHECK(fp.jacobian_eigen_real_max == doctest::Approx(-3.0).epsilon(1e-5));
    CHECK(fp.residual < 1e-12);
}

TEST_CASE("a continuum of fixed points is flagged as degenerate") {
    // Linear io with a1 = -1, a2 = +1 makes every point of the ray c1 = c2
    // stationary; the Jacobian there is singular.
    auto m = testsupport::two_state_model(1.0, 2.0, 1.0, 1.0, 1.0);
    m.io[0].output = FluxFunction::linear(1.0);
    m.io[1].input = FluxFunction::linear(1.0);
    CHECK_THROWS_AS(fixedpoint::solve_fixed_point(m, {1.5, 1.5}),
                    DegenerateJacobianError);
}

TEST_CASE("a strictly growing system has no fixed point") {
    const auto m = loop_with_constant_flux(1.0, 2.0, 0.5, 0.25, 1.0, 1.0);
    CHECK_THROWS_AS(fixedpoint::solve_fixed_point(m, {1.0, 1.0}), NoConvergence);
}

TEST_CASE("quasi-steady-state enzyme kinetics") {
    const auto qss = fixedpoint::mm_qss(1.0, 1.0, 0.1, 1.0, 2.0);
    CHECK(qss.c_es == doctest::Approx(0.645161).epsilon(1e-6));
    CHECK(qss.product_rate == doctest::Approx(0.0645161).epsilon(1e-6));
    CHECK(fixedpoint::mm_qss(1.0, 1.0, 0.1, 1.0, 0.0).c_es == 0.0);

    // Saturation: c_ES -> e_total as substrate grows.
    CHECK(fixedpoint::mm_qss(1.0, 1.0, 0.1, 2.0, 1e9).c_es == doctest::Approx(2.0).epsilon(1e-6));

    CHECK_THROWS_AS(fixedpoint::mm_qss(0.0, 1.0, 0.1, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(fixedpoint::mm_qss(1.0, 1.0, 0.1, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(fixedpoint::mm_qss(1.0, 1.0, 0.1, 1.0, -1.0), DomainError);
}

TEST_CASE("recurrence classification follows the sign of the net flux") {
    CHECK(fixedpoint::classify_recurrence(
              loop_with_constant_flux(1.0, 1.0, 0.1, -0.4, 1.0, 1.0)) == Recurrence::Ergodic);
    CHECK(fixedpoint::classify_recurrence(
              loop_with_constant_flux(1.0, 1.0, 0.5, -0.5, 1.0, 1.0)) ==
          Recurrence::NullRecurrent);
    CHECK(fixedpoint::classify_recurrence(
              loop_with_constant_flux(1.0, 1.0, 0.5, -0.2, 1.0, 1.0)) == Recurrence::Transient);
    // Tiny imbalances inside the tolerance band count as null recurrent.
    CHECK(fixedpoint::classify_recurrence(
              loop_with_constant_flux(1.0, 1.0, 0.5, -0.5 + 1e-13, 1.0, 1.0)) ==
          Recurrence::NullRecurrent);
}

TEST_CASE("recurrence classification rejects other model shapes") {
    NetworkModel three;
    three.species = {species("A", 1.0, 0.0, {1}), species("B", 1.0, 0.0, {1}),
                     species("C", 1.0, 0.0, {1})};
    three.io.resize(3);
    three.initial = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(fixedpoint::classify_recurrence(three), ModelKindError);

    NetworkModel pair;
    pair.species = {species("A", 1.0, 0.0, {1}), species("B", 1.0, 0.0, {2})};
    pair.reactions = {reaction({-2, 1}, 1.0)};
    pair.io.resize(2);
    pair.initial = {1.0, 0.0};
    CHECK_THROWS_AS(fixedpoint::classify_recurrence(pair), ModelKindError);

    auto linear = testsupport::two_state_model(1.0, 1.0, 1.0, 1.0, 1.0);
    linear.io[0].input = FluxFunction::linear(0.5);
    CHECK_THROWS_AS(fixedpoint::classify_recurrence(linear), ModelKindError);
}

TEST_CASE("the measured total-count drift matches the constant-flux prediction") {
    const auto m = loop_with_constant_flux(1.0, 1.0, 0.5, -0.3, 1.0, 1.0, 200.0);
    const auto got = fixedpoint::empirical_drift_check(m, 2.0, 24, 11, 2);
    CHECK(got.predicted == doctest::Approx(0.2 * 200.0).epsilon(1e-12));
    CHECK(got.replicates == 24);
    CHECK(got.std_error > 0.0);
    CHECK(std::abs(got.measured - got.predicted) < 0.1 * got.predicted);

    // Deterministic in the seed and independent of the job count.
    const auto again = fixedpoint::empirical_drift_check(m, 2.0, 24, 11, 1);
    CHECK(again.measured == got.measured);
    CHECK(again.std_error == got.std_error);

    CHECK_THROWS_AS(fixedpoint::empirical_drift_check(m, 0.0, 4, 1), DomainError);
    auto bad = testsupport::two_state_model(1.0, 1.0, 1.0, 1.0, 1.0);
    bad.io[0].input = FluxFunction::linear(1.0);
    CHECK_THROWS_AS(fixedpoint::empirical_drift_check(bad, 1.0, 4, 1), ModelKindError);
}
