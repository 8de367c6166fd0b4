#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "okin/energy.hpp"
#include "okin/errors.hpp"
#include "okin/model.hpp"
#include "okin/rng.hpp"
#include "support.hpp"

using namespace okin;
using testsupport::reaction;
using testsupport::species;

namespace {

// Independent tail oracle: adaptive Simpson quadrature of the bath density
// over [r, r + 45/beta); the remainder beyond the cut is below 1e-17.
double tail_by_quadrature(double r, double beta) {
    const double lo = std::max(r, 0.0);
    const double hi = lo + 45.0 / beta;
    return testsupport::integrate([beta](double x) { return energy::bath_density(x, beta); }, lo,
                                  hi, 1e-13);
}

// Independent two-particle tail oracle: condition on the first energy,
//   P(X1 + X2 > r) = tail(r) + integral_0^r g(x) tail(r - x) dx.
double sum2_by_quadrature(double r, double beta) {
    if (r <= 0.0) return 1.0;
    const double conv = testsupport::integrate(
        [r, beta](double x) {
            return energy::bath_density(x, beta) * energy::tail_gbeta(r - x, beta);
        },
        0.0, r, 1e-13);
    return conv + energy::tail_gbeta(r, beta);
}

}  // namespace

TEST_CASE("bath density integrates to the complementary cdf") {
    for (double beta : {0.5, 1.0, 2.0}) {
        CHECK(tail_by_quadrature(0.0, beta) == doctest::Approx(1.0).epsilon(1e-11));
        for (double x : {0.2, 1.0, 3.5}) {
            CHECK(energy::bath_cdf(x, beta) ==
                  doctest::Approx(1.0 - tail_by_quadrature(x, beta)).epsilon(1e-10));
        }
    }
    CHECK(energy::bath_density(-1.0, 1.0) == 0.0);
}

TEST_CASE("one-particle tail matches quadrature across the grid") {
    for (double beta : {0.5, 1.0, 2.0}) {
        for (int i = 1; i <= 10; ++i) {
            const double r = 0.5 * i;
            CHECK(std::abs(energy::tail_gbeta(r, beta) - tail_by_quadrature(r, beta)) < 1e-10);
        }
    }
    CHECK(energy::tail_gbeta(0.0, 1.0) == 1.0);
    CHECK(energy::tail_gbeta(-2.0, 1.0) == 1.0);
    CHECK_THROWS_AS(energy::tail_gbeta(1.0, 0.0), DomainError);
}

TEST_CASE("two-particle tail matches the convolution quadrature") {
    for (double beta : {0.5, 1.0, 2.0}) {
        for (int i = 1; i <= 10; ++i) {
            const double r = 0.5 * i;
            CHECK(std::abs(energy::tail_gbeta_sum2(r, beta) - sum2_by_quadrature(r, beta)) <
                  1e-10);
        }
    }
    CHECK(energy::tail_gbeta_sum2(-1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(energy::tail_gbeta_sum2(1.0, -1.0), DomainError);
}

TEST_CASE("tail values at unit gap are pinned") {
    CHECK(energy::tail_gbeta(1.0, 1.0) == doctest::Approx(0.57240670447).epsilon(1e-11));
    CHECK(energy::tail_gbeta_sum2(1.0, 1.0) == doctest::Approx(0.91969860293).epsilon(1e-11));
}

TEST_CASE("two-particle tail agrees with Monte-Carlo sampling") {
    Rng rng(31);
    const double beta = 1.0, r = 1.5;
    const int n = 400000;
    int over = 0;
    for (int i = 0; i < n; ++i)
        if (rng.gamma(1.5, beta) + rng.gamma(1.5, beta) > r) ++over;
    CHECK(std::abs(static_cast<double>(over) / n - energy::tail_gbeta_sum2(r, beta)) < 5e-3);
}

TEST_CASE("uphill reactions are thinned by the matching tail") {
    // A (K=0) <-> B (K=1): A->B is uphill by 1, B->A downhill.
    auto m = testsupport::two_state_model(2.0, 3.0, 0.5, 0.5, 100.0, 0.0, 1.0);
    CHECK(energy::chem_energy_drop(m.reactions[0], m) == doctest::Approx(-1.0));
    CHECK(energy::chem_energy_drop(m.reactions[1], m) == doctest::Approx(1.0));

    const double beta = 1.3;
    CHECK(energy::effective_rate_const(m.reactions[0], m, beta) ==
          doctest::Approx(2.0 * energy::tail_gbeta(1.0, beta)).epsilon(1e-14));
    CHECK(energy::effective_rate_const(m.reactions[1], m, beta) == 3.0);

    const auto eff = energy::with_effective_rates(m, beta);
    CHECK(eff.reactions[0].rate_const ==
          doctest::Approx(2.0 * energy::tail_gbeta(1.0, beta)).epsilon(1e-14));
    CHECK(eff.reactions[1].rate_const == 3.0);

    const auto v = energy::effective_unary_rates(m, beta);
    CHECK(v[0][1] == doctest::Approx(2.0 * energy::tail_gbeta(1.0, beta)).epsilon(1e-14));
    CHECK(v[1][0] == 3.0);
}

TEST_CASE("binary uphill reactions pool two bath energies") {
    NetworkModel m;
    m.species = {species("A", 1.0, 0.0, {1}), species("B", 1.0, 2.0, {2})};
    m.reactions = {reaction({-2, 1}, 4.0)};  // A + A -> B, uphill by 2
    m.io.resize(2);
    m.initial = {1.0, 0.0};
    m.volume = 10.0;
    CHECK(energy::effective_rate_const(m.reactions[0], m, 1.0) ==
          doctest::Approx(4.0 * energy::tail_gbeta_sum2(2.0, 1.0)).epsilon(1e-14));
    CHECK(energy::effective_binary_rates(m, 1.0)[0] ==
          doctest::Approx(4.0 * energy::tail_gbeta_sum2(2.0, 1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(energy::effective_unary_rates(m, 1.0), ModelKindError);

    auto unary = testsupport::two_state_model(1.0, 1.0, 1.0, 0.0, 10.0);
    CHECK_THROWS_AS(energy::effective_binary_rates(unary, 1.0), ModelKindError);
}

TEST_CASE("elastic channels keep their constant under the effective map") {
    auto m = testsupport::two_state_model(1.0, 1.0, 0.5, 0.5, 10.0, 0.0, 1.0);
    m.reactions.push_back(reaction({0, 0}, 7.0, ReactionKind::FastElastic));
    const auto eff = energy::with_effective_rates(m, 1.0);
    CHECK(eff.reactions[2].rate_const == 7.0);
}

TEST_CASE("draw_split partitions the pool") {
    Rng rng(11);
    const auto one = energy::draw_split(3.5, 1, {}, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 3.5);

    Rng probe(11);
    CHECK(rng.next_u64() == probe.next_u64());  // single product used no randomness

    for (int i = 0; i < 200; ++i) {
        const auto two = energy::draw_split(2.0, 2, {}, rng);
        REQUIRE(two.size() == 2);
        CHECK(two[0] >= 0.0);
        CHECK(two[1] >= 0.0);
        CHECK(two[0] + two[1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    const std::vector<double> w{5.0, 1.0};
    double first = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) first += energy::draw_split(1.0, 2, w, rng)[0];
    CHECK(first / n == doctest::Approx(5.0 / 6.0).epsilon(0.02));

    CHECK_THROWS_AS(energy::draw_split(1.0, 0, {}, rng), DomainError);
    CHECK_THROWS_AS(energy::draw_split(-1.0, 2, {}, rng), DomainError);
    CHECK_THROWS_AS(energy::draw_split(1.0, 2, std::vector<double>{1.0}, rng), DomainError);
}

TEST_CASE("thermal particles start at the bath law") {
    auto m = testsupport::two_state_model(1.0, 1.0, 0.6, 0.4, 5000.0);
    m.beta = 2.0;
    const auto st = energy::thermal_particles(m, 77);
    const auto counts = energy::type_counts(st, 2);
    CHECK(counts[0] == 3000);
    CHECK(counts[1] == 2000);
    CHECK(testsupport::mean(st.kinetic) == doctest::Approx(1.5 / 2.0).epsilon(0.03));
    CHECK(energy::bath_ks_distance(st.kinetic, 2.0) < 0.02);
}

TEST_CASE("particle channel layout") {
    auto m = testsupport::two_state_model(1.0, 1.0, 1.0, 0.0, 10.0);
    CHECK(energy::particle_channel_names(m) ==
          std::vector<std::string>{"r0", "r1", "elastic", "bath", "in_A", "in_B", "out_A",
                                   "out_B"});
}

TEST_CASE("closed elastic dynamics conserve the total energy exactly") {
    NetworkModel m;
    m.species = {species("A", 1.0, 0.0, {1})};
    m.io.resize(1);
    m.initial = {1.0};
    m.volume = 500.0;
    m.scale_fast = 3.0;  // no elastic channel declared: b_f defaults to 1

    const auto init = energy::thermal_particles(m, 5);
    const double e0 = energy::total_energy(init, m);

    energy::ParticleOptions opts;
    opts.base.t_end = 2.0;
    opts.base.samples = 5;
    opts.base.seed = 6;
    opts.base.max_events = 2'000'000;
    const auto run = energy::particle_simulate(m, init, opts);

    CHECK(run.attempts[0] > 1000);                            // elastic channel (R = 0)
    CHECK(run.successes[0] == run.attempts[0]);               // collisions never fail
    CHECK(std::abs(energy::total_energy(run.final_state, m) - e0) / e0 < 1e-9);
    CHECK(energy::type_counts(run.final_state, 1)[0] == 500);
}

TEST_CASE("the energy gate blocks reactions the pool cannot pay for") {
    // A (K=0) -> B (K=1) with every particle at zero kinetic energy: the pool
    // is -1 at each attempt, so nothing ever fires.
    auto m = testsupport::two_state_model(10.0, 0.0, 0.5, 0.0, 100.0, 0.0, 1.0);
    energy::ParticleState init;
    init.types.assign(50, 0);
    init.kinetic.assign(50, 0.0);

    energy::ParticleOptions opts;
    opts.base.t_end = 0.2;
    opts.base.samples = 3;
    opts.base.seed = 8;
    const auto run = energy::particle_simulate(m, init, opts);
    CHECK(run.attempts[0] > 10);
    CHECK(run.successes[0] == 0);
    CHECK(energy::type_counts(run.final_state, 2) == std::vector<std::int64_t>{50, 0});
    // Tallies only move on success.
    CHECK(run.counts.event_counts.back()[0] == 0.0);
}

TEST_CASE("downhill conversions always succeed and bank the released energy") {
    // B (K=1) -> A (K=0): drop +1; starting kinetic 0 gives product kinetic 1.
    auto m = testsupport::two_state_model(0.0, 5.0, 0.0, 0.5, 100.0, 0.0, 1.0);
    energy::ParticleState init;
    init.types.assign(50, 1);
    init.kinetic.assign(50, 0.0);
    const double e0 = energy::total_energy(init, m);  // 50 * K_B

    energy::ParticleOptions opts;
    opts.base.t_end = 50.0;
    opts.base.samples = 3;
    opts.base.seed = 9;
    const auto run = energy::particle_simulate(m, init, opts);
    CHECK(run.attempts[1] == 50);
    CHECK(run.successes[1] == 50);
    const auto counts = energy::type_counts(run.final_state, 2);
    CHECK(counts == std::vector<std::int64_t>{50, 0});
    for (double k : run.final_state.kinetic) CHECK(k == 1.0);
    CHECK(energy::total_energy(run.final_state, m) == e0);
}

TEST_CASE("an uphill conversion fires once the pool covers the gap") {
    auto m = testsupport::two_state_model(1.0, 0.0, 0.01, 0.0, 100.0, 0.0, 1.0);
    energy::ParticleState init;
    init.types = {0};
    init.kinetic = {2.0};  // pool 2 - 1 = 1 >= 0

    energy::ParticleOptions opts;
    opts.base.t_end = 1000.0;
    opts.base.samples = 2;
    opts.base.seed = 10;
    const auto run = energy::particle_simulate(m, init, opts);
    CHECK(run.successes[0] == 1);
    CHECK(run.final_state.types == std::vector<int>{1});
    CHECK(run.final_state.kinetic[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bath contact drives the kinetic energies to the bath law") {
    NetworkModel m;
    m.species = {species("A", 1.0, 0.0, {1})};
    m.io.resize(1);
    m.initial = {1.0};
    m.volume = 2000.0;
    m.heat_rate = 1.0;
    m.scale_bath = 5.0;
    m.beta = 1.0;

    energy::ParticleState init;
    init.types.assign(2000, 0);
    init.kinetic.assign(2000, 4.0);  // far too hot: effective beta 0.375

    energy::ParticleOptions opts;
    opts.base.t_end = 3.0;
    opts.base.samples = 2;
    opts.base.seed = 12;
    opts.base.max_events = 1'000'000;
    const auto run = energy::particle_simulate(m, init, opts);
    CHECK(energy::bath_ks_distance(run.final_state.kinetic, 1.0) < 0.05);
    const auto hist = energy::empirical_energy_distribution(run.final_state, 30);
    CHECK(hist.beta_hat == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("injected particles carry bath-distributed energies") {
    NetworkModel m;
    m.species = {species("A", 1.0, 0.0, {1})};
    m.io.resize(1);
    m.io[0].input = FluxFunction::constant(5.0);
    m.initial = {0.0};
    m.volume = 100.0;
    m.beta = 2.0;

    energy::ParticleOptions opts;
    opts.base.t_end = 4.0;
    opts.base.samples = 2;
    opts.base.seed = 13;
    const auto run = energy::particle_simulate(m, {}, opts);
    REQUIRE(run.final_state.kinetic.size() > 1000);
    CHECK(testsupport::mean(run.final_state.kinetic) == doctest::Approx(0.75).epsilon(0.05));
    // With no reactions the channel order is elastic, bath, in_A, out_A.
    CHECK(static_cast<std::uint64_t>(run.final_state.types.size()) == run.successes[2]);
}

TEST_CASE("snapshots capture the state at the requested times") {
    NetworkModel m;
    m.species = {species("A", 1.0, 0.0, {1})};
    m.io.resize(1);
    m.initial = {1.0};
    m.volume = 100.0;
    m.scale_fast = 2.0;

    energy::ParticleOptions opts;
    opts.base.t_end = 1.0;
    opts.base.samples = 2;
    opts.base.seed = 14;
    opts.snapshot_times = {0.25, 0.75};
    const auto init = energy::thermal_particles(m, 3);
    const auto run = energy::particle_simulate(m, init, opts);
    REQUIRE(run.snapshots.size() == 2);
    CHECK(run.snapshots[0].time == 0.25);
    CHECK(run.snapshots[1].time == 0.75);
    CHECK(run.snapshots[0].types.size() == 100);
}

TEST_CASE("failed attempts still consume the event budget") {
    auto m = testsupport::two_state_model(10.0, 0.0, 0.5, 0.0, 100.0, 0.0, 1.0);
    energy::ParticleState init;
    init.types.assign(50, 0);
    init.kinetic.assign(50, 0.0);

    energy::ParticleOptions opts;
    opts.base.t_end = 1e9;
    opts.base.samples = 2;
    opts.base.seed = 15;
    opts.base.max_events = 7;
    opts.base.on_budget = ssa::OnBudget::Stop;
    const auto run = energy::particle_simulate(m, init, opts);
    std::uint64_t attempts = 0;
    for (auto a : run.attempts) attempts += a;
    CHECK(attempts == 7);
    CHECK(run.successes[0] == 0);

    opts.base.on_budget = ssa::OnBudget::Throw;
    CHECK_THROWS_AS(energy::particle_simulate(m, init, opts), EventBudgetExceeded);
}

TEST_CASE("energy histogram bookkeeping") {
    energy::ParticleState st;
    st.types = {0, 0, 0, 0};
    st.kinetic = {1.0, 2.0, 3.0, 6.0};
    const auto hist = energy::empirical_energy_distribution(st, 3);
    REQUIRE(hist.edges.size() == 4);
    CHECK(hist.edges.front() == 0.0);
    CHECK(hist.edges.back() == 6.0);
    std::uint64_t total = 0;
    for (auto c : hist.counts) total += c;
    CHECK(total == 4);
    CHECK(hist.beta_hat == doctest::Approx(1.5 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(energy::empirical_energy_distribution({}, 3), DomainError);
}

TEST_CASE("KS distance separates the right and wrong bath temperatures") {
    Rng rng(16);
    std::vector<double> sample(20000);
    for (auto& x : sample) x = rng.gamma(1.5, 1.3);
    CHECK(energy::bath_ks_distance(sample, 1.3) < 0.02);
    CHECK(energy::bath_ks_distance(sample, 0.4) > 0.2);
    CHECK_THROWS_AS(energy::bath_ks_distance({}, 1.0), DomainError);
}
