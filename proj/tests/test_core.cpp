#include "dcga/core.hpp"
#include "dcga/problems.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dcga;

TEST_CASE("RandomStream: identical seeds give identical sequences")
{
    RandomStream a(1234), b(1234);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("RandomStream: derived streams are keyed, not sequential")
{
    RandomStream root(42);
    RandomStream c1 = root.derive(1);
    RandomStream c2 = root.derive(2);
    RandomStream c1_again = root.derive(1);
    REQUIRE(c1.next_u64() != c2.next_u64());
    REQUIRE(RandomStream(42).derive(1).next_u64() == c1_again.next_u64());
    // (run, role) order matters
    REQUIRE(root.derive(1, 2).next_u64() != root.derive(2, 1).next_u64());
}

TEST_CASE("RandomStream: uniform_index stays in range and covers values")
{
    RandomStream rng(7);
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.uniform_index(5);
        REQUIRE(v < 5);
        ++hits[v];
    }
    for (int h : hits) {
        REQUIRE(h > 800); // expectation 1000
    }
}

TEST_CASE("Genome: bit access and popcounts")
{
    Genome g(130);
    REQUIRE(g.count_ones() == 0);
    g.set_bit(0, true);
    g.set_bit(63, true);
    g.set_bit(64, true);
    g.set_bit(129, true);
    REQUIRE(g.bit(0));
    REQUIRE(g.bit(129));
    REQUIRE_FALSE(g.bit(1));
    REQUIRE(g.count_ones() == 4);
    REQUIRE(g.ones_in_range(0, 64) == 2);
    REQUIRE(g.ones_in_range(64, 66) == 2);
    REQUIRE(g.ones_in_range(63, 2) == 2);
    REQUIRE(g.ones_in_range(1, 62) == 0);
}

TEST_CASE("Genome: random genomes keep padding clean")
{
    RandomStream rng(3);
    for (std::size_t l : {1u, 63u, 64u, 65u, 100u}) {
        Genome g = Genome::random(l, rng);
        REQUIRE(g.count_ones() == g.ones_in_range(0, l));
        REQUIRE(g.count_ones() <= l);
    }
}

TEST_CASE("random_population: deterministic, unevaluated, correct shape")
{
    RandomStream a(99), b(99);
    Population p1 = random_population(4, 3, a);
    Population p2 = random_population(4, 3, b);
    REQUIRE(p1.size() == 4);
    REQUIRE(p1.genome_length() == 3);
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(p1.members[i].genome == p2.members[i].genome);
        REQUIRE_FALSE(p1.members[i].evaluated());
    }
}

TEST_CASE("random_population: allele frequency near one half")
{
    RandomStream rng(11);
    Population pop = random_population(10000, 1, rng);
    std::size_t ones = 0;
    for (const auto& ind : pop.members) {
        ones += ind.genome.count_ones();
    }
    const double frac = static_cast<double>(ones) / 10000.0;
    REQUIRE(frac > 0.45);
    REQUIRE(frac < 0.55);
}

TEST_CASE("random_population: rejects degenerate sizes")
{
    RandomStream rng(1);
    REQUIRE_THROWS_AS(random_population(0, 3, rng), config_error);
    REQUIRE_THROWS_AS(random_population(1, 3, rng), config_error);
    REQUIRE_THROWS_AS(random_population(4, 0, rng), config_error);
}

TEST_CASE("evaluate_population: sets fitness and phase; rejects length mismatch")
{
    RandomStream rng(5);
    DynamicTrap trap{TrapSpec(5, 1)};
    Population pop = random_population(4, 5, rng);
    REQUIRE(evaluate_population(pop, trap, 0) == 4);
    for (const auto& ind : pop.members) {
        REQUIRE(ind.evaluated());
        REQUIRE(ind.evaluated_phase == 0);
    }

    Population wrong = random_population(4, 6, rng);
    REQUIRE_THROWS_AS(evaluate_population(wrong, trap, 0), config_error);
}

TEST_CASE("evaluate_population: all-zero genome on one-block trap-5")
{
    DynamicTrap trap{TrapSpec(5, 1)};
    Population pop;
    pop.members.resize(2);
    pop.members[0].genome = Genome(5);
    pop.members[1].genome = Genome(5);
    evaluate_population(pop, trap, 0);
    REQUIRE(pop.members[0].fitness == 6.0); // phase-0 optimum at all zeros
    // purity: re-evaluation at the same phase is identical
    const double before = pop.members[0].fitness;
    evaluate_population(pop, trap, 0);
    REQUIRE(pop.members[0].fitness == before);
}

TEST_CASE("EnvironmentClock: phase schedule and change events")
{
    EnvironmentClock clock(5, 2);
    REQUIRE(clock.phase(0) == 0);
    REQUIRE(clock.phase(4) == 0);
    REQUIRE(clock.phase(5) == 1);
    REQUIRE(clock.phase(9) == 1);
    REQUIRE(clock.phase(10) == 0);

    REQUIRE_FALSE(oracle_change_detected(clock, 0));
    REQUIRE(oracle_change_detected(clock, 5));
    REQUIRE(oracle_change_detected(EnvironmentClock(5), 5));
    REQUIRE_FALSE(oracle_change_detected(EnvironmentClock(10), 25));

    // periodicity: phase(t + P*tau) == phase(t)
    for (long long t = 0; t < 40; ++t) {
        REQUIRE(clock.phase(t + 2 * 5) == clock.phase(t));
    }

    REQUIRE_THROWS_AS(EnvironmentClock(0), config_error);
}

TEST_CASE("EnvironmentClock: change count over a horizon")
{
    for (int tau : {3, 5, 10}) {
        EnvironmentClock clock(tau);
        const int g = 100;
        int fired = 0;
        for (int t = 0; t < g; ++t) {
            fired += oracle_change_detected(clock, t) ? 1 : 0;
        }
        REQUIRE(fired == (g - 1) / tau);
    }
}

TEST_CASE("sentinel_change_detected: fires across phases, silent within")
{
    DynamicTrap trap{TrapSpec(5, 1)};
    Individual sentinel;
    sentinel.genome = Genome(5); // all zeros
    sentinel.fitness = trap.evaluate(sentinel.genome, 0);
    sentinel.evaluated_phase = 0;
    REQUIRE(sentinel.fitness == 6.0);

    REQUIRE_FALSE(sentinel_change_detected(sentinel, trap, 0));
    REQUIRE(sentinel_change_detected(sentinel, trap, 1)); // 6 vs 5

    Individual unevaluated;
    unevaluated.genome = Genome(5);
    REQUIRE_THROWS_AS(sentinel_change_detected(unevaluated, trap, 0), std::logic_error);
}

TEST_CASE("sentinel_change_detected: moving parabola offset step")
{
    MovingParabola parabola{MovingParabolaSpec{}};
    RandomStream rng(17);
    Individual sentinel;
    sentinel.genome = Genome::random(parabola.genome_length(), rng);
    sentinel.fitness = parabola.evaluate(sentinel.genome, 0);
    sentinel.evaluated_phase = 0;

    REQUIRE_FALSE(sentinel_change_detected(sentinel, parabola, 0));
    parabola.advance_environment();
    REQUIRE(sentinel_change_detected(sentinel, parabola, 0));
}
