#pragma once

#include "dcga/core.hpp"
#include "dcga/model.hpp"
#include "dcga/operators.hpp"
#include "dcga/problems.hpp"

#include <functional>
#include <numbers>
#include <optional>

namespace dcga {

enum class Variant { ecga_static, dcga1, dcga2, uga };
enum class DetectionMode { oracle, sentinel };

inline const char* variant_name(Variant v)
{
    switch (v) {
    case Variant::ecga_static: return "ecga_static";
    case Variant::dcga1: return "dcga1";
    case Variant::dcga2: return "dcga2";
    case Variant::uga: return "uga";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(const std::string& name)
{
    if (name == "ecga_static") return Variant::ecga_static;
    if (name == "dcga1") return Variant::dcga1;
    if (name == "dcga2") return Variant::dcga2;
    if (name == "uga") return Variant::uga;
    return std::nullopt;
}

struct SolverConfig {
    Variant variant = Variant::dcga1;
    int population = 5000;
    int tournament = 16;
    int generations = 100;
    int cycle = 10;
    DetectionMode detection = DetectionMode::oracle;
    std::uint32_t merge_cap = 20;

    void validate() const
    {
        if (population < 2) {
            throw config_error("population must be >= 2");
        }
        if (tournament < 2 || tournament > population) {
            throw config_error("tournament size must be in [2, population]");
        }
        if (generations < 1) {
            throw config_error("generations must be >= 1");
        }
        if (cycle < 1) {
            throw config_error("cycle must be >= 1");
        }
    }
};

struct TraceRecord {
    int generation = 0;
    int phase = 0;
    bool changed = false;
    double best = 0;
    double mean = 0;
    double optimum = 0;
    int groups = 0;
    int largest_group = 0;
    std::string partition;
    long long evals = 0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
};

/// Test/diagnostic hooks; on_restart_partition fires when dcGA(1) reuses the
/// previous generation's partition at a change event.
struct RunHooks {
    std::function<void(int generation, const GenePartition& reused)> on_restart_partition;
};

namespace detail {

inline const Individual& best_member(const Population& pop, Sense sense)
{
    const Individual* best = &pop.members.front();
    for (const auto& ind : pop.members) {
        const bool better = sense == Sense::maximize ? ind.fitness > best->fitness : ind.fitness < best->fitness;
        if (better) {
            best = &ind;
        }
    }
    return *best;
}

inline double mean_fitness(const Population& pop)
{
    double sum = 0;
    for (const auto& ind : pop.members) {
        sum += ind.fitness;
    }
    return sum / static_cast<double>(pop.size());
}

} // namespace detail

struct EcgaStepResult {
    Population next;
    MarginalProductModel model;
};

/// One ecGA generation: evaluate (in place), select, learn the model from
/// the selected set, and sample the next population block-wise.
inline EcgaStepResult step_ecga(Population& pop, const DynamicProblem& problem, int phase, const SolverConfig& config,
                                RandomStream& rng, long long& evals)
{
    evals += evaluate_population(pop, problem, phase);
    Population selected = tournament_select(pop, config.tournament, problem.sense(), rng);
    MarginalProductModel model = greedy_model_search(selected, ModelSearchOptions{config.merge_cap});
    Population next = bb_wise_crossover(selected, model.partition, pop.size(), rng);
    return {std::move(next), std::move(model)};
}

/// One uGA generation: evaluate, select, uniform crossover. No model.
inline Population step_uga(Population& pop, const DynamicProblem& problem, int phase, const SolverConfig& config,
                           RandomStream& rng, long long& evals)
{
    evals += evaluate_population(pop, problem, phase);
    Population selected = tournament_select(pop, config.tournament, problem.sense(), rng);
    return uniform_crossover(selected, pop.size(), rng);
}

/// dcGA(1) change handler: restart at random, evaluate at the new phase,
/// select, then shuffle building blocks with the last learned partition.
/// Costs one extra population evaluation.
inline Population on_change_dcga1(const DynamicProblem& problem, const MarginalProductModel& last_model,
                                  const SolverConfig& config, int phase, RandomStream& rng, long long& evals)
{
    Population pop = random_population(config.population, problem.genome_length(), rng);
    evals += evaluate_population(pop, problem, phase);
    Population selected = tournament_select(pop, config.tournament, problem.sense(), rng);
    return bb_wise_crossover(selected, last_model.partition, config.population, rng);
}

/// dcGA(2) change handler: plain restart, nothing reused.
inline Population on_change_dcga2(const SolverConfig& config, std::size_t genome_length, RandomStream& rng)
{
    return random_population(config.population, genome_length, rng);
}

/// Full run: G generations of detect -> handle -> step, one trace record per
/// generation. Deterministic in (config, problem, seed).
inline RunTrace run(const SolverConfig& config, DynamicProblem& problem, std::uint64_t seed,
                    const RunHooks* hooks = nullptr)
{
    config.validate();
    const EnvironmentClock clock(config.cycle, problem.phase_count());
    const std::size_t l = problem.genome_length();
    const Sense sense = problem.sense();

    RandomStream root(seed);
    RandomStream rng_init = root.derive(0x696e6974); // population init
    RandomStream rng_evol = root.derive(0x65766f6c); // selection/crossover/restarts

    Population pop = random_population(config.population, l, rng_init);
    std::optional<MarginalProductModel> last_model;
    std::optional<Individual> sentinel;
    long long evals = 0;

    RunTrace trace;
    trace.records.reserve(config.generations);

    for (int t = 0; t < config.generations; ++t) {
        const int phase = clock.phase(t);
        if (clock.is_change(t)) {
            problem.on_change();
        }

        bool detected = false;
        if (config.detection == DetectionMode::oracle) {
            detected = oracle_change_detected(clock, t);
        } else if (sentinel.has_value()) {
            detected = sentinel_change_detected(*sentinel, problem, phase);
            evals += 1;
        }

        if (detected) {
            switch (config.variant) {
            case Variant::dcga1:
                if (last_model.has_value()) {
                    if (hooks != nullptr && hooks->on_restart_partition) {
                        hooks->on_restart_partition(t, last_model->partition);
                    }
                    pop = on_change_dcga1(problem, *last_model, config, phase, rng_evol, evals);
                } else {
                    pop = on_change_dcga2(config, l, rng_evol);
                }
                break;
            case Variant::dcga2:
                pop = on_change_dcga2(config, l, rng_evol);
                break;
            case Variant::ecga_static:
            case Variant::uga:
                break; // these run straight through changes
            }
        }

        TraceRecord rec;
        rec.generation = t;
        rec.phase = phase;
        rec.changed = detected;

        if (config.variant == Variant::uga) {
            Population next = step_uga(pop, problem, phase, config, rng_evol, evals);
            rec.best = detail::best_member(pop, sense).fitness;
            rec.mean = detail::mean_fitness(pop);
            if (config.detection == DetectionMode::sentinel) {
                sentinel = detail::best_member(pop, sense);
            }
            pop = std::move(next);
        } else {
            EcgaStepResult step = step_ecga(pop, problem, phase, config, rng_evol, evals);
            rec.best = detail::best_member(pop, sense).fitness;
            rec.mean = detail::mean_fitness(pop);
            if (config.detection == DetectionMode::sentinel) {
                sentinel = detail::best_member(pop, sense);
            }
            rec.groups = static_cast<int>(step.model.partition.groups.size());
            rec.largest_group = static_cast<int>(step.model.partition.largest_group());
            rec.partition = step.model.partition.to_string();
            last_model = std::move(step.model);
            pop = std::move(step.next);
        }

        rec.optimum = problem.optimum_value(phase);
        rec.evals = evals;

        trace.records.push_back(std::move(rec));
    }
    return trace;
}

inline double predicted_convergence_time(std::size_t genome_length, double selection_intensity)
{
    if (genome_length < 1) {
        throw config_error("genome length must be >= 1");
    }
    if (selection_intensity <= 0) {
        throw config_error("selection intensity must be positive");
    }
    return std::numbers::pi * std::sqrt(static_cast<double>(genome_length)) / selection_intensity;
}

/// Cost of enumerating every block configuration once the decomposition is
/// fixed: blocks * 2^order evaluations.
inline long long block_enumeration_cost(int blocks, int order)
{
    if (blocks < 1 || order < 1 || order > 62) {
        throw config_error("invalid block count or order");
    }
    return static_cast<long long>(blocks) * (1LL << order);
}

} // namespace dcga
