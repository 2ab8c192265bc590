#pragma once

#include "dcga/solvers.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace dcga {

struct ExperimentConfig {
    nlohmann::json problem; // {"type": ..., parameters...}
    Variant variant = Variant::dcga1;
    int population = 5000;
    int tournament = 16;
    int generations = 100;
    int cycle = 10;
    int runs = 30;
    std::uint64_t seed = 1;
    std::string output = "out";
    DetectionMode detection = DetectionMode::oracle;

    bool operator==(const ExperimentConfig& other) const = default;

    SolverConfig solver_config() const
    {
        SolverConfig sc;
        sc.variant = variant;
        sc.population = population;
        sc.tournament = tournament;
        sc.generations = generations;
        sc.cycle = cycle;
        sc.detection = detection;
        return sc;
    }
};

inline std::unique_ptr<DynamicProblem> make_problem(const nlohmann::json& spec)
{
    if (!spec.is_object()) {
        throw config_error("problem must be an object with a \"type\" field");
    }
    if (!spec.contains("type") || !spec.at("type").is_string()) {
        throw config_error("problem.type must be a string");
    }
    const std::string type = spec.at("type").get<std::string>();

    auto get_int = [&](const char* key, std::optional<int> fallback = std::nullopt) {
        if (!spec.contains(key)) {
            if (fallback.has_value()) {
                return *fallback;
            }
            throw config_error("problem." + std::string(key) + " is required for " + type);
        }
        if (!spec.at(key).is_number_integer()) {
            throw config_error("problem." + std::string(key) + " must be an integer");
        }
        return spec.at(key).get<int>();
    };
    auto allow_keys = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : spec.items()) {
            (void)value;
            if (key == "type") {
                continue;
            }
            if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end()) {
                throw config_error("unknown problem field \"" + key + "\" for " + type);
            }
        }
    };

    if (type == "dynamic_trap") {
        allow_keys({"k", "blocks"});
        return std::make_unique<DynamicTrap>(TrapSpec(get_int("k"), get_int("blocks")));
    }
    if (type == "static_trap") {
        allow_keys({"k", "blocks"});
        return std::make_unique<StaticTrap>(TrapSpec(get_int("k"), get_int("blocks")));
    }
    if (type == "modified_trap4") {
        allow_keys({"blocks"});
        return std::make_unique<ModifiedTrap4>(ModifiedTrap4Spec(get_int("blocks")));
    }
    if (type == "switching_trap") {
        allow_keys({"length"});
        return std::make_unique<SwitchingTrap>(SwitchingTrapSpec(get_int("length")));
    }
    if (type == "moving_parabola") {
        allow_keys({"severity", "vars", "bits"});
        MovingParabolaSpec mp;
        if (spec.contains("severity")) {
            if (!spec.at("severity").is_number()) {
                throw config_error("problem.severity must be a number");
            }
            mp.severity = spec.at("severity").get<double>();
        }
        mp.n_vars = get_int("vars", mp.n_vars);
        mp.bits_per_var = get_int("bits", mp.bits_per_var);
        return std::make_unique<MovingParabola>(mp);
    }
    throw config_error("unknown problem type \"" + type + "\"");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw config_error("config must be a JSON object");
    }
    static const std::vector<std::string> known = {"problem", "variant", "population", "tournament",
                                                   "generations", "cycle", "runs", "seed",
                                                   "output", "detection"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw config_error("unknown config field \"" + key + "\"");
        }
    }

    ExperimentConfig cfg;
    if (!j.contains("problem")) {
        throw config_error("config requires a \"problem\" field");
    }
    cfg.problem = j.at("problem");
    make_problem(cfg.problem); // validates now rather than at run time

    if (!j.contains("variant") || !j.at("variant").is_string()) {
        throw config_error("config requires a string \"variant\" field");
    }
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!variant.has_value()) {
        throw config_error("unknown variant \"" + j.at("variant").get<std::string>() +
                           "\" (expected ecga_static|dcga1|dcga2|uga)");
    }
    cfg.variant = *variant;

    auto read_int = [&](const char* key, int minimum, int& out, const char* what) {
        if (!j.contains(key)) {
            return;
        }
        if (!j.at(key).is_number_integer()) {
            throw config_error(std::string(key) + " must be an integer");
        }
        const int v = j.at(key).get<int>();
        if (v < minimum) {
            throw config_error(std::string(key) + " must be >= " + std::to_string(minimum) + " (" + what + ")");
        }
        out = v;
    };
    read_int("population", 2, cfg.population, "population size");
    read_int("tournament", 2, cfg.tournament, "tournament size");
    read_int("generations", 1, cfg.generations, "generation budget");
    read_int("cycle", 1, cfg.cycle, "cycle length");
    read_int("runs", 1, cfg.runs, "independent runs");
    if (cfg.tournament > cfg.population) {
        throw config_error("tournament must be <= population");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
            throw config_error("seed must be a non-negative integer");
        }
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) {
            throw config_error("output must be a string path");
        }
        cfg.output = j.at("output").get<std::string>();
    }
    if (j.contains("detection")) {
        const std::string mode = j.at("detection").get<std::string>();
        if (mode == "oracle") {
            cfg.detection = DetectionMode::oracle;
        } else if (mode == "sentinel") {
            cfg.detection = DetectionMode::sentinel;
        } else {
            throw config_error("detection must be \"oracle\" or \"sentinel\"");
        }
    }
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg)
{
    nlohmann::json j;
    j["problem"] = cfg.problem;
    j["variant"] = variant_name(cfg.variant);
    j["population"] = cfg.population;
    j["tournament"] = cfg.tournament;
    j["generations"] = cfg.generations;
    j["cycle"] = cfg.cycle;
    j["runs"] = cfg.runs;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;
    j["detection"] = cfg.detection == DetectionMode::oracle ? "oracle" : "sentinel";
    return j;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

struct AggregateSeries {
    std::vector<double> mean_best;
    std::vector<double> std_best;
    std::vector<double> min_best;
    std::vector<double> max_best;
    std::vector<double> optimum;
};

struct BatchResult {
    std::vector<RunTrace> traces;
    AggregateSeries aggregate;
    long long total_evaluations = 0;
};

inline AggregateSeries aggregate_traces(const std::vector<RunTrace>& traces)
{
    AggregateSeries agg;
    if (traces.empty()) {
        return agg;
    }
    const std::size_t g = traces.front().records.size();
    agg.mean_best.resize(g);
    agg.std_best.resize(g);
    agg.min_best.resize(g);
    agg.max_best.resize(g);
    agg.optimum.resize(g);
    for (std::size_t t = 0; t < g; ++t) {
        double sum = 0, sum_sq = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& trace : traces) {
            const double b = trace.records[t].best;
            sum += b;
            sum_sq += b * b;
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        const double n = static_cast<double>(traces.size());
        const double mean = sum / n;
        agg.mean_best[t] = mean;
        agg.std_best[t] = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
        agg.min_best[t] = lo;
        agg.max_best[t] = hi;
        agg.optimum[t] = traces.front().records[t].optimum;
    }
    return agg;
}

/// Scaled copy of a config: population and run counts multiply by f
/// (clamped to stay valid). f = 1 is the paper protocol.
inline ExperimentConfig apply_scale(ExperimentConfig cfg, double scale)
{
    if (scale <= 0) {
        throw config_error("scale must be positive");
    }
    if (scale != 1.0) {
        cfg.population = std::max<int>(cfg.tournament * 2, static_cast<int>(std::llround(cfg.population * scale)));
        cfg.runs = std::max<int>(1, static_cast<int>(std::llround(cfg.runs * scale)));
    }
    return cfg;
}

/// Runs cfg.runs independent seeded runs (work-pooled across threads) and
/// aggregates best-of-generation statistics in fixed run order. Results are
/// identical for any thread count.
inline BatchResult run_batch(const ExperimentConfig& cfg, int threads = 1)
{
    const SolverConfig solver = cfg.solver_config();
    solver.validate();
    const auto prototype = make_problem(cfg.problem);

    BatchResult result;
    result.traces.resize(cfg.runs);
    std::vector<std::string> errors(cfg.runs);

    std::atomic<int> next_run{0};
    auto worker = [&]() {
        while (true) {
            const int r = next_run.fetch_add(1);
            if (r >= cfg.runs) {
                return;
            }
            const std::uint64_t run_seed = RandomStream::derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
            try {
                auto problem = prototype->clone();
                result.traces[r] = run(solver, *problem, run_seed);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };

    const int pool = std::clamp(threads, 1, cfg.runs);
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> pool_threads;
        pool_threads.reserve(pool);
        for (int i = 0; i < pool; ++i) {
            pool_threads.emplace_back(worker);
        }
        for (auto& th : pool_threads) {
            th.join();
        }
    }

    for (int r = 0; r < cfg.runs; ++r) {
        if (!errors[r].empty()) {
            throw std::runtime_error("run " + std::to_string(r) + " (seed " +
                                     std::to_string(RandomStream::derive_seed(cfg.seed, r)) +
                                     ") failed: " + errors[r]);
        }
        result.total_evaluations += result.traces[r].records.back().evals;
    }
    result.aggregate = aggregate_traces(result.traces);
    return result;
}

// --- output formatting ------------------------------------------------

/// 9 significant digits, enough for bit-exact cross-run comparison.
inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void write_run_csv(const std::filesystem::path& path, const RunTrace& trace, int run_index)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "run,generation,phase,changed,best,mean,optimum,groups,largest_group,partition,evals\n";
    for (const auto& r : trace.records) {
        out << run_index << ',' << r.generation << ',' << r.phase << ',' << (r.changed ? 1 : 0) << ',' << fmt9(r.best)
            << ',' << fmt9(r.mean) << ',' << fmt9(r.optimum) << ',' << r.groups << ',' << r.largest_group << ",\""
            << r.partition << "\"," << r.evals << '\n';
    }
}

inline void write_aggregate_csv(const std::filesystem::path& path, const AggregateSeries& agg)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "generation,mean_best,std_best,min_best,max_best,optimum\n";
    for (std::size_t t = 0; t < agg.mean_best.size(); ++t) {
        out << t << ',' << fmt9(agg.mean_best[t]) << ',' << fmt9(agg.std_best[t]) << ',' << fmt9(agg.min_best[t])
            << ',' << fmt9(agg.max_best[t]) << ',' << fmt9(agg.optimum[t]) << '\n';
    }
}

/// Writes <path> (generation, mean best, optimum) plus a gnuplot script next
/// to it.
inline void emit_plot_data(const AggregateSeries& agg, const std::filesystem::path& dat_path, Sense sense)
{
    {
        std::ofstream out(dat_path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + dat_path.string());
        }
        out << "generation mean_best optimum\n";
        for (std::size_t t = 0; t < agg.mean_best.size(); ++t) {
            out << t << ' ' << fmt9(agg.mean_best[t]) << ' ' << fmt9(agg.optimum[t]) << '\n';
        }
    }
    std::filesystem::path script_path = dat_path;
    script_path.replace_extension(".gp");
    std::ofstream out(script_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + script_path.string());
    }
    out << "# gnuplot script; " << (sense == Sense::minimize ? "lower is better" : "higher is better") << "\n"
        << "set xlabel 'generation'\n"
        << "set ylabel 'best fitness'\n"
        << "plot '" << dat_path.filename().string() << "' using 1:2 with lines title 'mean best', \\\n"
        << "     '" << dat_path.filename().string() << "' using 1:3 with lines dt 2 title 'optimum'\n";
}

// --- recovery statistics ----------------------------------------------

struct CycleRecovery {
    int cycle = 0;
    bool recovered = false;
    int generations_to_recover = -1; // offset within the cycle, -1 if never
};

struct RecoveryReport {
    std::vector<CycleRecovery> cycles;
    double recovered_fraction = 0;
};

/// Per-cycle time to re-reach the optimum (|best - optimum| <= tolerance,
/// using the trace's per-generation optimum column).
inline RecoveryReport recovery_statistics(const RunTrace& trace, int cycle_length, double tolerance)
{
    if (cycle_length < 1) {
        throw config_error("cycle must be >= 1");
    }
    RecoveryReport report;
    const int g = static_cast<int>(trace.records.size());
    int recovered_count = 0;
    for (int start = 0; start < g; start += cycle_length) {
        CycleRecovery cr;
        cr.cycle = start / cycle_length;
        for (int t = start; t < std::min(start + cycle_length, g); ++t) {
            if (std::fabs(trace.records[t].best - trace.records[t].optimum) <= tolerance) {
                cr.recovered = true;
                cr.generations_to_recover = t - start;
                break;
            }
        }
        recovered_count += cr.recovered ? 1 : 0;
        report.cycles.push_back(cr);
    }
    report.recovered_fraction =
        report.cycles.empty() ? 0.0 : static_cast<double>(recovered_count) / static_cast<double>(report.cycles.size());
    return report;
}

/// Default tolerance for "reached the optimum": exact (1e-9) for the trap
/// families, the quantization floor for the moving parabola whose grid never
/// hits the continuous minimum.
inline double default_recovery_tolerance(const nlohmann::json& problem_spec)
{
    if (problem_spec.is_object() && problem_spec.contains("type") &&
        problem_spec.at("type").get<std::string>() == "moving_parabola") {
        return 0.02;
    }
    return 1e-9;
}

// --- experiment grids ---------------------------------------------------

struct ExperimentCell {
    std::string name;
    ExperimentConfig config;
};

inline std::vector<ExperimentCell> experiment_cells(int experiment_id, std::uint64_t seed, const std::string& out_dir)
{
    static const Variant variants[] = {Variant::dcga1, Variant::dcga2, Variant::uga};
    static const int cycles[] = {5, 10};

    std::vector<ExperimentCell> cells;
    auto add = [&](std::string name, nlohmann::json problem, Variant variant, int cycle) {
        ExperimentCell cell;
        cell.name = std::move(name);
        cell.config.problem = std::move(problem);
        cell.config.variant = variant;
        cell.config.cycle = cycle;
        cell.config.seed = seed;
        cell.config.output = out_dir;
        cells.push_back(std::move(cell));
    };

    switch (experiment_id) {
    case 1:
        for (int k : {3, 4, 5}) {
            for (int m : {5, 10, 15, 20}) {
                for (int cycle : cycles) {
                    for (Variant v : variants) {
                        add("trap" + std::to_string(k) + "_m" + std::to_string(m) + "_c" + std::to_string(cycle) +
                                "_" + variant_name(v),
                            nlohmann::json{{"type", "dynamic_trap"}, {"k", k}, {"blocks", m}}, v, cycle);
                    }
                }
            }
        }
        break;
    case 2:
        for (int m : {5, 10, 15, 20}) {
            for (int cycle : cycles) {
                for (Variant v : variants) {
                    add("mtrap4_m" + std::to_string(m) + "_c" + std::to_string(cycle) + "_" + variant_name(v),
                        nlohmann::json{{"type", "modified_trap4"}, {"blocks", m}}, v, cycle);
                }
            }
        }
        break;
    case 3:
        for (int length = 12; length <= 84; length += 12) {
            for (int cycle : cycles) {
                for (Variant v : variants) {
                    add("switch_l" + std::to_string(length) + "_c" + std::to_string(cycle) + "_" + variant_name(v),
                        nlohmann::json{{"type", "switching_trap"}, {"length", length}}, v, cycle);
                }
            }
        }
        break;
    case 4:
        for (int cycle : cycles) {
            for (Variant v : variants) {
                add("parabola_c" + std::to_string(cycle) + "_" + variant_name(v),
                    nlohmann::json{{"type", "moving_parabola"}}, v, cycle);
            }
        }
        break;
    default:
        throw config_error("experiment id must be 1, 2, 3, or 4");
    }
    return cells;
}

struct CellSummary {
    std::string name;
    double recovered_fraction = 0;
    double final_mean_best = 0;
    long long evaluations = 0;
};

/// Runs one cell into <out>/<name>/: per-run CSVs, aggregate CSV, plot data
/// and script, and the cell's own config for round-tripping.
inline CellSummary run_cell(const ExperimentCell& cell, double scale, int threads)
{
    const ExperimentConfig cfg = apply_scale(cell.config, scale);
    const BatchResult batch = run_batch(cfg, threads);

    const std::filesystem::path dir = std::filesystem::path(cfg.output) / cell.name;
    std::filesystem::create_directories(dir);
    for (int r = 0; r < cfg.runs; ++r) {
        write_run_csv(dir / ("run_" + std::to_string(r) + ".csv"), batch.traces[r], r);
    }
    write_aggregate_csv(dir / "aggregate.csv", batch.aggregate);
    emit_plot_data(batch.aggregate, dir / "plot.dat", make_problem(cfg.problem)->sense());
    {
        std::ofstream out(dir / "config.json", std::ios::binary);
        out << config_to_json(cfg).dump(2) << '\n';
    }

    CellSummary summary;
    summary.name = cell.name;
    const double tolerance = default_recovery_tolerance(cfg.problem);
    double frac = 0;
    for (const auto& trace : batch.traces) {
        frac += recovery_statistics(trace, cfg.cycle, tolerance).recovered_fraction;
    }
    summary.recovered_fraction = frac / static_cast<double>(cfg.runs);
    summary.final_mean_best = batch.aggregate.mean_best.back();
    summary.evaluations = batch.total_evaluations;
    return summary;
}

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<CellSummary>& summaries)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "cell,recovered_fraction,final_mean_best,evaluations\n";
    for (const auto& s : summaries) {
        out << s.name << ',' << fmt9(s.recovered_fraction) << ',' << fmt9(s.final_mean_best) << ',' << s.evaluations
            << '\n';
    }
}

/// Replicates one of the four experiment grids into out_dir and writes
/// summary.csv with one row per cell.
inline std::vector<CellSummary> replicate_experiment(int experiment_id, const std::string& out_dir, double scale = 1.0,
                                                     int threads = 1, std::uint64_t seed = 1,
                                                     std::ostream* progress = nullptr)
{
    const auto cells = experiment_cells(experiment_id, seed, out_dir);
    std::vector<CellSummary> summaries;
    summaries.reserve(cells.size());
    for (const auto& cell : cells) {
        const auto summary = run_cell(cell, scale, threads);
        if (progress != nullptr) {
            const auto problem = make_problem(cell.config.problem);
            (*progress) << cell.name << ": recovered " << fmt9(summary.recovered_fraction) << ", final best "
                        << fmt9(summary.final_mean_best) << ", evals " << summary.evaluations
                        << " (predicted convergence at unit intensity: "
                        << fmt9(predicted_convergence_time(problem->genome_length(), 1.0)) << " gens)\n";
        }
        summaries.push_back(summary);
    }
    std::filesystem::create_directories(out_dir);
    write_summary_csv(std::filesystem::path(out_dir) / "summary.csv", summaries);
    return summaries;
}

} // namespace dcga
