#include "dcga/harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace dcga;

namespace {

ExperimentConfig parse_config(const std::string& text)
{
    return config_from_json(nlohmann::json::parse(text));
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// quote-aware CSV field split (the partition column contains commas)
std::vector<std::string> split_csv_row(const std::string& row)
{
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : row) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

const char* kMinimalConfig = R"({"problem": {"type": "dynamic_trap", "k": 3, "blocks": 5}, "variant": "dcga1"})";

} // namespace

TEST_CASE("load_config: defaults applied to a minimal config")
{
    const ExperimentConfig cfg = parse_config(kMinimalConfig);
    REQUIRE(cfg.population == 5000);
    REQUIRE(cfg.tournament == 16);
    REQUIRE(cfg.generations == 100);
    REQUIRE(cfg.runs == 30);
    REQUIRE(cfg.cycle == 10);
    REQUIRE(cfg.variant == Variant::dcga1);
    REQUIRE(cfg.detection == DetectionMode::oracle);
}

TEST_CASE("load_config: descriptive validation errors")
{
    using Catch::Matchers::ContainsSubstring;

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "dynamic_trap", "k": 3, "blocks": 5},
                                         "variant": "dcga1", "cycle": 0})"),
                        ContainsSubstring("cycle must be >= 1"));

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "switching_trap", "length": 13},
                                         "variant": "dcga1"})"),
                        ContainsSubstring("divisible by 12"));

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "hills"}, "variant": "dcga1"})"),
                        ContainsSubstring("unknown problem type"));

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "dynamic_trap", "k": 3, "blocks": 5},
                                         "variant": "annealing"})"),
                        ContainsSubstring("unknown variant"));

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "dynamic_trap", "k": 3, "blocks": 5},
                                         "variant": "dcga1", "popsize": 10})"),
                        ContainsSubstring("unknown config field"));

    REQUIRE_THROWS_WITH(parse_config(R"({"problem": {"type": "dynamic_trap", "k": 3},
                                         "variant": "dcga1"})"),
                        ContainsSubstring("problem.blocks"));

    REQUIRE_THROWS_AS(parse_config(R"({"variant": "dcga1"})"), config_error);
    REQUIRE_THROWS_AS(load_config("no_such_file.json"), config_error);
}

TEST_CASE("make_problem: catalog names construct the right families")
{
    REQUIRE(make_problem(nlohmann::json{{"type", "dynamic_trap"}, {"k", 5}, {"blocks", 4}})->genome_length() == 20);
    REQUIRE(make_problem(nlohmann::json{{"type", "static_trap"}, {"k", 3}, {"blocks", 4}})->name() == "static_trap");
    REQUIRE(make_problem(nlohmann::json{{"type", "modified_trap4"}, {"blocks", 6}})->genome_length() == 24);
    REQUIRE(make_problem(nlohmann::json{{"type", "switching_trap"}, {"length", 24}})->genome_length() == 24);
    REQUIRE(make_problem(nlohmann::json{{"type", "moving_parabola"}})->sense() == Sense::minimize);
    REQUIRE_THROWS_AS(make_problem(nlohmann::json{{"type", "moving_parabola"}, {"delta", 1}}), config_error);
}

TEST_CASE("run_batch: a single run aggregates to itself")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    cfg.population = 150;
    cfg.generations = 12;
    cfg.cycle = 5;
    cfg.runs = 1;
    const BatchResult batch = run_batch(cfg);
    REQUIRE(batch.traces.size() == 1);
    for (int t = 0; t < cfg.generations; ++t) {
        REQUIRE(batch.aggregate.mean_best[t] == batch.traces[0].records[t].best);
        REQUIRE(batch.aggregate.std_best[t] == 0.0);
        REQUIRE(batch.aggregate.min_best[t] == batch.aggregate.max_best[t]);
    }
}

TEST_CASE("run_batch: aggregate stats bracket the mean")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    cfg.population = 100;
    cfg.generations = 10;
    cfg.cycle = 5;
    cfg.runs = 6;
    const BatchResult batch = run_batch(cfg, 2);
    for (int t = 0; t < cfg.generations; ++t) {
        REQUIRE(batch.aggregate.mean_best[t] >= batch.aggregate.min_best[t]);
        REQUIRE(batch.aggregate.mean_best[t] <= batch.aggregate.max_best[t]);
    }
}

TEST_CASE("run_cell: output files are byte-identical across thread counts")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    cfg.population = 120;
    cfg.generations = 15;
    cfg.cycle = 5;
    cfg.runs = 4;

    const std::filesystem::path base = "t_out_determinism";
    std::filesystem::remove_all(base);

    auto run_into = [&](const std::string& sub, int threads) {
        ExperimentConfig c = cfg;
        c.output = (base / sub).string();
        run_cell(ExperimentCell{"cell", c}, 1.0, threads);
        return base / sub / "cell";
    };
    const auto dir1 = run_into("t1", 1);
    const auto dir3 = run_into("t3", 3);

    for (const auto& name : {"run_0.csv", "run_1.csv", "run_2.csv", "run_3.csv", "aggregate.csv", "plot.dat"}) {
        REQUIRE(slurp(dir1 / name) == slurp(dir3 / name));
    }
    std::filesystem::remove_all(base);
}

TEST_CASE("run_cell: aggregate mean matches the per-run CSV best columns")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    cfg.population = 100;
    cfg.generations = 8;
    cfg.cycle = 4;
    cfg.runs = 3;
    cfg.output = "t_out_crosscheck";
    std::filesystem::remove_all(cfg.output);

    run_cell(ExperimentCell{"cell", cfg}, 1.0, 1);
    const std::filesystem::path dir = std::filesystem::path(cfg.output) / "cell";

    std::vector<std::vector<double>> best_columns;
    for (int r = 0; r < cfg.runs; ++r) {
        std::ifstream in(dir / ("run_" + std::to_string(r) + ".csv"));
        std::string line;
        std::getline(in, line); // header
        std::vector<double> best;
        while (std::getline(in, line)) {
            const auto fields = split_csv_row(line);
            REQUIRE(fields.size() == 11);
            best.push_back(std::stod(fields[4]));
        }
        REQUIRE(best.size() == static_cast<std::size_t>(cfg.generations));
        best_columns.push_back(std::move(best));
    }

    std::ifstream agg(dir / "aggregate.csv");
    std::string line;
    std::getline(agg, line);
    int t = 0;
    while (std::getline(agg, line)) {
        const auto fields = split_csv_row(line);
        const double mean = std::stod(fields[1]);
        double expect = 0;
        for (const auto& col : best_columns) {
            expect += col[t];
        }
        expect /= static_cast<double>(cfg.runs);
        REQUIRE_THAT(mean, Catch::Matchers::WithinRel(expect, 1e-8));
        ++t;
    }
    REQUIRE(t == cfg.generations);
    std::filesystem::remove_all(cfg.output);
}

TEST_CASE("emit_plot_data: one header plus one row per generation")
{
    AggregateSeries agg;
    for (int t = 0; t < 100; ++t) {
        agg.mean_best.push_back(t);
        agg.std_best.push_back(0);
        agg.min_best.push_back(t);
        agg.max_best.push_back(t);
        agg.optimum.push_back(120.0);
    }
    const std::filesystem::path dir = "t_out_plot";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    emit_plot_data(agg, dir / "plot.dat", Sense::minimize);

    std::ifstream in(dir / "plot.dat");
    std::string line;
    int rows = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (!saw_header) {
            saw_header = true;
            REQUIRE(line == "generation mean_best optimum");
        } else {
            ++rows;
            REQUIRE(line.find("120") != std::string::npos);
        }
    }
    REQUIRE(rows == 100);

    const std::string script = slurp(dir / "plot.gp");
    REQUIRE(script.find("lower is better") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("recovery_statistics: pinned and hopeless traces")
{
    RunTrace pinned;
    for (int t = 0; t < 20; ++t) {
        TraceRecord rec;
        rec.generation = t;
        rec.best = 60.0;
        rec.optimum = 60.0;
        pinned.records.push_back(rec);
    }
    const RecoveryReport good = recovery_statistics(pinned, 5, 1e-9);
    REQUIRE(good.cycles.size() == 4);
    REQUIRE(good.recovered_fraction == 1.0);
    for (const auto& c : good.cycles) {
        REQUIRE(c.recovered);
        REQUIRE(c.generations_to_recover == 0);
    }

    RunTrace hopeless = pinned;
    for (auto& rec : hopeless.records) {
        rec.best = 10.0;
    }
    const RecoveryReport bad = recovery_statistics(hopeless, 5, 1e-9);
    REQUIRE(bad.recovered_fraction == 0.0);

    // recovery partway into each cycle
    RunTrace lagged = pinned;
    for (auto& rec : lagged.records) {
        rec.best = rec.generation % 5 >= 2 ? 60.0 : 10.0;
    }
    const RecoveryReport mid = recovery_statistics(lagged, 5, 1e-9);
    REQUIRE(mid.recovered_fraction == 1.0);
    for (const auto& c : mid.cycles) {
        REQUIRE(c.generations_to_recover == 2);
    }
}

TEST_CASE("default_recovery_tolerance: quantization floor for the parabola")
{
    REQUIRE(default_recovery_tolerance(nlohmann::json{{"type", "moving_parabola"}}) == 0.02);
    REQUIRE(default_recovery_tolerance(nlohmann::json{{"type", "dynamic_trap"}}) == 1e-9);
}

TEST_CASE("experiment_cells: grid sizes match the four experiments")
{
    REQUIRE(experiment_cells(1, 1, "o").size() == 72); // 3 traps x 4 m x 2 cycles x 3 variants
    REQUIRE(experiment_cells(2, 1, "o").size() == 24); // 4 m x 2 cycles x 3 variants
    REQUIRE(experiment_cells(3, 1, "o").size() == 42); // 7 lengths x 2 cycles x 3 variants
    REQUIRE(experiment_cells(4, 1, "o").size() == 6);  // 2 cycles x 3 variants
    REQUIRE_THROWS_AS(experiment_cells(5, 1, "o"), config_error);
}

TEST_CASE("experiment_cells: every cell round-trips through the config codec")
{
    const std::filesystem::path tmp = "t_out_roundtrip.json";
    for (int id = 1; id <= 4; ++id) {
        for (const auto& cell : experiment_cells(id, 99, "out_dir")) {
            {
                std::ofstream out(tmp, std::ios::binary);
                out << config_to_json(cell.config).dump(2) << '\n';
            }
            const ExperimentConfig back = load_config(tmp.string());
            REQUIRE(back == cell.config);
        }
    }
    std::filesystem::remove(tmp);
}

TEST_CASE("apply_scale: shrinks population and runs, keeps validity")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    const ExperimentConfig scaled = apply_scale(cfg, 0.1);
    REQUIRE(scaled.population == 500);
    REQUIRE(scaled.runs == 3);

    const ExperimentConfig tiny = apply_scale(cfg, 0.0001);
    REQUIRE(tiny.population >= tiny.tournament);
    REQUIRE(tiny.runs == 1);

    REQUIRE_THROWS_AS(apply_scale(cfg, 0.0), config_error);
    REQUIRE(apply_scale(cfg, 1.0) == cfg);
}

TEST_CASE("run_csv: schema and quoting")
{
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    cfg.population = 64;
    cfg.generations = 4;
    cfg.cycle = 2;
    cfg.runs = 1;
    cfg.output = "t_out_schema";
    std::filesystem::remove_all(cfg.output);
    run_cell(ExperimentCell{"cell", cfg}, 1.0, 1);

    std::ifstream in(std::filesystem::path(cfg.output) / "cell" / "run_0.csv");
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "run,generation,phase,changed,best,mean,optimum,groups,largest_group,partition,evals");
    std::string row;
    std::getline(in, row);
    const auto fields = split_csv_row(row);
    REQUIRE(fields.size() == 11);
    REQUIRE(fields[0] == "0");
    REQUIRE(fields[9].front() == '[');
    REQUIRE(fields[9].back() == ']');
    std::filesystem::remove_all(cfg.output);
}
