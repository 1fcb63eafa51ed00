#include <doctest.h>

#include "dehum/config.hpp"
#include "dehum/csv.hpp"
#include "dehum/error.hpp"
#include "dehum/pipeline.hpp"
#include "dehum/strings.hpp"

#include "support/test_paths.hpp"
#include "support/xml_check.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dehum;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PipelineConfig fixture_pipeline_config(const fs::path& out_dir) {
    PipelineConfig cfg = load_pipeline_config(dehum::testing::fixture_dir() /
                                              "fixture_config.toml");
    cfg.out_dir = out_dir;
    return cfg;
}

void run_all_commands(const PipelineConfig& cfg) {
    cmd_ingest(cfg);
    cmd_train(cfg);
    cmd_measure(cfg);
    cmd_extremes(cfg);
    cmd_report(cfg);
}

// The full fixture pipeline is run at most twice per test binary and shared
// across test cases; each run lands in its own directory.
const fs::path& pipeline_out(char tag) {
    static std::map<char, fs::path> done;
    auto it = done.find(tag);
    if (it != done.end()) return it->second;
    fs::path dir = fs::temp_directory_path() / "dehum_tests" / (std::string("pipeline_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    run_all_commands(fixture_pipeline_config(dir));
    return done.emplace(tag, dir).first->second;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json read_json(const fs::path& path) { return json::parse(read_file(path)); }

} // namespace

TEST_CASE("ingest writes the cache, stats and manifest") {
    const fs::path& out = pipeline_out('a');

    CHECK(fs::exists(out / "corpus_cache.jsonl"));
    CHECK(fs::exists(out / "corpus_stats.csv"));
    CHECK(fs::exists(out / "label_totals.csv"));

    auto stats = read_csv(out / "corpus_stats.csv");
    REQUIRE(stats.size() > 1);
    CHECK(stats[0] == std::vector<std::string>{"year", "label", "paragraphs", "tokens"});

    json manifest = read_json(out / "manifest.json");
    REQUIRE(manifest.contains("entries"));
    CHECK(manifest["entries"]["corpus_cache.jsonl"]["kind"] == "corpus_cache");
    CHECK(manifest["entries"]["corpus_stats.csv"]["command"] == "ingest");
}

TEST_CASE("train writes one model file per run and year plus the full models") {
    const fs::path& out = pipeline_out('a');

    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(out / "models"))
        names.insert(entry.path().filename().string());

    // runs = 2, years 2000..2004 all populated, plus the all-years model
    CHECK(names.size() == 12);
    CHECK(names.count("y2000_r0.dhem") == 1);
    CHECK(names.count("y2004_r1.dhem") == 1);
    CHECK(names.count("full_r0.dhem") == 1);
    CHECK(names.count("full_r1.dhem") == 1);

    json manifest = read_json(out / "manifest.json");
    CHECK(manifest["train"]["dim"] == 16);
    CHECK(manifest["train"]["runs"] == 2);
    const json& full = manifest["entries"]["models/full_r0.dhem"];
    CHECK(full["kind"] == "model");
    CHECK(full["year"].is_null());
    CHECK(full["vocab"].get<int>() > 100);
    CHECK(full["epoch_losses"].size() == 3);
}

TEST_CASE("measure emits every enabled series and a summary table") {
    const fs::path& out = pipeline_out('a');

    const std::vector<std::string> expected = {
        "paragraph_valence", "perspective",        "agency",
        "neighbor_valence",  "neighbor_dominance", "disgust_distance",
        "vermin_distance",   "induced_valence",    "induced_dominance"};
    for (const auto& name : expected)
        CHECK_MESSAGE(fs::exists(out / "measures" / (name + ".csv")), name);
    CHECK(fs::exists(out / "measures" / "ridge_metrics.csv"));

    auto series = read_csv(out / "series.csv");
    REQUIRE(series.size() > 1);
    CHECK(series[0] == std::vector<std::string>{"measure", "label", "year", "value", "n",
                                                "ci_low", "ci_high"});
    std::set<std::string> measures_seen;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const auto& row = series[i];
        REQUIRE(row.size() == 7);
        measures_seen.insert(row[0]);
        double value = *parse_double(row[3]);
        double lo = *parse_double(row[5]);
        double hi = *parse_double(row[6]);
        CHECK(lo <= value + 1e-15);
        CHECK(value <= hi + 1e-15);
    }
    CHECK(measures_seen.size() == expected.size());

    // only the configured report labels appear
    std::set<std::string> labels_seen;
    for (std::size_t i = 1; i < series.size(); ++i) labels_seen.insert(series[i][1]);
    for (const auto& l : labels_seen)
        CHECK((l == "gay" || l == "homosexual" || l == "lgbtq_all" || l == "american"));
}

TEST_CASE("per-run measure rows average to the summary row") {
    const fs::path& out = pipeline_out('a');

    for (const std::string name : {"neighbor_valence", "disgust_distance", "induced_valence"}) {
        auto rows = read_csv(out / "measures" / (name + ".csv"));
        REQUIRE(rows.size() > 1);
        CHECK(rows[0] == std::vector<std::string>{"measure", "label", "year", "run", "value",
                                                  "n"});
        std::map<std::string, std::vector<double>> run_values;
        std::map<std::string, std::pair<double, long long>> all_row;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            REQUIRE(row.size() == 6);
            CHECK(row[0] == name);
            std::string key = row[1] + "|" + row[2];
            if (row[3] == "all")
                all_row[key] = {*parse_double(row[4]), *parse_int(row[5])};
            else
                run_values[key].push_back(*parse_double(row[4]));
        }
        REQUIRE_FALSE(all_row.empty());
        for (const auto& [key, cell] : all_row) {
            const auto& values = run_values.at(key);
            CHECK(values.size() == 2); // runs = 2
            CHECK(cell.second == 2);
            double mean = (values[0] + values[1]) / 2.0;
            CHECK_MESSAGE(std::fabs(mean - cell.first) <= 1e-12, name << " " << key);
        }
    }

    // corpus-derived measures have no per-run sweep
    auto rows = read_csv(out / "measures" / "paragraph_valence.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "all");
}

TEST_CASE("extremes ranks candidate paragraphs in four modes") {
    const fs::path& out = pipeline_out('a');

    CHECK(fs::exists(out / "extremes" / "subset_valence.csv"));
    CHECK(fs::exists(out / "extremes" / "subset_dominance.csv"));

    json extremes = read_json(out / "extremes" / "extremes.json");
    CHECK(extremes["params"]["top"] == 5);
    CHECK(extremes["params"]["candidates"].get<int>() >= 1);
    REQUIRE(extremes.contains("modes"));
    for (const std::string mode :
         {"neighbor_valence", "neighbor_dominance", "disgust_cosine", "vermin_cosine"}) {
        REQUIRE_MESSAGE(extremes["modes"].contains(mode), mode);
        const json& m = extremes["modes"][mode];
        REQUIRE(m.contains("highest"));
        REQUIRE(m.contains("lowest"));
        CHECK(m["highest"].size() <= 5);
        CHECK(m["lowest"].size() >= 1);
        const json& first = m["highest"][0];
        CHECK(first.contains("id"));
        CHECK(first.contains("score"));
        CHECK(first["tokens"].get<int>() >= 15);
        CHECK(first["tokens"].get<int>() <= 75);
        // highest list descends, lowest list ascends
        double prev = first["score"].get<double>();
        for (const auto& e : m["highest"]) {
            CHECK(e["score"].get<double>() <= prev + 1e-15);
            prev = e["score"].get<double>();
        }
        prev = m["lowest"][0]["score"].get<double>();
        for (const auto& e : m["lowest"]) {
            CHECK(e["score"].get<double>() >= prev - 1e-15);
            prev = e["score"].get<double>();
        }
    }

    auto subset = read_csv(out / "extremes" / "subset_valence.csv");
    REQUIRE(subset.size() > 1);
    CHECK(subset[0] == std::vector<std::string>{"rank", "word", "cosine", "score"});
}

TEST_CASE("report writes charts, interval tables and trend statistics") {
    const fs::path& out = pipeline_out('a');

    auto stats = read_csv(out / "stats.csv");
    REQUIRE(stats.size() > 1);
    CHECK(stats[0] == std::vector<std::string>{"measure", "label", "comparison_or_trend",
                                               "range", "statistic", "p", "n", "method"});
    bool saw_trend = false;
    bool saw_wilcoxon = false;
    for (std::size_t i = 1; i < stats.size(); ++i) {
        const auto& row = stats[i];
        REQUIRE(row.size() == 8);
        if (row[2] == "trend") {
            saw_trend = true;
            CHECK(row[7] == "ols_t");
            CHECK(row[3] == "2000:2004");
        } else {
            saw_wilcoxon = true;
            CHECK(row[2].starts_with("wilcoxon_vs_"));
            CHECK((row[7] == "exact" || row[7] == "normal_approx"));
        }
        if (row[5] != "<1e-15") {
            double p = *parse_double(row[5]);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
    CHECK(saw_trend);
    CHECK(saw_wilcoxon);

    CHECK(fs::exists(out / "measures" / "paragraph_valence_intervals.csv"));
    auto intervals = read_csv(out / "measures" / "paragraph_valence_intervals.csv");
    REQUIRE(intervals.size() > 1);
    CHECK(intervals[0] == std::vector<std::string>{"measure", "label", "range", "value", "n",
                                                   "ci_low", "ci_high"});
    // fixture spans 2000..2004, one 5-year bin
    CHECK(intervals[1][2] == "2000-2004");

    int figures = 0;
    for (const auto& entry : fs::directory_iterator(out / "figures")) {
        ++figures;
        std::string svg = read_file(entry.path());
        auto err = dehum::testing::xml_error(svg);
        CHECK_MESSAGE(!err, entry.path().filename().string() << ": " << err.value_or(""));
    }
    CHECK(figures >= 10); // nine measures plus at least one interval chart

    json manifest = read_json(out / "manifest.json");
    CHECK(manifest["entries"]["stats.csv"]["command"] == "report");
    CHECK(manifest["entries"]["figures/paragraph_valence.svg"]["kind"] == "figure");
}

TEST_CASE("a second pipeline run reproduces every table byte for byte") {
    const fs::path& a = pipeline_out('a');
    const fs::path& b = pipeline_out('b');

    std::vector<fs::path> rel = {"series.csv", "stats.csv", "corpus_stats.csv",
                                 "label_totals.csv", "extremes/extremes.json",
                                 "extremes/subset_valence.csv"};
    for (const auto& entry : fs::directory_iterator(a / "measures"))
        rel.push_back(fs::path("measures") / entry.path().filename());

    for (const auto& r : rel) {
        CHECK_MESSAGE(read_file(a / r) == read_file(b / r), r.string());
    }
}

TEST_CASE("commands demand their prerequisites") {
    fs::path dir = fs::temp_directory_path() / "dehum_tests" / "pipeline_empty";
    fs::remove_all(dir);
    fs::create_directories(dir);
    PipelineConfig cfg = fixture_pipeline_config(dir);

    CHECK_THROWS_WITH_AS(cmd_train(cfg), doctest::Contains("run ingest first"), ConfigError);
    CHECK_THROWS_AS(cmd_measure(cfg), ConfigError);
    CHECK_THROWS_WITH_AS(cmd_report(cfg), doctest::Contains("run measure first"), ConfigError);
    CHECK_THROWS_AS(cmd_extremes(cfg), ConfigError);
}

TEST_CASE("ingest rejects a selection with no usable paragraphs") {
    fs::path dir = fs::temp_directory_path() / "dehum_tests" / "pipeline_none";
    fs::remove_all(dir);
    fs::create_directories(dir);
    PipelineConfig cfg = fixture_pipeline_config(dir);
    cfg.year_min = 1900;
    cfg.year_max = 1901;

    CHECK_THROWS_WITH_AS(cmd_ingest(cfg), doctest::Contains("empty corpus"), ConfigError);
}
