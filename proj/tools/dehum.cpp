#include "dehum/config.hpp"
#include "dehum/error.hpp"
#include "dehum/log.hpp"
#include "dehum/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline configuration file")
        ->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
    cmd->add_option("--seed", opts.seed, "base seed (overrides the config)");
    cmd->add_option("--workers", opts.workers, "trainer thread count (overrides the config)");
}

dehum::PipelineConfig load_config(const CommonOptions& opts) {
    dehum::PipelineConfig cfg = dehum::load_pipeline_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.workers > 0) cfg.workers = opts.workers;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dehum: diachronic corpus measures of dehumanizing language"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::function<void(const dehum::PipelineConfig&)> action;

    auto wire = [&](const char* name, const char* help,
                    void (*fn)(const dehum::PipelineConfig&)) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, opts);
        cmd->callback([&action, fn] { action = fn; });
    };
    wire("ingest", "filter the corpus and build the paragraph cache", dehum::cmd_ingest);
    wire("train", "train full-corpus and per-year embedding models", dehum::cmd_train);
    wire("measure", "compute the enabled measures from cache, parses and models",
         dehum::cmd_measure);
    wire("extremes", "rank the most extreme paragraphs under each mode", dehum::cmd_extremes);
    wire("report", "render figures and the statistical report", dehum::cmd_report);

    CLI11_PARSE(app, argc, argv);

    try {
        action(load_config(opts));
    } catch (const dehum::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
