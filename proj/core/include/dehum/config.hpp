#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dehum/corpus.hpp"
#include "dehum/embeddings.hpp"

namespace dehum {

// Everything the pipeline commands need, with defaults for every knob.
// Loaded from a small TOML file; relative input paths resolve against the
// config file's directory, out_dir against the working directory.
struct PipelineConfig {
    std::filesystem::path config_dir;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
    int runs = 10;
    int workers = 1;

    // corpus
    std::filesystem::path corpus_input;
    std::string cache_name = "corpus_cache.jsonl";
    int year_min = 1986;
    int year_max = 2015;
    std::vector<std::string> section_blocklist;

    // labels; `labels` carries every configured label, aggregate members
    // reference canonical names, report_labels drive measurement output
    std::vector<LabelSet> labels;
    std::vector<std::string> aggregate_members;
    std::string aggregate_name = "lgbtq_all";
    std::vector<std::string> report_labels;

    // lexicons
    std::filesystem::path vad_path;
    std::filesystem::path perspective_path;
    std::filesystem::path agency_path;
    std::filesystem::path disgust_stems_path;
    std::vector<std::string> vermin_words;
    bool strip_label_forms = true;

    // dependency parses
    std::filesystem::path conllu_path;
    std::filesystem::path sentence_map_path;

    TrainConfig train;

    // measures
    std::vector<std::string> measures;
    std::vector<int> neighbor_k_values;
    int neighbor_k_default = 500;
    bool exclude_labels_from_neighbors = false;
    std::vector<std::string> neighbor_exclude_extra;
    double ridge_alpha = 1.0;

    // extreme paragraphs
    std::vector<std::string> extreme_required_labels;
    int extreme_top = 20;
    int extreme_min_tokens = 15;
    int extreme_max_tokens = 75;
    int extreme_neighbors = 500;

    // report
    double lowess_frac = 0.3;
    int lowess_iterations = 3;
    int bootstrap_resamples = 2000;
    double ci_level = 0.95;
    int interval_years = 5; // sparse measures are pooled into bins this wide
    std::vector<std::pair<int, int>> trend_ranges; // empty: derived from data

    std::filesystem::path cache_path() const { return out_dir / cache_name; }
    std::filesystem::path models_dir() const { return out_dir / "models"; }

    const LabelSet* find_label(const std::string& canonical) const;
    // The aggregate as a single label whose surface forms are the union of
    // its members' forms.
    LabelSet aggregate_label() const;
    // labels + aggregate, the set measurements group by.
    std::vector<LabelSet> measurement_labels() const;
    // Surface forms of aggregate members (for lexicon stripping and
    // neighbor exclusion).
    std::vector<std::string> aggregate_surface_forms() const;

    void validate() const;
};

PipelineConfig default_pipeline_config();
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

} // namespace dehum
