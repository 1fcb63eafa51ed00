#include "dehum/pipeline.hpp"

#include "dehum/csv.hpp"
#include "dehum/embeddings.hpp"
#include "dehum/error.hpp"
#include "dehum/lexicons.hpp"
#include "dehum/log.hpp"
#include "dehum/measures.hpp"
#include "dehum/rng.hpp"
#include "dehum/stats.hpp"
#include "dehum/strings.hpp"
#include "dehum/svg_chart.hpp"
#include "dehum/syntax.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dehum {

namespace {

using json = nlohmann::json;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void require_input(const std::filesystem::path& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " is not configured");
    if (!std::filesystem::exists(path))
        throw ConfigError(what + " not found: " + path.string());
}

json load_manifest(const PipelineConfig& cfg) {
    auto path = cfg.out_dir / "manifest.json";
    if (!std::filesystem::exists(path)) {
        json m;
        m["version"] = 1;
        m["entries"] = json::object();
        return m;
    }
    std::ifstream in(path);
    json m = json::parse(in);
    if (!m.contains("entries")) m["entries"] = json::object();
    return m;
}

void save_manifest(const PipelineConfig& cfg, const json& manifest) {
    std::filesystem::create_directories(cfg.out_dir);
    auto path = cfg.out_dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

void add_entry(json& manifest, const std::string& relpath, json fields) {
    manifest["entries"][relpath] = std::move(fields);
}

std::vector<LabelSet> report_label_sets(const PipelineConfig& cfg) {
    std::vector<LabelSet> out;
    for (const auto& name : cfg.report_labels) {
        if (name == cfg.aggregate_name) {
            out.push_back(cfg.aggregate_label());
        } else if (const LabelSet* l = cfg.find_label(name)) {
            out.push_back(*l);
        } else {
            throw ConfigError("report label '" + name + "' is not configured");
        }
    }
    return out;
}

std::unordered_set<std::string> all_label_forms(const PipelineConfig& cfg) {
    std::unordered_set<std::string> forms;
    for (const auto& l : cfg.labels)
        for (const auto& f : l.surface_forms) forms.insert(lower_ascii(f));
    return forms;
}

std::string model_filename(int run, std::optional<int> year) {
    if (year) return "y" + std::to_string(*year) + "_r" + std::to_string(run) + ".dhem";
    return "full_r" + std::to_string(run) + ".dhem";
}

std::string range_string(int lo, int hi) {
    return std::to_string(lo) + ":" + std::to_string(hi);
}

std::vector<Paragraph> load_cache(const PipelineConfig& cfg) {
    auto path = cfg.cache_path();
    if (!std::filesystem::exists(path))
        throw ConfigError("corpus cache not found (run ingest first): " + path.string());
    return read_corpus_cache(path);
}

TrainConfig effective_train_config(const PipelineConfig& cfg) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.workers = cfg.workers;
    return tc;
}

json train_settings_json(const PipelineConfig& cfg) {
    TrainConfig tc = effective_train_config(cfg);
    json j;
    j["dim"] = tc.dim;
    j["window"] = tc.window;
    j["epochs"] = tc.epochs;
    j["negative_samples"] = tc.negative_samples;
    j["min_count"] = tc.min_count;
    j["subsample_threshold"] = tc.subsample_threshold;
    j["initial_lr"] = tc.initial_lr;
    j["min_lr"] = tc.min_lr;
    j["seed"] = tc.seed;
    j["workers"] = tc.workers;
    j["runs"] = cfg.runs;
    return j;
}

} // namespace

void cmd_ingest(const PipelineConfig& cfg) {
    require_input(cfg.corpus_input, "corpus input");

    const std::vector<LabelSet> labels = cfg.measurement_labels();
    const std::unordered_set<std::string> blocklist(cfg.section_blocklist.begin(),
                                                    cfg.section_blocklist.end());
    IngestOptions options;
    options.year_min = cfg.year_min;
    options.year_max = cfg.year_max;

    std::vector<Paragraph> retained;
    CorpusStats stats;
    ingest_corpus(cfg.corpus_input, options, [&](Paragraph&& p) {
        auto matched = match_labels(p, labels);
        if (!retain_paragraph(p, matched, blocklist)) return;
        stats.add(p, matched);
        retained.push_back(std::move(p));
    });
    if (retained.empty()) throw ConfigError("empty corpus");

    std::filesystem::create_directories(cfg.out_dir);
    write_corpus_cache(cfg.cache_path(), retained);
    write_stats_csv(cfg.out_dir / "corpus_stats.csv", stats);
    write_label_totals_csv(cfg.out_dir / "label_totals.csv", stats);

    json manifest = load_manifest(cfg);
    add_entry(manifest, cfg.cache_name, {{"kind", "corpus_cache"}, {"command", "ingest"}});
    add_entry(manifest, "corpus_stats.csv", {{"kind", "csv"}, {"command", "ingest"}});
    add_entry(manifest, "label_totals.csv", {{"kind", "csv"}, {"command", "ingest"}});
    save_manifest(cfg, manifest);

    std::cout << stats.paragraph_count << " paragraphs and " << stats.token_count << " tokens\n";
}

void cmd_train(const PipelineConfig& cfg) {
    std::vector<Paragraph> paragraphs = load_cache(cfg);

    std::map<int, std::vector<std::vector<std::string>>> by_year;
    for (auto& p : paragraphs) by_year[p.year].push_back(p.tokens);

    const TrainConfig tc = effective_train_config(cfg);
    std::filesystem::create_directories(cfg.models_dir());

    json manifest = load_manifest(cfg);
    manifest["train"] = train_settings_json(cfg);

    int written = 0;
    train_diachronic(by_year, tc, cfg.runs,
                     [&](int run, std::optional<int> year, EmbeddingModel&& model) {
                         const std::string name = model_filename(run, year);
                         save_model(model, cfg.models_dir() / name);
                         json entry;
                         entry["kind"] = "model";
                         entry["command"] = "train";
                         entry["run"] = run;
                         if (year)
                             entry["year"] = *year;
                         else
                             entry["year"] = nullptr;
                         entry["seed"] = model.config.seed;
                         entry["vocab"] = model.vocab_size();
                         entry["corpus_tokens"] = model.corpus_tokens;
                         entry["epoch_losses"] = model.epoch_losses;
                         add_entry(manifest, "models/" + name, std::move(entry));
                         ++written;
                     });
    save_manifest(cfg, manifest);
    log_info("train: wrote " + std::to_string(written) + " model files to " +
             cfg.models_dir().string());
}

namespace {

struct MeasureCell {
    double value = 0;
    std::int64_t n = 0;
};

// One output series: per-run cells for embedding measures, a direct summary
// for corpus measures, and the raw observations behind each (label, year)
// point for bootstrap intervals.
struct MeasureTable {
    bool per_run = false;
    std::map<std::string, std::map<int, std::map<int, MeasureCell>>> runs;
    std::map<std::string, std::map<int, MeasureCell>> summary;
    std::map<std::string, std::map<int, std::vector<double>>> observations;
};

void finalize_summaries(MeasureTable& table) {
    if (!table.per_run) return;
    for (const auto& [label, years] : table.runs) {
        for (const auto& [year, cells] : years) {
            double sum = 0;
            for (const auto& [run, cell] : cells) sum += cell.value;
            MeasureCell s;
            s.value = sum / static_cast<double>(cells.size());
            s.n = static_cast<std::int64_t>(cells.size());
            table.summary[label][year] = s;
        }
    }
}

std::uint64_t ci_seed(const PipelineConfig& cfg, const std::string& measure,
                      const std::string& label, int year) {
    std::uint64_t tag = fnv1a(measure + "\x1f" + label) ^ static_cast<std::uint64_t>(year);
    return mix_seed(mix_seed(cfg.seed, 0xB007), tag);
}

} // namespace

void cmd_measure(const PipelineConfig& cfg) {
    std::vector<Paragraph> paragraphs = load_cache(cfg);
    const std::vector<LabelSet> labels = report_label_sets(cfg);

    std::unordered_set<std::string> enabled(cfg.measures.begin(), cfg.measures.end());
    auto on = [&](const char* m) { return enabled.count(m) > 0; };

    // output measure names in config order, k sweeps expanded
    std::vector<std::string> order;
    auto add_order = [&](const std::string& name) {
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    };
    auto k_name = [&](const std::string& base, int k) {
        return k == cfg.neighbor_k_default ? base : base + "_k" + std::to_string(k);
    };
    for (const auto& m : cfg.measures) {
        if (m == "neighbor_valence" || m == "neighbor_dominance") {
            for (int k : cfg.neighbor_k_values) add_order(k_name(m, k));
        } else {
            add_order(m);
        }
    }

    std::map<std::string, MeasureTable> tables;

    const bool need_valence = on("paragraph_valence") || on("neighbor_valence") ||
                              on("induced_valence");
    const bool need_dominance = on("neighbor_dominance") || on("induced_dominance");
    AffectLexicon valence;
    AffectLexicon dominance;
    if (need_valence) {
        require_input(cfg.vad_path, "affect lexicon (lexicons.vad)");
        valence = load_affect_lexicon(cfg.vad_path, AffectDimension::valence);
    }
    if (need_dominance) {
        require_input(cfg.vad_path, "affect lexicon (lexicons.vad)");
        dominance = load_affect_lexicon(cfg.vad_path, AffectDimension::dominance);
    }

    if (on("paragraph_valence")) {
        AffectLexicon scoring = cfg.strip_label_forms
                                    ? strip_words(valence, all_label_forms(cfg))
                                    : valence;
        MeasureTable& table = tables["paragraph_valence"];
        for (const auto& p : paragraphs) {
            auto matched = match_labels(p, labels);
            if (matched.empty()) continue;
            auto score = paragraph_affect(p, scoring);
            if (!score) continue;
            for (const auto& name : matched)
                table.observations[name][p.year].push_back(*score);
        }
        for (const auto& [label, years] : table.observations) {
            for (const auto& [year, values] : years) {
                MeasureCell cell;
                for (double v : values) cell.value += v;
                cell.value /= static_cast<double>(values.size());
                cell.n = static_cast<std::int64_t>(values.size());
                table.summary[label][year] = cell;
            }
        }
    }

    if (on("perspective") || on("agency")) {
        require_input(cfg.conllu_path, "dependency parses (syntax.conllu)");
        std::vector<ParsedSentence> sentences = read_conllu(cfg.conllu_path);
        if (!cfg.sentence_map_path.empty()) {
            require_input(cfg.sentence_map_path, "sentence map (syntax.sentence_map)");
            apply_sentence_map(sentences, load_sentence_map(cfg.sentence_map_path));
        }
        std::unordered_map<std::string, int> year_of;
        for (const auto& p : paragraphs) year_of.emplace(p.id, p.year);
        std::int64_t unmatched = 0;
        std::vector<ParsedSentence> usable;
        usable.reserve(sentences.size());
        for (auto& s : sentences) {
            auto it = year_of.find(s.paragraph_id);
            if (it == year_of.end()) {
                ++unmatched;
                continue;
            }
            s.year = it->second;
            usable.push_back(std::move(s));
        }
        if (unmatched > 0)
            log_warn("measure: " + std::to_string(unmatched) +
                     " parsed sentences have no cached paragraph and were skipped");

        if (on("perspective")) {
            require_input(cfg.perspective_path, "perspective lexicon (lexicons.perspective)");
            PerspectiveLexicon plex = load_perspective_lexicon(cfg.perspective_path);
            std::vector<SvoTuple> tuples;
            for (const auto& s : usable) {
                auto t = extract_svo(s);
                tuples.insert(tuples.end(), t.begin(), t.end());
            }
            GroupedObservations grouped = perspective_scores(tuples, plex, labels);
            if (grouped.verbs_unlexiconed > 0)
                log_info("measure: perspective skipped " +
                         std::to_string(grouped.verbs_unlexiconed) + " unlexiconed verbs");
            MeasureTable& table = tables["perspective"];
            for (auto& [key, values] : grouped.values) {
                MeasureCell cell;
                for (double v : values) cell.value += v;
                cell.value /= static_cast<double>(values.size());
                cell.n = static_cast<std::int64_t>(values.size());
                table.summary[key.second][key.first] = cell;
                table.observations[key.second][key.first] = std::move(values);
            }
        }

        if (on("agency")) {
            require_input(cfg.agency_path, "agency lexicon (lexicons.agency)");
            AgencyLexicon alex = load_agency_lexicon(cfg.agency_path);
            std::vector<SvPair> pairs;
            for (const auto& s : usable) {
                auto t = extract_subject_verb(s);
                pairs.insert(pairs.end(), t.begin(), t.end());
            }
            AgencyCounts counts = agency_fractions(pairs, alex, labels);
            if (counts.verbs_unlexiconed > 0)
                log_info("measure: agency skipped " +
                         std::to_string(counts.verbs_unlexiconed) + " unlexiconed verbs");
            MeasureTable& table = tables["agency"];
            for (const auto& [key, cell] : counts.cells) {
                if (cell.total == 0) continue;
                MeasureCell out;
                out.value = cell.fraction();
                out.n = cell.total;
                table.summary[key.second][key.first] = out;
                std::vector<double> bits(static_cast<std::size_t>(cell.total), 0.0);
                std::fill_n(bits.begin(), static_cast<std::size_t>(cell.positive), 1.0);
                table.observations[key.second][key.first] = std::move(bits);
            }
        }
    }

    const bool need_models = on("neighbor_valence") || on("neighbor_dominance") ||
                             on("disgust_distance") || on("vermin_distance") ||
                             on("induced_valence") || on("induced_dominance");
    std::vector<std::vector<std::string>> ridge_rows;
    if (need_models) {
        StemDictionary disgust_stems;
        if (on("disgust_distance")) {
            require_input(cfg.disgust_stems_path, "disgust stem dictionary (lexicons.disgust_stems)");
            disgust_stems = load_stem_dictionary(cfg.disgust_stems_path, "moral_disgust");
        }
        if (on("vermin_distance") && cfg.vermin_words.empty())
            throw ConfigError("vermin_distance needs lexicons.vermin_words");

        std::unordered_set<std::string> exclude;
        if (cfg.exclude_labels_from_neighbors) {
            exclude = all_label_forms(cfg);
            for (const auto& w : cfg.neighbor_exclude_extra) exclude.insert(lower_ascii(w));
        }

        if (!std::filesystem::exists(cfg.models_dir() / model_filename(0, std::nullopt)))
            throw ConfigError("model files not found (run train first): " +
                              (cfg.models_dir() / model_filename(0, std::nullopt)).string());

        std::set<int> years;
        for (const auto& p : paragraphs) years.insert(p.year);

        for (int run = 0; run < cfg.runs; ++run) {
            for (int year : years) {
                auto path = cfg.models_dir() / model_filename(run, year);
                if (!std::filesystem::exists(path)) {
                    log_warn("measure: missing model " + path.string() + ", skipping");
                    continue;
                }
                EmbeddingModel model = load_model(path);
                postprocess(model);

                std::optional<ConceptVector> disgust;
                if (on("disgust_distance")) disgust = concept_vector_from_stems(model, disgust_stems);
                std::optional<ConceptVector> vermin;
                if (on("vermin_distance"))
                    vermin = concept_vector_from_words(model, "vermin", cfg.vermin_words);

                std::optional<RidgeModel> ridge_v;
                std::optional<RidgeModel> ridge_d;
                auto ridge_for = [&](AffectDimension dim) -> const RidgeModel& {
                    auto& slot = dim == AffectDimension::valence ? ridge_v : ridge_d;
                    if (!slot) {
                        const AffectLexicon& lex =
                            dim == AffectDimension::valence ? valence : dominance;
                        std::uint64_t salt = static_cast<std::uint64_t>(run) * 65536 +
                                             static_cast<std::uint64_t>(year) * 2 +
                                             (dim == AffectDimension::valence ? 0 : 1);
                        slot = fit_ridge_regression(model, lex, cfg.ridge_alpha,
                                                    mix_seed(mix_seed(cfg.seed, 0x51D6E), salt));
                        ridge_rows.push_back({std::string(to_string(dim)), std::to_string(year),
                                              std::to_string(run), format_double(slot->alpha),
                                              std::to_string(slot->n_train),
                                              std::to_string(slot->n_test),
                                              format_double(slot->train_pearson),
                                              format_double(slot->train_r2),
                                              format_double(slot->test_pearson),
                                              format_double(slot->test_r2)});
                    }
                    return *slot;
                };

                for (const auto& label : labels) {
                    auto lv = label_vector(model, label);
                    if (!lv) continue;
                    auto record = [&](const std::string& name, double value, std::int64_t n) {
                        MeasureTable& table = tables[name];
                        table.per_run = true;
                        table.runs[label.canonical][year][run] = {value, n};
                        table.observations[label.canonical][year].push_back(value);
                    };
                    if (on("neighbor_valence")) {
                        for (int k : cfg.neighbor_k_values) {
                            auto r = neighbor_affect(model, *lv,
                                                     static_cast<std::size_t>(k), valence, exclude);
                            record(k_name("neighbor_valence", k), r.mean,
                                   static_cast<std::int64_t>(r.lexicon_hits));
                        }
                    }
                    if (on("neighbor_dominance")) {
                        for (int k : cfg.neighbor_k_values) {
                            auto r = neighbor_affect(model, *lv,
                                                     static_cast<std::size_t>(k), dominance,
                                                     exclude);
                            record(k_name("neighbor_dominance", k), r.mean,
                                   static_cast<std::int64_t>(r.lexicon_hits));
                        }
                    }
                    if (on("disgust_distance") && disgust)
                        record("disgust_distance", concept_distance(*lv, *disgust),
                               static_cast<std::int64_t>(disgust->member_words.size()));
                    if (on("vermin_distance") && vermin)
                        record("vermin_distance", concept_distance(*lv, *vermin),
                               static_cast<std::int64_t>(vermin->member_words.size()));
                    if (on("induced_valence")) {
                        const RidgeModel& r = ridge_for(AffectDimension::valence);
                        record("induced_valence", predict_affect(r, *lv), r.n_train + r.n_test);
                    }
                    if (on("induced_dominance")) {
                        const RidgeModel& r = ridge_for(AffectDimension::dominance);
                        record("induced_dominance", predict_affect(r, *lv), r.n_train + r.n_test);
                    }
                }
            }
        }
    }

    for (auto& [name, table] : tables) finalize_summaries(table);

    std::filesystem::create_directories(cfg.out_dir / "measures");
    json manifest = load_manifest(cfg);

    for (const auto& name : order) {
        auto it = tables.find(name);
        if (it == tables.end()) continue;
        const MeasureTable& table = it->second;
        CsvWriter csv(cfg.out_dir / "measures" / (name + ".csv"));
        csv.write_row({"measure", "label", "year", "run", "value", "n"});
        for (const auto& label : cfg.report_labels) {
            auto lit = table.summary.find(label);
            if (lit == table.summary.end()) continue;
            for (const auto& [year, cell] : lit->second) {
                if (table.per_run) {
                    for (const auto& [run, rcell] : table.runs.at(label).at(year))
                        csv.write_row({name, label, std::to_string(year), std::to_string(run),
                                       format_double(rcell.value), std::to_string(rcell.n)});
                }
                csv.write_row({name, label, std::to_string(year), "all",
                               format_double(cell.value), std::to_string(cell.n)});
            }
        }
        csv.close();
        add_entry(manifest, "measures/" + name + ".csv",
                  {{"kind", "csv"}, {"command", "measure"}});
    }

    {
        CsvWriter csv(cfg.out_dir / "series.csv");
        csv.write_row({"measure", "label", "year", "value", "n", "ci_low", "ci_high"});
        for (const auto& name : order) {
            auto it = tables.find(name);
            if (it == tables.end()) continue;
            const MeasureTable& table = it->second;
            for (const auto& label : cfg.report_labels) {
                auto lit = table.summary.find(label);
                if (lit == table.summary.end()) continue;
                for (const auto& [year, cell] : lit->second) {
                    const auto& obs = table.observations.at(label).at(year);
                    MeanCi ci = mean_ci(obs, cfg.ci_level, CiMethod::bootstrap_percentile,
                                        cfg.bootstrap_resamples, ci_seed(cfg, name, label, year));
                    double lo = std::min(ci.low, cell.value);
                    double hi = std::max(ci.high, cell.value);
                    csv.write_row({name, label, std::to_string(year), format_double(cell.value),
                                   std::to_string(cell.n), format_double(lo), format_double(hi)});
                }
            }
        }
        csv.close();
        add_entry(manifest, "series.csv", {{"kind", "csv"}, {"command", "measure"}});
    }

    if (!ridge_rows.empty()) {
        CsvWriter csv(cfg.out_dir / "measures" / "ridge_metrics.csv");
        csv.write_row({"dimension", "year", "run", "alpha", "n_train", "n_test", "train_pearson",
                       "train_r2", "test_pearson", "test_r2"});
        for (const auto& row : ridge_rows) csv.write_row(row);
        csv.close();
        add_entry(manifest, "measures/ridge_metrics.csv",
                  {{"kind", "csv"}, {"command", "measure"}});
    }

    save_manifest(cfg, manifest);
    log_info("measure: wrote " + std::to_string(order.size()) + " measure series");
}

void cmd_extremes(const PipelineConfig& cfg) {
    std::vector<Paragraph> paragraphs = load_cache(cfg);

    auto model_path = cfg.models_dir() / model_filename(0, std::nullopt);
    if (!std::filesystem::exists(model_path))
        throw ConfigError("model files not found (run train first): " + model_path.string());
    EmbeddingModel model = load_model(model_path);
    postprocess(model);

    auto aggregate = cfg.aggregate_label();
    auto lv = label_vector(model, aggregate);
    if (!lv)
        throw Error("no surface form of '" + aggregate.canonical + "' is in the vocabulary");

    require_input(cfg.vad_path, "affect lexicon (lexicons.vad)");
    AffectLexicon valence = load_affect_lexicon(cfg.vad_path, AffectDimension::valence);
    AffectLexicon dominance = load_affect_lexicon(cfg.vad_path, AffectDimension::dominance);
    require_input(cfg.disgust_stems_path, "disgust stem dictionary (lexicons.disgust_stems)");
    StemDictionary disgust_stems = load_stem_dictionary(cfg.disgust_stems_path, "moral_disgust");
    if (cfg.vermin_words.empty()) throw ConfigError("extremes needs lexicons.vermin_words");

    auto neighbors =
        nearest_neighbors(model, *lv, static_cast<std::size_t>(cfg.extreme_neighbors), {});

    std::filesystem::create_directories(cfg.out_dir / "extremes");
    // V_s and D_s: the neighbor set intersected with each affect lexicon
    auto subset = [&](const AffectLexicon& lex, const std::string& filename) {
        std::unordered_map<std::string, double> entries;
        CsvWriter csv(cfg.out_dir / "extremes" / filename);
        csv.write_row({"rank", "word", "cosine", "score"});
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            const std::string& word = model.words[neighbors[i].index];
            auto score = lex.get(word);
            if (!score) continue;
            entries.emplace(word, *score);
            csv.write_row({std::to_string(i + 1), word, format_double(neighbors[i].cosine),
                           format_double(*score)});
        }
        csv.close();
        return AffectLexicon(lex.dimension(), std::move(entries));
    };
    AffectLexicon v_s = subset(valence, "subset_valence.csv");
    AffectLexicon d_s = subset(dominance, "subset_dominance.csv");

    ExtremeFilter filter;
    filter.min_tokens = static_cast<std::size_t>(cfg.extreme_min_tokens);
    filter.max_tokens = static_cast<std::size_t>(cfg.extreme_max_tokens);
    for (const auto& name : cfg.extreme_required_labels) {
        const LabelSet* l = cfg.find_label(name);
        if (l == nullptr) throw ConfigError("extremes label '" + name + "' is not configured");
        filter.required.push_back(*l);
    }
    std::vector<std::size_t> candidate_indices = filter_extreme_candidates(paragraphs, filter);
    if (candidate_indices.empty()) throw Error("no paragraphs qualify for extreme ranking");
    if (candidate_indices.size() < 2 * static_cast<std::size_t>(cfg.extreme_top))
        log_warn("extremes: only " + std::to_string(candidate_indices.size()) +
                 " qualifying paragraphs, extremes will overlap");

    std::vector<Paragraph> candidates;
    candidates.reserve(candidate_indices.size());
    for (std::size_t idx : candidate_indices) candidates.push_back(paragraphs[idx]);

    auto disgust = concept_vector_from_stems(model, disgust_stems);
    if (!disgust) throw Error("no vocabulary word matches the disgust stem dictionary");
    auto vermin = concept_vector_from_words(model, "vermin", cfg.vermin_words);
    if (!vermin) throw Error("no vermin word is in the vocabulary");

    TfidfStats tfidf = compute_tfidf(candidates);
    ParagraphMatrix embedded = paragraph_embeddings(model, candidates, tfidf);

    auto rank_lexicon = [&](const AffectLexicon& lex) {
        std::vector<RankedParagraph> scored;
        scored.reserve(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scored.push_back({i, lexicon_mean_score(candidates[i], lex)});
        return rank_paragraphs(std::move(scored));
    };
    auto rank_concept = [&](const ConceptVector& target) {
        std::vector<RankedParagraph> scored;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (embedded.empty_row[i]) continue;
            scored.push_back({i, cosine_similarity(embedded.row(i), target.direction)});
        }
        if (scored.empty()) throw Error("no candidate paragraph has an embedding");
        return rank_paragraphs(std::move(scored));
    };

    auto to_entries = [&](const std::vector<RankedParagraph>& ranked, bool highest) {
        json arr = json::array();
        std::size_t take = std::min(ranked.size(), static_cast<std::size_t>(cfg.extreme_top));
        for (std::size_t i = 0; i < take; ++i) {
            const RankedParagraph& r = highest ? ranked[i] : ranked[ranked.size() - 1 - i];
            const Paragraph& p = candidates[r.index];
            json e;
            e["id"] = p.id;
            e["year"] = p.year;
            e["score"] = r.score;
            e["tokens"] = p.tokens.size();
            e["text"] = p.raw_text;
            arr.push_back(std::move(e));
        }
        return arr;
    };
    auto mode_json = [&](const std::vector<RankedParagraph>& ranked) {
        json m;
        m["highest"] = to_entries(ranked, true);
        m["lowest"] = to_entries(ranked, false);
        return m;
    };

    json out;
    out["params"] = {{"model", "models/" + model_filename(0, std::nullopt)},
                     {"aggregate", aggregate.canonical},
                     {"neighbors", cfg.extreme_neighbors},
                     {"min_tokens", cfg.extreme_min_tokens},
                     {"max_tokens", cfg.extreme_max_tokens},
                     {"top", cfg.extreme_top},
                     {"required_labels", cfg.extreme_required_labels},
                     {"candidates", candidate_indices.size()}};
    out["modes"]["neighbor_valence"] = mode_json(rank_lexicon(v_s));
    out["modes"]["neighbor_dominance"] = mode_json(rank_lexicon(d_s));
    out["modes"]["disgust_cosine"] = mode_json(rank_concept(*disgust));
    out["modes"]["vermin_cosine"] = mode_json(rank_concept(*vermin));

    auto json_path = cfg.out_dir / "extremes" / "extremes.json";
    std::ofstream js(json_path);
    if (!js) throw Error("cannot write " + json_path.string());
    js << out.dump(2) << '\n';
    js.close();

    json manifest = load_manifest(cfg);
    add_entry(manifest, "extremes/extremes.json", {{"kind", "json"}, {"command", "extremes"}});
    add_entry(manifest, "extremes/subset_valence.csv",
              {{"kind", "csv"}, {"command", "extremes"}});
    add_entry(manifest, "extremes/subset_dominance.csv",
              {{"kind", "csv"}, {"command", "extremes"}});
    save_manifest(cfg, manifest);
    log_info("extremes: ranked " + std::to_string(candidate_indices.size()) +
             " candidate paragraphs");
}

namespace {

struct SeriesPoint {
    int year = 0;
    double value = 0;
    std::int64_t n = 0;
    double ci_low = 0;
    double ci_high = 0;
};

struct SeriesFile {
    std::vector<std::string> measure_order;
    // measure -> label -> points ascending by year
    std::map<std::string, std::map<std::string, std::vector<SeriesPoint>>> data;
};

SeriesFile read_series(const std::filesystem::path& path) {
    auto rows = read_csv(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"measure", "label", "year", "value",
                                                            "n", "ci_low", "ci_high"})
        throw Error("unexpected series header in " + path.string());
    SeriesFile out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 7) throw ParseError("bad series row", i + 1);
        auto year = parse_int(row[2]);
        auto value = parse_double(row[3]);
        auto n = parse_int(row[4]);
        auto lo = parse_double(row[5]);
        auto hi = parse_double(row[6]);
        if (!year || !value || !n || !lo || !hi) throw ParseError("bad series row", i + 1);
        if (!out.data.count(row[0])) out.measure_order.push_back(row[0]);
        out.data[row[0]][row[1]].push_back(
            {static_cast<int>(*year), *value, *n, *lo, *hi});
    }
    for (auto& [measure, by_label] : out.data)
        for (auto& [label, points] : by_label)
            std::sort(points.begin(), points.end(),
                      [](const SeriesPoint& a, const SeriesPoint& b) { return a.year < b.year; });
    return out;
}

// report_labels order first, then any remaining labels alphabetically
std::vector<std::string> ordered_labels(const PipelineConfig& cfg,
                                        const std::map<std::string, std::vector<SeriesPoint>>& m) {
    std::vector<std::string> out;
    for (const auto& name : cfg.report_labels)
        if (m.count(name)) out.push_back(name);
    for (const auto& [name, _] : m)
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    return out;
}

std::string format_p(double p) {
    return p <= 0 ? std::string("<1e-15") : format_double(p);
}

} // namespace

void cmd_report(const PipelineConfig& cfg) {
    auto series_path = cfg.out_dir / "series.csv";
    if (!std::filesystem::exists(series_path))
        throw ConfigError("series.csv not found (run measure first): " + series_path.string());
    SeriesFile series = read_series(series_path);

    std::filesystem::create_directories(cfg.out_dir / "figures");
    json manifest = load_manifest(cfg);

    for (const auto& measure : series.measure_order) {
        const auto& by_label = series.data.at(measure);
        ChartSpec spec;
        spec.title = measure;
        spec.x_label = "year";
        spec.y_label = measure;
        std::vector<ChartSeries> chart;
        for (const auto& label : ordered_labels(cfg, by_label)) {
            const auto& points = by_label.at(label);
            ChartSeries s;
            s.name = label;
            std::vector<double> xs;
            std::vector<double> ys;
            for (const auto& p : points) {
                s.points.push_back({static_cast<double>(p.year), p.value, p.ci_low, p.ci_high,
                                    true});
                xs.push_back(static_cast<double>(p.year));
                ys.push_back(p.value);
            }
            if (points.size() >= 3)
                s.smoothed = lowess(xs, ys, cfg.lowess_frac, cfg.lowess_iterations);
            chart.push_back(std::move(s));
        }
        std::string svg = render_line_chart(spec, chart);
        auto fig_path = cfg.out_dir / "figures" / (measure + ".svg");
        std::ofstream out(fig_path);
        if (!out) throw Error("cannot write " + fig_path.string());
        out << svg;
        out.close();
        add_entry(manifest, "figures/" + measure + ".svg",
                  {{"kind", "figure"}, {"command", "report"}, {"source", "series.csv"}});
    }

    // interval regrouping for the sparse per-paragraph and per-tuple measures:
    // bin values pool the underlying observations exactly (n-weighted means);
    // bin intervals bootstrap the yearly means, an approximation
    static const std::vector<std::string> interval_measures = {"paragraph_valence", "perspective",
                                                               "agency"};
    for (const auto& measure : interval_measures) {
        auto mit = series.data.find(measure);
        if (mit == series.data.end()) continue;
        std::filesystem::create_directories(cfg.out_dir / "measures");
        CsvWriter csv(cfg.out_dir / "measures" / (measure + "_intervals.csv"));
        csv.write_row({"measure", "label", "range", "value", "n", "ci_low", "ci_high"});
        ChartSpec spec;
        spec.title = measure + " (" + std::to_string(cfg.interval_years) + "-year intervals)";
        spec.x_label = "interval start year";
        spec.y_label = measure;
        std::vector<ChartSeries> chart;
        for (const auto& label : ordered_labels(cfg, mit->second)) {
            const auto& points = mit->second.at(label);
            std::map<int, std::vector<const SeriesPoint*>> bins;
            for (const auto& p : points) {
                int offset = p.year - cfg.year_min;
                int start = cfg.year_min + (offset / cfg.interval_years) * cfg.interval_years;
                if (offset < 0) start = p.year; // years before year_min: own bin
                bins[start].push_back(&p);
            }
            ChartSeries s;
            s.name = label;
            for (const auto& [start, members] : bins) {
                double weighted = 0;
                std::int64_t total = 0;
                std::vector<double> year_means;
                for (const SeriesPoint* p : members) {
                    weighted += p->value * static_cast<double>(p->n);
                    total += p->n;
                    year_means.push_back(p->value);
                }
                if (total == 0) continue;
                double value = weighted / static_cast<double>(total);
                MeanCi ci = mean_ci(year_means, cfg.ci_level, CiMethod::bootstrap_percentile,
                                    cfg.bootstrap_resamples,
                                    ci_seed(cfg, measure + "_intervals", label, start));
                double lo = std::min(ci.low, value);
                double hi = std::max(ci.high, value);
                int end = start + cfg.interval_years - 1;
                csv.write_row({measure, label, std::to_string(start) + "-" + std::to_string(end),
                               format_double(value), std::to_string(total), format_double(lo),
                               format_double(hi)});
                s.points.push_back({static_cast<double>(start), value, lo, hi, true});
            }
            if (!s.points.empty()) chart.push_back(std::move(s));
        }
        csv.close();
        add_entry(manifest, "measures/" + measure + "_intervals.csv",
                  {{"kind", "csv"}, {"command", "report"}});
        if (!chart.empty()) {
            std::string svg = render_line_chart(spec, chart);
            auto fig_path = cfg.out_dir / "figures" / (measure + "_intervals.svg");
            std::ofstream out(fig_path);
            if (!out) throw Error("cannot write " + fig_path.string());
            out << svg;
            out.close();
            add_entry(manifest, "figures/" + measure + "_intervals.svg",
                      {{"kind", "figure"},
                       {"command", "report"},
                       {"source", "measures/" + measure + "_intervals.csv"}});
        }
    }

    {
        CsvWriter csv(cfg.out_dir / "stats.csv");
        csv.write_row(
            {"measure", "label", "comparison_or_trend", "range", "statistic", "p", "n", "method"});
        for (const auto& measure : series.measure_order) {
            const auto& by_label = series.data.at(measure);
            std::vector<std::string> labels = ordered_labels(cfg, by_label);

            for (const auto& label : labels) {
                const auto& points = by_label.at(label);
                if (points.size() < 3) continue;
                int lo_year = points.front().year;
                int hi_year = points.back().year;
                std::vector<std::pair<int, int>> ranges;
                ranges.emplace_back(lo_year, hi_year);
                if (hi_year - lo_year + 1 >= 16) ranges.emplace_back(hi_year - 14, hi_year);
                for (const auto& r : cfg.trend_ranges) ranges.push_back(r);
                std::sort(ranges.begin(), ranges.end());
                ranges.erase(std::unique(ranges.begin(), ranges.end()), ranges.end());
                for (const auto& [lo, hi] : ranges) {
                    std::vector<int> years;
                    std::vector<double> values;
                    for (const auto& p : points) {
                        if (p.year < lo || p.year > hi) continue;
                        years.push_back(p.year);
                        values.push_back(p.value);
                    }
                    if (years.size() < 3) continue;
                    TrendResult trend = linear_trend(years, values);
                    csv.write_row({measure, label, "trend", range_string(lo, hi),
                                   format_double(trend.slope), format_p(trend.p_value),
                                   std::to_string(trend.n), "ols_t"});
                }
            }

            for (std::size_t i = 0; i < labels.size(); ++i) {
                for (std::size_t j = i + 1; j < labels.size(); ++j) {
                    const auto& a = by_label.at(labels[i]);
                    const auto& b = by_label.at(labels[j]);
                    std::map<int, double> b_by_year;
                    for (const auto& p : b) b_by_year[p.year] = p.value;
                    std::vector<double> x;
                    std::vector<double> y;
                    int lo = 0;
                    int hi = 0;
                    for (const auto& p : a) {
                        auto it = b_by_year.find(p.year);
                        if (it == b_by_year.end()) continue;
                        if (x.empty()) lo = p.year;
                        hi = p.year;
                        x.push_back(p.value);
                        y.push_back(it->second);
                    }
                    if (x.size() < 5) continue;
                    PairedTestResult test;
                    try {
                        test = wilcoxon_signed_rank(x, y);
                    } catch (const Error& e) {
                        log_info("report: wilcoxon " + labels[i] + " vs " + labels[j] + " on " +
                                 measure + " skipped: " + e.what());
                        continue;
                    }
                    csv.write_row({measure, labels[i], "wilcoxon_vs_" + labels[j],
                                   range_string(lo, hi), format_double(test.statistic),
                                   format_p(test.p_value), std::to_string(test.n),
                                   test.method == TestMethod::exact ? "exact" : "normal_approx"});
                }
            }
        }
        csv.close();
        add_entry(manifest, "stats.csv", {{"kind", "csv"}, {"command", "report"}});
    }

    save_manifest(cfg, manifest);
    log_info("report: wrote figures and stats for " +
             std::to_string(series.measure_order.size()) + " measures");
}

} // namespace dehum
