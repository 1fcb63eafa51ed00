#include "dehum/config.hpp"

#include "dehum/error.hpp"
#include "dehum/strings.hpp"
#include "dehum/toml.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace dehum {

namespace {

struct DefaultLabel {
    const char* canonical;
    std::vector<const char*> forms;
    bool acronym;
};

// Group identity terms tracked by default, with their surface variants.
// Acronyms additionally match punctuated spellings ("L.G.B.T.").
const std::vector<DefaultLabel>& default_labels() {
    static const std::vector<DefaultLabel> labels = {
        {"agender", {"agender"}, false},
        {"aromantic", {"aromantic"}, false},
        {"asexual", {"asexual", "asexuals"}, false},
        {"bisexual", {"bisexual", "bisexuals"}, false},
        {"gay", {"gay", "gays"}, false},
        {"genderfluid", {"genderfluid"}, false},
        {"genderqueer", {"genderqueer"}, false},
        {"glbt", {"glbt"}, true},
        {"homosexual", {"homosexual", "homosexuals"}, false},
        {"intersex", {"intersex"}, false},
        {"lesbian", {"lesbian", "lesbians"}, false},
        {"lgb", {"lgb"}, true},
        {"lgbt", {"lgbt"}, true},
        {"lgbtq", {"lgbtq"}, true},
        {"lgbtqia", {"lgbtqia"}, true},
        {"lgbtqqia", {"lgbtqqia"}, true},
        {"pansexual", {"pansexual", "pansexuals"}, false},
        {"transgender", {"transgender", "transgenders", "transgendered"}, false},
        {"transsexual", {"transsexual", "transsexuals", "transexual", "transexuals"}, false},
        {"transvestite", {"transvestite", "transvestites"}, false},
        // comparison group, not part of the aggregate
        {"american", {"american", "americans"}, false},
    };
    return labels;
}

std::vector<std::string> default_aggregate_members() {
    std::vector<std::string> members;
    for (const auto& l : default_labels())
        if (std::string(l.canonical) != "american") members.emplace_back(l.canonical);
    return members;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    if (p.is_absolute()) return p;
    return base / p;
}

std::vector<std::pair<int, int>> parse_trend_ranges(const std::vector<std::string>& items) {
    std::vector<std::pair<int, int>> out;
    for (const auto& item : items) {
        auto parts = split(item, ':');
        if (parts.size() != 2)
            throw ConfigError("report.trend_ranges entries must look like \"1986:2015\"");
        auto lo = parse_int(trim(parts[0]));
        auto hi = parse_int(trim(parts[1]));
        if (!lo || !hi || *lo > *hi)
            throw ConfigError("bad trend range '" + item + "'");
        out.emplace_back(static_cast<int>(*lo), static_cast<int>(*hi));
    }
    return out;
}

} // namespace

const LabelSet* PipelineConfig::find_label(const std::string& canonical) const {
    for (const auto& l : labels)
        if (l.canonical == canonical) return &l;
    return nullptr;
}

LabelSet PipelineConfig::aggregate_label() const {
    LabelSet out;
    out.canonical = aggregate_name;
    std::set<std::string> forms;
    bool any_acronym = false;
    for (const auto& member : aggregate_members) {
        const LabelSet* l = find_label(member);
        if (l == nullptr)
            throw ConfigError("aggregate member '" + member + "' is not a configured label");
        for (const auto& f : l->surface_forms) forms.insert(f);
        any_acronym = any_acronym || l->is_acronym;
    }
    out.surface_forms.assign(forms.begin(), forms.end());
    out.is_acronym = any_acronym;
    return out;
}

std::vector<LabelSet> PipelineConfig::measurement_labels() const {
    std::vector<LabelSet> out = labels;
    if (!aggregate_members.empty()) out.push_back(aggregate_label());
    return out;
}

std::vector<std::string> PipelineConfig::aggregate_surface_forms() const {
    if (aggregate_members.empty()) return {};
    return aggregate_label().surface_forms;
}

void PipelineConfig::validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (year_min > year_max) throw ConfigError("corpus.year_min must be <= corpus.year_max");
    if (labels.empty()) throw ConfigError("at least one label is required");

    std::unordered_set<std::string> canonical;
    for (const auto& l : labels) {
        if (l.canonical.empty()) throw ConfigError("label with empty canonical name");
        if (l.surface_forms.empty())
            throw ConfigError("label '" + l.canonical + "' has no surface forms");
        if (!canonical.insert(l.canonical).second)
            throw ConfigError("duplicate label '" + l.canonical + "'");
    }
    for (const auto& member : aggregate_members) {
        if (!canonical.count(member))
            throw ConfigError("aggregate member '" + member + "' is not a configured label");
    }
    if (canonical.count(aggregate_name))
        throw ConfigError("aggregate name '" + aggregate_name + "' collides with a label");
    for (const auto& r : report_labels) {
        if (!canonical.count(r) && r != aggregate_name)
            throw ConfigError("report label '" + r + "' is not configured");
    }

    train.validate(false);
    if (ridge_alpha < 0) throw ConfigError("measures.ridge_alpha must be >= 0");
    if (neighbor_k_default < 1) throw ConfigError("neighbor k must be >= 1");
    for (int k : neighbor_k_values)
        if (k < 1) throw ConfigError("neighbor k must be >= 1");

    static const std::unordered_set<std::string> known_measures = {
        "paragraph_valence", "perspective",       "agency",
        "neighbor_valence",  "neighbor_dominance", "disgust_distance",
        "vermin_distance",   "induced_valence",   "induced_dominance"};
    for (const auto& m : measures)
        if (!known_measures.count(m)) throw ConfigError("unknown measure '" + m + "'");

    if (extreme_top < 1) throw ConfigError("extremes.top must be >= 1");
    if (extreme_min_tokens < 1 || extreme_max_tokens < extreme_min_tokens)
        throw ConfigError("extremes token bounds must satisfy 1 <= min <= max");
    if (extreme_neighbors < 1) throw ConfigError("extremes.neighbors must be >= 1");
    for (const auto& r : extreme_required_labels)
        if (!canonical.count(r))
            throw ConfigError("extremes label '" + r + "' is not configured");

    if (lowess_frac <= 0 || lowess_frac > 1)
        throw ConfigError("report.lowess_frac must be in (0, 1]");
    if (lowess_iterations < 0) throw ConfigError("report.lowess_iterations must be >= 0");
    if (bootstrap_resamples < 2) throw ConfigError("report.bootstrap_resamples must be >= 2");
    if (ci_level <= 0 || ci_level >= 1) throw ConfigError("report.ci_level must be in (0, 1)");
    if (interval_years < 1) throw ConfigError("report.interval_years must be >= 1");
}

PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    cfg.section_blocklist = {"Arts", "Theater", "Movies"};
    for (const auto& l : default_labels()) {
        LabelSet label;
        label.canonical = l.canonical;
        for (const auto* f : l.forms) label.surface_forms.emplace_back(f);
        label.is_acronym = l.acronym;
        cfg.labels.push_back(std::move(label));
    }
    cfg.aggregate_members = default_aggregate_members();
    cfg.report_labels = {"gay", "homosexual", "lgbtq_all", "american"};
    cfg.vermin_words = {"vermin", "rodent", "rodents", "rat",    "rats",    "mice",
                        "cockroaches", "termite", "termites", "bedbug", "bedbugs", "fleas"};
    cfg.neighbor_exclude_extra = {"heterosexual", "heterosexuals", "heterosexuality"};
    cfg.measures = {"paragraph_valence", "perspective",        "agency",
                    "neighbor_valence",  "neighbor_dominance", "disgust_distance",
                    "vermin_distance",   "induced_valence",    "induced_dominance"};
    cfg.neighbor_k_values = {500};
    cfg.extreme_required_labels = {"gay", "homosexual"};
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    TomlTable toml = TomlTable::parse_file(path);
    PipelineConfig cfg = default_pipeline_config();
    cfg.config_dir = std::filesystem::absolute(path).parent_path();

    cfg.out_dir = toml.get_string("out_dir", cfg.out_dir.string());
    cfg.seed = static_cast<std::uint64_t>(toml.get_int("seed", static_cast<long long>(cfg.seed)));
    cfg.runs = static_cast<int>(toml.get_int("runs", cfg.runs));
    cfg.workers = static_cast<int>(toml.get_int("workers", cfg.workers));

    cfg.corpus_input = resolve(cfg.config_dir, toml.get_string("corpus.input", ""));
    cfg.cache_name = toml.get_string("corpus.cache", cfg.cache_name);
    cfg.year_min = static_cast<int>(toml.get_int("corpus.year_min", cfg.year_min));
    cfg.year_max = static_cast<int>(toml.get_int("corpus.year_max", cfg.year_max));
    cfg.section_blocklist =
        toml.get_string_list("corpus.section_blocklist", cfg.section_blocklist);

    // labels.forms.* replaces the default label set wholesale
    std::vector<std::string> form_keys;
    for (const auto& key : toml.keys()) {
        if (key.starts_with("labels.forms.")) form_keys.push_back(key);
    }
    if (!form_keys.empty()) {
        std::vector<std::string> acronyms = toml.get_string_list("labels.acronyms", {});
        std::unordered_set<std::string> acronym_set(acronyms.begin(), acronyms.end());
        cfg.labels.clear();
        std::sort(form_keys.begin(), form_keys.end());
        for (const auto& key : form_keys) {
            LabelSet label;
            label.canonical = key.substr(std::string("labels.forms.").size());
            for (const auto& f : toml.get_string_list(key, {}))
                label.surface_forms.push_back(lower_ascii(f));
            label.is_acronym = acronym_set.count(label.canonical) > 0;
            cfg.labels.push_back(std::move(label));
        }
        // defaults reference labels that may no longer exist
        cfg.aggregate_members.clear();
        for (const auto& l : cfg.labels) cfg.aggregate_members.push_back(l.canonical);
        cfg.report_labels.clear();
    }
    cfg.aggregate_name = toml.get_string("labels.aggregate", cfg.aggregate_name);
    cfg.aggregate_members = toml.get_string_list("labels.aggregate_members", cfg.aggregate_members);
    {
        std::vector<std::string> fallback = cfg.report_labels;
        if (fallback.empty()) {
            for (const auto& l : cfg.labels) fallback.push_back(l.canonical);
            if (!cfg.aggregate_members.empty()) fallback.push_back(cfg.aggregate_name);
        }
        cfg.report_labels = toml.get_string_list("labels.report", fallback);
    }

    cfg.vad_path = resolve(cfg.config_dir, toml.get_string("lexicons.vad", ""));
    cfg.perspective_path = resolve(cfg.config_dir, toml.get_string("lexicons.perspective", ""));
    cfg.agency_path = resolve(cfg.config_dir, toml.get_string("lexicons.agency", ""));
    cfg.disgust_stems_path =
        resolve(cfg.config_dir, toml.get_string("lexicons.disgust_stems", ""));
    cfg.vermin_words = toml.get_string_list("lexicons.vermin_words", cfg.vermin_words);
    cfg.strip_label_forms = toml.get_bool("lexicons.strip_label_forms", cfg.strip_label_forms);

    cfg.conllu_path = resolve(cfg.config_dir, toml.get_string("syntax.conllu", ""));
    cfg.sentence_map_path = resolve(cfg.config_dir, toml.get_string("syntax.sentence_map", ""));

    cfg.train.dim = static_cast<int>(toml.get_int("train.dim", cfg.train.dim));
    cfg.train.window = static_cast<int>(toml.get_int("train.window", cfg.train.window));
    cfg.train.epochs = static_cast<int>(toml.get_int("train.epochs", cfg.train.epochs));
    cfg.train.negative_samples =
        static_cast<int>(toml.get_int("train.negative_samples", cfg.train.negative_samples));
    cfg.train.min_count = static_cast<int>(toml.get_int("train.min_count", cfg.train.min_count));
    cfg.train.subsample_threshold =
        toml.get_double("train.subsample_threshold", cfg.train.subsample_threshold);
    cfg.train.initial_lr = toml.get_double("train.initial_lr", cfg.train.initial_lr);
    cfg.train.min_lr = toml.get_double("train.min_lr", cfg.train.min_lr);

    cfg.measures = toml.get_string_list("measures.enabled", cfg.measures);
    {
        std::vector<long long> fallback(cfg.neighbor_k_values.begin(),
                                        cfg.neighbor_k_values.end());
        auto ks = toml.get_int_list("measures.k", fallback);
        cfg.neighbor_k_values.assign(ks.begin(), ks.end());
    }
    cfg.exclude_labels_from_neighbors =
        toml.get_bool("measures.exclude_labels_from_neighbors", cfg.exclude_labels_from_neighbors);
    cfg.neighbor_exclude_extra =
        toml.get_string_list("measures.neighbor_exclude_extra", cfg.neighbor_exclude_extra);
    cfg.ridge_alpha = toml.get_double("measures.ridge_alpha", cfg.ridge_alpha);

    cfg.extreme_required_labels =
        toml.get_string_list("extremes.required_labels", cfg.extreme_required_labels);
    cfg.extreme_top = static_cast<int>(toml.get_int("extremes.top", cfg.extreme_top));
    cfg.extreme_min_tokens =
        static_cast<int>(toml.get_int("extremes.min_tokens", cfg.extreme_min_tokens));
    cfg.extreme_max_tokens =
        static_cast<int>(toml.get_int("extremes.max_tokens", cfg.extreme_max_tokens));
    cfg.extreme_neighbors =
        static_cast<int>(toml.get_int("extremes.neighbors", cfg.extreme_neighbors));

    cfg.lowess_frac = toml.get_double("report.lowess_frac", cfg.lowess_frac);
    cfg.lowess_iterations =
        static_cast<int>(toml.get_int("report.lowess_iterations", cfg.lowess_iterations));
    cfg.bootstrap_resamples =
        static_cast<int>(toml.get_int("report.bootstrap_resamples", cfg.bootstrap_resamples));
    cfg.ci_level = toml.get_double("report.ci_level", cfg.ci_level);
    cfg.interval_years = static_cast<int>(toml.get_int("report.interval_years", cfg.interval_years));
    cfg.trend_ranges = parse_trend_ranges(toml.get_string_list("report.trend_ranges", {}));

    cfg.validate();
    return cfg;
}

} // namespace dehum
