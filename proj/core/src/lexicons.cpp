#include "dehum/lexicons.hpp"

#include "dehum/error.hpp"
#include "dehum/strings.hpp"

#include <fstream>

namespace dehum {

namespace {

// Reads lines, strips a trailing '\r', and reports 1-based line numbers.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path) : path_(path), in_(path) {
        if (!in_) throw Error("cannot open lexicon file " + path.string());
    }

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no_;
        return true;
    }

    std::size_t line_no() const { return line_no_; }
    std::string origin() const { return path_.string(); }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

} // namespace

const char* to_string(AffectDimension dim) {
    return dim == AffectDimension::valence ? "valence" : "dominance";
}

AffectLexicon::AffectLexicon(AffectDimension dim, std::unordered_map<std::string, double> entries)
    : dimension_(dim), entries_(std::move(entries)) {
    for (const auto& [word, score] : entries_) {
        if (score < 0.0 || score > 1.0)
            throw Error("affect score out of [0,1] for '" + word + "'");
    }
}

bool AffectLexicon::contains(std::string_view word) const {
    return entries_.count(lower_ascii(word)) > 0;
}

std::optional<double> AffectLexicon::get(std::string_view word) const {
    auto it = entries_.find(lower_ascii(word));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

AffectLexicon load_affect_lexicon(const std::filesystem::path& path, AffectDimension dim) {
    LineReader reader(path);
    std::unordered_map<std::string, double> entries;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (first) {
            first = false;
            if (!fields.empty() && lower_ascii(trim(fields[0])) == "word") continue;
        }
        if (fields.size() != 4)
            throw ParseError(reader.origin() + ": expected 4 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             reader.line_no());
        std::string word = lower_ascii(trim(fields[0]));
        if (word.empty())
            throw ParseError(reader.origin() + ": empty word", reader.line_no());
        std::size_t column = (dim == AffectDimension::valence) ? 1 : 3;
        auto score = parse_double(trim(fields[column]));
        if (!score)
            throw ParseError(reader.origin() + ": malformed score '" + fields[column] + "'",
                             reader.line_no());
        if (*score < 0.0 || *score > 1.0)
            throw ParseError(reader.origin() + ": score " + format_double(*score) +
                                 " out of [0,1] for '" + word + "'",
                             reader.line_no());
        if (!entries.emplace(word, *score).second)
            throw ParseError(reader.origin() + ": duplicate word '" + word + "'",
                             reader.line_no());
    }
    if (entries.empty()) throw Error("affect lexicon " + path.string() + " is empty");
    return AffectLexicon(dim, std::move(entries));
}

AffectLexicon strip_words(const AffectLexicon& lexicon,
                          const std::unordered_set<std::string>& words) {
    std::unordered_map<std::string, double> kept = lexicon.entries();
    for (const auto& w : words) kept.erase(lower_ascii(w));
    return AffectLexicon(lexicon.dimension(), std::move(kept));
}

PerspectiveLexicon::PerspectiveLexicon(std::unordered_map<std::string, PerspectiveScores> entries)
    : entries_(std::move(entries)) {
    for (const auto& [verb, scores] : entries_) {
        if (scores.toward_subject < kPerspectiveMin || scores.toward_subject > kPerspectiveMax ||
            scores.toward_object < kPerspectiveMin || scores.toward_object > kPerspectiveMax)
            throw Error("perspective score out of range for '" + verb + "'");
    }
}

std::optional<PerspectiveScores> PerspectiveLexicon::get(std::string_view verb_lemma) const {
    auto it = entries_.find(lower_ascii(verb_lemma));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

PerspectiveLexicon load_perspective_lexicon(const std::filesystem::path& path) {
    LineReader reader(path);
    std::unordered_map<std::string, PerspectiveScores> entries;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (first) {
            first = false;
            if (!fields.empty() && lower_ascii(trim(fields[0])) == "verb") continue;
        }
        if (fields.size() != 3)
            throw ParseError(reader.origin() + ": expected 3 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             reader.line_no());
        std::string verb = lower_ascii(trim(fields[0]));
        if (verb.empty())
            throw ParseError(reader.origin() + ": empty verb", reader.line_no());
        auto subj = parse_double(trim(fields[1]));
        auto obj = parse_double(trim(fields[2]));
        if (!subj || !obj)
            throw ParseError(reader.origin() + ": malformed score for '" + verb + "'",
                             reader.line_no());
        for (double s : {*subj, *obj}) {
            if (s < kPerspectiveMin || s > kPerspectiveMax)
                throw ParseError(reader.origin() + ": score " + format_double(s) +
                                     " out of [" + format_double(kPerspectiveMin) + "," +
                                     format_double(kPerspectiveMax) + "] for '" + verb + "'",
                                 reader.line_no());
        }
        PerspectiveScores scores{*subj, *obj};
        if (!entries.emplace(verb, scores).second)
            throw ParseError(reader.origin() + ": duplicate verb '" + verb + "'",
                             reader.line_no());
    }
    if (entries.empty()) throw Error("perspective lexicon " + path.string() + " is empty");
    return PerspectiveLexicon(std::move(entries));
}

AgencyLexicon::AgencyLexicon(std::unordered_map<std::string, AgencyLabel> entries)
    : entries_(std::move(entries)) {}

std::optional<AgencyLabel> AgencyLexicon::get(std::string_view verb_lemma) const {
    auto it = entries_.find(lower_ascii(verb_lemma));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

AgencyLexicon load_agency_lexicon(const std::filesystem::path& path) {
    LineReader reader(path);
    std::unordered_map<std::string, AgencyLabel> entries;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (first) {
            first = false;
            if (!fields.empty() && lower_ascii(trim(fields[0])) == "verb") continue;
        }
        if (fields.size() != 2)
            throw ParseError(reader.origin() + ": expected 2 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             reader.line_no());
        std::string verb = lower_ascii(trim(fields[0]));
        if (verb.empty())
            throw ParseError(reader.origin() + ": empty verb", reader.line_no());
        std::string tag = lower_ascii(trim(fields[1]));
        AgencyLabel label;
        if (tag == "agency_pos") label = AgencyLabel::positive;
        else if (tag == "agency_neg" || tag == "agency_equal") label = AgencyLabel::non_positive;
        else
            throw ParseError(reader.origin() + ": unknown agency tag '" + tag + "'",
                             reader.line_no());
        if (!entries.emplace(verb, label).second)
            throw ParseError(reader.origin() + ": duplicate verb '" + verb + "'",
                             reader.line_no());
    }
    if (entries.empty()) throw Error("agency lexicon " + path.string() + " is empty");
    return AgencyLexicon(std::move(entries));
}

StemDictionary load_stem_dictionary(const std::filesystem::path& path, std::string category) {
    LineReader reader(path);
    StemDictionary dict;
    dict.category = std::move(category);
    std::string line;
    while (reader.next(line)) {
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        StemPattern p;
        if (t.back() == '*') {
            p.is_prefix = true;
            t.remove_suffix(1);
        }
        if (t.empty())
            throw ParseError(reader.origin() + ": bare '*' pattern", reader.line_no());
        if (t.find('*') != std::string_view::npos)
            throw ParseError(reader.origin() + ": '*' is only allowed at the end",
                             reader.line_no());
        p.pattern = lower_ascii(t);
        dict.entries.push_back(std::move(p));
    }
    if (dict.entries.empty()) throw Error("stem dictionary " + path.string() + " is empty");
    return dict;
}

std::vector<std::string> expand_stems(const StemDictionary& dict,
                                      const std::vector<std::string>& vocabulary) {
    std::vector<std::string> out;
    for (const auto& word : vocabulary) {
        for (const auto& p : dict.entries) {
            bool hit = p.is_prefix ? word.starts_with(p.pattern) : word == p.pattern;
            if (hit) {
                out.push_back(word);
                break;
            }
        }
    }
    return out;
}

} // namespace dehum
