#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dehum {

enum class AffectDimension { valence, dominance };

const char* to_string(AffectDimension dim);

// One dimension of a word-affect lexicon: lowercase word -> score in [0, 1].
class AffectLexicon {
public:
    AffectLexicon() = default;
    AffectLexicon(AffectDimension dim, std::unordered_map<std::string, double> entries);

    AffectDimension dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(std::string_view word) const;
    // Queries are lowercased before lookup.
    std::optional<double> get(std::string_view word) const;
    const std::unordered_map<std::string, double>& entries() const { return entries_; }

private:
    AffectDimension dimension_ = AffectDimension::valence;
    std::unordered_map<std::string, double> entries_;
};

// Reads a tab-separated word/valence/arousal/dominance file and keeps the
// requested dimension. A header line whose first field is "word" (any case)
// is skipped. Scores outside [0, 1], duplicate words and malformed rows are
// errors that name the offending line.
AffectLexicon load_affect_lexicon(const std::filesystem::path& path, AffectDimension dim);

// Copy with the given words (lowercased) removed. The input is untouched.
AffectLexicon strip_words(const AffectLexicon& lexicon,
                          const std::unordered_set<std::string>& words);

// How a verb portrays its arguments: perspective of the writer toward the
// subject and toward the object, each in [-0.87, 0.8].
struct PerspectiveScores {
    double toward_subject = 0;
    double toward_object = 0;
};

inline constexpr double kPerspectiveMin = -0.87;
inline constexpr double kPerspectiveMax = 0.8;

class PerspectiveLexicon {
public:
    PerspectiveLexicon() = default;
    explicit PerspectiveLexicon(std::unordered_map<std::string, PerspectiveScores> entries);

    std::size_t size() const { return entries_.size(); }
    std::optional<PerspectiveScores> get(std::string_view verb_lemma) const;
    const std::unordered_map<std::string, PerspectiveScores>& entries() const { return entries_; }

private:
    std::unordered_map<std::string, PerspectiveScores> entries_;
};

// Tab-separated verb / subject-score / object-score rows.
PerspectiveLexicon load_perspective_lexicon(const std::filesystem::path& path);

// Whether a verb grants its subject decision-making power. The source
// annotations distinguish positive from negative and equal agency; everything
// that is not positive collapses to non_positive.
enum class AgencyLabel { positive, non_positive };

class AgencyLexicon {
public:
    AgencyLexicon() = default;
    explicit AgencyLexicon(std::unordered_map<std::string, AgencyLabel> entries);

    std::size_t size() const { return entries_.size(); }
    std::optional<AgencyLabel> get(std::string_view verb_lemma) const;
    const std::unordered_map<std::string, AgencyLabel>& entries() const { return entries_; }

private:
    std::unordered_map<std::string, AgencyLabel> entries_;
};

// Tab-separated verb / agency_pos|agency_neg|agency_equal rows.
AgencyLexicon load_agency_lexicon(const std::filesystem::path& path);

// A stem pattern is either an exact word or a prefix (trailing '*').
struct StemPattern {
    std::string pattern; // lowercase, '*' removed
    bool is_prefix = false;
};

struct StemDictionary {
    std::string category;
    std::vector<StemPattern> entries;
};

// One pattern per line; blank lines and lines starting with '#' are skipped.
StemDictionary load_stem_dictionary(const std::filesystem::path& path, std::string category);

// All vocabulary words matched by any pattern, in vocabulary order.
std::vector<std::string> expand_stems(const StemDictionary& dict,
                                      const std::vector<std::string>& vocabulary);

} // namespace dehum
