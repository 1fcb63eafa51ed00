#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace dehum {

struct Paragraph {
    std::string id;
    int year = 0;
    std::string section;
    std::string raw_text;
    std::vector<std::string> tokens;
    std::vector<std::string> lemmas;
};

// A group identity term and its surface forms (plural, variant spellings).
// Acronym labels additionally match punctuated spellings in the raw text.
struct LabelSet {
    std::string canonical;
    std::vector<std::string> surface_forms;
    bool is_acronym = false;
};

// Lowercases, then splits into maximal runs of letters. Bytes >= 0x80 are
// treated as letters so multibyte UTF-8 stays inside tokens. Digits and
// punctuation act as separators, which drops pure-number tokens outright.
std::vector<std::string> preprocess_tokens(std::string_view text);

// Deterministic rule lemmatizer with an irregular-form table. Unknown
// shapes come back unchanged.
std::string lemmatize(std::string_view token);

// Canonical names of labels whose surface forms occur in the paragraph,
// in the order the labels were given. Token matching is exact; acronym
// labels also match raw-text chunks with punctuation stripped, so
// "L.G.B.T." matches an "lgbt" form.
std::vector<std::string> match_labels(const Paragraph& paragraph,
                                      const std::vector<LabelSet>& labels);

struct YearLabelCount {
    std::int64_t paragraphs = 0;
    std::int64_t tokens = 0;
};

struct CorpusStats {
    std::int64_t paragraph_count = 0;
    std::int64_t token_count = 0;
    std::map<int, YearLabelCount> per_year;
    std::map<std::string, YearLabelCount> per_label;
    std::map<std::pair<int, std::string>, YearLabelCount> per_year_label;

    void add(const Paragraph& p, const std::vector<std::string>& matched);
};

struct IngestOptions {
    int year_min = 0;
    int year_max = 9999;
};

// Streams newline-delimited JSON records {id, year, section, text}.
// Tokenizes and lemmatizes each record. Records outside the year range and
// records that tokenize to nothing are skipped with a warning. Malformed
// JSON or missing fields raise ParseError with the line number.
void ingest_corpus(const std::filesystem::path& path, const IngestOptions& options,
                   const std::function<void(Paragraph&&)>& sink);

std::vector<Paragraph> ingest_corpus(const std::filesystem::path& path,
                                     const IngestOptions& options);

// True when the paragraph should be kept: at least one label matched and the
// section is not blocklisted (exact match on the section string).
bool retain_paragraph(const Paragraph& p, const std::vector<std::string>& matched,
                      const std::unordered_set<std::string>& section_blocklist);

struct FilterResult {
    std::vector<Paragraph> paragraphs;
    CorpusStats stats;
};

FilterResult filter_corpus(std::vector<Paragraph> paragraphs,
                           const std::vector<LabelSet>& labels,
                           const std::unordered_set<std::string>& section_blocklist);

// Cache format: the ingest JSON plus "tokens" and "lemmas" arrays, one
// record per line, written in input order.
void write_corpus_cache(const std::filesystem::path& path,
                        const std::vector<Paragraph>& paragraphs);
std::vector<Paragraph> read_corpus_cache(const std::filesystem::path& path);

// year,label,paragraphs,tokens rows sorted by year then label.
void write_stats_csv(const std::filesystem::path& path, const CorpusStats& stats);
// label,paragraphs,tokens totals sorted by label.
void write_label_totals_csv(const std::filesystem::path& path, const CorpusStats& stats);

} // namespace dehum
