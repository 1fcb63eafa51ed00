#include "dehum/corpus.hpp"

#include "dehum/csv.hpp"
#include "dehum/error.hpp"
#include "dehum/log.hpp"
#include "dehum/strings.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace dehum {

using nlohmann::json;

std::vector<std::string> preprocess_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        unsigned char byte = static_cast<unsigned char>(c);
        bool word_char = (byte >= 'a' && byte <= 'z') || (byte >= 'A' && byte <= 'Z') ||
                         byte >= 0x80; // multibyte UTF-8 stays inside tokens
        if (word_char) {
            if (byte >= 'A' && byte <= 'Z') byte = static_cast<unsigned char>(byte - 'A' + 'a');
            current.push_back(static_cast<char>(byte));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

// Raw-text chunks with all non-letter bytes removed, for acronym matching:
// "L.G.B.T." becomes "lgbt".
std::vector<std::string> depunctuated_chunks(std::string_view raw_text) {
    std::vector<std::string> out;
    for (const auto& chunk : split_whitespace(raw_text)) {
        std::string cleaned;
        for (char c : chunk) {
            unsigned char byte = static_cast<unsigned char>(c);
            if ((byte >= 'a' && byte <= 'z') || byte >= 0x80) cleaned.push_back(c);
            else if (byte >= 'A' && byte <= 'Z')
                cleaned.push_back(static_cast<char>(byte - 'A' + 'a'));
        }
        if (!cleaned.empty()) out.push_back(std::move(cleaned));
    }
    return out;
}

} // namespace

std::vector<std::string> match_labels(const Paragraph& paragraph,
                                      const std::vector<LabelSet>& labels) {
    std::unordered_set<std::string_view> token_set(paragraph.tokens.begin(),
                                                   paragraph.tokens.end());
    std::vector<std::string> chunks;
    bool chunks_ready = false;

    std::vector<std::string> matched;
    for (const auto& label : labels) {
        bool hit = false;
        for (const auto& form : label.surface_forms) {
            if (token_set.count(form)) {
                hit = true;
                break;
            }
        }
        if (!hit && label.is_acronym) {
            if (!chunks_ready) {
                chunks = depunctuated_chunks(paragraph.raw_text);
                chunks_ready = true;
            }
            for (const auto& form : label.surface_forms) {
                for (const auto& chunk : chunks) {
                    if (chunk == form) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
        }
        if (hit) matched.push_back(label.canonical);
    }
    return matched;
}

void CorpusStats::add(const Paragraph& p, const std::vector<std::string>& matched) {
    auto tokens = static_cast<std::int64_t>(p.tokens.size());
    ++paragraph_count;
    token_count += tokens;
    auto& year_entry = per_year[p.year];
    ++year_entry.paragraphs;
    year_entry.tokens += tokens;
    for (const auto& label : matched) {
        auto& label_entry = per_label[label];
        ++label_entry.paragraphs;
        label_entry.tokens += tokens;
        auto& pair_entry = per_year_label[{p.year, label}];
        ++pair_entry.paragraphs;
        pair_entry.tokens += tokens;
    }
}

namespace {

Paragraph paragraph_from_json(const json& record, std::size_t line_no, const std::string& origin,
                              bool expect_token_arrays) {
    if (!record.is_object()) throw ParseError(origin + ": record is not an object", line_no);

    auto require = [&](const char* field) -> const json& {
        auto it = record.find(field);
        if (it == record.end())
            throw ParseError(origin + ": missing field '" + std::string(field) + "'", line_no);
        return *it;
    };

    Paragraph p;
    const json& id = require("id");
    if (!id.is_string()) throw ParseError(origin + ": 'id' is not a string", line_no);
    p.id = id.get<std::string>();

    const json& year = require("year");
    if (!year.is_number_integer())
        throw ParseError(origin + ": 'year' is not an integer", line_no);
    p.year = year.get<int>();

    const json& section = require("section");
    if (!section.is_string()) throw ParseError(origin + ": 'section' is not a string", line_no);
    p.section = section.get<std::string>();

    const json& text = require("text");
    if (!text.is_string()) throw ParseError(origin + ": 'text' is not a string", line_no);
    p.raw_text = text.get<std::string>();

    if (expect_token_arrays) {
        const json& tokens = require("tokens");
        const json& lemmas = require("lemmas");
        if (!tokens.is_array() || !lemmas.is_array())
            throw ParseError(origin + ": 'tokens'/'lemmas' are not arrays", line_no);
        for (const auto& t : tokens) {
            if (!t.is_string()) throw ParseError(origin + ": non-string token", line_no);
            p.tokens.push_back(t.get<std::string>());
        }
        for (const auto& l : lemmas) {
            if (!l.is_string()) throw ParseError(origin + ": non-string lemma", line_no);
            p.lemmas.push_back(l.get<std::string>());
        }
        if (p.tokens.size() != p.lemmas.size())
            throw ParseError(origin + ": tokens/lemmas length mismatch", line_no);
    }
    return p;
}

} // namespace

void ingest_corpus(const std::filesystem::path& path, const IngestOptions& options,
                   const std::function<void(Paragraph&&)>& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file " + path.string());

    const std::string origin = path.string();
    std::string line;
    std::size_t line_no = 0;
    std::int64_t skipped_year = 0;
    std::int64_t skipped_empty = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded())
            throw ParseError(origin + ": invalid JSON", line_no);

        Paragraph p = paragraph_from_json(record, line_no, origin, false);
        if (p.year < options.year_min || p.year > options.year_max) {
            ++skipped_year;
            continue;
        }
        p.tokens = preprocess_tokens(p.raw_text);
        if (p.tokens.empty()) {
            log_warn(origin + ":" + std::to_string(line_no) + ": paragraph '" + p.id +
                     "' has no tokens, skipped");
            ++skipped_empty;
            continue;
        }
        p.lemmas.reserve(p.tokens.size());
        for (const auto& t : p.tokens) p.lemmas.push_back(lemmatize(t));
        sink(std::move(p));
    }
    if (skipped_year > 0)
        log_info(origin + ": skipped " + std::to_string(skipped_year) +
                 " records outside the year range");
    if (skipped_empty > 0)
        log_info(origin + ": skipped " + std::to_string(skipped_empty) + " empty records");
}

std::vector<Paragraph> ingest_corpus(const std::filesystem::path& path,
                                     const IngestOptions& options) {
    std::vector<Paragraph> out;
    ingest_corpus(path, options, [&](Paragraph&& p) { out.push_back(std::move(p)); });
    return out;
}

bool retain_paragraph(const Paragraph& p, const std::vector<std::string>& matched,
                      const std::unordered_set<std::string>& section_blocklist) {
    if (matched.empty()) return false;
    return section_blocklist.count(p.section) == 0;
}

FilterResult filter_corpus(std::vector<Paragraph> paragraphs,
                           const std::vector<LabelSet>& labels,
                           const std::unordered_set<std::string>& section_blocklist) {
    FilterResult result;
    for (auto& p : paragraphs) {
        auto matched = match_labels(p, labels);
        if (!retain_paragraph(p, matched, section_blocklist)) continue;
        result.stats.add(p, matched);
        result.paragraphs.push_back(std::move(p));
    }
    return result;
}

void write_corpus_cache(const std::filesystem::path& path,
                        const std::vector<Paragraph>& paragraphs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& p : paragraphs) {
        json record;
        record["id"] = p.id;
        record["year"] = p.year;
        record["section"] = p.section;
        record["text"] = p.raw_text;
        record["tokens"] = p.tokens;
        record["lemmas"] = p.lemmas;
        out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    if (!out) throw Error("write failed on " + path.string());
}

std::vector<Paragraph> read_corpus_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus cache " + path.string());

    const std::string origin = path.string();
    std::vector<Paragraph> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) throw ParseError(origin + ": invalid JSON", line_no);
        out.push_back(paragraph_from_json(record, line_no, origin, true));
    }
    return out;
}

void write_stats_csv(const std::filesystem::path& path, const CorpusStats& stats) {
    CsvWriter csv(path);
    csv.write_row({"year", "label", "paragraphs", "tokens"});
    for (const auto& [key, entry] : stats.per_year_label) {
        csv.write_row({std::to_string(key.first), key.second,
                       std::to_string(entry.paragraphs), std::to_string(entry.tokens)});
    }
    csv.close();
}

void write_label_totals_csv(const std::filesystem::path& path, const CorpusStats& stats) {
    CsvWriter csv(path);
    csv.write_row({"label", "paragraphs", "tokens"});
    for (const auto& [label, entry] : stats.per_label) {
        csv.write_row({label, std::to_string(entry.paragraphs), std::to_string(entry.tokens)});
    }
    csv.close();
}

} // namespace dehum
