#include "dehum/syntax.hpp"

#include "dehum/error.hpp"
#include "dehum/strings.hpp"

#include <algorithm>
#include <fstream>

namespace dehum {

namespace {

bool is_all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

void validate_sentence(const ParsedSentence& sentence, const std::string& origin,
                       std::size_t line_no) {
    if (sentence.tokens.empty()) return;
    int roots = 0;
    int n = static_cast<int>(sentence.tokens.size());
    for (const auto& t : sentence.tokens) {
        if (t.head == 0) ++roots;
        if (t.head < 0 || t.head > n)
            throw ParseError(origin + ": head " + std::to_string(t.head) +
                                 " out of range in sentence '" + sentence.sent_id + "'",
                             line_no);
    }
    if (roots != 1)
        throw ParseError(origin + ": sentence '" + sentence.sent_id + "' has " +
                             std::to_string(roots) + " roots, expected 1",
                         line_no);
}

std::string comment_value(const std::string& comment, std::string_view key) {
    // comment looks like "# key = value"
    std::string_view body = trim(std::string_view(comment).substr(1));
    if (!body.starts_with(key)) return {};
    body.remove_prefix(key.size());
    body = trim(body);
    if (body.empty() || body.front() != '=') return {};
    body.remove_prefix(1);
    return std::string(trim(body));
}

} // namespace

void read_conllu(const std::filesystem::path& path,
                 const std::function<void(ParsedSentence&&)>& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    const std::string origin = path.string();
    ParsedSentence current;
    bool any_content = false;
    std::string line;
    std::size_t line_no = 0;
    std::size_t sentence_start = 1;
    int expected_index = 1;

    auto flush = [&] {
        if (!any_content) return;
        validate_sentence(current, origin, sentence_start);
        sink(std::move(current));
        current = ParsedSentence{};
        any_content = false;
        expected_index = 1;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        if (line.empty()) {
            flush();
            continue;
        }
        if (!any_content) sentence_start = line_no;
        if (line.front() == '#') {
            any_content = true;
            current.comments.push_back(line);
            if (auto v = comment_value(line, "sent_id"); !v.empty()) current.sent_id = v;
            if (auto v = comment_value(line, "paragraph_id"); !v.empty()) current.paragraph_id = v;
            continue;
        }

        auto fields = split(line, '\t');
        if (fields.size() != 10)
            throw ParseError(origin + ": expected 10 tab-separated columns, got " +
                                 std::to_string(fields.size()),
                             line_no);

        const std::string& id_field = fields[0];
        // Multiword token ranges (1-2) and empty nodes (1.1) carry no tree
        // structure of their own.
        if (id_field.find('-') != std::string::npos || id_field.find('.') != std::string::npos) {
            any_content = true;
            continue;
        }
        if (!is_all_digits(id_field))
            throw ParseError(origin + ": bad token id '" + id_field + "'", line_no);

        ParsedToken token;
        token.index = static_cast<int>(*parse_int(id_field));
        if (token.index != expected_index)
            throw ParseError(origin + ": token id " + id_field + " out of sequence, expected " +
                                 std::to_string(expected_index),
                             line_no);
        ++expected_index;

        token.form = fields[1];
        token.lemma = fields[2];
        token.upos = fields[3];
        if (!is_all_digits(fields[6]))
            throw ParseError(origin + ": bad head '" + fields[6] + "'", line_no);
        token.head = static_cast<int>(*parse_int(fields[6]));
        token.deprel = fields[7];

        current.tokens.push_back(std::move(token));
        any_content = true;
    }
    flush();
}

std::vector<ParsedSentence> read_conllu(const std::filesystem::path& path) {
    std::vector<ParsedSentence> out;
    read_conllu(path, [&](ParsedSentence&& s) { out.push_back(std::move(s)); });
    return out;
}

void write_conllu(const std::filesystem::path& path,
                  const std::vector<ParsedSentence>& sentences) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& s : sentences) {
        for (const auto& c : s.comments) out << c << '\n';
        for (const auto& t : s.tokens) {
            out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << "\t_\t_\t"
                << t.head << '\t' << t.deprel << "\t_\t_\n";
        }
        out << '\n';
    }
    if (!out) throw Error("write failed on " + path.string());
}

std::unordered_map<std::string, std::string> load_sentence_map(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open sentence map " + path.string());

    const std::string origin = path.string();
    std::unordered_map<std::string, std::string> map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 2)
            throw ParseError(origin + ": expected sent_id<TAB>paragraph_id", line_no);
        if (!map.emplace(fields[0], fields[1]).second)
            throw ParseError(origin + ": duplicate sent_id '" + fields[0] + "'", line_no);
    }
    return map;
}

void apply_sentence_map(std::vector<ParsedSentence>& sentences,
                        const std::unordered_map<std::string, std::string>& map) {
    for (auto& s : sentences) {
        if (!s.paragraph_id.empty()) continue;
        auto it = map.find(s.sent_id);
        if (it != map.end()) s.paragraph_id = it->second;
    }
}

namespace {

std::vector<std::string> noun_phrase(const ParsedSentence& sentence, int head_index) {
    // head noun lemma plus amod/compound dependents, in surface order
    std::vector<std::pair<int, std::string>> parts;
    const ParsedToken& head = sentence.tokens[head_index - 1];
    parts.emplace_back(head.index, lower_ascii(head.lemma));
    for (const auto& t : sentence.tokens) {
        if (t.head == head_index && (t.deprel == "amod" || t.deprel == "compound"))
            parts.emplace_back(t.index, lower_ascii(t.lemma));
    }
    std::sort(parts.begin(), parts.end());
    std::vector<std::string> words;
    words.reserve(parts.size());
    for (auto& [idx, w] : parts) words.push_back(std::move(w));
    return words;
}

bool verb_negated(const ParsedSentence& sentence, int verb_index) {
    for (const auto& t : sentence.tokens) {
        if (t.head != verb_index) continue;
        if (t.deprel == "neg") return true;
        if (t.deprel == "advmod") {
            std::string lemma = lower_ascii(t.lemma);
            if (lemma == "not" || lemma == "never") return true;
        }
    }
    return false;
}

struct VerbArguments {
    int subject = 0;        // nsubj
    int object = 0;         // obj / dobj
    int passive_subject = 0; // nsubj:pass
};

VerbArguments arguments_of(const ParsedSentence& sentence, int verb_index) {
    VerbArguments args;
    for (const auto& t : sentence.tokens) {
        if (t.head != verb_index) continue;
        if (t.deprel == "nsubj" && args.subject == 0) args.subject = t.index;
        else if ((t.deprel == "obj" || t.deprel == "dobj") && args.object == 0)
            args.object = t.index;
        else if (t.deprel == "nsubj:pass" && args.passive_subject == 0)
            args.passive_subject = t.index;
    }
    return args;
}

} // namespace

std::vector<SvoTuple> extract_svo(const ParsedSentence& sentence) {
    std::vector<SvoTuple> out;
    for (const auto& t : sentence.tokens) {
        if (t.upos != "VERB") continue;
        VerbArguments args = arguments_of(sentence, t.index);
        if (args.subject == 0) continue; // passive-only verbs yield nothing

        SvoTuple tuple;
        tuple.paragraph_id = sentence.paragraph_id;
        tuple.sent_id = sentence.sent_id;
        tuple.year = sentence.year;
        tuple.subject_np = noun_phrase(sentence, args.subject);
        tuple.verb_lemma = lower_ascii(t.lemma);
        if (args.object != 0) {
            tuple.object_np = noun_phrase(sentence, args.object);
        } else if (args.passive_subject != 0) {
            tuple.object_np = noun_phrase(sentence, args.passive_subject);
            tuple.object_from_passive = true;
        }
        tuple.negated = verb_negated(sentence, t.index);
        out.push_back(std::move(tuple));
    }
    return out;
}

std::vector<SvPair> extract_subject_verb(const ParsedSentence& sentence) {
    std::vector<SvPair> out;
    for (const auto& t : sentence.tokens) {
        if (t.upos != "VERB") continue;
        VerbArguments args = arguments_of(sentence, t.index);
        if (args.subject == 0) continue;

        SvPair pair;
        pair.paragraph_id = sentence.paragraph_id;
        pair.sent_id = sentence.sent_id;
        pair.year = sentence.year;
        pair.subject_np = noun_phrase(sentence, args.subject);
        pair.verb_lemma = lower_ascii(t.lemma);
        pair.negated = verb_negated(sentence, t.index);
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<std::string> np_contains_label(const std::vector<std::string>& np_words,
                                           const std::vector<LabelSet>& labels) {
    std::vector<std::string> matched;
    for (const auto& label : labels) {
        bool hit = false;
        for (const auto& form : label.surface_forms) {
            for (const auto& w : np_words) {
                if (w == form) {
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        if (hit) matched.push_back(label.canonical);
    }
    return matched;
}

} // namespace dehum
