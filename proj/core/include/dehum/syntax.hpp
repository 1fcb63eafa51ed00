#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dehum/corpus.hpp"

namespace dehum {

struct ParsedToken {
    int index = 0; // 1-based position within the sentence
    std::string form;
    std::string lemma;
    std::string upos;
    int head = 0; // 0 means root
    std::string deprel;
};

struct ParsedSentence {
    std::string sent_id;      // "# sent_id = ..."
    std::string paragraph_id; // "# paragraph_id = ..." or the companion map
    int year = 0;             // filled in from the corpus cache by callers
    std::vector<std::string> comments; // verbatim, in order
    std::vector<ParsedToken> tokens;
};

// Ten-column CoNLL-U. Multiword ranges (1-2) and empty nodes (1.1) are
// skipped. Each sentence must have exactly one root. Head indices must stay
// inside the sentence.
std::vector<ParsedSentence> read_conllu(const std::filesystem::path& path);
void read_conllu(const std::filesystem::path& path,
                 const std::function<void(ParsedSentence&&)>& sink);

// Re-serializes basic fields; unknown columns come back as '_'. Output of a
// parse round-trips to itself.
void write_conllu(const std::filesystem::path& path,
                  const std::vector<ParsedSentence>& sentences);

// Companion TSV mapping sent_id to paragraph_id.
std::unordered_map<std::string, std::string> load_sentence_map(
    const std::filesystem::path& path);
void apply_sentence_map(std::vector<ParsedSentence>& sentences,
                        const std::unordered_map<std::string, std::string>& map);

// Subject/verb/object triple for one VERB token. The noun phrase is the head
// noun's lemma plus amod/compound dependents, lowercased, in surface order.
// A passive subject (nsubj:pass) fills the object slot; the tuple is only
// emitted when an active subject exists.
struct SvoTuple {
    std::string paragraph_id;
    std::string sent_id;
    int year = 0;
    std::vector<std::string> subject_np;
    std::string verb_lemma;
    std::optional<std::vector<std::string>> object_np;
    bool object_from_passive = false;
    bool negated = false;
};

struct SvPair {
    std::string paragraph_id;
    std::string sent_id;
    int year = 0;
    std::vector<std::string> subject_np;
    std::string verb_lemma;
    bool negated = false;
};

std::vector<SvoTuple> extract_svo(const ParsedSentence& sentence);

// Every VERB with an active nsubj, whether or not an object exists. The SVO
// tuples are always a subset of these pairs projected to (subject, verb).
std::vector<SvPair> extract_subject_verb(const ParsedSentence& sentence);

// Canonical label names whose surface forms appear among the noun phrase
// words, in label order.
std::vector<std::string> np_contains_label(const std::vector<std::string>& np_words,
                                           const std::vector<LabelSet>& labels);

} // namespace dehum
