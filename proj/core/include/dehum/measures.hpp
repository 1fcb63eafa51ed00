#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dehum/corpus.hpp"
#include "dehum/embeddings.hpp"
#include "dehum/lexicons.hpp"
#include "dehum/syntax.hpp"

namespace dehum {

// Mean affect score of the paragraph's words that appear in the lexicon.
// The surface token is looked up first, its lemma only as a fallback.
// Nothing when no word is covered at all.
std::optional<double> paragraph_affect(const Paragraph& paragraph,
                                       const AffectLexicon& lexicon);

using YearLabel = std::pair<int, std::string>;

struct GroupedObservations {
    std::map<YearLabel, std::vector<double>> values;
    std::int64_t observations = 0;
    std::int64_t verbs_unlexiconed = 0;
};

// One observation per (tuple, argument side) whose noun phrase matches a
// label: subject matches contribute the verb's subject perspective, object
// matches the object perspective. A tuple with the label on both sides
// contributes twice. Verbs missing from the lexicon are counted and skipped.
GroupedObservations perspective_scores(const std::vector<SvoTuple>& tuples,
                                       const PerspectiveLexicon& lexicon,
                                       const std::vector<LabelSet>& labels);

struct AgencyCell {
    std::int64_t positive = 0;
    std::int64_t total = 0;

    double fraction() const {
        return total > 0 ? static_cast<double>(positive) / static_cast<double>(total) : 0.0;
    }
};

struct AgencyCounts {
    std::map<YearLabel, AgencyCell> cells;
    std::int64_t verbs_unlexiconed = 0;
};

// Fraction of label-subject verbs granting positive agency.
AgencyCounts agency_fractions(const std::vector<SvPair>& pairs, const AgencyLexicon& lexicon,
                              const std::vector<LabelSet>& labels);

struct NeighborAffect {
    double mean = 0;
    std::size_t lexicon_hits = 0; // neighbors that carried a score
};

// Mean affect score over the k nearest neighbors of `query` that appear in
// the lexicon. Errors when none of them do.
NeighborAffect neighbor_affect(const EmbeddingModel& model, std::span<const double> query,
                               std::size_t k, const AffectLexicon& lexicon,
                               const std::unordered_set<std::string>& exclude = {});

// 1 - cosine(query, concept direction).
double concept_distance(std::span<const double> query, const ConceptVector& target);

// Ridge regression from word vectors to affect scores over the vocabulary
// words covered by the lexicon, with a seeded 85/15 train/test split.
struct RidgeModel {
    std::vector<double> weights;
    double intercept = 0;
    double alpha = 0;
    int n_train = 0;
    int n_test = 0;
    double train_pearson = 0;
    double train_r2 = 0;
    double test_pearson = 0;
    double test_r2 = 0;
};

RidgeModel fit_ridge_regression(const EmbeddingModel& model, const AffectLexicon& lexicon,
                                double alpha, std::uint64_t split_seed);

double predict_affect(const RidgeModel& model, std::span<const double> vector);

// Candidate filter for extreme-paragraph ranking.
struct ExtremeFilter {
    std::size_t min_tokens = 15;
    std::size_t max_tokens = 75;
    std::vector<LabelSet> required; // paragraph must match at least one
};

std::vector<std::size_t> filter_extreme_candidates(const std::vector<Paragraph>& paragraphs,
                                                   const ExtremeFilter& filter);

// Sum of subset-lexicon scores over all tokens divided by the total token
// count; absent tokens contribute zero and no lemma fallback applies.
double lexicon_mean_score(const Paragraph& paragraph, const AffectLexicon& subset);

struct RankedParagraph {
    std::size_t index; // position in the paragraph vector
    double score;
};

// Descending by score, ties broken by ascending index.
std::vector<RankedParagraph> rank_paragraphs(std::vector<RankedParagraph> scored);

} // namespace dehum
