#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dehum/corpus.hpp"
#include "dehum/lexicons.hpp"

namespace dehum {

struct TrainConfig {
    int dim = 100;
    int window = 10; // per-position radius is drawn uniformly from [1, window]
    int epochs = 10;
    int negative_samples = 5;
    int min_count = 5;
    double subsample_threshold = 1e-3; // 0 disables subsampling
    double initial_lr = 0.025;
    double min_lr = 1e-4;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate(bool allow_zero_epochs = false) const;
};

// Skip-gram word vectors with negative sampling. Vocabulary is ordered by
// descending count, ties broken by word. Matrices are row-major |V| x dim;
// in memory they are doubles, the on-disk format stores float32.
struct EmbeddingModel {
    int dim = 0;
    std::vector<std::string> words;
    std::unordered_map<std::string, std::size_t> vocab;
    std::vector<std::int64_t> counts;
    std::vector<double> input;   // the word vectors used downstream
    std::vector<double> context; // output-side matrix, kept for warm starts
    bool postprocessed = false;

    TrainConfig config{};
    std::vector<double> epoch_losses; // mean pair loss per epoch
    std::int64_t corpus_tokens = 0;   // tokens seen before min_count pruning

    std::size_t vocab_size() const { return words.size(); }
    std::optional<std::size_t> index_of(std::string_view word) const;
    std::span<const double> row(std::size_t index) const;
    std::span<double> row(std::size_t index);
    std::span<const double> context_row(std::size_t index) const;
};

// Trains from scratch. Deterministic for a fixed seed when workers == 1;
// more workers update the matrices concurrently without locks, which is the
// standard speed/reproducibility trade for this trainer.
EmbeddingModel train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                              const TrainConfig& config);

// Warm start: vocabulary is rebuilt from `sentences`, rows of words shared
// with `parent` start as copies of the parent rows (both matrices), new
// words get fresh random rows. epochs == 0 is allowed and returns the
// initialization unchanged.
EmbeddingModel train_year_model(const EmbeddingModel& parent,
                                const std::vector<std::vector<std::string>>& sentences,
                                const TrainConfig& config);

// One full-corpus model per run seeds that run's per-year models. The sink
// receives (run, year, model) with year empty for the full model; year
// models arrive in ascending year order, the full model last. Years with no
// sentences are skipped with a warning.
void train_diachronic(const std::map<int, std::vector<std::vector<std::string>>>& by_year,
                      const TrainConfig& config, int runs,
                      const std::function<void(int run, std::optional<int> year,
                                               EmbeddingModel&& model)>& sink);

// Centers every column of the input matrix, then scales every row to unit
// L2 norm. Refuses to run twice and refuses models where centering leaves a
// zero row.
void postprocess(EmbeddingModel& model);

// Count-weighted mean of the vectors of the label's surface forms present
// in the vocabulary, scaled to unit length (members accumulated in
// vocabulary order, so any permutation of equal surface forms produces
// bit-identical output). Returns nothing when no form is in the vocabulary.
std::optional<std::vector<double>> label_vector(const EmbeddingModel& model,
                                                const LabelSet& label);

struct Neighbor {
    std::size_t index;
    double cosine;
};

// k nearest vocabulary words by cosine, excluding exact matches of the
// excluded words. Ordered by descending cosine, ties by ascending index.
// Asks for more neighbors than exist: returns what exists.
std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model,
                                        std::span<const double> query, std::size_t k,
                                        const std::unordered_set<std::string>& exclude = {});

struct ConceptVector {
    std::string name;
    std::vector<double> direction; // count-weighted mean of member vectors, unit length
    std::vector<std::string> member_words;
};

// Aggregates the vectors of every vocabulary word matching the stem
// dictionary. Returns nothing when no word matches.
std::optional<ConceptVector> concept_vector_from_stems(const EmbeddingModel& model,
                                                       const StemDictionary& stems);
std::optional<ConceptVector> concept_vector_from_words(const EmbeddingModel& model,
                                                       const std::string& name,
                                                       const std::vector<std::string>& words);

struct TfidfStats {
    std::unordered_map<std::string, double> idf; // ln(N / (1 + df)) + 1
    std::int64_t documents = 0;
};

TfidfStats compute_tfidf(const std::vector<Paragraph>& paragraphs);

// Tf-idf weighted mean of in-vocabulary token vectors per paragraph, with
// the first principal component of the set removed from every row. Rows for
// paragraphs with no in-vocabulary tokens are flagged and left at zero.
struct ParagraphMatrix {
    std::size_t rows = 0;
    int dim = 0;
    std::vector<double> data;        // rows x dim
    std::vector<char> empty_row;     // 1 when the paragraph had no usable tokens
    std::vector<double> first_pc;    // unit vector removed from the rows

    std::span<const double> row(std::size_t index) const;
};

ParagraphMatrix paragraph_embeddings(const EmbeddingModel& model,
                                     const std::vector<Paragraph>& paragraphs,
                                     const TfidfStats& tfidf);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Binary model file: magic "DHEM1", dim, vocab size, word table with counts,
// then both matrices as row-major little-endian float32. Postprocessed
// models cannot be saved; the format stores raw training state.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);

// "word v1 ... vd" lines, vocabulary order, shortest round-trip formatting.
void write_text_embeddings(const EmbeddingModel& model, const std::filesystem::path& path);

} // namespace dehum
