#include "dehum/embeddings.hpp"

#include "dehum/error.hpp"
#include "dehum/log.hpp"
#include "dehum/rng.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

namespace dehum {

void TrainConfig::validate(bool allow_zero_epochs) const {
    if (dim < 2) throw ConfigError("train.dim must be >= 2");
    if (window < 1) throw ConfigError("train.window must be >= 1");
    if (epochs < (allow_zero_epochs ? 0 : 1))
        throw ConfigError(allow_zero_epochs ? "train.epochs must be >= 0"
                                            : "train.epochs must be >= 1");
    if (negative_samples < 1) throw ConfigError("train.negative_samples must be >= 1");
    if (min_count < 1) throw ConfigError("train.min_count must be >= 1");
    if (subsample_threshold < 0) throw ConfigError("train.subsample_threshold must be >= 0");
    if (initial_lr <= 0 || min_lr <= 0 || min_lr > initial_lr)
        throw ConfigError("train learning rates must satisfy 0 < min_lr <= initial_lr");
    if (workers < 1) throw ConfigError("train.workers must be >= 1");
}

namespace {

constexpr double kMaxExp = 6.0;
constexpr int kExpTableSize = 1024;
constexpr std::size_t kUnigramTableSize = 1 << 20;

struct SigmoidTable {
    std::array<double, kExpTableSize> values{};

    SigmoidTable() {
        for (int i = 0; i < kExpTableSize; ++i) {
            double x = (2.0 * i / kExpTableSize - 1.0) * kMaxExp;
            double e = std::exp(x);
            values[i] = e / (e + 1.0);
        }
    }

    // f is clamped into (-kMaxExp, kMaxExp) by the caller.
    double operator()(double f) const {
        int idx = static_cast<int>((f + kMaxExp) * (kExpTableSize / (2.0 * kMaxExp)));
        if (idx < 0) idx = 0;
        if (idx >= kExpTableSize) idx = kExpTableSize - 1;
        return values[idx];
    }
};

const SigmoidTable& sigmoid_table() {
    static const SigmoidTable table;
    return table;
}

struct VocabBuild {
    std::vector<std::string> words;
    std::vector<std::int64_t> counts;
    std::unordered_map<std::string, std::size_t> vocab;
    std::vector<std::vector<int>> encoded; // per sentence, OOV dropped
    std::int64_t raw_tokens = 0;           // before min_count pruning
    std::int64_t train_words = 0;          // sum of retained counts
};

VocabBuild build_vocab(const std::vector<std::vector<std::string>>& sentences, int min_count) {
    VocabBuild out;
    std::unordered_map<std::string, std::int64_t> freq;
    for (const auto& sentence : sentences) {
        for (const auto& w : sentence) {
            ++freq[w];
            ++out.raw_tokens;
        }
    }

    std::vector<std::pair<std::string, std::int64_t>> kept;
    kept.reserve(freq.size());
    for (auto& [word, count] : freq) {
        if (count >= min_count) kept.emplace_back(word, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    out.words.reserve(kept.size());
    out.counts.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out.vocab.emplace(kept[i].first, i);
        out.words.push_back(std::move(kept[i].first));
        out.counts.push_back(kept[i].second);
        out.train_words += kept[i].second;
    }

    out.encoded.reserve(sentences.size());
    for (const auto& sentence : sentences) {
        std::vector<int> ids;
        ids.reserve(sentence.size());
        for (const auto& w : sentence) {
            auto it = out.vocab.find(w);
            if (it != out.vocab.end()) ids.push_back(static_cast<int>(it->second));
        }
        if (!ids.empty()) out.encoded.push_back(std::move(ids));
    }
    return out;
}

// Negative-sampling table: words enter proportionally to count^0.75.
std::vector<int> build_unigram_table(const std::vector<std::int64_t>& counts) {
    const double power = 0.75;
    double total = 0.0;
    for (auto c : counts) total += std::pow(static_cast<double>(c), power);

    std::vector<int> table(kUnigramTableSize);
    std::size_t i = 0;
    double cumulative = std::pow(static_cast<double>(counts[0]), power) / total;
    for (std::size_t a = 0; a < kUnigramTableSize; ++a) {
        table[a] = static_cast<int>(i);
        if (static_cast<double>(a) / kUnigramTableSize > cumulative) {
            ++i;
            if (i >= counts.size()) i = counts.size() - 1;
            else cumulative += std::pow(static_cast<double>(counts[i]), power) / total;
        }
    }
    return table;
}

struct EpochResult {
    double loss_sum = 0;
    std::int64_t pairs = 0;
};

struct Trainer {
    EmbeddingModel& model;
    const std::vector<std::vector<int>>& sentences;
    const std::vector<int>& unigram;
    const TrainConfig& config;
    std::int64_t train_words = 0;
    std::int64_t total_schedule = 0; // epochs * train_words, drives lr decay
    std::atomic<std::int64_t> words_processed{0};
    std::vector<SplitMix64> worker_rngs;

    Trainer(EmbeddingModel& m, const std::vector<std::vector<int>>& s,
            const std::vector<int>& u, const TrainConfig& c, std::int64_t words)
        : model(m), sentences(s), unigram(u), config(c), train_words(words) {
        total_schedule = static_cast<std::int64_t>(config.epochs) * train_words;
        for (int w = 0; w < config.workers; ++w)
            worker_rngs.emplace_back(mix_seed(config.seed, 0x1000 + static_cast<std::uint64_t>(w)));
    }

    EpochResult run_worker(int worker_id) {
        const int dim = model.dim;
        const int window = config.window;
        const int negative = config.negative_samples;
        const double sample = config.subsample_threshold;
        const double sample_words = sample * static_cast<double>(train_words);
        const auto& sigma = sigmoid_table();
        SplitMix64& rng = worker_rngs[worker_id];
        double* input = model.input.data();
        double* context = model.context.data();

        EpochResult result;
        std::vector<int> sen;
        std::vector<double> neu1e(static_cast<std::size_t>(dim), 0.0);
        double alpha = config.initial_lr;

        for (std::size_t sidx = worker_id; sidx < sentences.size();
             sidx += static_cast<std::size_t>(config.workers)) {
            const auto& sentence = sentences[sidx];

            std::int64_t processed =
                words_processed.fetch_add(static_cast<std::int64_t>(sentence.size())) +
                static_cast<std::int64_t>(sentence.size());
            alpha = config.initial_lr *
                    (1.0 - static_cast<double>(processed) /
                               static_cast<double>(total_schedule + 1));
            if (alpha < config.min_lr) alpha = config.min_lr;

            sen.clear();
            for (int id : sentence) {
                if (sample > 0.0) {
                    double cn = static_cast<double>(model.counts[static_cast<std::size_t>(id)]);
                    double keep = (std::sqrt(cn / sample_words) + 1.0) * sample_words / cn;
                    if (keep < 1.0 && rng.next_double() >= keep) continue;
                }
                sen.push_back(id);
            }

            const int len = static_cast<int>(sen.size());
            for (int pos = 0; pos < len; ++pos) {
                const int center = sen[pos];
                const int radius = 1 + static_cast<int>(rng.next_below(
                                           static_cast<std::uint64_t>(window)));
                for (int c = pos - radius; c <= pos + radius; ++c) {
                    if (c == pos || c < 0 || c >= len) continue;
                    double* v_in = input + static_cast<std::size_t>(sen[c]) * dim;
                    for (int k = 0; k < dim; ++k) neu1e[k] = 0.0;

                    for (int d = 0; d <= negative; ++d) {
                        int target;
                        double label;
                        if (d == 0) {
                            target = center;
                            label = 1.0;
                            ++result.pairs;
                        } else {
                            target = unigram[rng.next_below(kUnigramTableSize)];
                            if (target == center) continue;
                            label = 0.0;
                        }
                        double* v_out = context + static_cast<std::size_t>(target) * dim;
                        double f = 0.0;
                        for (int k = 0; k < dim; ++k) f += v_in[k] * v_out[k];

                        double clipped = f;
                        if (clipped > kMaxExp) clipped = kMaxExp - 1e-9;
                        if (clipped < -kMaxExp) clipped = -kMaxExp + 1e-9;
                        double s = sigma(clipped);

                        double g;
                        if (f > kMaxExp) g = (label - 1.0) * alpha;
                        else if (f < -kMaxExp) g = label * alpha;
                        else g = (label - s) * alpha;

                        result.loss_sum += (label == 1.0) ? -std::log(s) : -std::log1p(-s);

                        for (int k = 0; k < dim; ++k) neu1e[k] += g * v_out[k];
                        for (int k = 0; k < dim; ++k) v_out[k] += g * v_in[k];
                    }
                    for (int k = 0; k < dim; ++k) v_in[k] += neu1e[k];
                }
            }
        }
        return result;
    }

    void run() {
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            EpochResult total;
            if (config.workers == 1) {
                total = run_worker(0);
            } else {
                std::vector<EpochResult> results(static_cast<std::size_t>(config.workers));
                std::vector<std::thread> threads;
                threads.reserve(static_cast<std::size_t>(config.workers));
                for (int w = 0; w < config.workers; ++w)
                    threads.emplace_back(
                        [this, w, &results] { results[static_cast<std::size_t>(w)] = run_worker(w); });
                for (auto& t : threads) t.join();
                for (const auto& r : results) {
                    total.loss_sum += r.loss_sum;
                    total.pairs += r.pairs;
                }
            }
            model.epoch_losses.push_back(total.pairs > 0 ? total.loss_sum / total.pairs : 0.0);
        }
    }
};

void init_matrices(EmbeddingModel& model, SplitMix64& rng) {
    const std::size_t size = model.vocab_size() * static_cast<std::size_t>(model.dim);
    model.input.resize(size);
    model.context.assign(size, 0.0);
    for (std::size_t i = 0; i < size; ++i)
        model.input[i] = (rng.next_double() - 0.5) / model.dim;
}

} // namespace

EmbeddingModel train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                              const TrainConfig& config) {
    config.validate(false);
    VocabBuild built = build_vocab(sentences, config.min_count);
    if (built.words.empty())
        throw Error("training corpus has no words above min_count");

    EmbeddingModel model;
    model.dim = config.dim;
    model.words = std::move(built.words);
    model.vocab = std::move(built.vocab);
    model.counts = std::move(built.counts);
    model.config = config;
    model.corpus_tokens = built.raw_tokens;

    SplitMix64 init_rng(mix_seed(config.seed, 0xA11CE));
    init_matrices(model, init_rng);

    std::vector<int> unigram = build_unigram_table(model.counts);
    Trainer trainer(model, built.encoded, unigram, config, built.train_words);
    trainer.run();
    return model;
}

EmbeddingModel train_year_model(const EmbeddingModel& parent,
                                const std::vector<std::vector<std::string>>& sentences,
                                const TrainConfig& config) {
    config.validate(true);
    if (parent.postprocessed)
        throw Error("warm start requires a raw parent model, not a postprocessed one");
    if (config.dim != parent.dim)
        throw ConfigError("year model dim must match the parent model");

    VocabBuild built = build_vocab(sentences, config.min_count);
    if (built.words.empty())
        throw Error("year corpus has no words above min_count");

    EmbeddingModel model;
    model.dim = config.dim;
    model.words = std::move(built.words);
    model.vocab = std::move(built.vocab);
    model.counts = std::move(built.counts);
    model.config = config;
    model.corpus_tokens = built.raw_tokens;

    const std::size_t size = model.vocab_size() * static_cast<std::size_t>(model.dim);
    model.input.assign(size, 0.0);
    model.context.assign(size, 0.0);

    SplitMix64 init_rng(mix_seed(config.seed, 0xA11CE));
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
        auto parent_idx = parent.index_of(model.words[i]);
        if (parent_idx) {
            const double* src_in = parent.input.data() + *parent_idx * dim;
            const double* src_out = parent.context.data() + *parent_idx * dim;
            std::copy(src_in, src_in + dim, model.input.data() + i * dim);
            std::copy(src_out, src_out + dim, model.context.data() + i * dim);
        } else {
            double* dst = model.input.data() + i * dim;
            for (std::size_t k = 0; k < dim; ++k)
                dst[k] = (init_rng.next_double() - 0.5) / model.dim;
        }
    }

    if (config.epochs > 0) {
        std::vector<int> unigram = build_unigram_table(model.counts);
        Trainer trainer(model, built.encoded, unigram, config, built.train_words);
        trainer.run();
    }
    return model;
}

void train_diachronic(const std::map<int, std::vector<std::vector<std::string>>>& by_year,
                      const TrainConfig& config, int runs,
                      const std::function<void(int run, std::optional<int> year,
                                               EmbeddingModel&& model)>& sink) {
    config.validate(false);
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (by_year.empty()) throw Error("no training data");

    std::vector<std::vector<std::string>> all;
    for (const auto& [year, sentences] : by_year)
        all.insert(all.end(), sentences.begin(), sentences.end());

    for (int run = 0; run < runs; ++run) {
        std::uint64_t run_seed = mix_seed(config.seed, static_cast<std::uint64_t>(run));

        TrainConfig full_config = config;
        full_config.seed = run_seed;
        EmbeddingModel full = train_skipgram(all, full_config);

        for (const auto& [year, sentences] : by_year) {
            if (sentences.empty()) {
                log_warn("year " + std::to_string(year) + " has no sentences, skipped");
                continue;
            }
            TrainConfig year_config = config;
            year_config.seed = mix_seed(run_seed, static_cast<std::uint64_t>(year));
            sink(run, year, train_year_model(full, sentences, year_config));
        }
        sink(run, std::nullopt, std::move(full));
    }
}

} // namespace dehum
