// Microbenchmarks for the hot paths: trainer throughput, the vocabulary
// neighbor scan, paragraph scoring, and the statistics kernels.

#include <benchmark/benchmark.h>

#include "dehum/corpus.hpp"
#include "dehum/embeddings.hpp"
#include "dehum/lexicons.hpp"
#include "dehum/measures.hpp"
#include "dehum/rng.hpp"
#include "dehum/stats.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

using namespace dehum;

namespace {

std::vector<std::vector<std::string>> synth_sentences(std::uint64_t seed, int count, int len,
                                                      int vocab) {
    SplitMix64 rng(seed);
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(vocab));
    for (int i = 0; i < vocab; ++i) words.push_back("w" + std::to_string(i));
    std::vector<std::vector<std::string>> sentences(static_cast<std::size_t>(count));
    for (auto& s : sentences) {
        s.reserve(static_cast<std::size_t>(len));
        // zipf-ish skew so subsampling and negative sampling have work to do
        for (int t = 0; t < len; ++t) {
            double u = rng.next_double();
            auto idx = static_cast<std::size_t>(u * u * (vocab - 1));
            s.push_back(words[idx]);
        }
    }
    return sentences;
}

EmbeddingModel synth_model(std::uint64_t seed, std::size_t vocab, int dim) {
    EmbeddingModel m;
    m.dim = dim;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < vocab; ++i) {
        std::string word = "w" + std::to_string(i);
        m.vocab[word] = i;
        m.words.push_back(std::move(word));
        m.counts.push_back(static_cast<std::int64_t>(vocab - i + 1));
    }
    m.input.resize(vocab * static_cast<std::size_t>(dim));
    m.context.resize(m.input.size());
    for (double& v : m.input) v = rng.next_double() * 2.0 - 1.0;
    for (double& v : m.context) v = rng.next_double() * 2.0 - 1.0;
    m.config.dim = dim;
    return m;
}

void bm_train_epoch(benchmark::State& state) {
    auto sentences = synth_sentences(1, 2000, 20, 800);
    TrainConfig tc;
    tc.dim = static_cast<int>(state.range(0));
    tc.window = 5;
    tc.epochs = 1;
    tc.min_count = 2;
    tc.seed = 3;
    std::int64_t tokens = 0;
    for (auto _ : state) {
        EmbeddingModel m = train_skipgram(sentences, tc);
        tokens += m.corpus_tokens;
        benchmark::DoNotOptimize(m.input.data());
    }
    state.SetItemsProcessed(tokens);
}
BENCHMARK(bm_train_epoch)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_nearest_neighbors(benchmark::State& state) {
    EmbeddingModel m = synth_model(2, static_cast<std::size_t>(state.range(0)), 100);
    auto query = m.row(17);
    for (auto _ : state) {
        auto n = nearest_neighbors(m, query, 500, {});
        benchmark::DoNotOptimize(n.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_nearest_neighbors)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void bm_paragraph_affect(benchmark::State& state) {
    SplitMix64 rng(5);
    std::unordered_map<std::string, double> entries;
    for (int i = 0; i < 2000; ++i) entries["w" + std::to_string(i)] = rng.next_double();
    AffectLexicon lexicon(AffectDimension::valence, entries);
    std::vector<Paragraph> paragraphs(200);
    for (auto& p : paragraphs) {
        for (int t = 0; t < 60; ++t)
            p.tokens.push_back("w" + std::to_string(rng.next_below(4000)));
        p.lemmas = p.tokens;
    }
    for (auto _ : state) {
        double sum = 0;
        for (const auto& p : paragraphs) sum += paragraph_affect(p, lexicon).value_or(0.0);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paragraphs.size()));
}
BENCHMARK(bm_paragraph_affect);

void bm_lowess(benchmark::State& state) {
    SplitMix64 rng(7);
    const int n = static_cast<int>(state.range(0));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = i;
        y[i] = std::sin(i * 0.05) + 0.3 * (rng.next_double() - 0.5);
    }
    for (auto _ : state) {
        auto fit = lowess(x, y, 0.3, 3);
        benchmark::DoNotOptimize(fit.data());
    }
}
BENCHMARK(bm_lowess)->Arg(100)->Arg(500);

void bm_wilcoxon_exact(benchmark::State& state) {
    SplitMix64 rng(9);
    const int n = static_cast<int>(state.range(0));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = rng.next_double();
        y[i] = rng.next_double();
    }
    for (auto _ : state) {
        auto r = wilcoxon_signed_rank(x, y);
        benchmark::DoNotOptimize(r.p_value);
    }
}
BENCHMARK(bm_wilcoxon_exact)->Arg(15)->Arg(25);

} // namespace

BENCHMARK_MAIN();
