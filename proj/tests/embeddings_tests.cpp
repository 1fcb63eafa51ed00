#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "dehum/embeddings.hpp"
#include "dehum/error.hpp"
#include "dehum/rng.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dehum;
using namespace dehum::testing;

namespace {

TrainConfig toy_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.dim = 16;
    cfg.window = 4;
    cfg.epochs = 3;
    cfg.negative_samples = 5;
    cfg.min_count = 2;
    cfg.subsample_threshold = 1e-3;
    cfg.seed = seed;
    cfg.workers = 1;
    return cfg;
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "dehum_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("vocabulary is ordered by count, ties by word") {
    std::vector<std::vector<std::string>> sentences = {
        {"pear", "apple", "apple", "plum", "plum", "fig"},
        {"apple", "plum", "pear", "fig", "apple", "plum"},
    };
    TrainConfig cfg = toy_config(1);
    cfg.min_count = 1;
    cfg.epochs = 1;
    cfg.window = 2;
    auto model = train_skipgram(sentences, cfg);

    REQUIRE(model.vocab_size() == 4);
    CHECK(model.words[0] == "apple"); // count 4
    CHECK(model.words[1] == "plum");  // count 4, later alphabetically
    CHECK(model.counts[0] == 4);
    CHECK(model.counts[1] == 4);
    CHECK(model.words[2] == "fig"); // count 2, before pear
    CHECK(model.words[3] == "pear");
    CHECK(model.corpus_tokens == 12);
    for (std::size_t i = 0; i < model.vocab_size(); ++i)
        CHECK(model.index_of(model.words[i]) == i);
    CHECK_FALSE(model.index_of("missing").has_value());
}

TEST_CASE("min_count prunes rare words but corpus_tokens keeps them") {
    std::vector<std::vector<std::string>> sentences = {
        {"common", "common", "common", "rare", "common", "common"},
    };
    TrainConfig cfg = toy_config(1);
    cfg.min_count = 2;
    cfg.epochs = 1;
    auto model = train_skipgram(sentences, cfg);
    CHECK(model.vocab_size() == 1);
    CHECK(model.words[0] == "common");
    CHECK(model.corpus_tokens == 6);
}

TEST_CASE("training with one worker is bit-reproducible") {
    auto corpus = make_toy_corpus(42, 120);
    auto a = train_skipgram(corpus.sentences, toy_config(9));
    auto b = train_skipgram(corpus.sentences, toy_config(9));
    CHECK(a.words == b.words);
    CHECK(a.counts == b.counts);
    REQUIRE(a.input.size() == b.input.size());
    CHECK(a.input == b.input);
    CHECK(a.context == b.context);
    CHECK(a.epoch_losses == b.epoch_losses);

    auto c = train_skipgram(corpus.sentences, toy_config(10));
    CHECK(c.input != a.input); // different seed actually changes something
}

TEST_CASE("epoch losses are recorded and mostly non-increasing across seeds") {
    auto corpus = make_toy_corpus(7, 150);
    int violations = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto cfg = toy_config(seed);
        cfg.epochs = 4;
        auto model = train_skipgram(corpus.sentences, cfg);
        REQUIRE(model.epoch_losses.size() == 4);
        for (double loss : model.epoch_losses) CHECK(loss > 0.0);
        bool monotone = true;
        for (std::size_t e = 1; e < model.epoch_losses.size(); ++e)
            if (model.epoch_losses[e] > model.epoch_losses[e - 1]) monotone = false;
        if (!monotone) ++violations;
    }
    CHECK(violations <= 1);
}

TEST_CASE("trained clusters put same-topic words together") {
    auto corpus = make_toy_corpus(3, 250);
    auto model = train_skipgram(corpus.sentences, toy_config(5));
    postprocess(model);

    auto idx = model.index_of("alpha000");
    REQUIRE(idx.has_value());
    auto neighbors = nearest_neighbors(model, model.row(*idx), 11);
    REQUIRE(neighbors.size() == 11);
    CHECK(model.words[neighbors[0].index] == "alpha000"); // itself, cosine 1
    CHECK(neighbors[0].cosine == doctest::Approx(1.0).epsilon(1e-9));
    int same_cluster = 0;
    for (std::size_t i = 1; i < neighbors.size(); ++i) {
        if (model.words[neighbors[i].index].rfind("alpha", 0) == 0) ++same_cluster;
    }
    CHECK(same_cluster >= 7);
}

TEST_CASE("postprocess centers then normalizes, and an independent recompute agrees") {
    auto corpus = make_toy_corpus(8, 100);
    auto model = train_skipgram(corpus.sentences, toy_config(2));
    auto raw = model;
    postprocess(model);
    CHECK(model.postprocessed);

    const std::size_t v = model.vocab_size();
    const std::size_t dim = static_cast<std::size_t>(model.dim);

    // row norms land on 1
    for (std::size_t i = 0; i < v; ++i) {
        double norm = 0.0;
        for (double x : model.row(i)) norm += x * x;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) <= 1e-9);
    }

    // redo the transform from the raw copy: center columns, check the
    // intermediate is centered, normalize, compare
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t k = 0; k < dim; ++k) mean[k] += raw.input[i * dim + k];
    for (double& m : mean) m /= static_cast<double>(v);

    std::vector<double> centered = raw.input;
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t k = 0; k < dim; ++k) centered[i * dim + k] -= mean[k];

    for (std::size_t k = 0; k < dim; ++k) {
        double column = 0.0;
        for (std::size_t i = 0; i < v; ++i) column += centered[i * dim + k];
        CHECK(std::fabs(column / static_cast<double>(v)) <= 1e-9);
    }

    for (std::size_t i = 0; i < v; ++i) {
        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) norm += centered[i * dim + k] * centered[i * dim + k];
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < dim; ++k)
            CHECK(model.input[i * dim + k] ==
                  doctest::Approx(centered[i * dim + k] / norm).epsilon(1e-12));
    }

    CHECK_THROWS_AS(postprocess(model), Error); // refuses to run twice
}

TEST_CASE("postprocess rejects a degenerate model") {
    EmbeddingModel m = make_random_model(1, 3, 4);
    // identical rows center to zero
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 4; ++k) m.input[i * 4 + k] = 0.5;
    CHECK_THROWS_AS(postprocess(m), Error);
}

TEST_CASE("warm start at zero epochs is the parent on shared vocabulary") {
    auto corpus = make_toy_corpus(21, 150);
    auto parent = train_skipgram(corpus.sentences, toy_config(4));

    // year slice: a subset of sentences plus a burst of a brand-new word
    std::vector<std::vector<std::string>> year(corpus.sentences.begin(),
                                               corpus.sentences.begin() + 80);
    year.push_back({"novel", "novel", "novel", "novel", "alpha000", "beta000"});

    auto cfg = toy_config(4);
    cfg.epochs = 0;
    auto child = train_year_model(parent, year, cfg);

    REQUIRE(child.index_of("novel").has_value());
    const std::size_t dim = static_cast<std::size_t>(child.dim);
    int shared = 0;
    for (std::size_t i = 0; i < child.vocab_size(); ++i) {
        auto pi = parent.index_of(child.words[i]);
        if (!pi) continue;
        ++shared;
        for (std::size_t k = 0; k < dim; ++k) {
            // exact equality: epochs=0 may not perturb anything
            CHECK(child.input[i * dim + k] == parent.input[*pi * dim + k]);
            CHECK(child.context[i * dim + k] == parent.context[*pi * dim + k]);
        }
    }
    CHECK(shared > 10);

    // new words follow the fresh-init scheme: small uniform input, zero context
    auto novel = *child.index_of("novel");
    for (std::size_t k = 0; k < dim; ++k) {
        CHECK(std::fabs(child.input[novel * dim + k]) <= 0.5 / child.dim);
        CHECK(child.context[novel * dim + k] == 0.0);
    }

    // a postprocessed parent is rejected
    postprocess(parent);
    CHECK_THROWS_AS(train_year_model(parent, year, cfg), Error);
}

TEST_CASE("diachronic training yields years ascending then the full model, per run") {
    auto corpus = make_toy_corpus(11, 60);
    std::map<int, std::vector<std::vector<std::string>>> by_year;
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
        by_year[2000 + static_cast<int>(i % 3)].push_back(corpus.sentences[i]);

    auto cfg = toy_config(6);
    cfg.epochs = 1;

    struct Call {
        int run;
        std::optional<int> year;
        std::uint64_t seed;
        std::vector<double> first_row;
    };
    std::vector<Call> calls;
    train_diachronic(by_year, cfg, 2, [&](int run, std::optional<int> year, EmbeddingModel&& m) {
        auto row = m.row(0);
        calls.push_back({run, year, m.config.seed,
                         std::vector<double>(row.begin(), row.end())});
    });

    REQUIRE(calls.size() == 8); // 2 runs x (3 years + full)
    for (int run = 0; run < 2; ++run) {
        std::size_t base = static_cast<std::size_t>(run) * 4;
        CHECK(calls[base + 0].year == 2000);
        CHECK(calls[base + 1].year == 2001);
        CHECK(calls[base + 2].year == 2002);
        CHECK_FALSE(calls[base + 3].year.has_value());
        for (std::size_t i = 0; i < 4; ++i) CHECK(calls[base + i].run == run);
    }
    // distinct run seeds produce distinct models
    CHECK(calls[0].seed != calls[4].seed);
    CHECK(calls[3].first_row != calls[7].first_row);
}

TEST_CASE("nearest neighbors match the full-scan oracle") {
    auto model = make_random_model(17, 400, 12);
    SplitMix64 rng(3);

    for (int trial = 0; trial < 12; ++trial) {
        std::vector<double> query(12);
        if (trial % 2 == 0) {
            auto row = model.row(rng.next_below(400));
            std::copy(row.begin(), row.end(), query.begin());
        } else {
            for (double& q : query) q = rng.next_double() * 2.0 - 1.0;
        }
        std::unordered_set<std::string> exclude;
        if (trial % 3 == 0) exclude = {model.words[0], model.words[5], model.words[17]};
        std::size_t k = std::vector<std::size_t>{1, 5, 50, 399, 500}[trial % 5];

        auto got = nearest_neighbors(model, query, k, exclude);
        auto expected = oracle_neighbors(model, query, k, exclude);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].index == expected[i].index);
            CHECK(got[i].cosine == doctest::Approx(expected[i].cosine).epsilon(1e-12));
        }
    }
}

TEST_CASE("neighbor ties break by ascending vocabulary index") {
    auto model = make_random_model(23, 10, 6);
    // rows 4 and 7 parallel to the query, row 2 anti-parallel
    std::vector<double> query = {1, 0, 0, 0, 0, 0};
    auto set_row = [&](std::size_t i, double scale) {
        for (std::size_t k = 0; k < 6; ++k) model.input[i * 6 + k] = 0.0;
        model.input[i * 6 + 0] = scale;
    };
    set_row(4, 2.0);
    set_row(7, 0.5);
    set_row(2, -1.0);

    auto got = nearest_neighbors(model, query, 3);
    REQUIRE(got.size() == 3);
    CHECK(got[0].index == 4); // cosine 1 ties resolved by index
    CHECK(got[1].index == 7);
    CHECK(got[0].cosine == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(got[1].cosine == doctest::Approx(1.0).epsilon(1e-12));

    // asking for more than exists returns everything
    auto all = nearest_neighbors(model, query, 99);
    CHECK(all.size() == 10);
    // excluded words are genuinely gone
    auto without = nearest_neighbors(model, query, 99, {model.words[4]});
    CHECK(without.size() == 9);
    for (const auto& n : without) CHECK(n.index != 4);
}

TEST_CASE("label_vector is the unit-scaled count-weighted mean") {
    auto model = make_random_model(31, 20, 8);
    model.counts[3] = 90;
    model.counts[8] = 10;

    LabelSet label{"gay", {model.words[3], model.words[8], "notinvocab"}, false};
    auto got = label_vector(model, label);
    REQUIRE(got.has_value());

    std::vector<double> expected(8, 0.0);
    for (std::size_t k = 0; k < 8; ++k)
        expected[k] = 0.9 * model.input[3 * 8 + k] + 0.1 * model.input[8 * 8 + k];
    double norm = 0.0;
    for (double x : expected) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK((*got)[k] == doctest::Approx(expected[k] / norm).epsilon(1e-12));

    // permuting the surface forms changes nothing, bit for bit
    LabelSet flipped{"gay", {"notinvocab", model.words[8], model.words[3]}, false};
    auto other = label_vector(model, flipped);
    REQUIRE(other.has_value());
    CHECK(*other == *got);

    LabelSet absent{"none", {"ghost", "phantom"}, false};
    CHECK_FALSE(label_vector(model, absent).has_value());

    // single-form label on a postprocessed model is that word's unit row
    LabelSet single{"one", {model.words[5]}, false};
    auto one = label_vector(model, single);
    double cos = cosine_similarity(*one, model.row(5));
    CHECK(cos == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("concept vectors expand stems against the vocabulary") {
    auto model = make_random_model(37, 30, 6);
    StemDictionary dict;
    dict.category = "moral_disgust";
    dict.entries = {{"w00", true}, {"w012", false}};

    auto vec = concept_vector_from_stems(model, dict);
    REQUIRE(vec.has_value());
    CHECK(vec->name == "moral_disgust");
    // w000..w009 match the prefix plus the exact w012
    std::vector<std::string> expected_members;
    for (const auto& w : model.words)
        if (w.rfind("w00", 0) == 0 || w == "w012") expected_members.push_back(w);
    CHECK(vec->member_words == expected_members);

    double norm = 0.0;
    for (double x : vec->direction) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));

    // count-weighted mean, computed the slow way
    std::vector<double> mean(6, 0.0);
    double total = 0.0;
    for (const auto& w : expected_members) {
        auto idx = *model.index_of(w);
        for (std::size_t k = 0; k < 6; ++k)
            mean[k] += static_cast<double>(model.counts[idx]) * model.input[idx * 6 + k];
        total += static_cast<double>(model.counts[idx]);
    }
    double mnorm = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        mean[k] /= total;
        mnorm += mean[k] * mean[k];
    }
    mnorm = std::sqrt(mnorm);
    for (std::size_t k = 0; k < 6; ++k)
        CHECK(vec->direction[k] == doctest::Approx(mean[k] / mnorm).epsilon(1e-12));

    StemDictionary miss;
    miss.category = "nothing";
    miss.entries = {{"zzz", true}};
    CHECK_FALSE(concept_vector_from_stems(model, miss).has_value());

    auto from_words = concept_vector_from_words(model, "vermin", {"w003", "w007", "ghost"});
    REQUIRE(from_words.has_value());
    CHECK(from_words->member_words == std::vector<std::string>{"w003", "w007"});
}

TEST_CASE("cosine similarity basics") {
    std::vector<double> a = {1, 0, 0};
    std::vector<double> b = {0, 1, 0};
    std::vector<double> c = {2, 0, 0};
    std::vector<double> zero = {0, 0, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine_similarity(a, c) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> na = {-1, 0, 0};
    CHECK(cosine_similarity(a, na) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_similarity(a, zero), Error);
    std::vector<double> shorter = {1, 0};
    CHECK_THROWS_AS(cosine_similarity(a, shorter), Error);
}

TEST_CASE("model files round-trip through float32 storage") {
    auto corpus = make_toy_corpus(19, 80);
    auto model = train_skipgram(corpus.sentences, toy_config(12));
    auto path = temp_path("model.dhem");

    save_model(model, path);
    auto loaded = load_model(path);
    CHECK(loaded.dim == model.dim);
    CHECK(loaded.words == model.words);
    CHECK(loaded.counts == model.counts);
    CHECK(loaded.corpus_tokens == model.corpus_tokens);
    CHECK_FALSE(loaded.postprocessed);
    REQUIRE(loaded.input.size() == model.input.size());
    for (std::size_t i = 0; i < model.input.size(); ++i) {
        CHECK(loaded.input[i] == static_cast<double>(static_cast<float>(model.input[i])));
        CHECK(loaded.context[i] == static_cast<double>(static_cast<float>(model.context[i])));
    }

    // a second trip is the identity: float32 values survive exactly
    auto path2 = temp_path("model2.dhem");
    save_model(loaded, path2);
    auto again = load_model(path2);
    CHECK(again.input == loaded.input);
    CHECK(again.context == loaded.context);

    postprocess(loaded);
    CHECK_THROWS_AS(save_model(loaded, path2), Error);
    CHECK_THROWS_AS(load_model(temp_path("missing.dhem")), Error);
}

TEST_CASE("tfidf statistics follow the smoothed formula") {
    std::vector<Paragraph> paragraphs(4);
    paragraphs[0].tokens = {"apple", "apple", "pear"};
    paragraphs[1].tokens = {"apple"};
    paragraphs[2].tokens = {"pear", "plum"};
    paragraphs[3].tokens = {"plum"};

    auto stats = compute_tfidf(paragraphs);
    CHECK(stats.documents == 4);
    // idf = ln(N / (1 + df)) + 1, df counted once per document
    CHECK(stats.idf.at("apple") == doctest::Approx(std::log(4.0 / 3.0) + 1.0).epsilon(1e-12));
    CHECK(stats.idf.at("pear") == doctest::Approx(std::log(4.0 / 3.0) + 1.0).epsilon(1e-12));
    CHECK(stats.idf.at("plum") == doctest::Approx(std::log(4.0 / 3.0) + 1.0).epsilon(1e-12));
    CHECK(stats.idf.count("missing") == 0);
}

TEST_CASE("paragraph embeddings match an independent reconstruction") {
    // a model with a planted dominant direction so the principal component
    // is unambiguous
    const int dim = 8;
    auto model = make_random_model(41, 60, dim);
    SplitMix64 rng(14);
    for (std::size_t i = 0; i < 60; ++i) {
        double along = rng.next_double() * 4.0 - 2.0;
        for (int k = 0; k < dim; ++k)
            model.input[i * dim + k] = (k == 0 ? along : 0.0) +
                                       (rng.next_double() - 0.5) * 0.2;
    }

    std::vector<Paragraph> paragraphs(30);
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        int len = 3 + static_cast<int>(rng.next_below(8));
        for (int t = 0; t < len; ++t)
            paragraphs[p].tokens.push_back(model.words[rng.next_below(60)]);
    }
    paragraphs[12].tokens = {"ghost", "phantom"}; // nothing in vocabulary

    auto tfidf = compute_tfidf(paragraphs);
    auto matrix = paragraph_embeddings(model, paragraphs, tfidf);
    REQUIRE(matrix.rows == paragraphs.size());
    CHECK(matrix.empty_row[12] == 1);
    for (int k = 0; k < dim; ++k) CHECK(matrix.row(12)[k] == 0.0);

    // independent reconstruction of the pre-removal rows
    std::vector<double> raw(paragraphs.size() * dim, 0.0);
    double default_idf = std::log(static_cast<double>(tfidf.documents)) + 1.0;
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        std::map<std::string, double> counts;
        for (const auto& t : paragraphs[p].tokens)
            if (model.index_of(t)) counts[t] += 1.0;
        if (counts.empty()) continue;
        double total = 0.0;
        for (const auto& [word, count] : counts) {
            auto it = tfidf.idf.find(word);
            double w = count * (it == tfidf.idf.end() ? default_idf : it->second);
            auto row = model.row(*model.index_of(word));
            for (int k = 0; k < dim; ++k) raw[p * dim + k] += w * row[k];
            total += w;
        }
        for (int k = 0; k < dim; ++k) raw[p * dim + k] /= total;
    }

    auto cov = oracle_row_covariance(raw, paragraphs.size(), dim, matrix.empty_row);
    auto pc = oracle_top_eigenvector(cov, dim);
    REQUIRE(matrix.first_pc.size() == static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k)
        CHECK(matrix.first_pc[k] == doctest::Approx(pc[k]).epsilon(1e-8));

    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        if (matrix.empty_row[p]) continue;
        double proj = 0.0;
        for (int k = 0; k < dim; ++k) proj += raw[p * dim + k] * pc[k];
        double residual = 0.0;
        for (int k = 0; k < dim; ++k) {
            double expected = raw[p * dim + k] - proj * pc[k];
            CHECK(matrix.row(p)[k] == doctest::Approx(expected).epsilon(1e-8));
            residual += matrix.row(p)[k] * matrix.first_pc[k];
        }
        // removal really removed the direction
        CHECK(std::fabs(residual) <= 1e-8);
    }
}

TEST_CASE("training validates its configuration") {
    std::vector<std::vector<std::string>> sentences = {{"a", "b", "a", "b"}};
    TrainConfig cfg = toy_config(1);
    cfg.dim = 1;
    CHECK_THROWS_AS(train_skipgram(sentences, cfg), ConfigError);
    cfg = toy_config(1);
    cfg.epochs = 0; // allowed only for warm starts
    CHECK_THROWS_AS(train_skipgram(sentences, cfg), ConfigError);
    cfg = toy_config(1);
    cfg.window = 0;
    CHECK_THROWS_AS(train_skipgram(sentences, cfg), ConfigError);
    cfg = toy_config(1);
    cfg.negative_samples = 0;
    CHECK_THROWS_AS(train_skipgram(sentences, cfg), ConfigError);

    cfg = toy_config(1);
    cfg.min_count = 10;
    CHECK_THROWS_AS(train_skipgram(sentences, cfg), Error); // empty vocabulary
}
