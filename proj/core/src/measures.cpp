#include "dehum/measures.hpp"

#include "dehum/error.hpp"
#include "dehum/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dehum {

std::optional<double> paragraph_affect(const Paragraph& paragraph,
                                       const AffectLexicon& lexicon) {
    double sum = 0.0;
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < paragraph.tokens.size(); ++i) {
        auto score = lexicon.get(paragraph.tokens[i]);
        if (!score && i < paragraph.lemmas.size()) score = lexicon.get(paragraph.lemmas[i]);
        if (score) {
            sum += *score;
            ++hits;
        }
    }
    if (hits == 0) return std::nullopt;
    return sum / static_cast<double>(hits);
}

GroupedObservations perspective_scores(const std::vector<SvoTuple>& tuples,
                                       const PerspectiveLexicon& lexicon,
                                       const std::vector<LabelSet>& labels) {
    GroupedObservations out;
    for (const auto& tuple : tuples) {
        auto scores = lexicon.get(tuple.verb_lemma);
        if (!scores) {
            ++out.verbs_unlexiconed;
            continue;
        }
        for (const auto& label : np_contains_label(tuple.subject_np, labels)) {
            out.values[{tuple.year, label}].push_back(scores->toward_subject);
            ++out.observations;
        }
        if (tuple.object_np) {
            for (const auto& label : np_contains_label(*tuple.object_np, labels)) {
                out.values[{tuple.year, label}].push_back(scores->toward_object);
                ++out.observations;
            }
        }
    }
    return out;
}

AgencyCounts agency_fractions(const std::vector<SvPair>& pairs, const AgencyLexicon& lexicon,
                              const std::vector<LabelSet>& labels) {
    AgencyCounts out;
    for (const auto& pair : pairs) {
        auto label_value = lexicon.get(pair.verb_lemma);
        if (!label_value) {
            ++out.verbs_unlexiconed;
            continue;
        }
        for (const auto& label : np_contains_label(pair.subject_np, labels)) {
            auto& cell = out.cells[{pair.year, label}];
            ++cell.total;
            if (*label_value == AgencyLabel::positive) ++cell.positive;
        }
    }
    return out;
}

NeighborAffect neighbor_affect(const EmbeddingModel& model, std::span<const double> query,
                               std::size_t k, const AffectLexicon& lexicon,
                               const std::unordered_set<std::string>& exclude) {
    auto neighbors = nearest_neighbors(model, query, k, exclude);
    NeighborAffect out;
    double sum = 0.0;
    for (const auto& neighbor : neighbors) {
        auto score = lexicon.get(model.words[neighbor.index]);
        if (score) {
            sum += *score;
            ++out.lexicon_hits;
        }
    }
    if (out.lexicon_hits == 0)
        throw Error("neighbor_affect: none of the " + std::to_string(neighbors.size()) +
                    " neighbors is in the lexicon");
    out.mean = sum / static_cast<double>(out.lexicon_hits);
    return out;
}

double concept_distance(std::span<const double> query, const ConceptVector& target) {
    return 1.0 - cosine_similarity(query, target.direction);
}

namespace {

bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    // in-place LL^T; returns false when the matrix is not positive definite
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    // forward: L z = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    // backward: L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
        b[ii] = s / a[ii * n + ii];
    }
    return true;
}

struct SplitMetrics {
    double pearson = 0;
    double r2 = 0;
};

SplitMetrics evaluate_split(const std::vector<double>& predictions,
                            const std::vector<double>& truth) {
    const std::size_t n = predictions.size();
    double p_mean = 0.0;
    double t_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p_mean += predictions[i];
        t_mean += truth[i];
    }
    p_mean /= static_cast<double>(n);
    t_mean /= static_cast<double>(n);

    double spp = 0.0;
    double stt = 0.0;
    double spt = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dp = predictions[i] - p_mean;
        double dt = truth[i] - t_mean;
        spp += dp * dp;
        stt += dt * dt;
        spt += dp * dt;
        double r = truth[i] - predictions[i];
        ss_res += r * r;
    }
    if (stt == 0.0) throw Error("ridge: constant target values in a split");

    SplitMetrics out;
    out.pearson = (spp == 0.0) ? 0.0 : spt / std::sqrt(spp * stt);
    out.r2 = 1.0 - ss_res / stt;
    return out;
}

} // namespace

RidgeModel fit_ridge_regression(const EmbeddingModel& model, const AffectLexicon& lexicon,
                                double alpha, std::uint64_t split_seed) {
    if (alpha < 0.0) throw ConfigError("ridge alpha must be >= 0");
    const std::size_t dim = static_cast<std::size_t>(model.dim);

    // covered vocabulary in index order, so the split is a pure function of
    // (model, lexicon, seed)
    std::vector<std::size_t> covered;
    std::vector<double> scores;
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
        auto score = lexicon.get(model.words[i]);
        if (score) {
            covered.push_back(i);
            scores.push_back(*score);
        }
    }
    const std::size_t n = covered.size();
    if (n < dim + 4)
        throw Error("ridge: only " + std::to_string(n) +
                    " lexicon words in the vocabulary; need at least dim+4");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(split_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(order[i], order[j]);
    }
    std::size_t n_test = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 3, n - dim - 1);

    RidgeModel out;
    out.alpha = alpha;
    out.n_test = static_cast<int>(n_test);
    out.n_train = static_cast<int>(n - n_test);

    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<long>(n_test));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<long>(n_test), order.end());

    std::vector<double> x_mean(dim, 0.0);
    double y_mean = 0.0;
    for (std::size_t r : train_rows) {
        auto row = model.row(covered[r]);
        for (std::size_t k = 0; k < dim; ++k) x_mean[k] += row[k];
        y_mean += scores[r];
    }
    for (std::size_t k = 0; k < dim; ++k) x_mean[k] /= static_cast<double>(train_rows.size());
    y_mean /= static_cast<double>(train_rows.size());

    std::vector<double> gram(dim * dim, 0.0);
    std::vector<double> rhs(dim, 0.0);
    std::vector<double> centered(dim, 0.0);
    for (std::size_t r : train_rows) {
        auto row = model.row(covered[r]);
        for (std::size_t k = 0; k < dim; ++k) centered[k] = row[k] - x_mean[k];
        double dy = scores[r] - y_mean;
        for (std::size_t a = 0; a < dim; ++a) {
            double ca = centered[a];
            rhs[a] += ca * dy;
            if (ca == 0.0) continue;
            double* gram_row = gram.data() + a * dim;
            for (std::size_t b = 0; b < dim; ++b) gram_row[b] += ca * centered[b];
        }
    }
    for (std::size_t k = 0; k < dim; ++k) gram[k * dim + k] += alpha;

    std::vector<double> weights = rhs;
    if (!cholesky_solve(gram, weights, dim))
        throw Error("ridge: normal equations are singular; increase alpha");

    out.weights = weights;
    double shift = 0.0;
    for (std::size_t k = 0; k < dim; ++k) shift += weights[k] * x_mean[k];
    out.intercept = y_mean - shift;

    auto metrics_for = [&](const std::vector<std::size_t>& rows) {
        std::vector<double> predictions;
        std::vector<double> truth;
        predictions.reserve(rows.size());
        truth.reserve(rows.size());
        for (std::size_t r : rows) {
            predictions.push_back(predict_affect(out, model.row(covered[r])));
            truth.push_back(scores[r]);
        }
        return evaluate_split(predictions, truth);
    };
    SplitMetrics train = metrics_for(train_rows);
    SplitMetrics test = metrics_for(test_rows);
    out.train_pearson = train.pearson;
    out.train_r2 = train.r2;
    out.test_pearson = test.pearson;
    out.test_r2 = test.r2;
    return out;
}

double predict_affect(const RidgeModel& model, std::span<const double> vector) {
    if (vector.size() != model.weights.size())
        throw Error("predict_affect: dimension mismatch");
    double out = model.intercept;
    for (std::size_t k = 0; k < vector.size(); ++k) out += model.weights[k] * vector[k];
    return out;
}

std::vector<std::size_t> filter_extreme_candidates(const std::vector<Paragraph>& paragraphs,
                                                   const ExtremeFilter& filter) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        const auto& p = paragraphs[i];
        if (p.tokens.size() < filter.min_tokens || p.tokens.size() > filter.max_tokens) continue;
        if (!filter.required.empty() && match_labels(p, filter.required).empty()) continue;
        out.push_back(i);
    }
    return out;
}

double lexicon_mean_score(const Paragraph& paragraph, const AffectLexicon& subset) {
    if (paragraph.tokens.empty()) throw Error("lexicon_mean_score: empty paragraph");
    double sum = 0.0;
    for (const auto& token : paragraph.tokens) {
        auto score = subset.get(token);
        if (score) sum += *score;
    }
    return sum / static_cast<double>(paragraph.tokens.size());
}

std::vector<RankedParagraph> rank_paragraphs(std::vector<RankedParagraph> scored) {
    std::sort(scored.begin(), scored.end(), [](const RankedParagraph& a, const RankedParagraph& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.index < b.index;
    });
    return scored;
}

} // namespace dehum
