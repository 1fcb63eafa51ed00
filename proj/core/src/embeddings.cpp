#include "dehum/embeddings.hpp"

#include "dehum/error.hpp"
#include "dehum/log.hpp"
#include "dehum/strings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace dehum {

std::optional<std::size_t> EmbeddingModel::index_of(std::string_view word) const {
    auto it = vocab.find(std::string(word));
    if (it == vocab.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingModel::row(std::size_t index) const {
    return {input.data() + index * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
}

std::span<double> EmbeddingModel::row(std::size_t index) {
    return {input.data() + index * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
}

std::span<const double> EmbeddingModel::context_row(std::size_t index) const {
    return {context.data() + index * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
}

void postprocess(EmbeddingModel& model) {
    if (model.postprocessed) throw Error("model is already postprocessed");
    const std::size_t v = model.vocab_size();
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    if (v == 0) throw Error("cannot postprocess an empty model");

    std::vector<double> column_mean(dim, 0.0);
    for (std::size_t i = 0; i < v; ++i) {
        const double* r = model.input.data() + i * dim;
        for (std::size_t k = 0; k < dim; ++k) column_mean[k] += r[k];
    }
    for (std::size_t k = 0; k < dim; ++k) column_mean[k] /= static_cast<double>(v);

    for (std::size_t i = 0; i < v; ++i) {
        double* r = model.input.data() + i * dim;
        double norm_sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            r[k] -= column_mean[k];
            norm_sq += r[k] * r[k];
        }
        double norm = std::sqrt(norm_sq);
        if (norm < 1e-12)
            throw Error("postprocess: row for '" + model.words[i] +
                        "' is zero after centering");
        for (std::size_t k = 0; k < dim; ++k) r[k] /= norm;
    }
    model.postprocessed = true;
}

std::optional<std::vector<double>> label_vector(const EmbeddingModel& model,
                                                const LabelSet& label) {
    // (index, count) pairs in ascending vocabulary order so that the float
    // accumulation order never depends on how the surface forms were listed
    std::map<std::size_t, std::int64_t> members;
    for (const auto& form : label.surface_forms) {
        auto idx = model.index_of(form);
        if (idx) members.emplace(*idx, model.counts[*idx]);
    }
    if (members.empty()) return std::nullopt;

    const std::size_t dim = static_cast<std::size_t>(model.dim);
    std::vector<double> out(dim, 0.0);
    double total = 0.0;
    for (const auto& [idx, count] : members) {
        const double* r = model.input.data() + idx * dim;
        double w = static_cast<double>(count);
        for (std::size_t k = 0; k < dim; ++k) out[k] += w * r[k];
        total += w;
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        out[k] /= total;
        norm += out[k] * out[k];
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (std::size_t k = 0; k < dim; ++k) out[k] /= norm;
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model,
                                        std::span<const double> query, std::size_t k,
                                        const std::unordered_set<std::string>& exclude) {
    if (query.size() != static_cast<std::size_t>(model.dim))
        throw Error("nearest_neighbors: query dimension mismatch");
    double query_norm_sq = 0.0;
    for (double x : query) query_norm_sq += x * x;
    if (query_norm_sq == 0.0) throw Error("nearest_neighbors: zero query vector");
    const double query_norm = std::sqrt(query_norm_sq);

    const std::size_t dim = static_cast<std::size_t>(model.dim);
    std::vector<Neighbor> scored;
    scored.reserve(model.vocab_size());
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
        if (!exclude.empty() && exclude.count(model.words[i])) continue;
        const double* r = model.input.data() + i * dim;
        double dot = 0.0;
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            dot += r[j] * query[j];
            norm_sq += r[j] * r[j];
        }
        if (norm_sq == 0.0) continue;
        scored.push_back({i, dot / (query_norm * std::sqrt(norm_sq))});
    }
    std::sort(scored.begin(), scored.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.index < b.index;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

namespace {

std::optional<ConceptVector> aggregate_members(const EmbeddingModel& model,
                                               std::string name,
                                               const std::vector<std::size_t>& indices) {
    if (indices.empty()) return std::nullopt;
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    ConceptVector out;
    out.name = std::move(name);
    out.direction.assign(dim, 0.0);
    double total = 0.0;
    for (std::size_t idx : indices) {
        const double* r = model.input.data() + idx * dim;
        double w = static_cast<double>(model.counts[idx]);
        for (std::size_t k = 0; k < dim; ++k) out.direction[k] += w * r[k];
        total += w;
        out.member_words.push_back(model.words[idx]);
    }
    for (std::size_t k = 0; k < dim; ++k) out.direction[k] /= total;
    double norm = 0.0;
    for (double v : out.direction) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : out.direction) v /= norm;
    return out;
}

} // namespace

std::optional<ConceptVector> concept_vector_from_stems(const EmbeddingModel& model,
                                                       const StemDictionary& stems) {
    // expand against vocabulary order == ascending index order
    std::vector<std::size_t> indices;
    for (const auto& word : expand_stems(stems, model.words)) {
        auto idx = model.index_of(word);
        if (idx) indices.push_back(*idx);
    }
    std::sort(indices.begin(), indices.end());
    return aggregate_members(model, stems.category, indices);
}

std::optional<ConceptVector> concept_vector_from_words(const EmbeddingModel& model,
                                                       const std::string& name,
                                                       const std::vector<std::string>& words) {
    std::vector<std::size_t> indices;
    for (const auto& word : words) {
        auto idx = model.index_of(word);
        if (idx) indices.push_back(*idx);
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return aggregate_members(model, name, indices);
}

TfidfStats compute_tfidf(const std::vector<Paragraph>& paragraphs) {
    TfidfStats stats;
    stats.documents = static_cast<std::int64_t>(paragraphs.size());
    std::unordered_map<std::string, std::int64_t> df;
    std::unordered_set<std::string> seen;
    for (const auto& p : paragraphs) {
        seen.clear();
        for (const auto& t : p.tokens) seen.insert(t);
        for (const auto& t : seen) ++df[t];
    }
    for (auto& [word, count] : df) {
        stats.idf[word] =
            std::log(static_cast<double>(stats.documents) / (1.0 + static_cast<double>(count))) +
            1.0;
    }
    return stats;
}

std::span<const double> ParagraphMatrix::row(std::size_t index) const {
    return {data.data() + index * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
}

ParagraphMatrix paragraph_embeddings(const EmbeddingModel& model,
                                     const std::vector<Paragraph>& paragraphs,
                                     const TfidfStats& tfidf) {
    if (tfidf.documents <= 0) throw Error("paragraph_embeddings: empty tf-idf statistics");

    ParagraphMatrix out;
    out.rows = paragraphs.size();
    out.dim = model.dim;
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    out.data.assign(out.rows * dim, 0.0);
    out.empty_row.assign(out.rows, 0);

    const double default_idf = std::log(static_cast<double>(tfidf.documents)) + 1.0;

    for (std::size_t r = 0; r < paragraphs.size(); ++r) {
        // term frequencies of in-vocabulary tokens, by ascending vocab index
        std::map<std::size_t, double> tf;
        for (const auto& token : paragraphs[r].tokens) {
            auto idx = model.index_of(token);
            if (idx) tf[*idx] += 1.0;
        }
        if (tf.empty()) {
            out.empty_row[r] = 1;
            continue;
        }
        double* dst = out.data.data() + r * dim;
        double weight_total = 0.0;
        for (const auto& [idx, count] : tf) {
            auto it = tfidf.idf.find(model.words[idx]);
            double idf = (it != tfidf.idf.end()) ? it->second : default_idf;
            double w = count * idf;
            const double* vec = model.input.data() + idx * dim;
            for (std::size_t k = 0; k < dim; ++k) dst[k] += w * vec[k];
            weight_total += w;
        }
        for (std::size_t k = 0; k < dim; ++k) dst[k] /= weight_total;
    }

    // First principal component over the non-empty rows via power iteration
    // on the centered covariance, removed from every row afterwards.
    std::size_t filled = 0;
    std::vector<double> mean(dim, 0.0);
    for (std::size_t r = 0; r < out.rows; ++r) {
        if (out.empty_row[r]) continue;
        const double* src = out.data.data() + r * dim;
        for (std::size_t k = 0; k < dim; ++k) mean[k] += src[k];
        ++filled;
    }
    if (filled < 2) return out; // nothing to decorrelate

    for (std::size_t k = 0; k < dim; ++k) mean[k] /= static_cast<double>(filled);

    std::vector<double> cov(dim * dim, 0.0);
    std::vector<double> centered(dim, 0.0);
    for (std::size_t r = 0; r < out.rows; ++r) {
        if (out.empty_row[r]) continue;
        const double* src = out.data.data() + r * dim;
        for (std::size_t k = 0; k < dim; ++k) centered[k] = src[k] - mean[k];
        for (std::size_t a = 0; a < dim; ++a) {
            double ca = centered[a];
            if (ca == 0.0) continue;
            double* cov_row = cov.data() + a * dim;
            for (std::size_t b = 0; b < dim; ++b) cov_row[b] += ca * centered[b];
        }
    }

    double trace = 0.0;
    for (std::size_t k = 0; k < dim; ++k) trace += cov[k * dim + k];
    if (trace <= 1e-300) return out; // identical rows, no principal direction

    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    std::vector<double> next(dim, 0.0);
    for (int iter = 0; iter < 1000; ++iter) {
        for (std::size_t a = 0; a < dim; ++a) {
            double s = 0.0;
            const double* cov_row = cov.data() + a * dim;
            for (std::size_t b = 0; b < dim; ++b) s += cov_row[b] * v[b];
            next[a] = s;
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) norm += next[k] * next[k];
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        for (std::size_t k = 0; k < dim; ++k) next[k] /= norm;

        double delta_same = 0.0;
        double delta_flip = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            delta_same = std::max(delta_same, std::fabs(next[k] - v[k]));
            delta_flip = std::max(delta_flip, std::fabs(next[k] + v[k]));
        }
        v = next;
        if (std::min(delta_same, delta_flip) < 1e-10) break;
    }

    // deterministic sign: first non-negligible component positive
    for (std::size_t k = 0; k < dim; ++k) {
        if (std::fabs(v[k]) > 1e-12) {
            if (v[k] < 0)
                for (std::size_t j = 0; j < dim; ++j) v[j] = -v[j];
            break;
        }
    }
    out.first_pc = v;

    for (std::size_t r = 0; r < out.rows; ++r) {
        if (out.empty_row[r]) continue;
        double* dst = out.data.data() + r * dim;
        double proj = 0.0;
        for (std::size_t k = 0; k < dim; ++k) proj += dst[k] * v[k];
        for (std::size_t k = 0; k < dim; ++k) dst[k] -= proj * v[k];
    }
    return out;
}

namespace {

constexpr char kMagic[5] = {'D', 'H', 'E', 'M', '1'};

template <typename T>
void write_raw(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& origin) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError(origin + ": unexpected end of file");
    return value;
}

} // namespace

void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
    if (model.postprocessed)
        throw Error("refusing to save a postprocessed model; the format stores raw state");
    if (model.vocab_size() == 0) throw Error("refusing to save an empty model");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");

    out.write(kMagic, sizeof(kMagic));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim));
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(model.vocab_size()));
    write_raw<std::int64_t>(out, model.corpus_tokens);
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
        const std::string& w = model.words[i];
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
        write_raw<std::int64_t>(out, model.counts[i]);
    }
    auto write_matrix = [&](const std::vector<double>& m) {
        for (double x : m) write_raw<float>(out, static_cast<float>(x));
    };
    write_matrix(model.input);
    write_matrix(model.context);
    if (!out) throw Error("write failed on " + path.string());
}

EmbeddingModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file " + path.string());
    const std::string origin = path.string();

    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError(origin + ": not a DHEM1 model file");

    EmbeddingModel model;
    auto dim = read_raw<std::uint32_t>(in, origin);
    auto vocab_size = read_raw<std::uint64_t>(in, origin);
    model.corpus_tokens = read_raw<std::int64_t>(in, origin);
    if (dim < 1 || dim > 100000) throw ParseError(origin + ": implausible dimension");
    if (vocab_size < 1 || vocab_size > (1ULL << 40))
        throw ParseError(origin + ": implausible vocabulary size");

    model.dim = static_cast<int>(dim);
    model.words.reserve(vocab_size);
    model.counts.reserve(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        auto len = read_raw<std::uint32_t>(in, origin);
        if (len > (1u << 20)) throw ParseError(origin + ": implausible word length");
        std::string word(len, '\0');
        in.read(word.data(), static_cast<std::streamsize>(len));
        if (!in) throw ParseError(origin + ": unexpected end of file");
        auto count = read_raw<std::int64_t>(in, origin);
        if (!model.vocab.emplace(word, i).second)
            throw ParseError(origin + ": duplicate vocabulary word '" + word + "'");
        model.words.push_back(std::move(word));
        model.counts.push_back(count);
    }

    const std::size_t size = static_cast<std::size_t>(vocab_size) * dim;
    auto read_matrix = [&](std::vector<double>& m) {
        m.resize(size);
        for (std::size_t i = 0; i < size; ++i)
            m[i] = static_cast<double>(read_raw<float>(in, origin));
    };
    read_matrix(model.input);
    read_matrix(model.context);

    char extra;
    if (in.read(&extra, 1)) throw ParseError(origin + ": trailing bytes after matrices");
    return model;
}

void write_text_embeddings(const EmbeddingModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
        out << model.words[i];
        const double* r = model.input.data() + i * dim;
        for (std::size_t k = 0; k < dim; ++k) out << ' ' << format_double(r[k]);
        out << '\n';
    }
    if (!out) throw Error("write failed on " + path.string());
}

} // namespace dehum
