#include "zslkit/embedding.hpp"

#include "zslkit/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace zslkit {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (const char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c) || c == '_') {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            continue;
        } else {
            current.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    flush();
    return tokens;
}

Label::Label(std::string raw) : raw_{ std::move(raw) }, tokens_{ tokenize(raw_) } {
    if (tokens_.empty()) {
        throw InvalidArgument("label '" + raw_ + "' has no tokens");
    }
}

std::string Label::key() const {
    std::string out;
    for (const auto &t : tokens_) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += t;
    }
    return out;
}

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_{ dimension } {
    if (dimension == 0) {
        throw InvalidArgument("embedding dimension must be positive");
    }
}

void EmbeddingStore::insert(const std::string &token, std::vector<double> values) {
    if (token.empty()) {
        throw InvalidArgument("empty embedding token");
    }
    if (values.size() != dimension_) {
        throw InvalidArgument("embedding for '" + token + "' has " + std::to_string(values.size()) + " values, expected " + std::to_string(dimension_));
    }
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw InvalidArgument("embedding for '" + token + "' has a non-finite value");
    }
    auto [it, inserted] = table_.insert_or_assign(token, std::move(values));
    if (inserted) {
        order_.push_back(token);
    } else {
        ++duplicates_;
    }
}

const std::vector<double> &EmbeddingStore::at(const std::string &token) const {
    const auto it = table_.find(token);
    if (it == table_.end()) {
        throw VocabularyError(token);
    }
    return it->second;
}

namespace {

bool parse_size(std::string_view s, std::size_t &out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            fields.push_back(line.substr(start, i - start));
        }
    }
    return fields;
}

}  // namespace

EmbeddingStore parse_embeddings(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("malformed header", 1);
    }
    const auto header = split_ws(line);
    std::size_t count = 0;
    std::size_t dim = 0;
    if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim) || dim == 0) {
        throw ParseError("malformed header", 1);
    }

    EmbeddingStore store{ dim };
    std::size_t line_no = 1;
    std::size_t entries = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_ws(line);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != dim + 1) {
            throw ParseError("expected " + std::to_string(dim) + " values, found " + std::to_string(fields.size() - 1), line_no);
        }
        std::vector<double> values(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const auto f = fields[k + 1];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[k]);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw ParseError("invalid number '" + std::string(f) + "'", line_no);
            }
            if (!std::isfinite(values[k])) {
                throw ParseError("non-finite value", line_no);
            }
        }
        store.insert(std::string(fields[0]), std::move(values));
        ++entries;
    }
    if (entries != count) {
        throw ParseError("header declares " + std::to_string(count) + " entries, file has " + std::to_string(entries));
    }
    return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open embedding file " + path.string());
    }
    return parse_embeddings(in);
}

void write_embeddings(const EmbeddingStore &store, std::ostream &out, int precision) {
    out << store.size() << ' ' << store.dimension() << '\n';
    std::ostringstream row;
    row.setf(std::ios::fixed);
    row.precision(precision);
    for (const auto &token : store.tokens()) {
        row.str({});
        row << token;
        for (const double v : store.at(token)) {
            row << ' ' << v;
        }
        row << '\n';
        out << row.str();
    }
}

void save_embeddings(const EmbeddingStore &store, const std::filesystem::path &path, int precision) {
    std::ofstream out{ path };
    if (!out) {
        throw Error("cannot write embedding file " + path.string());
    }
    write_embeddings(store, out, precision);
}

EmbeddingVector embed_label(const EmbeddingStore &store, const Label &label) {
    // std::set both deduplicates and fixes the summation order.
    const std::set<std::string> unique(label.tokens().begin(), label.tokens().end());
    EmbeddingVector z{ std::vector<double>(store.dimension(), 0.0), false };
    for (const auto &token : unique) {
        const auto &g = store.at(token);
        for (std::size_t k = 0; k < g.size(); ++k) {
            z.values[k] += g[k];
        }
    }
    const double inv = 1.0 / static_cast<double>(unique.size());
    for (auto &v : z.values) {
        v *= inv;
    }
    return z;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("vector length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

EmbeddingVector l2_normalize(const EmbeddingVector &v) {
    const double norm = l2_norm(v.values);
    if (norm == 0.0) {
        throw InvalidArgument("cannot normalize zero vector");
    }
    EmbeddingVector out{ v.values, true };
    for (auto &x : out.values) {
        x /= norm;
    }
    return out;
}

double cosine_distance(const EmbeddingVector &a, const EmbeddingVector &b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("vector length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    const double na = l2_norm(a.values);
    const double nb = l2_norm(b.values);
    if (na == 0.0 || nb == 0.0) {
        throw InvalidArgument("cosine distance of a zero vector");
    }
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
    }
    return std::clamp(1.0 - dot / (na * nb), 0.0, 2.0);
}

}  // namespace zslkit
