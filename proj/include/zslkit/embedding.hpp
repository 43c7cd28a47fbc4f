#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zslkit {

/// Dense word-space vector z. `normalized` is set by l2_normalize and nowhere else.
struct EmbeddingVector {
    std::vector<double> values;
    bool normalized{ false };

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
};

/**
 * A category name together with its word tokens.
 *
 * Tokenisation lowercases, splits on whitespace and underscores, and strips
 * ASCII punctuation; tokens left empty are dropped. Two labels compare equal
 * when their token lists match, so "brush_hair" and "Brush hair" are the same
 * category. name() returns the string the label was constructed from.
 */
class Label {
  public:
    explicit Label(std::string raw);

    [[nodiscard]] const std::string &name() const noexcept { return raw_; }
    [[nodiscard]] const std::vector<std::string> &tokens() const noexcept { return tokens_; }
    /// Tokens joined by a single space; the identity used for comparison.
    [[nodiscard]] std::string key() const;

    friend bool operator==(const Label &a, const Label &b) { return a.tokens_ == b.tokens_; }
    friend bool operator<(const Label &a, const Label &b) { return a.tokens_ < b.tokens_; }

  private:
    std::string raw_;
    std::vector<std::string> tokens_;
};

[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);

/// Immutable token -> vector table with a fixed dimension.
class EmbeddingStore {
  public:
    explicit EmbeddingStore(std::size_t dimension);

    /// Insert or replace. Replacing an existing token bumps duplicate_count().
    void insert(const std::string &token, std::vector<double> values);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return table_.size(); }
    [[nodiscard]] bool contains(const std::string &token) const { return table_.contains(token); }
    /// Throws VocabularyError if missing.
    [[nodiscard]] const std::vector<double> &at(const std::string &token) const;
    /// Tokens in first-insertion order.
    [[nodiscard]] const std::vector<std::string> &tokens() const noexcept { return order_; }
    [[nodiscard]] std::size_t duplicate_count() const noexcept { return duplicates_; }

  private:
    std::size_t dimension_;
    std::unordered_map<std::string, std::vector<double>> table_;
    std::vector<std::string> order_;
    std::size_t duplicates_{ 0 };
};

/// Parse the word2vec text format: "<count> <dim>" header, then "<token> v1 .. v_dim" per line.
[[nodiscard]] EmbeddingStore parse_embeddings(std::istream &in);
[[nodiscard]] EmbeddingStore load_embeddings(const std::filesystem::path &path);

/// Write the text format with `precision` digits after the decimal point.
void write_embeddings(const EmbeddingStore &store, std::ostream &out, int precision = 6);
void save_embeddings(const EmbeddingStore &store, const std::filesystem::path &path, int precision = 6);

/// Mean of the embeddings of the label's distinct tokens (not normalised).
[[nodiscard]] EmbeddingVector embed_label(const EmbeddingStore &store, const Label &label);

[[nodiscard]] EmbeddingVector l2_normalize(const EmbeddingVector &v);
[[nodiscard]] double l2_norm(std::span<const double> v);
[[nodiscard]] double squared_euclidean(std::span<const double> a, std::span<const double> b);

/// 1 - <a,b> / (|a| |b|), in [0, 2].
[[nodiscard]] double cosine_distance(const EmbeddingVector &a, const EmbeddingVector &b);

}  // namespace zslkit
