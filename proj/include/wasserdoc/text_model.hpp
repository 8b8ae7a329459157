#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wasserdoc/transport.hpp"

namespace wasserdoc {

class EmbeddingTable;

using TokenId = std::int32_t;
using TokenizedDocument = std::vector<std::string>;

// Tokenization: lowercase, split on Unicode whitespace, strip leading and
// trailing punctuation. Tokens that are pure punctuation vanish. Input is
// UTF-8; invalid bytes are passed through unchanged.
std::vector<std::string> tokenize(std::string_view text);

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
std::string to_lower(std::string_view text);

/// Token ids, document frequencies and the smoothed idf of one corpus.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::optional<TokenId> id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t document_frequency(TokenId id) const;
  std::size_t document_count() const noexcept { return document_count_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view token) const { return id(token).has_value(); }

  /// idf weight per token id, ln((1 + N) / (1 + df)) + 1.
  const Eigen::VectorXd& idf() const noexcept { return idf_; }

 private:
  friend Vocabulary build_vocabulary(std::span<const TokenizedDocument> corpus);

  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::size_t document_count_ = 0;
  Eigen::VectorXd idf_;
};

/// Throws InputError on an empty corpus. Ids follow first appearance.
Vocabulary build_vocabulary(std::span<const TokenizedDocument> corpus);

/// Throws LookupError for ids or tokens the vocabulary does not hold.
double idf_weight(TokenId id, const Vocabulary& vocab);
double idf_weight(std::string_view token, const Vocabulary& vocab);

/// A document as a probability distribution over its in-vocabulary tokens.
/// support is sorted and unique; tokens[k] is the string for support[k].
struct DocumentDistribution {
  std::vector<TokenId> support;
  std::vector<std::string> tokens;
  Eigen::VectorXd weights;
  std::string source_doc_id;

  std::size_t size() const noexcept { return support.size(); }
  ot::Distribution<double> distribution() const { return ot::Distribution<double>(weights); }
};

/// weight(t) proportional to count(t) * idf(t). Out-of-vocabulary tokens are
/// ignored; a document with none left throws EmptyDocumentError.
DocumentDistribution tfidf_distribution(const TokenizedDocument& doc, const Vocabulary& vocab,
                                        std::string doc_id = {});

/// Same, with caller-supplied idf weights indexed by token id.
DocumentDistribution tfidf_distribution(const TokenizedDocument& doc, const Vocabulary& vocab,
                                        const Eigen::VectorXd& idf, std::string doc_id = {});

/// Unit-norm dense document vector.
class DenseDocVector {
 public:
  explicit DenseDocVector(Eigen::VectorXd values);
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  Eigen::VectorXd values_;
};

/// Below this norm the idf-weighted embedding sum is treated as degenerate.
inline constexpr double kDegenerateNorm = 1e-12;

/// idf-weighted sum of token embeddings scaled to unit L2 norm. Tokens missing
/// from the vocabulary or the table are skipped.
DenseDocVector nbow_embed(const TokenizedDocument& doc, const Vocabulary& vocab,
                          const EmbeddingTable& table);
DenseDocVector nbow_embed(const TokenizedDocument& doc, const Vocabulary& vocab,
                          const Eigen::VectorXd& idf, const EmbeddingTable& table);

}  // namespace wasserdoc
