#include "wasserdoc/text_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wasserdoc/embedding_store.hpp"
#include "wasserdoc/errors.hpp"

namespace wasserdoc {

std::optional<TokenId> Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw LookupError("token id " + std::to_string(id) + " is not in the vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

std::size_t Vocabulary::document_frequency(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= df_.size())
    throw LookupError("token id " + std::to_string(id) + " is not in the vocabulary");
  return df_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocabulary(std::span<const TokenizedDocument> corpus) {
  if (corpus.empty()) throw InputError("cannot build a vocabulary from an empty corpus");
  Vocabulary vocab;
  vocab.document_count_ = corpus.size();
  std::vector<std::size_t> last_seen;  // 1 + index of the last document counted
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& token : corpus[d]) {
      auto [it, inserted] = vocab.ids_.try_emplace(token, static_cast<TokenId>(vocab.tokens_.size()));
      if (inserted) {
        vocab.tokens_.push_back(token);
        vocab.df_.push_back(0);
        last_seen.push_back(0);
      }
      const auto id = static_cast<std::size_t>(it->second);
      if (last_seen[id] != d + 1) {
        last_seen[id] = d + 1;
        ++vocab.df_[id];
      }
    }
  }
  const double n = static_cast<double>(vocab.document_count_);
  vocab.idf_.resize(static_cast<Eigen::Index>(vocab.df_.size()));
  for (std::size_t k = 0; k < vocab.df_.size(); ++k)
    vocab.idf_[static_cast<Eigen::Index>(k)] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df_[k]))) + 1.0;
  return vocab;
}

double idf_weight(TokenId id, const Vocabulary& vocab) {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab.size())
    throw LookupError("token id " + std::to_string(id) + " is not in the vocabulary");
  return vocab.idf()[id];
}

double idf_weight(std::string_view token, const Vocabulary& vocab) {
  const auto id = vocab.id(token);
  if (!id) throw LookupError("token '" + std::string(token) + "' is not in the vocabulary");
  return vocab.idf()[*id];
}

namespace {

// In-vocabulary term counts keyed (and therefore sorted) by token id.
std::map<TokenId, std::size_t> term_counts(const TokenizedDocument& doc, const Vocabulary& vocab) {
  std::map<TokenId, std::size_t> counts;
  for (const auto& token : doc)
    if (auto id = vocab.id(token)) ++counts[*id];
  return counts;
}

}  // namespace

DocumentDistribution tfidf_distribution(const TokenizedDocument& doc, const Vocabulary& vocab,
                                        std::string doc_id) {
  return tfidf_distribution(doc, vocab, vocab.idf(), std::move(doc_id));
}

DocumentDistribution tfidf_distribution(const TokenizedDocument& doc, const Vocabulary& vocab,
                                        const Eigen::VectorXd& idf, std::string doc_id) {
  if (idf.size() != static_cast<Eigen::Index>(vocab.size()))
    throw DimensionError("idf vector does not match the vocabulary size");
  const auto counts = term_counts(doc, vocab);
  if (counts.empty())
    throw EmptyDocumentError("document '" + doc_id + "' has no in-vocabulary tokens");

  DocumentDistribution out;
  out.source_doc_id = std::move(doc_id);
  out.weights.resize(static_cast<Eigen::Index>(counts.size()));
  Eigen::Index k = 0;
  for (const auto& [id, count] : counts) {
    if (!(idf[id] > 0.0)) throw InputError("idf weights must be positive");
    out.support.push_back(id);
    out.tokens.push_back(vocab.token(id));
    out.weights[k++] = static_cast<double>(count) * idf[id];
  }
  out.weights /= out.weights.sum();
  return out;
}

DenseDocVector::DenseDocVector(Eigen::VectorXd values) : values_(std::move(values)) {
  const double norm = values_.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "document vector must have unit norm, got " << norm;
    throw InputError(os.str());
  }
}

DenseDocVector nbow_embed(const TokenizedDocument& doc, const Vocabulary& vocab,
                          const EmbeddingTable& table) {
  return nbow_embed(doc, vocab, vocab.idf(), table);
}

DenseDocVector nbow_embed(const TokenizedDocument& doc, const Vocabulary& vocab,
                          const Eigen::VectorXd& idf, const EmbeddingTable& table) {
  if (idf.size() != static_cast<Eigen::Index>(vocab.size()))
    throw DimensionError("idf vector does not match the vocabulary size");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
  bool any = false;
  for (const auto& [id, count] : term_counts(doc, vocab)) {
    const auto row = table.find(vocab.token(id));
    if (!row) continue;
    sum += (static_cast<double>(count) * idf[id]) * table.vector(*row).cast<double>();
    any = true;
  }
  if (!any) throw EmptyDocumentError("document has no tokens with embeddings");
  const double norm = sum.norm();
  if (norm < kDegenerateNorm)
    throw DegenerateVectorError("idf-weighted embedding sum has near-zero norm");
  return DenseDocVector(sum / norm);
}

}  // namespace wasserdoc
