#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wasserdoc/text_model.hpp"
#include "wasserdoc/transport.hpp"

namespace wasserdoc {

/// Immutable-after-load token -> vector store. Vectors are kept in single
/// precision, row-contiguous.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(Eigen::Index dimension, std::vector<std::string> languages = {});

  Eigen::Index dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& languages() const noexcept { return languages_; }

  /// Adds a vector; a token already present keeps its first vector and the
  /// duplicate is counted. Returns false for duplicates.
  bool add(std::string token, std::span<const float> values);

  /// Row index for a token, trying it verbatim and then lowercased.
  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  const std::string& token(std::size_t row) const { return tokens_.at(row); }
  Eigen::Map<const Eigen::VectorXf> vector(std::size_t row) const {
    return {data_.data() + row * static_cast<std::size_t>(dimension_), dimension_};
  }

  std::size_t duplicate_count() const noexcept { return duplicates_; }
  std::size_t skipped_lines() const noexcept { return skipped_; }
  void count_skipped_line() noexcept { ++skipped_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  Eigen::Index dimension_;
  std::vector<std::string> languages_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> rows_;
  std::size_t duplicates_ = 0;
  std::size_t skipped_ = 0;
};

// Text format: one record per line, "token v1 ... vd" separated by spaces,
// with an optional "count dim" header line. Rows of the wrong arity are skipped
// when a header declared the dimension; without a header they are a format
// error. Rows with a non-numeric value (including tokens that contain spaces)
// are skipped and counted.
EmbeddingTable load_embeddings(std::istream& in, std::vector<std::string> languages = {});
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string> languages = {});

/// Writes the table in the text format with a header, using enough digits to
/// reload every float exactly.
void save_embeddings(const EmbeddingTable& table, std::ostream& out);

struct OovReport {
  std::vector<std::string> dropped_tokens;
  double dropped_mass = 0.0;
  /// Fraction of distinct tokens kept.
  double coverage_ratio = 1.0;
};

/// Drops tokens without an embedding and renormalizes. Throws
/// EmptyDocumentError when nothing survives.
std::pair<DocumentDistribution, OovReport> filter_oov(const DocumentDistribution& dist,
                                                      const EmbeddingTable& table);

/// A(i, j) = || emb(source token i) - emb(target token j) ||_2 on raw vectors.
ot::CostMatrix<double> ground_metric(const DocumentDistribution& source,
                                     const DocumentDistribution& target,
                                     const EmbeddingTable& source_table,
                                     const EmbeddingTable& target_table);

/// Gathers the support vectors of a document into the rows of a matrix.
Eigen::MatrixXd support_matrix(const DocumentDistribution& dist, const EmbeddingTable& table);

/// Pairwise Euclidean distances between the rows of two point sets.
template <typename DerivedX, typename DerivedY>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_euclidean(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows(), y.rows());
  // Differences rather than the |x|^2 + |y|^2 - 2xy expansion: identical
  // vectors must give exactly zero.
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = (y.rowwise() - x.row(i)).rowwise().norm().transpose();
  return out;
}

}  // namespace wasserdoc
