#pragma once

// Nearest-neighbour retrieval and classification over document distances.
//
// Documents are prepared once per language (tf-idf distribution after OOV
// filtering, plus the nBOW vector) and then compared pairwise. Retrieval
// ranks a collection by ascending distance; classification votes among the
// K nearest labelled documents.

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wasserdoc/embedding_store.hpp"
#include "wasserdoc/text_model.hpp"
#include "wasserdoc/transport.hpp"

namespace wasserdoc {

enum class MethodKind { nbow, emd, semd };

std::string_view method_name(MethodKind kind);
/// Throws InputError for anything other than "nbow", "emd" or "semd".
MethodKind parse_method(std::string_view name);

/// Which distance to use. Only semd carries a Sinkhorn configuration.
class DistanceMethod {
 public:
  static DistanceMethod nbow() { return DistanceMethod(MethodKind::nbow, std::nullopt); }
  static DistanceMethod emd() { return DistanceMethod(MethodKind::emd, std::nullopt); }
  static DistanceMethod semd(ot::SinkhornConfig<double> config = {}) {
    config.validate();
    return DistanceMethod(MethodKind::semd, config);
  }
  /// Validates the pairing of kind and config.
  static DistanceMethod make(MethodKind kind, std::optional<ot::SinkhornConfig<double>> config);

  MethodKind kind() const noexcept { return kind_; }
  const std::optional<ot::SinkhornConfig<double>>& sinkhorn() const noexcept { return sinkhorn_; }
  std::string_view name() const { return method_name(kind_); }

 private:
  DistanceMethod(MethodKind kind, std::optional<ot::SinkhornConfig<double>> config)
      : kind_(kind), sinkhorn_(config) {}

  MethodKind kind_;
  std::optional<ot::SinkhornConfig<double>> sinkhorn_;
};

/// Vocabulary and embeddings for one language side.
struct LanguageResources {
  const Vocabulary& vocab;
  const EmbeddingTable& table;
};

/// A document ready for comparison. A missing representation carries the
/// reason in the matching *_error string.
struct PreparedDocument {
  std::string id;
  std::optional<DocumentDistribution> distribution;
  std::optional<DenseDocVector> nbow;
  OovReport oov;
  std::string distribution_error;
  std::string nbow_error;

  bool usable(MethodKind kind) const {
    return kind == MethodKind::nbow ? nbow.has_value() : distribution.has_value();
  }
  const std::string& error(MethodKind kind) const {
    return kind == MethodKind::nbow ? nbow_error : distribution_error;
  }
};

PreparedDocument prepare_document(const TokenizedDocument& tokens, std::string id,
                                  const LanguageResources& resources);

struct PairScore {
  double distance = 0.0;
  /// False only for a Sinkhorn solve that hit its iteration limit.
  bool converged = true;
};

/// Throws EmptyDocumentError when either side lacks the representation the
/// method needs.
PairScore score_pair(const DistanceMethod& method, const PreparedDocument& query,
                     const PreparedDocument& target, const EmbeddingTable& query_table,
                     const EmbeddingTable& target_table);

/// emd: exact Wasserstein with the Euclidean ground metric; semd: Sinkhorn
/// transport cost on the same inputs; nbow: 1 - cosine of the unit vectors.
double pair_distance(const DistanceMethod& method, const PreparedDocument& query,
                     const PreparedDocument& target, const EmbeddingTable& query_table,
                     const EmbeddingTable& target_table);
double pair_distance(const DistanceMethod& method, const TokenizedDocument& query,
                     const TokenizedDocument& target, const LanguageResources& query_side,
                     const LanguageResources& target_side);

struct RankedEntry {
  std::size_t target_index = 0;
  std::string target_id;
  double distance = 0.0;
};

/// Targets ordered by ascending distance, ties by ingestion index. Pairs that
/// could not be scored sit at the end with infinite distance.
struct RankedResult {
  std::string query_id;
  std::vector<RankedEntry> entries;
  std::size_t pair_errors = 0;
  std::size_t nonconverged = 0;
  /// Set when the query itself could not be scored; entries is then empty.
  std::string query_error;
};

/// Throws EmptyDocumentError when the query is unusable for the method.
RankedResult rank_targets(const PreparedDocument& query,
                          std::span<const PreparedDocument> collection,
                          const DistanceMethod& method, const EmbeddingTable& query_table,
                          const EmbeddingTable& target_table);

/// 1-based position of gold_id in the ranking, or nullopt.
std::optional<std::size_t> gold_rank(const RankedResult& result, std::string_view gold_id);

/// Fraction of queries whose top target is the gold one. Queries without a
/// ranking count as misses; a query absent from gold throws InputError.
double precision_at_1(std::span<const RankedResult> results,
                      const std::unordered_map<std::string, std::string>& gold);

struct LabeledDocument {
  PreparedDocument document;
  std::string label;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

struct KnnPrediction {
  std::string label;
  /// Valid neighbours sorted by (distance, index).
  std::vector<Neighbor> neighbors;
  std::size_t pair_errors = 0;
  std::size_t nonconverged = 0;
};

/// Majority label among the first k sorted neighbours; vote ties go to the
/// smaller distance sum, then to the lexicographically smaller label.
std::string vote(std::span<const Neighbor> sorted, std::span<const LabeledDocument> labeled,
                 std::size_t k);

/// Throws ClassificationError when no labelled pair could be scored.
KnnPrediction knn_classify(const PreparedDocument& query,
                           std::span<const LabeledDocument> labeled, std::size_t k,
                           const DistanceMethod& method, const EmbeddingTable& query_table,
                           const EmbeddingTable& labeled_table);

/// Fraction of ids whose prediction equals gold. The id sets must match.
double accuracy(const std::map<std::string, std::string>& predictions,
                const std::map<std::string, std::string>& gold);

/// Ordinal ranks (1 = best) with ties sharing the mean of their positions.
Eigen::VectorXd tie_averaged_ranks(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                   bool higher_is_better);

/// Mean per-column rank for each row of a methods x columns score table.
/// NaN marks a missing cell and throws InputError.
Eigen::VectorXd average_rank(const Eigen::Ref<const Eigen::MatrixXd>& scores,
                             bool higher_is_better);

/// Metric cells keyed by row label (method and embedding) and column label
/// (language pair).
class TaskReport {
 public:
  void add(const std::string& row, const std::string& column, double value);

  const std::vector<std::string>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  /// Throws InputError if some row lacks a column another row has.
  Eigen::MatrixXd table() const;
  Eigen::VectorXd average_ranks(bool higher_is_better = true) const;

 private:
  std::vector<std::string> rows_;
  std::vector<std::string> columns_;
  std::map<std::pair<std::string, std::string>, double> cells_;
};

}  // namespace wasserdoc
