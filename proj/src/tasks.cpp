#include "wasserdoc/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wasserdoc/errors.hpp"

namespace wasserdoc {

std::string_view method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::nbow: return "nbow";
    case MethodKind::emd: return "emd";
    case MethodKind::semd: return "semd";
  }
  return "unknown";
}

MethodKind parse_method(std::string_view name) {
  if (name == "nbow") return MethodKind::nbow;
  if (name == "emd") return MethodKind::emd;
  if (name == "semd") return MethodKind::semd;
  throw InputError("unknown method '" + std::string(name) + "' (expected nbow, emd or semd)");
}

DistanceMethod DistanceMethod::make(MethodKind kind,
                                    std::optional<ot::SinkhornConfig<double>> config) {
  if (kind == MethodKind::semd) {
    if (!config) throw InputError("semd requires a Sinkhorn configuration");
    return semd(*config);
  }
  if (config) throw InputError(std::string(method_name(kind)) + " takes no Sinkhorn configuration");
  return kind == MethodKind::nbow ? nbow() : emd();
}

PreparedDocument prepare_document(const TokenizedDocument& tokens, std::string id,
                                  const LanguageResources& resources) {
  PreparedDocument doc;
  doc.id = std::move(id);
  try {
    auto [filtered, report] =
        filter_oov(tfidf_distribution(tokens, resources.vocab, doc.id), resources.table);
    doc.distribution = std::move(filtered);
    doc.oov = std::move(report);
  } catch (const EmptyDocumentError& e) {
    doc.distribution_error = e.what();
    doc.oov.coverage_ratio = 0.0;
    doc.oov.dropped_mass = 1.0;
  }
  try {
    doc.nbow = nbow_embed(tokens, resources.vocab, resources.table);
  } catch (const EmptyDocumentError& e) {
    doc.nbow_error = e.what();
  } catch (const DegenerateVectorError& e) {
    doc.nbow_error = e.what();
  }
  return doc;
}

PairScore score_pair(const DistanceMethod& method, const PreparedDocument& query,
                     const PreparedDocument& target, const EmbeddingTable& query_table,
                     const EmbeddingTable& target_table) {
  const MethodKind kind = method.kind();
  if (!query.usable(kind))
    throw EmptyDocumentError("query '" + query.id + "': " + query.error(kind));
  if (!target.usable(kind))
    throw EmptyDocumentError("target '" + target.id + "': " + target.error(kind));

  if (kind == MethodKind::nbow) {
    const double cosine = query.nbow->values().dot(target.nbow->values());
    return {std::max(0.0, 1.0 - cosine), true};
  }
  const auto& source = *query.distribution;
  const auto& sink = *target.distribution;
  const auto cost = ground_metric(source, sink, query_table, target_table);
  if (kind == MethodKind::emd)
    return {ot::wasserstein_distance(source.distribution(), sink.distribution(), cost), true};
  const auto plan = ot::sinkhorn_plan(source.distribution(), sink.distribution(), cost,
                                      *method.sinkhorn());
  return {plan.objective, plan.converged};
}

double pair_distance(const DistanceMethod& method, const PreparedDocument& query,
                     const PreparedDocument& target, const EmbeddingTable& query_table,
                     const EmbeddingTable& target_table) {
  return score_pair(method, query, target, query_table, target_table).distance;
}

double pair_distance(const DistanceMethod& method, const TokenizedDocument& query,
                     const TokenizedDocument& target, const LanguageResources& query_side,
                     const LanguageResources& target_side) {
  return pair_distance(method, prepare_document(query, "query", query_side),
                       prepare_document(target, "target", target_side), query_side.table,
                       target_side.table);
}

RankedResult rank_targets(const PreparedDocument& query,
                          std::span<const PreparedDocument> collection,
                          const DistanceMethod& method, const EmbeddingTable& query_table,
                          const EmbeddingTable& target_table) {
  if (collection.empty()) throw InputError("cannot rank against an empty collection");
  if (!query.usable(method.kind()))
    throw EmptyDocumentError("query '" + query.id + "': " + query.error(method.kind()));

  RankedResult result;
  result.query_id = query.id;
  result.entries.reserve(collection.size());
  for (std::size_t j = 0; j < collection.size(); ++j) {
    RankedEntry entry{j, collection[j].id, std::numeric_limits<double>::infinity()};
    if (collection[j].usable(method.kind())) {
      const auto score = score_pair(method, query, collection[j], query_table, target_table);
      entry.distance = score.distance;
      if (!score.converged) ++result.nonconverged;
    } else {
      ++result.pair_errors;
    }
    result.entries.push_back(std::move(entry));
  }
  std::stable_sort(result.entries.begin(), result.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     return a.distance < b.distance;
                   });
  return result;
}

std::optional<std::size_t> gold_rank(const RankedResult& result, std::string_view gold_id) {
  for (std::size_t r = 0; r < result.entries.size(); ++r)
    if (result.entries[r].target_id == gold_id) return r + 1;
  return std::nullopt;
}

double precision_at_1(std::span<const RankedResult> results,
                      const std::unordered_map<std::string, std::string>& gold) {
  if (results.empty()) throw InputError("precision_at_1 needs at least one query");
  std::size_t hits = 0;
  for (const auto& result : results) {
    const auto it = gold.find(result.query_id);
    if (it == gold.end()) throw InputError("query '" + result.query_id + "' has no gold target");
    if (!result.entries.empty() && std::isfinite(result.entries.front().distance) &&
        result.entries.front().target_id == it->second)
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::string vote(std::span<const Neighbor> sorted, std::span<const LabeledDocument> labeled,
                 std::size_t k) {
  if (sorted.empty()) throw ClassificationError("no neighbours to vote with");
  struct Tally {
    std::size_t votes = 0;
    double distance_sum = 0.0;
  };
  std::map<std::string, Tally> tallies;  // ordered: lexicographic tie-break for free
  const std::size_t used = std::min(k, sorted.size());
  for (std::size_t r = 0; r < used; ++r) {
    auto& tally = tallies[labeled[sorted[r].index].label];
    ++tally.votes;
    tally.distance_sum += sorted[r].distance;
  }
  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    const auto& a = it->second;
    const auto& b = best->second;
    if (a.votes > b.votes || (a.votes == b.votes && a.distance_sum < b.distance_sum)) best = it;
  }
  return best->first;
}

KnnPrediction knn_classify(const PreparedDocument& query,
                           std::span<const LabeledDocument> labeled, std::size_t k,
                           const DistanceMethod& method, const EmbeddingTable& query_table,
                           const EmbeddingTable& labeled_table) {
  if (labeled.empty()) throw InputError("knn_classify needs a non-empty labelled pool");
  if (k < 1) throw InputError("K must be at least 1");
  KnnPrediction prediction;
  if (!query.usable(method.kind())) {
    throw ClassificationError("query '" + query.id + "': " + query.error(method.kind()));
  }
  for (std::size_t j = 0; j < labeled.size(); ++j) {
    if (!labeled[j].document.usable(method.kind())) {
      ++prediction.pair_errors;
      continue;
    }
    const auto score = score_pair(method, query, labeled[j].document, query_table, labeled_table);
    if (!score.converged) ++prediction.nonconverged;
    prediction.neighbors.push_back({j, score.distance});
  }
  if (prediction.neighbors.empty())
    throw ClassificationError("every labelled pair failed for query '" + query.id + "'");
  std::stable_sort(prediction.neighbors.begin(), prediction.neighbors.end(),
                   [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; });
  prediction.label = vote(prediction.neighbors, labeled, k);
  return prediction;
}

double accuracy(const std::map<std::string, std::string>& predictions,
                const std::map<std::string, std::string>& gold) {
  if (predictions.size() != gold.size())
    throw InputError("predictions cover " + std::to_string(predictions.size()) +
                     " ids but gold covers " + std::to_string(gold.size()));
  if (gold.empty()) throw InputError("accuracy needs at least one item");
  std::size_t correct = 0;
  for (const auto& [id, label] : gold) {
    const auto it = predictions.find(id);
    if (it == predictions.end()) throw InputError("no prediction for id '" + id + "'");
    if (it->second == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

Eigen::VectorXd tie_averaged_ranks(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                   bool higher_is_better) {
  const Eigen::Index n = scores.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return higher_is_better ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  Eigen::VectorXd ranks(n);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    // positions start+1 .. end share their mean
    const double mean = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = mean;
    start = end;
  }
  return ranks;
}

Eigen::VectorXd average_rank(const Eigen::Ref<const Eigen::MatrixXd>& scores,
                             bool higher_is_better) {
  if (scores.rows() == 0 || scores.cols() == 0) throw InputError("empty score table");
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      if (std::isnan(scores(i, j))) {
        std::ostringstream os;
        os << "score table cell (" << i << ", " << j << ") is missing";
        throw InputError(os.str());
      }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(scores.rows());
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    total += tie_averaged_ranks(scores.col(j), higher_is_better);
  return total / static_cast<double>(scores.cols());
}

void TaskReport::add(const std::string& row, const std::string& column, double value) {
  if (std::find(rows_.begin(), rows_.end(), row) == rows_.end()) rows_.push_back(row);
  if (std::find(columns_.begin(), columns_.end(), column) == columns_.end())
    columns_.push_back(column);
  cells_[{row, column}] = value;
}

Eigen::MatrixXd TaskReport::table() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_.size()),
                      static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const auto it = cells_.find({rows_[i], columns_[j]});
      if (it == cells_.end())
        throw InputError("'" + rows_[i] + "' has no result for '" + columns_[j] + "'");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = it->second;
    }
  }
  return out;
}

Eigen::VectorXd TaskReport::average_ranks(bool higher_is_better) const {
  return average_rank(table(), higher_is_better);
}

}  // namespace wasserdoc
