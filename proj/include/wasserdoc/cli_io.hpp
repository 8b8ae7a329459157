#pragma once

// Corpus ingestion, run configuration and report emission for the
// retrieval, classification, sweep, rank-summary and distance commands.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wasserdoc/tasks.hpp"

namespace wasserdoc {

struct RunConfig {
  MethodKind method = MethodKind::emd;
  std::size_t k = 5;
  double lambda = 0.01;
  int max_iterations = 1000;
  double tolerance = 1e-6;

  std::filesystem::path src_emb;
  /// Empty means the source table serves both languages.
  std::filesystem::path tgt_emb;
  std::filesystem::path source;
  std::filesystem::path target;
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path out;
  /// Defaults to out with its extension replaced by .tsv.
  std::filesystem::path tsv;
  /// Optional extra text used to fit each side's idf instead of the side's
  /// own documents.
  std::filesystem::path src_idf;
  std::filesystem::path tgt_idf;

  std::size_t jobs = 1;
  /// Use only the first `limit` aligned pairs (0 = all).
  std::size_t limit = 0;
  std::size_t top = 10;
  std::string row_label;
  std::string pair_label;

  std::vector<std::size_t> k_grid{1, 3, 5, 7, 9};
  std::vector<double> lambda_grid{0.01, 0.1, 1, 10};

  /// Throws InputError on invalid values.
  void validate() const;
  ot::SinkhornConfig<double> sinkhorn() const;
  DistanceMethod distance_method() const;
  std::filesystem::path tsv_path() const;
};

struct ParallelCorpus {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::size_t size() const noexcept { return source.size(); }
};

/// Line i of each input pairs as id i. Trailing blank lines are dropped from
/// both sides before the counts are compared.
ParallelCorpus ingest_parallel(std::istream& source, std::istream& target);
ParallelCorpus ingest_parallel(const std::filesystem::path& source,
                               const std::filesystem::path& target);

enum class Split { train, validation, test };
std::string_view split_name(Split split);

struct LabeledRecord {
  std::string label;
  std::string text;
  std::size_t line = 0;
};

struct LabeledCorpus {
  Split split = Split::train;
  std::vector<LabeledRecord> records;
  /// 1-based numbers of lines rejected as malformed.
  std::vector<std::size_t> rejected_lines;
};

/// "label<TAB>text" per line; the first TAB splits. Lines without a TAB, or
/// with an empty label or text, are rejected and listed.
LabeledCorpus ingest_labeled(std::istream& in, Split split = Split::train);
LabeledCorpus ingest_labeled(const std::filesystem::path& path, Split split = Split::train);

struct RetrievalSummary {
  double p_at_1 = 0.0;
  std::size_t queries = 0;
  std::size_t query_errors = 0;
  std::size_t pair_errors = 0;
  std::filesystem::path report;
  std::filesystem::path rankings;
};

/// Queries come from config.source, the collection from config.target.
/// Writes the JSON report to config.out and the top-N TSV next to it.
RetrievalSummary run_retrieval(const RunConfig& config);

struct ClassificationSummary {
  double accuracy = 0.0;
  std::size_t documents = 0;
  std::size_t query_errors = 0;
  std::filesystem::path report;
  std::filesystem::path predictions;
};

/// Labelled pool from config.train (source language), evaluation documents
/// from config.test (target language).
ClassificationSummary run_classification(const RunConfig& config);

struct SweepSummary {
  std::size_t best_k = 0;
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
  std::filesystem::path report;
};

/// Repeats classification over k_grid (and lambda_grid for semd) with
/// config.test as the validation split.
SweepSummary run_sweep(const RunConfig& config);

struct RankSummary {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  Eigen::MatrixXd table;
  Eigen::VectorXd ranks;
};

/// Combines run reports into a row x language-pair table with average ranks.
RankSummary run_rank_summary(const std::vector<std::filesystem::path>& reports,
                             const std::filesystem::path& out, bool higher_is_better = true);

/// Single-pair debug output (tokens, weights, cost matrix, plan, distance) as
/// pretty-printed JSON.
std::string run_distance(const RunConfig& config, const std::string& source_text,
                         const std::string& target_text);

/// {"error": {"type": ..., "message": ...}}
std::string error_json(const std::string& type, const std::string& message);

}  // namespace wasserdoc
