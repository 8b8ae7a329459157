// Command-line front end: retrieve, classify, sweep, rank-summary, distance.
//
// Exit status: 0 on success, 1 for a reported error, 2 for a usage error.
// Failures print {"error": {"type": ..., "message": ...}} on stderr.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wasserdoc/cli_io.hpp"
#include "wasserdoc/errors.hpp"

namespace {

using wasserdoc::RunConfig;

struct MethodOption {
  std::string name = "emd";
};

void add_method_options(CLI::App& cmd, RunConfig& config, MethodOption& method) {
  cmd.add_option("--method", method.name, "nbow, emd or semd")
      ->check(CLI::IsMember({"nbow", "emd", "semd"}))
      ->capture_default_str();
  cmd.add_option("--lambda", config.lambda, "Sinkhorn regularisation")->capture_default_str();
  cmd.add_option("--max-iter", config.max_iterations, "Sinkhorn iteration cap")
      ->capture_default_str();
  cmd.add_option("--tol", config.tolerance, "Sinkhorn marginal tolerance")->capture_default_str();
}

void add_embedding_options(CLI::App& cmd, RunConfig& config, bool required) {
  auto* src = cmd.add_option("--src-emb", config.src_emb, "source-language embeddings (.vec)");
  if (required) src->required();
  cmd.add_option("--tgt-emb", config.tgt_emb,
                 "target-language embeddings; defaults to --src-emb");
  cmd.add_option("--src-idf", config.src_idf, "text used to fit the source idf");
  cmd.add_option("--tgt-idf", config.tgt_idf, "text used to fit the target idf");
}

void add_run_options(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--out", config.out, "JSON report path")->required();
  cmd.add_option("--tsv", config.tsv, "TSV path; defaults to --out with .tsv");
  cmd.add_option("--jobs", config.jobs, "worker threads")->capture_default_str();
  cmd.add_option("--row-label", config.row_label, "row name for rank-summary");
  cmd.add_option("--pair-label", config.pair_label, "column name for rank-summary");
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << wasserdoc::error_json(type, message) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein distances between cross-lingual documents"};
  app.require_subcommand(1);

  RunConfig config;
  MethodOption method;

  auto* retrieve = app.add_subcommand("retrieve", "rank target sentences for each source sentence");
  add_method_options(*retrieve, config, method);
  add_embedding_options(*retrieve, config, true);
  add_run_options(*retrieve, config);
  retrieve->add_option("--source", config.source, "query sentences, one per line")->required();
  retrieve->add_option("--target", config.target, "aligned target sentences")->required();
  retrieve->add_option("--limit", config.limit, "use only the first N pairs (0 = all)");
  retrieve->add_option("--top", config.top, "ranked targets written per query")
      ->capture_default_str();

  auto* classify = app.add_subcommand("classify", "kNN zero-shot document classification");
  add_method_options(*classify, config, method);
  add_embedding_options(*classify, config, true);
  add_run_options(*classify, config);
  classify->add_option("--k", config.k, "neighbours")->capture_default_str();
  classify->add_option("--train", config.train, "labelled source-language documents")->required();
  classify->add_option("--test", config.test, "labelled target-language documents")->required();

  auto* sweep = app.add_subcommand("sweep", "grid over K (and lambda for semd) on validation data");
  add_method_options(*sweep, config, method);
  add_embedding_options(*sweep, config, true);
  add_run_options(*sweep, config);
  sweep->add_option("--train", config.train, "labelled source-language documents")->required();
  sweep->add_option("--test", config.test, "labelled validation documents")->required();
  sweep->add_option("--k-grid", config.k_grid, "K values")->delimiter(',');
  sweep->add_option("--lambda-grid", config.lambda_grid, "lambda values")->delimiter(',');

  std::vector<std::filesystem::path> reports;
  bool lower_is_better = false;
  std::filesystem::path summary_out;
  auto* rank = app.add_subcommand("rank-summary", "average rank of methods across reports");
  rank->add_option("reports", reports, "report JSON files")->required();
  rank->add_option("--out", summary_out, "summary JSON path (TSV written alongside)");
  rank->add_flag("--lower-is-better", lower_is_better, "scores are errors, not accuracies");

  std::string source_text, target_text;
  auto* distance = app.add_subcommand("distance", "debug one pair of documents");
  add_method_options(*distance, config, method);
  add_embedding_options(*distance, config, true);
  distance->add_option("--source", source_text, "source document text")->required();
  distance->add_option("--target", target_text, "target document text")->required();
  distance->add_option("--out", config.out, "also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), 2);
  }

  try {
    config.method = wasserdoc::parse_method(method.name);
    nlohmann::json result;
    if (*retrieve) {
      const auto s = wasserdoc::run_retrieval(config);
      result = {{"p_at_1", s.p_at_1},
                {"queries", s.queries},
                {"query_errors", s.query_errors},
                {"pair_errors", s.pair_errors},
                {"report", s.report.string()},
                {"rankings", s.rankings.string()}};
    } else if (*classify) {
      const auto s = wasserdoc::run_classification(config);
      result = {{"accuracy", s.accuracy},
                {"documents", s.documents},
                {"query_errors", s.query_errors},
                {"report", s.report.string()},
                {"predictions", s.predictions.string()}};
    } else if (*sweep) {
      const auto s = wasserdoc::run_sweep(config);
      result = {{"best_k", s.best_k},
                {"best_accuracy", s.best_accuracy},
                {"report", s.report.string()}};
      if (config.method == wasserdoc::MethodKind::semd) result["best_lambda"] = s.best_lambda;
    } else if (*rank) {
      const auto s = wasserdoc::run_rank_summary(reports, summary_out, !lower_is_better);
      result["average_rank"] = nlohmann::json::object();
      for (std::size_t i = 0; i < s.rows.size(); ++i)
        result["average_rank"][s.rows[i]] = s.ranks[static_cast<Eigen::Index>(i)];
    } else if (*distance) {
      std::cout << wasserdoc::run_distance(config, source_text, target_text);
      return 0;
    }
    std::cout << result.dump(2) << '\n';
    return 0;
  } catch (const wasserdoc::Error& e) {
    return fail(e.type(), e.what(), 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io_error", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), 1);
  }
}
