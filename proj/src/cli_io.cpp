#include "wasserdoc/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "wasserdoc/errors.hpp"
#include "wasserdoc/parallel.hpp"

namespace wasserdoc {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void RunConfig::validate() const {
  if (k < 1) throw InputError("--k must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("--lambda must be positive");
  if (max_iterations < 1) throw InputError("--max-iter must be at least 1");
  if (!(tolerance > 0.0)) throw InputError("--tol must be positive");
  if (jobs < 1) throw InputError("--jobs must be at least 1");
  if (top < 1) throw InputError("--top must be at least 1");
  if (k_grid.empty() || std::find(k_grid.begin(), k_grid.end(), 0u) != k_grid.end())
    throw InputError("K grid must be non-empty with every K >= 1");
  if (lambda_grid.empty() ||
      std::any_of(lambda_grid.begin(), lambda_grid.end(), [](double l) { return !(l > 0.0); }))
    throw InputError("lambda grid must be non-empty with every lambda > 0");
}

ot::SinkhornConfig<double> RunConfig::sinkhorn() const {
  ot::SinkhornConfig<double> c;
  c.lambda = lambda;
  c.max_iterations = max_iterations;
  c.convergence_tolerance = tolerance;
  c.validate();
  return c;
}

DistanceMethod RunConfig::distance_method() const {
  if (method == MethodKind::semd) return DistanceMethod::semd(sinkhorn());
  return DistanceMethod::make(method, std::nullopt);
}

std::filesystem::path RunConfig::tsv_path() const {
  if (!tsv.empty()) return tsv;
  auto p = out;
  return p.replace_extension(".tsv");
}

namespace {

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing required ") + what);
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot open ") + what + " " + path.string());
  return in;
}

std::vector<std::string> read_file_lines(const std::filesystem::path& path, const char* what) {
  auto in = open_input(path, what);
  return read_lines(in);
}

// Shortest round-trip decimal form; identical across runs and platforms.
std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

json config_json(const RunConfig& c) {
  json j;
  j["method"] = std::string(method_name(c.method));
  j["k"] = c.k;
  j["lambda"] = c.lambda;
  j["max_iterations"] = c.max_iterations;
  j["tolerance"] = c.tolerance;
  j["src_emb"] = c.src_emb.string();
  j["tgt_emb"] = (c.tgt_emb.empty() ? c.src_emb : c.tgt_emb).string();
  j["source"] = c.source.string();
  j["target"] = c.target.string();
  j["train"] = c.train.string();
  j["test"] = c.test.string();
  j["src_idf"] = c.src_idf.string();
  j["tgt_idf"] = c.tgt_idf.string();
  j["out"] = c.out.string();
  j["jobs"] = c.jobs;
  j["limit"] = c.limit;
  j["top"] = c.top;
  j["k_grid"] = c.k_grid;
  j["lambda_grid"] = c.lambda_grid;
  j["sinkhorn_domain"] = "automatic";
  return j;
}

std::string default_row_label(const RunConfig& c) {
  if (!c.row_label.empty()) return c.row_label;
  return std::string(method_name(c.method)) + "/" + c.src_emb.stem().string();
}

std::string default_pair_label(const RunConfig& c, const std::filesystem::path& a,
                               const std::filesystem::path& b) {
  if (!c.pair_label.empty()) return c.pair_label;
  return a.stem().string() + "->" + b.stem().string();
}

// One or two embedding tables; the second is optional.
struct Tables {
  EmbeddingTable source;
  std::optional<EmbeddingTable> target_storage;

  const EmbeddingTable& target() const { return target_storage ? *target_storage : source; }

  static Tables load(const RunConfig& c) {
    if (c.src_emb.empty()) throw InputError("missing required --src-emb");
    Tables t{load_embeddings(c.src_emb), std::nullopt};
    if (!c.tgt_emb.empty() && c.tgt_emb != c.src_emb)
      t.target_storage = load_embeddings(c.tgt_emb);
    if (t.source.dimension() != t.target().dimension())
      throw InputError("embedding files " + c.src_emb.string() + " and " + c.tgt_emb.string() +
                       " have different dimensions");
    return t;
  }
};

json table_json(const EmbeddingTable& t) {
  return {{"tokens", t.size()},
          {"dimension", t.dimension()},
          {"duplicates", t.duplicate_count()},
          {"skipped_lines", t.skipped_lines()}};
}

std::vector<TokenizedDocument> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<TokenizedDocument> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(tokenize(t));
  return docs;
}

// idf for one side: fit on the optional idf corpus, else on the side's own texts.
Vocabulary fit_vocabulary(const std::filesystem::path& idf_corpus,
                          const std::vector<TokenizedDocument>& own) {
  if (idf_corpus.empty()) return build_vocabulary(own);
  return build_vocabulary(tokenize_all(read_file_lines(idf_corpus, "idf corpus")));
}

std::vector<PreparedDocument> prepare_all(const std::vector<TokenizedDocument>& docs,
                                          const LanguageResources& side, std::size_t jobs) {
  std::vector<PreparedDocument> out(docs.size());
  parallel_for(docs.size(), jobs,
               [&](std::size_t i) { out[i] = prepare_document(docs[i], std::to_string(i), side); });
  return out;
}

json oov_json(const std::vector<PreparedDocument>& docs) {
  double coverage = 0.0, dropped = 0.0;
  std::size_t empty = 0, nbow_empty = 0;
  for (const auto& d : docs) {
    coverage += d.oov.coverage_ratio;
    dropped += d.oov.dropped_mass;
    if (!d.distribution) ++empty;
    if (!d.nbow) ++nbow_empty;
  }
  const double n = docs.empty() ? 1.0 : static_cast<double>(docs.size());
  return {{"documents", docs.size()},
          {"mean_coverage_ratio", coverage / n},
          {"mean_dropped_mass", dropped / n},
          {"empty_after_oov", empty},
          {"nbow_unusable", nbow_empty}};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string require_label(const std::string& label, std::size_t line) {
  if (label.empty()) throw InputError("empty label on line " + std::to_string(line));
  return label;
}

}  // namespace

std::string error_json(const std::string& type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}}.dump();
}

ParallelCorpus ingest_parallel(std::istream& source, std::istream& target) {
  ParallelCorpus corpus{read_lines(source), read_lines(target)};
  while (!corpus.source.empty() && blank(corpus.source.back())) corpus.source.pop_back();
  while (!corpus.target.empty() && blank(corpus.target.back())) corpus.target.pop_back();
  if (corpus.source.size() != corpus.target.size()) {
    throw InputError("parallel corpus line counts differ: " + std::to_string(corpus.source.size()) +
                     " ≠ " + std::to_string(corpus.target.size()));
  }
  if (corpus.source.empty()) throw InputError("parallel corpus is empty");
  return corpus;
}

ParallelCorpus ingest_parallel(const std::filesystem::path& source,
                               const std::filesystem::path& target) {
  auto s = open_input(source, "--source file");
  auto t = open_input(target, "--target file");
  try {
    return ingest_parallel(s, t);
  } catch (const InputError& e) {
    throw InputError(source.string() + ", " + target.string() + ": " + e.what());
  }
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "unknown";
}

LabeledCorpus ingest_labeled(std::istream& in, Split split) {
  LabeledCorpus corpus;
  corpus.split = split;
  auto lines = read_lines(in);
  // A trailing blank line is a file ending, not a malformed record.
  while (!lines.empty() && blank(lines.back())) lines.pop_back();
  std::size_t number = 0;
  for (auto& line : lines) {
    ++number;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || blank(line.substr(tab + 1))) {
      corpus.rejected_lines.push_back(number);
      continue;
    }
    corpus.records.push_back({line.substr(0, tab), line.substr(tab + 1), number});
  }
  if (corpus.records.empty()) {
    std::string message = "no valid 'label<TAB>text' records";
    if (!corpus.rejected_lines.empty()) {
      message += "; rejected lines:";
      for (std::size_t k = 0; k < std::min<std::size_t>(10, corpus.rejected_lines.size()); ++k)
        message += " " + std::to_string(corpus.rejected_lines[k]);
    }
    throw InputError(message);
  }
  return corpus;
}

LabeledCorpus ingest_labeled(const std::filesystem::path& path, Split split) {
  auto in = open_input(path, "labelled corpus");
  try {
    return ingest_labeled(in, split);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

RetrievalSummary run_retrieval(const RunConfig& config) {
  const auto start = Clock::now();
  config.validate();
  if (config.out.empty()) throw InputError("missing required --out");
  const auto method = config.distance_method();
  auto corpus = ingest_parallel(config.source, config.target);
  if (config.limit > 0 && config.limit < corpus.size()) {
    corpus.source.resize(config.limit);
    corpus.target.resize(config.limit);
  }
  const auto tables = Tables::load(config);

  const auto query_tokens = tokenize_all(corpus.source);
  const auto collection_tokens = tokenize_all(corpus.target);
  const auto query_vocab = fit_vocabulary(config.src_idf, query_tokens);
  const auto collection_vocab = fit_vocabulary(config.tgt_idf, collection_tokens);
  const auto queries = prepare_all(query_tokens, {query_vocab, tables.source}, config.jobs);
  const auto collection =
      prepare_all(collection_tokens, {collection_vocab, tables.target()}, config.jobs);

  std::vector<RankedResult> results(queries.size());
  parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
    if (!queries[i].usable(method.kind())) {
      results[i].query_id = queries[i].id;
      results[i].query_error = queries[i].error(method.kind());
      return;
    }
    results[i] = rank_targets(queries[i], collection, method, tables.source, tables.target());
  });

  std::unordered_map<std::string, std::string> gold;
  for (std::size_t i = 0; i < queries.size(); ++i) gold[queries[i].id] = collection[i].id;
  const double p1 = precision_at_1(results, gold);

  RetrievalSummary summary;
  summary.p_at_1 = p1;
  summary.queries = queries.size();
  json gold_ranks = json::array();
  std::size_t nonconverged = 0;
  std::ostringstream tsv;
  tsv << "query_id\trank\ttarget_id\tdistance\n";
  for (const auto& r : results) {
    summary.pair_errors += r.pair_errors;
    nonconverged += r.nonconverged;
    if (!r.query_error.empty()) {
      ++summary.query_errors;
      gold_ranks.push_back(nullptr);
      continue;
    }
    const auto rank = gold_rank(r, gold.at(r.query_id));
    gold_ranks.push_back(rank ? json(*rank) : json(nullptr));
    for (std::size_t k = 0; k < std::min(config.top, r.entries.size()); ++k) {
      tsv << r.query_id << '\t' << (k + 1) << '\t' << r.entries[k].target_id << '\t'
          << format_double(r.entries[k].distance) << '\n';
    }
  }

  summary.report = config.out;
  summary.rankings = config.tsv_path();
  json report{
      {"command", "retrieve"},
      {"metric", "p_at_1"},
      {"value", p1},
      {"p_at_1", p1},
      {"row_label", default_row_label(config)},
      {"pair_label", default_pair_label(config, config.source, config.target)},
      {"queries", queries.size()},
      {"collection_size", collection.size()},
      {"gold_ranks", gold_ranks},
      {"errors",
       {{"query_errors", summary.query_errors},
        {"pair_errors", summary.pair_errors},
        {"nonconverged_pairs", nonconverged}}},
      {"oov", {{"queries", oov_json(queries)}, {"collection", oov_json(collection)}}},
      {"embeddings", {{"source", table_json(tables.source)}, {"target", table_json(tables.target())}}},
      {"rankings_tsv", summary.rankings.string()},
      {"config", config_json(config)},
  };
  write_text(summary.rankings, tsv.str());
  report["wall_time_seconds"] = seconds_since(start);
  write_text(summary.report, report.dump(2) + "\n");
  return summary;
}

namespace {

struct ClassificationData {
  LabeledCorpus train;
  LabeledCorpus test;
  Tables tables;
  Vocabulary train_vocab;
  Vocabulary test_vocab;
  std::vector<LabeledDocument> pool;
  std::vector<PreparedDocument> queries;
};

ClassificationData load_classification(const RunConfig& config, Split test_split) {
  auto train = ingest_labeled(config.train, Split::train);
  auto test = ingest_labeled(config.test, test_split);
  auto tables = Tables::load(config);
  std::vector<std::string> train_texts, test_texts;
  for (const auto& r : train.records) train_texts.push_back(r.text);
  for (const auto& r : test.records) test_texts.push_back(r.text);
  const auto train_tokens = tokenize_all(train_texts);
  const auto test_tokens = tokenize_all(test_texts);
  // Only label-free text of the evaluation split enters its idf.
  auto train_vocab = fit_vocabulary(config.src_idf, train_tokens);
  auto test_vocab = fit_vocabulary(config.tgt_idf, test_tokens);
  ClassificationData data{std::move(train), std::move(test), std::move(tables),
                          std::move(train_vocab), std::move(test_vocab), {}, {}};
  auto prepared_pool =
      prepare_all(train_tokens, {data.train_vocab, data.tables.source}, config.jobs);
  data.pool.reserve(prepared_pool.size());
  for (std::size_t i = 0; i < prepared_pool.size(); ++i)
    data.pool.push_back({std::move(prepared_pool[i]),
                         require_label(data.train.records[i].label, data.train.records[i].line)});
  data.queries = prepare_all(test_tokens, {data.test_vocab, data.tables.target()}, config.jobs);
  return data;
}

struct QueryNeighbors {
  std::optional<KnnPrediction> prediction;
  std::string error;
};

std::vector<QueryNeighbors> classify_all(const ClassificationData& data,
                                         const DistanceMethod& method, std::size_t k,
                                         std::size_t jobs) {
  std::vector<QueryNeighbors> out(data.queries.size());
  parallel_for(data.queries.size(), jobs, [&](std::size_t i) {
    try {
      out[i].prediction = knn_classify(data.queries[i], data.pool, k, method,
                                       data.tables.target(), data.tables.source);
    } catch (const ClassificationError& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace

ClassificationSummary run_classification(const RunConfig& config) {
  const auto start = Clock::now();
  config.validate();
  if (config.out.empty()) throw InputError("missing required --out");
  const auto method = config.distance_method();
  const auto data = load_classification(config, Split::test);
  const auto outcomes = classify_all(data, method, config.k, config.jobs);

  std::map<std::string, std::string> predictions, gold;
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  std::size_t pair_errors = 0, nonconverged = 0, query_errors = 0;
  std::ostringstream tsv;
  tsv << "id\tgold\tpredicted\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& id = data.queries[i].id;
    const auto& truth = data.test.records[i].label;
    std::string predicted;
    if (outcomes[i].prediction) {
      predicted = outcomes[i].prediction->label;
      pair_errors += outcomes[i].prediction->pair_errors;
      nonconverged += outcomes[i].prediction->nonconverged;
    } else {
      ++query_errors;
    }
    predictions[id] = predicted;
    gold[id] = truth;
    ++confusion[truth][predicted.empty() ? "<error>" : predicted];
    tsv << id << '\t' << truth << '\t' << (predicted.empty() ? "<error>" : predicted) << '\n';
  }
  const double acc = accuracy(predictions, gold);

  ClassificationSummary summary;
  summary.accuracy = acc;
  summary.documents = outcomes.size();
  summary.query_errors = query_errors;
  summary.report = config.out;
  summary.predictions = config.tsv_path();

  json report{
      {"command", "classify"},
      {"metric", "accuracy"},
      {"value", acc},
      {"accuracy", acc},
      {"row_label", default_row_label(config)},
      {"pair_label", default_pair_label(config, config.train, config.test)},
      {"documents", outcomes.size()},
      {"training_documents", data.pool.size()},
      {"confusion", confusion},
      {"errors",
       {{"query_errors", query_errors},
        {"pair_errors", pair_errors},
        {"nonconverged_pairs", nonconverged},
        {"rejected_train_lines", data.train.rejected_lines},
        {"rejected_test_lines", data.test.rejected_lines}}},
      {"oov",
       {{"train", oov_json([&] {
           std::vector<PreparedDocument> docs;
           for (const auto& d : data.pool) docs.push_back(d.document);
           return docs;
         }())},
        {"test", oov_json(data.queries)}}},
      {"predictions_tsv", summary.predictions.string()},
      {"config", config_json(config)},
  };
  write_text(summary.predictions, tsv.str());
  report["wall_time_seconds"] = seconds_since(start);
  write_text(summary.report, report.dump(2) + "\n");
  return summary;
}

SweepSummary run_sweep(const RunConfig& config) {
  const auto start = Clock::now();
  config.validate();
  if (config.out.empty()) throw InputError("missing required --out");
  const auto data = load_classification(config, Split::validation);
  const std::vector<double> lambdas =
      config.method == MethodKind::semd ? config.lambda_grid : std::vector<double>{config.lambda};

  SweepSummary summary;
  summary.best_accuracy = -1.0;
  json grid = json::array();
  for (double lambda : lambdas) {
    RunConfig point = config;
    point.lambda = lambda;
    const auto method = point.distance_method();
    // Neighbour lists do not depend on K; compute them once per lambda.
    const auto outcomes = classify_all(data, method, 1, config.jobs);
    for (std::size_t k : config.k_grid) {
      std::map<std::string, std::string> predictions, gold;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& id = data.queries[i].id;
        gold[id] = data.test.records[i].label;
        predictions[id] = outcomes[i].prediction
                              ? vote(outcomes[i].prediction->neighbors, data.pool, k)
                              : std::string();
      }
      const double acc = accuracy(predictions, gold);
      json cell{{"k", k}, {"accuracy", acc}};
      if (config.method == MethodKind::semd) cell["lambda"] = lambda;
      grid.push_back(cell);
      if (acc > summary.best_accuracy) {
        summary.best_accuracy = acc;
        summary.best_k = k;
        summary.best_lambda = lambda;
      }
    }
  }
  summary.report = config.out;
  json best{{"k", summary.best_k}, {"accuracy", summary.best_accuracy}};
  if (config.method == MethodKind::semd) best["lambda"] = summary.best_lambda;
  json report{{"command", "sweep"},
              {"metric", "accuracy"},
              {"split", std::string(split_name(Split::validation))},
              {"grid", grid},
              {"best", best},
              {"config", config_json(config)}};
  report["wall_time_seconds"] = seconds_since(start);
  write_text(summary.report, report.dump(2) + "\n");
  return summary;
}

RankSummary run_rank_summary(const std::vector<std::filesystem::path>& reports,
                             const std::filesystem::path& out, bool higher_is_better) {
  if (reports.empty()) throw InputError("rank-summary needs at least one report");
  TaskReport table;
  std::map<std::pair<std::string, std::string>, std::string> seen;
  for (const auto& path : reports) {
    auto in = open_input(path, "report");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    if (!j.contains("row_label") || !j.contains("pair_label") || !j.contains("value"))
      throw FormatError(path.string() + ": report lacks row_label, pair_label or value");
    const auto row = j["row_label"].get<std::string>();
    const auto column = j["pair_label"].get<std::string>();
    if (auto [it, inserted] = seen.try_emplace({row, column}, path.string()); !inserted)
      throw InputError("reports " + it->second + " and " + path.string() + " both cover " + row +
                       " on " + column);
    table.add(row, column, j["value"].get<double>());
  }

  RankSummary summary;
  summary.rows = table.rows();
  summary.columns = table.columns();
  summary.table = table.table();
  summary.ranks = average_rank(summary.table, higher_is_better);

  if (!out.empty()) {
    json rows = json::array();
    std::ostringstream tsv;
    tsv << "row";
    for (const auto& c : summary.columns) tsv << '\t' << c;
    tsv << "\trank\n";
    for (std::size_t i = 0; i < summary.rows.size(); ++i) {
      json cells = json::object();
      tsv << summary.rows[i];
      for (std::size_t j = 0; j < summary.columns.size(); ++j) {
        const double v = summary.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        cells[summary.columns[j]] = v;
        tsv << '\t' << format_double(v);
      }
      const double r = summary.ranks[static_cast<Eigen::Index>(i)];
      tsv << '\t' << format_double(r) << '\n';
      rows.push_back({{"row", summary.rows[i]}, {"scores", cells}, {"average_rank", r}});
    }
    json report{{"command", "rank-summary"},
                {"higher_is_better", higher_is_better},
                {"columns", summary.columns},
                {"rows", rows}};
    write_text(out, report.dump(2) + "\n");
    auto tsv_path = out;
    write_text(tsv_path.replace_extension(".tsv"), tsv.str());
  }
  return summary;
}

std::string run_distance(const RunConfig& config, const std::string& source_text,
                         const std::string& target_text) {
  config.validate();
  const auto method = config.distance_method();
  const auto tables = Tables::load(config);
  const std::vector<TokenizedDocument> source_doc{tokenize(source_text)};
  const std::vector<TokenizedDocument> target_doc{tokenize(target_text)};
  const auto source_vocab = fit_vocabulary(config.src_idf, source_doc);
  const auto target_vocab = fit_vocabulary(config.tgt_idf, target_doc);
  const auto source = prepare_document(source_doc[0], "source", {source_vocab, tables.source});
  const auto target = prepare_document(target_doc[0], "target", {target_vocab, tables.target()});
  if (!source.usable(method.kind()))
    throw EmptyDocumentError("source: " + source.error(method.kind()));
  if (!target.usable(method.kind()))
    throw EmptyDocumentError("target: " + target.error(method.kind()));

  auto side_json = [&](const PreparedDocument& d) {
    json j{{"tokens", json::array()}, {"weights", json::array()}};
    if (d.distribution) {
      j["tokens"] = d.distribution->tokens;
      j["weights"] = std::vector<double>(d.distribution->weights.data(),
                                         d.distribution->weights.data() + d.distribution->weights.size());
    }
    j["dropped_tokens"] = d.oov.dropped_tokens;
    j["dropped_mass"] = d.oov.dropped_mass;
    return j;
  };
  auto matrix_json = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };

  json out{{"method", std::string(method.name())},
           {"source", side_json(source)},
           {"target", side_json(target)},
           {"config", config_json(config)}};
  if (method.kind() == MethodKind::nbow) {
    const double distance = pair_distance(method, source, target, tables.source, tables.target());
    out["distance"] = distance;
    out["cosine"] = 1.0 - distance;
  } else {
    const auto cost = ground_metric(*source.distribution, *target.distribution, tables.source,
                                    tables.target());
    const auto p = source.distribution->distribution();
    const auto q = target.distribution->distribution();
    const auto plan = method.kind() == MethodKind::emd
                          ? ot::exact_plan(p, q, cost)
                          : ot::sinkhorn_plan(p, q, cost, *method.sinkhorn());
    out["cost_matrix"] = matrix_json(cost.entries());
    out["plan"] = matrix_json(plan.coupling);
    out["distance"] = plan.objective;
    out["marginal_error"] = plan.marginal_error;
    out["converged"] = plan.converged;
    out["iterations"] = plan.iterations;
    out["entropy"] = ot::entropy(plan);
    out["log_domain"] = plan.log_domain;
  }
  const std::string text = out.dump(2) + "\n";
  if (!config.out.empty()) write_text(config.out, text);
  return text;
}

}  // namespace wasserdoc
