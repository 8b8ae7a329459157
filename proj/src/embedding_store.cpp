#include "wasserdoc/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wasserdoc/errors.hpp"

namespace wasserdoc {

EmbeddingTable::EmbeddingTable(Eigen::Index dimension, std::vector<std::string> languages)
    : dimension_(dimension), languages_(std::move(languages)) {
  if (dimension < 1) throw InputError("embedding dimension must be positive");
}

bool EmbeddingTable::add(std::string token, std::span<const float> values) {
  if (static_cast<Eigen::Index>(values.size()) != dimension_) {
    std::ostringstream os;
    os << "vector for '" << token << "' has " << values.size() << " values, table dimension is "
       << dimension_;
    throw DimensionError(os.str());
  }
  if (rows_.find(token) != rows_.end()) {
    ++duplicates_;
    return false;
  }
  rows_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  if (auto it = rows_.find(token); it != rows_.end()) return it->second;
  const std::string lowered = to_lower(token);
  if (lowered != token) {
    if (auto it = rows_.find(lowered); it != rows_.end()) return it->second;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? line.size() : next;
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& in, std::vector<std::string> languages) {
  std::optional<Eigen::Index> declared_dim;
  std::optional<EmbeddingTable> table;
  std::size_t skipped = 0;
  std::size_t line_number = 0;
  bool first_record = true;
  std::string line;
  std::vector<float> values;

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (first_record) {
      first_record = false;
      long long count = 0, dim = 0;
      if (fields.size() == 2 && parse_number(fields[0], count) && parse_number(fields[1], dim) &&
          count >= 0 && dim > 0) {
        declared_dim = static_cast<Eigen::Index>(dim);
        continue;
      }
    }

    values.clear();
    bool numeric = fields.size() >= 2;
    for (std::size_t k = 1; k < fields.size() && numeric; ++k) {
      float v = 0.0f;
      numeric = parse_number(fields[k], v);
      values.push_back(v);
    }
    if (!numeric) {
      ++skipped;
      continue;
    }
    const auto arity = static_cast<Eigen::Index>(values.size());
    if (declared_dim && arity != *declared_dim) {
      ++skipped;
      continue;
    }
    if (!table) table.emplace(declared_dim.value_or(arity), languages);
    if (arity != table->dimension()) {
      std::ostringstream os;
      os << "line " << line_number << " has " << arity << " values, expected "
         << table->dimension();
      throw FormatError(os.str());
    }
    table->add(std::string(fields[0]), values);
  }
  if (!table || table->size() == 0) throw FormatError("no parseable embedding rows");
  for (std::size_t k = 0; k < skipped; ++k) table->count_skipped_line();
  return *std::move(table);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string> languages) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding file " + path.string());
  try {
    return load_embeddings(in, std::move(languages));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dimension() << '\n';
  char buffer[64];
  for (std::size_t row = 0; row < table.size(); ++row) {
    out << table.token(row);
    const auto vec = table.vector(row);
    for (Eigen::Index k = 0; k < vec.size(); ++k) {
      const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), vec[k]);
      out << ' ' << std::string_view(buffer, static_cast<std::size_t>(ptr - buffer));
    }
    out << '\n';
  }
}

std::pair<DocumentDistribution, OovReport> filter_oov(const DocumentDistribution& dist,
                                                      const EmbeddingTable& table) {
  DocumentDistribution kept;
  kept.source_doc_id = dist.source_doc_id;
  OovReport report;
  std::vector<double> weights;
  double dropped = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double w = dist.weights[static_cast<Eigen::Index>(k)];
    if (table.contains(dist.tokens[k])) {
      kept.support.push_back(dist.support[k]);
      kept.tokens.push_back(dist.tokens[k]);
      weights.push_back(w);
    } else {
      report.dropped_tokens.push_back(dist.tokens[k]);
      dropped += w;
    }
  }
  report.dropped_mass = std::clamp(dropped, 0.0, 1.0);
  report.coverage_ratio =
      dist.size() == 0 ? 0.0 : static_cast<double>(kept.size()) / static_cast<double>(dist.size());
  if (weights.empty())
    throw EmptyDocumentError("document '" + dist.source_doc_id + "' has no tokens with embeddings");
  kept.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                   static_cast<Eigen::Index>(weights.size()));
  kept.weights /= kept.weights.sum();
  return {std::move(kept), std::move(report)};
}

Eigen::MatrixXd support_matrix(const DocumentDistribution& dist, const EmbeddingTable& table) {
  Eigen::MatrixXd points(static_cast<Eigen::Index>(dist.size()), table.dimension());
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const auto row = table.find(dist.tokens[k]);
    if (!row)
      throw ContractError("token '" + dist.tokens[k] +
                          "' has no embedding; apply filter_oov before building costs");
    points.row(static_cast<Eigen::Index>(k)) = table.vector(*row).cast<double>().transpose();
  }
  return points;
}

ot::CostMatrix<double> ground_metric(const DocumentDistribution& source,
                                     const DocumentDistribution& target,
                                     const EmbeddingTable& source_table,
                                     const EmbeddingTable& target_table) {
  if (source_table.dimension() != target_table.dimension()) {
    std::ostringstream os;
    os << "embedding tables have dimensions " << source_table.dimension() << " and "
       << target_table.dimension();
    throw InputError(os.str());
  }
  return ot::CostMatrix<double>(pairwise_euclidean(support_matrix(source, source_table),
                                                   support_matrix(target, target_table)));
}

}  // namespace wasserdoc
