#include "anon/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "anon/error.hpp"
#include "anon/rng.hpp"

namespace anon::data {

namespace {

// One CSV line -> cells. Supports RFC-style quoting for cells that
// contain commas, quotes or newlines (writer emits those quoted).
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

void append_csv_cell(std::string& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) {
    out += cell;
    return;
  }
  out.push_back('"');
  for (const char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin < end && *begin == '+') ++begin;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

}  // namespace

const std::string& Dataset::label_of(std::size_t record, const std::string& attribute) const {
  const auto& labels = records.at(record).labels;
  const auto it = labels.find(attribute);
  if (it == labels.end()) {
    throw_data("UnknownAttribute", "record '" + records[record].id +
                                       "' carries no label for attribute '" + attribute + "'");
  }
  return it->second;
}

std::vector<std::string> Dataset::validate() const {
  schema.validate();
  const std::size_t d = dim();
  std::set<std::string> ids;
  const auto attributes = schema.all_attributes();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& rec = records[i];
    if (rec.features.size() != d) {
      throw_data("DimensionMismatch", "record '" + rec.id + "' has " +
                                          std::to_string(rec.features.size()) +
                                          " features, schema expects " + std::to_string(d));
    }
    for (const double v : rec.features) {
      if (!std::isfinite(v)) {
        throw_data("NonNumericFeature", "record '" + rec.id + "' has a non-finite feature");
      }
    }
    if (!ids.insert(rec.id).second) {
      throw_data("DuplicateId", "record id '" + rec.id + "' appears more than once");
    }
    for (const auto& attr : attributes) {
      if (!rec.labels.count(attr)) {
        throw_data("UnknownAttribute",
                   "record '" + rec.id + "' is missing a label for attribute '" + attr + "'");
      }
    }
  }

  std::vector<std::string> degenerate;
  for (const auto& attr : attributes) {
    std::set<std::string> classes;
    for (const auto& rec : records) classes.insert(rec.labels.at(attr));
    if (classes.size() < 2) degenerate.push_back(attr);
  }
  return degenerate;
}

LabelIndex index_labels(const Dataset& dataset, const std::string& attribute) {
  if (!dataset.schema.has_attribute(attribute)) {
    throw_data("UnknownAttribute", "attribute '" + attribute + "' is not in the schema");
  }
  LabelIndex index;
  std::map<std::string, std::uint32_t> codes;
  for (const auto& rec : dataset.records) codes.emplace(rec.labels.at(attribute), 0);
  std::uint32_t next = 0;
  for (auto& [label, code] : codes) {
    code = next++;
    index.classes.push_back(label);
  }
  index.codes.reserve(dataset.size());
  for (const auto& rec : dataset.records) index.codes.push_back(codes[rec.labels.at(attribute)]);
  return index;
}

std::vector<double> feature_column(const Dataset& dataset, std::size_t feature) {
  std::vector<double> column;
  column.reserve(dataset.size());
  for (const auto& rec : dataset.records) column.push_back(rec.features.at(feature));
  return column;
}

Dataset load_csv(const std::string& path, const SchemaSpec& spec) {
  std::ifstream in(path);
  if (!in) throw_data("IoError", "cannot open dataset file '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line)) throw_data("EmptyDataset", "file '" + path + "' is empty");
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  const std::vector<std::string> header = split_csv_line(header_line);

  const Schema schema = spec.resolve(header);

  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) column_of.emplace(header[i], i);

  auto require_column = [&](const std::string& name) -> std::size_t {
    const auto it = column_of.find(name);
    if (it == column_of.end()) {
      throw_data("MissingColumn", "schema column '" + name + "' not found in header of '" + path + "'");
    }
    return it->second;
  };

  std::vector<std::size_t> feature_cols;
  feature_cols.reserve(schema.feature_names.size());
  for (const auto& name : schema.feature_names) feature_cols.push_back(require_column(name));

  const auto attributes = schema.all_attributes();
  std::vector<std::size_t> attr_cols;
  attr_cols.reserve(attributes.size());
  for (const auto& name : attributes) attr_cols.push_back(require_column(name));

  std::size_t id_col = 0;
  const bool has_id = schema.id_column.has_value();
  if (has_id) id_col = require_column(*schema.id_column);

  Dataset dataset;
  dataset.schema = schema;

  std::set<std::string> seen_ids;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size()) {
      throw_data("MissingColumn", "row " + std::to_string(row) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(header.size()));
    }

    Record rec;
    rec.id = has_id ? cells[id_col] : std::to_string(row);
    if (!seen_ids.insert(rec.id).second) {
      throw_data("DuplicateId", "record id '" + rec.id + "' appears more than once");
    }

    rec.features.reserve(feature_cols.size());
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      double value = 0.0;
      if (!parse_double(cells[feature_cols[f]], value)) {
        throw_data("NonNumericFeature", "row " + std::to_string(row) + ", column '" +
                                            schema.feature_names[f] + "': cannot parse '" +
                                            cells[feature_cols[f]] + "' as a finite number");
      }
      rec.features.push_back(value);
    }

    for (std::size_t a = 0; a < attributes.size(); ++a) {
      rec.labels.emplace(attributes[a], cells[attr_cols[a]]);
    }

    dataset.records.push_back(std::move(rec));
    ++row;
  }

  if (dataset.records.empty()) throw_data("EmptyDataset", "file '" + path + "' has no data rows");
  return dataset;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  SchemaSpec spec;
  spec.feature_names = schema.feature_names;
  spec.attribute_of_interest = schema.attribute_of_interest;
  spec.additional_attributes = schema.additional_attributes;
  spec.sensitive_attributes = schema.sensitive_attributes;
  spec.id_column = schema.id_column;
  return load_csv(path, spec);
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("IoError", "cannot write dataset file '" + path + "'");

  const Schema& schema = dataset.schema;
  const auto attributes = schema.all_attributes();

  std::string line;
  bool first = true;
  auto emit = [&](const std::string& cell) {
    if (!first) line.push_back(',');
    append_csv_cell(line, cell);
    first = false;
  };

  if (schema.id_column) emit(*schema.id_column);
  for (const auto& name : schema.feature_names) emit(name);
  for (const auto& name : attributes) emit(name);
  out << line << '\n';

  for (const auto& rec : dataset.records) {
    line.clear();
    first = true;
    if (schema.id_column) emit(rec.id);
    for (const double v : rec.features) emit(format_double(v));
    for (const auto& name : attributes) emit(rec.labels.at(name));
    out << line << '\n';
  }
  if (!out) throw_data("IoError", "write failure on dataset file '" + path + "'");
}

SplitResult split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (dataset.size() < 2) {
    throw_data("DegenerateSplit", "need at least 2 records to split");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw_config("InvalidConfig", "train_fraction must lie in (0, 1)");
  }

  const LabelIndex labels = index_labels(dataset, dataset.schema.attribute_of_interest);
  std::vector<std::vector<std::uint32_t>> by_class(labels.classes.size());
  for (std::uint32_t i = 0; i < dataset.size(); ++i) by_class[labels.codes[i]].push_back(i);

  bool degenerate = labels.classes.size() < 2;
  for (const auto& members : by_class) {
    if (members.size() < 2) degenerate = true;
  }

  auto clamp_count = [](long long count, std::size_t n) -> std::size_t {
    if (count < 1) return 1;
    if (count > static_cast<long long>(n - 1)) return n - 1;
    return static_cast<std::size_t>(count);
  };

  std::vector<std::uint32_t> train_idx;
  std::vector<std::uint32_t> eval_idx;
  if (degenerate) {
    std::vector<std::uint32_t> order(dataset.size());
    for (std::uint32_t i = 0; i < dataset.size(); ++i) order[i] = i;
    Rng rng(mix64(seed, 0x51a7ULL));
    rng.shuffle(order);
    const std::size_t n_train =
        clamp_count(std::llround(train_fraction * static_cast<double>(order.size())), order.size());
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    eval_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  } else {
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      std::vector<std::uint32_t> members = by_class[c];
      Rng rng(mix64(seed, c));
      rng.shuffle(members);
      const std::size_t n_train = clamp_count(
          std::llround(train_fraction * static_cast<double>(members.size())), members.size());
      train_idx.insert(train_idx.end(), members.begin(),
                       members.begin() + static_cast<std::ptrdiff_t>(n_train));
      eval_idx.insert(eval_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                      members.end());
    }
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(eval_idx.begin(), eval_idx.end());

  SplitResult result;
  result.degenerate = degenerate;
  result.train.schema = dataset.schema;
  result.eval.schema = dataset.schema;
  for (const auto i : train_idx) result.train.records.push_back(dataset.records[i]);
  for (const auto i : eval_idx) result.eval.records.push_back(dataset.records[i]);
  return result;
}

}  // namespace anon::data
