#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anon/schema.hpp"

namespace anon::data {

struct Record {
  std::string id;
  std::vector<double> features;
  std::map<std::string, std::string> labels;  // attribute name -> class label
};

// Immutable after construction; safe to share across readers.
struct Dataset {
  Schema schema;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  std::size_t dim() const { return schema.feature_names.size(); }

  const std::string& label_of(std::size_t record, const std::string& attribute) const;

  // Structural invariants (dimension, unique ids, finite features,
  // complete labels). Returns the attributes with fewer than two
  // distinct classes; a nonempty result marks the dataset degenerate
  // for training purposes but is not an error here.
  std::vector<std::string> validate() const;
};

// Distinct class labels of one attribute (sorted) plus the per-record
// class index. Shared by the forest, relevance and transform code.
struct LabelIndex {
  std::vector<std::string> classes;
  std::vector<std::uint32_t> codes;  // one per record
};

LabelIndex index_labels(const Dataset& dataset, const std::string& attribute);

std::vector<double> feature_column(const Dataset& dataset, std::size_t feature);

// CSV ingestion: header must name a superset of the schema columns.
// Ids come from schema.id_column when present, else the 0-based row
// index. Errors: MissingColumn, NonNumericFeature, DuplicateId,
// EmptyDataset, IoError.
Dataset load_csv(const std::string& path, const SchemaSpec& spec);
Dataset load_csv(const std::string& path, const Schema& schema);

// Emits header + records; floating point cells use shortest
// round-trip formatting, so load(save(D)) reproduces D bit-exactly.
void save_csv(const Dataset& dataset, const std::string& path);

struct SplitResult {
  Dataset train;
  Dataset eval;
  // Set when stratification was infeasible (single-class attribute or
  // a class with one record) and the split fell back to unstratified.
  bool degenerate = false;
};

// Stratified by attribute_of_interest; exact partition, deterministic
// in seed.
SplitResult split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

}  // namespace anon::data
