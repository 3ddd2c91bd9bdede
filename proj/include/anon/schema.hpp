#pragma once

#include <optional>
#include <string>
#include <vector>

namespace anon::data {

// Column roles for a feature-vector dataset: which attribute the
// anonymization must preserve (interest), which else are worth keeping
// (additional), and which must be suppressed (sensitive).
struct Schema {
  std::vector<std::string> feature_names;
  std::string attribute_of_interest;
  std::vector<std::string> additional_attributes;
  std::vector<std::string> sensitive_attributes;
  std::optional<std::string> id_column;

  // Interest + additional + sensitive, in schema order.
  std::vector<std::string> all_attributes() const;

  bool has_attribute(const std::string& name) const;

  // Throws Error(Config, "InvalidSchema") when name sets collide,
  // the interest attribute is empty, or there are no features.
  void validate() const;
};

// Schema JSON: `features` is either an array of names or
// {"prefix": "f"}, in which case names are resolved from a CSV header
// (all columns starting with the prefix, in header order).
struct SchemaSpec {
  std::vector<std::string> feature_names;  // empty when prefix-based
  std::string feature_prefix;              // empty when explicit list
  std::string attribute_of_interest;
  std::vector<std::string> additional_attributes;
  std::vector<std::string> sensitive_attributes;
  std::optional<std::string> id_column;

  Schema resolve(const std::vector<std::string>& header) const;
};

SchemaSpec load_schema_file(const std::string& path);
SchemaSpec parse_schema_json(const std::string& text);
void save_schema_file(const Schema& schema, const std::string& path);

}  // namespace anon::data
