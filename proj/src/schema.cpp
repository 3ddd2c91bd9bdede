#include "anon/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "anon/error.hpp"

namespace anon::data {

using nlohmann::json;

std::vector<std::string> Schema::all_attributes() const {
  std::vector<std::string> names;
  names.push_back(attribute_of_interest);
  names.insert(names.end(), additional_attributes.begin(), additional_attributes.end());
  names.insert(names.end(), sensitive_attributes.begin(), sensitive_attributes.end());
  return names;
}

bool Schema::has_attribute(const std::string& name) const {
  for (const auto& attr : all_attributes()) {
    if (attr == name) return true;
  }
  return false;
}

void Schema::validate() const {
  if (attribute_of_interest.empty()) {
    throw_config("InvalidSchema", "attribute_of_interest must be nonempty");
  }
  if (feature_names.empty()) {
    throw_config("InvalidSchema", "schema needs at least one feature");
  }
  std::set<std::string> seen;
  auto insert_unique = [&](const std::string& name, const char* group) {
    if (name.empty()) throw_config("InvalidSchema", std::string("empty name in ") + group);
    if (!seen.insert(name).second) {
      throw_config("InvalidSchema", "column name used twice across roles: '" + name + "'");
    }
  };
  for (const auto& f : feature_names) insert_unique(f, "features");
  insert_unique(attribute_of_interest, "attribute_of_interest");
  for (const auto& a : additional_attributes) insert_unique(a, "additional_attributes");
  for (const auto& s : sensitive_attributes) insert_unique(s, "sensitive_attributes");
  if (id_column) insert_unique(*id_column, "id_column");
}

Schema SchemaSpec::resolve(const std::vector<std::string>& header) const {
  Schema schema;
  if (!feature_prefix.empty()) {
    for (const auto& col : header) {
      if (col.rfind(feature_prefix, 0) == 0) schema.feature_names.push_back(col);
    }
    if (schema.feature_names.empty()) {
      throw_data("MissingColumn",
                 "no header column starts with feature prefix '" + feature_prefix + "'");
    }
  } else {
    schema.feature_names = feature_names;
  }
  schema.attribute_of_interest = attribute_of_interest;
  schema.additional_attributes = additional_attributes;
  schema.sensitive_attributes = sensitive_attributes;
  schema.id_column = id_column;
  schema.validate();
  return schema;
}

namespace {

std::vector<std::string> string_array(const json& j, const std::string& key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) {
    throw_config("InvalidConfig", "schema field '" + key + "' must be an array of names");
  }
  for (const auto& item : j.at(key)) out.push_back(item.get<std::string>());
  return out;
}

}  // namespace

SchemaSpec parse_schema_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_config("InvalidConfig", std::string("schema JSON parse failure: ") + e.what());
  }

  SchemaSpec spec;
  if (!j.contains("features")) throw_config("InvalidConfig", "schema field 'features' is required");
  const auto& features = j.at("features");
  if (features.is_array()) {
    for (const auto& item : features) spec.feature_names.push_back(item.get<std::string>());
  } else if (features.is_object() && features.contains("prefix")) {
    spec.feature_prefix = features.at("prefix").get<std::string>();
    if (spec.feature_prefix.empty()) {
      throw_config("InvalidConfig", "schema field 'features.prefix' must be nonempty");
    }
  } else {
    throw_config("InvalidConfig", "schema field 'features' must be an array or {\"prefix\": ...}");
  }
  if (!j.contains("attribute_of_interest")) {
    throw_config("InvalidConfig", "schema field 'attribute_of_interest' is required");
  }
  spec.attribute_of_interest = j.at("attribute_of_interest").get<std::string>();
  spec.additional_attributes = string_array(j, "additional_attributes");
  spec.sensitive_attributes = string_array(j, "sensitive_attributes");
  if (j.contains("id_column") && !j.at("id_column").is_null()) {
    spec.id_column = j.at("id_column").get<std::string>();
  }
  return spec;
}

SchemaSpec load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("IoError", "cannot open schema file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_schema_json(buffer.str());
}

void save_schema_file(const Schema& schema, const std::string& path) {
  json j;
  j["features"] = schema.feature_names;
  j["attribute_of_interest"] = schema.attribute_of_interest;
  j["additional_attributes"] = schema.additional_attributes;
  j["sensitive_attributes"] = schema.sensitive_attributes;
  if (schema.id_column) {
    j["id_column"] = *schema.id_column;
  } else {
    j["id_column"] = nullptr;
  }
  std::ofstream out(path);
  if (!out) throw_data("IoError", "cannot write schema file '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace anon::data
