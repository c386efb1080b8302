// Validates a JSON document (or JSON-lines stream with --lines) against the
// subset of JSON Schema the checked-in schemas use: type, properties,
// required, items. Exits 1 on the first violation.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

bool type_matches(const json& node, const std::string& type) {
  if (type == "object") return node.is_object();
  if (type == "array") return node.is_array();
  if (type == "string") return node.is_string();
  if (type == "boolean") return node.is_boolean();
  if (type == "integer") return node.is_number_integer() || node.is_number_unsigned();
  if (type == "number") return node.is_number();
  return false;
}

void validate(const json& node, const json& schema, const std::string& where) {
  if (schema.contains("type")) {
    const auto type = schema.at("type").get<std::string>();
    if (!type_matches(node, type))
      throw std::runtime_error(where + ": expected " + type + ", got " + node.dump());
  }
  if (schema.contains("required"))
    for (const auto& key : schema.at("required"))
      if (!node.contains(key.get<std::string>()))
        throw std::runtime_error(where + ": missing required key '" +
                                 key.get<std::string>() + "'");
  if (schema.contains("properties") && node.is_object())
    for (const auto& [key, sub] : schema.at("properties").items())
      if (node.contains(key)) validate(node.at(key), sub, where + "." + key);
  if (schema.contains("items") && node.is_array()) {
    std::size_t i = 0;
    for (const auto& element : node)
      validate(element, schema.at("items"), where + "[" + std::to_string(i++) + "]");
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool lines = false;
  std::string schema_path, doc_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--lines")
      lines = true;
    else if (schema_path.empty())
      schema_path = arg;
    else
      doc_path = arg;
  }
  if (schema_path.empty() || doc_path.empty()) {
    std::cerr << "usage: schema_check [--lines] <schema.json> <document.json>\n";
    return 1;
  }
  try {
    std::ifstream schema_in(schema_path);
    if (!schema_in) throw std::runtime_error("cannot read " + schema_path);
    const json schema = json::parse(schema_in);
    std::ifstream doc_in(doc_path);
    if (!doc_in) throw std::runtime_error("cannot read " + doc_path);
    if (lines) {
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(doc_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        validate(json::parse(line), schema, "line " + std::to_string(line_no));
      }
    } else {
      validate(json::parse(doc_in), schema, "$");
    }
  } catch (const std::exception& e) {
    std::cerr << "schema_check: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
