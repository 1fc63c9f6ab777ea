#include "voxshop/json_util.hpp"

#include <fstream>
#include <sstream>

#include "voxshop/error.hpp"

namespace voxshop::json_util {

using nlohmann::json;

void schema_error(const std::string& path, std::string_view what) {
  throw Error(ErrorCode::kSchema, path + ": " + std::string(what));
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected object");
  return j;
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected array");
  return j;
}

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const json& obj, const char* key,
                                               const std::string& path) {
  const json* v = optional_field(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) schema_error(path + "." + key, "expected string");
  return v->get<std::string>();
}

std::int64_t get_integer(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) schema_error(path + "." + key, "expected integer");
  return v.get<std::int64_t>();
}

std::optional<std::int64_t> get_optional_integer(const json& obj, const char* key,
                                                 const std::string& path) {
  const json* v = optional_field(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_number_integer()) schema_error(path + "." + key, "expected integer");
  return v->get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_boolean()) schema_error(path + "." + key, "expected boolean");
  return v.get<bool>();
}

std::optional<double> get_optional_number(const json& obj, const char* key, const std::string& path) {
  const json* v = optional_field(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_number()) schema_error(path + "." + key, "expected number");
  return v->get<double>();
}

json parse(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, what + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

}  // namespace voxshop::json_util
