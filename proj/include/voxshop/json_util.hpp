#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace voxshop::json_util {

// Typed accessors that throw Error(kSchema) naming the offending path,
// e.g. "$[3].price_minor: expected integer".

[[noreturn]] void schema_error(const std::string& path, std::string_view what);

const nlohmann::json& require_object(const nlohmann::json& j, const std::string& path);
const nlohmann::json& require_array(const nlohmann::json& j, const std::string& path);

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path);
const nlohmann::json* optional_field(const nlohmann::json& obj, const char* key);

std::string get_string(const nlohmann::json& obj, const char* key, const std::string& path);
std::optional<std::string> get_optional_string(const nlohmann::json& obj, const char* key,
                                               const std::string& path);
std::int64_t get_integer(const nlohmann::json& obj, const char* key, const std::string& path);
std::optional<std::int64_t> get_optional_integer(const nlohmann::json& obj, const char* key,
                                                 const std::string& path);
bool get_bool(const nlohmann::json& obj, const char* key, const std::string& path);
std::optional<double> get_optional_number(const nlohmann::json& obj, const char* key,
                                          const std::string& path);

/// Parses a JSON document, mapping syntax errors to kSchema.
nlohmann::json parse(std::string_view text, const std::string& what);
nlohmann::json parse_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace voxshop::json_util
