#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace plottwist::jsonl {

using json = nlohmann::ordered_json;

/// Reads every non-blank line as a JSON value. Parse failures raise LoadError
/// naming the file and line number.
std::vector<json> read(const std::filesystem::path& path);

/// Writes one compact JSON value per line, '\n' terminated. Creates parent
/// directories. Output is byte-stable for equal inputs.
void write(const std::filesystem::path& path, const std::vector<json>& rows);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Compact dump with replacement of invalid UTF-8.
std::string dump(const json& j);
/// Indented dump used for manifests and reports.
std::string pretty(const json& j);

}  // namespace plottwist::jsonl
