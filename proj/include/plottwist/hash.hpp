#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace plottwist {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 over a sequence of fields, each length-prefixed so that field
/// boundaries cannot be shifted to produce a collision.
std::string sha256_fields(std::initializer_list<std::string_view> fields);

/// SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace plottwist
