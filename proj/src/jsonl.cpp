#include "plottwist/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "plottwist/errors.hpp"

namespace plottwist::jsonl {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<json> read(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        rows.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = end + 1;
  }
  return rows;
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string pretty(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

void write(const fs::path& path, const std::vector<json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += dump(row);
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace plottwist::jsonl
