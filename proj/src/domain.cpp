#include "plottwist/domain.hpp"

#include <cmath>

#include "plottwist/errors.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist {

namespace {

struct AspectNames {
  std::string_view field;
  std::string_view display;
};

constexpr PerAspect<AspectNames> kAspectNames = {{
    {"Character_Development", "Character Development"},
    {"Tone_Consistency", "Tone Consistency"},
    {"Pacing", "Pacing"},
    {"Narrative_Coherence", "Narrative Coherence"},
    {"Emotions_Turning_Points", "Emotional Turning Points"},
}};

bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one code point at `i`, advancing it. Malformed sequences decode to
// U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

}  // namespace

std::string_view field_name(Aspect a) { return kAspectNames[index_of(a)].field; }
std::string_view display_name(Aspect a) { return kAspectNames[index_of(a)].display; }

std::optional<Aspect> aspect_from_field(std::string_view field) {
  for (Aspect a : kAllAspects)
    if (field_name(a) == field) return a;
  return std::nullopt;
}

std::string_view to_string(SourceLabel label) {
  switch (label) {
    case SourceLabel::Original: return "Original";
    case SourceLabel::Generated: return "Generated";
    case SourceLabel::GSAT: return "GSAT";
    case SourceLabel::Razzie: return "Razzie";
    case SourceLabel::Candidate: return "Candidate";
  }
  return "Original";
}

SourceLabel source_label_from_string(std::string_view s) {
  for (auto label : {SourceLabel::Original, SourceLabel::Generated, SourceLabel::GSAT,
                     SourceLabel::Razzie, SourceLabel::Candidate})
    if (to_string(label) == s) return label;
  throw LoadError("unknown source_label '" + std::string(s) + "'");
}

std::size_t count_words(std::string_view utf8) {
  std::size_t words = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < utf8.size();) {
    const bool space = is_unicode_space(next_code_point(utf8, i));
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

PlotRecord PlotRecord::make(std::string id, std::string text, SourceLabel label) {
  PlotRecord p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.word_count = count_words(p.text);
  p.source_label = label;
  return p;
}

PlotRecord plot_from_json(const json& j) {
  if (!j.is_object()) throw LoadError("plot record must be a JSON object");
  auto require_string = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw LoadError(std::string("plot record missing string key '") + key + "'");
    return it->get<std::string>();
  };

  PlotRecord p;
  p.id = require_string("id");
  p.text = require_string("text");
  p.word_count = count_words(p.text);
  try {
    p.source_label = source_label_from_string(require_string("source_label"));
  } catch (const LoadError& e) {
    throw LoadError("record " + p.id + ": " + e.what());
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "id" || key == "text" || key == "source_label") continue;
    if (key == "word_count") {
      if (!v.is_number_integer() || v.get<long long>() < 0 ||
          static_cast<std::size_t>(v.get<long long>()) != p.word_count)
        throw LoadError("record " + p.id + ": word_count " + v.dump() +
                        " does not match text (" + std::to_string(p.word_count) + " words)");
    } else if (key == "external_rating") {
      if (v.is_null()) continue;
      if (!v.is_number()) throw LoadError("record " + p.id + ": external_rating must be a number");
      const double r = v.get<double>();
      if (!std::isfinite(r) || r < 0.0 || r > 10.0)
        throw LoadError("record " + p.id + ": external_rating " + v.dump() + " outside [0,10]");
      p.external_rating = r;
    } else if (key == "generator_id") {
      if (v.is_null()) continue;
      if (!v.is_string()) throw LoadError("record " + p.id + ": generator_id must be a string");
      p.generator_id = v.get<std::string>();
    } else if (key == "source_plot_id") {
      if (v.is_null()) continue;
      if (!v.is_string()) throw LoadError("record " + p.id + ": source_plot_id must be a string");
      p.source_plot_id = v.get<std::string>();
    } else {
      p.extra[key] = v;
    }
  }
  return p;
}

json to_json(const PlotRecord& p) {
  json j;
  j["id"] = p.id;
  j["text"] = p.text;
  j["word_count"] = p.word_count;
  j["source_label"] = to_string(p.source_label);
  if (p.external_rating) j["external_rating"] = *p.external_rating;
  if (p.generator_id) j["generator_id"] = *p.generator_id;
  if (p.source_plot_id) j["source_plot_id"] = *p.source_plot_id;
  for (auto it = p.extra.begin(); it != p.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::vector<PlotRecord> load_corpus(const std::filesystem::path& path) {
  std::vector<PlotRecord> out;
  std::size_t n = 0;
  for (const auto& row : jsonl::read(path)) {
    ++n;
    try {
      out.push_back(plot_from_json(row));
    } catch (const LoadError& e) {
      throw LoadError(path.string() + " record #" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::filesystem::path& path, std::span<const PlotRecord> records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  jsonl::write(path, rows);
}

std::vector<PlotRecord> filter_by_length(std::span<const PlotRecord> records,
                                         std::size_t max_words) {
  if (max_words == 0) throw DomainError("max_words must be >= 1");
  std::vector<PlotRecord> out;
  for (const auto& r : records)
    if (r.word_count <= max_words) out.push_back(r);
  return out;
}

std::string_view to_string(QualityStratum s) {
  switch (s) {
    case QualityStratum::Excellent: return "Excellent";
    case QualityStratum::Good: return "Good";
    case QualityStratum::Mid: return "Mid";
    case QualityStratum::Low: return "Low";
  }
  return "Low";
}

QualityStratum stratify(double rating) {
  if (!std::isfinite(rating) || rating < 0.0 || rating > 10.0)
    throw DomainError("rating " + std::to_string(rating) + " outside [0,10]");
  if (rating > 8.0) return QualityStratum::Excellent;
  if (rating > 7.0) return QualityStratum::Good;
  if (rating > 6.0) return QualityStratum::Mid;
  return QualityStratum::Low;
}

Premise premise_from_json(const json& j) {
  if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["id"].is_string() ||
      !j["text"].is_string())
    throw LoadError("premise must be an object with string 'id' and 'text'");
  Premise p{j["id"].get<std::string>(), j["text"].get<std::string>(), std::nullopt};
  if (p.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw LoadError("premise " + p.id + " has empty text");
  if (auto it = j.find("source_plot_id"); it != j.end() && it->is_string())
    p.source_plot_id = it->get<std::string>();
  return p;
}

json to_json(const Premise& p) {
  json j;
  j["id"] = p.id;
  j["text"] = p.text;
  if (p.source_plot_id) j["source_plot_id"] = *p.source_plot_id;
  return j;
}

std::vector<Premise> load_premises(const std::filesystem::path& path) {
  std::vector<Premise> out;
  for (const auto& row : jsonl::read(path)) out.push_back(premise_from_json(row));
  return out;
}

void save_premises(const std::filesystem::path& path, std::span<const Premise> premises) {
  std::vector<json> rows;
  for (const auto& p : premises) rows.push_back(to_json(p));
  jsonl::write(path, rows);
}

}  // namespace plottwist
