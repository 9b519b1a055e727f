#include "plottwist/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace plottwist::report {

std::string mean_sd(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", mean, sd);
  return buf;
}

std::string number(const json& value, int digits) {
  if (value.is_null()) return "-";
  const double v = value.get<double>();
  char buf[64];
  // Tiny p-values would print as zero in fixed notation.
  if (v != 0.0 && std::abs(v) < std::pow(10.0, -digits))
    std::snprintf(buf, sizeof buf, "%.2e", v);
  else
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace {

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::to_text() const {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], display_width(row[i]));
  };
  widen(header);
  for (const auto& r : rows) widen(r);

  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < row.size() ? row[i] : "";
      const std::string pad(width[i] - display_width(cell), ' ');
      if (i > 0) out += "  ";
      out += i == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };

  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string Table::to_csv() const {
  auto line = [](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

Table summary_table(std::span<const judge::SummaryRow> rows) {
  Table t;
  t.header = {"model", "n"};
  for (Aspect a : kAllAspects) t.header.emplace_back(display_name(a));
  t.header.emplace_back("Overall");
  for (const auto& r : rows) {
    std::vector<std::string> row{r.label, std::to_string(r.n)};
    for (Aspect a : kAllAspects) row.push_back(mean_sd(r.mean[index_of(a)], r.sd[index_of(a)]));
    row.push_back(mean_sd(r.overall_mean, r.overall_sd));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table summary_csv_table(std::span<const judge::SummaryRow> rows) {
  Table t;
  t.header = {"model", "n"};
  for (Aspect a : kAllAspects) {
    t.header.push_back(std::string(field_name(a)) + "_mean");
    t.header.push_back(std::string(field_name(a)) + "_sd");
  }
  t.header.insert(t.header.end(), {"overall_mean", "overall_sd"});
  auto fixed = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    std::vector<std::string> row{r.label, std::to_string(r.n)};
    for (Aspect a : kAllAspects) {
      row.push_back(fixed(r.mean[index_of(a)]));
      row.push_back(fixed(r.sd[index_of(a)]));
    }
    row.push_back(fixed(r.overall_mean));
    row.push_back(fixed(r.overall_sd));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string ci_cell(const json& c) {
  if (c.at("ci_low").is_null()) return "-";
  return "[" + number(c["ci_low"]) + ", " + number(c["ci_high"]) + "]";
}

}  // namespace

Table validation_table(const json& report) {
  Table t;
  t.header = {"comparison", "n_major", "n_minor", "mean_major", "mean_minor", "mean_diff", "95% CI",
              "cohens_d", "t", "dof", "p", "consistency"};
  for (auto it = report.at("comparisons").begin(); it != report.at("comparisons").end(); ++it) {
    const json& c = it.value();
    t.rows.push_back({it.key(), std::to_string(c.at("n_a").get<std::size_t>()),
                      std::to_string(c.at("n_b").get<std::size_t>()), number(c["mean_a"]),
                      number(c["mean_b"]), number(c["mean_diff"]), ci_cell(c), number(c["cohens_d"]),
                      number(c["t_stat"]), number(c["dof"]), number(c["p_value"]),
                      number(c["directional_consistency"])});
  }
  return t;
}

Table stratified_table(const json& reports) {
  Table t;
  t.header = {"stratum", "aspect", "n", "mean_orig", "mean_gen", "mean_diff", "95% CI", "d_paired",
              "t", "p", "dominance"};
  for (const json& r : reports) {
    const std::string stratum = r.at("stratum").get<std::string>();
    const std::string n = std::to_string(r.at("n").get<std::size_t>());
    if (r["n"].get<std::size_t>() == 0) {
      t.rows.push_back({stratum, "(empty)", "0", "-", "-", "-", "-", "-", "-", "-", "-"});
      continue;
    }
    auto add = [&](const std::string& name, const json& c) {
      t.rows.push_back({stratum, name, n, number(c["mean_b"]), number(c["mean_a"]), number(c["mean_diff"]),
                        ci_cell(c), number(c["cohens_d"]), number(c["t_stat"]), number(c["p_value"]),
                        number(c["dominance"])});
    };
    for (auto it = r.at("aspects").begin(); it != r["aspects"].end(); ++it) add(it.key(), it.value());
    add("overall", r.at("overall"));
  }
  return t;
}

}  // namespace plottwist::report
