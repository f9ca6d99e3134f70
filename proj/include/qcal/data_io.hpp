#pragma once

// Comma-separated files with a '#'-prefixed header block. Numbers are written
// with 17 significant digits so a write/read cycle is bit-exact.

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qcal/error.hpp"
#include "qcal/ramsey.hpp"
#include "qcal/units.hpp"

namespace qcal {

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

inline double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError(context + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(',', pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

/// Header key/value pairs plus numeric rows.
struct DelimitedTable {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table(const std::filesystem::path& path, const DelimitedTable& t,
                        const std::vector<std::string>& header_order = {}) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<std::string> keys = header_order;
  for (const auto& [k, v] : t.header)
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  for (const auto& k : keys)
    if (auto it = t.header.find(k); it != t.header.end()) out << "# " << k << ": " << it->second << '\n';
  for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << t.columns[j];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << fmt17(row[j]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

inline DelimitedTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  DelimitedTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      auto key = line.substr(1, colon - 1);
      auto val = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
      };
      trim(key);
      trim(val);
      t.header[key] = val;
      continue;
    }
    if (t.columns.empty()) {
      for (auto c : split_commas(line)) t.columns.emplace_back(c);
      continue;
    }
    const auto cells = split_commas(line);
    if (cells.size() != t.columns.size())
      throw IoError(ctx + ": expected " + std::to_string(t.columns.size()) + " columns, found " +
                    std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_double(c, ctx));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw IoError(path.string() + ": no column header");
  return t;
}

inline const std::string& header_value(const DelimitedTable& t, const std::string& key, const std::string& file) {
  auto it = t.header.find(key);
  if (it == t.header.end()) throw IoError(file + ": header is missing '" + key + "'");
  return it->second;
}

struct PopulationBounds {
  double min = -0.2;
  double max = 1.2;
  bool strict = false;  // reject out-of-range values instead of warning
};

/// Ramsey dataset on disk: header (experiment, n, dt, start, drive) and rows t_us,p0,p1,p2.
inline void write_data_file(const std::filesystem::path& path, const RamseyDataset& d) {
  DelimitedTable t;
  const auto& g = d.config.grid;
  t.header["format"] = "qcal-ramsey-1";
  t.header["experiment"] = std::to_string(static_cast<int>(d.config.experiment));
  t.header["n"] = std::to_string(g.n);
  t.header["dt_us"] = fmt17(g.step);
  t.header["start_us"] = fmt17(g.start);
  t.header["drive_ghz"] = fmt17(units::rad_per_us_to_ghz(d.config.drive));
  t.header["units"] = "time us, populations dimensionless";
  t.columns = {"t_us", "p0", "p1", "p2"};
  for (int i = 0; i < g.n; ++i)
    t.rows.push_back({g.at(i), d.populations[0](i), d.populations[1](i), d.populations[2](i)});
  write_table(path, t, {"format", "experiment", "n", "dt_us", "start_us", "drive_ghz", "units"});
}

/// Reads a dataset. The dark times in the rows are authoritative; they must
/// be strictly increasing and agree with the header grid.
inline RamseyDataset read_data_file(const std::filesystem::path& path, const PopulationBounds& bounds = {},
                                    std::vector<std::string>* warnings = nullptr) {
  const auto t = read_table(path);
  const std::string file = path.string();
  if (t.columns != std::vector<std::string>{"t_us", "p0", "p1", "p2"})
    throw IoError(file + ": expected columns t_us,p0,p1,p2");
  RamseyDataset d;
  const int exp_id = static_cast<int>(parse_double(header_value(t, "experiment", file), file));
  if (exp_id != 0 && exp_id != 1) throw IoError(file + ": experiment must be 0 or 1");
  d.config.experiment = static_cast<Transition>(exp_id);
  d.config.grid.n = static_cast<int>(parse_double(header_value(t, "n", file), file));
  d.config.grid.step = parse_double(header_value(t, "dt_us", file), file);
  d.config.grid.start = parse_double(header_value(t, "start_us", file), file);
  d.config.drive = units::ghz_to_rad_per_us(parse_double(header_value(t, "drive_ghz", file), file));
  if (static_cast<int>(t.rows.size()) != d.config.grid.n)
    throw IoError(file + ": header says n=" + std::to_string(d.config.grid.n) + " but found " +
                  std::to_string(t.rows.size()) + " rows");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  for (auto& p : d.populations) p.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    if (i > 0 && !(r[0] > t.rows[static_cast<std::size_t>(i - 1)][0]))
      throw IoError(file + ": dark times must be strictly increasing (row " + std::to_string(i + 1) + ")");
    const double expect = d.config.grid.at(static_cast<int>(i));
    if (std::abs(r[0] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw IoError(file + ": dark time at row " + std::to_string(i + 1) + " is off the header grid");
    for (int s = 0; s < 3; ++s) {
      const double v = r[static_cast<std::size_t>(s + 1)];
      if (!std::isfinite(v)) throw IoError(file + ": non-finite population at row " + std::to_string(i + 1));
      if (v < bounds.min || v > bounds.max) {
        const std::string msg = file + ": population p" + std::to_string(s) + "=" + fmt17(v) + " at row " +
                                std::to_string(i + 1) + " is outside [" + fmt17(bounds.min) + ", " +
                                fmt17(bounds.max) + "]";
        if (bounds.strict) throw IoError(msg);
        if (warnings) warnings->push_back(msg);
      }
      d.populations[static_cast<std::size_t>(s)](i) = v;
    }
  }
  return d;
}

}  // namespace qcal
