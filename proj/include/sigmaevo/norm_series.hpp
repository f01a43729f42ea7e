#pragma once

// Time series of named norms, with RFC-4180 CSV persistence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sigmaevo/core.hpp"

namespace sigmaevo {

class NormSeries {
 public:
  NormSeries() = default;
  explicit NormSeries(std::vector<std::string> names)
      : names_(std::move(names)), columns_(names_.size()) {}

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  bool has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  const std::vector<double>& column(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw MissingColumn(name);
    return columns_[static_cast<std::size_t>(it - names_.begin())];
  }

  void append(double t, const std::vector<double>& row) {
    if (row.size() != names_.size()) throw InvalidParameters("series: row width does not match columns");
    if (!times_.empty() && !(t > times_.back()))
      throw InvalidParameters("series: times must be strictly increasing");
    times_.push_back(t);
    for (std::size_t c = 0; c < row.size(); ++c) columns_[c].push_back(row[c]);
  }

  /// Set when a run stopped early because the state became non-finite.
  bool truncated = false;
  double truncated_at = std::numeric_limits<double>::quiet_NaN();

  /// Every value multiplied by `factor` (times unchanged).
  NormSeries scaled(double factor) const {
    NormSeries out = *this;
    for (auto& col : out.columns_)
      for (double& v : col) v *= factor;
    return out;
  }

  std::string to_csv() const {
    std::string out = "t";
    for (const auto& n : names_) out += "," + csv_field(n);
    out += "\r\n";
    char buf[64];
    for (std::size_t i = 0; i < times_.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", times_[i]);
      out += buf;
      for (const auto& col : columns_) {
        std::snprintf(buf, sizeof buf, ",%.17g", col[i]);
        out += buf;
      }
      out += "\r\n";
    }
    return out;
  }

  static NormSeries from_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "t")
      throw InvalidParameters("series csv: first header field must be t");
    NormSeries out(std::vector<std::string>(rows.front().begin() + 1, rows.front().end()));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() == 1 && row[0].empty()) continue;
      if (row.size() != out.names_.size() + 1)
        throw InvalidParameters("series csv: row " + std::to_string(r + 1) + " has wrong field count");
      std::vector<double> vals(row.size() - 1);
      for (std::size_t c = 1; c < row.size(); ++c) vals[c - 1] = parse_number(row[c], r + 1);
      out.append(parse_number(row[0], r + 1), vals);
    }
    return out;
  }

 private:
  static std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  }

  static double parse_number(const std::string& s, std::size_t line) {
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v = 0.0;
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (!(in >> v)) throw InvalidParameters("series csv: bad number '" + s + "' on line " + std::to_string(line));
    return v;
  }

  static std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char ch = text[i];
      if (quoted) {
        if (ch == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += ch;
        }
        continue;
      }
      if (ch == '"') {
        quoted = true;
        any = true;
      } else if (ch == ',') {
        row.push_back(std::move(field));
        field.clear();
        any = true;
      } else if (ch == '\r' || ch == '\n') {
        if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
      } else {
        field += ch;
        any = true;
      }
    }
    if (any || !field.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

}  // namespace sigmaevo
