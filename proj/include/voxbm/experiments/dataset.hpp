/*
 * Copyright 2026 The voxbm Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Tabular ingestion and cleaning. The raw table keeps numeric and categorical
// columns apart; missing or unparsable numeric cells are NaN until clean()
// drops their rows.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"

namespace voxbm::experiments {

/// The 22 acoustic feature columns of the UCI Parkinson's voice table.
inline const std::vector<std::string>& uci_feature_columns() {
  static const std::vector<std::string> v = {
      "MDVP:Fo(Hz)",   "MDVP:Fhi(Hz)",    "MDVP:Flo(Hz)",  "MDVP:Jitter(%)", "MDVP:Jitter(Abs)", "MDVP:RAP",
      "MDVP:PPQ",      "Jitter:DDP",      "MDVP:Shimmer",  "MDVP:Shimmer(dB)", "Shimmer:APQ3",   "Shimmer:APQ5",
      "MDVP:APQ",      "Shimmer:DDA",     "NHR",           "HNR",            "RPDE",             "DFA",
      "spread1",       "spread2",         "D2",            "PPE"};
  return v;
}

struct IngestOptions {
  std::string label_column = "status";
  std::vector<std::string> id_columns = {"name", "subject_id"};
  std::vector<std::string> categorical_columns = {"task_code", "sex"};
};

struct RawTable {
  std::vector<std::string> numeric_columns;
  std::vector<std::string> categorical_columns;
  std::vector<std::vector<double>> numeric;  // NaN marks a missing or unparsable cell
  std::vector<std::vector<std::string>> categorical;
  std::vector<int> labels;  // -1 when the label cell is not 0 or 1
  std::vector<std::string> subject_ids;
  std::vector<std::size_t> source_rows;  // 1-based data row in the input file

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  RawTable empty_like() const {
    RawTable t;
    t.numeric_columns = numeric_columns;
    t.categorical_columns = categorical_columns;
    return t;
  }

  void push_from(const RawTable& other, std::size_t i) {
    numeric.push_back(other.numeric[i]);
    categorical.push_back(other.categorical[i]);
    labels.push_back(other.labels[i]);
    subject_ids.push_back(other.subject_ids[i]);
    source_rows.push_back(other.source_rows[i]);
  }

  RawTable select(const std::vector<std::size_t>& idx) const {
    RawTable t = empty_like();
    for (std::size_t i : idx) t.push_from(*this, i);
    return t;
  }

  std::size_t count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }
};

/// "phon_R01_S01_3" -> "phon_R01_S01": the trailing "_<digits>" recording
/// index is removed. Names without one are returned unchanged.
inline std::string subject_from_name(const std::string& name) {
  const auto pos = name.find_last_of('_');
  if (pos == std::string::npos || pos + 1 == name.size()) return name;
  const bool digits = std::all_of(name.begin() + static_cast<std::ptrdiff_t>(pos) + 1, name.end(),
                                  [](unsigned char c) { return std::isdigit(c) != 0; });
  return digits ? name.substr(0, pos) : name;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return std::isspace(c) == 0; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
  std::vector<std::string> out;
  for (const auto& field : tok) out.push_back(trim(field));
  return out;
}

inline double parse_number(const std::string& cell) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

}  // namespace detail

/// Parses a comma-separated table with a header row. Columns other than the
/// label, id and categorical ones are numeric features.
inline RawTable ingest_csv(std::istream& in, const IngestOptions& opt = {}) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!detail::trim(line).empty()) {
      header = detail::split_csv_line(line);
      break;
    }
  }
  require(!header.empty(), ErrorCode::kSchemaError, "input has no header row");
  const auto find = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const std::ptrdiff_t label_col = find(opt.label_column);
  require(label_col >= 0, ErrorCode::kSchemaError, "no '" + opt.label_column + "' column");
  std::ptrdiff_t id_col = -1;
  for (const auto& name : opt.id_columns) {
    if ((id_col = find(name)) >= 0) break;
  }
  const bool id_is_name = id_col >= 0 && header[static_cast<std::size_t>(id_col)] == "name";

  RawTable t;
  std::vector<std::size_t> numeric_idx;
  std::vector<std::size_t> categorical_idx;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    require(seen.insert(header[c]).second, ErrorCode::kSchemaError, "duplicate column '" + header[c] + "'");
    if (static_cast<std::ptrdiff_t>(c) == label_col || static_cast<std::ptrdiff_t>(c) == id_col) continue;
    const bool cat = std::find(opt.categorical_columns.begin(), opt.categorical_columns.end(), header[c]) !=
                     opt.categorical_columns.end();
    (cat ? t.categorical_columns : t.numeric_columns).push_back(header[c]);
    (cat ? categorical_idx : numeric_idx).push_back(c);
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    ++row;
    auto cells = detail::split_csv_line(line);
    cells.resize(header.size());  // short rows read as missing cells
    std::vector<double> nums;
    for (std::size_t c : numeric_idx) nums.push_back(detail::parse_number(cells[c]));
    std::vector<std::string> cats;
    for (std::size_t c : categorical_idx) cats.push_back(cells[c]);
    const double label = detail::parse_number(cells[static_cast<std::size_t>(label_col)]);
    t.numeric.push_back(std::move(nums));
    t.categorical.push_back(std::move(cats));
    t.labels.push_back(label == 0.0 ? 0 : label == 1.0 ? 1 : -1);
    std::string subject;
    if (id_col >= 0) {
      subject = cells[static_cast<std::size_t>(id_col)];
      if (id_is_name) subject = subject_from_name(subject);
    }
    t.subject_ids.push_back(std::move(subject));
    t.source_rows.push_back(row);
  }
  return t;
}

inline RawTable ingest_csv_file(const std::string& path, const IngestOptions& opt = {}) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kStorageError, "cannot open '" + path + "'");
  return ingest_csv(in, opt);
}

inline RawTable ingest_csv_text(const std::string& text, const IngestOptions& opt = {}) {
  std::istringstream in(text);
  return ingest_csv(in, opt);
}

// ---------------------------------------------------------------------------
// Cleaning

inline constexpr double kWinsorLowPct = 0.1;
inline constexpr double kWinsorHighPct = 99.9;

struct DroppedRow {
  std::size_t source_row = 0;
  std::string reason;
};

struct ClippedCell {
  std::size_t source_row = 0;
  std::string column;
  double original = 0.0;
  double clipped = 0.0;
};

struct CleanReport {
  std::vector<DroppedRow> dropped;
  std::vector<ClippedCell> clipped;

  std::size_t size() const { return dropped.size() + clipped.size(); }
  bool empty() const { return size() == 0; }
};

struct CleanResult {
  RawTable table;
  CleanReport report;
};

/// Drops rows with a missing or non-numeric feature, an empty categorical
/// cell, or a label other than 0/1, then winsorizes every numeric column at
/// its nearest-rank 0.1 and 99.9 percentiles.
inline CleanResult clean(const RawTable& raw) {
  CleanResult out{raw.empty_like(), {}};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string reason;
    for (std::size_t c = 0; c < raw.numeric_columns.size() && reason.empty(); ++c) {
      if (std::isnan(raw.numeric[i][c])) reason = "non_numeric:" + raw.numeric_columns[c];
    }
    for (std::size_t c = 0; c < raw.categorical_columns.size() && reason.empty(); ++c) {
      if (raw.categorical[i][c].empty()) reason = "missing:" + raw.categorical_columns[c];
    }
    if (reason.empty() && raw.labels[i] < 0) reason = "bad_label";
    if (reason.empty()) {
      out.table.push_from(raw, i);
    } else {
      out.report.dropped.push_back({raw.source_rows[i], reason});
    }
  }
  require(!out.table.empty(), ErrorCode::kEmptyAfterClean, "every row was dropped during cleaning");

  auto& t = out.table;
  for (std::size_t c = 0; c < t.numeric_columns.size(); ++c) {
    std::vector<double> col;
    for (const auto& r : t.numeric) col.push_back(r[c]);
    const double lo = stats::percentile_nearest_rank(col, kWinsorLowPct);
    const double hi = stats::percentile_nearest_rank(col, kWinsorHighPct);
    for (std::size_t i = 0; i < t.size(); ++i) {
      double& v = t.numeric[i][c];
      const double w = std::clamp(v, lo, hi);
      if (w != v) {
        out.report.clipped.push_back({t.source_rows[i], t.numeric_columns[c], v, w});
        v = w;
      }
    }
  }
  return out;
}

inline nlohmann::json clean_report_json(const CleanReport& r) {
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& d : r.dropped) dropped.push_back({{"row", d.source_row}, {"reason", d.reason}});
  nlohmann::json clipped = nlohmann::json::array();
  for (const auto& c : r.clipped) {
    clipped.push_back({{"row", c.source_row}, {"column", c.column}, {"original", c.original}, {"clipped", c.clipped}});
  }
  return {{"dropped_rows", dropped}, {"clipped_cells", clipped}};
}

}  // namespace voxbm::experiments
