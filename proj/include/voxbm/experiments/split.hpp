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

// Train/validation/test partitioning. Partition sizes use largest-remainder
// rounding so they always add up to the number of units being split.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "voxbm/core/error.hpp"

namespace voxbm::experiments {

enum class SplitMode { kStratifiedRandom, kSubjectWise };

inline std::string split_mode_name(SplitMode m) {
  return m == SplitMode::kSubjectWise ? "subject_wise" : "stratified_random";
}

inline SplitMode parse_split_mode(const std::string& s) {
  if (s == "stratified_random") return SplitMode::kStratifiedRandom;
  if (s == "subject_wise") return SplitMode::kSubjectWise;
  fail(ErrorCode::kBadConfig, "unknown split mode '" + s + "'");
}

/// Row indices per partition. Two ratios give train/test with an empty
/// validation set; three give train/val/test.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

inline void validate_ratios(const std::vector<double>& ratios) {
  require(ratios.size() == 2 || ratios.size() == 3, ErrorCode::kInvalidArgument, "split needs 2 or 3 ratios");
  double sum = 0.0;
  for (double r : ratios) {
    require(r >= 0.0 && std::isfinite(r), ErrorCode::kInvalidArgument, "split ratios must be non-negative");
    sum += r;
  }
  require(std::abs(sum - 1.0) < 1e-9, ErrorCode::kInvalidArgument, "split ratios must sum to 1");
}

/// Hamilton apportionment of n units; ties go to the earlier partition.
inline std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<double>& ratios) {
  std::vector<std::size_t> counts(ratios.size());
  std::vector<double> rem(ratios.size());
  std::size_t used = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const double quota = ratios[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    rem[k] = quota - static_cast<double>(counts[k]);
    used += counts[k];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++counts[order[i % order.size()]];
  return counts;
}

namespace detail {

inline SplitIndices assign(const std::vector<std::vector<std::size_t>>& parts, std::size_t nparts) {
  SplitIndices s;
  std::vector<std::size_t>* dest[3] = {&s.train, nparts == 3 ? &s.val : &s.test, &s.test};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    dest[k]->insert(dest[k]->end(), parts[k].begin(), parts[k].end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace detail

/// Each class is shuffled and apportioned separately, so every partition
/// holds each class in proportion up to one row.
inline SplitIndices split_stratified(const std::vector<int>& labels, const std::vector<double>& ratios,
                                     std::uint64_t seed) {
  validate_ratios(ratios);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> parts(ratios.size());
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto counts = largest_remainder(idx.size(), ratios);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      parts[k].insert(parts[k].end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                      idx.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  }
  return detail::assign(parts, ratios.size());
}

/// Subjects (not rows) are apportioned. Rows without a subject id count as
/// their own subject. Subjects are ordered so that each class is spread
/// evenly along the sequence before it is cut, which keeps the class mix of
/// every partition close to the overall one.
inline SplitIndices split_subject_wise(const std::vector<int>& labels, const std::vector<std::string>& subjects,
                                       const std::vector<double>& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  std::map<std::string, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string key = subjects[i].empty() ? "\x01row" + std::to_string(i) : subjects[i];
    rows[key].push_back(i);
  }
  require(rows.size() >= 2, ErrorCode::kSplitImpossible, "subject-wise split needs at least two subjects");

  std::vector<std::vector<std::string>> by_class(2);
  for (const auto& [subject, idx] : rows) {
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += labels[i] == 1 ? 1 : 0;
    by_class[2 * pos >= idx.size() ? 1 : 0].push_back(subject);
  }
  std::mt19937_64 rng(seed);
  struct Keyed {
    double key;
    int cls;
    std::string subject;
  };
  std::vector<Keyed> order;
  for (int cls : {0, 1}) {
    auto& list = by_class[static_cast<std::size_t>(cls)];
    std::shuffle(list.begin(), list.end(), rng);
    for (std::size_t r = 0; r < list.size(); ++r) {
      order.push_back({(static_cast<double>(r) + 0.5) / static_cast<double>(list.size()), cls, list[r]});
    }
  }
  std::sort(order.begin(), order.end(),
            [](const Keyed& a, const Keyed& b) { return a.key != b.key ? a.key < b.key : a.cls < b.cls; });

  const auto counts = largest_remainder(order.size(), ratios);
  std::vector<std::vector<std::size_t>> parts(ratios.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t s = 0; s < counts[k]; ++s, ++pos) {
      const auto& idx = rows.at(order[pos].subject);
      parts[k].insert(parts[k].end(), idx.begin(), idx.end());
    }
  }
  return detail::assign(parts, ratios.size());
}

inline SplitIndices split_indices(SplitMode mode, const std::vector<int>& labels,
                                  const std::vector<std::string>& subjects, const std::vector<double>& ratios,
                                  std::uint64_t seed) {
  return mode == SplitMode::kSubjectWise ? split_subject_wise(labels, subjects, ratios, seed)
                                         : split_stratified(labels, ratios, seed);
}

/// Partitioned copies of any table type with select() and labels/subject_ids.
template <typename Table>
struct Partitions {
  Table train;
  Table val;
  Table test;
};

template <typename Table>
Partitions<Table> split(const Table& t, SplitMode mode, const std::vector<double>& ratios, std::uint64_t seed) {
  const auto s = split_indices(mode, t.labels, t.subject_ids, ratios, seed);
  return {t.select(s.train), t.select(s.val), t.select(s.test)};
}

}  // namespace voxbm::experiments
