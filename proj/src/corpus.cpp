// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "error.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace olp {

namespace fs = std::filesystem;

TaskSpec TaskSpec::for_task(TaskId id) {
  switch (id) {
    case TaskId::A:
      return {TaskId::A, {"NOT", "OFF"}};
    case TaskId::B:
      return {TaskId::B, {"TIN", "UNT"}};
    case TaskId::C:
      return {TaskId::C, {"GRP", "IND", "OTH"}};
  }
  throw InternalError("unreachable task id");
}

TaskSpec TaskSpec::parse(std::string_view name) {
  if (name.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
      case 'A':
        return for_task(TaskId::A);
      case 'B':
        return for_task(TaskId::B);
      case 'C':
        return for_task(TaskId::C);
      default:
        break;
    }
  }
  throw UsageError("unknown task '" + std::string(name) +
                   "' (expected A, B or C)");
}

std::string TaskSpec::name() const {
  switch (id) {
    case TaskId::A:
      return "A";
    case TaskId::B:
      return "B";
    case TaskId::C:
      return "C";
  }
  throw InternalError("unreachable task id");
}

std::size_t TaskSpec::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  throw DataError("label '" + std::string(label) + "' is not valid for task " +
                  name());
}

bool TaskSpec::has_label(std::string_view label) const {
  for (const auto& l : labels)
    if (l == label) return true;
  return false;
}

bool operator==(const TaskSpec& a, const TaskSpec& b) {
  return a.id == b.id && a.labels == b.labels;
}

namespace {

constexpr std::string_view kOlidHeader = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c";
constexpr std::string_view kWeakHeader = "id\ttext\taverage\tstd";

bool is_null_label(const std::string& s) { return s == "NULL" || s.empty(); }

void check_label_token(const TaskSpec& task, const std::string& token,
                       std::size_t line_no) {
  if (!task.has_label(token))
    throw DataError("unknown label token '" + token + "' for task " +
                    task.name() + " at line " + std::to_string(line_no));
}

}  // namespace

std::vector<LabeledExample> load_olid(const fs::path& path,
                                      const TaskSpec& task) {
  if (!fs::exists(path)) throw IoError("input file not found: " + path.string());
  auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kOlidHeader)
    throw DataError("bad OLID header in " + path.string() +
                    " (expected 'id<TAB>tweet<TAB>subtask_a<TAB>subtask_b<TAB>subtask_c')");

  std::vector<LabeledExample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 5)
      throw DataError("malformed row (expected 5 columns, got " +
                      std::to_string(cols.size()) + ") at line " +
                      std::to_string(i + 1) + " of " + path.string());
    const std::string& a = cols[2];
    const std::string& b = cols[3];
    const std::string& c = cols[4];

    std::string label;
    switch (task.id) {
      case TaskId::A:
        if (is_null_label(a)) continue;
        check_label_token(task, a, i + 1);
        label = a;
        break;
      case TaskId::B:
        if (is_null_label(b)) continue;
        check_label_token(task, b, i + 1);
        // Hierarchy: only offensive tweets have a B label.
        if (a != "OFF") continue;
        label = b;
        break;
      case TaskId::C:
        if (is_null_label(c)) continue;
        check_label_token(task, c, i + 1);
        // Hierarchy: only targeted insults have a C label.
        if (b != "TIN") continue;
        label = c;
        break;
    }
    out.push_back({cols[0], cols[1], label});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_olid_texts(
    const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input file not found: " + path.string());
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty input file: " + path.string());

  bool olid = lines[0] == kOlidHeader;
  bool two_col = lines[0] == "id\ttweet" || lines[0] == "id\ttext";
  if (!olid && !two_col)
    throw DataError("unrecognized header in " + path.string() +
                    " (expected an OLID TSV or an 'id<TAB>tweet' TSV)");

  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    std::size_t want = olid ? 5 : 2;
    if (cols.size() != want)
      throw DataError("malformed row (expected " + std::to_string(want) +
                      " columns, got " + std::to_string(cols.size()) +
                      ") at line " + std::to_string(i + 1) + " of " +
                      path.string());
    out.emplace_back(cols[0], cols[1]);
  }
  return out;
}

std::vector<TweetRecord> load_weak_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input file not found: " + path.string());
  auto lines = read_lines(path);

  std::vector<TweetRecord> out;
  std::size_t start = (!lines.empty() && lines[0] == kWeakHeader) ? 1 : 0;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 4)
      throw DataError("malformed row (expected 4 columns, got " +
                      std::to_string(cols.size()) + ") at line " +
                      std::to_string(i + 1) + " of " + path.string());
    double mean = parse_double(cols[2], "weak average");
    double spread = parse_double(cols[3], "weak std");
    if (mean < 0.0 || mean > 1.0)
      throw DataError("weak_mean out of range [0,1] at line " +
                      std::to_string(i + 1) + " of " + path.string());
    if (spread < 0.0)
      throw DataError("negative weak_spread at line " + std::to_string(i + 1) +
                      " of " + path.string());
    out.push_back({cols[0], cols[1], mean, spread});
  }
  return out;
}

namespace {

bool is_url_token(std::string_view tok) {
  return tok == "URL" || tok.rfind("http://", 0) == 0 ||
         tok.rfind("https://", 0) == 0;
}

bool is_mention_token(std::string_view tok) {
  return tok.size() >= 2 && tok[0] == '@';
}

}  // namespace

std::string normalize_tweet(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i == start) break;
    std::string_view tok = text.substr(start, i - start);
    if (is_url_token(tok) || is_mention_token(tok)) continue;
    if (!out.empty()) out += ' ';
    out.append(tok);
  }
  return out;
}

std::vector<TweetRecord> normalize_records(std::vector<TweetRecord> records) {
  std::vector<TweetRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    r.text = normalize_tweet(r.text);
    if (r.text.empty()) continue;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TweetRecord> deduplicate(const std::vector<TweetRecord>& records) {
  std::vector<TweetRecord> out;
  out.reserve(records.size());
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.text).second) out.push_back(r);
  return out;
}

std::vector<TweetRecord> sample_corpus(const std::vector<TweetRecord>& records,
                                       double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw UsageError("sample fraction must be in (0, 1], got " +
                     format_double("%g", fraction));
  if (records.empty()) throw UsageError("cannot sample from an empty corpus");

  auto n = records.size();
  auto want = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(fraction * static_cast<double>(n))));
  want = std::min(want, n);

  Rng rng(derive_seed(seed, "corpus/sample"));
  auto picked = rng.sample_indices(n, want);  // ascending -> original order
  std::vector<TweetRecord> out;
  out.reserve(want);
  for (auto idx : picked) out.push_back(records[idx]);
  return out;
}

FoldAssignment kfold_split(const std::vector<LabeledExample>& examples, int k,
                           std::uint64_t seed, bool stratified) {
  if (k < 1) throw UsageError("k must be positive");
  if (static_cast<std::size_t>(k) > examples.size())
    throw UsageError("k (" + std::to_string(k) + ") exceeds dataset size (" +
                     std::to_string(examples.size()) + ")");

  Rng rng(derive_seed(seed, "corpus/kfold"));

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (stratified) {
    // Shuffle within label groups, then concatenate groups; the round-robin
    // deal below keeps per-fold label proportions close to the global ones.
    std::unordered_map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < examples.size(); ++i)
      by_label[examples[i].label].push_back(i);
    std::vector<std::string> label_keys;
    for (const auto& [label, _] : by_label) label_keys.push_back(label);
    std::sort(label_keys.begin(), label_keys.end());
    order.clear();
    for (const auto& label : label_keys) {
      auto group = by_label[label];
      rng.shuffle(group);
      order.insert(order.end(), group.begin(), group.end());
    }
  } else {
    rng.shuffle(order);
  }

  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.reserve(examples.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& ex = examples[order[pos]];
    int fold = static_cast<int>(pos % static_cast<std::size_t>(k));
    if (!fa.fold_of.emplace(ex.id, fold).second)
      throw DataError("duplicate example id '" + ex.id + "' in k-fold input");
  }
  return fa;
}

}  // namespace olp
