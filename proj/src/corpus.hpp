// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset ingestion for the hierarchical offensive-language tasks:
// OLID-style labeled TSVs, the weakly-labeled tweet corpus, tweet
// normalization, dedup, sampling and k-fold splitting.

#ifndef OLP_CORPUS_HPP_
#define OLP_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace olp {

enum class TaskId { A, B, C };

// A task and its fixed label order. The label order is canonical: it defines
// the axis order of probability vectors, vote counts and confusion matrices.
//   A: [NOT, OFF]   B: [TIN, UNT]   C: [GRP, IND, OTH]
struct TaskSpec {
  TaskId id;
  std::vector<std::string> labels;

  static TaskSpec for_task(TaskId id);
  // "A" | "B" | "C" (case-insensitive); anything else throws UsageError.
  static TaskSpec parse(std::string_view name);

  std::string name() const;
  std::size_t num_labels() const { return labels.size(); }
  // Throws DataError for labels outside the task.
  std::size_t label_index(std::string_view label) const;
  bool has_label(std::string_view label) const;
};

bool operator==(const TaskSpec& a, const TaskSpec& b);

struct TweetRecord {
  std::string id;
  std::string text;
  // Provenance only; never used as a training target. Present together or
  // not at all.
  std::optional<double> weak_mean;
  std::optional<double> weak_spread;
};

struct LabeledExample {
  std::string id;
  std::string text;
  std::string label;
};

struct FoldAssignment {
  int k = 0;
  std::unordered_map<std::string, int> fold_of;  // example id -> [0, k)
};

// OLID TSV: header `id  tweet  subtask_a  subtask_b  subtask_c`, NULL for
// absent labels. Returns rows carrying a non-null label for `task`, in file
// order, with the hierarchy enforced (B requires subtask_a == OFF, C requires
// subtask_b == TIN; violating rows are skipped, not errors). Malformed rows
// and unknown label tokens are hard DataErrors naming the line / token.
std::vector<LabeledExample> load_olid(const std::filesystem::path& path,
                                      const TaskSpec& task);

// (id, text) pairs from either an OLID TSV (labels ignored, may be NULL) or
// a two-column `id  text` TSV. Used for unlabeled test sets.
std::vector<std::pair<std::string, std::string>> load_olid_texts(
    const std::filesystem::path& path);

// Weak corpus TSV: columns id, text, average, std (a header line equal to
// those names is skipped). average outside [0,1] or a negative std is a
// hard DataError.
std::vector<TweetRecord> load_weak_corpus(const std::filesystem::path& path);

// Strips URL tokens (http:// or https:// prefix, or the literal token URL)
// and mention tokens (@USER or any @-prefixed handle), collapses whitespace
// runs and trims. Total and idempotent.
std::string normalize_tweet(std::string_view text);

// Maps normalize_tweet over records and drops records whose text becomes
// empty (they cannot be masked or classified).
std::vector<TweetRecord> normalize_records(std::vector<TweetRecord> records);

// Removes exact-text duplicates, keeping the first occurrence. Inputs are
// expected to be normalized already.
std::vector<TweetRecord> deduplicate(const std::vector<TweetRecord>& records);

// Exactly max(1, round(fraction * n)) records, uniform without replacement,
// deterministic under seed, in original relative order. fraction must be in
// (0, 1].
std::vector<TweetRecord> sample_corpus(const std::vector<TweetRecord>& records,
                                       double fraction, std::uint64_t seed);

// Disjoint, exhaustive folds with sizes differing by at most 1, deterministic
// under seed. Duplicate ids and k > n are hard errors. With stratified=true
// the per-label proportions are approximately preserved (extension, off by
// default).
FoldAssignment kfold_split(const std::vector<LabeledExample>& examples, int k,
                           std::uint64_t seed, bool stratified = false);

}  // namespace olp

#endif  // OLP_CORPUS_HPP_
