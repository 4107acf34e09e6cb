// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test helpers: temp dirs, synthetic corpora and the independent
// oracles the suites check the implementation against.

#ifndef OLP_TEST_UTIL_HPP_
#define OLP_TEST_UTIL_HPP_

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "encoder.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace olp_test {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    auto base = fs::temp_directory_path();
    static std::atomic<unsigned> counter{0};
    auto stamp = std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1));
    path_ = base / ("olp_test_" + stamp);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Synthetic trigger-word corpus: a tweet is OFF iff it contains one of 20
// trigger tokens. Filler words that hash into a trigger's bucket are dropped
// at generation time so the task stays separable under the hashed tokenizer.
// ---------------------------------------------------------------------------

struct TriggerCorpus {
  std::vector<olp::LabeledExample> examples;  // Task A labels
  std::vector<std::string> triggers;
  std::vector<std::string> fillers;
};

inline TriggerCorpus make_trigger_corpus(std::size_t n, std::uint64_t seed,
                                         double label_noise = 0.0,
                                         int vocab_size = 2048) {
  TriggerCorpus corpus;
  for (int i = 0; i < 20; ++i)
    corpus.triggers.push_back("zark" + std::to_string(i));

  olp::Tokenizer tok(vocab_size, true);
  auto bucket = [&](const std::string& w) { return tok.tokenize(w, 3)[1]; };
  std::vector<int> trigger_buckets;
  for (const auto& t : corpus.triggers) trigger_buckets.push_back(bucket(t));

  for (int i = 0; corpus.fillers.size() < 220; ++i) {
    std::string w = "plain" + std::to_string(i);
    int b = bucket(w);
    if (std::find(trigger_buckets.begin(), trigger_buckets.end(), b) !=
        trigger_buckets.end())
      continue;
    corpus.fillers.push_back(w);
  }

  olp::Rng rng(olp::derive_seed(seed, "test/trigger_corpus"));
  for (std::size_t i = 0; i < n; ++i) {
    bool offensive = rng.next_unit() < 0.35;
    std::size_t len = 5 + rng.next_below(8);
    std::vector<std::string> words;
    for (std::size_t w = 0; w < len; ++w)
      words.push_back(corpus.fillers[rng.next_below(corpus.fillers.size())]);
    if (offensive) {
      std::size_t count = 1 + rng.next_below(2);
      for (std::size_t t = 0; t < count; ++t)
        words[rng.next_below(words.size())] =
            corpus.triggers[rng.next_below(corpus.triggers.size())];
    }
    // Re-derive the label from the final content: a filler slot may have
    // been overwritten, never the other way around.
    bool has_trigger = false;
    for (const auto& w : words)
      for (const auto& t : corpus.triggers)
        if (w == t) has_trigger = true;
    std::string label = has_trigger ? "OFF" : "NOT";
    if (label_noise > 0.0 && rng.next_unit() < label_noise)
      label = label == "OFF" ? "NOT" : "OFF";
    corpus.examples.push_back(
        {"ex" + std::to_string(1000000 + i), olp::join(words, " "), label});
  }
  return corpus;
}

// OLID-format TSV from task-A labeled examples (B/C columns NULL).
inline void write_olid_tsv(const fs::path& path,
                           const std::vector<olp::LabeledExample>& examples) {
  std::string buf = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n";
  for (const auto& ex : examples)
    buf += ex.id + "\t" + ex.text + "\t" + ex.label + "\tNULL\tNULL\n";
  olp::write_file(path, buf);
}

// ---------------------------------------------------------------------------
// Independent metric oracle: P/R/F1/macro/accuracy straight from label
// lists, never touching ConfusionMatrix. Fractions, not percent.
// ---------------------------------------------------------------------------

struct OracleClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
};

struct OracleMetrics {
  std::map<std::string, OracleClassMetrics> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

inline OracleMetrics oracle_metrics(const std::vector<std::string>& gold,
                                    const std::vector<std::string>& pred,
                                    const std::vector<std::string>& labels) {
  OracleMetrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i] == pred[i]) ++correct;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());

  double f1_sum = 0.0;
  for (const auto& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == label && gold[i] == label) ++tp;
      if (pred[i] == label && gold[i] != label) ++fp;
      if (pred[i] != label && gold[i] == label) ++fn;
    }
    OracleClassMetrics c;
    if (tp + fp == 0) {
      c.precision_defined = false;
      c.precision = 0.0;
    } else {
      c.precision = double(tp) / double(tp + fp);
    }
    c.recall = (tp + fn == 0) ? 0.0 : double(tp) / double(tp + fn);
    c.f1 = (c.precision + c.recall > 0)
               ? 2 * c.precision * c.recall / (c.precision + c.recall)
               : 0.0;
    f1_sum += c.f1;
    m.per_class[label] = c;
  }
  m.macro_f1 = f1_sum / static_cast<double>(labels.size());
  return m;
}

}  // namespace olp_test

#endif  // OLP_TEST_UTIL_HPP_
