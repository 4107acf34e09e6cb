// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>
#include <unordered_set>

#include "corpus.hpp"
#include "doctest.h"
#include "error.hpp"
#include "io_util.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace olp;
using olp_test::TempDir;

namespace {

const char* kOlidFixture =
    "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n"
    "86426\t@USER She should ask a few native Americans what their take is.\tOFF\tUNT\tNULL\n"
    "90194\tgo home you're drunk @USER\tOFF\tTIN\tIND\n"
    "16820\tsomeone should have taken this piece of junk\tNOT\tNULL\tNULL\n"
    "62688\tshe is trying to hide her real numbers URL\tOFF\tTIN\tGRP\n"
    "43605\tour moment of truth has arrived\tNOT\tNULL\tNULL\n";

}  // namespace

TEST_CASE("task specs carry the canonical label orders") {
  CHECK(TaskSpec::for_task(TaskId::A).labels == std::vector<std::string>{"NOT", "OFF"});
  CHECK(TaskSpec::for_task(TaskId::B).labels == std::vector<std::string>{"TIN", "UNT"});
  CHECK(TaskSpec::for_task(TaskId::C).labels ==
        std::vector<std::string>{"GRP", "IND", "OTH"});
  CHECK(TaskSpec::parse("b").id == TaskId::B);
  CHECK_THROWS_AS(TaskSpec::parse("D"), UsageError);
  CHECK(TaskSpec::for_task(TaskId::A).label_index("OFF") == 1);
  CHECK_THROWS_AS(TaskSpec::for_task(TaskId::A).label_index("TIN"), DataError);
}

TEST_CASE("load_olid reads per-task labels with hierarchy enforcement") {
  TempDir tmp;
  auto path = tmp / "olid.tsv";
  write_file(path, kOlidFixture);

  auto a = load_olid(path, TaskSpec::for_task(TaskId::A));
  REQUIRE(a.size() == 5);
  CHECK(a[0].id == "86426");
  CHECK(a[0].label == "OFF");
  CHECK(a[2].label == "NOT");

  auto b = load_olid(path, TaskSpec::for_task(TaskId::B));
  REQUIRE(b.size() == 3);  // rows with subtask_a=NOT yield no B example
  CHECK(b[0].label == "UNT");
  CHECK(b[1].label == "TIN");

  auto c = load_olid(path, TaskSpec::for_task(TaskId::C));
  REQUIRE(c.size() == 2);  // only TIN rows yield a C example
  CHECK(c[0].id == "90194");
  CHECK(c[0].label == "IND");
  CHECK(c[1].label == "GRP");
}

TEST_CASE("load_olid hierarchy rule skips B rows whose task A label is NOT") {
  TempDir tmp;
  auto path = tmp / "olid.tsv";
  write_file(path,
             "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n"
             "1\tsome text\tNOT\tTIN\tNULL\n");
  CHECK(load_olid(path, TaskSpec::for_task(TaskId::B)).empty());
  // count(B) <= count(A=OFF) holds trivially: 0 <= 0.
}

TEST_CASE("load_olid hard errors") {
  TempDir tmp;
  auto path = tmp / "olid.tsv";

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_olid(tmp / "nope.tsv", TaskSpec::for_task(TaskId::A)),
                    IoError);
  }
  SUBCASE("bad header") {
    write_file(path, "id\ttext\n1\tx\n");
    CHECK_THROWS_AS(load_olid(path, TaskSpec::for_task(TaskId::A)), DataError);
  }
  SUBCASE("wrong column count names the line") {
    write_file(path,
               "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n"
               "1\tok\tNOT\tNULL\tNULL\n"
               "2\tmissing columns\tOFF\n");
    try {
      load_olid(path, TaskSpec::for_task(TaskId::A));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("unknown label token is named") {
    write_file(path,
               "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n"
               "1\tx\tWAT\tNULL\tNULL\n");
    try {
      load_olid(path, TaskSpec::for_task(TaskId::A));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("WAT") != std::string::npos);
    }
  }
}

TEST_CASE("load_weak_corpus reads records in file order") {
  TempDir tmp;
  auto path = tmp / "weak.tsv";
  std::string buf = "id\ttext\taverage\tstd\n";
  for (int i = 0; i < 10; ++i)
    buf += std::to_string(i) + "\t@USER some text " + std::to_string(i) +
           "\t0.23\t0.11\n";
  write_file(path, buf);

  auto records = load_weak_corpus(path);
  REQUIRE(records.size() == 10);
  CHECK(records[0].id == "0");
  CHECK(records[9].id == "9");
  CHECK(records[0].text == "@USER some text 0");
  CHECK(records[0].weak_mean == 0.23);
  CHECK(records[0].weak_spread == 0.11);
}

TEST_CASE("load_weak_corpus bound checks") {
  TempDir tmp;
  auto path = tmp / "weak.tsv";
  SUBCASE("weak_mean out of range") {
    write_file(path, "1\tx\t1.2\t0.1\n");
    try {
      load_weak_corpus(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
  }
  SUBCASE("negative spread") {
    write_file(path, "1\tx\t0.5\t-0.1\n");
    CHECK_THROWS_AS(load_weak_corpus(path), DataError);
  }
  SUBCASE("header optional") {
    write_file(path, "1\tx\t0.5\t0.1\n");
    CHECK(load_weak_corpus(path).size() == 1);
  }
}

TEST_CASE("normalize_tweet strips urls and mentions") {
  CHECK(normalize_tweet("@USER What the fuck") == "What the fuck");
  CHECK(normalize_tweet("no urls or handles here") == "no urls or handles here");
  CHECK(normalize_tweet("check https://t.co/abc out @USER now") == "check out now");
  CHECK(normalize_tweet("keep URL token http://x.y stripped") == "keep token stripped");
  CHECK(normalize_tweet("  spaced   out\ttext ") == "spaced out text");
  CHECK(normalize_tweet("@handle @USER @x") == "");
  CHECK(normalize_tweet("emoji \xF0\x9F\x98\x80 #tag stay") == "emoji \xF0\x9F\x98\x80 #tag stay");
  CHECK(normalize_tweet("a lone @ stays") == "a lone @ stays");
  CHECK(normalize_tweet("") == "");
}

TEST_CASE("normalize_tweet is idempotent over a fuzz corpus") {
  Rng rng(derive_seed(7, "test/normalize_fuzz"));
  const std::vector<std::string> pieces = {
      "@USER",  "word",   "https://t.co/x1", "URL",   "#tag", "@someone",
      "😀",     "C'mon!", "http://a.b/c",    "YELL",  "@",    "..",
      "a\tb",   " ",      "multi  space",    "café"};
  for (int i = 0; i < 10000; ++i) {
    std::string text;
    auto n = rng.next_below(12);
    for (std::size_t w = 0; w < n; ++w) {
      text += pieces[rng.next_below(pieces.size())];
      text += rng.next_unit() < 0.2 ? "  " : " ";
    }
    auto once = normalize_tweet(text);
    CHECK(normalize_tweet(once) == once);
  }
}

TEST_CASE("deduplicate keeps first occurrences") {
  auto rec = [](std::string id, std::string text) {
    return TweetRecord{std::move(id), std::move(text), {}, {}};
  };
  SUBCASE("first-kept rule") {
    std::vector<TweetRecord> in = {rec("1", "a"), rec("2", "b"), rec("3", "a")};
    auto out = deduplicate(in);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == "1");
    CHECK(out[1].id == "2");
  }
  SUBCASE("all distinct is identity") {
    std::vector<TweetRecord> in = {rec("1", "a"), rec("2", "b"), rec("3", "c")};
    CHECK(deduplicate(in).size() == 3);
  }
  SUBCASE("idempotent and never longer") {
    std::vector<TweetRecord> in = {rec("1", "a"), rec("2", "a"), rec("3", "b"),
                                   rec("4", "b"), rec("5", "c")};
    auto once = deduplicate(in);
    auto twice = deduplicate(once);
    CHECK(once.size() <= in.size());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i)
      CHECK(once[i].id == twice[i].id);
  }
}

TEST_CASE("duplicates that differ only by handles collapse after normalization") {
  // 5-record fixture checked by hand: records 1 and 4 agree after stripping
  // mentions; 2 and 5 agree after stripping the URL; 3 is unique.
  std::vector<TweetRecord> raw = {
      {"1", "@alice you are wrong", {}, {}},
      {"2", "look at this URL", {}, {}},
      {"3", "something else entirely", {}, {}},
      {"4", "@bob you are wrong", {}, {}},
      {"5", "look at this https://t.co/z", {}, {}},
  };
  auto normalized = normalize_records(raw);
  REQUIRE(normalized.size() == 5);
  auto out = deduplicate(normalized);
  REQUIRE(out.size() == 3);
  CHECK(out[0].id == "1");
  CHECK(out[1].id == "2");
  CHECK(out[2].id == "3");
}

TEST_CASE("normalize_records drops records that become empty") {
  std::vector<TweetRecord> raw = {
      {"1", "@USER", {}, {}},
      {"2", "real text", {}, {}},
      {"3", "URL https://x.y @z", {}, {}},
  };
  auto out = normalize_records(raw);
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == "2");
  CHECK(out[0].text == "real text");
}

TEST_CASE("sample_corpus count, determinism and order") {
  std::vector<TweetRecord> records;
  for (int i = 0; i < 100; ++i)
    records.push_back({std::to_string(i), "t" + std::to_string(i), {}, {}});

  SUBCASE("exact count and determinism") {
    auto s1 = sample_corpus(records, 0.05, 7);
    auto s2 = sample_corpus(records, 0.05, 7);
    REQUIRE(s1.size() == 5);
    REQUIRE(s2.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(s1[i].id == s2[i].id);
  }
  SUBCASE("fraction 1.0 is identity in original order") {
    auto all = sample_corpus(records, 1.0, 3);
    REQUIRE(all.size() == 100);
    for (int i = 0; i < 100; ++i) CHECK(all[i].id == std::to_string(i));
  }
  SUBCASE("output preserves original relative order") {
    auto s = sample_corpus(records, 0.2, 11);
    for (std::size_t i = 1; i < s.size(); ++i)
      CHECK(std::stoi(s[i - 1].id) < std::stoi(s[i].id));
  }
  SUBCASE("count rule lower bound") {
    auto one = sample_corpus(records, 0.001, 5);
    CHECK(one.size() == 1);  // max(1, round(0.1)) = 1
  }
  SUBCASE("bad fraction") {
    CHECK_THROWS_AS(sample_corpus(records, 0.0, 1), UsageError);
    CHECK_THROWS_AS(sample_corpus(records, 1.5, 1), UsageError);
    CHECK_THROWS_AS(sample_corpus(records, -0.1, 1), UsageError);
  }
}

TEST_CASE("sample_corpus seed sensitivity for n >= 50") {
  std::vector<TweetRecord> records;
  for (int i = 0; i < 60; ++i)
    records.push_back({std::to_string(i), "t" + std::to_string(i), {}, {}});

  int differing = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    auto a = sample_corpus(records, 0.2, 1000 + static_cast<std::uint64_t>(t));
    auto b = sample_corpus(records, 0.2, 2000 + static_cast<std::uint64_t>(t));
    bool same = a.size() == b.size();
    if (same)
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].id != b[i].id) {
          same = false;
          break;
        }
    if (!same) ++differing;
  }
  // Empirical check: different seeds change the selection > 99% of the time.
  CHECK(differing >= 199);
}

TEST_CASE("kfold_split partitions exactly") {
  auto make_examples = [](int n) {
    std::vector<LabeledExample> ex;
    for (int i = 0; i < n; ++i)
      ex.push_back({"id" + std::to_string(i), "text", i % 3 == 0 ? "OFF" : "NOT"});
    return ex;
  };

  SUBCASE("n=10 k=10 gives singleton folds") {
    auto fa = kfold_split(make_examples(10), 10, 1);
    std::set<int> folds;
    for (const auto& [id, f] : fa.fold_of) folds.insert(f);
    CHECK(folds.size() == 10);
  }
  SUBCASE("n=14100 k=10 gives folds of 1410") {
    auto fa = kfold_split(make_examples(14100), 10, 1);
    std::vector<int> sizes(10, 0);
    for (const auto& [id, f] : fa.fold_of) ++sizes[static_cast<std::size_t>(f)];
    for (int s : sizes) CHECK(s == 1410);
  }
  SUBCASE("n=11 k=10: nine folds of 1, one fold of 2") {
    auto fa = kfold_split(make_examples(11), 10, 1);
    std::vector<int> sizes(10, 0);
    for (const auto& [id, f] : fa.fold_of) ++sizes[static_cast<std::size_t>(f)];
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes[8] == 1);
    CHECK(sizes[9] == 2);
  }
  SUBCASE("union of folds equals the id set; assignment exhaustive") {
    auto ex = make_examples(103);
    auto fa = kfold_split(ex, 7, 9);
    CHECK(fa.fold_of.size() == ex.size());
    for (const auto& e : ex) {
      REQUIRE(fa.fold_of.count(e.id) == 1);
      CHECK(fa.fold_of.at(e.id) >= 0);
      CHECK(fa.fold_of.at(e.id) < 7);
    }
  }
  SUBCASE("deterministic under seed, different across seeds") {
    auto ex = make_examples(50);
    auto a = kfold_split(ex, 5, 3);
    auto b = kfold_split(ex, 5, 3);
    auto c = kfold_split(ex, 5, 4);
    CHECK(a.fold_of == b.fold_of);
    CHECK(a.fold_of != c.fold_of);
  }
  SUBCASE("k > n is a hard error") {
    CHECK_THROWS_AS(kfold_split(make_examples(5), 10, 1), UsageError);
  }
  SUBCASE("duplicate ids are a hard error") {
    std::vector<LabeledExample> ex = {{"a", "x", "NOT"}, {"a", "y", "OFF"}};
    CHECK_THROWS_AS(kfold_split(ex, 2, 1), DataError);
  }
  SUBCASE("stratified folds keep label proportions") {
    auto ex = make_examples(90);  // 30 OFF / 60 NOT
    auto fa = kfold_split(ex, 3, 5, /*stratified=*/true);
    std::map<int, int> off_count, total;
    for (const auto& e : ex) {
      ++total[fa.fold_of.at(e.id)];
      if (e.label == "OFF") ++off_count[fa.fold_of.at(e.id)];
    }
    for (int f = 0; f < 3; ++f) {
      CHECK(total[f] == 30);
      CHECK(off_count[f] == 10);
    }
  }
}

TEST_CASE("load_olid_texts accepts OLID and two-column files") {
  TempDir tmp;
  write_file(tmp / "olid.tsv", kOlidFixture);
  auto a = load_olid_texts(tmp / "olid.tsv");
  CHECK(a.size() == 5);
  CHECK(a[0].first == "86426");

  write_file(tmp / "texts.tsv", "id\ttweet\n7\thello there\n8\tbye\n");
  auto b = load_olid_texts(tmp / "texts.tsv");
  REQUIRE(b.size() == 2);
  CHECK(b[1].second == "bye");
}
