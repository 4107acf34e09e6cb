// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "error.hpp"
#include "io_util.hpp"

namespace olp {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold,
                                 const std::vector<std::string>& pred,
                                 const TaskSpec& task) {
  if (gold.size() != pred.size())
    throw DataError("gold/prediction length mismatch: " +
                    std::to_string(gold.size()) + " vs " +
                    std::to_string(pred.size()));
  if (gold.empty()) throw DataError("cannot evaluate an empty label list");

  ConfusionMatrix m;
  m.task = task;
  m.counts.assign(task.num_labels(),
                  std::vector<std::int64_t>(task.num_labels(), 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = task.label_index(gold[i]);
    auto p = task.label_index(pred[i]);
    ++m.counts[g][p];
  }
  return m;
}

std::vector<ClassMetrics> per_class_prf(const ConfusionMatrix& matrix) {
  const auto n = matrix.task.num_labels();
  std::vector<ClassMetrics> out(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::int64_t tp = matrix.counts[c][c];
    std::int64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == c) continue;
      fp += matrix.counts[o][c];
      fn += matrix.counts[c][o];
    }
    auto& cm = out[c];
    cm.label = matrix.task.labels[c];
    double precision = 0.0;
    if (tp + fp == 0) {
      cm.precision_defined = false;  // never predicted; counts as 0 for F1
    } else {
      precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    double recall = (tp + fn == 0)
                        ? 0.0
                        : static_cast<double>(tp) / static_cast<double>(tp + fn);
    double f1 = (precision + recall > 0.0)
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    cm.precision = precision * 100.0;
    cm.recall = recall * 100.0;
    cm.f1 = f1 * 100.0;
  }
  return out;
}

double macro_f1(const ConfusionMatrix& matrix) {
  auto per_class = per_class_prf(matrix);
  double sum = 0.0;
  for (const auto& c : per_class) sum += c.f1;
  return sum / static_cast<double>(per_class.size());
}

double accuracy(const ConfusionMatrix& matrix) {
  return 100.0 * static_cast<double>(matrix.trace()) /
         static_cast<double>(matrix.total());
}

BaselineStrategy parse_baseline(std::string_view name) {
  if (name == "all_not") return BaselineStrategy::all_not;
  if (name == "all_off") return BaselineStrategy::all_off;
  if (name == "majority_class") return BaselineStrategy::majority_class;
  throw UsageError("unknown baseline '" + std::string(name) +
                   "' (all_not, all_off, majority_class)");
}

PredictionSet baseline_predict(BaselineStrategy strategy,
                               const std::vector<LabeledExample>& gold,
                               const TaskSpec& task) {
  if (gold.empty()) throw DataError("baseline needs a non-empty gold set");

  std::string label;
  std::string name;
  switch (strategy) {
    case BaselineStrategy::all_not:
    case BaselineStrategy::all_off: {
      if (task.id != TaskId::A)
        throw UsageError(
            "all_not/all_off baselines are defined for Task A only; use "
            "majority_class");
      label = strategy == BaselineStrategy::all_not ? "NOT" : "OFF";
      name = strategy == BaselineStrategy::all_not ? "All NOT" : "All OFF";
      break;
    }
    case BaselineStrategy::majority_class: {
      std::vector<std::int64_t> counts(task.num_labels(), 0);
      for (const auto& ex : gold) ++counts[task.label_index(ex.label)];
      std::size_t best = 0;
      for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = i;  // tie -> earlier label
      label = task.labels[best];
      name = "Majority class";
      break;
    }
  }

  PredictionSet set;
  set.model_name = name;
  set.task = task;
  set.rows.reserve(gold.size());
  std::vector<double> onehot(task.num_labels(), 0.0);
  onehot[task.label_index(label)] = 1.0;
  for (const auto& ex : gold) set.rows.push_back({ex.id, label, onehot});
  return set;
}

namespace {

std::string positive_label(const TaskSpec& task) {
  switch (task.id) {
    case TaskId::A:
      return "OFF";
    case TaskId::B:
      return "TIN";
    case TaskId::C:
      return "";  // 3 labels: no FP/FN sampling
  }
  return "";
}

}  // namespace

EvalReport build_report(const std::vector<LabeledExample>& gold,
                        const PredictionSet& predictions, const TaskSpec& task,
                        std::size_t max_error_samples) {
  std::map<std::string, const LabeledExample*> gold_by_id;
  for (const auto& ex : gold) gold_by_id[ex.id] = &ex;
  std::map<std::string, const PredictionRow*> pred_by_id;
  for (const auto& row : predictions.rows) pred_by_id[row.id] = &row;

  if (gold_by_id.size() != gold.size())
    throw DataError("duplicate ids in gold set");
  if (gold_by_id.size() != pred_by_id.size() ||
      !std::equal(gold_by_id.begin(), gold_by_id.end(), pred_by_id.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    std::string only_gold, only_pred;
    for (const auto& [id, _] : gold_by_id)
      if (!pred_by_id.count(id)) only_gold += " " + id;
    for (const auto& [id, _] : pred_by_id)
      if (!gold_by_id.count(id)) only_pred += " " + id;
    throw DataError("gold/prediction id mismatch; only in gold:" + only_gold +
                    "; only in predictions:" + only_pred);
  }

  std::vector<std::string> gold_labels, pred_labels;
  gold_labels.reserve(gold.size());
  for (const auto& [id, ex] : gold_by_id) {
    gold_labels.push_back(ex->label);
    pred_labels.push_back(pred_by_id[id]->label);
  }

  EvalReport report;
  report.task = task;
  report.model_name = predictions.model_name;
  report.matrix = confusion_matrix(gold_labels, pred_labels, task);
  report.per_class = per_class_prf(report.matrix);
  report.macro_f1 = macro_f1(report.matrix);
  report.accuracy = accuracy(report.matrix);

  const std::string pos = positive_label(task);
  if (!pos.empty()) {
    // gold_by_id iterates in ascending id order, which makes the sample
    // selection deterministic.
    for (const auto& [id, ex] : gold_by_id) {
      const auto& predicted = pred_by_id[id]->label;
      if (ex->label != pos && predicted == pos &&
          report.false_positives.size() < max_error_samples)
        report.false_positives.push_back({id, ex->text});
      if (ex->label == pos && predicted != pos &&
          report.false_negatives.size() < max_error_samples)
        report.false_negatives.push_back({id, ex->text});
    }
  }
  return report;
}

void write_confusion_csv(const ConfusionMatrix& matrix,
                         const std::filesystem::path& path) {
  std::string buf = "gold\\pred";
  for (const auto& l : matrix.task.labels) buf += "," + l;
  buf += "\n";
  for (std::size_t g = 0; g < matrix.task.num_labels(); ++g) {
    buf += matrix.task.labels[g];
    for (std::size_t p = 0; p < matrix.task.num_labels(); ++p)
      buf += "," + std::to_string(matrix.counts[g][p]);
    buf += "\n";
  }
  write_file(path, buf);
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.size() < 3) throw DataError("bad confusion CSV: " + path.string());
  auto header = split(lines[0], ',');
  if (header.empty() || header[0] != "gold\\pred")
    throw DataError("bad confusion CSV header: " + path.string());
  std::vector<std::string> labels(header.begin() + 1, header.end());

  ConfusionMatrix m;
  bool matched = false;
  for (auto tid : {TaskId::A, TaskId::B, TaskId::C}) {
    auto t = TaskSpec::for_task(tid);
    if (t.labels == labels) {
      m.task = t;
      matched = true;
      break;
    }
  }
  if (!matched)
    throw DataError("confusion CSV labels match no known task: " +
                    path.string());

  m.counts.assign(labels.size(), std::vector<std::int64_t>(labels.size(), 0));
  for (std::size_t g = 0; g < labels.size(); ++g) {
    auto cols = split(lines[g + 1], ',');
    if (cols.size() != labels.size() + 1 || cols[0] != labels[g])
      throw DataError("bad confusion CSV row " + std::to_string(g + 2) +
                      ": " + path.string());
    for (std::size_t p = 0; p < labels.size(); ++p)
      m.counts[g][p] = parse_int(cols[p + 1], "confusion count");
  }
  return m;
}

void render_confusion_figure(const ConfusionMatrix& matrix,
                             const std::filesystem::path& path) {
  const auto n = matrix.task.num_labels();
  std::int64_t max_count = 1;
  for (const auto& row : matrix.counts)
    for (auto c : row) max_count = std::max(max_count, c);

  const int cell = 72;
  const int left = 96, top = 48;
  const int width = left + cell * static_cast<int>(n) + 24;
  const int height = top + cell * static_cast<int>(n) + 48;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<text x=\"" + std::to_string(left + cell * static_cast<int>(n) / 2) +
         "\" y=\"18\" text-anchor=\"middle\">predicted</text>\n";
  svg += "<text x=\"16\" y=\"" +
         std::to_string(top + cell * static_cast<int>(n) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         std::to_string(top + cell * static_cast<int>(n) / 2) +
         ")\">gold</text>\n";

  for (std::size_t p = 0; p < n; ++p)
    svg += "<text x=\"" +
           std::to_string(left + static_cast<int>(p) * cell + cell / 2) +
           "\" y=\"" + std::to_string(top - 8) +
           "\" text-anchor=\"middle\">" + matrix.task.labels[p] + "</text>\n";
  for (std::size_t g = 0; g < n; ++g)
    svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
           std::to_string(top + static_cast<int>(g) * cell + cell / 2 + 4) +
           "\" text-anchor=\"end\">" + matrix.task.labels[g] + "</text>\n";

  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t p = 0; p < n; ++p) {
      double frac = static_cast<double>(matrix.counts[g][p]) /
                    static_cast<double>(max_count);
      // White through steel blue.
      int r = static_cast<int>(std::lround(255 - frac * (255 - 70)));
      int gg = static_cast<int>(std::lround(255 - frac * (255 - 130)));
      int b = static_cast<int>(std::lround(255 - frac * (255 - 180)));
      int x = left + static_cast<int>(p) * cell;
      int y = top + static_cast<int>(g) * cell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" +
             std::to_string(cell) + "\" fill=\"rgb(" + std::to_string(r) +
             "," + std::to_string(gg) + "," + std::to_string(b) +
             ")\" stroke=\"#444\"/>\n";
      std::string text_color = frac > 0.6 ? "#fff" : "#000";
      svg += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" +
             std::to_string(y + cell / 2 + 5) +
             "\" text-anchor=\"middle\" fill=\"" + text_color + "\">" +
             std::to_string(matrix.counts[g][p]) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  write_file(path, svg);

  auto csv_path = path;
  csv_path.replace_extension(".csv");
  write_confusion_csv(matrix, csv_path);
}

namespace {

std::string pct(double v) { return format_double("%.2f", v); }

}  // namespace

std::string format_report_table(const EvalReport& report) {
  // Mirrors the published table layout: per-class P/R/F1 blocks followed by
  // Macro F1 and Acc. Undefined precision renders as "-".
  std::string out;
  std::string name = report.model_name.empty() ? "model" : report.model_name;

  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s += std::string(w - s.size(), ' ');
    return s;
  };

  out += pad("Model", 24);
  for (const auto& c : report.per_class) {
    out += pad(c.label + " P", 10) + pad(c.label + " R", 10) +
           pad(c.label + " F1", 10);
  }
  out += pad("Macro F1", 10) + "Acc.\n";

  out += pad(name, 24);
  for (const auto& c : report.per_class) {
    out += pad(c.precision_defined ? pct(c.precision) : "-", 10);
    out += pad(pct(c.recall), 10);
    out += pad(pct(c.f1), 10);
  }
  out += pad(pct(report.macro_f1), 10) + pct(report.accuracy) + "\n";
  return out;
}

void write_report_kv(const EvalReport& report,
                     const std::filesystem::path& path) {
  std::string buf;
  buf += "task = " + report.task.name() + "\n";
  buf += "model = " + report.model_name + "\n";
  buf += "macro_f1 = " + format_double("%.10g", report.macro_f1) + "\n";
  buf += "accuracy = " + format_double("%.10g", report.accuracy) + "\n";
  for (const auto& c : report.per_class) {
    buf += "precision." + c.label + " = " +
           format_double("%.10g", c.precision) + "\n";
    buf += "precision_defined." + c.label + " = " +
           std::string(c.precision_defined ? "1" : "0") + "\n";
    buf += "recall." + c.label + " = " + format_double("%.10g", c.recall) + "\n";
    buf += "f1." + c.label + " = " + format_double("%.10g", c.f1) + "\n";
  }
  for (std::size_t g = 0; g < report.task.num_labels(); ++g)
    for (std::size_t p = 0; p < report.task.num_labels(); ++p)
      buf += "confusion." + report.task.labels[g] + "." +
             report.task.labels[p] + " = " +
             std::to_string(report.matrix.counts[g][p]) + "\n";
  for (std::size_t i = 0; i < report.false_positives.size(); ++i) {
    buf += "error_sample.fp." + std::to_string(i) + ".id = " +
           report.false_positives[i].id + "\n";
    buf += "error_sample.fp." + std::to_string(i) + ".text = " +
           report.false_positives[i].text + "\n";
  }
  for (std::size_t i = 0; i < report.false_negatives.size(); ++i) {
    buf += "error_sample.fn." + std::to_string(i) + ".id = " +
           report.false_negatives[i].id + "\n";
    buf += "error_sample.fn." + std::to_string(i) + ".text = " +
           report.false_negatives[i].text + "\n";
  }
  write_file(path, buf);
}

EvalReport read_report_kv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::map<std::string, std::string> kv;
  for (const auto& line : lines) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find(" = ");
    if (eq == std::string::npos)
      throw DataError("bad report kv line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (!kv.count("task")) throw DataError("report kv missing task: " + path.string());

  EvalReport report;
  report.task = TaskSpec::parse(kv.at("task"));
  report.model_name = kv.count("model") ? kv.at("model") : "";
  report.macro_f1 = parse_double(kv.at("macro_f1"), "macro_f1");
  report.accuracy = parse_double(kv.at("accuracy"), "accuracy");
  for (const auto& label : report.task.labels) {
    ClassMetrics c;
    c.label = label;
    c.precision = parse_double(kv.at("precision." + label), "precision");
    c.precision_defined = kv.at("precision_defined." + label) == "1";
    c.recall = parse_double(kv.at("recall." + label), "recall");
    c.f1 = parse_double(kv.at("f1." + label), "f1");
    report.per_class.push_back(c);
  }
  report.matrix.task = report.task;
  report.matrix.counts.assign(
      report.task.num_labels(),
      std::vector<std::int64_t>(report.task.num_labels(), 0));
  for (std::size_t g = 0; g < report.task.num_labels(); ++g)
    for (std::size_t p = 0; p < report.task.num_labels(); ++p)
      report.matrix.counts[g][p] =
          parse_int(kv.at("confusion." + report.task.labels[g] + "." +
                          report.task.labels[p]),
                    "confusion cell");
  for (std::size_t i = 0;; ++i) {
    auto key = "error_sample.fp." + std::to_string(i);
    if (!kv.count(key + ".id")) break;
    report.false_positives.push_back({kv.at(key + ".id"), kv.at(key + ".text")});
  }
  for (std::size_t i = 0;; ++i) {
    auto key = "error_sample.fn." + std::to_string(i);
    if (!kv.count(key + ".id")) break;
    report.false_negatives.push_back({kv.at(key + ".id"), kv.at(key + ".text")});
  }
  return report;
}

}  // namespace olp
