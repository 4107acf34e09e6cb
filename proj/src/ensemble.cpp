// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "error.hpp"
#include "io_util.hpp"

namespace olp {

VoteMode parse_vote_mode(std::string_view name) {
  if (name == "hard") return VoteMode::hard;
  if (name == "soft") return VoteMode::soft;
  throw UsageError("unknown vote mode '" + std::string(name) +
                   "' (hard, soft)");
}

TieRule parse_tie_rule(std::string_view name) {
  if (name == "soft_fallback") return TieRule::soft_fallback;
  if (name == "canonical_order") return TieRule::canonical_order;
  throw UsageError("unknown tie rule '" + std::string(name) +
                   "' (soft_fallback, canonical_order)");
}

namespace {

std::string mode_name(VoteMode m) {
  return m == VoteMode::hard ? "hard" : "soft";
}
std::string tie_name(TieRule t) {
  return t == TieRule::soft_fallback ? "soft_fallback" : "canonical_order";
}

// Validates membership and returns the shared, sorted id list.
std::vector<std::string> check_members(const std::vector<PredictionSet>& members) {
  if (members.size() < 2)
    throw UsageError("an ensemble needs at least 2 members, got " +
                     std::to_string(members.size()));
  const TaskSpec& task = members[0].task;
  std::set<std::string> base_ids;
  for (const auto& row : members[0].rows)
    if (!base_ids.insert(row.id).second)
      throw DataError("duplicate id '" + row.id + "' in member " +
                      members[0].model_name);

  for (std::size_t m = 1; m < members.size(); ++m) {
    if (!(members[m].task == task))
      throw DataError("ensemble members disagree on the task: " +
                      members[m].model_name + " is for task " +
                      members[m].task.name() + ", expected " + task.name());
    std::set<std::string> ids;
    for (const auto& row : members[m].rows)
      if (!ids.insert(row.id).second)
        throw DataError("duplicate id '" + row.id + "' in member " +
                        members[m].model_name);
    if (ids != base_ids) {
      std::string missing, extra;
      for (const auto& id : base_ids)
        if (!ids.count(id)) missing += " " + id;
      for (const auto& id : ids)
        if (!base_ids.count(id)) extra += " " + id;
      throw DataError("member '" + members[m].model_name +
                      "' id set differs from '" + members[0].model_name +
                      "'; missing:" + missing + "; extra:" + extra);
    }
  }
  return {base_ids.begin(), base_ids.end()};
}

std::string digest(const EnsembleSpec& spec) {
  std::string d = mode_name(spec.mode) + "(" + tie_name(spec.tie_rule) +
                  ") task=" + spec.members[0].task.name() +
                  " members=" + std::to_string(spec.members.size()) + " [";
  for (std::size_t i = 0; i < spec.members.size(); ++i) {
    if (i) d += "; ";
    d += spec.members[i].model_name;
  }
  return d + "]";
}

// Mean of the member probability vectors for one id; members without
// probabilities fall back to a one-hot on their stored label, so the mean is
// always defined (for label-only files it degrades to vote fractions).
std::vector<double> mean_probs_for(
    const std::vector<const PredictionRow*>& rows, const TaskSpec& task) {
  std::vector<double> mean(task.num_labels(), 0.0);
  for (const auto* row : rows) {
    if (row->probs.size() == task.num_labels()) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row->probs[i];
    } else {
      mean[task.label_index(row->label)] += 1.0;
    }
  }
  for (auto& v : mean) v /= static_cast<double>(rows.size());
  return mean;
}

}  // namespace

EnsembleResult hard_vote(const EnsembleSpec& spec) {
  auto ids = check_members(spec.members);
  const TaskSpec& task = spec.members[0].task;

  std::vector<std::map<std::string, const PredictionRow*>> by_id(
      spec.members.size());
  for (std::size_t m = 0; m < spec.members.size(); ++m)
    for (const auto& row : spec.members[m].rows)
      by_id[m][row.id] = &row;

  EnsembleResult result;
  result.task = task;
  result.spec_digest = digest(spec);
  result.rows.reserve(ids.size());

  for (const auto& id : ids) {
    std::vector<const PredictionRow*> rows;
    rows.reserve(spec.members.size());
    for (auto& m : by_id) rows.push_back(m.at(id));

    EnsembleRow out;
    out.id = id;
    out.votes.assign(task.num_labels(), 0);
    for (const auto* row : rows) ++out.votes[task.label_index(row->label)];
    out.mean_probs = mean_probs_for(rows, task);

    std::int64_t top = *std::max_element(out.votes.begin(), out.votes.end());
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < out.votes.size(); ++i)
      if (out.votes[i] == top) tied.push_back(i);

    std::size_t winner = tied[0];
    if (tied.size() > 1) {
      out.tie_flag = true;
      if (spec.tie_rule == TieRule::soft_fallback) {
        // Highest mean probability among the tied labels; equal means fall
        // through to canonical order (tied[0] stays).
        for (auto i : tied)
          if (out.mean_probs[i] > out.mean_probs[winner]) winner = i;
      }
    }
    out.label = task.labels[winner];
    result.rows.push_back(std::move(out));
  }
  return result;
}

EnsembleResult soft_vote(const EnsembleSpec& spec) {
  auto ids = check_members(spec.members);
  const TaskSpec& task = spec.members[0].task;

  for (const auto& m : spec.members)
    for (const auto& row : m.rows)
      if (row.probs.size() != task.num_labels())
        throw DataError("soft voting needs probability vectors; member '" +
                        m.model_name + "' lacks them (id " + row.id + ")");

  std::vector<std::map<std::string, const PredictionRow*>> by_id(
      spec.members.size());
  for (std::size_t m = 0; m < spec.members.size(); ++m)
    for (const auto& row : spec.members[m].rows)
      by_id[m][row.id] = &row;

  EnsembleResult result;
  result.task = task;
  result.spec_digest = digest(spec);
  result.rows.reserve(ids.size());

  for (const auto& id : ids) {
    std::vector<const PredictionRow*> rows;
    for (auto& m : by_id) rows.push_back(m.at(id));

    EnsembleRow out;
    out.id = id;
    out.votes.assign(task.num_labels(), 0);
    for (const auto* row : rows) ++out.votes[task.label_index(row->label)];
    out.mean_probs = mean_probs_for(rows, task);

    std::size_t winner = 0;
    for (std::size_t i = 1; i < out.mean_probs.size(); ++i)
      if (out.mean_probs[i] > out.mean_probs[winner]) winner = i;
    out.label = task.labels[winner];
    result.rows.push_back(std::move(out));
  }
  return result;
}

EnsembleResult cv_ensemble(const std::vector<PredictionSet>& prediction_sets) {
  EnsembleSpec spec;
  spec.members = prediction_sets;
  spec.mode = VoteMode::hard;
  spec.tie_rule = TieRule::soft_fallback;
  auto result = hard_vote(spec);
  result.spec_digest =
      "cv k=" + std::to_string(prediction_sets.size()) + " " + result.spec_digest;
  return result;
}

void write_ensemble_csv(const std::filesystem::path& path,
                        const EnsembleResult& result) {
  std::string buf = "id,label,tie_flag";
  for (const auto& l : result.task.labels) buf += ",votes_" + l;
  for (const auto& l : result.task.labels) buf += ",mean_p_" + l;
  buf += "\n";
  for (const auto& row : result.rows) {
    buf += row.id + "," + row.label + "," + (row.tie_flag ? "1" : "0");
    for (auto v : row.votes) buf += "," + std::to_string(v);
    for (auto p : row.mean_probs) buf += "," + format_double("%.9f", p);
    buf += "\n";
  }
  write_file(path, buf);
}

void write_submission_csv(const std::filesystem::path& path,
                          const EnsembleResult& result) {
  std::string buf;
  for (const auto& row : result.rows) buf += row.id + "," + row.label + "\n";
  write_file(path, buf);
}

}  // namespace olp
