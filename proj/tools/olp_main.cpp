// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front-end. Flags are thin sugar over configuration keys; the
// real work happens behind the C API. Exit codes: 0 success, 2 usage/data
// error, 1 internal error.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "olp.h"

namespace {

struct ConfigDeleter {
  void operator()(olp_config* c) const { olp_config_free(c); }
};
using ConfigPtr = std::unique_ptr<olp_config, ConfigDeleter>;

int status_to_exit(olp_status s) {
  switch (s) {
    case OLP_OK:
      return 0;
    case OLP_E_USAGE:
    case OLP_E_DATA:
    case OLP_E_IO:
      return 2;
    default:
      return 1;
  }
}

// One pending key=value assignment; config files load first, flags after.
struct Assignment {
  std::string key;
  std::string value;
};

struct StageArgs {
  std::string config_file;
  std::vector<Assignment> assignments;
  std::vector<std::string> set_overrides;  // raw key=value from --set
};

int run(const StageArgs& args, const std::string& stage) {
  ConfigPtr cfg(olp_config_new());
  if (!cfg) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  if (!args.config_file.empty()) {
    auto s = olp_config_load_file(cfg.get(), args.config_file.c_str());
    if (s != OLP_OK) {
      std::fprintf(stderr, "error: %s\n", olp_last_error());
      return status_to_exit(s);
    }
  }
  for (const auto& a : args.assignments) {
    if (a.value.empty()) continue;  // unset flags leave stage defaults alone
    olp_config_set(cfg.get(), a.key.c_str(), a.value.c_str());
  }
  for (const auto& kv : args.set_overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return 2;
    }
    olp_config_set(cfg.get(), kv.substr(0, eq).c_str(),
                   kv.substr(eq + 1).c_str());
  }
  auto s = olp_run_stage(cfg.get(), stage.c_str());
  if (s != OLP_OK) {
    std::fprintf(stderr, "error: %s\n", olp_last_error());
    return status_to_exit(s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"olp - offensive language detection pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(olp_version()));

  // Per-subcommand state. Each flag records a config-key assignment.
  struct Sub {
    CLI::App* cmd = nullptr;
    StageArgs args;
    std::string stage;
  };
  std::vector<std::unique_ptr<Sub>> subs;

  auto add_stage = [&](const std::string& name, const std::string& desc) {
    auto sub = std::make_unique<Sub>();
    sub->stage = name;
    sub->cmd = app.add_subcommand(name, desc);
    sub->cmd->add_option("--config", sub->args.config_file,
                         "layered key-value config file");
    sub->cmd->add_option("--set", sub->args.set_overrides,
                         "raw config override key=value (repeatable)");
    subs.push_back(std::move(sub));
    return subs.back().get();
  };

  auto opt = [](Sub* sub, CLI::App* cmd, const std::string& flag,
                const std::string& key, const std::string& desc) {
    sub->args.assignments.push_back({key, ""});
    auto& slot = sub->args.assignments.back().value;
    return cmd->add_option(flag, slot, desc);
  };

  {
    auto* s = add_stage("preprocess", "normalize, dedup and sample a corpus");
    opt(s, s->cmd, "--input", "data.weak_corpus", "weak corpus TSV");
    opt(s, s->cmd, "--fraction", "preprocess.fraction", "sample fraction (default 0.05)");
    opt(s, s->cmd, "--out", "out", "output directory");
    opt(s, s->cmd, "--seed", "seed", "global seed");
  }
  {
    auto* s = add_stage("pretrain-mlm", "further pre-train with masked language modeling");
    opt(s, s->cmd, "--corpus", "data.corpus", "processed corpus (one tweet per line)");
    opt(s, s->cmd, "--model", "model", "registry model name");
    opt(s, s->cmd, "--checkpoint", "model.checkpoint", "input checkpoint");
    opt(s, s->cmd, "--task", "task", "task whose label count sizes the head (A/B/C)");
    opt(s, s->cmd, "--epochs", "mlm.epochs", "epochs (default 1)");
    opt(s, s->cmd, "--batch-size", "mlm.batch_size", "batch size (default 4)");
    opt(s, s->cmd, "--lr", "mlm.learning_rate", "learning rate (default 2e-5)");
    opt(s, s->cmd, "--mask-rate", "mlm.mask_rate", "mask rate (default 0.15)");
    opt(s, s->cmd, "--heldout-fraction", "mlm.heldout_fraction",
        "hold out this fraction for before/after loss stats");
    opt(s, s->cmd, "--out", "out", "output directory");
    opt(s, s->cmd, "--seed", "seed", "global seed");
  }
  {
    auto* s = add_stage("finetune", "supervised fine-tuning (single or --cv k)");
    opt(s, s->cmd, "--train", "data.olid_train", "OLID training TSV");
    opt(s, s->cmd, "--test", "data.olid_test",
        "OLID TSV used for validation (single) or as the prediction target (--cv)");
    opt(s, s->cmd, "--task", "task", "task A/B/C");
    opt(s, s->cmd, "--model", "model", "registry model name");
    opt(s, s->cmd, "--checkpoint", "model.checkpoint", "input checkpoint");
    opt(s, s->cmd, "--cv", "finetune.cv", "k-fold cross-validation (0 = single run)");
    opt(s, s->cmd, "--epochs", "finetune.epochs", "epochs (default 6)");
    opt(s, s->cmd, "--lr", "finetune.learning_rate", "learning rate (default 5e-6)");
    opt(s, s->cmd, "--batch-size", "finetune.batch_size",
        "batch size (default 4; 8 under --cv)");
    opt(s, s->cmd, "--max-len", "finetune.max_len", "max sequence length (default 128)");
    opt(s, s->cmd, "--stratified", "finetune.stratified",
        "label-stratified folds (0/1, default 0)");
    opt(s, s->cmd, "--out", "out", "output directory");
    opt(s, s->cmd, "--seed", "seed", "global seed");
  }
  {
    auto* s = add_stage("ensemble", "aggregate prediction files by voting");
    static std::vector<std::string> members;
    s->cmd->add_option("files", members, "member prediction CSVs (>= 2)");
    opt(s, s->cmd, "--mode", "ensemble.mode", "hard | soft (default hard)");
    opt(s, s->cmd, "--tie-rule", "ensemble.tie_rule",
        "soft_fallback | canonical_order");
    opt(s, s->cmd, "--task", "task", "task A/B/C");
    opt(s, s->cmd, "--out", "out", "output directory");
    opt(s, s->cmd, "--seed", "seed", "global seed");
    s->cmd->callback([s]() {
      std::string joined;
      for (const auto& m : members) {
        if (!joined.empty()) joined += ";";
        joined += m;
      }
      if (!joined.empty())
        s->args.assignments.push_back({"ensemble.members", joined});
    });
  }
  {
    auto* s = add_stage("evaluate", "metrics, report and confusion figure");
    opt(s, s->cmd, "--gold", "evaluate.gold", "gold OLID TSV");
    opt(s, s->cmd, "--pred", "evaluate.predictions",
        "prediction / ensemble / submission CSV");
    opt(s, s->cmd, "--baseline", "evaluate.baseline",
        "evaluate a constant baseline instead: all_not | all_off | majority_class");
    opt(s, s->cmd, "--task", "task", "task A/B/C");
    opt(s, s->cmd, "--samples", "evaluate.samples", "FP/FN samples (default 4)");
    opt(s, s->cmd, "--out", "out", "output directory");
    opt(s, s->cmd, "--seed", "seed", "global seed");
  }
  {
    auto* s = add_stage("report", "re-render table and figure from report.kv");
    opt(s, s->cmd, "--metrics", "report.metrics", "report.kv from evaluate");
    opt(s, s->cmd, "--out", "out", "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (auto& sub : subs)
    if (sub->cmd->parsed()) return run(sub->args, sub->stage);
  return 2;
}
