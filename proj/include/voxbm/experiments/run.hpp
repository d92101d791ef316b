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

// End-to-end experiment: ingest, clean, split, encode, optional cGAN
// augmentation of the training split, optional hyperparameter search, train,
// evaluate, and write the artifacts.
//
// Preprocessing statistics and the cGAN see only real training rows.
// Synthetic rows are appended to the training split after encoding and
// never reach validation or test.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/cgan/cgan.hpp"
#include "voxbm/conditioning/pipeline.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/experiments/bundle.hpp"
#include "voxbm/experiments/dataset.hpp"
#include "voxbm/experiments/metrics.hpp"
#include "voxbm/experiments/preprocess.hpp"
#include "voxbm/experiments/split.hpp"
#include "voxbm/hyperopt/bayes.hpp"
#include "voxbm/io/files.hpp"

namespace voxbm::experiments {

inline constexpr int kReportSchemaVersion = 1;

struct AugmentationConfig {
  double ratio = 0.0;
  cgan::CGANConfig cgan;
  cgan::Gates gates;
  cgan::ValidationConfig validation;
  bool compare_without = false;  // also run with ratio 0 and report the delta
};

struct HyperoptConfig {
  std::size_t budget = 0;  // 0 keeps the classifier defaults
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string dataset;     // CSV path; unused when a table is passed directly
  std::string output_dir;  // empty: no files written
  SplitMode split_mode = SplitMode::kStratifiedRandom;
  std::vector<double> ratios = {0.65, 0.15, 0.20};
  std::uint64_t split_seed = 0;
  AugmentationConfig augmentation;
  conditioning::ConditioningConfig conditioning;
  HyperoptConfig hyperopt;
  ClassifierConfig classifier;
  double threshold = kDefaultThreshold;
};

struct LeakageCheck {
  std::size_t synthetic_in_val = 0;
  std::size_t synthetic_in_test = 0;
  std::size_t preprocess_fit_rows = 0;
  std::size_t real_train_rows = 0;
  std::size_t cgan_fit_rows = 0;
  std::size_t subjects_shared_train_test = 0;

  bool passed(SplitMode mode) const {
    return synthetic_in_val == 0 && synthetic_in_test == 0 && preprocess_fit_rows == real_train_rows &&
           (cgan_fit_rows == 0 || cgan_fit_rows == real_train_rows) &&
           (mode != SplitMode::kSubjectWise || subjects_shared_train_test == 0);
  }
};

struct ExperimentReport {
  Metrics test;
  std::optional<Metrics> val;
  ModelBundle bundle;
  std::vector<neural::EpochRecord> history;
  int best_epoch = 0;
  std::optional<cgan::CGANTraining> gan;
  std::optional<cgan::AugmentResult> augmentation;
  std::vector<hyperopt::Trial> trials;
  CleanReport cleaning;
  LeakageCheck leakage;
  nlohmann::json summary;
  std::optional<nlohmann::json> delta;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.code(), std::string("stage '") + name + "': " + e.detail());
  }
}

inline ClassifierConfig apply_params(ClassifierConfig c, const hyperopt::Params& p) {
  if (auto it = p.find("learning_rate"); it != p.end()) c.learning_rate = hyperopt::as_double(it->second);
  if (auto it = p.find("dropout"); it != p.end()) c.dropout = hyperopt::as_double(it->second);
  if (auto it = p.find("batch_size"); it != p.end()) c.batch_size = static_cast<int>(hyperopt::as_double(it->second));
  const auto h1 = p.find("hidden1");
  const auto h2 = p.find("hidden2");
  if (h1 != p.end() && h2 != p.end()) {
    c.hidden = {static_cast<int>(hyperopt::as_double(h1->second)), static_cast<int>(hyperopt::as_double(h2->second))};
  }
  return c;
}

inline nlohmann::json delta_json(const Metrics& with, const Metrics& without) {
  nlohmann::json d = {{"accuracy", with.accuracy - without.accuracy}};
  const auto add = [&](const char* k, const std::optional<double>& a, const std::optional<double>& b) {
    if (a && b) d[k] = *a - *b;
  };
  add("precision", with.precision, without.precision);
  add("recall", with.recall, without.recall);
  add("f1", with.f1, without.f1);
  return d;
}

}  // namespace detail

inline std::string gan_losses_csv(const cgan::CGANTraining& t) { return cgan::loss_history_csv(t); }

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const RawTable& raw) {
  ExperimentReport rep;
  validate(cfg.conditioning);
  require(cfg.augmentation.ratio >= 0.0, ErrorCode::kBadConfig, "augmentation ratio must be >= 0");

  auto cleaned = detail::stage("clean", [&] { return clean(raw); });
  rep.cleaning = cleaned.report;
  const RawTable& table = cleaned.table;

  const auto parts = detail::stage("split", [&] {
    const auto idx = split_indices(cfg.split_mode, table.labels, table.subject_ids, cfg.ratios, cfg.split_seed);
    require(!idx.train.empty() && !idx.test.empty(), ErrorCode::kSplitImpossible,
            "train or test partition is empty");
    return Partitions<RawTable>{table.select(idx.train), table.select(idx.val), table.select(idx.test)};
  });

  auto record = detail::stage("encode", [&] { return fit_preprocess(parts.train); });
  record.cleaning = rep.cleaning;
  FeatureTable train = apply_preprocess(record, parts.train);
  const FeatureTable val = apply_preprocess(record, parts.val);
  const FeatureTable test = apply_preprocess(record, parts.test);
  rep.leakage.preprocess_fit_rows = parts.train.size();
  rep.leakage.real_train_rows = parts.train.size();

  if (cfg.augmentation.ratio > 0.0) {
    detail::stage("augment", [&] {
      rep.gan = cgan::train_cgan(train, cfg.augmentation.cgan);
      rep.leakage.cgan_fit_rows = train.size();
      rep.augmentation = cgan::augment(train, rep.gan->model, cfg.augmentation.ratio, cfg.augmentation.gates,
                                       cfg.augmentation.cgan.seed + 17, cfg.augmentation.validation);
      if (rep.augmentation->accepted) train = rep.augmentation->table;
      return 0;
    });
  }

  ClassifierConfig ccfg = cfg.classifier;
  if (cfg.hyperopt.budget > 0) {
    detail::stage("hyperopt", [&] {
      require(!val.empty(), ErrorCode::kBadConfig, "hyperparameter search needs a validation partition");
      const auto objective = [&](const hyperopt::Params& p) {
        const auto r = train_classifier(train, val, detail::apply_params(cfg.classifier, p));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& e : r.history) best = std::min(best, e.val_loss);
        return best;
      };
      const auto res = hyperopt::optimize(objective, hyperopt::default_classifier_space(), cfg.hyperopt.budget,
                                          cfg.hyperopt.seed);
      rep.trials = res.history;
      ccfg = detail::apply_params(cfg.classifier, res.best.params);
      return 0;
    });
  }

  const auto trained = detail::stage("train", [&] { return train_classifier(train, val, ccfg); });
  rep.history = trained.history;
  rep.best_epoch = trained.best_epoch;
  rep.bundle = make_bundle(record, trained.model, cfg.threshold);

  detail::stage("evaluate", [&] {
    rep.test = evaluate(trained.model, test, cfg.threshold);
    if (!val.empty()) rep.val = evaluate(trained.model, val, cfg.threshold);
    return 0;
  });

  rep.leakage.synthetic_in_val = val.count_provenance(Provenance::kSynthetic);
  rep.leakage.synthetic_in_test = test.count_provenance(Provenance::kSynthetic);
  std::set<std::string> train_subjects(parts.train.subject_ids.begin(), parts.train.subject_ids.end());
  train_subjects.erase("");
  std::set<std::string> test_subjects(parts.test.subject_ids.begin(), parts.test.subject_ids.end());
  for (const auto& s : test_subjects) rep.leakage.subjects_shared_train_test += train_subjects.count(s);
  require(rep.leakage.passed(cfg.split_mode), ErrorCode::kSchemaError, "leakage guard failed");

  nlohmann::json aug = {{"ratio", cfg.augmentation.ratio}};
  if (rep.augmentation) {
    aug["accepted"] = rep.augmentation->accepted;
    aug["synthetic_rows"] = rep.augmentation->synthetic_rows;
    aug["rejection_reasons"] = rep.augmentation->rejection_reasons;
    aug["cgan_epochs"] = cfg.augmentation.cgan.epochs;
    if (rep.augmentation->report) {
      aug["max_ks"] = rep.augmentation->report->max_ks();
      aug["auc"] = rep.augmentation->report->auc;
      aug["correlation_max_deviation"] = rep.augmentation->report->correlation_max_deviation;
    }
  }
  nlohmann::json hp = {{"budget", cfg.hyperopt.budget}};
  if (!rep.trials.empty()) {
    nlohmann::json best = nlohmann::json::object();
    for (const auto& [k, v] : hyperopt::summarize(rep.trials).best.params) best[k] = hyperopt::format_value(v);
    hp["best_params"] = best;
  }
  rep.summary = {
      {"schema_version", kReportSchemaVersion},
      {"dataset", cfg.dataset},
      {"model_id", rep.bundle.model_id},
      {"rows",
       {{"ingested", raw.size()},
        {"after_clean", table.size()},
        {"train_real", parts.train.size()},
        {"train_synthetic", train.count_provenance(Provenance::kSynthetic)},
        {"val", parts.val.size()},
        {"test", parts.test.size()}}},
      {"split", {{"mode", split_mode_name(cfg.split_mode)}, {"ratios", cfg.ratios}, {"seed", cfg.split_seed}}},
      {"conditioning", conditioning::conditioning_to_json(cfg.conditioning)},
      {"augmentation", aug},
      {"hyperopt", hp},
      {"classifier",
       {{"hidden", ccfg.hidden},
        {"dropout", ccfg.dropout},
        {"learning_rate", ccfg.learning_rate},
        {"batch_size", ccfg.batch_size},
        {"epochs", ccfg.epochs},
        {"early_stop_patience", ccfg.early_stop_patience},
        {"best_epoch", rep.best_epoch}}},
      {"test", metrics_to_json(rep.test)},
      {"cleaning", {{"dropped_rows", rep.cleaning.dropped.size()}, {"clipped_cells", rep.cleaning.clipped.size()}}},
      {"leakage",
       {{"passed", true},
        {"synthetic_rows_in_val", rep.leakage.synthetic_in_val},
        {"synthetic_rows_in_test", rep.leakage.synthetic_in_test},
        {"preprocess_fit_rows", rep.leakage.preprocess_fit_rows},
        {"cgan_fit_rows", rep.leakage.cgan_fit_rows},
        {"subjects_shared_train_test", rep.leakage.subjects_shared_train_test}}}};
  if (rep.val) rep.summary["val"] = metrics_to_json(*rep.val);

  const bool write = !cfg.output_dir.empty();
  if (cfg.augmentation.compare_without && cfg.augmentation.ratio > 0.0) {
    ExperimentConfig base = cfg;
    base.augmentation.ratio = 0.0;
    base.augmentation.compare_without = false;
    base.hyperopt.budget = 0;
    base.classifier = ccfg;
    if (write) base.output_dir = (std::filesystem::path(cfg.output_dir) / "without_augmentation").string();
    const auto baseline = run_experiment(base, raw);
    rep.delta = detail::delta_json(rep.test, baseline.test);
    rep.summary["delta_vs_without_augmentation"] = *rep.delta;
  }

  if (write) {
    detail::stage("write", [&] {
      const std::filesystem::path dir(cfg.output_dir);
      io::ensure_directory(dir);
      io::write_atomic(dir / "metrics.json", rep.summary.dump(2) + "\n");
      io::write_atomic(dir / "confusion_matrix.csv", confusion_matrix_csv(rep.test));
      io::write_atomic(dir / "training_curves.csv", training_curves_csv(rep.history));
      io::write_atomic(dir / "preprocess_record.json", preprocess_to_json(record).dump(2) + "\n");
      io::write_atomic(dir / "model.json", bundle_to_json(rep.bundle).dump() + "\n");
      if (rep.gan) io::write_atomic(dir / "gan_losses.csv", gan_losses_csv(*rep.gan));
      if (!rep.trials.empty()) io::write_atomic(dir / "hyperopt_trials.csv", hyperopt::history_to_csv(hyperopt::default_classifier_space(), rep.trials));
      return 0;
    });
  }
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto raw = detail::stage("ingest", [&] { return ingest_csv_file(cfg.dataset); });
  return run_experiment(cfg, raw);
}

// ---------------------------------------------------------------------------
// Configuration file

/// Relative paths in the file resolve against `base_dir`.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path.string() : (base_dir / path).string();
  };
  try {
    c.dataset = resolve(j.at("dataset").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    if (j.contains("split")) {
      const auto& s = j["split"];
      if (s.contains("mode")) c.split_mode = parse_split_mode(s["mode"].get<std::string>());
      if (s.contains("ratios")) c.ratios = s["ratios"].get<std::vector<double>>();
      c.split_seed = s.value("seed", c.split_seed);
    }
    if (j.contains("augmentation")) {
      const auto& a = j["augmentation"];
      auto& g = c.augmentation.cgan;
      c.augmentation.ratio = a.value("ratio", 0.0);
      g.epochs = a.value("epochs", g.epochs);
      g.latent_dim = a.value("latent_dim", g.latent_dim);
      g.learning_rate = a.value("learning_rate", g.learning_rate);
      g.batch_size = a.value("batch_size", g.batch_size);
      g.seed = a.value("seed", g.seed);
      c.augmentation.gates.max_ks = a.value("max_ks", c.augmentation.gates.max_ks);
      c.augmentation.gates.max_auc = a.value("max_auc", c.augmentation.gates.max_auc);
      c.augmentation.compare_without = a.value("compare_without_augmentation", false);
    }
    if (j.contains("conditioning")) {
      nlohmann::json cj = j["conditioning"];
      for (const char* key : {"dae_model", "calibration"}) {
        if (cj.contains(key)) cj[key] = resolve(cj[key].get<std::string>());
      }
      c.conditioning = conditioning::conditioning_from_json(cj);
    }
    if (j.contains("hyperopt")) {
      c.hyperopt.budget = j["hyperopt"].value("budget", std::size_t{0});
      c.hyperopt.seed = j["hyperopt"].value("seed", std::uint64_t{0});
    }
    if (j.contains("classifier")) {
      const auto& k = j["classifier"];
      auto& cc = c.classifier;
      if (k.contains("hidden")) cc.hidden = k["hidden"].get<std::vector<int>>();
      cc.dropout = k.value("dropout", cc.dropout);
      cc.learning_rate = k.value("learning_rate", cc.learning_rate);
      cc.batch_size = k.value("batch_size", cc.batch_size);
      cc.epochs = k.value("epochs", cc.epochs);
      cc.early_stop_patience = k.value("early_stop_patience", cc.early_stop_patience);
      cc.seed = k.value("seed", cc.seed);
    }
    c.threshold = j.value("threshold", c.threshold);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("bad experiment config: ") + e.what());
  }
  validate_ratios(c.ratios);
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  const std::filesystem::path p(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kBadConfig, std::string("config is not JSON: ") + e.what());
  }
  return experiment_config_from_json(j, p.parent_path());
}

}  // namespace voxbm::experiments
