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

// voxbm command-line tool.
//
// Exit codes: 0 success, 2 invalid input or configuration, 1 internal or
// storage failure.

#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "voxbm/biomarkers/summary.hpp"
#include "voxbm/cgan/cgan.hpp"
#include "voxbm/conditioning/calibration.hpp"
#include "voxbm/conditioning/noise.hpp"
#include "voxbm/conditioning/pipeline.hpp"
#include "voxbm/dsp/synth.hpp"
#include "voxbm/experiments/bundle.hpp"
#include "voxbm/experiments/dataset.hpp"
#include "voxbm/experiments/fixtures.hpp"
#include "voxbm/experiments/protocol.hpp"
#include "voxbm/experiments/run.hpp"
#include "voxbm/gateway/http.hpp"
#include "voxbm/gateway/qc.hpp"
#include "voxbm/gateway/service.hpp"
#include "voxbm/io/files.hpp"
#include "voxbm/io/wav.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace voxbm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, path + ": " + e.what());
  }
}

/// Numeric feature table with raw (unscaled) values from a cleaned CSV.
FeatureTable raw_feature_table(const std::string& csv) {
  const auto cleaned = experiments::clean(experiments::ingest_csv_file(csv)).table;
  const auto rec = experiments::fit_preprocess(cleaned, cleaned.numeric_columns);
  return experiments::apply_preprocess(rec, cleaned);
}

std::string feature_table_csv(const FeatureTable& t) {
  std::ostringstream s;
  s.precision(10);
  for (const auto& c : t.columns) s << c << ",";
  s << "status,provenance\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (double v : t.rows[i]) s << v << ",";
    s << t.labels[i] << "," << provenance_name(t.provenance[i]) << "\n";
  }
  return s.str();
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string wav;
  std::string task;
  bool diagnostics = false;
  bool qc = false;
};

int cmd_extract(const ExtractArgs& a) {
  const TaskCode task = parse_task(a.task);
  const auto w = io::read_wav(a.wav);
  const auto v = biomarkers::summarize_task(w, task);
  if (!a.diagnostics && !a.qc) {
    std::cout << biomarkers::to_json(v).dump(2) << "\n";
    return kExitOk;
  }
  nlohmann::json out = {{"bvm", biomarkers::to_json(v)}};
  if (a.diagnostics) out["diagnostics"] = biomarkers::diagnostics_json(v);
  if (a.qc) {
    const auto protocol = gateway::default_protocol();
    double min_s = 0.0;
    for (const auto& p : protocol) {
      if (p.code == task) min_s = p.min_duration_s;
    }
    out["qc"] = gateway::qc_to_json(gateway::qc_check(w, min_s));
  }
  print_json(out);
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& output_dir) {
  auto cfg = experiments::load_experiment_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto report = experiments::run_experiment(cfg);
  print_json(report.summary);
  return kExitOk;
}

struct SynthArgs {
  std::string table;
  std::string out_dir = "synth_out";
  cgan::CGANConfig cgan;
  std::size_t samples_per_class = 0;
  std::uint64_t sample_seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  const auto real = raw_feature_table(a.table);
  io::ensure_directory(a.out_dir);
  const auto trained = cgan::train_cgan(real, a.cgan);
  const fs::path out(a.out_dir);
  io::write_atomic(out / "cgan_model.json", cgan::cgan_to_json(trained.model).dump());
  io::write_atomic(out / "gan_losses.csv", cgan::loss_history_csv(trained));
  nlohmann::json summary = {{"rows", real.size()},
                            {"features", real.feature_count()},
                            {"epochs", a.cgan.epochs},
                            {"final_g_loss", trained.g_loss.back()},
                            {"final_d_loss", trained.d_loss.back()}};
  if (a.samples_per_class > 0) {
    FeatureTable synthetic = real.empty_like();
    synthetic.append(cgan::sample(trained.model, 0, a.samples_per_class, a.sample_seed));
    synthetic.append(cgan::sample(trained.model, 1, a.samples_per_class, a.sample_seed + 1));
    io::write_atomic(out / "synthetic.csv", feature_table_csv(synthetic));
    const auto rep = cgan::validate_synthetic(real, synthetic);
    summary["validation"] = {{"ks", rep.ks},
                             {"max_ks", rep.max_ks()},
                             {"correlation_max_deviation", rep.correlation_max_deviation},
                             {"auc", rep.auc}};
  }
  io::write_atomic(out / "synth_summary.json", summary.dump(2));
  print_json(summary);
  return kExitOk;
}

struct AugmentArgs {
  std::vector<std::string> inputs;
  std::string out_dir = "augmented";
  std::vector<double> snr_db = {20.0};
  std::string noise = "white";
  std::uint64_t seed = 1;
};

conditioning::NoiseProfile noise_profile(const std::string& kind, double snr, int sample_rate, std::uint64_t seed) {
  if (kind == "white") return conditioning::NoiseProfile::white(snr);
  if (kind == "chatter") return conditioning::NoiseProfile::recorded(conditioning::chatter_noise(10.0, sample_rate, seed), snr);
  if (kind == "household") {
    return conditioning::NoiseProfile::recorded(conditioning::household_noise(10.0, sample_rate, seed), snr);
  }
  require(fs::exists(kind), ErrorCode::kInvalidArgument,
          "noise must be white, chatter, household or a WAV path (got '" + kind + "')");
  return conditioning::NoiseProfile::recorded(io::read_wav(kind), snr);
}

int cmd_augment(const AugmentArgs& a) {
  io::ensure_directory(a.out_dir);
  nlohmann::json out = nlohmann::json::array();
  std::uint64_t seed = a.seed;
  for (const auto& in : a.inputs) {
    const auto clean = io::read_wav(in);
    const std::string noise_tag = fs::exists(a.noise) ? fs::path(a.noise).stem().string() : a.noise;
    for (double snr : a.snr_db) {
      const auto noisy = conditioning::mix_noise(clean, noise_profile(a.noise, snr, clean.sample_rate, seed), seed);
      std::ostringstream name;
      name << fs::path(in).stem().string() << "_" << noise_tag << "_snr" << snr << ".wav";
      const auto path = fs::path(a.out_dir) / name.str();
      io::write_atomic(path, std::span<const std::uint8_t>(io::encode_wav(noisy, io::WavEncoding::kFloat32)));
      out.push_back({{"input", in}, {"output", path.string()}, {"noise", a.noise}, {"snr_db", snr}, {"seed", seed}});
      ++seed;
    }
  }
  print_json(out);
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& table_path, std::optional<double> threshold) {
  auto bundle = experiments::load_bundle(model_path);
  if (threshold) bundle.threshold = *threshold;
  const auto cleaned = experiments::clean(experiments::ingest_csv_file(table_path));
  auto j = experiments::metrics_to_json(experiments::evaluate(bundle, cleaned.table));
  j["model_id"] = bundle.model_id;
  j["rows_dropped"] = cleaned.report.dropped.size();
  print_json(j);
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "gateway_data";
  std::string model;
  std::string conditioning;
};

int cmd_serve(const ServeArgs& a) {
  gateway::GatewayConfig cfg;
  cfg.data_dir = a.data_dir;
  if (!a.model.empty()) cfg.model = experiments::load_bundle(a.model);
  if (!a.conditioning.empty()) cfg.conditioning = conditioning::conditioning_from_json(read_json_file(a.conditioning));
  gateway::Gateway gw(cfg);

  // Block termination signals in every thread and wait for them here, so the
  // server is stopped from a normal thread rather than a signal handler.
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  httplib::Server server;
  gateway::install_routes(server, gw);
  require(server.bind_to_port(a.host, a.port), ErrorCode::kInvalidArgument,
          "cannot listen on " + a.host + ":" + std::to_string(a.port));
  std::cerr << "voxbm gateway listening on " << a.host << ":" << a.port << " (data " << a.data_dir << ", model "
            << (cfg.model ? cfg.model->model_id : std::string("none")) << ")\n";
  std::thread listener([&server] { server.listen_after_bind(); });
  int sig = 0;
  sigwait(&sigs, &sig);
  server.stop();
  listener.join();
  return kExitOk;
}

int cmd_report(const std::string& id, const std::string& data_dir) {
  gateway::GatewayConfig cfg;
  cfg.data_dir = data_dir;
  require(fs::exists(fs::path(data_dir) / "sessions"), ErrorCode::kUnknownSession, "no sessions under " + data_dir);
  gateway::Gateway gw(cfg);
  print_json(gw.report(id));
  return kExitOk;
}

struct FixtureArgs {
  std::string out_dir = "data";
  int subjects_per_class = 8;
  double seconds = 6.0;
  std::uint64_t seed = 1;
};

int cmd_fixtures(const FixtureArgs& a) {
  namespace fx = experiments::fixtures;
  const fs::path out(a.out_dir);
  io::ensure_directory(out);
  io::ensure_directory(out / "session");
  nlohmann::json written = nlohmann::json::array();
  const auto save = [&](const fs::path& p, const dsp::Waveform& w) {
    io::write_atomic(p, std::span<const std::uint8_t>(io::encode_wav(w)));
    written.push_back(p.string());
  };

  save(out / "calibration_sweep.wav", conditioning::calibration_sweep(fx::kFixtureRate));
  dsp::synth::VoiceParams vowel;
  vowel.f0_hz = 220.0;
  vowel.seconds = 6.0;
  vowel.sample_rate = fx::kFixtureRate;
  vowel.formants_hz = fx::vowel_i();
  save(out / "vowel_220hz_6s.wav", dsp::synth::vowel(vowel));
  vowel.seconds = 3.0;
  save(out / "vowel_220hz_3s.wav", dsp::synth::vowel(vowel));

  // One complete default-protocol session per class, each task slightly
  // longer than its minimum.
  for (int label : {0, 1}) {
    const auto seed = fx::subject_seed({}, label, 100);
    const auto profile = fx::class_profile(label, seed);
    for (const auto& t : gateway::default_protocol()) {
      const auto name = std::string(label ? "pd" : "hc") + "_" + task_name(t.code) + ".wav";
      save(out / "session" / name, fx::recording(t.code, profile, t.min_duration_s + 1.0, seed + static_cast<int>(t.code)));
    }
  }

  fx::CorpusSpec spec;
  spec.subjects_per_class = a.subjects_per_class;
  spec.seconds = a.seconds;
  spec.seed = a.seed;
  const auto table = experiments::protocol_table(fx::corpus(spec));
  io::write_atomic(out / "protocol_features.csv", experiments::raw_table_csv(table));
  written.push_back((out / "protocol_features.csv").string());

  const nlohmann::json experiment = {
      {"dataset", "protocol_features.csv"},
      {"output_dir", "protocol_run"},
      {"split", {{"mode", "subject_wise"}, {"ratios", {0.75, 0.25}}, {"seed", 1}}},
      {"classifier", {{"hidden", {8}}, {"dropout", 0.0}, {"learning_rate", 0.01}, {"batch_size", 16}, {"epochs", 150}}}};
  io::write_atomic(out / "protocol_experiment.json", experiment.dump(2));
  written.push_back((out / "protocol_experiment.json").string());
  print_json({{"written", written}, {"protocol_rows", table.size()}, {"protocol_columns", table.numeric_columns.size()}});
  return kExitOk;
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kStorageError ? kExitInternal : kExitInvalid; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice biomarker extraction, classifier training and screening gateway"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "voxbm 0.1.0");

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Print the biomarker vector of a WAV recording as JSON");
  c_extract->add_option("wav", extract.wav, "Input WAV file")->required();
  c_extract->add_option("--task", extract.task, "Task code, TASK1..TASK8")->required();
  c_extract->add_flag("--diagnostics", extract.diagnostics, "Include absent-feature reasons and quality info");
  c_extract->add_flag("--qc", extract.qc, "Include the gateway quality-control record");

  std::string train_config;
  std::string train_out;
  auto* c_train = app.add_subcommand("train", "Run an experiment from a JSON config");
  c_train->add_option("config", train_config, "Experiment config JSON")->required();
  c_train->add_option("--output-dir", train_out, "Override the config's output_dir");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Train a cGAN on a feature CSV and optionally sample from it");
  c_synth->add_option("--table", synth.table, "Feature CSV with a status column")->required();
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory");
  c_synth->add_option("--epochs", synth.cgan.epochs, "Training epochs");
  c_synth->add_option("--latent-dim", synth.cgan.latent_dim, "Latent dimension");
  c_synth->add_option("--learning-rate", synth.cgan.learning_rate, "Adam learning rate");
  c_synth->add_option("--batch-size", synth.cgan.batch_size, "Mini-batch size");
  c_synth->add_option("--seed", synth.cgan.seed, "Training seed");
  c_synth->add_option("--samples-per-class", synth.samples_per_class, "Synthetic rows to write per class");
  c_synth->add_option("--sample-seed", synth.sample_seed, "Sampling seed");

  AugmentArgs augment;
  auto* c_augment = app.add_subcommand("augment", "Mix noise into WAV files at target SNRs");
  c_augment->add_option("inputs", augment.inputs, "Clean WAV files")->required();
  c_augment->add_option("--out-dir", augment.out_dir, "Output directory");
  c_augment->add_option("--snr", augment.snr_db, "Target SNR in dB (repeatable)");
  c_augment->add_option("--noise", augment.noise, "white, chatter, household or a noise WAV path");
  c_augment->add_option("--seed", augment.seed, "First noise seed; incremented per output");

  std::string eval_model;
  std::string eval_table;
  std::optional<double> eval_threshold;
  auto* c_eval = app.add_subcommand("evaluate", "Score a feature CSV with a saved model");
  c_eval->add_option("--model", eval_model, "model.json written by train")->required();
  c_eval->add_option("--table", eval_table, "Feature CSV with a status column")->required();
  c_eval->add_option("--threshold", eval_threshold, "Override the model's decision threshold");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP gateway");
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "TCP port")->check(CLI::Range(1, 65535));
  c_serve->add_option("--data-dir", serve.data_dir, "Session storage directory");
  c_serve->add_option("--model", serve.model, "model.json for finalize");
  c_serve->add_option("--conditioning", serve.conditioning, "Conditioning config JSON");

  std::string report_id;
  std::string report_dir = "gateway_data";
  auto* c_report = app.add_subcommand("report", "Print a stored screening report");
  c_report->add_option("session_id", report_id, "Session id")->required();
  c_report->add_option("--data-dir", report_dir, "Session storage directory");

  FixtureArgs fixtures;
  auto* c_fixtures = app.add_subcommand("fixtures", "Write the synthetic fixture WAVs and protocol feature table");
  c_fixtures->add_option("--out-dir", fixtures.out_dir, "Output directory");
  c_fixtures->add_option("--subjects-per-class", fixtures.subjects_per_class, "Corpus subjects per class");
  c_fixtures->add_option("--seconds", fixtures.seconds, "Corpus recording length");
  c_fixtures->add_option("--seed", fixtures.seed, "Corpus seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*c_extract) return cmd_extract(extract);
    if (*c_train) return cmd_train(train_config, train_out);
    if (*c_synth) return cmd_synth(synth);
    if (*c_augment) return cmd_augment(augment);
    if (*c_eval) return cmd_evaluate(eval_model, eval_table, eval_threshold);
    if (*c_serve) return cmd_serve(serve);
    if (*c_report) return cmd_report(report_id, report_dir);
    if (*c_fixtures) return cmd_fixtures(fixtures);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
