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

// Session service: persistence, upload processing and finalization.
//
// Layout under data_dir:
//   sessions/<id>/session.json
//   sessions/<id>/<TASK>_<attempt>.wav
//   sessions/<id>/<TASK>.json        latest result for the task
//   sessions/<id>/report.json        written once by finalize

#include <cctype>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/biomarkers/summary.hpp"
#include "voxbm/conditioning/pipeline.hpp"
#include "voxbm/experiments/bundle.hpp"
#include "voxbm/experiments/protocol.hpp"
#include "voxbm/gateway/qc.hpp"
#include "voxbm/gateway/session.hpp"
#include "voxbm/io/files.hpp"
#include "voxbm/io/wav.hpp"

namespace voxbm::gateway {

namespace fs = std::filesystem;

inline constexpr int kMinSampleRate = 8000;
inline constexpr int kMaxSampleRate = 48000;

inline const std::string kDisclaimer =
    "This result is a screening probability from a research model. It is not a diagnosis; "
    "consult a qualified clinician for assessment of Parkinson's disease.";

struct GatewayConfig {
  fs::path data_dir;
  std::vector<ProtocolTask> protocol = default_protocol();
  conditioning::ConditioningConfig conditioning;
  std::optional<experiments::ModelBundle> model;
  biomarkers::PitchConfig pitch;
};

struct TaskResult {
  TaskCode task = TaskCode::kTask1;
  int attempt = 0;
  std::string recording;
  TaskState state = TaskState::kFailed;
  QcRecord qc;
  std::vector<std::string> reasons;
  std::optional<biomarkers::BVMVector> bvm;
  std::vector<std::string> warnings;
};

inline nlohmann::json task_result_to_json(const TaskResult& r) {
  nlohmann::json j = {{"schema_version", kGatewaySchemaVersion},
                      {"task_code", task_name(r.task)},
                      {"attempt", r.attempt},
                      {"recording", r.recording},
                      {"state", state_name(r.state)},
                      {"qc", qc_to_json(r.qc)},
                      {"reasons", r.reasons},
                      {"warnings", r.warnings}};
  if (r.bvm) j["bvm"] = biomarkers::to_json(*r.bvm);
  return j;
}

inline TaskResult task_result_from_json(const nlohmann::json& j) {
  try {
    TaskResult r;
    r.task = parse_task(j.at("task_code").get<std::string>());
    r.attempt = j.at("attempt").get<int>();
    r.recording = j.at("recording").get<std::string>();
    r.state = parse_state(j.at("state").get<std::string>());
    r.qc = qc_from_json(j.at("qc"));
    r.reasons = j.at("reasons").get<std::vector<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("bvm")) r.bvm = biomarkers::bvm_from_json(j["bvm"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kStorageError, std::string("corrupt task record: ") + e.what());
  }
}

/// UCI column names derivable from phonation BVMs, averaged over the
/// phonation tasks present. Ratios stored as percentages in the BVM are
/// fractions in the UCI table.
inline std::map<std::string, double> uci_session_features(const std::vector<biomarkers::BVMVector>& tasks) {
  struct Map {
    const char* uci;
    const char* bvm;
    double scale;
  };
  static const Map kMap[] = {
      {"MDVP:Fo(Hz)", "f0_mean_hz", 1.0},        {"MDVP:Jitter(%)", "jitter_local_pct", 1.0},
      {"MDVP:Jitter(Abs)", "jitter_abs_s", 1.0}, {"MDVP:RAP", "jitter_rap_pct", 0.01},
      {"MDVP:PPQ", "jitter_ppq5_pct", 0.01},     {"Jitter:DDP", "jitter_ddp_pct", 0.01},
      {"MDVP:Shimmer", "shimmer_local_pct", 0.01}, {"MDVP:Shimmer(dB)", "shimmer_db", 1.0},
      {"Shimmer:APQ3", "shimmer_apq3_pct", 0.01}, {"Shimmer:APQ5", "shimmer_apq5_pct", 0.01},
      {"MDVP:APQ", "shimmer_apq11_pct", 0.01},   {"Shimmer:DDA", "shimmer_dda_pct", 0.01},
      {"NHR", "nhr_ratio", 1.0},                 {"HNR", "hnr_db", 1.0},
  };
  std::map<std::string, double> out;
  for (const auto& m : kMap) {
    double sum = 0.0;
    int n = 0;
    for (const auto& v : tasks) {
      if (v.task() != TaskCode::kTask1 && v.task() != TaskCode::kTask3) continue;
      if (const auto x = v.get(m.bvm)) {
        sum += *x;
        ++n;
      }
    }
    if (n > 0) out[m.uci] = m.scale * sum / n;
  }
  return out;
}

class Gateway {
 public:
  explicit Gateway(GatewayConfig cfg) : cfg_(std::move(cfg)) {
    require(!cfg_.protocol.empty(), ErrorCode::kBadConfig, "protocol has no tasks");
    conditioning::validate(cfg_.conditioning);
    io::ensure_directory(sessions_dir());
    recover();
  }

  const GatewayConfig& config() const { return cfg_; }
  bool model_loaded() const { return cfg_.model.has_value(); }

  Session create_session(const SubjectMetadata& subject = {}) {
    Session s;
    s.session_id = new_id();
    s.created_at = utc_timestamp();
    s.subject = subject;
    s.protocol = cfg_.protocol;
    for (const auto& t : s.protocol) s.tasks[t.code] = TaskStatus{};
    io::ensure_directory(session_dir(s.session_id));
    persist(s);
    auto e = std::make_shared<Entry>();
    e->session = s;
    std::lock_guard lk(map_mu_);
    sessions_[s.session_id] = e;
    return s;
  }

  Session get_session(const std::string& id) const {
    auto e = entry(id);
    std::shared_lock lk(e->mu);
    return e->session;
  }

  std::vector<std::string> session_ids() const {
    std::lock_guard lk(map_mu_);
    std::vector<std::string> out;
    for (const auto& [id, e] : sessions_) out.push_back(id);
    return out;
  }

  /// Per-task status plus the latest stored result, in protocol order.
  nlohmann::json tasks_json(const std::string& id) const {
    auto e = entry(id);
    std::shared_lock lk(e->mu);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : e->session.protocol) {
      const auto& st = e->session.tasks.at(p.code);
      nlohmann::json t = {{"task_code", task_name(p.code)},
                          {"min_duration_s", p.min_duration_s},
                          {"script", p.script},
                          {"state", state_name(st.state)},
                          {"attempts", st.attempts},
                          {"reasons", st.reasons}};
      const auto path = session_dir(id) / (task_name(p.code) + ".json");
      if (fs::exists(path)) t["result"] = nlohmann::json::parse(io::read_text_file(path.string()));
      out.push_back(std::move(t));
    }
    return out;
  }

  TaskResult upload(const std::string& id, const std::string& code_text, std::span<const std::uint8_t> wav) {
    auto e = entry(id);
    const TaskCode code = parse_task(code_text);
    dsp::Waveform w = io::decode_wav(wav);
    require(w.sample_rate >= kMinSampleRate && w.sample_rate <= kMaxSampleRate, ErrorCode::kBadAudioFormat,
            "sample rate " + std::to_string(w.sample_rate) + " Hz outside 8000..48000");

    double min_duration_s = 0.0;
    int attempt = 0;
    {
      std::unique_lock lk(e->mu);
      const ProtocolTask* task = e->session.find_task(code);
      require(task != nullptr, ErrorCode::kUnknownTask, code_text + " is not part of this session's protocol");
      min_duration_s = task->min_duration_s;
      // Another upload of this task is being processed; its outcome decides ours.
      e->idle.wait(lk, [&] { return e->session.tasks.at(code).state != TaskState::kRecorded; });
      auto& st = e->session.tasks.at(code);
      if (st.state == TaskState::kAccepted) {
        throw GatewayError(ErrorCode::kTaskAlreadyAccepted, code_text + " is already accepted",
                           {{"task_code", code_text}});
      }
      if (st.state == TaskState::kFailed) e->session.move(code, TaskState::kPending);
      attempt = ++st.attempts;
      io::write_atomic(session_dir(id) / recording_name(code, attempt), std::span<const std::uint8_t>(wav));
      e->session.move(code, TaskState::kRecorded);
      persist(e->session);
    }

    TaskResult r;
    r.task = code;
    r.attempt = attempt;
    r.recording = recording_name(code, attempt);
    try {
      process(w, min_duration_s, r);
    } catch (...) {
      std::unique_lock lk(e->mu);
      settle(*e, code, TaskState::kFailed, {"processing_error"});
      throw;
    }

    std::unique_lock lk(e->mu);
    require(e->session.tasks.at(code).state == TaskState::kRecorded, ErrorCode::kTaskAlreadyAccepted,
            code_text + " changed state during processing");
    io::write_atomic(session_dir(id) / (task_name(code) + ".json"), task_result_to_json(r).dump(2));
    settle(*e, code, r.state, r.reasons);
    return r;
  }

  /// Builds and stores the screening report. A finalized session returns
  /// its stored report unchanged.
  nlohmann::json finalize(const std::string& id) {
    auto e = entry(id);
    std::unique_lock lk(e->mu);
    const auto report_path = session_dir(id) / "report.json";
    if (e->session.finalized && fs::exists(report_path)) return nlohmann::json::parse(io::read_text_file(report_path.string()));

    const auto pending = e->session.unaccepted();
    if (!pending.empty()) {
      throw GatewayError(ErrorCode::kIncompleteSession, "tasks not accepted: " + join(pending),
                         {{"pending_tasks", pending}});
    }
    if (!cfg_.model) throw GatewayError(ErrorCode::kModelMissing, "no classifier model is loaded", nlohmann::json::object());
    const auto& model = *cfg_.model;

    std::vector<biomarkers::BVMVector> bvms;
    nlohmann::json per_task = nlohmann::json::object();
    for (const auto& p : e->session.protocol) {
      const auto r = task_result_from_json(
          nlohmann::json::parse(io::read_text_file((session_dir(id) / (task_name(p.code) + ".json")).string())));
      require(r.bvm.has_value(), ErrorCode::kStorageError, task_name(p.code) + " result has no features");
      per_task[task_name(p.code)] = biomarkers::to_json(*r.bvm);
      bvms.push_back(*r.bvm);
    }

    const auto features = model.schema == experiments::SchemaKind::kUci ? uci_session_features(bvms)
                                                                        : experiments::session_features(bvms);
    std::vector<std::string> missing;
    for (const auto& c : model.preprocess.numeric_inputs()) {
      if (!features.count(c)) missing.push_back(c);
    }
    if (!missing.empty()) {
      throw GatewayError(ErrorCode::kSchemaError,
                         "model '" + model.model_id + "' needs features this session cannot supply: " + join(missing),
                         {{"model_schema", experiments::schema_kind_name(model.schema)}, {"missing_features", missing}});
    }
    std::map<std::string, std::string> categorical;
    if (e->session.subject.sex) categorical["sex"] = *e->session.subject.sex;
    const double p = model.probability(features, categorical);

    nlohmann::json report = {{"schema_version", kGatewaySchemaVersion},
                             {"session_id", id},
                             {"created_at", utc_timestamp()},
                             {"model_id", model.model_id},
                             {"probability", p},
                             {"threshold", model.threshold},
                             {"decision", p >= model.threshold},
                             {"disclaimer", kDisclaimer},
                             {"tasks", per_task}};
    io::write_atomic(report_path, report.dump(2));
    e->session.finalized = true;
    persist(e->session);
    return report;
  }

  nlohmann::json report(const std::string& id) const {
    auto e = entry(id);
    std::shared_lock lk(e->mu);
    const auto path = session_dir(id) / "report.json";
    if (!fs::exists(path)) {
      throw GatewayError(ErrorCode::kUnknownSession, "session " + id + " has no report yet", {{"session_id", id}});
    }
    return nlohmann::json::parse(io::read_text_file(path.string()));
  }

  fs::path session_dir(const std::string& id) const { return sessions_dir() / id; }

 private:
  struct Entry {
    mutable std::shared_mutex mu;
    std::condition_variable_any idle;
    Session session;
  };

  static std::string recording_name(TaskCode code, int attempt) {
    return task_name(code) + "_" + std::to_string(attempt) + ".wav";
  }

  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
  }

  static bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
      if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  }

  fs::path sessions_dir() const { return cfg_.data_dir / "sessions"; }

  std::shared_ptr<Entry> entry(const std::string& id) const {
    std::lock_guard lk(map_mu_);
    const auto it = valid_id(id) ? sessions_.find(id) : sessions_.end();
    if (it == sessions_.end()) throw GatewayError(ErrorCode::kUnknownSession, "no session " + id, {{"session_id", id}});
    return it->second;
  }

  std::string new_id() {
    std::lock_guard lk(map_mu_);
    for (;;) {
      std::ostringstream s;
      s << std::hex;
      s.width(16);
      s.fill('0');
      s << rng_();
      if (!sessions_.count(s.str()) && !fs::exists(session_dir(s.str()))) return s.str();
    }
  }

  void persist(const Session& s) const {
    io::write_atomic(session_dir(s.session_id) / "session.json", session_to_json(s).dump(2));
  }

  // Caller holds the exclusive lock.
  void settle(Entry& e, TaskCode code, TaskState to, std::vector<std::string> reasons) {
    auto& st = e.session.tasks.at(code);
    if (st.state != TaskState::kRecorded) return;
    e.session.move(code, to);
    st.reasons = to == TaskState::kAccepted ? std::vector<std::string>{} : std::move(reasons);
    persist(e.session);
    e.idle.notify_all();
  }

  void process(const dsp::Waveform& w, double min_duration_s, TaskResult& r) const {
    const auto& cond = cfg_.conditioning;
    const dsp::Waveform calibrated =
        cond.calibration ? conditioning::apply_calibration(w, *cond.calibration) : w;
    r.qc = qc_check(calibrated, min_duration_s);
    if (r.qc.failed()) {
      r.state = TaskState::kFailed;
      r.reasons = r.qc.reasons();
      return;
    }
    auto stages = cond;
    stages.calibration.reset();
    try {
      const auto bvm = biomarkers::summarize_task(conditioning::condition(calibrated, stages), r.task, cfg_.pitch);
      for (const auto& [name, why] : bvm.absent_reasons()) r.warnings.push_back(name + ": " + why);
      r.bvm = bvm;
      r.state = TaskState::kAccepted;
    } catch (const Error& err) {
      r.state = TaskState::kFailed;
      r.reasons = {"extraction_failed:" + std::string(error_code_name(err.code()))};
    }
  }

  // A crash can leave a task in `recorded` or a half-written temp file.
  // The recording is kept and the task becomes failed so it can be retried.
  void recover() {
    for (const auto& d : fs::directory_iterator(sessions_dir())) {
      if (!d.is_directory()) continue;
      for (const auto& f : fs::directory_iterator(d.path())) {
        if (f.path().extension() == ".tmp") fs::remove(f.path());
      }
      const auto path = d.path() / "session.json";
      if (!fs::exists(path)) continue;
      Session s = session_from_json(nlohmann::json::parse(io::read_text_file(path.string()), nullptr, false));
      bool dirty = false;
      for (auto& [code, st] : s.tasks) {
        if (st.state == TaskState::kRecorded) {
          s.move(code, TaskState::kFailed);
          st.reasons = {"interrupted"};
          dirty = true;
        }
      }
      if (!s.finalized && fs::exists(d.path() / "report.json")) {
        s.finalized = true;
        dirty = true;
      }
      if (dirty) persist(s);
      auto e = std::make_shared<Entry>();
      e->session = std::move(s);
      sessions_[e->session.session_id] = e;
    }
  }

  GatewayConfig cfg_;
  mutable std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace voxbm::gateway
