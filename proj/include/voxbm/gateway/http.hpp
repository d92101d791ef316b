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

// HTTP/JSON front end for the gateway.

#include <string>

// Eigen must come before httplib: <resolv.h> defines a `_res` macro.
#include "voxbm/gateway/service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace voxbm::gateway {

inline constexpr std::size_t kMaxUploadBytes = 64u << 20;

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownTask: return 404;
    case ErrorCode::kTaskAlreadyAccepted:
    case ErrorCode::kIncompleteSession: return 409;
    case ErrorCode::kBadAudioFormat: return 415;
    case ErrorCode::kSchemaError: return 422;
    case ErrorCode::kModelMissing: return 503;
    case ErrorCode::kBadConfig:
    case ErrorCode::kFormatError:
    case ErrorCode::kInvalidArgument: return 400;
    default: return 500;
  }
}

inline nlohmann::json error_body(const std::string& code, const std::string& message, nlohmann::json details) {
  return {{"schema_version", kGatewaySchemaVersion},
          {"error_code", code},
          {"message", message},
          {"details", std::move(details)}};
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline bool is_wav_content_type(const std::string& ct) {
  const auto base = ct.substr(0, ct.find(';'));
  return base == "audio/wav" || base == "audio/x-wav" || base == "audio/wave" || base == "audio/vnd.wave";
}

namespace detail {

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const GatewayError& e) {
    send_json(res, http_status(e.code()), error_body(std::string(error_code_name(e.code())), e.detail(), e.details()));
  } catch (const Error& e) {
    send_json(res, http_status(e.code()),
              error_body(std::string(error_code_name(e.code())), e.detail(), nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    send_json(res, 400, error_body("invalid_argument", e.what(), nlohmann::json::object()));
  } catch (const std::exception& e) {
    send_json(res, 500, error_body("internal_error", e.what(), nlohmann::json::object()));
  }
}

}  // namespace detail

/// Registers the /v1 routes on `server`. The gateway must outlive it.
inline void install_routes(httplib::Server& server, Gateway& gw) {
  using httplib::Request;
  using httplib::Response;
  server.set_payload_max_length(kMaxUploadBytes);

  server.Get("/v1/health", [&gw](const Request&, Response& res) {
    nlohmann::json body = {{"schema_version", kGatewaySchemaVersion}, {"status", "ok"}, {"model_loaded", gw.model_loaded()}};
    if (gw.model_loaded()) body["model_id"] = gw.config().model->model_id;
    send_json(res, 200, body);
  });

  server.Post("/v1/sessions", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      SubjectMetadata subject;
      if (!req.body.empty()) {
        const auto j = nlohmann::json::parse(req.body);
        require(j.is_object(), ErrorCode::kInvalidArgument, "body must be a JSON object");
        if (j.contains("age_band")) subject.age_band = j["age_band"].get<std::string>();
        if (j.contains("sex")) subject.sex = j["sex"].get<std::string>();
      }
      send_json(res, 201, session_to_json(gw.create_session(subject)));
    });
  });

  server.Get(R"(/v1/sessions/([^/]+))", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] { send_json(res, 200, session_to_json(gw.get_session(req.matches[1]))); });
  });

  server.Get(R"(/v1/sessions/([^/]+)/tasks)", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      send_json(res, 200,
                {{"schema_version", kGatewaySchemaVersion},
                 {"session_id", std::string(req.matches[1])},
                 {"tasks", gw.tasks_json(req.matches[1])}});
    });
  });

  server.Put(R"(/v1/sessions/([^/]+)/tasks/([^/]+)/audio)", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      const auto ct = req.get_header_value("Content-Type");
      require(is_wav_content_type(ct), ErrorCode::kBadAudioFormat, "expected content-type audio/wav, got '" + ct + "'");
      const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
      const auto r = gw.upload(req.matches[1], req.matches[2], std::span<const std::uint8_t>(data, req.body.size()));
      send_json(res, 200, task_result_to_json(r));
    });
  });

  server.Post(R"(/v1/sessions/([^/]+)/finalize)", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] { send_json(res, 200, gw.finalize(req.matches[1])); });
  });

  server.Get(R"(/v1/reports/([^/]+))", [&gw](const Request& req, Response& res) {
    detail::guarded(res, [&] { send_json(res, 200, gw.report(req.matches[1])); });
  });
}

}  // namespace voxbm::gateway
