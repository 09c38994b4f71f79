// Copyright 2026 The ctrlmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <curl/curl.h>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>

#include "ctrlmut/errors.hpp"
#include "ctrlmut/llmclient.hpp"

namespace ctrlmut {
namespace {

std::size_t write_callback(char* ptr, std::size_t size, std::size_t nmemb, void* userdata) {
  static_cast<std::string*>(userdata)->append(ptr, size * nmemb);
  return size * nmemb;
}

struct CurlHandleDeleter {
  void operator()(CURL* c) const { curl_easy_cleanup(c); }
};
struct CurlListDeleter {
  void operator()(curl_slist* l) const { curl_slist_free_all(l); }
};

enum class Outcome { ok, retry, timeout, fatal, auth };

struct HttpResult {
  Outcome outcome = Outcome::fatal;
  long status = 0;
  std::string body;
  std::string error;
};

HttpResult post_once(const ModelConfig& cfg, const std::string& api_key, const std::string& payload) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });

  std::unique_ptr<CURL, CurlHandleDeleter> curl(curl_easy_init());
  if (!curl) return {Outcome::fatal, 0, {}, "curl_easy_init failed"};

  std::unique_ptr<curl_slist, CurlListDeleter> headers(curl_slist_append(nullptr, "Content-Type: application/json"));
  const std::string auth = "Authorization: Bearer " + api_key;
  headers.reset(curl_slist_append(headers.release(), auth.c_str()));

  HttpResult r;
  curl_easy_setopt(curl.get(), CURLOPT_URL, cfg.endpoint_url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers.get());
  curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, payload.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(payload.size()));
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, write_callback);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &r.body);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(cfg.timeout_s * 1000.0));
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);

  const CURLcode rc = curl_easy_perform(curl.get());
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &r.status);
  if (rc == CURLE_OPERATION_TIMEDOUT) {
    r.outcome = Outcome::timeout;
    r.error = curl_easy_strerror(rc);
  } else if (rc != CURLE_OK) {
    r.outcome = Outcome::retry;
    r.error = curl_easy_strerror(rc);
  } else if (r.status == 401 || r.status == 403) {
    r.outcome = Outcome::auth;
    r.error = fmt::format("HTTP {}", r.status);
  } else if (r.status == 429 || r.status >= 500) {
    r.outcome = Outcome::retry;
    r.error = fmt::format("HTTP {}", r.status);
  } else if (r.status >= 400) {
    r.outcome = Outcome::fatal;
    r.error = fmt::format("HTTP {}: {}", r.status, r.body.substr(0, 300));
  } else {
    r.outcome = Outcome::ok;
  }
  return r;
}

}  // namespace

LiveBackend::LiveBackend(ModelConfig config) : config_(std::move(config)) { validate(config_, true); }

ChatExchange LiveBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) throw DomainError("chat request without messages");
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("API key variable " + config_.api_key_env + " is not set");
  }

  nlohmann::json body = {{"model", config_.model_name}, {"temperature", config_.temperature}};
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

  const auto start = std::chrono::steady_clock::now();
  HttpResult last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double wait = config_.initial_backoff_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    last = post_once(config_, key, payload);
    if (last.outcome == Outcome::auth) throw AuthError("authentication rejected: " + last.error);
    if (last.outcome == Outcome::fatal) throw TransportError("request failed: " + last.error);
    if (last.outcome != Outcome::ok) continue;

    ChatExchange ex;
    ex.request_messages = request.messages;
    ex.backend = "live";
    try {
      const auto j = nlohmann::json::parse(last.body);
      ex.response_text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage")) {
        const auto& u = j["usage"];
        ex.token_usage = {u.value("prompt_tokens", std::int64_t{0}), u.value("completion_tokens", std::int64_t{0}),
                          u.value("total_tokens", std::int64_t{0})};
      }
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed chat-completions response: ") + e.what());
    }
    ex.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return ex;
  }
  const std::string msg = fmt::format("giving up after {} attempts: {}", config_.max_retries + 1, last.error);
  if (last.outcome == Outcome::timeout) throw TimeoutError(msg);
  throw TransportError(msg);
}

}  // namespace ctrlmut
