#pragma once

// HTTP(S) transport for the VLM client, built on cpp-httplib.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "vlipp/error.hpp"
#include "vlipp/planner/vlm.hpp"

namespace vlipp::planner {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw precondition_error("vlm: endpoint url lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport final : public ChatTransport {
 public:
  explicit HttpTransport(VlmConfig cfg, std::chrono::milliseconds backoff = std::chrono::milliseconds(500))
      : cfg_(std::move(cfg)), endpoint_(split_url(cfg_.endpoint_url)), backoff_(backoff) {
    if (cfg_.max_retries < 0) throw precondition_error("vlm: max_retries must be nonnegative");
  }

  nlohmann::json send(const nlohmann::json& request) override {
    httplib::Client client(endpoint_.origin);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    if (!cfg_.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0') {
        client.set_bearer_token_auth(key);
      }
    }

    const std::string body = request.dump();
    std::string last_error;
    int attempts = 0;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      ++attempts;
      if (attempt > 0) std::this_thread::sleep_for(backoff_ * (1 << (attempt - 1)));
      auto res = client.Post(endpoint_.path, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error&) {
          throw network_error("vlm: response body is not JSON");
        }
      }
      last_error = "HTTP " + std::to_string(res->status);
      const bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable) break;
    }
    throw network_error("vlm: request failed after " + std::to_string(attempts) +
                        " attempt(s): " + last_error);
  }

 private:
  VlmConfig cfg_;
  Endpoint endpoint_;
  std::chrono::milliseconds backoff_;
};

}  // namespace vlipp::planner
