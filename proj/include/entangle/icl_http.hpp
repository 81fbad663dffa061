#pragma once

// HTTP chat-completion transport. Requires cpp-httplib with OpenSSL for
// https endpoints (define CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL).

#include <cstdlib>
#include <regex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "entangle/icl.hpp"

namespace entangle {

class HttpTransport : public CompletionTransport {
 public:
  /// `endpoint` is a full URL such as https://host/v1/chat/completions. The
  /// bearer token is read from the environment variable `token_env`.
  HttpTransport(std::string endpoint, std::string token_env, int timeout_s = 60)
      : endpoint_(std::move(endpoint)), token_env_(std::move(token_env)), timeout_s_(timeout_s) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(endpoint_, m, url)) throw ValidationError("malformed endpoint URL '" + endpoint_ + "'");
    base_ = m[1];
    path_ = m[2].matched ? std::string(m[2]) : "/";
  }

  std::string send(const std::string& prompt, const GenerationParams& params) override {
    const char* token = std::getenv(token_env_.c_str());
    if (!token || !*token) throw TransportError("environment variable " + token_env_ + " is not set");
    nlohmann::json body{{"messages", {{{"role", "user"}, {"content", prompt}}}},
                        {"temperature", params.temperature},
                        {"max_tokens", params.max_tokens}};
    if (!params.model.empty()) body["model"] = params.model;
    httplib::Client cli(base_);
    cli.set_connection_timeout(timeout_s_);
    cli.set_read_timeout(timeout_s_);
    httplib::Headers headers{{"Authorization", std::string("Bearer ") + token}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint_);
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected completion body: ") + e.what());
    }
  }

 private:
  std::string endpoint_, token_env_, base_, path_;
  int timeout_s_;
};

}  // namespace entangle
