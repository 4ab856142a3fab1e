// SPDX-License-Identifier: Apache-2.0
// Eigen must come before httplib: <resolv.h> defines _res as a macro.
#include "oscagent/agents/backend.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace osc::agents {

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {
  static const std::regex url(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.base_url, m, url)) {
    throw AgentError("InvalidConfig", "base URL must look like http(s)://host[:port][/prefix]: " + cfg_.base_url);
  }
  origin_ = m[1].str();
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/v1/chat/completions";
}

nlohmann::ordered_json HttpBackend::request_body(const std::vector<ChatMessage>& messages,
                                                 const DecodingConfig& decoding) {
  nlohmann::ordered_json body;
  body["model"] = decoding.model;
  body["messages"] = to_json(messages);
  body["temperature"] = decoding.temperature;
  body["max_tokens"] = decoding.max_tokens;
  if (decoding.seed) body["seed"] = *decoding.seed;
  return body;
}

std::string HttpBackend::parse_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw AgentError("BackendError", std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string HttpBackend::send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) {
  httplib::Client client(origin_);
  const double whole = std::floor(decoding.timeout_seconds);
  const auto sec = static_cast<time_t>(whole);
  const auto usec = static_cast<time_t>((decoding.timeout_seconds - whole) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto res = client.Post(path_, headers, request_body(messages, decoding).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
    throw AgentError(timeout ? "Timeout" : "BackendError", origin_ + path_ + ": " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw AgentError("BackendError",
                     origin_ + path_ + " returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  return parse_response(res->body);
}

}  // namespace osc::agents
