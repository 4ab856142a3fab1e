// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscagent/agents/prompts.hpp"

namespace osc::agents {

struct DecodingConfig {
  std::string model = "gpt-5";
  double temperature = 1.0;
  int max_tokens = 4096;
  std::optional<std::uint64_t> seed;  // forwarded when set
  double timeout_seconds = 120.0;

  void validate() const;
};

/// One chat request per call. Failures surface as AgentError with kind
/// BackendError or Timeout; retrying is the caller's business.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) = 0;
};

/// Appends structured records to a JSON-lines file and keeps them in memory.
/// Each record carries a sequence number and the current iteration/agent.
class RunLog {
 public:
  RunLog() = default;
  /// Truncates `path`; every record is flushed as soon as it is written.
  explicit RunLog(const std::string& path);

  void set_context(int iteration, std::string agent);
  void append(const std::string& type, const nlohmann::ordered_json& payload);
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  std::optional<std::ofstream> out_;
  std::string path_;
  std::vector<std::string> lines_;
  int iteration_ = 0;
  std::string agent_;
};

/// Canned replies served in order. An entry with an error kind fails that
/// request instead (for example "Timeout").
class ScriptedBackend : public LlmBackend {
 public:
  struct Reply {
    std::string content;
    std::string error;  // empty for a normal reply
  };

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> replies);
  explicit ScriptedBackend(std::vector<Reply> replies) : replies_(replies.begin(), replies.end()) {}
  /// Replays the `response` records of a run log.
  static ScriptedBackend from_log(const std::string& path);

  std::string send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) override;
  std::size_t remaining() const { return replies_.size(); }
  std::size_t served() const { return served_; }

 private:
  std::deque<Reply> replies_;
  std::size_t served_ = 0;
};

/// Forwards to another backend and writes a `request` and a `response`
/// record per call, so the log can later drive a ScriptedBackend.
class RecordingBackend : public LlmBackend {
 public:
  RecordingBackend(LlmBackend& inner, RunLog& log) : inner_(inner), log_(log) {}
  std::string send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) override;
  std::size_t requests() const { return requests_; }

 private:
  LlmBackend& inner_;
  RunLog& log_;
  std::size_t requests_ = 0;
};

struct HttpConfig {
  /// Scheme, host, optional port and optional path prefix.
  std::string base_url = "http://localhost:8000";
  /// Bearer token source; no Authorization header when unset.
  std::string api_key_env = "OSC_LLM_API_KEY";
};

/// Chat-completions client: POST {base}/v1/chat/completions.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpConfig cfg);
  std::string send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) override;

  /// The request body, exposed for tests.
  static nlohmann::ordered_json request_body(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding);
  /// Content of the first choice; BackendError when the shape is wrong.
  static std::string parse_response(const std::string& body);

 private:
  HttpConfig cfg_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // prefix + /v1/chat/completions
};

struct CallResult {
  std::string text;
  int attempts = 0;
};

/// Retries BackendError/Timeout up to `max_attempts` sends in total, then
/// rethrows as BackendError.
CallResult call_with_retries(LlmBackend& backend, const std::vector<ChatMessage>& messages,
                             const DecodingConfig& decoding, int max_attempts);

}  // namespace osc::agents
