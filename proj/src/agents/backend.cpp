// SPDX-License-Identifier: Apache-2.0
#include "oscagent/agents/backend.hpp"

#include <cmath>

namespace osc::agents {

void DecodingConfig::validate() const {
  if (model.empty()) throw AgentError("InvalidConfig", "decoding model name is empty");
  if (!std::isfinite(temperature) || temperature < 0.0) throw AgentError("InvalidConfig", "temperature must be >= 0");
  if (max_tokens < 1) throw AgentError("InvalidConfig", "max_tokens must be positive");
  if (!(timeout_seconds > 0.0)) throw AgentError("InvalidConfig", "timeout must be positive");
}

RunLog::RunLog(const std::string& path) : path_(path) {
  out_.emplace(path, std::ios::binary | std::ios::trunc);
  if (!*out_) throw AgentError("LogError", "cannot open run log " + path);
}

void RunLog::set_context(int iteration, std::string agent) {
  iteration_ = iteration;
  agent_ = std::move(agent);
}

void RunLog::append(const std::string& type, const nlohmann::ordered_json& payload) {
  nlohmann::ordered_json rec;
  rec["seq"] = lines_.size();
  rec["type"] = type;
  rec["iteration"] = iteration_;
  rec["agent"] = agent_;
  for (const auto& [k, v] : payload.items()) rec[k] = v;
  lines_.push_back(rec.dump());
  if (out_) {
    *out_ << lines_.back() << '\n';
    out_->flush();
    if (!*out_) throw AgentError("LogError", "write to run log " + path_ + " failed");
  }
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies) {
  for (auto& r : replies) replies_.push_back({std::move(r), ""});
}

ScriptedBackend ScriptedBackend::from_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AgentError("IoError", "cannot open script " + path);
  std::vector<Reply> replies;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.value("type", "") != "response") continue;
      Reply r;
      if (j.contains("error")) r.error = j.at("error").get<std::string>();
      else r.content = j.at("content").get<std::string>();
      replies.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw AgentError("BadScript", path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ScriptedBackend(std::move(replies));
}

std::string ScriptedBackend::send(const std::vector<ChatMessage>&, const DecodingConfig&) {
  if (replies_.empty()) throw AgentError("BackendError", "scripted backend has no replies left");
  Reply r = std::move(replies_.front());
  replies_.pop_front();
  ++served_;
  if (!r.error.empty()) throw AgentError(r.error, "scripted " + r.error);
  return r.content;
}

std::string RecordingBackend::send(const std::vector<ChatMessage>& messages, const DecodingConfig& decoding) {
  ++requests_;
  nlohmann::ordered_json req;
  req["model"] = decoding.model;
  req["temperature"] = decoding.temperature;
  req["max_tokens"] = decoding.max_tokens;
  req["messages"] = to_json(messages);
  log_.append("request", req);
  try {
    std::string text = inner_.send(messages, decoding);
    log_.append("response", {{"content", text}});
    return text;
  } catch (const AgentError& e) {
    log_.append("response", {{"error", e.kind()}, {"message", e.what()}});
    throw;
  }
}

CallResult call_with_retries(LlmBackend& backend, const std::vector<ChatMessage>& messages,
                             const DecodingConfig& decoding, int max_attempts) {
  if (max_attempts < 1) throw AgentError("InvalidConfig", "max_attempts must be positive");
  std::string last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    try {
      return {backend.send(messages, decoding), attempt};
    } catch (const AgentError& e) {
      if (e.kind() != "BackendError" && e.kind() != "Timeout") throw;
      last = e.kind() + ": " + e.what();
    }
  }
  throw AgentError("BackendError", "backend failed " + std::to_string(max_attempts) + " times; last: " + last);
}

}  // namespace osc::agents
