#pragma once

// Batch client for OpenAI-style chat-completion endpoints.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustapi/promptgen.hpp"

namespace robustapi {

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Missing key, or the endpoint answered 401/403.
class AuthError : public LlmError {
 public:
  using LlmError::LlmError;
};
/// Still 429 after the last retry.
class RateLimited : public LlmError {
 public:
  using LlmError::LlmError;
};
class TransportError : public LlmError {
 public:
  using LlmError::LlmError;
};
class MalformedResponse : public LlmError {
 public:
  using LlmError::LlmError;
};

struct RetryPolicy {
  int attempts = 5;  // total tries per request, >= 1
  std::chrono::milliseconds backoff{1000};  // doubled after every failed try
};

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";  // POSTs to <base_url>/chat/completions
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 1024;
  /// Name of the environment variable that holds the key. The key itself is
  /// never stored.
  std::string api_key_env = "OPENAI_API_KEY";
  int max_parallel = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

/// Throws std::invalid_argument for out-of-range fields or a bad URL.
void validate(const EndpointConfig& cfg);

/// Sends the prompt as the single user message and returns the assistant
/// text verbatim. 429 and 5xx responses and connection failures are retried
/// per cfg.retry; 401/403 are not.
std::string complete(const std::string& prompt, const EndpointConfig& cfg);

struct BatchOptions {
  /// Stop issuing new requests once this many have completed in this run.
  std::optional<std::size_t> stop_after;
  /// Checked before every request; set it to interrupt the batch.
  const std::atomic<bool>* cancel = nullptr;
  /// Replaces the HTTP call, mainly for tests.
  std::function<std::string(const std::string& prompt)> completer;
};

struct BatchFailure {
  std::string id;
  std::string error;
};

struct BatchResult {
  std::vector<std::string> completed;  // ids with a response, dataset order
  std::vector<BatchFailure> failed;    // dataset order
  std::size_t requests_issued = 0;     // prompts sent in this run
  bool interrupted = false;
};

/// Checkpoint file kept next to the output.
std::string checkpoint_path(const std::string& out_path);

/// Queries every prompt not already in `<out>.ckpt`, at most
/// cfg.max_parallel at a time. Each answer is recorded in the checkpoint
/// (write to a temp file, then rename). When the batch was not interrupted,
/// `out` receives one {id, response, meta} line per completed prompt in
/// input order; the checkpoint is kept so a rerun only retries failures.
BatchResult run_batch(const std::vector<PromptRecord>& prompts, const EndpointConfig& cfg,
                      const std::string& out_path, const BatchOptions& options = {});

/// {"failed": [{"id", "error"}], "completed": n}
std::string failure_report(const BatchResult& result);

}  // namespace robustapi
