#pragma once

// Shared helpers for the test binaries: fixture paths, temp directories,
// environment overrides and a local chat-completion stub.

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

namespace robustapi::testing {

std::filesystem::path fixture_dir();
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

struct RuleFixture {
  int rule_id = 0;
  bool compliant = false;
  std::string api;   // from the `// api:` first line
  std::string text;  // whole file
  std::filesystem::path path;
};

/// tests/fixtures/rules/NN_{compliant,violating}.java, sorted by name.
std::vector<RuleFixture> rule_fixtures();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Sets (or unsets, with nullptr) an environment variable for its lifetime.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const char* value);
  ~ScopedEnv();
  ScopedEnv(const ScopedEnv&) = delete;
  ScopedEnv& operator=(const ScopedEnv&) = delete;

 private:
  std::string name_;
  std::optional<std::string> old_;
};

/// Local HTTP server answering POST /v1/chat/completions. By default it
/// replies with the prompt text prefixed by "echo: ".
class StubServer {
 public:
  struct Request {
    std::string authorization;
    std::string body;
  };
  /// Fills status and body for one request; `n` counts from 1.
  using Handler = std::function<void(const Request& req, std::size_t n, int& status,
                                     std::string& body)>;

  StubServer();
  explicit StubServer(Handler handler);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string base_url() const;
  std::size_t requests() const { return requests_.load(); }
  std::vector<Request> received() const;

  /// Chat-completion body whose assistant text is `content`.
  static std::string completion_body(const std::string& content);
  /// User message text of a request body.
  static std::string prompt_of(const std::string& body);

 private:
  httplib::Server server_;
  Handler handler_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
  mutable std::mutex mu_;
  std::vector<Request> received_;
};

}  // namespace robustapi::testing
