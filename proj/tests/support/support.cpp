#include "support.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <json.hpp>

namespace robustapi::testing {

std::filesystem::path fixture_dir() { return ROBUSTAPI_FIXTURE_DIR; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<RuleFixture> rule_fixtures() {
  static const std::regex name_re(R"((\d\d)_(compliant|violating)\.java)");
  static const std::regex api_re(R"(^// api: (\S+))");
  std::vector<RuleFixture> out;
  for (const auto& entry : std::filesystem::directory_iterator(fixture_dir() / "rules")) {
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, name_re)) continue;
    RuleFixture f;
    f.rule_id = std::stoi(m[1]);
    f.compliant = m[2] == "compliant";
    f.path = entry.path();
    f.text = read_text(entry.path());
    std::smatch a;
    if (!std::regex_search(f.text, a, api_re)) {
      throw std::runtime_error(name + " has no '// api:' line");
    }
    f.api = a[1];
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(),
            [](const RuleFixture& a, const RuleFixture& b) { return a.path < b.path; });
  return out;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("robustapi-test-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++) + "-" + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ScopedEnv::ScopedEnv(std::string name, const char* value) : name_(std::move(name)) {
  if (const char* old = std::getenv(name_.c_str())) old_ = old;
  if (value) {
    ::setenv(name_.c_str(), value, 1);
  } else {
    ::unsetenv(name_.c_str());
  }
}

ScopedEnv::~ScopedEnv() {
  if (old_) {
    ::setenv(name_.c_str(), old_->c_str(), 1);
  } else {
    ::unsetenv(name_.c_str());
  }
}

StubServer::StubServer()
    : StubServer([](const Request& req, std::size_t, int& status, std::string& body) {
        status = 200;
        body = completion_body("echo: " + prompt_of(req.body));
      }) {}

StubServer::StubServer(Handler handler) : handler_(std::move(handler)) {
  server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.get_header_value("Authorization"), req.body};
    std::size_t n;
    {
      std::lock_guard lock(mu_);
      received_.push_back(r);
      n = ++requests_;
    }
    int status = 200;
    std::string body;
    handler_(r, n, status, body);
    res.status = status;
    res.set_content(body, "application/json");
  });
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("stub server cannot bind");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

StubServer::~StubServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
}

std::vector<StubServer::Request> StubServer::received() const {
  std::lock_guard lock(mu_);
  return received_;
}

std::string StubServer::completion_body(const std::string& content) {
  nlohmann::json r = {
      {"id", "stub"},
      {"object", "chat.completion"},
      {"choices", {{{"index", 0},
                    {"message", {{"role", "assistant"}, {"content", content}}},
                    {"finish_reason", "stop"}}}},
  };
  return r.dump();
}

std::string StubServer::prompt_of(const std::string& body) {
  return nlohmann::json::parse(body).at("messages").at(0).at("content").get<std::string>();
}

}  // namespace robustapi::testing
