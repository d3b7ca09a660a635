#include "robustapi/llm_client.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "robustapi/corpus.hpp"

namespace robustapi {

using nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing '/'
};

Url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base URL '" + url + "' has no scheme");
  }
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw std::invalid_argument("unsupported URL scheme '" + scheme + "'");
  }
  auto path_begin = url.find('/', scheme_end + 3);
  Url out;
  out.origin = url.substr(0, path_begin);
  if (out.origin.size() == scheme_end + 3) throw std::invalid_argument("base URL has no host");
  out.path = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string read_key(const EndpointConfig& cfg) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("environment variable " + cfg.api_key_env + " is not set");
  }
  return key;
}

std::string extract_content(const std::string& body) {
  json r;
  try {
    r = json::parse(body);
  } catch (const json::parse_error&) {
    throw MalformedResponse("response body is not JSON");
  }
  try {
    const json& content = r.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponse("message content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw MalformedResponse("response has no choices[0].message.content");
  }
}

void write_atomically(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::map<std::string, std::string> load_checkpoint(const std::string& path) {
  std::map<std::string, std::string> done;
  std::ifstream in(path, std::ios::binary);
  if (!in) return done;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    json r = json::parse(buf.str());
    for (const auto& [id, response] : r.at("responses").items()) {
      done.emplace(id, response.get<std::string>());
    }
  } catch (const json::exception&) {
    throw SchemaError("checkpoint '" + path + "' is corrupt");
  }
  return done;
}

}  // namespace

void validate(const EndpointConfig& cfg) {
  split_url(cfg.base_url);
  if (cfg.model.empty()) throw std::invalid_argument("model name is empty");
  if (!(cfg.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (cfg.max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  if (cfg.api_key_env.empty()) throw std::invalid_argument("key variable name is empty");
  if (cfg.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
  if (cfg.retry.attempts < 1) throw std::invalid_argument("retry attempts must be >= 1");
  if (cfg.retry.backoff.count() < 0) throw std::invalid_argument("backoff must be >= 0");
}

std::string complete(const std::string& prompt, const EndpointConfig& cfg) {
  validate(cfg);
  const std::string key = read_key(cfg);
  const Url url = split_url(cfg.base_url);

  json body = {
      {"model", cfg.model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg.temperature},
      {"max_tokens", cfg.max_tokens},
  };
  const std::string payload = body.dump();
  const httplib::Headers headers = {{"Authorization", "Bearer " + key}};

  httplib::Client client(url.origin);
  client.set_connection_timeout(cfg.timeout);
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);

  auto delay = cfg.retry.backoff;
  for (int attempt = 1;; ++attempt) {
    const bool last = attempt >= cfg.retry.attempts;
    auto res = client.Post(url.path + "/chat/completions", headers, payload, "application/json");
    if (res) {
      int status = res->status;
      if (status == 200) return extract_content(res->body);
      if (status == 401 || status == 403) {
        throw AuthError("endpoint rejected the key (HTTP " + std::to_string(status) + ")");
      }
      if (status == 429) {
        if (last) {
          throw RateLimited("still rate limited after " + std::to_string(attempt) + " attempts");
        }
      } else if (status >= 500) {
        if (last) throw TransportError("HTTP " + std::to_string(status));
      } else {
        throw TransportError("HTTP " + std::to_string(status));
      }
    } else if (last) {
      throw TransportError("request failed: " + httplib::to_string(res.error()));
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

std::string checkpoint_path(const std::string& out_path) { return out_path + ".ckpt"; }

BatchResult run_batch(const std::vector<PromptRecord>& prompts, const EndpointConfig& cfg,
                      const std::string& out_path, const BatchOptions& options) {
  validate(cfg);
  const std::string ckpt = checkpoint_path(out_path);
  std::map<std::string, std::string> done = load_checkpoint(ckpt);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (!done.count(prompts[i].id)) todo.push_back(i);
  }

  auto completer = options.completer;
  if (!completer) completer = [&cfg](const std::string& p) { return complete(p, cfg); };

  std::mutex mu;
  std::size_t next = 0;
  std::size_t issued = 0;
  bool interrupted = false;
  std::map<std::string, std::string> failed;

  auto save_checkpoint = [&] {
    json r = {{"responses", json::object()}};
    for (const auto& [id, response] : done) r["responses"][id] = response;
    write_atomically(ckpt, r.dump() + "\n");
  };

  auto worker = [&] {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard lock(mu);
        if (next >= todo.size()) return;
        if ((options.cancel && options.cancel->load()) ||
            (options.stop_after && issued >= *options.stop_after)) {
          interrupted = true;
          return;
        }
        index = todo[next++];
        ++issued;
      }
      const PromptRecord& p = prompts[index];
      try {
        std::string response = completer(p.prompt);
        std::lock_guard lock(mu);
        done[p.id] = std::move(response);
        save_checkpoint();
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failed[p.id] = e.what();
      }
    }
  };

  std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel), todo.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  if (n_threads > 0) worker();
  for (auto& t : threads) t.join();

  BatchResult result;
  result.requests_issued = issued;
  result.interrupted = interrupted;
  std::string out;
  for (const auto& p : prompts) {
    if (auto it = done.find(p.id); it != done.end()) {
      result.completed.push_back(p.id);
      out += json{{"id", p.id}, {"response", it->second}, {"meta", {{"model", cfg.model}}}}.dump();
      out += '\n';
    } else if (auto f = failed.find(p.id); f != failed.end()) {
      result.failed.push_back({p.id, f->second});
    }
  }
  if (!interrupted) write_atomically(out_path, out);
  return result;
}

std::string failure_report(const BatchResult& result) {
  json failed = json::array();
  for (const auto& f : result.failed) failed.push_back({{"id", f.id}, {"error", f.error}});
  json r = {{"failed", failed}, {"completed", result.completed.size()}};
  return r.dump(2) + "\n";
}

}  // namespace robustapi
