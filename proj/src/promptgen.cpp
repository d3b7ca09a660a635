#include "robustapi/promptgen.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "embedded_data.hpp"

namespace robustapi {

using nlohmann::json;

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::ZeroShot: return "zero-shot";
    case PromptMode::OneShotIrrelevant: return "one-shot-irrelevant";
    case PromptMode::OneShotRelevant: return "one-shot-relevant";
  }
  return "?";
}

PromptMode parse_prompt_mode(std::string_view text) {
  for (PromptMode m :
       {PromptMode::ZeroShot, PromptMode::OneShotIrrelevant, PromptMode::OneShotRelevant}) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown prompt mode '" + std::string(text) + "'");
}

void DemoStore::add(DemoExample demo) {
  if (!demo.relevant()) {
    if (irrelevant_) throw SchemaError("more than one irrelevant demonstration");
    irrelevant_ = std::move(demo);
    return;
  }
  std::string api = demo.api;
  if (!relevant_.emplace(api, std::move(demo)).second) {
    throw SchemaError("more than one demonstration for " + api);
  }
}

const DemoExample* DemoStore::for_api(std::string_view api) const {
  auto it = relevant_.find(api);
  return it == relevant_.end() ? nullptr : &it->second;
}

std::vector<DemoExample> DemoStore::all() const {
  std::vector<DemoExample> out;
  for (const auto& [api, d] : relevant_) out.push_back(d);
  if (irrelevant_) out.push_back(*irrelevant_);
  return out;
}

void validate_demo(const DemoExample& demo, const RuleRegistry& registry,
                   const ExtractOptions& extract) {
  if (!demo.relevant()) return;
  CorpusEntry entry{"demo", demo.api, demo.question, ""};
  ResponseRecord response{"demo", demo.answer, std::nullopt};
  EvalOptions options;
  options.extract = extract;
  SampleResult r = evaluate_response(entry, &response, registry, options);
  if (r.verdict.status != Status::Pass) {
    std::string why(to_string(r.verdict.status));
    if (r.verdict.best_rule) why += " (rule " + std::to_string(*r.verdict.best_rule) + ")";
    throw DemoMisuse(demo.api, why);
  }
}

DemoStore parse_demos(std::string_view text, const RuleRegistry& registry,
                      const ExtractOptions& extract) {
  DemoStore store;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string where = "demo line " + std::to_string(line_no);
    json r;
    try {
      r = json::parse(line);
    } catch (const json::parse_error&) {
      throw SchemaError(where + ": malformed JSON record");
    }
    DemoExample demo;
    for (auto [field, target] : {std::pair{"api", &demo.api}, std::pair{"question", &demo.question},
                                 std::pair{"answer", &demo.answer}}) {
      auto it = r.find(field);
      if (it == r.end() || !it->is_string()) {
        throw SchemaError(where + ": missing string field '" + field + "'");
      }
      *target = it->get<std::string>();
    }
    if (demo.relevant()) {
      try {
        ApiRef::parse(demo.api);
      } catch (const std::invalid_argument&) {
        throw SchemaError(where + ": api '" + demo.api + "' is not of the form Class.method");
      }
    }
    validate_demo(demo, registry, extract);
    store.add(std::move(demo));
  }
  return store;
}

DemoStore load_demos(const std::string& path, const RuleRegistry& registry,
                     const ExtractOptions& extract) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open demo file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_demos(buf.str(), registry, extract);
}

const DemoStore& builtin_demos() {
  static const DemoStore store = parse_demos(embedded::kDefaultDemos);
  return store;
}

std::string build_prompt(const CorpusEntry& entry, PromptMode mode, const DemoStore& demos,
                         const PromptConfig& config) {
  const DemoExample* demo = nullptr;
  if (mode == PromptMode::OneShotRelevant) {
    demo = demos.for_api(entry.api);
    if (!demo) throw MissingDemo("no demonstration for " + entry.api);
  } else if (mode == PromptMode::OneShotIrrelevant) {
    demo = demos.irrelevant();
    if (!demo) throw MissingDemo("no irrelevant demonstration");
    if (demo->api == entry.api) throw MissingDemo("irrelevant demonstration uses " + entry.api);
  }
  std::string out = config.instruction + "\n\n";
  if (demo) {
    out += config.question_tag + "\n" + demo->question + "\n\n";
    out += config.answer_tag + "\n" + demo->answer + "\n\n";
  }
  out += config.question_tag + "\n" + entry.question + "\n";
  out += "API: " + entry.api + "\n\n";
  out += config.answer_tag + "\n";
  return out;
}

std::vector<PromptRecord> build_prompts(const std::vector<CorpusEntry>& dataset, PromptMode mode,
                                        const DemoStore& demos, const PromptConfig& config) {
  std::vector<PromptRecord> out;
  out.reserve(dataset.size());
  for (const auto& entry : dataset) out.push_back({entry.id, build_prompt(entry, mode, demos, config)});
  return out;
}

std::string format_prompt_records(const std::vector<PromptRecord>& prompts) {
  std::string out;
  for (const auto& p : prompts) {
    out += json{{"id", p.id}, {"prompt", p.prompt}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<PromptRecord> parse_prompt_records(std::string_view text) {
  std::vector<PromptRecord> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string where = "prompt line " + std::to_string(line_no);
    json r;
    try {
      r = json::parse(line);
    } catch (const json::parse_error&) {
      throw SchemaError(where + ": malformed JSON record");
    }
    if (!r.is_object()) throw SchemaError(where + ": expected an object");
    PromptRecord rec;
    auto id = r.find("id");
    if (id != r.end() && id->is_number_integer()) {
      rec.id = std::to_string(id->get<long long>());
    } else if (id != r.end() && id->is_string()) {
      rec.id = id->get<std::string>();
    } else {
      throw SchemaError(where + ": missing field 'id'");
    }
    auto prompt = r.find("prompt");
    if (prompt == r.end() || !prompt->is_string()) {
      throw SchemaError(where + ": missing string field 'prompt'");
    }
    rec.prompt = prompt->get<std::string>();
    if (!seen.insert(rec.id).second) throw SchemaError(where + ": duplicate id '" + rec.id + "'");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PromptRecord> load_prompt_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prompt file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prompt_records(buf.str());
}

}  // namespace robustapi
