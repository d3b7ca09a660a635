#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "robustapi/corpus.hpp"
#include "robustapi/llm_client.hpp"
#include "robustapi/promptgen.hpp"
#include "robustapi/rules.hpp"

namespace robustapi::cli {

namespace {

using nlohmann::json;

/// Usage, I/O and schema problems; always exit code 2.
class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Failure("cannot write '" + path + "'");
}

RuleRegistry registry_from(const std::string& path) {
  if (path.empty()) return default_rules();
  return load_rules_file(path);
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n') c = ' ';
  }
  return text;
}

std::string pattern_of(const UsageRule& rule) {
  std::string out;
  for (std::size_t i = 0; i < rule.items.size(); ++i) {
    if (i) out += ',';
    out += to_string(rule.items[i]);
  }
  return out;
}

std::string rate_text(const std::optional<Rational>& r) {
  return r ? r->percent() : std::string(kUndefinedRate);
}

void print_headline(const EvalMetrics& m, std::ostream& out) {
  out << "Misuse Rate " << rate_text(m.rates.misuse_rate) << "\n";
  out << "Compilation Rate " << m.rates.compilation_rate.percent() << "\n";
  out << "Overall Misuse " << m.rates.overall_misuse.percent() << "\n";
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string file;
  std::string api;
  std::string rules;
  std::string format = "text";
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  ApiRef api;
  try {
    api = ApiRef::parse(a.api);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  RuleRegistry registry = registry_from(a.rules);
  if (!registry.contains(api)) throw Failure("no rules for " + api.str());
  std::string text = read_file(a.file);

  CheckVerdict v = check_snippet(text, registry, api);
  const UsageRule* best = v.best_rule ? registry.find(*v.best_rule) : nullptr;

  if (a.format == "json") {
    json missing = json::array();
    for (const auto& item : v.missing_items) missing.push_back(to_string(item));
    json r = {{"file", a.file},
              {"api", api.str()},
              {"status", to_string(v.status)},
              {"best_rule", v.best_rule ? json(*v.best_rule) : json(nullptr)},
              {"description", best ? json(best->description) : json(nullptr)},
              {"matched_len", v.matched_len},
              {"missing_items", missing},
              {"detail", v.detail}};
    out << r.dump(2) << "\n";
  } else {
    out << a.file << ": " << to_string(v.status);
    if (v.status == Status::ApiNotUsed) out << " (counted as pass)";
    out << "\n";
    if (!v.detail.empty()) out << "  " << v.detail << "\n";
    if (best) {
      out << "  rule " << *v.best_rule << ": " << one_line(best->description) << "\n";
      out << "  pattern: " << pattern_of(*best) << "\n";
      out << "  matched " << v.matched_len << " of " << best->items.size() << " items\n";
    }
    if (!v.missing_items.empty()) {
      out << "  missing:";
      for (const auto& item : v.missing_items) out << " " << to_string(item);
      out << "\n";
    }
  }
  return (v.status == Status::Misuse || v.status == Status::NonParsable) ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
  std::string dataset;
  std::string responses;
  std::string rules;
  std::string out;
  std::string format = "json";
  bool use_compiler = false;
  std::string javac = "javac";
  std::string answer_tag = "### Answer";
  bool serial = false;
};

int cmd_scan(const ScanArgs& a, std::ostream& out, std::ostream& err) {
  ReportFormat format;
  try {
    format = parse_report_format(a.format);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  RuleRegistry registry = registry_from(a.rules);
  auto dataset = load_dataset(a.dataset, &err);
  auto responses = load_responses(a.responses, &err);
  for (const auto& entry : dataset) {
    if (!registry.contains(ApiRef::parse(entry.api))) {
      throw Failure("dataset entry " + entry.id + " names " + entry.api + ", which has no rules");
    }
  }

  EvalOptions options;
  options.extract.answer_tag = a.answer_tag;
  options.use_compiler = a.use_compiler;
  options.javac = a.javac;
  if (options.use_compiler && !compiler_available(options.javac)) {
    throw Failure("cannot run '" + options.javac + "'");
  }

  Report report;
  report.samples = a.serial ? evaluate_corpus_serial(dataset, responses, registry, options, &err)
                            : evaluate_corpus(dataset, responses, registry, options, &err);
  report.metrics = compute_metrics(report.samples);
  report.per_api = per_api_breakdown(report.samples, dataset);

  write_file(a.out, emit_report(report, ReportFormat::Json));
  if (format != ReportFormat::Json) {
    std::filesystem::path rendered(a.out);
    rendered.replace_extension(extension(format));
    write_file(rendered.string(), emit_report(report, format));
  }
  print_headline(report.metrics, out);
  return 0;
}

// ---------------------------------------------------------------------------

struct PromptsArgs {
  std::string dataset;
  std::string mode;
  std::string demos;
  std::string out;
  std::string rules;
};

int cmd_prompts(const PromptsArgs& a, std::ostream& out, std::ostream& err) {
  PromptMode mode;
  try {
    mode = parse_prompt_mode(a.mode);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  if (mode != PromptMode::ZeroShot && a.demos.empty()) {
    throw Failure(std::string(to_string(mode)) + " needs --demos (a file, or 'builtin')");
  }
  RuleRegistry registry = registry_from(a.rules);
  DemoStore demos;
  if (a.demos == "builtin") {
    demos = builtin_demos();
  } else if (!a.demos.empty()) {
    demos = load_demos(a.demos, registry);
  }
  auto dataset = load_dataset(a.dataset, &err);
  auto prompts = build_prompts(dataset, mode, demos);
  write_file(a.out, format_prompt_records(prompts));
  out << prompts.size() << " prompts written to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AskArgs {
  std::string prompts;
  std::string out;
  EndpointConfig endpoint;
  long long backoff_ms = 1000;
  long long timeout_s = 120;
};

int cmd_ask(AskArgs a, std::ostream& out, std::ostream& err) {
  a.endpoint.retry.backoff = std::chrono::milliseconds(a.backoff_ms);
  a.endpoint.timeout = std::chrono::seconds(a.timeout_s);
  try {
    validate(a.endpoint);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  auto prompts = load_prompt_records(a.prompts);
  BatchOptions options;
  options.cancel = &interrupt_flag();
  BatchResult result = run_batch(prompts, a.endpoint, a.out, options);

  out << result.completed.size() << " of " << prompts.size() << " prompts answered ("
      << result.requests_issued << " requests this run)\n";
  const std::string failures_path = a.out + ".failures.json";
  if (!result.failed.empty()) {
    write_file(failures_path, failure_report(result));
    err << result.failed.size() << " prompts failed, see " << failures_path << "\n";
    for (const auto& f : result.failed) err << "  " << f.id << ": " << f.error << "\n";
  } else {
    std::filesystem::remove(failures_path);
  }
  if (result.interrupted) {
    err << "interrupted; rerun the same command to resume\n";
    return 1;
  }
  return result.failed.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct RulesArgs {
  std::string rules;
  bool validate = false;
  bool list = false;
};

int cmd_rules(const RulesArgs& a, std::ostream& out) {
  if (a.validate == a.list) throw Failure("rules: give exactly one of --validate or --list");
  RuleRegistry registry = registry_from(a.rules);
  if (a.validate) {
    out << registry.rule_count() << " rules (" << registry.rule_ids().size() << " ids) for "
        << registry.api_count() << " APIs\n";
    return 0;
  }
  for (const UsageRule* rule : registry.all()) {
    for (std::size_t k = 0; k < rule->ids.size(); ++k) {
      out << rule->ids[k] << "\t" << rule->api().str() << "\t";
      if (k > 0) out << "(same rule as " << rule->ids[0] << ") ";
      out << one_line(rule->description) << "\t" << pattern_of(*rule) << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string in;
  std::string format = "md";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  ReportFormat format;
  try {
    format = parse_report_format(a.format);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  Report report = load_report(read_file(a.in));
  out << emit_report(report, format);
  return 0;
}

}  // namespace

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Static checker for Java API misuse in generated code"};
  app.name("robustapi");
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Check one Java snippet against the rules for an API");
  c->add_option("file", check.file, "Java source or snippet")->required();
  c->add_option("--api", check.api, "Target API as Class.method")->required();
  c->add_option("--rules", check.rules, "Rule file (default: built-in rules)");
  c->add_option("--format", check.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  ScanArgs scan;
  auto* s = app.add_subcommand("scan", "Evaluate a response file against a dataset");
  s->add_option("--dataset", scan.dataset, "Dataset (JSON array or JSON lines)")->required();
  s->add_option("--responses", scan.responses, "Responses (JSON lines {id, response})")
      ->required();
  s->add_option("--rules", scan.rules, "Rule file (default: built-in rules)");
  s->add_option("--out", scan.out, "Path of the JSON report")->required();
  s->add_option("--format", scan.format,
                "Extra rendering next to the JSON report: json, csv or md");
  s->add_flag("--use-compiler", scan.use_compiler, "Also require code blocks to compile");
  s->add_option("--javac", scan.javac, "Compiler used with --use-compiler");
  s->add_option("--answer-tag", scan.answer_tag, "Marker that starts an answer in a response");
  s->add_flag("--serial", scan.serial, "Evaluate on one thread");

  PromptsArgs prompts;
  auto* p = app.add_subcommand("prompts", "Build prompts for every dataset entry");
  p->add_option("--dataset", prompts.dataset, "Dataset (JSON array or JSON lines)")->required();
  p->add_option("--mode", prompts.mode, "zero-shot, one-shot-irrelevant or one-shot-relevant")
      ->required();
  p->add_option("--demos", prompts.demos, "Demonstration file, or 'builtin'");
  p->add_option("--rules", prompts.rules, "Rule file used to validate demonstrations");
  p->add_option("--out", prompts.out, "Output (JSON lines {id, prompt})")->required();

  AskArgs ask;
  auto* k = app.add_subcommand("ask", "Send prompts to a chat-completion endpoint");
  k->add_option("--prompts", ask.prompts, "Prompt file (JSON lines {id, prompt})")->required();
  k->add_option("--out", ask.out, "Responses file; progress is kept in <out>.ckpt")->required();
  k->add_option("--base-url", ask.endpoint.base_url, "Endpoint base URL");
  k->add_option("--model", ask.endpoint.model, "Model name");
  k->add_option("--temperature", ask.endpoint.temperature, "Sampling temperature");
  k->add_option("--max-tokens", ask.endpoint.max_tokens, "Maximum tokens per answer");
  k->add_option("--api-key-env", ask.endpoint.api_key_env,
                "Environment variable holding the API key");
  k->add_option("--max-parallel", ask.endpoint.max_parallel, "Requests in flight at once");
  k->add_option("--retry-attempts", ask.endpoint.retry.attempts, "Tries per request");
  k->add_option("--retry-backoff-ms", ask.backoff_ms, "First retry delay, doubled each time");
  k->add_option("--timeout", ask.timeout_s, "Per-request timeout in seconds");

  RulesArgs rules;
  auto* r = app.add_subcommand("rules", "Validate or list a rule file");
  r->add_option("--rules", rules.rules, "Rule file (default: built-in rules)");
  r->add_flag("--validate", rules.validate, "Parse the file and report its size");
  r->add_flag("--list", rules.list, "Print id, API, description and pattern of every rule");

  ReportArgs report;
  auto* o = app.add_subcommand("report", "Render a JSON report");
  o->add_option("--in", report.in, "JSON report written by scan")->required();
  o->add_option("--format", report.format, "json, csv or md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c->parsed()) return cmd_check(check, out);
    if (s->parsed()) return cmd_scan(scan, out, err);
    if (p->parsed()) return cmd_prompts(prompts, out, err);
    if (k->parsed()) return cmd_ask(ask, out, err);
    if (r->parsed()) return cmd_rules(rules, out);
    if (o->parsed()) return cmd_report(report, out);
  } catch (const RuleFileError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& entry : e.entries()) {
      err << "  line " << entry.line << ", offset " << entry.offset << ": " << entry.message
          << "\n";
    }
    return 2;
  } catch (const DemoMisuse& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace robustapi::cli
