#include "robustapi/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

namespace robustapi {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string id_string(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw SchemaError(where + ": 'id' must be a string or an integer");
}

std::string required_string(const json& record, const char* field, const std::string& where) {
  auto it = record.find(field);
  if (it == record.end()) throw SchemaError(where + ": missing field '" + field + "'");
  if (!it->is_string()) throw SchemaError(where + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

// Records of a JSON array, or one record per non-blank line.
std::vector<json> parse_records(std::string_view text, bool allow_array) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  std::vector<json> records;
  if (first == std::string_view::npos) return records;
  if (allow_array && text[first] == '[') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("malformed JSON array: ") + e.what());
    }
    for (auto& r : doc) records.push_back(std::move(r));
    return records;
  }
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        records.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw SchemaError("line " + std::to_string(line_no) + ": malformed JSON record");
      }
    }
    start = end + 1;
  }
  return records;
}

}  // namespace

std::vector<CorpusEntry> parse_dataset(std::string_view text, std::ostream* warnings) {
  static const std::set<std::string> kFields = {"id", "api", "question", "origin"};
  std::vector<CorpusEntry> out;
  std::set<std::string> seen;
  std::vector<json> records = parse_records(text, true);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    std::string where = "record " + std::to_string(i);
    if (!r.is_object()) throw SchemaError(where + ": not an object");
    auto id_it = r.find("id");
    if (id_it == r.end()) throw SchemaError(where + ": missing field 'id'");
    CorpusEntry e;
    e.id = id_string(*id_it, where);
    where = "record '" + e.id + "'";
    e.api = required_string(r, "api", where);
    e.question = required_string(r, "question", where);
    e.origin = required_string(r, "origin", where);
    try {
      ApiRef::parse(e.api);
    } catch (const std::invalid_argument&) {
      throw SchemaError(where + ": api '" + e.api + "' is not of the form Class.method");
    }
    if (!seen.insert(e.id).second) throw SchemaError(where + ": duplicate id");
    if (warnings) {
      for (const auto& [key, value] : r.items()) {
        if (!kFields.count(key)) *warnings << "warning: " << where << ": ignoring field '" << key << "'\n";
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CorpusEntry> load_dataset(const std::string& path, std::ostream* warnings) {
  return parse_dataset(read_file(path), warnings);
}

std::vector<ResponseRecord> parse_responses(std::string_view text, std::ostream* warnings) {
  std::vector<ResponseRecord> out;
  std::vector<json> records = parse_records(text, false);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    std::string where = "response record " + std::to_string(i);
    if (!r.is_object()) throw SchemaError(where + ": not an object");
    auto id_it = r.find("id");
    if (id_it == r.end()) throw SchemaError(where + ": missing field 'id'");
    ResponseRecord rec;
    rec.id = id_string(*id_it, where);
    where = "response '" + rec.id + "'";
    rec.response = required_string(r, "response", where);
    if (auto m = r.find("meta"); m != r.end()) rec.meta = *m;
    if (warnings) {
      for (const auto& [key, value] : r.items()) {
        if (key != "id" && key != "response" && key != "meta") {
          *warnings << "warning: " << where << ": ignoring field '" << key << "'\n";
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ResponseRecord> load_responses(const std::string& path, std::ostream* warnings) {
  return parse_responses(read_file(path), warnings);
}

// ---------------------------------------------------------------------------
// Code blocks

namespace {

std::string_view trim_view(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool looks_like_code(std::string_view line) {
  std::vector<java::Token> tokens;
  try {
    tokens = java::tokenize(line);
  } catch (const java::LexError&) {
    return false;
  }
  bool terminator = false;
  for (const auto& t : tokens) {
    if (t.kind == java::TokenKind::Error) return false;
    if (t.is(java::TokenKind::Separator, ";") || t.is(java::TokenKind::Separator, "{")) {
      terminator = true;
    }
  }
  return terminator;
}

}  // namespace

std::vector<std::string> extract_code_blocks(std::string_view response,
                                             const ExtractOptions& options) {
  std::vector<std::string> blocks;
  auto lines = split_lines(response);

  bool in_fence = false;
  std::string current;
  for (std::string_view line : lines) {
    std::string_view t = trim_view(line);
    if (t.starts_with("```")) {
      if (in_fence) {
        if (!current.empty()) current.pop_back();  // newline of the last line
        blocks.push_back(current);
        current.clear();
      }
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) {
      current.append(line);
      current.push_back('\n');
    }
  }
  if (in_fence && !trim_view(current).empty()) {
    current.pop_back();
    blocks.push_back(current);
  }
  blocks.erase(std::remove_if(blocks.begin(), blocks.end(),
                              [](const std::string& b) { return trim_view(b).empty(); }),
               blocks.end());
  if (!blocks.empty()) return blocks;

  if (!options.answer_tag.empty()) {
    std::size_t pos = 0;
    while ((pos = response.find(options.answer_tag, pos)) != std::string_view::npos) {
      std::size_t start = pos + options.answer_tag.size();
      // the section ends at the next "###" heading
      std::size_t end = response.find("\n###", start);
      std::string_view body = trim_view(response.substr(start, end - start));
      if (!body.empty()) blocks.emplace_back(body);
      pos = end == std::string_view::npos ? response.size() : end;
    }
    if (!blocks.empty()) return blocks;
  }

  for (std::string_view line : lines) {
    std::string_view t = trim_view(line);
    if (t.empty()) continue;
    if (looks_like_code(t)) blocks.emplace_back(trim_view(response));
    break;
  }
  return blocks;
}

// ---------------------------------------------------------------------------
// Evaluation

bool compiler_available(const std::string& javac) {
  std::string cmd = javac + " -version >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

namespace {

bool javac_accepts(const java::ParsedSnippet& parsed, const std::string& javac) {
  static std::atomic<unsigned long> counter{0};
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() /
                 ("robustapi-javac-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  std::string class_name = "__Harness";
  if (parsed.kind == java::SnippetKind::CompilationUnit) {
    static const std::regex public_type(R"(public\s+(?:final\s+|abstract\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*))");
    std::smatch m;
    if (std::regex_search(parsed.harnessed_text, m, public_type)) class_name = m[1];
  }
  fs::path file = dir / (class_name + ".java");
  {
    std::ofstream out(file);
    out << parsed.harnessed_text;
  }
  std::string cmd = javac + " -nowarn -d '" + dir.string() + "' '" + file.string() + "' >/dev/null 2>&1";
  bool ok = std::system(cmd.c_str()) == 0;
  std::error_code ec;
  fs::remove_all(dir, ec);
  return ok;
}

CheckVerdict check_block(const std::string& block, const RuleRegistry& registry, const ApiRef& api,
                         const EvalOptions& options) {
  CheckVerdict v;
  java::ParsedSnippet parsed;
  try {
    parsed = java::parse_snippet(block);
  } catch (const java::SyntaxError& e) {
    v.detail = std::string(e.what()) + " at offset " + std::to_string(e.offset());
    return v;
  } catch (const java::EmptyInput& e) {
    v.detail = e.what();
    return v;
  }
  if (options.use_compiler && !javac_accepts(parsed, options.javac)) {
    v.detail = "rejected by javac";
    return v;
  }
  TypeEnv env = infer_types(parsed.root);
  return check_sequence(extract_sequence(parsed.root, env, parsed.kind), registry, api);
}

}  // namespace

SampleResult evaluate_response(const CorpusEntry& entry, const ResponseRecord* response,
                               const RuleRegistry& registry, const EvalOptions& options) {
  SampleResult result;
  result.id = entry.id;
  result.api = entry.api;
  result.verdict.status = Status::NonParsable;
  if (response == nullptr) {
    result.verdict.detail = "no response";
    return result;
  }
  if (response->id != entry.id) throw IdMismatch(response->id);
  ApiRef api = ApiRef::parse(entry.api);
  auto blocks = extract_code_blocks(response->response, options.extract);
  if (blocks.empty()) result.verdict.detail = "no code block";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CheckVerdict v = check_block(blocks[i], registry, api, options);
    if (v.status != Status::NonParsable) {
      result.verdict = std::move(v);
      result.code_block_used = i;
      return result;
    }
    if (i == 0) result.verdict = std::move(v);
  }
  return result;
}

namespace {

std::vector<const ResponseRecord*> match_responses(const std::vector<CorpusEntry>& dataset,
                                                   const std::vector<ResponseRecord>& responses,
                                                   std::ostream* warnings) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.size(); ++i) index.emplace(dataset[i].id, i);
  std::vector<const ResponseRecord*> matched(dataset.size(), nullptr);
  for (const auto& r : responses) {
    auto it = index.find(r.id);
    if (it == index.end()) throw IdMismatch(r.id);
    if (matched[it->second] != nullptr) throw SchemaError("duplicate response id '" + r.id + "'");
    matched[it->second] = &r;
  }
  if (warnings) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (matched[i] == nullptr) {
        *warnings << "warning: no response for '" << dataset[i].id << "', counted as non-parsable\n";
      }
    }
  }
  return matched;
}

}  // namespace

std::vector<SampleResult> evaluate_corpus(const std::vector<CorpusEntry>& dataset,
                                          const std::vector<ResponseRecord>& responses,
                                          const RuleRegistry& registry, const EvalOptions& options,
                                          std::ostream* warnings) {
  auto matched = match_responses(dataset, responses, warnings);
  std::vector<SampleResult> results(dataset.size());
  const long n = static_cast<long>(dataset.size());
  // Each slot is written by exactly one iteration, so the output order is
  // the dataset order whatever the schedule.
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    results[i] = evaluate_response(dataset[i], matched[i], registry, options);
  }
  return results;
}

std::vector<SampleResult> evaluate_corpus_serial(const std::vector<CorpusEntry>& dataset,
                                                 const std::vector<ResponseRecord>& responses,
                                                 const RuleRegistry& registry,
                                                 const EvalOptions& options,
                                                 std::ostream* warnings) {
  auto matched = match_responses(dataset, responses, warnings);
  std::vector<SampleResult> results;
  results.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    results.push_back(evaluate_response(dataset[i], matched[i], registry, options));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Metrics

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw std::invalid_argument("rational needs num >= 0 and den > 0");
  std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::string Rational::percent() const {
  // hundredths of a percent, rounded half-up
  std::int64_t h = (num_ * 20000 + den_) / (2 * den_);
  std::string frac = std::to_string(h % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(h / 100) + "." + frac + "%";
}

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) throw std::invalid_argument("expected n/d");
  try {
    return Rational(std::stoll(std::string(text.substr(0, slash))),
                    std::stoll(std::string(text.substr(slash + 1))));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("expected n/d, got '" + std::string(text) + "'");
  }
}

Rational operator*(const Rational& a, const Rational& b) {
  // cross-reduce first to keep the intermediate products small
  std::int64_t g1 = std::gcd(a.num_, b.den_);
  std::int64_t g2 = std::gcd(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
}

void Counters::add(Status status) {
  ++n_total;
  switch (status) {
    case Status::Misuse: ++n_misuse; break;
    case Status::Pass: ++n_pass; break;
    case Status::ApiNotUsed:
      ++n_pass;
      ++n_api_not_used;
      break;
    case Status::NonParsable: ++n_noncomp; break;
  }
}

Rates rates_from(const Counters& c) {
  if (c.n_total <= 0) throw std::invalid_argument("counters are empty");
  if (c.n_misuse + c.n_pass + c.n_noncomp != c.n_total || c.n_api_not_used > c.n_pass ||
      c.n_misuse < 0 || c.n_pass < 0 || c.n_noncomp < 0 || c.n_api_not_used < 0) {
    throw std::invalid_argument("inconsistent counters");
  }
  Rates r;
  std::int64_t compilable = c.n_misuse + c.n_pass;
  if (compilable > 0) r.misuse_rate = Rational(c.n_misuse, compilable);
  r.compilation_rate = Rational(compilable, c.n_total);
  r.overall_misuse = Rational(c.n_misuse, c.n_total);
  return r;
}

EvalMetrics compute_metrics(const std::vector<SampleResult>& results) {
  if (results.empty()) throw EmptyResults();
  EvalMetrics m;
  for (const auto& r : results) m.counters.add(r.verdict.status);
  m.rates = rates_from(m.counters);
  return m;
}

std::map<std::string, ApiMetrics> per_api_breakdown(const std::vector<SampleResult>& results,
                                                    const std::vector<CorpusEntry>& dataset) {
  std::unordered_map<std::string, const CorpusEntry*> by_id;
  for (const auto& e : dataset) by_id.emplace(e.id, &e);
  std::map<std::string, ApiMetrics> out;
  for (const auto& r : results) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw IdMismatch(r.id);
    out[it->second->api].counters.add(r.verdict.status);
  }
  for (auto& [api, m] : out) m.rates = rates_from(m.counters);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  throw std::invalid_argument("unknown report format '" + std::string(text) + "'");
}

std::string_view extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return ".json";
    case ReportFormat::Csv: return ".csv";
    case ReportFormat::Markdown: return ".md";
  }
  return "";
}

namespace {

std::string rate_text(const std::optional<Rational>& r) {
  return r ? r->percent() : std::string(kUndefinedRate);
}

json counters_json(const Counters& c, const Rates& r) {
  json j;
  j["n_total"] = c.n_total;
  j["n_misuse"] = c.n_misuse;
  j["n_pass"] = c.n_pass;
  j["n_noncomp"] = c.n_noncomp;
  j["n_api_not_used"] = c.n_api_not_used;
  j["misuse_rate"] = r.misuse_rate ? json(r.misuse_rate->str()) : json(nullptr);
  j["misuse_rate_pct"] = rate_text(r.misuse_rate);
  j["compilation_rate"] = r.compilation_rate.str();
  j["compilation_rate_pct"] = r.compilation_rate.percent();
  j["overall_misuse"] = r.overall_misuse.str();
  j["overall_misuse_pct"] = r.overall_misuse.percent();
  return j;
}

std::pair<Counters, Rates> counters_from_json(const json& j) {
  Counters c;
  c.n_total = j.at("n_total").get<std::int64_t>();
  c.n_misuse = j.at("n_misuse").get<std::int64_t>();
  c.n_pass = j.at("n_pass").get<std::int64_t>();
  c.n_noncomp = j.at("n_noncomp").get<std::int64_t>();
  c.n_api_not_used = j.at("n_api_not_used").get<std::int64_t>();
  Rates r;
  if (!j.at("misuse_rate").is_null()) r.misuse_rate = Rational::parse(j["misuse_rate"].get<std::string>());
  r.compilation_rate = Rational::parse(j.at("compilation_rate").get<std::string>());
  r.overall_misuse = Rational::parse(j.at("overall_misuse").get<std::string>());
  return {c, r};
}

json sample_json(const SampleResult& s) {
  json j;
  j["id"] = s.id;
  j["api"] = s.api;
  j["status"] = std::string(to_string(s.verdict.status));
  j["best_rule"] = s.verdict.best_rule ? json(*s.verdict.best_rule) : json(nullptr);
  j["matched_len"] = s.verdict.matched_len;
  json missing = json::array();
  for (const auto& item : s.verdict.missing_items) missing.push_back(to_string(item));
  j["missing_items"] = missing;
  json alignment = json::array();
  for (const auto& [i, k] : s.verdict.alignment) alignment.push_back({i, k});
  j["alignment"] = alignment;
  j["code_block"] = s.code_block_used ? json(*s.code_block_used) : json(nullptr);
  j["detail"] = s.verdict.detail;
  return j;
}

SampleResult sample_from_json(const json& j) {
  SampleResult s;
  s.id = j.at("id").get<std::string>();
  s.api = j.at("api").get<std::string>();
  s.verdict.status = parse_status(j.at("status").get<std::string>());
  if (!j.at("best_rule").is_null()) s.verdict.best_rule = j["best_rule"].get<int>();
  s.verdict.matched_len = j.at("matched_len").get<std::size_t>();
  for (const auto& m : j.at("missing_items")) {
    s.verdict.missing_items.push_back(parse_rule_item(m.get<std::string>()));
  }
  for (const auto& a : j.at("alignment")) {
    s.verdict.alignment.emplace_back(a.at(0).get<std::size_t>(), a.at(1).get<std::size_t>());
  }
  if (!j.at("code_block").is_null()) s.code_block_used = j["code_block"].get<std::size_t>();
  s.verdict.detail = j.at("detail").get<std::string>();
  return s;
}

std::string csv_row(const std::string& label, const Counters& c, const Rates& r) {
  std::ostringstream out;
  out << label << ',' << c.n_total << ',' << c.n_misuse << ',' << c.n_pass << ',' << c.n_noncomp
      << ',' << c.n_api_not_used << ',' << rate_text(r.misuse_rate) << ','
      << r.compilation_rate.percent() << ',' << r.overall_misuse.percent() << '\n';
  return out.str();
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  const Counters& c = report.metrics.counters;
  const Rates& r = report.metrics.rates;
  switch (format) {
    case ReportFormat::Json: {
      json doc;
      doc["metrics"] = counters_json(c, r);
      json per_api = json::object();
      for (const auto& [api, m] : report.per_api) per_api[api] = counters_json(m.counters, m.rates);
      doc["per_api"] = per_api;
      json samples = json::array();
      for (const auto& s : report.samples) samples.push_back(sample_json(s));
      doc["samples"] = samples;
      return doc.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out =
          "api,n_total,n_misuse,n_pass,n_noncomp,n_api_not_used,misuse_rate,compilation_rate,"
          "overall_misuse\n";
      if (report.per_api.empty()) return out;
      for (const auto& [api, m] : report.per_api) out += csv_row(api, m.counters, m.rates);
      out += csv_row("TOTAL", c, r);
      return out;
    }
    case ReportFormat::Markdown: {
      std::ostringstream out;
      out << "## Metrics\n\n"
          << "| Metric | Value |\n|---|---|\n"
          << "| Samples | " << c.n_total << " |\n"
          << "| Misuse | " << c.n_misuse << " |\n"
          << "| Pass | " << c.n_pass << " |\n"
          << "| Non-compilable | " << c.n_noncomp << " |\n"
          << "| API not used (in Pass) | " << c.n_api_not_used << " |\n"
          << "| API Misuse Rate | " << rate_text(r.misuse_rate) << " |\n"
          << "| Compilation Rate | " << r.compilation_rate.percent() << " |\n"
          << "| Overall API Misuse | " << r.overall_misuse.percent() << " |\n";
      out << "\n## Misuse rate per API\n\n"
          << "| API | Samples | Misuse | Pass | Non-compilable | API not used | Misuse Rate |\n"
          << "|---|---|---|---|---|---|---|\n";
      for (const auto& [api, m] : report.per_api) {
        const Counters& k = m.counters;
        out << "| " << api << " | " << k.n_total << " | " << k.n_misuse << " | " << k.n_pass
            << " | " << k.n_noncomp << " | " << k.n_api_not_used << " | "
            << rate_text(m.rates.misuse_rate) << " |\n";
      }
      return out.str();
    }
  }
  return {};
}

Report load_report(std::string_view json_text) {
  try {
    json doc = json::parse(json_text);
    Report report;
    std::tie(report.metrics.counters, report.metrics.rates) = counters_from_json(doc.at("metrics"));
    for (const auto& [api, m] : doc.at("per_api").items()) {
      auto [counters, rates] = counters_from_json(m);
      report.per_api[api] = ApiMetrics{counters, rates};
    }
    for (const auto& s : doc.at("samples")) report.samples.push_back(sample_from_json(s));
    return report;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  } catch (const RuleParseError& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace robustapi
