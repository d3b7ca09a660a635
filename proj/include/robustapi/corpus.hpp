#pragma once

// Dataset and response ingestion, per-sample evaluation, metrics and reports.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robustapi/rules.hpp"

namespace robustapi {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IdMismatch : public std::runtime_error {
 public:
  explicit IdMismatch(std::string id)
      : std::runtime_error("response id '" + id + "' is not in the dataset"), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class EmptyResults : public std::invalid_argument {
 public:
  EmptyResults() : std::invalid_argument("no results to aggregate") {}
};

struct CorpusEntry {
  std::string id;
  std::string api;  // Class.method
  std::string question;
  std::string origin;
};

struct ResponseRecord {
  std::string id;
  std::string response;
  std::optional<nlohmann::json> meta;
};

/// A JSON array of records or one record per line. Ids may be strings or
/// integers. Unknown fields are reported on `warnings` and ignored.
std::vector<CorpusEntry> parse_dataset(std::string_view text, std::ostream* warnings = nullptr);
std::vector<CorpusEntry> load_dataset(const std::string& path, std::ostream* warnings = nullptr);

/// One {id, response, meta?} record per line.
std::vector<ResponseRecord> parse_responses(std::string_view text, std::ostream* warnings = nullptr);
std::vector<ResponseRecord> load_responses(const std::string& path,
                                           std::ostream* warnings = nullptr);

struct ExtractOptions {
  std::string answer_tag = "### Answer";
};

/// Fenced blocks in order; failing that, the text after each answer tag;
/// failing that, the whole response when its first non-blank line lexes as
/// Java containing `;` or `{`.
std::vector<std::string> extract_code_blocks(std::string_view response,
                                             const ExtractOptions& options = {});

struct EvalOptions {
  ExtractOptions extract;
  /// Also require blocks to compile with an external javac.
  bool use_compiler = false;
  std::string javac = "javac";
};

/// Runs `javac -version`; false when the compiler cannot be started.
bool compiler_available(const std::string& javac);

struct SampleResult {
  std::string id;
  std::string api;
  CheckVerdict verdict;
  std::optional<std::size_t> code_block_used;
};

/// First block whose verdict is not non-parsable decides. A missing response
/// counts as non-parsable.
SampleResult evaluate_response(const CorpusEntry& entry, const ResponseRecord* response,
                               const RuleRegistry& registry, const EvalOptions& options = {});

/// Results in dataset order. Throws IdMismatch for a response whose id is not
/// in the dataset and SchemaError for duplicate response ids. Entries without
/// a response are reported on `warnings`.
std::vector<SampleResult> evaluate_corpus(const std::vector<CorpusEntry>& dataset,
                                          const std::vector<ResponseRecord>& responses,
                                          const RuleRegistry& registry,
                                          const EvalOptions& options = {},
                                          std::ostream* warnings = nullptr);
/// Single-threaded reference implementation of evaluate_corpus.
std::vector<SampleResult> evaluate_corpus_serial(const std::vector<CorpusEntry>& dataset,
                                                 const std::vector<ResponseRecord>& responses,
                                                 const RuleRegistry& registry,
                                                 const EvalOptions& options = {},
                                                 std::ostream* warnings = nullptr);

// ---------------------------------------------------------------------------
// Metrics

/// Exact non-negative fraction in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  /// Percentage rounded half-up to two decimals, e.g. "42.86%".
  std::string percent() const;
  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }
  /// Parses "n/d".
  static Rational parse(std::string_view text);

  friend Rational operator*(const Rational& a, const Rational& b);
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Shown for a rate whose denominator is zero.
inline constexpr std::string_view kUndefinedRate = "—";

struct Counters {
  std::int64_t n_total = 0;
  std::int64_t n_misuse = 0;
  std::int64_t n_pass = 0;  // includes api-not-used
  std::int64_t n_noncomp = 0;
  std::int64_t n_api_not_used = 0;

  void add(Status status);
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct Rates {
  std::optional<Rational> misuse_rate;  // misuse / (misuse + pass); undefined with no compilable samples
  Rational compilation_rate;            // (misuse + pass) / total
  Rational overall_misuse;              // misuse / total

  friend bool operator==(const Rates&, const Rates&) = default;
};

/// Throws std::invalid_argument when the counters are inconsistent or empty.
Rates rates_from(const Counters& counters);

struct ApiMetrics {
  Counters counters;
  Rates rates;
  friend bool operator==(const ApiMetrics&, const ApiMetrics&) = default;
};

struct EvalMetrics {
  Counters counters;
  Rates rates;
  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

/// Throws EmptyResults for an empty list.
EvalMetrics compute_metrics(const std::vector<SampleResult>& results);

/// Groups by the dataset entry's API. Throws IdMismatch for unknown ids.
std::map<std::string, ApiMetrics> per_api_breakdown(const std::vector<SampleResult>& results,
                                                    const std::vector<CorpusEntry>& dataset);

// ---------------------------------------------------------------------------
// Reports

struct Report {
  EvalMetrics metrics;
  std::map<std::string, ApiMetrics> per_api;
  std::vector<SampleResult> samples;
};

enum class ReportFormat { Json, Csv, Markdown };

/// "json", "csv", "md" / "markdown"; throws std::invalid_argument.
ReportFormat parse_report_format(std::string_view text);
std::string_view extension(ReportFormat format);

/// JSON is canonical: sorted keys, samples in dataset order, rates as exact
/// fractions next to their rendered percentages.
std::string emit_report(const Report& report, ReportFormat format);
/// Inverse of the JSON rendering. Throws SchemaError.
Report load_report(std::string_view json_text);

}  // namespace robustapi
