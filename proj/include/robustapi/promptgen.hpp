#pragma once

// Benchmark prompts for the zero-shot and one-shot settings.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "robustapi/corpus.hpp"

namespace robustapi {

enum class PromptMode { ZeroShot, OneShotIrrelevant, OneShotRelevant };

std::string_view to_string(PromptMode mode);
/// "zero-shot", "one-shot-irrelevant", "one-shot-relevant"; throws std::invalid_argument.
PromptMode parse_prompt_mode(std::string_view text);

/// `api` value of the demonstration that uses an unrelated API.
inline constexpr std::string_view kIrrelevantDemo = "IRRELEVANT";

struct DemoExample {
  std::string api;  // Class.method or kIrrelevantDemo
  std::string question;
  std::string answer;

  bool relevant() const { return api != kIrrelevantDemo; }
};

class DemoMisuse : public std::runtime_error {
 public:
  DemoMisuse(std::string api, const std::string& why)
      : std::runtime_error("demonstration for " + api + " does not pass its own check: " + why),
        api_(std::move(api)) {}
  const std::string& api() const { return api_; }

 private:
  std::string api_;
};

class MissingDemo : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DemoStore {
 public:
  /// One relevant demonstration per API and at most one irrelevant one;
  /// throws SchemaError on a duplicate.
  void add(DemoExample demo);
  const DemoExample* for_api(std::string_view api) const;
  const DemoExample* irrelevant() const { return irrelevant_ ? &*irrelevant_ : nullptr; }
  std::size_t size() const { return relevant_.size() + (irrelevant_ ? 1 : 0); }
  std::vector<DemoExample> all() const;

 private:
  std::map<std::string, DemoExample, std::less<>> relevant_;
  std::optional<DemoExample> irrelevant_;
};

/// Demo answers are checked the same way model responses are; a relevant
/// demo is accepted only with status pass.
void validate_demo(const DemoExample& demo, const RuleRegistry& registry,
                   const ExtractOptions& extract = {});

/// One {api, question, answer} record per line; every relevant demo is
/// validated. Throws SchemaError or DemoMisuse.
DemoStore parse_demos(std::string_view text, const RuleRegistry& registry = default_rules(),
                      const ExtractOptions& extract = {});
DemoStore load_demos(const std::string& path, const RuleRegistry& registry = default_rules(),
                     const ExtractOptions& extract = {});
/// The demonstration set compiled into the library.
const DemoStore& builtin_demos();

struct PromptConfig {
  std::string instruction =
      "Answer the Java programming question below. Give a short explanation and then the "
      "complete code in a single ```java fenced block. Use the API named on the API line and "
      "write code that is safe to run in a real project.";
  std::string question_tag = "### Question";
  std::string answer_tag = "### Answer";
};

/// instruction, [demo question + answer], question, API hint, answer tag.
/// Throws MissingDemo when a one-shot mode has no suitable demonstration.
std::string build_prompt(const CorpusEntry& entry, PromptMode mode, const DemoStore& demos,
                         const PromptConfig& config = {});

struct PromptRecord {
  std::string id;
  std::string prompt;
  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

/// One prompt per dataset entry, in dataset order.
std::vector<PromptRecord> build_prompts(const std::vector<CorpusEntry>& dataset, PromptMode mode,
                                        const DemoStore& demos, const PromptConfig& config = {});

/// Line-delimited {id, prompt} records.
std::string format_prompt_records(const std::vector<PromptRecord>& prompts);
/// Throws SchemaError on malformed or duplicate records.
std::vector<PromptRecord> parse_prompt_records(std::string_view text);
std::vector<PromptRecord> load_prompt_records(const std::string& path);

}  // namespace robustapi
