#pragma once

// Usage-rule DSL, rule registry and the LCS-based matcher.
//
// Rule line syntax:
//   [ids] Class.method :: item,item,...
// where ids is an optional comma list of rule numbers and each item is one of
//   try  end  loop  if  else  finally  catch(Type)  catch(A|B)
//   name(sig)[@guard]   new Type(sig)[@guard]
// `sig` empty means any arity, `void` means no arguments, otherwise a comma
// list of coarse type names (arity is what gets checked). Guards use the
// operand language of GuardPredicate: rcv!=null, arg0<rcv.size(),
// rcv.hasNext(), !rcv.exists().

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robustapi/sequence.hpp"

namespace robustapi {

struct ApiRef {
  std::string cls;
  std::string method;

  /// Parses `Class.method`; throws std::invalid_argument otherwise.
  static ApiRef parse(std::string_view text);
  std::string str() const { return cls + "." + method; }

  friend bool operator==(const ApiRef&, const ApiRef&) = default;
  friend auto operator<=>(const ApiRef&, const ApiRef&) = default;
};

struct RuleItem {
  SeqKind kind = SeqKind::Call;  // End closes the innermost opener
  std::string name;              // Call: method or "new Type"; Catch: exception type(s)
  std::optional<std::vector<std::string>> arg_signature;  // nullopt: any arity
  std::optional<GuardPredicate> guard;

  static RuleItem control(SeqKind kind, std::string name = {});
  static RuleItem call(std::string name,
                       std::optional<std::vector<std::string>> signature = std::nullopt,
                       std::optional<GuardPredicate> guard = std::nullopt);

  friend bool operator==(const RuleItem&, const RuleItem&) = default;
};

/// DSL spelling of one item, e.g. `getAsString()@rcv!=null`.
std::string to_string(const RuleItem& item);

struct UsageRule {
  std::string api_class;
  std::string api_method;
  std::vector<RuleItem> items;
  std::vector<int> ids;     // first entry is the rule id; further entries are aliases
  std::string description;  // from the comment block above the rule line

  int rule_id() const { return ids.empty() ? 0 : ids.front(); }
  ApiRef api() const { return {api_class, api_method}; }
};

/// `[ids] Class.method :: items`; parse_rule(format(r)) reproduces r apart
/// from the description.
std::string format(const UsageRule& rule);

class RuleParseError : public std::runtime_error {
 public:
  RuleParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Every malformed line of a rule file, reported together.
class RuleFileError : public std::runtime_error {
 public:
  struct Entry {
    std::size_t line;
    std::size_t offset;
    std::string message;
  };
  explicit RuleFileError(std::vector<Entry> entries);
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

UsageRule parse_rule(std::string_view line);
/// One item in DSL spelling, e.g. `catch(IOException)`. Throws RuleParseError.
RuleItem parse_rule_item(std::string_view text);

class RuleRegistry {
 public:
  /// Throws std::invalid_argument on an empty rule or a reused id.
  void add(UsageRule rule);

  /// Rules for `api` in file order; empty when the API is unknown.
  const std::vector<UsageRule>& lookup(const ApiRef& api) const;
  bool contains(const ApiRef& api) const { return by_api_.count(api) > 0; }

  std::size_t api_count() const { return by_api_.size(); }
  /// Distinct rule objects (deduplicated rules count once).
  std::size_t rule_count() const { return order_.size(); }
  /// Rule numbers including aliases of deduplicated rules.
  std::vector<int> rule_ids() const;
  std::vector<ApiRef> apis() const;
  /// All rules in load order.
  std::vector<const UsageRule*> all() const;
  const UsageRule* find(int id) const;

 private:
  std::map<ApiRef, std::vector<UsageRule>> by_api_;
  std::vector<std::pair<ApiRef, std::size_t>> order_;
};

/// One rule per non-comment line; `#` starts a comment. Consecutive comment
/// lines directly above a rule become its description. Rules without ids are
/// numbered by position. Throws RuleFileError listing every bad line.
RuleRegistry load_rules(std::istream& in);
RuleRegistry load_rules_file(const std::string& path);
/// The rule set compiled into the library.
const RuleRegistry& default_rules();

// ---------------------------------------------------------------------------
// Matching

struct LcsResult {
  std::size_t length = 0;
  std::vector<std::pair<std::size_t, std::size_t>> alignment;  // (item index, token index)
};

/// Longest common subsequence of an n-item rule and an m-token sequence under
/// `match(i, j)`. Among maximal alignments, each item is paired with the
/// earliest token that still allows a maximal result.
template <typename Match>
LcsResult lcs_by(std::size_t n, std::size_t m, Match&& match) {
  // suffix[i][j]: LCS length of items[i..] and tokens[j..]
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  std::vector<std::vector<char>> eq(n, std::vector<char>(m, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      eq[i][j] = match(i, j) ? 1 : 0;
      std::size_t best = std::max(suffix[i + 1][j], suffix[i][j + 1]);
      if (eq[i][j]) best = std::max(best, suffix[i + 1][j + 1] + 1);
      suffix[i][j] = best;
    }
  }
  LcsResult result;
  result.length = suffix[0][0];
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m && suffix[i][j] > 0) {
    if (eq[i][j] && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      result.alignment.emplace_back(i, j);
      ++i;
      ++j;
    } else if (suffix[i + 1][j] == suffix[i][j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return result;
}

/// Whether rule item `item` (of a rule for `api`) can pair with token
/// `tokens[index]`. The earlier tokens are consulted for guards satisfied by
/// a preceding check call on the same receiver.
bool item_matches(const RuleItem& item, const std::vector<SeqToken>& tokens, std::size_t index,
                  const ApiRef& api);
/// Same, for a token without sequence context.
bool item_matches(const RuleItem& item, const SeqToken& token, const ApiRef& api);

LcsResult lcs(const std::vector<RuleItem>& items, const std::vector<SeqToken>& tokens,
              const ApiRef& api);

enum class Status { Misuse, Pass, NonParsable, ApiNotUsed };

std::string_view to_string(Status status);
/// Inverse of to_string; throws std::invalid_argument.
Status parse_status(std::string_view text);

struct CheckVerdict {
  Status status = Status::NonParsable;
  std::optional<int> best_rule;
  std::size_t matched_len = 0;
  std::vector<RuleItem> missing_items;
  std::vector<std::pair<std::size_t, std::size_t>> alignment;
  std::string detail;  // parse error message for non-parsable snippets
};

/// True when a CALL to api.method on a compatible (or unknown) receiver exists.
bool uses_api(const CallSequence& seq, const ApiRef& api);

CheckVerdict check_sequence(const CallSequence& seq, const RuleRegistry& registry,
                            const ApiRef& api);

CheckVerdict check_snippet(std::string_view text, const RuleRegistry& registry, const ApiRef& api);

}  // namespace robustapi
