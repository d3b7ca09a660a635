#include "robustapi/rules.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded_data.hpp"

namespace robustapi {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

// Dotted type name with optional array suffixes: java.io.File, byte[]
bool is_type_name(std::string_view s) {
  while (s.ends_with("[]")) s.remove_suffix(2);
  if (s.empty()) return false;
  std::size_t start = 0;
  while (true) {
    auto dot = s.find('.', start);
    if (!is_identifier(s.substr(start, dot - start))) return false;
    if (dot == std::string_view::npos) return true;
    start = dot + 1;
  }
}

// Trimmed view plus the offset of its first character in the original.
struct Piece {
  std::string_view text;
  std::size_t offset = 0;
};

Piece trim(std::string_view s, std::size_t offset) {
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return {s.substr(b, e - b), offset + b};
}

std::vector<Piece> split_top_level(std::string_view s, std::size_t offset) {
  std::vector<Piece> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    char c = i < s.size() ? s[i] : ',';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ',' && depth <= 0) || i == s.size()) {
      out.push_back(trim(s.substr(start, i - start), offset + start));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void fail(const std::string& message, std::size_t offset) {
  throw RuleParseError(message, offset);
}

Operand parse_operand(Piece p) {
  std::string_view s = p.text;
  if (s == "rcv") return Operand::receiver();
  if (s == "null") return Operand::null();
  if (s == "true") return Operand::boolean(true);
  if (s == "false") return Operand::boolean(false);
  auto arg_index = [](std::string_view t) -> std::optional<std::int64_t> {
    if (t.size() < 4 || !t.starts_with("arg")) return std::nullopt;
    std::int64_t v = 0;
    for (char c : t.substr(3)) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  };
  if (auto k = arg_index(s)) return Operand::argument(*k);
  {
    std::string_view digits = s.starts_with('-') ? s.substr(1) : s;
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      try {
        return Operand::integer(std::stoll(std::string(s)));
      } catch (const std::out_of_range&) {
        fail("integer out of range", p.offset);
      }
    }
  }
  auto dot = s.find('.');
  if (dot != std::string_view::npos && s.ends_with("()")) {
    std::string_view base = s.substr(0, dot);
    std::string_view method = s.substr(dot + 1, s.size() - dot - 3);
    if (!is_identifier(method)) fail("bad method name in guard operand", p.offset + dot + 1);
    if (base == "rcv") return Operand::call_on(Operand::receiver(), std::string(method));
    if (auto k = arg_index(base)) return Operand::call_on(Operand::argument(*k), std::string(method));
    fail("call operand must be on rcv or argN", p.offset);
  }
  fail("unknown guard operand '" + std::string(s) + "'", p.offset);
}

GuardPredicate parse_guard(Piece p) {
  std::string_view s = p.text;
  if (s.empty()) fail("empty guard", p.offset);
  if (s[0] == '!' && (s.size() < 2 || s[1] != '=')) {
    Operand subject = parse_operand(trim(s.substr(1), p.offset + 1));
    if (subject.is_constant()) fail("cannot negate a constant", p.offset);
    return GuardPredicate::compare(subject, GuardOp::Eq, Operand::boolean(false));
  }
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth != 0) continue;
    std::string_view two = s.substr(i, 2);
    std::optional<GuardOp> op;
    std::size_t len = 2;
    if (two == "==") op = GuardOp::Eq;
    else if (two == "!=") op = GuardOp::Ne;
    else if (two == "<=") op = GuardOp::Le;
    else if (two == ">=") op = GuardOp::Ge;
    else if (c == '<') op = GuardOp::Lt, len = 1;
    else if (c == '>') op = GuardOp::Gt, len = 1;
    if (!op) continue;
    Operand lhs = parse_operand(trim(s.substr(0, i), p.offset));
    Operand rhs = parse_operand(trim(s.substr(i + len), p.offset + i + len));
    return GuardPredicate::compare(lhs, *op, rhs);
  }
  Operand subject = parse_operand(p);
  if (subject.is_constant()) fail("a constant is not a condition", p.offset);
  return GuardPredicate::truthy(subject);
}

RuleItem parse_item(Piece p) {
  std::string_view s = p.text;
  if (s.empty()) fail("empty rule item", p.offset);
  if (s == "try") return RuleItem::control(SeqKind::Try);
  if (s == "end") return RuleItem::control(SeqKind::End);
  if (s == "loop") return RuleItem::control(SeqKind::Loop);
  if (s == "if") return RuleItem::control(SeqKind::If);
  if (s == "else") return RuleItem::control(SeqKind::Else);
  if (s == "finally") return RuleItem::control(SeqKind::Finally);
  if (s.starts_with("catch")) {
    Piece rest = trim(s.substr(5), p.offset + 5);
    if (!rest.text.starts_with('(') || !rest.text.ends_with(')')) {
      fail("expected catch(Type)", p.offset);
    }
    Piece types = trim(rest.text.substr(1, rest.text.size() - 2), rest.offset + 1);
    std::string name;
    std::size_t start = 0;
    while (true) {
      auto bar = types.text.find('|', start);
      Piece t = trim(types.text.substr(start, bar - start), types.offset + start);
      if (!is_type_name(t.text)) fail("bad exception type in catch", t.offset);
      if (!name.empty()) name += "|";
      name += t.text;
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    return RuleItem::control(SeqKind::Catch, name);
  }

  // call item: name(sig)[@guard]
  std::size_t at = std::string_view::npos;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == '@' && depth == 0) {
      at = i;
      break;
    }
  }
  Piece call = trim(s.substr(0, at), p.offset);
  std::optional<GuardPredicate> guard;
  if (at != std::string_view::npos) guard = parse_guard(trim(s.substr(at + 1), p.offset + at + 1));

  auto open = call.text.find('(');
  if (open == std::string_view::npos || !call.text.ends_with(')')) {
    fail("expected control keyword or call item 'name(...)'", call.offset);
  }
  Piece head = trim(call.text.substr(0, open), call.offset);
  std::string name;
  if (head.text.starts_with("new") && head.text.size() > 3 &&
      std::isspace(static_cast<unsigned char>(head.text[3]))) {
    Piece type = trim(head.text.substr(3), head.offset + 3);
    if (!is_type_name(type.text)) fail("bad type after 'new'", type.offset);
    name = "new " + std::string(type.text);
  } else {
    if (!is_identifier(head.text)) fail("bad method name", head.offset);
    name = head.text;
  }
  Piece sig = trim(call.text.substr(open + 1, call.text.size() - open - 2), call.offset + open + 1);
  std::optional<std::vector<std::string>> signature;
  if (sig.text == "void") {
    signature.emplace();
  } else if (!sig.text.empty()) {
    signature.emplace();
    for (const Piece& t : split_top_level(sig.text, sig.offset)) {
      if (!is_type_name(t.text)) fail("bad argument type", t.offset);
      signature->emplace_back(t.text);
    }
  }
  return RuleItem::call(std::move(name), std::move(signature), std::move(guard));
}

}  // namespace

ApiRef ApiRef::parse(std::string_view text) {
  Piece t = trim(text, 0);
  auto dot = t.text.rfind('.');
  if (dot == std::string_view::npos || !is_type_name(t.text.substr(0, dot)) ||
      !is_identifier(t.text.substr(dot + 1))) {
    throw std::invalid_argument("expected Class.method, got '" + std::string(text) + "'");
  }
  return {std::string(t.text.substr(0, dot)), std::string(t.text.substr(dot + 1))};
}

RuleItem RuleItem::control(SeqKind kind, std::string name) {
  RuleItem item;
  item.kind = kind;
  item.name = std::move(name);
  return item;
}

RuleItem RuleItem::call(std::string name, std::optional<std::vector<std::string>> signature,
                        std::optional<GuardPredicate> guard) {
  RuleItem item;
  item.kind = SeqKind::Call;
  item.name = std::move(name);
  item.arg_signature = std::move(signature);
  item.guard = std::move(guard);
  return item;
}

std::string to_string(const RuleItem& item) {
  switch (item.kind) {
    case SeqKind::Try: return "try";
    case SeqKind::End: return "end";
    case SeqKind::Loop: return "loop";
    case SeqKind::If: return "if";
    case SeqKind::Else: return "else";
    case SeqKind::Finally: return "finally";
    case SeqKind::Catch: return "catch(" + item.name + ")";
    case SeqKind::Call: break;
  }
  std::string out = item.name + "(";
  if (item.arg_signature) {
    if (item.arg_signature->empty()) out += "void";
    for (std::size_t i = 0; i < item.arg_signature->size(); ++i) {
      if (i > 0) out += ",";
      out += (*item.arg_signature)[i];
    }
  }
  out += ")";
  if (item.guard) out += "@" + to_string(*item.guard);
  return out;
}

std::string format(const UsageRule& rule) {
  std::string out;
  if (!rule.ids.empty()) {
    out += "[";
    for (std::size_t i = 0; i < rule.ids.size(); ++i) {
      if (i > 0) out += ",";
      out += std::to_string(rule.ids[i]);
    }
    out += "] ";
  }
  out += rule.api_class + "." + rule.api_method + " :: ";
  for (std::size_t i = 0; i < rule.items.size(); ++i) {
    if (i > 0) out += ",";
    out += to_string(rule.items[i]);
  }
  return out;
}

UsageRule parse_rule(std::string_view line) {
  UsageRule rule;
  std::size_t pos = 0;
  while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
  if (pos < line.size() && line[pos] == '[') {
    auto close = line.find(']', pos);
    if (close == std::string_view::npos) fail("unterminated rule id list", pos);
    for (const Piece& id : split_top_level(line.substr(pos + 1, close - pos - 1), pos + 1)) {
      if (id.text.empty() || !std::all_of(id.text.begin(), id.text.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
          })) {
        fail("rule id must be a positive integer", id.offset);
      }
      int v = std::stoi(std::string(id.text));
      if (v <= 0) fail("rule id must be a positive integer", id.offset);
      rule.ids.push_back(v);
    }
    pos = close + 1;
  }
  auto sep = line.find("::", pos);
  if (sep == std::string_view::npos) fail("expected 'Class.method :: pattern'", pos);
  Piece api = trim(line.substr(pos, sep - pos), pos);
  try {
    ApiRef ref = ApiRef::parse(api.text);
    rule.api_class = ref.cls;
    rule.api_method = ref.method;
  } catch (const std::invalid_argument& e) {
    fail(e.what(), api.offset);
  }
  Piece pattern = trim(line.substr(sep + 2), sep + 2);
  if (pattern.text.empty()) fail("empty pattern", pattern.offset);

  std::vector<std::pair<SeqKind, std::size_t>> open;
  for (const Piece& p : split_top_level(pattern.text, pattern.offset)) {
    RuleItem item = parse_item(p);
    if (item.kind == SeqKind::End) {
      if (open.empty()) fail("'end' without an open block", p.offset);
      open.pop_back();
    } else if (is_opener(item.kind)) {
      open.emplace_back(item.kind, p.offset);
    }
    rule.items.push_back(std::move(item));
  }
  for (const auto& [kind, offset] : open) {
    // loop/if/else may stay open: the pattern only needs the call inside
    if (kind == SeqKind::Try || kind == SeqKind::Catch || kind == SeqKind::Finally) {
      fail("'" + std::string(to_string(kind)) + "' block is never closed by 'end'", offset);
    }
  }
  return rule;
}

RuleItem parse_rule_item(std::string_view text) { return parse_item(trim(text, 0)); }

RuleFileError::RuleFileError(std::vector<Entry> entries)
    : std::runtime_error([&] {
        std::string msg;
        for (const auto& e : entries) {
          if (!msg.empty()) msg += "\n";
          msg += "line " + std::to_string(e.line) + ", column " + std::to_string(e.offset + 1) +
                 ": " + e.message;
        }
        return msg;
      }()),
      entries_(std::move(entries)) {}

void RuleRegistry::add(UsageRule rule) {
  if (rule.items.empty()) throw std::invalid_argument("rule has no items");
  for (int id : rule.ids) {
    if (find(id) != nullptr) {
      throw std::invalid_argument("rule id " + std::to_string(id) + " used twice");
    }
  }
  ApiRef api = rule.api();
  auto& list = by_api_[api];
  list.push_back(std::move(rule));
  order_.emplace_back(api, list.size() - 1);
}

const std::vector<UsageRule>& RuleRegistry::lookup(const ApiRef& api) const {
  static const std::vector<UsageRule> kNone;
  auto it = by_api_.find(api);
  return it == by_api_.end() ? kNone : it->second;
}

std::vector<int> RuleRegistry::rule_ids() const {
  std::vector<int> ids;
  for (const UsageRule* r : all()) ids.insert(ids.end(), r->ids.begin(), r->ids.end());
  return ids;
}

std::vector<ApiRef> RuleRegistry::apis() const {
  std::vector<ApiRef> out;
  for (const auto& [api, rules] : by_api_) out.push_back(api);
  return out;
}

std::vector<const UsageRule*> RuleRegistry::all() const {
  std::vector<const UsageRule*> out;
  for (const auto& [api, index] : order_) out.push_back(&by_api_.at(api)[index]);
  return out;
}

const UsageRule* RuleRegistry::find(int id) const {
  for (const auto& [api, rules] : by_api_) {
    for (const auto& r : rules) {
      if (std::find(r.ids.begin(), r.ids.end(), id) != r.ids.end()) return &r;
    }
  }
  return nullptr;
}

RuleRegistry load_rules(std::istream& in) {
  RuleRegistry registry;
  std::vector<RuleFileError::Entry> errors;
  std::string line;
  std::string description;
  std::size_t line_no = 0;
  int ordinal = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Piece t = trim(line, 0);
    if (t.text.empty()) {
      description.clear();
      continue;
    }
    if (t.text.starts_with('#')) {
      Piece text = trim(t.text.substr(1), 0);
      if (!description.empty()) description += " ";
      description += text.text;
      continue;
    }
    ++ordinal;
    std::string_view body(line);
    body = body.substr(0, body.find('#'));
    try {
      UsageRule rule = parse_rule(body);
      if (rule.ids.empty()) rule.ids.push_back(ordinal);
      rule.description = description;
      registry.add(std::move(rule));
    } catch (const RuleParseError& e) {
      errors.push_back({line_no, e.offset(), e.what()});
    } catch (const std::invalid_argument& e) {
      errors.push_back({line_no, t.offset, e.what()});
    }
    description.clear();
  }
  if (!errors.empty()) throw RuleFileError(std::move(errors));
  return registry;
}

RuleRegistry load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file '" + path + "'");
  return load_rules(in);
}

const RuleRegistry& default_rules() {
  static const RuleRegistry registry = [] {
    std::istringstream in{std::string(embedded::kDefaultRules)};
    return load_rules(in);
  }();
  return registry;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

bool receiver_compatible(const SeqToken& token, const ApiRef& api) {
  return token.receiver_type.empty() || is_subtype(token.receiver_type, api.cls);
}

bool catch_matches(std::string_view rule_type, std::string_view caught) {
  std::size_t start = 0;
  while (true) {
    auto bar = caught.find('|', start);
    std::string_view alt = caught.substr(start, bar - start);
    // rule types may list alternatives too; any pairing suffices
    std::size_t rstart = 0;
    while (true) {
      auto rbar = rule_type.find('|', rstart);
      std::string_view want = rule_type.substr(rstart, rbar - rstart);
      if (want == "Exception" || want == "Throwable" || is_subtype(alt, want)) return true;
      if (rbar == std::string_view::npos) break;
      rstart = rbar + 1;
    }
    if (bar == std::string_view::npos) return false;
    start = bar + 1;
  }
}

bool guard_entailed(const GuardPredicate& guard, const std::vector<SeqToken>* tokens,
                    std::size_t index, const SeqToken& token) {
  if (std::binary_search(token.guards.begin(), token.guards.end(), guard)) return true;
  if (tokens == nullptr || token.receiver_expr.empty()) return false;
  // A preceding check call on the same receiver counts as the check.
  const Operand& lhs = guard.lhs();
  bool check_call = lhs.kind == Operand::Kind::CallOn && lhs.base == Operand::Kind::Receiver &&
                    (guard.op() == GuardOp::Truthy ||
                     (guard.op() == GuardOp::Eq && guard.rhs()->kind == Operand::Kind::False));
  if (!check_call) return false;
  for (std::size_t k = 0; k < index; ++k) {
    const SeqToken& t = (*tokens)[k];
    if (t.kind == SeqKind::Call && t.name == lhs.method && t.receiver_expr == token.receiver_expr) {
      return true;
    }
  }
  return false;
}

bool matches(const RuleItem& item, const SeqToken& token, const std::vector<SeqToken>* tokens,
             std::size_t index, const ApiRef& api) {
  if (item.kind != token.kind) return false;
  if (item.kind == SeqKind::Catch) return catch_matches(item.name, token.name);
  if (item.kind != SeqKind::Call) return true;
  if (item.name != token.name) return false;
  if (item.arg_signature && item.arg_signature->size() != token.arg_count) return false;
  if (item.name == api.method && !receiver_compatible(token, api)) return false;
  if (item.guard && !guard_entailed(*item.guard, tokens, index, token)) return false;
  return true;
}

}  // namespace

bool item_matches(const RuleItem& item, const std::vector<SeqToken>& tokens, std::size_t index,
                  const ApiRef& api) {
  return matches(item, tokens.at(index), &tokens, index, api);
}

bool item_matches(const RuleItem& item, const SeqToken& token, const ApiRef& api) {
  return matches(item, token, nullptr, 0, api);
}

LcsResult lcs(const std::vector<RuleItem>& items, const std::vector<SeqToken>& tokens,
              const ApiRef& api) {
  return lcs_by(items.size(), tokens.size(), [&](std::size_t i, std::size_t j) {
    return item_matches(items[i], tokens, j, api);
  });
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Misuse: return "misuse";
    case Status::Pass: return "pass";
    case Status::NonParsable: return "non-parsable";
    case Status::ApiNotUsed: return "api-not-used";
  }
  return "?";
}

Status parse_status(std::string_view text) {
  for (Status s : {Status::Misuse, Status::Pass, Status::NonParsable, Status::ApiNotUsed}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown status '" + std::string(text) + "'");
}

bool uses_api(const CallSequence& seq, const ApiRef& api) {
  return std::any_of(seq.tokens.begin(), seq.tokens.end(), [&](const SeqToken& t) {
    return t.kind == SeqKind::Call && t.name == api.method && receiver_compatible(t, api);
  });
}

CheckVerdict check_sequence(const CallSequence& seq, const RuleRegistry& registry,
                            const ApiRef& api) {
  CheckVerdict verdict;
  if (!uses_api(seq, api)) {
    verdict.status = Status::ApiNotUsed;
    return verdict;
  }
  const auto& rules = registry.lookup(api);
  if (rules.empty()) {
    verdict.status = Status::Pass;
    verdict.detail = "no rules for " + api.str();
    return verdict;
  }
  const UsageRule* best = nullptr;
  LcsResult best_result;
  for (const auto& rule : rules) {
    LcsResult r = lcs(rule.items, seq.tokens, api);
    if (r.length == rule.items.size()) {
      verdict.status = Status::Pass;
      verdict.best_rule = rule.rule_id();
      verdict.matched_len = r.length;
      verdict.alignment = std::move(r.alignment);
      return verdict;
    }
    if (best == nullptr || r.length > best_result.length) {
      best = &rule;
      best_result = std::move(r);
    }
  }
  verdict.status = Status::Misuse;
  verdict.best_rule = best->rule_id();
  verdict.matched_len = best_result.length;
  std::vector<bool> matched(best->items.size(), false);
  for (const auto& [i, j] : best_result.alignment) matched[i] = true;
  for (std::size_t i = 0; i < best->items.size(); ++i) {
    if (!matched[i]) verdict.missing_items.push_back(best->items[i]);
  }
  verdict.alignment = std::move(best_result.alignment);
  return verdict;
}

CheckVerdict check_snippet(std::string_view text, const RuleRegistry& registry, const ApiRef& api) {
  java::ParsedSnippet parsed;
  try {
    parsed = java::parse_snippet(text);
  } catch (const java::SyntaxError& e) {
    CheckVerdict v;
    v.status = Status::NonParsable;
    v.detail = std::string(e.what()) + " at offset " + std::to_string(e.offset());
    return v;
  } catch (const java::EmptyInput& e) {
    CheckVerdict v;
    v.status = Status::NonParsable;
    v.detail = e.what();
    return v;
  }
  TypeEnv env = infer_types(parsed.root);
  return check_sequence(extract_sequence(parsed.root, env, parsed.kind), registry, api);
}

}  // namespace robustapi
