#include "properties.hpp"

#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "java_gen.hpp"
#include "robustapi/llm_client.hpp"
#include "robustapi/rules.hpp"
#include "robustapi/sequence.hpp"
#include "support.hpp"

namespace robustapi::testing {

namespace {

CallSequence sequence_of(const std::string& text) {
  auto parsed = java::parse_snippet(text);
  TypeEnv env = infer_types(parsed.root);
  return extract_sequence(parsed.root, env, parsed.kind);
}

std::string render(const CallSequence& seq) {
  std::string out;
  for (const auto& t : seq.tokens) out += to_string(t) + "\n";
  return out;
}

PropertyResult fail(std::size_t cases, std::string why) { return {false, cases, std::move(why)}; }

// --- brute-force LCS oracle ------------------------------------------------

// Whether items[subset] (in order) can be paired with strictly increasing
// token positions; plain backtracking, no dynamic programming.
bool embeds(const std::vector<std::size_t>& subset, std::size_t k, std::size_t from,
            std::size_t m, const std::function<bool(std::size_t, std::size_t)>& match) {
  if (k == subset.size()) return true;
  for (std::size_t j = from; j < m; ++j) {
    if (match(subset[k], j) && embeds(subset, k + 1, j + 1, m, match)) return true;
  }
  return false;
}

std::size_t brute_force_lcs(std::size_t n, std::size_t m,
                            const std::function<bool(std::size_t, std::size_t)>& match) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(i);
    }
    if (subset.size() > best && embeds(subset, 0, 0, m, match)) best = subset.size();
  }
  return best;
}

std::string valid_witness(const LcsResult& r, std::size_t n, std::size_t m,
                          const std::function<bool(std::size_t, std::size_t)>& match) {
  if (r.alignment.size() != r.length) return "alignment size differs from length";
  for (std::size_t k = 0; k < r.alignment.size(); ++k) {
    auto [i, j] = r.alignment[k];
    if (i >= n || j >= m) return "alignment index out of range";
    if (!match(i, j)) return "alignment pairs non-matching elements";
    if (k > 0 && (i <= r.alignment[k - 1].first || j <= r.alignment[k - 1].second)) {
      return "alignment not strictly increasing";
    }
  }
  return {};
}

struct RandomLcsCase {
  std::vector<RuleItem> items;
  std::vector<SeqToken> tokens;
};

const ApiRef kLcsApi{"PrintWriter", "write"};

RuleItem random_item(std::mt19937_64& rng) {
  auto pick = [&](int b) { return static_cast<int>(rng() % static_cast<std::uint64_t>(b)); };
  switch (pick(8)) {
    case 0: return RuleItem::control(SeqKind::Try);
    case 1: return RuleItem::control(SeqKind::End);
    case 2: return RuleItem::control(SeqKind::Catch, pick(2) ? "Exception" : "IOException");
    case 3: return RuleItem::control(SeqKind::Loop);
    default: {
      static const char* names[] = {"write", "close", "flush"};
      std::optional<std::vector<std::string>> sig;
      if (pick(3) == 0) sig = std::vector<std::string>(static_cast<std::size_t>(pick(2)), "String");
      std::optional<GuardPredicate> guard;
      if (pick(4) == 0) {
        guard = GuardPredicate::compare(Operand::receiver(), GuardOp::Ne, Operand::null());
      }
      return RuleItem::call(names[pick(3)], sig, guard);
    }
  }
}

SeqToken random_token(std::mt19937_64& rng) {
  auto pick = [&](int b) { return static_cast<int>(rng() % static_cast<std::uint64_t>(b)); };
  switch (pick(8)) {
    case 0: return SeqToken::marker(SeqKind::Try);
    case 1: return SeqToken::marker(SeqKind::End);
    case 2: {
      static const char* types[] = {"IOException", "RuntimeException", "Exception"};
      return SeqToken::marker(SeqKind::Catch, {}, types[pick(3)]);
    }
    case 3: return SeqToken::marker(SeqKind::Loop);
    default: {
      static const char* names[] = {"write", "close", "flush"};
      static const char* types[] = {"", "PrintWriter", "Writer", "String"};
      SeqToken t = SeqToken::call(names[pick(3)], types[pick(4)], "w",
                                  static_cast<std::size_t>(pick(2)));
      if (pick(3) == 0) {
        t.guards.push_back(
            GuardPredicate::compare(Operand::receiver(), GuardOp::Ne, Operand::null()));
      }
      return t;
    }
  }
}

// --- random rules for the round trip ---------------------------------------

GuardPredicate random_guard(std::mt19937_64& rng) {
  auto pick = [&](int b) { return static_cast<int>(rng() % static_cast<std::uint64_t>(b)); };
  auto operand = [&]() -> Operand {
    switch (pick(4)) {
      case 0: return Operand::receiver();
      case 1: return Operand::argument(pick(3));
      case 2: return Operand::call_on(Operand::receiver(), pick(2) ? "size" : "hasNext");
      default: return Operand::call_on(Operand::argument(pick(2)), "length");
    }
  };
  auto constant = [&]() -> Operand {
    switch (pick(4)) {
      case 0: return Operand::null();
      case 1: return Operand::boolean(pick(2));
      default: return Operand::integer(pick(20) - 5);
    }
  };
  static const GuardOp ops[] = {GuardOp::Eq, GuardOp::Ne, GuardOp::Lt,
                                GuardOp::Le, GuardOp::Gt, GuardOp::Ge};
  switch (pick(3)) {
    case 0: return GuardPredicate::truthy(Operand::call_on(Operand::receiver(), "isOpen"));
    case 1: return GuardPredicate::compare(operand(), ops[pick(6)], constant());
    default: return GuardPredicate::compare(operand(), ops[pick(6)], operand());
  }
}

std::vector<RuleItem> random_rule_items(std::mt19937_64& rng, int depth = 0) {
  auto pick = [&](int b) { return static_cast<int>(rng() % static_cast<std::uint64_t>(b)); };
  std::vector<RuleItem> out;
  int count = 1 + pick(4);
  for (int k = 0; k < count; ++k) {
    // Open loop/if/else markers only at the top level: inside a try body
    // the closing 'end' would bind to them instead.
    int choice = depth >= 2 ? 0 : pick(depth == 0 ? 6 : 5);
    if (choice == 4) {
      out.push_back(RuleItem::control(SeqKind::Try));
      for (auto& i : random_rule_items(rng, depth + 1)) out.push_back(i);
      out.push_back(RuleItem::control(SeqKind::End));
      static const char* types[] = {"Exception", "IOException", "IOException|SecurityException"};
      out.push_back(RuleItem::control(SeqKind::Catch, types[pick(3)]));
      out.push_back(RuleItem::control(SeqKind::End));
      if (pick(2)) {
        out.push_back(RuleItem::control(SeqKind::Finally));
        out.push_back(RuleItem::control(SeqKind::End));
      }
    } else if (choice == 5) {
      static const SeqKind open[] = {SeqKind::Loop, SeqKind::If, SeqKind::Else};
      out.push_back(RuleItem::control(open[pick(3)]));
    } else {
      static const char* names[] = {"write", "close", "hasNext", "new BufferedReader", "get"};
      std::optional<std::vector<std::string>> sig;
      switch (pick(4)) {
        case 0: sig = std::vector<std::string>{}; break;
        case 1: sig = std::vector<std::string>{"int"}; break;
        case 2: sig = std::vector<std::string>{"byte[]", "String"}; break;
        default: break;
      }
      std::optional<GuardPredicate> guard;
      if (pick(3) == 0) guard = random_guard(rng);
      out.push_back(RuleItem::call(names[pick(5)], sig, guard));
    }
  }
  return out;
}

}  // namespace

PropertyResult check_balance(std::size_t cases, std::uint64_t seed) {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cases; ++c, ++n) {
    std::string program = random_program(seed + c);
    CallSequence seq = sequence_of(program);
    if (!seq.balanced()) return fail(n, "unbalanced sequence for:\n" + program);
  }
  for (const auto& f : rule_fixtures()) {
    ++n;
    if (!sequence_of(f.text).balanced()) return fail(n, "unbalanced: " + f.path.string());
  }
  return {true, n, {}};
}

PropertyResult check_alpha_renaming(std::size_t cases, std::uint64_t seed) {
  const std::vector<std::string> renamed = {"w2", "xs", "iter", "folder", "m",
                                            "st", "k",  "ex",   "str"};
  for (std::size_t c = 0; c < cases; ++c) {
    std::string a = random_program(seed + c);
    std::string b = random_program(seed + c, renamed);
    CallSequence sa = sequence_of(a);
    CallSequence sb = sequence_of(b);
    auto strip = [](CallSequence s) {
      for (auto& t : s.tokens) {
        t.receiver_expr.clear();
        t.span = {};
      }
      return s;
    };
    if (render(strip(sa)) != render(strip(sb))) {
      return fail(c + 1, "renaming changed the sequence:\n" + a + "\nvs\n" + b);
    }
    auto ga = strip(sa).tokens;
    auto gb = strip(sb).tokens;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (ga[i].guards != gb[i].guards || ga[i].arg_count != gb[i].arg_count) {
        return fail(c + 1, "renaming changed guards or arity:\n" + a);
      }
    }
  }
  return {true, cases, {}};
}

PropertyResult check_call_order(std::size_t cases, std::uint64_t seed) {
  for (std::size_t c = 0; c < cases; ++c) {
    std::string program = random_program(seed + c, kDefaultNames, 0);
    CallSequence seq = sequence_of(program);
    std::size_t last = 0;
    bool first = true;
    for (const auto& t : seq.tokens) {
      if (t.kind != SeqKind::Call) continue;
      if (!first && t.span.end <= last) return fail(c + 1, "call order broken in:\n" + program);
      last = t.span.end;
      first = false;
    }
  }
  return {true, cases, {}};
}

PropertyResult check_try_removal_flip(std::size_t cases, std::uint64_t seed) {
  const RuleRegistry& rules = default_rules();
  for (std::size_t c = 0; c < cases; ++c) {
    FlipCase fc = random_flip_case(seed + c);
    ApiRef api = ApiRef::parse(fc.api);
    for (const auto& r : rules.lookup(api)) {
      if (r.items.empty() || r.items.front().kind != SeqKind::Try) {
        return fail(c + 1, fc.api + " has a rule not starting with try");
      }
    }
    CheckVerdict before = check_snippet(fc.wrapped, rules, api);
    if (before.status != Status::Pass) {
      return fail(c + 1, "wrapped snippet is " + std::string(to_string(before.status)) + ":\n" +
                             fc.wrapped);
    }
    CheckVerdict after = check_snippet(fc.hoisted, rules, api);
    if (after.status != Status::Misuse) {
      return fail(c + 1, "hoisted snippet is " + std::string(to_string(after.status)) + ":\n" +
                             fc.hoisted);
    }
  }
  return {true, cases, {}};
}

PropertyResult check_rule_round_trip(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    UsageRule rule;
    static const char* classes[] = {"PrintWriter", "Map", "JsonElement", "Cipher"};
    static const char* methods[] = {"write", "get", "getAsString", "init"};
    rule.api_class = classes[rng() % 4];
    rule.api_method = methods[rng() % 4];
    rule.items = random_rule_items(rng);
    std::set<int> ids;
    std::size_t n_ids = rng() % 3;
    while (ids.size() < n_ids) ids.insert(1 + static_cast<int>(rng() % 40));
    rule.ids.assign(ids.begin(), ids.end());
    std::string text = format(rule);
    UsageRule back;
    try {
      back = parse_rule(text);
    } catch (const std::exception& e) {
      return fail(c + 1, "cannot reparse '" + text + "': " + e.what());
    }
    if (back.api_class != rule.api_class || back.api_method != rule.api_method ||
        back.items != rule.items || back.ids != rule.ids) {
      return fail(c + 1, "round trip changed '" + text + "' into '" + format(back) + "'");
    }
  }
  return {true, cases, {}};
}

PropertyResult check_lcs_oracle(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    RandomLcsCase lc;
    std::size_t n = rng() % 7;
    std::size_t m = rng() % 11;
    for (std::size_t i = 0; i < n; ++i) lc.items.push_back(random_item(rng));
    for (std::size_t j = 0; j < m; ++j) lc.tokens.push_back(random_token(rng));
    auto match = [&](std::size_t i, std::size_t j) {
      return item_matches(lc.items[i], lc.tokens, j, kLcsApi);
    };
    LcsResult r = lcs(lc.items, lc.tokens, kLcsApi);
    std::size_t expected = brute_force_lcs(n, m, match);
    if (r.length != expected) {
      std::ostringstream why;
      why << "case " << c << ": dp " << r.length << " vs brute force " << expected;
      return fail(c + 1, why.str());
    }
    if (std::string bad = valid_witness(r, n, m, match); !bad.empty()) {
      return fail(c + 1, "case " + std::to_string(c) + ": " + bad);
    }
  }
  return {true, cases, {}};
}

PropertyResult check_lcs_matrix_oracle(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    std::size_t n = rng() % 7;
    std::size_t m = rng() % 11;
    std::uint64_t density = 1 + rng() % 4;
    std::vector<std::vector<bool>> eq(n, std::vector<bool>(m));
    for (auto& row : eq) {
      for (std::size_t j = 0; j < m; ++j) row[j] = rng() % density == 0;
    }
    auto match = [&](std::size_t i, std::size_t j) { return static_cast<bool>(eq[i][j]); };
    LcsResult r = lcs_by(n, m, match);
    std::size_t expected = brute_force_lcs(n, m, match);
    if (r.length != expected) {
      return fail(c + 1, "matrix case " + std::to_string(c) + ": dp " + std::to_string(r.length) +
                             " vs brute force " + std::to_string(expected));
    }
    if (std::string bad = valid_witness(r, n, m, match); !bad.empty()) {
      return fail(c + 1, "matrix case " + std::to_string(c) + ": " + bad);
    }
  }
  return {true, cases, {}};
}

PropertyResult check_lcs_monotonic(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    std::vector<RuleItem> items;
    std::vector<SeqToken> tokens;
    for (std::size_t i = 0, n = 1 + rng() % 6; i < n; ++i) items.push_back(random_item(rng));
    for (std::size_t j = 0, m = rng() % 8; j < m; ++j) tokens.push_back(random_token(rng));
    std::size_t before = lcs(items, tokens, kLcsApi).length;
    for (std::size_t k = 0, extra = 1 + rng() % 4; k < extra; ++k) {
      tokens.push_back(random_token(rng));
      std::size_t after = lcs(items, tokens, kLcsApi).length;
      if (after < before) return fail(c + 1, "appending a token lowered the LCS");
      before = after;
    }
  }
  return {true, cases, {}};
}

PropertyResult check_resume_idempotence(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ScopedEnv key("ROBUSTAPI_STUB_KEY", "stub-secret-key");
  for (std::size_t c = 0; c < cases; ++c) {
    std::size_t n = 1 + rng() % 8;
    std::vector<PromptRecord> prompts;
    for (std::size_t i = 0; i < n; ++i) {
      prompts.push_back({"q" + std::to_string(i), "prompt number " + std::to_string(i)});
    }
    EndpointConfig cfg;
    cfg.api_key_env = "ROBUSTAPI_STUB_KEY";
    cfg.max_parallel = 1 + static_cast<int>(rng() % 3);
    cfg.retry.attempts = 1;
    cfg.retry.backoff = std::chrono::milliseconds(0);

    StubServer full_server;
    cfg.base_url = full_server.base_url();
    TempDir full_dir;
    run_batch(prompts, cfg, full_dir.file("out.jsonl"));
    std::string expected = read_text(full_dir.file("out.jsonl"));

    StubServer server;
    cfg.base_url = server.base_url();
    TempDir dir;
    std::size_t stop = rng() % (n + 1);
    BatchOptions first;
    first.stop_after = stop;
    BatchResult part = run_batch(prompts, cfg, dir.file("out.jsonl"), first);
    BatchResult rest = run_batch(prompts, cfg, dir.file("out.jsonl"));
    std::string got = read_text(dir.file("out.jsonl"));

    std::string where = "case " + std::to_string(c) + " (n=" + std::to_string(n) +
                        ", stop=" + std::to_string(stop) + ")";
    if (got != expected) return fail(c + 1, where + ": resumed output differs");
    if (server.requests() != n) {
      return fail(c + 1, where + ": " + std::to_string(server.requests()) + " requests");
    }
    if (part.requests_issued + rest.requests_issued != n) {
      return fail(c + 1, where + ": request counts do not add up");
    }
  }
  return {true, cases, {}};
}

}  // namespace robustapi::testing
