#include "synthetic.hpp"

#include <algorithm>
#include <random>

#include "support.hpp"

namespace robustapi::testing {

namespace {

std::string wrap(const std::string& code, std::size_t k) {
  switch (k % 3) {
    case 0: return "Here is how you can do it:\n\n```java\n" + code + "```\n\nHope this helps.";
    case 1: return "### Answer\n" + code;
    default: return "Sure.\n```\n" + code + "```\nThe code above does what you asked.";
  }
}

const std::vector<std::string>& broken_answers() {
  static const std::vector<std::string> b = {
      "I'm sorry, I can't help with that request.",
      "```java\nPrintWriter w = new PrintWriter(\"f.txt\";\nw.write(\"x\");\n```",
      "```java\nfor (String s : ) { s.trim() }\n```",
      "You should use the API carefully and read its documentation first.",
      "```java\npublic class { void m() { } }\n```",
  };
  return b;
}

}  // namespace

SyntheticCorpus synthetic_corpus(std::size_t n_misuse, std::size_t n_pass, std::size_t n_noncomp,
                                 std::uint64_t seed) {
  std::vector<RuleFixture> good;
  std::vector<RuleFixture> bad;
  for (auto& f : rule_fixtures()) (f.compliant ? good : bad).push_back(std::move(f));

  struct Item {
    std::string api;
    std::string response;
  };
  std::vector<Item> items;
  for (std::size_t k = 0; k < n_misuse; ++k) {
    const auto& f = bad[k % bad.size()];
    items.push_back({f.api, wrap(f.text, k)});
  }
  for (std::size_t k = 0; k < n_pass; ++k) {
    const auto& f = good[k % good.size()];
    items.push_back({f.api, wrap(f.text, k)});
  }
  for (std::size_t k = 0; k < n_noncomp; ++k) {
    items.push_back({bad[k % bad.size()].api, broken_answers()[k % broken_answers().size()]});
  }
  std::mt19937_64 rng(seed);
  std::shuffle(items.begin(), items.end(), rng);

  SyntheticCorpus out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    std::string id = "s" + std::to_string(k);
    out.dataset.push_back({id, items[k].api, "How do I use " + items[k].api + "?",
                           "https://example.org/q/" + std::to_string(k)});
    out.responses.push_back({id, items[k].response, std::nullopt});
  }
  return out;
}

std::string dataset_jsonl(const std::vector<CorpusEntry>& dataset) {
  std::string out;
  for (const auto& e : dataset) {
    out += nlohmann::json{{"id", e.id}, {"api", e.api}, {"question", e.question},
                          {"origin", e.origin}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string responses_jsonl(const std::vector<ResponseRecord>& responses) {
  std::string out;
  for (const auto& r : responses) {
    nlohmann::json j = {{"id", r.id}, {"response", r.response}};
    if (r.meta) j["meta"] = *r.meta;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace robustapi::testing
