#include <gtest/gtest.h>

#include "robustapi/promptgen.hpp"
#include "support.hpp"

using namespace robustapi;
using robustapi::testing::TempDir;
using robustapi::testing::write_text;

namespace {

const CorpusEntry kEntry{"q7", "PrintWriter.write", "How do I append text to a file in Java?",
                         "https://so/q/7"};

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string demo_line(const std::string& api, const std::string& question,
                      const std::string& answer) {
  return nlohmann::json{{"api", api}, {"question", question}, {"answer", answer}}.dump() + "\n";
}

}  // namespace

TEST(PromptMode, Names) {
  for (auto m : {PromptMode::ZeroShot, PromptMode::OneShotIrrelevant, PromptMode::OneShotRelevant}) {
    EXPECT_EQ(parse_prompt_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_prompt_mode("two-shot"), std::invalid_argument);
}

TEST(BuildPrompt, ZeroShot) {
  PromptConfig cfg;
  std::string p = build_prompt(kEntry, PromptMode::ZeroShot, DemoStore{}, cfg);
  EXPECT_EQ(p.rfind(cfg.instruction, 0), 0u);
  EXPECT_TRUE(contains(p, kEntry.question));
  EXPECT_TRUE(contains(p, "API: PrintWriter.write"));
  std::size_t first_question = p.find(cfg.question_tag);
  EXPECT_EQ(p.find(cfg.question_tag, first_question + 1), std::string::npos);
  EXPECT_EQ(p.substr(p.size() - cfg.answer_tag.size() - 1), cfg.answer_tag + "\n");
}

TEST(BuildPrompt, OneShotIrrelevantUsesOtherApi) {
  const DemoStore& demos = builtin_demos();
  ASSERT_NE(demos.irrelevant(), nullptr);
  std::string p = build_prompt(kEntry, PromptMode::OneShotIrrelevant, demos);
  EXPECT_TRUE(contains(p, demos.irrelevant()->answer));
  EXPECT_TRUE(contains(demos.irrelevant()->answer, "Arrays.stream"));
  EXPECT_FALSE(contains(demos.irrelevant()->answer, "PrintWriter"));
}

TEST(BuildPrompt, OneShotRelevantHasTryCatchAroundWrite) {
  const DemoStore& demos = builtin_demos();
  const DemoExample* demo = demos.for_api("PrintWriter.write");
  ASSERT_NE(demo, nullptr);
  std::string p = build_prompt(kEntry, PromptMode::OneShotRelevant, demos);
  EXPECT_TRUE(contains(p, demo->answer));
  std::size_t code = demo->answer.find("```java");
  ASSERT_NE(code, std::string::npos);
  std::size_t t = demo->answer.find("try", code);
  std::size_t w = demo->answer.find(".write(", code);
  std::size_t c = demo->answer.find("catch", code);
  ASSERT_NE(t, std::string::npos);
  EXPECT_LT(t, w);
  EXPECT_LT(w, c);
}

TEST(BuildPrompt, MissingDemos) {
  EXPECT_THROW(build_prompt(kEntry, PromptMode::OneShotRelevant, DemoStore{}), MissingDemo);
  EXPECT_THROW(build_prompt(kEntry, PromptMode::OneShotIrrelevant, DemoStore{}), MissingDemo);
}

TEST(BuildPrompt, Deterministic) {
  for (auto m : {PromptMode::ZeroShot, PromptMode::OneShotIrrelevant, PromptMode::OneShotRelevant}) {
    EXPECT_EQ(build_prompt(kEntry, m, builtin_demos()), build_prompt(kEntry, m, builtin_demos()));
  }
}

TEST(BuildPrompt, OneShotContainsZeroShotParts) {
  std::string zero = build_prompt(kEntry, PromptMode::ZeroShot, builtin_demos());
  PromptConfig cfg;
  std::string tail = zero.substr(cfg.instruction.size());
  for (auto m : {PromptMode::OneShotIrrelevant, PromptMode::OneShotRelevant}) {
    std::string one = build_prompt(kEntry, m, builtin_demos());
    EXPECT_GT(one.size(), zero.size());
    EXPECT_EQ(one.rfind(cfg.instruction, 0), 0u);
    EXPECT_EQ(one.substr(one.size() - tail.size()), tail) << to_string(m);
  }
}

TEST(BuildPrompt, CustomTags) {
  PromptConfig cfg;
  cfg.instruction = "Answer.";
  cfg.question_tag = "<question>";
  cfg.answer_tag = "<answer>";
  std::string p = build_prompt(kEntry, PromptMode::OneShotRelevant, builtin_demos(), cfg);
  EXPECT_EQ(p.rfind("Answer.\n\n<question>\n", 0), 0u);
  EXPECT_FALSE(contains(p, "### Question"));
}

TEST(Demos, BuiltinStore) {
  const DemoStore& demos = builtin_demos();
  EXPECT_EQ(demos.size(), 19u);
  std::size_t relevant = 0;
  for (const auto& d : demos.all()) {
    if (!d.relevant()) continue;
    ++relevant;
    EXPECT_NO_THROW(validate_demo(d, default_rules())) << d.api;
  }
  EXPECT_EQ(relevant, 18u);
  for (const auto& api : default_rules().apis()) EXPECT_NE(demos.for_api(api.str()), nullptr);
}

TEST(Demos, MisusingAnswerIsRejected) {
  std::string text = demo_line("PrintWriter.write", "q",
                               "```java\nPrintWriter w = new PrintWriter(\"f\");\nw.write(\"x\");\n```");
  try {
    parse_demos(text);
    FAIL();
  } catch (const DemoMisuse& e) {
    EXPECT_EQ(e.api(), "PrintWriter.write");
  }
}

TEST(Demos, AnswerThatSkipsTheApiIsRejected) {
  EXPECT_THROW(parse_demos(demo_line("PrintWriter.write", "q", "```java\nint x = 1;\n```")),
               DemoMisuse);
}

TEST(Demos, EmptyFileGivesEmptyStore) {
  TempDir dir;
  write_text(dir.file("demos.jsonl"), "");
  DemoStore store = load_demos(dir.file("demos.jsonl"));
  EXPECT_EQ(store.size(), 0u);
  EXPECT_NO_THROW(build_prompt(kEntry, PromptMode::ZeroShot, store));
}

TEST(Demos, SchemaErrors) {
  EXPECT_THROW(parse_demos("{\"api\":\"A.b\"}\n"), SchemaError);
  EXPECT_THROW(parse_demos("not json\n"), SchemaError);
  EXPECT_THROW(parse_demos(demo_line("IRRELEVANT", "a", "b") + demo_line("IRRELEVANT", "c", "d")),
               SchemaError);
  EXPECT_THROW(load_demos("/nonexistent/demos.jsonl"), std::runtime_error);
}

TEST(PromptRecords, RoundTrip) {
  std::vector<CorpusEntry> dataset = {kEntry, {"q8", "Map.get", "How?", ""}};
  auto prompts = build_prompts(dataset, PromptMode::ZeroShot, DemoStore{});
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_EQ(prompts[1].id, "q8");
  EXPECT_EQ(parse_prompt_records(format_prompt_records(prompts)), prompts);
  EXPECT_THROW(parse_prompt_records("{\"id\":\"a\",\"prompt\":\"x\"}\n{\"id\":\"a\",\"prompt\":\"y\"}\n"),
               SchemaError);
}
