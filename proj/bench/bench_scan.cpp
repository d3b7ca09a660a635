#include <benchmark/benchmark.h>

#include <map>

#include "robustapi/corpus.hpp"
#include "robustapi/rules.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace robustapi;

namespace {

const testing::SyntheticCorpus& corpus_of(std::size_t n) {
  static std::map<std::size_t, testing::SyntheticCorpus> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::size_t misuse = n / 2, pass = n * 3 / 10;
    it = cache.emplace(n, testing::synthetic_corpus(misuse, pass, n - misuse - pass, 9)).first;
  }
  return it->second;
}

void BM_EvaluateParallel(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_corpus(c.dataset, c.responses, default_rules()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateSerial(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_corpus_serial(c.dataset, c.responses, default_rules()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CheckSnippet(benchmark::State& state) {
  auto fixtures = testing::rule_fixtures();
  std::vector<ApiRef> apis;
  for (const auto& f : fixtures) apis.push_back(ApiRef::parse(f.api));
  for (auto _ : state) {
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
      benchmark::DoNotOptimize(check_snippet(fixtures[i].text, default_rules(), apis[i]));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fixtures.size()));
}

}  // namespace

BENCHMARK(BM_EvaluateParallel)->Arg(100)->Arg(1208)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Arg(100)->Arg(1208)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckSnippet)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
