// Serial reference implementations vs the thread-parallel kernels on a
// mid-size synthetic corpus. The parallel variants must win on wall time
// while staying bitwise identical (asserted by the unit and acceptance
// suites, not here).

#include <benchmark/benchmark.h>

#include <vector>

#include "mtpath/detectors.hpp"
#include "mtpath/synth.hpp"
#include "mtpath/words.hpp"

namespace {

const mtpath::GenConfig& bench_config() {
  static const mtpath::GenConfig cfg = [] {
    mtpath::GenConfig c = mtpath::GenConfig::defaults();
    c.directions = {mtpath::parse_direction("eng_Latn-deu_Latn")};
    c.records_per_direction = 200;
    return c;
  }();
  return cfg;
}

const mtpath::Corpus& bench_corpus() {
  static const mtpath::Corpus c = mtpath::generate_corpus(bench_config(), 17, 8);
  return c;
}

const std::vector<mtpath::DetectorId>& bench_detectors() {
  static const std::vector<mtpath::DetectorId> ids =
      mtpath::parse_detector_list("seq_logprob,alti,alti_t,wass_to_unif,wass_to_data");
  return ids;
}

const mtpath::ScoringContext& bench_context() {
  static const mtpath::ScoringContext ctx =
      mtpath::build_scoring_context(bench_corpus(), bench_detectors());
  return ctx;
}

}  // namespace

static void BM_score_corpus_serial(benchmark::State& state) {
  for (auto _ : state) {
    auto table = mtpath::score_corpus_serial(bench_corpus(), bench_detectors(), bench_context());
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_score_corpus_serial);

static void BM_score_corpus_parallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto table = mtpath::score_corpus(bench_corpus(), bench_detectors(), bench_context(), threads);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_score_corpus_parallel)->Arg(2)->Arg(4)->Arg(8);

static void BM_word_table_serial(benchmark::State& state) {
  for (auto _ : state) {
    auto table = mtpath::build_word_table_serial(bench_corpus());
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_word_table_serial);

static void BM_word_table_parallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto table = mtpath::build_word_table(bench_corpus(), threads);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_word_table_parallel)->Arg(2)->Arg(4)->Arg(8);

static void BM_generate_corpus_serial(benchmark::State& state) {
  for (auto _ : state) {
    auto corpus = mtpath::generate_corpus(bench_config(), 17, 1);
    benchmark::DoNotOptimize(corpus);
  }
}
BENCHMARK(BM_generate_corpus_serial);

static void BM_generate_corpus_parallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto corpus = mtpath::generate_corpus(bench_config(), 17, threads);
    benchmark::DoNotOptimize(corpus);
  }
}
BENCHMARK(BM_generate_corpus_parallel)->Arg(2)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
