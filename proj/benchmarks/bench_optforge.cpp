#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "optforge/analysis/bayesopt.hpp"
#include "optforge/analysis/clustering.hpp"
#include "optforge/analysis/code_vector.hpp"
#include "optforge/analysis/phi.hpp"
#include "optforge/dataio.hpp"
#include "optforge/trace.hpp"

namespace {

using namespace optforge;

std::vector<std::string> synthetic_sources(std::size_t count) {
  SplitMix64 rng(11);
  const char* keywords[] = {"for", "while", "if", "else", "return", "double",
                            "int", "const", "break", "continue"};
  std::vector<std::string> sources;
  sources.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    std::size_t tokens = 200 + rng.next_u64() % 400;
    for (std::size_t t = 0; t < tokens; ++t) {
      s += keywords[rng.next_u64() % 10];
      s += " (x) { y = z; }\n";
    }
    sources.push_back(std::move(s));
  }
  return sources;
}

std::vector<std::vector<double>> random_points(std::size_t n, std::size_t d,
                                               std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  for (auto& p : pts)
    for (double& v : p) v = rng.uniform(-10.0, 10.0);
  return pts;
}

void bm_embed_corpus(benchmark::State& state) {
  auto sources = synthetic_sources(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed_corpus(sources));
  }
}
BENCHMARK(bm_embed_corpus)->Arg(8)->Arg(64);

void bm_kmeans(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 8, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(pts, 4, 17));
  }
}
BENCHMARK(bm_kmeans)->Arg(100)->Arg(1000);

void bm_classify_phase(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 2, 5);
  std::vector<double> query = {0.25, -0.75};
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_phase(query, pts));
  }
}
BENCHMARK(bm_classify_phase)->Arg(16)->Arg(256);

void bm_bo_propose(benchmark::State& state) {
  auto X = random_points(static_cast<std::size_t>(state.range(0)), 3, 9);
  SplitMix64 rng(13);
  std::vector<double> y(X.size());
  for (double& v : y) v = rng.uniform(-3.0, 0.0);
  BoOptions options;
  options.candidates = 1024;
  options.seed = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bo_propose(X, y, options));
  }
}
BENCHMARK(bm_bo_propose)->Arg(8)->Arg(32);

void bm_record_roundtrip(benchmark::State& state) {
  DesignRecord record;
  record.iteration = 42;
  record.strategy = Strategy::Refine;
  record.instructions = "tighten the inner loop and hoist the loads";
  record.artifact = synthetic_sources(1)[0];
  record.validation.status = ValidationStatus::Valid;
  record.score = -1.25;
  record.metrics = {{"n=128", 0.004, {0.004, 0.004, 0.004}},
                    {"n=256", 0.031, {0.030, 0.031, 0.032}}};
  for (int i = 0; i < 8; ++i) {
    record.strategist_transcript.push_back({"user", "message " + std::to_string(i)});
    record.implementor_transcript.push_back({"assistant", "reply " + std::to_string(i)});
  }
  record.tokens = {40000, 5000, 10000, 9000, false};
  record.wall_clock = 12.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(record_from_json_line(record_to_json_line(record)));
  }
}
BENCHMARK(bm_record_roundtrip);

}  // namespace

BENCHMARK_MAIN();
