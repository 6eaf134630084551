#include <benchmark/benchmark.h>

#include "parserank/kernels.hpp"
#include "parserank/rng.hpp"
#include "parserank/synthlab.hpp"

using namespace parserank;

namespace {

struct Fixture {
  Corpus corpus;
  ParameterVector theta;
};

// Sparse random corpus: n sentences, up to 40 parses, 200 features.
const Fixture& fixture() {
  static const Fixture f = [] {
    Rng rng(1234);
    const std::size_t m = 200;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) names.push_back("f" + std::to_string(j));
    std::vector<Sentence> sentences;
    for (std::size_t i = 0; i < 4000; ++i) {
      Sentence s;
      s.id = "s" + std::to_string(i);
      const std::size_t k = 1 + rng.below(40);
      for (std::size_t p = 0; p < k; ++p) {
        std::vector<double> d(m, 0.0);
        for (int e = 0; e < 12; ++e) d[rng.below(m)] = static_cast<double>(1 + rng.below(3));
        s.parses.push_back(FeatureVector::from_dense(d));
      }
      s.correct = rng.below(k);
      sentences.push_back(std::move(s));
    }
    std::vector<double> theta(m);
    for (auto& t : theta) t = rng.uniform(-0.5, 0.5);
    return Fixture{Corpus(FeatureCatalog(names), std::move(sentences)), ParameterVector(theta)};
  }();
  return f;
}

void BM_PlTermsSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pl_terms_serial(f.theta.theta, f.corpus));
}

void BM_PlTermsOmp(benchmark::State& state) {
  const auto& f = fixture();
  const bool deterministic = state.range(1) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::pl_terms_omp(f.theta.theta, f.corpus, static_cast<int>(state.range(0)), deterministic));
  }
}

void BM_LogPlSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::log_pl_serial(f.theta.theta, f.corpus));
}

void BM_LogPlOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::log_pl_omp(f.theta.theta, f.corpus, static_cast<int>(state.range(0)), true));
  }
}

void BM_CorrectCountSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::correct_count_serial(f.theta.theta, f.corpus, kernels::kTieTolerance));
}

void BM_CorrectCountOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::correct_count_omp(f.theta.theta, f.corpus, kernels::kTieTolerance,
                                                        static_cast<int>(state.range(0)), true));
  }
}

}  // namespace

BENCHMARK(BM_PlTermsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlTermsOmp)->ArgsProduct({{1, 2, 4, 8}, {0, 1}})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogPlSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogPlOmp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrectCountSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrectCountOmp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
