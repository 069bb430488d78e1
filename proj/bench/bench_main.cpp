// Serial reference vs OpenMP kernels, plus rule-cache lookup scaling.
// Arg 0 selects the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include <map>

#include "iotguard/corpus.hpp"
#include "iotguard/discriminate.hpp"
#include "iotguard/enforce.hpp"
#include "iotguard/evaluate.hpp"
#include "iotguard/random.hpp"
#include "iotguard/typemodel.hpp"

using namespace iotguard;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

const FingerprintDb& corpus() {
  static const FingerprintDb db = [] {
    SyntheticCorpusSpec spec;
    spec.noise.drop_prob = 0.05;
    return generate_corpus(spec, 1);
  }();
  return db;
}

struct Split {
  std::vector<const FixedFingerprint*> positives, pool;
};

Split split_for(const DeviceTypeId& type) {
  Split s;
  for (const auto& r : corpus()) (r.fixed.label == type ? s.positives : s.pool).push_back(&r.fixed);
  return s;
}

const ClassifierRegistry& registry() {
  static const ClassifierRegistry reg = [] {
    ClassifierRegistry r;
    for (std::size_t t = 0; t < 27; ++t) {
      const auto s = split_for(synthetic_type_id(t));
      r.add(train_type_classifier(synthetic_type_id(t), s.positives, s.pool, {}, t));
    }
    return r;
  }();
  return reg;
}

void BM_TrainClassifier(benchmark::State& state) {
  const auto s = split_for(synthetic_type_id(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        train_type_classifier(synthetic_type_id(0), s.positives, s.pool, {}, 1, exec_of(state)));
  }
}
BENCHMARK(BM_TrainClassifier)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictAll(benchmark::State& state) {
  const auto& reg = registry();
  const auto& fp = corpus()[5].fixed;
  for (auto _ : state) benchmark::DoNotOptimize(reg.predict_all(fp, exec_of(state)));
}
BENCHMARK(BM_PredictAll)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Discriminate(benchmark::State& state) {
  const auto& db = corpus();
  std::map<DeviceTypeId, std::vector<const Fingerprint*>> refs;
  for (const auto& r : db) {
    auto& v = refs[*r.full.label];
    if (v.size() < kRefsPerType) v.push_back(&r.full);
  }
  std::vector<Candidate> candidates;
  for (const auto& [type, list] : refs) candidates.push_back({type, list});
  for (auto _ : state) benchmark::DoNotOptimize(discriminate(db[0].full, candidates, exec_of(state)));
}
BENCHMARK(BM_Discriminate)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CrossValidate(benchmark::State& state) {
  EvaluationOptions opt;
  opt.folds = 10;
  opt.repeats = 1;
  opt.seed = 7;
  opt.forest.n_trees = 20;
  opt.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(corpus(), opt));
}
BENCHMARK(BM_CrossValidate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_RuleLookup(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RuleCache cache;
  std::vector<Mac> macs;
  for (std::size_t i = 0; i < n; ++i) {
    const Mac m({0x02, 0x10, static_cast<std::uint8_t>(i >> 24), static_cast<std::uint8_t>(i >> 16),
                 static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i)});
    macs.push_back(m);
    cache.update(make_rule(m, IsolationLevel::strict, {}, static_cast<std::int64_t>(i), 1));
  }
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(cache.lookup(macs[rng.uniform_index(n)]));
}
BENCHMARK(BM_RuleLookup)->Arg(10)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
