#include "iotguard/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "iotguard/discriminate.hpp"
#include "iotguard/identify.hpp"
#include "iotguard/random.hpp"

namespace iotguard {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point from) {
  return std::chrono::duration<double, std::milli>(Clock::now() - from).count();
}

std::vector<DeviceTypeId> sorted_types(const FingerprintDb& db) {
  std::vector<DeviceTypeId> types;
  for (const auto& rec : db) {
    if (!rec.full.label) {
      throw Error(ErrorCode::invalid_argument, "evaluation needs labeled fingerprints");
    }
    types.push_back(*rec.full.label);
  }
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  return types;
}

// What one (repeat, fold) task contributes to the report.
struct FoldResult {
  std::vector<std::vector<std::uint64_t>> confusion;
  std::uint64_t tested = 0;
  std::uint64_t multi_match = 0;
  std::vector<double> classify_ms, discriminate_ms, total_ms;
};

FoldResult run_fold(const FingerprintDb& db, const std::vector<DeviceTypeId>& types,
                    const std::vector<std::size_t>& type_of, const std::vector<std::size_t>& fold_of,
                    std::size_t fold, std::size_t repeat, const EvaluationOptions& opt) {
  const std::size_t k = types.size();
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < db.size(); ++i) (fold_of[i] == fold ? test : train).push_back(i);

  ClassifierRegistry registry;
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<const FixedFingerprint*> pos, neg;
    for (std::size_t i : train) (type_of[i] == t ? pos : neg).push_back(&db[i].fixed);
    registry.add(train_type_classifier(types[t], pos, neg, opt.forest,
                                       derive_seed(opt.seed, {repeat, fold, t}), Exec::serial));
  }
  const ReferenceStore refs(db, train);
  const Identifier identifier(registry, refs, ReferencePolicy::seeded_random, opt.refs_per_type,
                              Exec::serial);

  FoldResult out;
  out.confusion.assign(k, std::vector<std::uint64_t>(k + 1, 0));
  for (std::size_t i : test) {
    const auto result = identifier.identify(db[i].fixed, db[i].full,
                                            derive_seed(opt.seed, {repeat, fold, i, 0xd15c}));
    std::size_t col = k;
    if (result.identified) {
      col = static_cast<std::size_t>(
          std::lower_bound(types.begin(), types.end(), *result.identified) - types.begin());
    }
    ++out.confusion[type_of[i]][col];
    ++out.tested;
    if (result.match_count() >= 2) ++out.multi_match;
    out.classify_ms.push_back(result.elapsed.classify_ms);
    if (result.discrimination_used) out.discriminate_ms.push_back(result.elapsed.discriminate_ms);
    out.total_ms.push_back(result.elapsed.total_ms);
  }
  return out;
}

nlohmann::json stats_json(const StageStats& s) {
  return {{"mean_ms", s.mean_ms}, {"stdev_ms", s.stdev_ms}, {"samples", s.samples}};
}

}  // namespace

StageStats summarize(const std::vector<double>& samples_ms) {
  StageStats s;
  s.samples = samples_ms.size();
  if (samples_ms.empty()) return s;
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
              static_cast<double>(samples_ms.size());
  if (samples_ms.size() > 1) {
    double ss = 0.0;
    for (double v : samples_ms) ss += (v - s.mean_ms) * (v - s.mean_ms);
    s.stdev_ms = std::sqrt(ss / static_cast<double>(samples_ms.size() - 1));
  }
  return s;
}

std::size_t EvaluationReport::index_of(const DeviceTypeId& type) const {
  auto it = std::lower_bound(types.begin(), types.end(), type);
  if (it == types.end() || *it != type) {
    throw Error(ErrorCode::invalid_argument, "type not in report: " + type.str());
  }
  return static_cast<std::size_t>(it - types.begin());
}

std::vector<std::size_t> stratified_folds(const FingerprintDb& db, std::size_t folds,
                                          std::uint64_t seed) {
  const auto types = sorted_types(db);
  std::vector<std::vector<std::size_t>> members(types.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    const auto t = std::lower_bound(types.begin(), types.end(), *db[i].full.label) - types.begin();
    members[static_cast<std::size_t>(t)].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> fold_of(db.size(), 0);
  for (auto& m : members) {
    rng.shuffle(m);
    for (std::size_t j = 0; j < m.size(); ++j) fold_of[m[j]] = j % folds;
  }
  return fold_of;
}

EvaluationReport cross_validate(const FingerprintDb& db, const EvaluationOptions& opt) {
  if (opt.folds < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 folds");
  if (opt.repeats < 1) throw Error(ErrorCode::invalid_argument, "need at least 1 repeat");
  const auto types = sorted_types(db);
  const std::size_t k = types.size();
  if (k < 2) throw Error(ErrorCode::insufficient_fingerprints, "need at least 2 device types");

  std::vector<std::size_t> type_of(db.size());
  std::vector<std::size_t> per_type(k, 0);
  for (std::size_t i = 0; i < db.size(); ++i) {
    type_of[i] = static_cast<std::size_t>(
        std::lower_bound(types.begin(), types.end(), *db[i].full.label) - types.begin());
    ++per_type[type_of[i]];
  }
  for (std::size_t t = 0; t < k; ++t) {
    if (per_type[t] < opt.folds) {
      throw Error(ErrorCode::insufficient_fingerprints,
                  types[t].str() + " has fewer fingerprints than folds");
    }
  }

  std::vector<std::vector<std::size_t>> fold_of(opt.repeats);
  for (std::size_t r = 0; r < opt.repeats; ++r) {
    fold_of[r] = stratified_folds(db, opt.folds, derive_seed(opt.seed, {r, 0xf01d}));
  }

  const std::size_t tasks = opt.repeats * opt.folds;
  std::vector<FoldResult> results(tasks);
  for_each_index(opt.exec, tasks, [&](std::size_t task) {
    const std::size_t r = task / opt.folds;
    const std::size_t f = task % opt.folds;
    results[task] = run_fold(db, types, type_of, fold_of[r], f, r, opt);
  });

  EvaluationReport rep;
  rep.types = types;
  rep.folds = opt.folds;
  rep.repeats = opt.repeats;
  rep.seed = opt.seed;
  rep.confusion.assign(k, std::vector<std::uint64_t>(k + 1, 0));
  std::uint64_t multi = 0;
  std::vector<double> classify, discrim, total;
  for (const auto& fr : results) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t p = 0; p <= k; ++p) rep.confusion[a][p] += fr.confusion[a][p];
    }
    rep.total += fr.tested;
    multi += fr.multi_match;
    classify.insert(classify.end(), fr.classify_ms.begin(), fr.classify_ms.end());
    discrim.insert(discrim.end(), fr.discriminate_ms.begin(), fr.discriminate_ms.end());
    total.insert(total.end(), fr.total_ms.begin(), fr.total_ms.end());
  }

  std::uint64_t correct = 0, unknown = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const auto row = std::accumulate(rep.confusion[t].begin(), rep.confusion[t].end(),
                                     std::uint64_t{0});
    rep.per_type_accuracy[types[t]] =
        row == 0 ? 0.0 : static_cast<double>(rep.confusion[t][t]) / static_cast<double>(row);
    correct += rep.confusion[t][t];
    unknown += rep.confusion[t][k];
  }
  if (rep.total > 0) {
    const auto n = static_cast<double>(rep.total);
    rep.global_accuracy = static_cast<double>(correct) / n;
    rep.multi_match_rate = static_cast<double>(multi) / n;
    rep.unknown_rate = static_cast<double>(unknown) / n;
  }
  rep.timing = {summarize(classify), summarize(discrim), summarize(total)};
  return rep;
}

FingerprintDb shuffle_labels(const FingerprintDb& db, std::uint64_t seed) {
  std::vector<std::optional<DeviceTypeId>> labels;
  for (const auto& rec : db) labels.push_back(rec.full.label);
  Rng rng(seed);
  rng.shuffle(labels);
  FingerprintDb out = db;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].full.label = labels[i];
    out[i].fixed.label = labels[i];
  }
  return out;
}

std::string report_to_json(const EvaluationReport& rep, bool with_timing) {
  using nlohmann::json;
  json types = json::array();
  for (const auto& t : rep.types) types.push_back(t.str());
  json columns = types;
  columns.push_back("unknown");
  json per_type = json::object();
  for (const auto& [t, acc] : rep.per_type_accuracy) per_type[t.str()] = acc;

  json j = {
      {"schema", "iotguard.report/1"},
      {"folds", rep.folds},
      {"repeats", rep.repeats},
      {"seed", rep.seed},
      {"total", rep.total},
      {"types", types},
      {"confusion_columns", columns},
      {"confusion", rep.confusion},
      {"per_type_accuracy", per_type},
      {"global_accuracy", rep.global_accuracy},
      {"multi_match_rate", rep.multi_match_rate},
      {"unknown_rate", rep.unknown_rate},
  };
  if (with_timing) {
    j["timing"] = {{"classify", stats_json(rep.timing.classify)},
                   {"discriminate", stats_json(rep.timing.discriminate)},
                   {"total", stats_json(rep.timing.total)}};
  }
  return j.dump(2) + "\n";
}

TimingReport timing_report(const FingerprintDb& db, const ClassifierRegistry& registry,
                           std::uint64_t seed) {
  TimingReport rep;
  rep.classifiers = registry.size();
  if (db.empty() || registry.empty()) return rep;

  const ReferenceStore refs(db);
  const Identifier identifier(registry, refs, ReferencePolicy::seeded_random);
  std::vector<double> extraction, per_classifier, per_distance, identification;
  std::size_t multi = 0;

  for (std::size_t i = 0; i < db.size(); ++i) {
    const auto& rec = db[i];
    auto t0 = Clock::now();
    const Fingerprint rebuilt = build_fingerprint(rec.full.device_mac, rec.full.columns);
    const FixedFingerprint fixed = to_fixed(rebuilt);
    extraction.push_back(ms_since(t0));

    t0 = Clock::now();
    [[maybe_unused]] const auto matches = registry.predict_all(fixed);
    per_classifier.push_back(ms_since(t0) / static_cast<double>(registry.size()));

    const auto result = identifier.identify(fixed, rec.full, derive_seed(seed, {i}));
    identification.push_back(result.elapsed.total_ms);
    if (result.discrimination_used) {
      ++multi;
      std::size_t comparisons = 0;
      for (const auto& s : result.dissimilarity) comparisons += s.comparisons_used;
      if (comparisons > 0) {
        per_distance.push_back(result.elapsed.discriminate_ms / static_cast<double>(comparisons));
      }
    }
  }
  rep.fingerprints = db.size();
  rep.extraction = summarize(extraction);
  rep.per_classifier = summarize(per_classifier);
  rep.per_distance = summarize(per_distance);
  rep.identification = summarize(identification);
  rep.multi_match_rate = static_cast<double>(multi) / static_cast<double>(db.size());
  return rep;
}

std::string timing_to_json(const TimingReport& rep) {
  nlohmann::json j = {
      {"fingerprints", rep.fingerprints},
      {"classifiers", rep.classifiers},
      {"extraction", stats_json(rep.extraction)},
      {"per_classifier_prediction", stats_json(rep.per_classifier)},
      {"per_distance", stats_json(rep.per_distance)},
      {"identification", stats_json(rep.identification)},
      {"multi_match_rate", rep.multi_match_rate},
  };
  return j.dump(2) + "\n";
}

}  // namespace iotguard
