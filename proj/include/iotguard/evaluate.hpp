#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iotguard/fingerprint.hpp"
#include "iotguard/forest.hpp"
#include "iotguard/parallel.hpp"
#include "iotguard/typemodel.hpp"

namespace iotguard {

struct StageStats {
  double mean_ms = 0.0;
  double stdev_ms = 0.0;
  std::size_t samples = 0;
};

StageStats summarize(const std::vector<double>& samples_ms);

struct EvaluationOptions {
  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  ForestParams forest;
  std::size_t refs_per_type = 5;
  // Folds run in parallel; everything inside a fold is serial.
  Exec exec = Exec::parallel;
};

struct EvaluationReport {
  std::vector<DeviceTypeId> types;  // sorted; row/column order of confusion
  // K rows x (K + 1) columns; the last column counts Unknown outcomes.
  std::vector<std::vector<std::uint64_t>> confusion;
  std::map<DeviceTypeId, double> per_type_accuracy;
  double global_accuracy = 0.0;
  double multi_match_rate = 0.0;  // fraction of test fingerprints with >= 2 matches
  double unknown_rate = 0.0;
  std::uint64_t total = 0;
  std::size_t folds = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;

  struct Timing {
    StageStats classify;
    StageStats discriminate;
    StageStats total;
  } timing;

  std::size_t index_of(const DeviceTypeId& type) const;
};

// Stratified k-fold cross-validation, repeated. Each fold trains one
// classifier per type on the training split and identifies every test
// fingerprint through the full pipeline, drawing discrimination references
// from the training split only.
EvaluationReport cross_validate(const FingerprintDb& db, const EvaluationOptions& options);

// Fold assignment for one repeat: result[i] is the fold of db[i].
std::vector<std::size_t> stratified_folds(const FingerprintDb& db, std::size_t folds,
                                          std::uint64_t seed);

// Same records with their labels permuted uniformly at random.
FingerprintDb shuffle_labels(const FingerprintDb& db, std::uint64_t seed);

// Timing is left out unless asked for so that equal seeds give equal bytes.
std::string report_to_json(const EvaluationReport& report, bool with_timing = false);

struct TimingReport {
  std::size_t fingerprints = 0;
  std::size_t classifiers = 0;
  StageStats extraction;
  StageStats per_classifier;
  StageStats per_distance;
  StageStats identification;
  double multi_match_rate = 0.0;
};

TimingReport timing_report(const FingerprintDb& db, const ClassifierRegistry& registry,
                           std::uint64_t seed = 0);
std::string timing_to_json(const TimingReport& report);

}  // namespace iotguard
