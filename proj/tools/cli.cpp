#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iotguard/corpus.hpp"
#include "iotguard/enforce.hpp"
#include "iotguard/evaluate.hpp"
#include "iotguard/features.hpp"
#include "iotguard/fingerprint.hpp"
#include "iotguard/identify.hpp"
#include "iotguard/pcap.hpp"
#include "iotguard/random.hpp"
#include "iotguard/typemodel.hpp"

namespace iotguard::cli {

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("IOTGUARD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

SetupSessionConfig session_config(const std::string& path) {
  return path.empty() ? SetupSessionConfig{} : SetupSessionConfig::load(path);
}

// Setup-phase fingerprint for every source MAC in a capture.
std::vector<Fingerprint> fingerprints_from_pcap(const std::string& path,
                                                const SetupSessionConfig& cfg,
                                                DeviceSessions* sessions_out = nullptr) {
  const PcapContents pcap = read_pcap(path);
  std::vector<RawFrame> frames;
  frames.reserve(pcap.frames.size());
  for (const auto& f : pcap.frames) frames.push_back(f.frame);
  DeviceSessions sessions = ingest_frames(frames);
  std::vector<Fingerprint> out;
  for (const auto& [mac, packets] : sessions.sessions) {
    out.push_back(build_fingerprint(mac, segment_setup(packets, cfg)));
  }
  if (sessions_out) *sessions_out = std::move(sessions);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot write " + path);
  f << text;
}

struct Globals {
  bool json = false;
};

struct ExtractArgs {
  std::string pcap, csv, fingerprints, label, session_config;
};

int run_extract(const ExtractArgs& a, const Globals& g, std::ostream& out) {
  DeviceSessions sessions;
  auto fps = fingerprints_from_pcap(a.pcap, session_config(a.session_config), &sessions);
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + a.csv);
    write_features_csv(f, sessions);
  }
  FingerprintDb db;
  for (auto& fp : fps) {
    if (!a.label.empty()) fp.label = DeviceTypeId(a.label);
    db.push_back(FingerprintRecord::from(std::move(fp)));
  }
  if (!a.fingerprints.empty()) save_fingerprints(db, a.fingerprints);
  if (g.json) {
    nlohmann::json j = {{"devices", db.size()}, {"malformed_frames", sessions.malformed}};
    out << j.dump() << '\n';
  } else {
    out << "devices: " << db.size() << ", malformed frames skipped: " << sessions.malformed
        << '\n';
  }
  return kExitOk;
}

struct TrainArgs {
  std::string fingerprints, out;
  std::uint64_t seed = 1;
  std::size_t trees = 100;
  std::size_t features_per_node = 0;
};

int run_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
  const FingerprintDb db = load_fingerprints(a.fingerprints);
  std::map<DeviceTypeId, std::vector<const FixedFingerprint*>> by_type;
  for (const auto& rec : db) {
    if (rec.fixed.label) by_type[*rec.fixed.label].push_back(&rec.fixed);
  }
  ForestParams params;
  params.n_trees = a.trees;
  params.features_per_node = a.features_per_node;

  ClassifierRegistry reg;
  std::size_t index = 0;
  for (const auto& [type, positives] : by_type) {
    std::vector<const FixedFingerprint*> pool;
    for (const auto& [other, fps] : by_type) {
      if (other != type) pool.insert(pool.end(), fps.begin(), fps.end());
    }
    reg.add(train_type_classifier(type, positives, pool, params,
                                  derive_seed(a.seed, {index++}), Exec::parallel));
  }
  save_model(reg, a.out);
  if (g.json) {
    out << nlohmann::json{{"classifiers", reg.size()}, {"model", a.out}}.dump() << '\n';
  } else {
    out << "trained " << reg.size() << " classifiers -> " << a.out << '\n';
  }
  return kExitOk;
}

struct IdentifyArgs {
  std::string pcap, model, fingerprints, vulns, out, rules_out, session_config;
  std::size_t refs_per_type = kRefsPerType;
  std::uint64_t seed = 1;
};

int run_identify(const IdentifyArgs& a, const Globals& g, std::ostream& out) {
  const auto registry = load_model(a.model);
  const FingerprintDb db = load_fingerprints(a.fingerprints);
  const auto vulns = VulnerabilityRegistry::load(a.vulns);
  const ReferenceStore refs(db);
  const Identifier identifier(registry, refs, ReferencePolicy::most_recent, a.refs_per_type,
                              Exec::parallel);

  nlohmann::json results = nlohmann::json::array();
  std::vector<EnforcementRule> rules;
  for (const auto& fp : fingerprints_from_pcap(a.pcap, session_config(a.session_config))) {
    const auto result = identifier.identify(to_fixed(fp), fp, a.seed);
    const auto assignment = assign_isolation(result, vulns);
    auto j = to_json(result);
    j["isolation"] = std::string(to_string(assignment.level));
    j["permitted"] = assignment.permitted;
    results.push_back(std::move(j));

    auto ips = resolve_destinations(assignment.permitted);
    IsolationLevel level = assignment.level;
    // A restricted device whose destinations all failed to resolve cannot
    // reach anything; fall back to strict.
    if (level == IsolationLevel::restricted && ips.empty()) level = IsolationLevel::strict;
    rules.push_back(make_rule(fp.device_mac, level, std::move(ips),
                              static_cast<std::int64_t>(rules.size() + 1), 100));
  }
  if (!a.out.empty()) write_text(a.out, results.dump(2) + "\n");
  if (!a.rules_out.empty()) save_rules(rules, a.rules_out);

  if (g.json || a.out.empty()) {
    out << results.dump(2) << '\n';
  } else {
    for (const auto& r : results) {
      out << r["mac"].get<std::string>() << ": "
          << (r["outcome"] == "unknown" ? std::string("unknown")
                                        : r["device_type"].get<std::string>())
          << " -> " << r["isolation"].get<std::string>() << '\n';
    }
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string fingerprints, out;
  std::size_t folds = 10, repeats = 10, trees = 100, refs_per_type = kRefsPerType;
  std::uint64_t seed = 1;
  bool shuffle = false, timing = false, serial = false;
};

int run_evaluate(const EvaluateArgs& a, const Globals& g, std::ostream& out) {
  FingerprintDb db = load_fingerprints(a.fingerprints);
  if (a.shuffle) db = shuffle_labels(db, derive_seed(a.seed, {0x5407}));
  EvaluationOptions opt;
  opt.folds = a.folds;
  opt.repeats = a.repeats;
  opt.seed = a.seed;
  opt.forest.n_trees = a.trees;
  opt.refs_per_type = a.refs_per_type;
  opt.exec = a.serial ? Exec::serial : Exec::parallel;
  const auto report = cross_validate(db, opt);
  const std::string text = report_to_json(report, a.timing);
  if (!a.out.empty()) write_text(a.out, text);
  if (g.json || a.out.empty()) {
    out << text;
  } else {
    out << "global accuracy " << report.global_accuracy << " over " << report.total
        << " identifications; multi-match rate " << report.multi_match_rate << '\n';
  }
  return kExitOk;
}

struct GenArgs {
  std::string out, spec, pcap;
  std::size_t types = 27, per_type = 20;
  double drop = 0.05, duplicate = 0.0, jitter_prob = 0.0;
  std::uint32_t jitter_bytes = 0;
  std::vector<std::string> pairs;
  std::uint64_t seed = 1;
};

int run_gen_corpus(const GenArgs& a, const Globals& g, std::ostream& out) {
  SyntheticCorpusSpec spec;
  if (!a.spec.empty()) {
    spec = SyntheticCorpusSpec::load(a.spec);
  } else {
    spec.n_types = a.types;
    spec.fingerprints_per_type = a.per_type;
    spec.noise = {a.drop, a.duplicate, a.jitter_prob, a.jitter_bytes};
    for (const auto& p : a.pairs) {
      const auto comma = p.find(',');
      if (comma == std::string::npos) {
        throw Error(ErrorCode::invalid_argument, "--pair expects A,B");
      }
      spec.duplicated_type_pairs.emplace_back(std::stoul(p.substr(0, comma)),
                                              std::stoul(p.substr(comma + 1)));
    }
  }
  const auto traces = generate_traces(spec, a.seed);
  FingerprintDb db;
  std::vector<RawFrame> frames;
  for (const auto& t : traces) {
    db.push_back(fingerprint_trace(t));
    if (!a.pcap.empty()) frames.insert(frames.end(), t.frames.begin(), t.frames.end());
  }
  if (!a.out.empty()) save_fingerprints(db, a.out);
  if (!a.pcap.empty()) write_pcap(a.pcap, frames);
  if (g.json) {
    out << nlohmann::json{{"fingerprints", db.size()}, {"types", spec.n_types}}.dump() << '\n';
  } else {
    out << "generated " << db.size() << " fingerprints of " << spec.n_types << " types\n";
  }
  return kExitOk;
}

struct TimingArgs {
  std::string fingerprints, model;
  std::uint64_t seed = 1;
};

int run_timing(const TimingArgs& a, std::ostream& out) {
  const FingerprintDb db = load_fingerprints(a.fingerprints);
  const auto registry = load_model(a.model);
  out << timing_to_json(timing_report(db, registry, a.seed));
  return kExitOk;
}

struct SimulateArgs {
  std::string rules, flows;
};

int run_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
  RuleCache cache;
  for (const auto& r : load_rules(a.rules)) cache.update(r);
  std::ifstream in(a.flows);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + a.flows);
  const auto flows = parse_flows_csv(in);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& flow : flows) {
    const auto d = decide(flow, cache);
    if (g.json) {
      list.push_back({{"verdict", std::string(to_string(d.verdict))},
                      {"reason", d.reason},
                      {"needs_identification", d.needs_identification}});
    } else {
      out << to_string(d.verdict) << ',' << d.reason << '\n';
    }
  }
  if (g.json) out << list.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Device-type identification from setup traffic, and isolation policy"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");

  const std::uint64_t seed = default_seed();

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Per-packet features and fingerprints from a pcap");
  extract->add_option("--pcap", ex.pcap, "Capture file")->required()->check(CLI::ExistingFile);
  extract->add_option("--csv", ex.csv, "Write per-packet features (25-column CSV)");
  extract->add_option("--fingerprints", ex.fingerprints, "Write a fingerprint database");
  extract->add_option("--label", ex.label, "Device-type label for every fingerprint");
  extract->add_option("--session-config", ex.session_config, "key=value setup-phase settings");

  TrainArgs tr;
  tr.seed = seed;
  auto* train = app.add_subcommand("train", "Train one classifier per device-type");
  train->add_option("--fingerprints", tr.fingerprints, "Labeled fingerprint database")->required();
  train->add_option("--out", tr.out, "Model file")->required();
  train->add_option("--seed", tr.seed, "Random seed (default $IOTGUARD_SEED or 1)");
  train->add_option("--trees", tr.trees, "Trees per forest")->check(CLI::PositiveNumber);
  train->add_option("--features-per-node", tr.features_per_node, "0 = ceil(sqrt(276))");

  IdentifyArgs id;
  id.seed = seed;
  auto* ident = app.add_subcommand("identify", "Identify every device in a capture");
  ident->add_option("--pcap", id.pcap, "Capture file")->required()->check(CLI::ExistingFile);
  ident->add_option("--model", id.model, "Model file")->required();
  ident->add_option("--fingerprints", id.fingerprints, "Reference fingerprint database")
      ->required();
  ident->add_option("--vulns", id.vulns, "Vulnerability registry JSON")->required();
  ident->add_option("--out", id.out, "Write results JSON");
  ident->add_option("--rules-out", id.rules_out, "Write enforcement rules JSON");
  ident->add_option("--refs-per-type", id.refs_per_type, "References per candidate type")
      ->check(CLI::Range(1, 5));
  ident->add_option("--session-config", id.session_config, "key=value setup-phase settings");

  EvaluateArgs ev;
  ev.seed = seed;
  auto* eval = app.add_subcommand("evaluate", "Repeated stratified cross-validation");
  eval->add_option("--fingerprints", ev.fingerprints, "Labeled fingerprint database")->required();
  eval->add_option("--folds", ev.folds)->check(CLI::Range(2, 1000));
  eval->add_option("--repeats", ev.repeats)->check(CLI::PositiveNumber);
  eval->add_option("--seed", ev.seed);
  eval->add_option("--trees", ev.trees)->check(CLI::PositiveNumber);
  eval->add_option("--refs-per-type", ev.refs_per_type)->check(CLI::Range(1, 5));
  eval->add_flag("--shuffle-labels", ev.shuffle, "Random-label baseline");
  eval->add_flag("--timing", ev.timing, "Include stage timing in the report");
  eval->add_flag("--serial", ev.serial, "Run folds serially");
  eval->add_option("--out", ev.out, "Write the report JSON");

  GenArgs gen;
  gen.seed = seed;
  auto* gencorpus = app.add_subcommand("gen-corpus", "Generate a synthetic fingerprint corpus");
  gencorpus->add_option("--out", gen.out, "Fingerprint database to write");
  gencorpus->add_option("--spec", gen.spec, "Corpus spec JSON (overrides the flags below)");
  gencorpus->add_option("--pcap", gen.pcap, "Also write the rendered setup traffic");
  gencorpus->add_option("--types", gen.types)->check(CLI::Range(2, 100000));
  gencorpus->add_option("--per-type", gen.per_type)->check(CLI::PositiveNumber);
  gencorpus->add_option("--drop", gen.drop)->check(CLI::Range(0.0, 1.0));
  gencorpus->add_option("--duplicate", gen.duplicate)->check(CLI::Range(0.0, 1.0));
  gencorpus->add_option("--jitter-prob", gen.jitter_prob)->check(CLI::Range(0.0, 1.0));
  gencorpus->add_option("--jitter-bytes", gen.jitter_bytes);
  gencorpus->add_option("--pair", gen.pairs, "Types sharing a base sequence, as A,B");
  gencorpus->add_option("--seed", gen.seed);

  TimingArgs tm;
  tm.seed = seed;
  auto* timing = app.add_subcommand("timing", "Per-stage identification timing");
  timing->add_option("--fingerprints", tm.fingerprints)->required();
  timing->add_option("--model", tm.model)->required();
  timing->add_option("--seed", tm.seed);

  SimulateArgs sim;
  auto* enforce = app.add_subcommand("enforce", "Enforcement rule tools");
  enforce->require_subcommand(1);
  auto* simulate = enforce->add_subcommand("simulate", "Permit/deny decisions for a flow list");
  simulate->add_option("--rules", sim.rules, "Rules JSON")->required();
  simulate->add_option("--flows", sim.flows, "Flows CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*extract) return run_extract(ex, g, out);
    if (*train) return run_train(tr, g, out);
    if (*ident) return run_identify(id, g, out);
    if (*eval) return run_evaluate(ev, g, out);
    if (*gencorpus) return run_gen_corpus(gen, g, out);
    if (*timing) return run_timing(tm, out);
    if (*simulate) return run_simulate(sim, g, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace iotguard::cli
