#include "iotguard/fingerprint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace iotguard {

namespace {

constexpr std::string_view kJsonSchema = "iotguard.fingerprints/1";
constexpr std::string_view kCsvSchema = "# iotguard.fixed-fingerprints/1";

std::int64_t to_micros(const Timestamp& ts) { return ts.sec * 1'000'000 + ts.usec; }
std::int64_t seconds_to_micros(double s) { return std::llround(s * 1e6); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "session config: bad value for " + key);
  }
}

std::filesystem::path with_ext(std::filesystem::path p, const char* ext) {
  const auto e = p.extension();
  if (e == ".json" || e == ".csv") p.replace_extension();
  p += ext;
  return p;
}

}  // namespace

void SetupSessionConfig::validate() const {
  if (!(idle_timeout > 0)) {
    throw Error(ErrorCode::invalid_argument, "idle_timeout must be > 0");
  }
  if (max_packets < kFixedPackets) {
    throw Error(ErrorCode::invalid_argument, "max_packets must be >= 12");
  }
  if (!(rate_window > 0)) throw Error(ErrorCode::invalid_argument, "rate_window must be > 0");
  if (!(rate_drop_factor >= 0 && rate_drop_factor <= 1)) {
    throw Error(ErrorCode::invalid_argument, "rate_drop_factor must be in [0,1]");
  }
}

SetupSessionConfig SetupSessionConfig::parse(std::string_view text) {
  SetupSessionConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::invalid_argument, "session config: expected key=value: " + line);
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "idle_timeout") {
      cfg.idle_timeout = parse_double(key, value);
    } else if (key == "rate_window") {
      cfg.rate_window = parse_double(key, value);
    } else if (key == "rate_drop_factor") {
      cfg.rate_drop_factor = parse_double(key, value);
    } else if (key == "max_packets") {
      const double d = parse_double(key, value);
      if (d < 0 || d != std::floor(d)) {
        throw Error(ErrorCode::invalid_argument, "session config: max_packets must be an integer");
      }
      cfg.max_packets = static_cast<std::size_t>(d);
    } else {
      throw Error(ErrorCode::invalid_argument, "session config: unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

SetupSessionConfig SetupSessionConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::size_t setup_cut_index(std::span<const TimedFeatures> stream, const SetupSessionConfig& cfg) {
  cfg.validate();
  const std::int64_t idle = seconds_to_micros(cfg.idle_timeout);
  const std::int64_t window = seconds_to_micros(cfg.rate_window);

  // Rates are compared as packet counts per window; the window length cancels.
  std::size_t left = 0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (i == cfg.max_packets) return i;
    const std::int64_t now = to_micros(stream[i].ts);
    if (i > 0 && now - to_micros(stream[i - 1].ts) >= idle) return i;
    while (to_micros(stream[left].ts) <= now - window) ++left;
    const std::size_t in_window = i - left + 1;
    if (static_cast<double>(in_window) < cfg.rate_drop_factor * static_cast<double>(peak)) {
      return i;
    }
    peak = std::max(peak, in_window);
  }
  return stream.size();
}

std::vector<PacketFeatures> segment_setup(std::span<const TimedFeatures> stream,
                                          const SetupSessionConfig& cfg) {
  if (stream.empty()) throw Error(ErrorCode::empty_session, "no packets in session");
  const std::size_t cut = setup_cut_index(stream, cfg);
  std::vector<PacketFeatures> out;
  out.reserve(cut);
  for (std::size_t i = 0; i < cut; ++i) out.push_back(stream[i].features);
  return out;
}

Fingerprint build_fingerprint(const Mac& mac, std::span<const PacketFeatures> packets) {
  if (packets.empty()) throw Error(ErrorCode::empty_input, "fingerprint needs at least one packet");
  Fingerprint fp;
  fp.device_mac = mac;
  for (const auto& p : packets) {
    if (fp.columns.empty() || fp.columns.back() != p) fp.columns.push_back(p);
  }
  return fp;
}

FixedFingerprint to_fixed(const Fingerprint& fp) {
  FixedFingerprint out;
  out.label = fp.label;
  std::vector<const PacketFeatures*> kept;
  kept.reserve(kFixedPackets);
  for (const auto& col : fp.columns) {
    if (kept.size() == kFixedPackets) break;
    const bool seen = std::any_of(kept.begin(), kept.end(),
                                  [&](const PacketFeatures* k) { return *k == col; });
    if (seen) continue;
    std::copy(col.values.begin(), col.values.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(kept.size() * kFeatureCount));
    kept.push_back(&col);
  }
  return out;
}

void save_fingerprints(const FingerprintDb& db, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["schema"] = kJsonSchema;
  auto& list = doc["fingerprints"] = nlohmann::json::array();
  for (const auto& rec : db) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : rec.full.columns) cols.push_back(c.values);
    list.push_back({
        {"mac", rec.full.device_mac.to_string()},
        {"label", rec.full.label ? nlohmann::json(rec.full.label->str()) : nlohmann::json()},
        {"columns", std::move(cols)},
    });
  }
  const auto json_path = with_ext(path, ".json");
  std::ofstream js(json_path);
  if (!js) throw Error(ErrorCode::io_error, "cannot write " + json_path.string());
  js << doc.dump(1) << '\n';

  const auto csv_path = with_ext(path, ".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::io_error, "cannot write " + csv_path.string());
  csv << kCsvSchema << "\nlabel";
  for (std::size_t i = 0; i < kFixedLength; ++i) csv << ",f" << i;
  csv << '\n';
  for (const auto& rec : db) {
    csv << (rec.fixed.label ? rec.fixed.label->str() : "");
    for (auto v : rec.fixed.values) csv << ',' << v;
    csv << '\n';
  }
}

namespace {

std::vector<FixedFingerprint> load_fixed_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvSchema) {
    throw Error(ErrorCode::schema_mismatch, path.string() + ": missing or wrong schema line");
  }
  if (!std::getline(in, line) ||
      std::count(line.begin(), line.end(), ',') != static_cast<std::ptrdiff_t>(kFixedLength) ||
      !line.starts_with("label,")) {
    throw Error(ErrorCode::schema_mismatch, path.string() + ": expected 277-column header");
  }
  std::vector<FixedFingerprint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FixedFingerprint fx;
    std::string_view rest = line;
    auto comma = rest.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::corrupt_file, path.string() + ": short row");
    }
    if (comma > 0) fx.label = DeviceTypeId(std::string(rest.substr(0, comma)));
    rest.remove_prefix(comma + 1);
    for (std::size_t i = 0; i < kFixedLength; ++i) {
      const auto end = i + 1 < kFixedLength ? rest.find(',') : rest.size();
      if (end == std::string_view::npos) {
        throw Error(ErrorCode::corrupt_file, path.string() + ": short row");
      }
      const auto cell = rest.substr(0, end);
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), fx.values[i]);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::corrupt_file, path.string() + ": bad number");
      }
      rest.remove_prefix(std::min(rest.size(), end + 1));
    }
    out.push_back(std::move(fx));
  }
  return out;
}

}  // namespace

FingerprintDb load_fingerprints(const std::filesystem::path& path) {
  const auto json_path = with_ext(path, ".json");
  std::ifstream js(json_path);
  if (!js) throw Error(ErrorCode::io_error, "cannot open " + json_path.string());

  FingerprintDb db;
  try {
    const auto doc = nlohmann::json::parse(js);
    if (doc.value("schema", "") != kJsonSchema) {
      throw Error(ErrorCode::schema_mismatch, json_path.string() + ": wrong schema");
    }
    for (const auto& item : doc.at("fingerprints")) {
      Fingerprint fp;
      const auto mac = Mac::parse(item.at("mac").get<std::string>());
      if (!mac) throw Error(ErrorCode::corrupt_file, json_path.string() + ": bad mac");
      fp.device_mac = *mac;
      if (!item.at("label").is_null()) fp.label = DeviceTypeId(item.at("label").get<std::string>());
      for (const auto& col : item.at("columns")) {
        if (col.size() != kFeatureCount) {
          throw Error(ErrorCode::corrupt_file, json_path.string() + ": column width");
        }
        PacketFeatures p;
        p.values = col.get<std::array<std::int32_t, kFeatureCount>>();
        fp.columns.push_back(p);
      }
      if (fp.columns.empty()) {
        throw Error(ErrorCode::corrupt_file, json_path.string() + ": empty fingerprint");
      }
      db.push_back({std::move(fp), {}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_file, json_path.string() + ": " + e.what());
  }

  auto fixed = load_fixed_csv(with_ext(path, ".csv"));
  if (fixed.size() != db.size()) {
    throw Error(ErrorCode::corrupt_file, "fingerprint files disagree on record count");
  }
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (fixed[i] != to_fixed(db[i].full)) {
      throw Error(ErrorCode::corrupt_file,
                  "record " + std::to_string(i) + ": F' does not match its F matrix");
    }
    db[i].fixed = std::move(fixed[i]);
  }
  return db;
}

}  // namespace iotguard
