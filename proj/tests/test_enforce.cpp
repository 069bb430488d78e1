#include <doctest.h>

#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "iotguard/enforce.hpp"
#include "test_util.hpp"

using namespace iotguard;

namespace {

Mac mac(std::uint8_t last) { return Mac({0x02, 0, 0, 0, 0, last}); }

const Ipv4 kCloud(34, 192, 121, 32);
const Ipv4 kOther(8, 8, 8, 8);

enum class Dest { untrusted_peer, trusted_peer, permitted_internet, other_internet };

FlowKey flow(const Mac& src, Dest d) {
  switch (d) {
    case Dest::untrusted_peer: return {src, DeviceDestination{mac(0xee), Overlay::untrusted}};
    case Dest::trusted_peer: return {src, DeviceDestination{mac(0xef), Overlay::trusted}};
    case Dest::permitted_internet: return {src, InternetDestination{kCloud}};
    case Dest::other_internet: return {src, InternetDestination{kOther}};
  }
  return {};
}

void fill_levels(RuleCache& cache) {
  cache.update(make_rule(mac(1), IsolationLevel::strict, {}, 1, 10));
  cache.update(make_rule(mac(2), IsolationLevel::restricted, {kCloud}, 2, 10));
  cache.update(make_rule(mac(3), IsolationLevel::trusted, {}, 3, 10));
}

}  // namespace

TEST_CASE("overlay membership") {
  CHECK(overlay_of(IsolationLevel::strict) == Overlay::untrusted);
  CHECK(overlay_of(IsolationLevel::restricted) == Overlay::untrusted);
  CHECK(overlay_of(IsolationLevel::trusted) == Overlay::trusted);
  for (auto l : {IsolationLevel::strict, IsolationLevel::restricted, IsolationLevel::trusted}) {
    CHECK(parse_isolation(to_string(l)) == l);
  }
  CHECK_FALSE(parse_isolation("open").has_value());
}

TEST_CASE("decision truth table") {
  RuleCache cache;
  fill_levels(cache);
  struct Row {
    std::uint8_t src;
    Dest dst;
    Verdict want;
  };
  const Row table[] = {
      {1, Dest::untrusted_peer, Verdict::permit},     {1, Dest::trusted_peer, Verdict::deny},
      {1, Dest::permitted_internet, Verdict::deny},   {1, Dest::other_internet, Verdict::deny},
      {2, Dest::untrusted_peer, Verdict::permit},     {2, Dest::trusted_peer, Verdict::deny},
      {2, Dest::permitted_internet, Verdict::permit}, {2, Dest::other_internet, Verdict::deny},
      {3, Dest::untrusted_peer, Verdict::deny},       {3, Dest::trusted_peer, Verdict::permit},
      {3, Dest::permitted_internet, Verdict::permit}, {3, Dest::other_internet, Verdict::permit},
  };
  for (const auto& row : table) {
    CAPTURE(int{row.src});
    CAPTURE(static_cast<int>(row.dst));
    const auto d = decide(flow(mac(row.src), row.dst), cache);
    CHECK(d.verdict == row.want);
    CHECK_FALSE(d.needs_identification);
    CHECK_FALSE(d.reason.empty());
  }
}

TEST_CASE("strict permits imply restricted permits") {
  RuleCache cache;
  fill_levels(cache);
  for (auto d : {Dest::untrusted_peer, Dest::trusted_peer, Dest::permitted_internet, Dest::other_internet}) {
    if (decide(flow(mac(1), d), cache).verdict == Verdict::permit) {
      CHECK(decide(flow(mac(2), d), cache).verdict == Verdict::permit);
    }
  }
}

TEST_CASE("unknown sources are denied and flagged") {
  RuleCache cache;
  fill_levels(cache);
  const auto d = decide(flow(mac(9), Dest::untrusted_peer), cache);
  CHECK(d.verdict == Verdict::deny);
  CHECK(d.needs_identification);
}

TEST_CASE("device destinations without an overlay use the cached rule") {
  RuleCache cache;
  fill_levels(cache);
  CHECK(decide({mac(3), DeviceDestination{mac(1), {}}}, cache).verdict == Verdict::deny);
  CHECK(decide({mac(2), DeviceDestination{mac(1), {}}}, cache).verdict == Verdict::permit);
  // An uncached peer sits in the untrusted overlay.
  CHECK(decide({mac(1), DeviceDestination{mac(0x77), {}}}, cache).verdict == Verdict::permit);
  CHECK(decide({mac(3), DeviceDestination{mac(0x77), {}}}, cache).verdict == Verdict::deny);
}

TEST_CASE("rule construction") {
  const auto rule = make_rule(*Mac::parse("13-73-74-7E-A9-C2"), IsolationLevel::restricted,
                              {kCloud, Ipv4(23, 20, 121, 29)}, 12345, 1234, "Policy1");
  CHECK(rule.hash.size() == 10);
  // FNV-1a over "13-73-74-7E-A9-C2,|restricted|23.20.121.29,34.192.121.32,", base62.
  CHECK(rule.hash == "W6zpupn7K9");
  CHECK(rule_hash({*Mac::parse("13-73-74-7E-A9-C2")}, IsolationLevel::restricted,
                  {Ipv4(23, 20, 121, 29), kCloud}) == rule.hash);

  const auto j = rule_to_json(rule);
  CHECK(j["source_mac"] == nlohmann::json::array({"13-73-74-7E-A9-C2"}));
  CHECK(j["permitted_ip"] == nlohmann::json::array({"34.192.121.32", "23.20.121.29"}));
  CHECK(j["id"] == 12345);
  CHECK(j["priority"] == 1234);
  CHECK(j["name"] == "Policy1");
  CHECK(rule_from_json(j) == rule);

  CHECK(make_rule(mac(1), IsolationLevel::trusted, {}, 1, 1).permitted_ip.empty());
  try {
    make_rule(mac(1), IsolationLevel::restricted, {}, 1, 1);
    FAIL("expected RestrictedWithoutPermittedIps");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::restricted_without_permitted_ips);
  }
  CHECK_THROWS_AS(make_rule(mac(1), IsolationLevel::strict, {kCloud}, 1, 1), Error);

  auto tampered = j;
  tampered["permitted_ip"].push_back("1.1.1.1");
  CHECK_THROWS_AS(rule_from_json(tampered), Error);
  CHECK_THROWS_AS(rules_from_json_text("{}"), Error);
}

TEST_CASE("rule cache") {
  RuleCache cache;
  CHECK(cache.lookup(mac(1)) == nullptr);
  const auto r1 = make_rule(mac(1), IsolationLevel::strict, {}, 1, 1);
  cache.update(r1);
  REQUIRE(cache.lookup(mac(1)));
  CHECK(*cache.lookup(mac(1)) == r1);

  const auto r1b = make_rule(mac(1), IsolationLevel::trusted, {}, 7, 1);
  cache.update(r1b);
  CHECK(cache.size() == 1);
  CHECK(cache.lookup(mac(1))->level == IsolationLevel::trusted);
  CHECK(cache.erase(mac(1)));
  CHECK_FALSE(cache.erase(mac(1)));
  CHECK(cache.size() == 0);
}

TEST_CASE("lookup is independent of insertion order") {
  std::vector<EnforcementRule> rules;
  for (std::uint8_t i = 0; i < 50; ++i) {
    rules.push_back(make_rule(mac(i % 20), i % 2 ? IsolationLevel::strict : IsolationLevel::trusted, {}, i, 1));
  }
  // Later updates win, so keep the relative order per MAC and shuffle the rest.
  RuleCache a, b;
  for (const auto& r : rules) a.update(r);
  std::vector<EnforcementRule> last_per_mac;
  for (std::uint8_t m = 0; m < 20; ++m) {
    for (auto it = rules.rbegin(); it != rules.rend(); ++it) {
      if (it->source_mac[0] == mac(m)) {
        last_per_mac.push_back(*it);
        break;
      }
    }
  }
  Rng rng(1);
  rng.shuffle(last_per_mac);
  for (const auto& r : last_per_mac) b.update(r);
  CHECK(a.size() == 20);
  for (std::uint8_t m = 0; m < 20; ++m) CHECK(*a.lookup(mac(m)) == *b.lookup(mac(m)));
}

TEST_CASE("capacity bound evicts the longest-absent device") {
  RuleCache cache(3);
  for (std::uint8_t i = 1; i <= 3; ++i) cache.update(make_rule(mac(i), IsolationLevel::strict, {}, i, 1));
  try {
    cache.update(make_rule(mac(4), IsolationLevel::strict, {}, 4, 1));
    FAIL("expected CapacityExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::capacity_exceeded);
  }
  // Replacing an existing MAC's rule never needs room.
  cache.update(make_rule(mac(2), IsolationLevel::trusted, {}, 9, 1));

  cache.mark_absent(mac(3));
  cache.mark_absent(mac(1));
  cache.update(make_rule(mac(4), IsolationLevel::strict, {}, 4, 1));
  CHECK(cache.lookup(mac(3)) == nullptr);
  CHECK(cache.lookup(mac(1)) != nullptr);

  cache.mark_present(mac(1));
  CHECK_THROWS_AS(cache.update(make_rule(mac(5), IsolationLevel::strict, {}, 5, 1)), Error);
  CHECK(cache.size() == 3);
}

TEST_CASE("concurrent readers with a writer") {
  RuleCache cache;
  for (std::uint8_t i = 0; i < 100; ++i) cache.update(make_rule(mac(i), IsolationLevel::strict, {}, i, 1));
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> misses{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      while (!stop) {
        for (std::uint8_t i = 0; i < 100; ++i) {
          if (!cache.lookup(mac(i))) ++misses;
        }
      }
    });
  }
  for (int round = 0; round < 200; ++round) {
    const auto i = static_cast<std::uint8_t>(round % 100);
    cache.update(make_rule(mac(i), round % 2 ? IsolationLevel::trusted : IsolationLevel::strict, {}, round, 1));
  }
  stop = true;
  for (auto& t : readers) t.join();
  CHECK(misses == 0);
  CHECK(cache.size() == 100);
}

TEST_CASE("flows CSV") {
  std::istringstream in(
      "src_mac,dst_kind,dst_value,dst_overlay\n"
      "02:00:00:00:00:01,device,02:00:00:00:00:02,trusted\n"
      "02-00-00-00-00-01,internet,8.8.8.8,\n"
      "02:00:00:00:00:01,device,02:00:00:00:00:03\n");
  const auto flows = parse_flows_csv(in);
  REQUIRE(flows.size() == 3);
  CHECK(std::get<DeviceDestination>(flows[0].dst).overlay == Overlay::trusted);
  CHECK(std::get<InternetDestination>(flows[1].dst).dst_ip == kOther);
  CHECK_FALSE(std::get<DeviceDestination>(flows[2].dst).overlay.has_value());

  std::istringstream bad("02:00:00:00:00:01,satellite,1.2.3.4\n");
  CHECK_THROWS_AS(parse_flows_csv(bad), Error);
}
