#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "logprep/logprep.hpp"

using namespace logprep;

namespace {

const std::string kData = LOGPREP_TEST_DATA;

RuleCatalog only(const RuleCatalog& base, std::initializer_list<std::string_view> names) {
  RuleCatalog c = base.with_all_disabled();
  for (auto n : names) c = c.with_enabled(n, true);
  return c;
}

RuleCatalog with_order(const RuleCatalog& base, std::string_view name, unsigned order) {
  std::vector<MaskRule> rules = base.rules();
  for (auto& r : rules)
    if (r.name == name) r.order = order;
  return RuleCatalog(std::move(rules), base.provenance());
}

// Messages built from fragments that exercise every rule and their borders.
std::vector<std::string> random_messages(std::size_t n, unsigned seed) {
  static const std::vector<std::string> frags{
      "00:00:00:12:34:56", "aa-bb-cc-dd-ee-ff", "10.100.22.250", "10.0.0.1:8080", "fe80::1ff:fe23:4567:890a", "::1",
      "2001:db8::ff00:42:8329", "/var/log/syslog", "/a/b.c/", "http://example.com/x?y=1", "https://h.io/a,",
      "com.example.Foo$Bar", "proxy.cse.cuhk.edu.hk:5070", "512MB", "1.5GiB", "250ms", "3.5s", "<1 sec", "12:30:45",
      "9:05", "Jan", "Monday", "Sept", "3.14", "-2.5e-3", "x=42", "size=-7", "0x1F", "deadbeef", "abcd", "12", "-3",
      "+4", "blk_-160899", "core.42", "word", "a,b", "(", ")", "[", "]", "=", ":", ".", ",", "<*>", "<*>:<*>",
      "1.2.3.4.5", "v1.2", "t12", "12ab", "ab12", "1:2:3", "::", "--", "_", "$", "%eth0"};
  std::mt19937 rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const int k = 1 + static_cast<int>(rng() % 7);
    for (int j = 0; j < k; ++j) {
      if (j) s += (rng() % 4 == 0) ? "" : " ";
      s += frags[rng() % frags.size()];
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(DefaultCatalog, FifteenEnabledRules) {
  const auto c = default_catalog();
  EXPECT_EQ(c.enabled_count(), 15u);
  EXPECT_EQ(c.size(), 17u);
  EXPECT_EQ(c.provenance(), "default");
  EXPECT_FALSE(c.find("block_id")->enabled);
  EXPECT_FALSE(c.find("core_id")->enabled);
}

TEST(DefaultCatalog, OrdersUniqueAndPatternsCompile) {
  const auto c = default_catalog();
  std::set<unsigned> orders;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& r = c.rules()[i];
    EXPECT_TRUE(orders.insert(r.order).second) << r.name;
    EXPECT_NE(r.mask.find("<*>"), std::string::npos);
    EXPECT_NO_THROW(boost::regex(r.pattern, boost::regex::perl)) << r.name;
    if (i) {
      EXPECT_LT(c.rules()[i - 1].order, r.order);
    }
  }
}

TEST(DefaultCatalog, RequiredRelativeOrders) {
  const auto c = default_catalog();
  auto order = [&](std::string_view n) { return c.find(n)->order; };
  EXPECT_LT(order("mac_address"), order("time"));
  EXPECT_LT(order("ipv4_port"), order("ipv4"));
  EXPECT_LT(order("url"), order("path"));
  EXPECT_LT(order("month_name"), order("hex_or_integer"));
  EXPECT_LT(order("weekday_name"), order("hex_or_integer"));
}

TEST(DefaultCatalog, BlockIdExtra) {
  const auto c = default_catalog().with_enabled("block_id", true);
  EXPECT_EQ(apply_masks("blk_-1608999687919862906", c), "<*>");
  EXPECT_EQ(apply_masks("Receiving block blk_38865049064139660 src", c), "Receiving block <*> src");
  const auto core = default_catalog().with_enabled("core_id", true);
  EXPECT_EQ(apply_masks("generated core.2275", core), "generated <*>");
}

TEST(DefaultCatalog, CoversEachCategory) {
  const auto c = default_catalog();
  const std::vector<std::pair<std::string, std::string>> cases{
      {"fetch http://example.com/a/b?c=1 done", "fetch <*> done"},
      {"MAC 00:00:00:12:34:56 up", "MAC <*> up"},
      {"addr fe80::1ff:fe23:4567:890a%eth0 up", "addr <*> up"},
      {"connect 10.0.0.1:8080 ok", "connect <*> ok"},
      {"from 10.0.0.1 ok", "from <*> ok"},
      {"open /var/www/cgi-bin/awstats.pl failed", "open <*> failed"},
      {"class com.example.Foo$Bar loaded", "class <*> loaded"},
      {"host proxy.cse.cuhk.edu.hk:5070 open", "host <*> open"},
      {"used 512MB of 1.5GB", "used <*> of <*>"},
      {"took 250ms then 3s then <1 sec", "took <*> then <*> then <*>"},
      {"at 12:30:45,123 ok", "at <*> ok"},
      {"Mon Jan 01 boot", "<*> <*> <*> boot"},
      {"ratio 0.75 ok", "ratio <*> ok"},
      {"totalMemory=1024 ok", "totalMemory=<*> ok"},
      {"code 0x1F and 12345 and deadbeef1", "code <*> and <*> and <*>"},
      {"child 8766 in slot 12", "child <*> in slot <*>"},
  };
  for (const auto& [in, want] : cases) EXPECT_EQ(apply_masks(in, c), want) << in;
}

TEST(DefaultCatalog, LeavesWordsAlone) {
  const auto c = default_catalog();
  for (const std::string s : {"no variables here", "deadline reached", "Maybe Monkey Junebug", "face cafe", "done."})
    EXPECT_EQ(apply_masks(s, c), s);
}

TEST(ApplyMasks, MacBeforeTime) {
  EXPECT_EQ(apply_masks("00:00:00:12:34:56", default_catalog()), "<*>");
}

TEST(ApplyMasks, OrderSensitivity) {
  const auto swapped = with_order(default_catalog(), "time", 15);
  ASSERT_LT(swapped.find("time")->order, swapped.find("mac_address")->order);
  const auto out = apply_masks("00:00:00:12:34:56", swapped);
  EXPECT_NE(out, "<*>");
  EXPECT_EQ(out, "<*>:<*>");
}

TEST(ApplyMasks, CommaPreserved) {
  EXPECT_EQ(apply_masks("synchronized to 10.100.22.250, stratum 3", default_catalog()),
            "synchronized to <*>, stratum <*>");
}

TEST(ApplyMasks, NoMatch) { EXPECT_EQ(apply_masks("no variables here", default_catalog()), "no variables here"); }

TEST(ApplyMasks, ExistingPlaceholdersAreOpaque) {
  const auto c = default_catalog();
  EXPECT_EQ(apply_masks("[client <*>] script <*>", c), "[client <*>] script <*>");
  EXPECT_EQ(apply_masks("<*>:<*> 12", c), "<*>:<*> <*>");
  EXPECT_TRUE(mask_with_spans("<*> a", c).spans.empty());
}

TEST(ApplyMasks, SpansAreInOriginalCoordinates) {
  const std::string s = "from 10.0.0.1 port 22 after 250ms";
  const auto r = mask_with_spans(s, default_catalog());
  ASSERT_EQ(r.spans.size(), 3u);
  EXPECT_EQ(s.substr(r.spans[0].start, r.spans[0].end - r.spans[0].start), "10.0.0.1");
  EXPECT_EQ(s.substr(r.spans[1].start, r.spans[1].end - r.spans[1].start), "22");
  EXPECT_EQ(s.substr(r.spans[2].start, r.spans[2].end - r.spans[2].start), "250ms");
  EXPECT_EQ(default_catalog().rules()[r.spans[0].rule_index].name, "ipv4");
  EXPECT_EQ(default_catalog().rules()[r.spans[2].rule_index].name, "time_duration");
}

TEST(ApplyMasks, Idempotent) {
  const auto c = default_catalog();
  for (const auto& m : random_messages(20000, 7)) {
    const auto once = apply_masks(m, c);
    ASSERT_EQ(apply_masks(once, c), once) << "input: " << m;
  }
}

TEST(ApplyMasks, IdempotentWithExtrasEnabled) {
  const auto c = default_catalog().with_enabled("block_id", true).with_enabled("core_id", true);
  for (const auto& m : random_messages(5000, 11)) {
    const auto once = apply_masks(m, c);
    ASSERT_EQ(apply_masks(once, c), once) << "input: " << m;
  }
}

TEST(ApplyMasks, DisabledRulesNeverMatch) {
  const auto base = default_catalog();
  for (const auto& m : random_messages(2000, 3)) {
    for (std::size_t ri = 0; ri < base.size(); ++ri) {
      const auto c = base.with_enabled(base.rules()[ri].name, false);
      for (const auto& s : mask_with_spans(m, c).spans) ASSERT_NE(s.rule_index, ri);
    }
  }
  EXPECT_EQ(apply_masks("10.0.0.1 42", base.with_all_disabled()), "10.0.0.1 42");
}

TEST(LegacyCatalog, TenRulesVerbatim) {
  const auto c = loghub_legacy_catalog();
  EXPECT_EQ(c.size(), 10u);
  EXPECT_EQ(c.enabled_count(), 10u);
  EXPECT_EQ(c.find("block_id")->pattern, R"(blk_-?\d+)");
  EXPECT_EQ(c.find("ipv4")->pattern, R"((/|)(\d+\.){3}\d+)");
  EXPECT_EQ(c.find("hex_or_integer")->pattern, R"(\b(\-?\+?\d+)\b|\b0[Xx][a-fA-F\d]+\b|\b[a-fA-F\d]{4,}\b)");
  EXPECT_EQ(apply_masks("blk_-1608999687919862906", c), "<*>");
}

TEST(LoghubDomainCatalog, KnownAndUnknown) {
  EXPECT_EQ(loghub_datasets().size(), 14u);
  const auto hdfs = loghub_domain_catalog("HDFS");
  EXPECT_EQ(hdfs.provenance(), "loghub:HDFS");
  EXPECT_EQ(apply_masks("Receiving block blk_-160899 src: /10.250.19.102:54106", hdfs), "Receiving block <*> src: /<*>");
  EXPECT_EQ(loghub_domain_catalog("HealthApp").size(), 0u);
  EXPECT_THROW(loghub_domain_catalog("Nope"), ConfigError);
}

TEST(Catalog, ValidationErrors) {
  std::vector<MaskRule> dup_order{{"a", RuleCategory::ipv4, "a", "<*>", 1, true},
                                  {"b", RuleCategory::ipv4, "b", "<*>", 1, true}};
  EXPECT_THROW(RuleCatalog(dup_order, "t"), ValidationError);
  std::vector<MaskRule> dup_name{{"a", RuleCategory::ipv4, "a", "<*>", 1, true},
                                 {"a", RuleCategory::ipv4, "b", "<*>", 2, true}};
  EXPECT_THROW(RuleCatalog(dup_name, "t"), ValidationError);
  std::vector<MaskRule> bad_mask{{"a", RuleCategory::ipv4, "a", "VAR", 1, true}};
  EXPECT_THROW(RuleCatalog(bad_mask, "t"), ValidationError);
  EXPECT_THROW(default_catalog().with_enabled("nope", true), ValidationError);
}

TEST(CatalogIo, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "logprep_catalog_roundtrip.json";
  save_catalog(default_catalog(), path.string());
  EXPECT_EQ(load_catalog(path.string()), default_catalog());
  save_catalog(loghub_legacy_catalog(), path.string());
  EXPECT_EQ(load_catalog(path.string()), loghub_legacy_catalog());
  std::filesystem::remove(path);
}

TEST(CatalogIo, DuplicateOrderRejected) {
  EXPECT_THROW(load_catalog(kData + "/duplicate_order.json"), ValidationError);
}

TEST(CatalogIo, BadPatternNamesRule) {
  try {
    load_catalog(kData + "/bad_pattern.json");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("broken_rule"), std::string::npos) << e.what();
  }
}

TEST(CatalogIo, UnknownCategoryRejected) {
  EXPECT_THROW(load_catalog(kData + "/unknown_category.json"), ValidationError);
  EXPECT_THROW(load_catalog(kData + "/missing.json"), IoError);
}

TEST(CatalogIo, CustomMask) {
  const auto c = load_catalog(kData + "/custom_ipv4_port_mask.json");
  EXPECT_EQ(c.find("hex_or_integer")->mask, "<*>");
  EXPECT_EQ(apply_masks("1.2.3.4:80", c), "<*>:<*>");
  EXPECT_EQ(apply_masks("from 1.2.3.4:80 via 5.6.7.8 id 9", c), "from <*>:<*> via <*> id <*>");
}

TEST(Applicability, IpV6OnlyAfterPrefix) {
  std::vector<std::string> lines;
  for (int i = 1; i <= 3000; ++i) {
    if (i == 2500)
      lines.push_back("peer fe80::1ff:fe23:4567:890a joined");
    else
      lines.push_back("request " + std::to_string(i) + " served from 10.0.0." + std::to_string(i % 250));
  }
  const auto at2000 = estimate_applicability(lines, default_catalog(), 2000);
  EXPECT_FALSE(at2000.catalog.find("ipv6")->enabled);
  EXPECT_FALSE(at2000.catalog.find("mac_address")->enabled);
  EXPECT_TRUE(at2000.catalog.find("ipv4")->enabled);
  EXPECT_TRUE(at2000.catalog.find("hex_or_integer")->enabled);
  EXPECT_EQ(at2000.lines_scanned, 2000u);
  const auto at3000 = estimate_applicability(lines, default_catalog(), 3000);
  EXPECT_TRUE(at3000.catalog.find("ipv6")->enabled);
  EXPECT_EQ(at3000.match_counts.at("ipv6"), 1u);
  for (std::size_t i = 0; i < at2000.catalog.size(); ++i)
    EXPECT_EQ(at2000.catalog.rules()[i].order, default_catalog().rules()[i].order);
}

TEST(Applicability, EveryRuleFiringKeepsCatalog) {
  const std::vector<std::string> lines{
      "http://a.io/x 00:11:22:33:44:55 fe80::1 10.0.0.1:80 10.0.0.2 /var/log com.example.Foo 512MB 250ms "
      "12:30:45 Jan Mon 3.14 x=5 42",
      "nothing"};
  const auto r = estimate_applicability(lines, default_catalog());
  for (const auto& [name, n] : r.match_counts) EXPECT_GE(n, 1u) << name;
  EXPECT_EQ(r.catalog, default_catalog());
  EXPECT_FALSE(r.empty_input);
}

TEST(Applicability, EmptyInputAndBadPrefix) {
  const auto r = estimate_applicability({}, default_catalog());
  EXPECT_TRUE(r.empty_input);
  EXPECT_EQ(r.catalog, default_catalog());
  const std::vector<std::string> one{"x"};
  EXPECT_THROW(estimate_applicability(one, default_catalog(), 0), ConfigError);
}

TEST(Applicability, ShadowedRuleCountsAsUnused) {
  // ipv4 candidates inside "ip:port" are always claimed by ipv4_port.
  const std::vector<std::string> lines{"to 10.0.0.1:80", "to 10.0.0.2:81"};
  const auto r = estimate_applicability(lines, default_catalog());
  EXPECT_TRUE(r.catalog.find("ipv4_port")->enabled);
  EXPECT_FALSE(r.catalog.find("ipv4")->enabled);
}

namespace {

GroundTruthEntry entry(LineId id, std::string content, std::string tmpl) {
  GroundTruthEntry e{id, std::move(content), std::move(tmpl), {}, false};
  if (auto v = extract_variables(e.content, e.template_text))
    e.variables = *v;
  else
    e.extraction_failed = true;
  return e;
}

}  // namespace

TEST(MatchStatistics, SingleInteger) {
  const std::vector<GroundTruthEntry> es{entry(1, "pid 42", "pid <*>")};
  const auto r = match_statistics(es, only(default_catalog(), {"hex_or_integer"}));
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_EQ(r.per_rule.at("hex_or_integer").true_positives, 1u);
}

TEST(MatchStatistics, SystemSpecificVariableIsMissed) {
  const std::vector<GroundTruthEntry> es{entry(1, "error abc-1 occurred", "error <*> occurred")};
  const auto c = default_catalog();
  const auto r = match_statistics(es, c);
  // Reference: compare every mask span with every variable span directly.
  std::size_t matched = 0, tp = 0, fp = 0;
  const auto spans = mask_with_spans(es[0].content, c).spans;
  for (const auto& v : es[0].variables) {
    bool hit = false;
    for (const auto& s : spans) hit = hit || (s.start == v.start && s.end == v.end);
    matched += hit;
  }
  for (const auto& s : spans) {
    bool hit = false;
    for (const auto& v : es[0].variables) hit = hit || (s.start == v.start && s.end == v.end);
    (hit ? tp : fp)++;
  }
  EXPECT_EQ(matched, 0u);
  EXPECT_EQ(r.matched_variables, matched);
  EXPECT_EQ(r.total_variables, 1u);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.precision, safe_ratio(tp, tp + fp));
}

TEST(MatchStatistics, EmptyCatalogHasZeroRecall) {
  const std::vector<GroundTruthEntry> es{entry(1, "pid 42", "pid <*>"), entry(2, "x", "x")};
  const auto r = match_statistics(es, default_catalog().with_all_disabled());
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_TRUE(r.per_rule.empty());
}

TEST(MatchStatistics, SkipsFailedEntriesAndEmptyVariables) {
  const std::vector<GroundTruthEntry> es{entry(1, "pid 42", "pid <*>"), entry(2, "a b", "c <*>"),
                                         entry(3, "empty []", "empty [<*>]")};
  const auto r = match_statistics(es, default_catalog());
  EXPECT_EQ(r.skipped_entries, 1u);
  EXPECT_EQ(r.empty_variables, 1u);
  EXPECT_EQ(r.total_variables, 1u);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
}

TEST(MatchStatistics, BoundsAndAppendMonotonicity) {
  const auto fixture = load_structured_csv(kData + "/roundtrip_50.csv");
  const auto full = default_catalog().with_enabled("block_id", true).with_enabled("core_id", true);
  RuleCatalog growing = full.with_all_disabled();
  double prev = 0.0;
  for (const auto& rule : full.rules()) {
    growing = growing.with_enabled(rule.name, true);
    const auto r = match_statistics(fixture, growing);
    EXPECT_GE(r.recall, prev) << "after appending " << rule.name;
    EXPECT_GE(r.precision, 0.0);
    EXPECT_LE(r.precision, 1.0);
    EXPECT_LE(r.recall, 1.0);
    prev = r.recall;
  }
  EXPECT_GT(prev, 0.5);
}

TEST(MatchStatistics, JsonAndCsvRoundTrip) {
  const auto fixture = load_structured_csv(kData + "/roundtrip_50.csv");
  const auto r = match_statistics(fixture, default_catalog());
  const auto back = match_report_from_json(nlohmann::json::parse(match_report_to_json(r).dump()));
  EXPECT_EQ(match_report_to_json(back), match_report_to_json(r));

  std::ostringstream out;
  write_match_report_csv(out, r);
  std::istringstream in(out.str());
  const auto t = csv::read(in);
  EXPECT_TRUE(t.column("true_positives") && t.column("false_positives"));
  EXPECT_EQ(t.rows.size(), r.per_rule.size() + 1);
  EXPECT_EQ(t.rows.back()[0], "dataset");
}
