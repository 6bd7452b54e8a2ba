#include <cmath>

#include "doctest.h"
#include "credscan/bench.h"
#include "credscan/error.h"
#include "credscan/metrics.h"
#include "credscan/random.h"

using namespace credscan;

namespace {

// Clock that advances by the given durations, one per measured call.
struct FakeClock {
  std::vector<double> durations;
  std::size_t reads = 0;
  double now = 0.0;

  Clock clock() {
    return [this] {
      // Reads come in (start, end) pairs; the end read adds a duration.
      if (reads % 2 == 1) now += durations[(reads / 2) % durations.size()];
      ++reads;
      return now;
    };
  }
};

ComparisonRow imported(const std::string& name, double f1) {
  return ComparisonRow{name, 0.9, 0.5, 0.5, f1, RowSource::kImported, "somewhere"};
}

}  // namespace

TEST_CASE("time_op with a fake clock") {
  FakeClock fake{{1.0, 2.0, 3.0}};
  int calls = 0;
  TimingOptions opts;
  opts.repeats = 3;
  opts.warmup = 0;
  const auto s = time_op([&] { ++calls; }, opts, fake.clock());
  CHECK(calls == 3);
  CHECK(s.samples == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.mean_seconds == 2.0);
  CHECK(s.std_seconds == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.ci95_seconds == doctest::Approx(1.1316065276116665).epsilon(1e-14));
  CHECK_FALSE(s.single_sample);
}

TEST_CASE("warmup is not measured") {
  FakeClock fake{{0.5}};
  int calls = 0;
  TimingOptions opts;
  opts.repeats = 4;
  opts.warmup = 2;
  opts.items = 10;
  const auto s = time_op([&] { ++calls; }, opts, fake.clock());
  CHECK(calls == 6);
  CHECK(s.repeats == 4);
  CHECK(s.std_seconds == 0.0);
  CHECK(s.ci95_seconds == 0.0);
  CHECK(s.per_item_mean_seconds().value() == doctest::Approx(0.05));
  const auto j = timing_to_json(s);
  CHECK(j.at("items") == 10);
  CHECK(j.at("per_item_mean_seconds").get<double>() == doctest::Approx(0.05));
}

TEST_CASE("single repeat and errors") {
  FakeClock fake{{0.25}};
  TimingOptions one;
  one.repeats = 1;
  one.warmup = 0;
  const auto s = time_op([] {}, one, fake.clock());
  CHECK(s.single_sample);
  CHECK(s.std_seconds == 0.0);
  CHECK(s.mean_seconds == 0.25);

  TimingOptions none;
  none.repeats = 0;
  CHECK_THROWS_AS(time_op([] {}, none), DomainError);

  int n = 0;
  TimingOptions opts;
  opts.repeats = 5;
  opts.warmup = 1;
  try {
    time_op(
        [&] {
          if (++n == 3) throw std::runtime_error("boom");
        },
        opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("iteration 2") != std::string::npos);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
  CHECK_THROWS_AS(timing_from_samples({}), DomainError);
}

TEST_CASE("steady clock is monotonic") {
  const auto c = steady_clock_seconds();
  const double a = c();
  const double b = c();
  CHECK(b >= a);
}

TEST_CASE("aggregate_runs against direct formulas") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + uniform_below(rng, 8);
    std::vector<MetricValues> runs(k);
    for (auto& r : runs) {
      r["f1"] = uniform_unit(rng);
      r["accuracy"] = uniform_unit(rng);
    }
    const auto agg = aggregate_runs(runs);
    CHECK(agg.k == k);
    for (const char* name : {"f1", "accuracy"}) {
      double mean = 0;
      for (const auto& r : runs) mean += r.at(name);
      mean /= static_cast<double>(k);
      const auto& e = agg.metrics.at(name);
      CHECK(std::abs(e.mean - mean) < 1e-12);
      if (k == 1) {
        CHECK_FALSE(e.std.has_value());
      } else {
        double ss = 0;
        for (const auto& r : runs) ss += (r.at(name) - mean) * (r.at(name) - mean);
        REQUIRE(e.std.has_value());
        CHECK(std::abs(*e.std - std::sqrt(ss / static_cast<double>(k - 1))) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(aggregate_runs({}), DomainError);
  CHECK_THROWS_AS(aggregate_runs({{{"f1", 0.5}}, {{"mcc", 0.5}}}), DomainError);
}

TEST_CASE("aggregate formatting") {
  CHECK(format_aggregate({0.9731, 0.0121}) == "0.973 ± 0.012");
  CHECK(format_aggregate({0.5, std::nullopt}) == "0.500");
  const auto agg = aggregate_runs({{{"f1", 0.9}}, {{"f1", 0.8}}});
  const auto j = aggregate_to_json(agg);
  CHECK(j.at("k") == 2);
  CHECK(aggregate_to_text(agg).find("f1") != std::string::npos);
  const auto single = aggregate_to_json(aggregate_runs({{{"f1", 0.9}}}));
  CHECK(single.at("metrics").at("f1").at("std").is_null());
}

TEST_CASE("metric_values drops undefined entries") {
  const std::vector<std::size_t> y = {0, 0, 0}, p = {0, 0, 0};
  const auto v = metric_values(build_report(confusion(y, p, 2)));
  CHECK(v.at("accuracy") == 1.0);
  CHECK_FALSE(v.count("mcc"));
}

TEST_CASE("published rows and ranking") {
  const auto rows = load_published_rows(CREDSCAN_TEST_DATA_DIR "/published_tool_results.json");
  REQUIRE(rows.size() == 7);
  for (const auto& r : rows) {
    CHECK(r.source == RowSource::kImported);
    CHECK_FALSE(r.citation.empty());
  }
  const auto ranked = rank_rows(rows);
  CHECK(ranked.front().tool_name == "Cred Sweeper");
  CHECK(ranked.back().tool_name == "Truffle Hog3");
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].f1 >= ranked[i].f1);

  const auto ties = rank_rows({imported("b", 0.5), imported("a", 0.5), imported("c", 0.7)});
  CHECK(ties[0].tool_name == "c");
  CHECK(ties[1].tool_name == "a");
  CHECK(ties[2].tool_name == "b");

  CHECK_THROWS_AS(published_rows_from_json(nlohmann::json{{"tools", 3}}), ParseError);
  CHECK_THROWS_AS(validate(imported("x", 1.5)), DomainError);
  auto no_cite = imported("x", 0.5);
  no_cite.citation.clear();
  CHECK_THROWS_AS(validate(no_cite), DomainError);
}

TEST_CASE("comparison report") {
  const std::vector<std::size_t> y = {0, 1, 1, 0}, p = {0, 1, 1, 0};
  const auto mine = measured_row("credscan", build_report(confusion(y, p, 2)));
  CHECK(mine.source == RowSource::kMeasured);
  CHECK(mine.f1 == 1.0);
  const auto report = comparison_report(mine, {imported("other", 0.4)});
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].tool_name == "credscan");
  const auto text = comparison_to_text(report);
  CHECK(text.find("* ") != std::string::npos);
  CHECK(text.find("somewhere") != std::string::npos);
  const auto j = comparison_to_json(report);
  CHECK(j.at("rows")[0].at("rank") == 1);
  CHECK(j.at("rows")[0].at("measured") == true);
  CHECK(j.at("rows")[1].at("citation") == "somewhere");
}
