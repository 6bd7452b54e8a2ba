#include <cmath>

#include "doctest.h"
#include "oracles.h"
#include "credscan/error.h"
#include "credscan/metrics.h"
#include "credscan/random.h"

using namespace credscan;

namespace {

struct Case {
  std::vector<std::size_t> y, p;
  std::size_t classes;
};

Case random_case(Rng& rng) {
  Case c;
  c.classes = 2 + uniform_below(rng, 4);
  const auto n = 1 + uniform_below(rng, 100);
  for (std::uint64_t i = 0; i < n; ++i) {
    c.y.push_back(uniform_below(rng, c.classes));
    // Bias towards correct predictions so scores spread out.
    c.p.push_back(uniform_below(rng, 3) == 0 ? c.y.back() : uniform_below(rng, c.classes));
  }
  return c;
}

}  // namespace

TEST_CASE("confusion matrix") {
  const std::vector<std::size_t> y = {0, 0, 1, 2, 2, 2};
  const std::vector<std::size_t> p = {0, 1, 1, 2, 0, 2};
  const auto cm = confusion(y, p, 3);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(2, 0) == 1);
  CHECK(cm.total() == 6);
  CHECK(cm.trace() == 4);
  CHECK(cm.true_negatives(0) == 3);
  CHECK(cm.false_positives(0) == 1);
  CHECK(accuracy(cm) == doctest::Approx(4.0 / 6.0));

  auto sum = confusion(std::span(y).first(3), std::span(p).first(3), 3);
  sum += confusion(std::span(y).subspan(3), std::span(p).subspan(3), 3);
  CHECK(sum == cm);
  auto other = ConfusionMatrix(2);
  CHECK_THROWS_AS(sum += other, DomainError);

  CHECK_THROWS_AS(confusion(y, std::span(p).first(2), 3), DomainError);
  CHECK_THROWS_AS(confusion(y, p, 2), DomainError);
  CHECK_THROWS_AS(accuracy(ConfusionMatrix(3)), UndefinedMetricError);
}

TEST_CASE("binary mcc example") {
  const auto m = mcc_binary(2, 1, 1, 0);
  REQUIRE(m.has_value());
  CHECK(*m == doctest::Approx(0.5773502691896258).epsilon(1e-15));
  CHECK(mcc_binary(5, 5, 0, 0) == 1.0);
  CHECK(mcc_binary(0, 0, 5, 5) == -1.0);
  CHECK_FALSE(mcc_binary(3, 0, 2, 0).has_value());
  CHECK_FALSE(mcc_binary(0, 0, 0, 0).has_value());
  // Large counts do not overflow.
  const std::uint64_t big = 4000000000ULL;
  CHECK(mcc_binary(big, big, 1, 1).value() == doctest::Approx(1.0));
}

TEST_CASE("f1 and macro averaging") {
  CHECK(f1_score(0.5, 1.0).value() == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(f1_score(std::nullopt, 1.0).has_value());
  CHECK_FALSE(f1_score(0.0, 0.0).has_value());

  const std::vector<MaybeMetric> v = {0.5, std::nullopt, 1.0};
  const auto avg = macro_average(v);
  CHECK(avg.value == 0.75);
  CHECK(avg.skipped == 1);
  const std::vector<MaybeMetric> none = {std::nullopt};
  CHECK_THROWS_AS(macro_average(none), UndefinedMetricError);
}

TEST_CASE("undefined metrics are reported, not zeroed") {
  // Class 2 is never predicted and never present.
  const std::vector<std::size_t> y = {0, 1, 1};
  const std::vector<std::size_t> p = {0, 1, 0};
  const auto r = build_report(confusion(y, p, 3));
  CHECK_FALSE(r.per_class[2].precision.has_value());
  CHECK_FALSE(r.per_class[2].recall.has_value());
  CHECK(r.skipped_precision == 1);
  CHECK(r.macro_precision.value() == doctest::Approx((0.5 + 1.0) / 2));

  // All predictions one class: MCC undefined.
  const std::vector<std::size_t> flat = {1, 1, 1};
  CHECK_FALSE(build_report(confusion(y, flat, 2)).mcc.has_value());
  CHECK_THROWS_AS(build_report(ConfusionMatrix(2)), UndefinedMetricError);
}

TEST_CASE("metrics agree with brute-force recounts") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_case(rng);
    const auto cm = confusion(c.y, c.p, c.classes);
    const auto r = build_report(cm);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < c.y.size(); ++i) correct += c.y[i] == c.p[i];
    CHECK(r.accuracy == doctest::Approx(static_cast<double>(correct) / c.y.size()).epsilon(1e-15));
    CHECK(r.micro_f1 == doctest::Approx(r.accuracy).epsilon(1e-15));

    for (std::size_t k = 0; k < c.classes; ++k) {
      const auto o = oracle::one_vs_rest(c.y, c.p, k);
      CHECK(cm.true_positives(k) == o.tp);
      CHECK(cm.false_positives(k) == o.fp);
      CHECK(cm.false_negatives(k) == o.fn);
      CHECK(cm.true_negatives(k) == o.tn);
      const auto& s = r.per_class[k];
      CHECK(s.precision.has_value() == (o.tp + o.fp > 0));
      if (s.precision) CHECK(*s.precision == doctest::Approx(double(o.tp) / double(o.tp + o.fp)).epsilon(1e-15));
      if (s.recall) CHECK(*s.recall == doctest::Approx(double(o.tp) / double(o.tp + o.fn)).epsilon(1e-15));
    }

    const auto expected = oracle::mcc_covariance(c.y, c.p, c.classes);
    CHECK(r.mcc.has_value() == expected.has_value());
    if (r.mcc && expected) CHECK(std::abs(*r.mcc - *expected) < 1e-12);
    if (r.mcc) {
      CHECK(*r.mcc >= -1.0 - 1e-12);
      CHECK(*r.mcc <= 1.0 + 1e-12);
    }

    if (c.classes == 2) {
      const auto o = oracle::one_vs_rest(c.y, c.p, 1);
      const auto cells = oracle::mcc_cells(o);
      const auto got = mcc_binary(o.tp, o.tn, o.fp, o.fn);
      CHECK(got.has_value() == cells.has_value());
      if (got && cells) CHECK(std::abs(*got - *cells) < 1e-12);
      if (r.mcc && got) CHECK(std::abs(*r.mcc - *got) < 1e-12);
    }
  }
}

TEST_CASE("report rendering") {
  const std::vector<std::size_t> y = {0, 1, 1, 0};
  const std::vector<std::size_t> p = {0, 1, 0, 0};
  const auto r = build_report(confusion(y, p, 2));
  const auto j = report_to_json(r, {"neg", "pos"});
  CHECK(j.at("accuracy") == 0.75);
  CHECK(j.contains("mcc"));
  const auto text = report_to_text(r, {"neg", "pos"});
  CHECK(text.find("pos") != std::string::npos);
}
