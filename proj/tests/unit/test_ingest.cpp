#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "support.h"
#include "credscan/error.h"
#include "credscan/ingest.h"
#include "credscan/random.h"

using namespace credscan;

namespace {

LabeledDataset make_dataset(const std::vector<std::size_t>& per_category) {
  LabeledDataset ds;
  for (std::size_t c = 0; c < per_category.size(); ++c) {
    for (std::size_t i = 0; i < per_category[c]; ++i) {
      CredentialRecord r;
      r.text = "rec-" + std::to_string(c) + "-" + std::to_string(i);
      r.category = category_from_id(static_cast<int>(c));
      ds.records.push_back(r);
    }
  }
  return ds;
}

std::multiset<std::string> texts(const LabeledDataset& ds) {
  std::multiset<std::string> out;
  for (const auto& r : ds.records) out.insert(r.text);
  return out;
}

std::vector<std::string> ordered_texts(const LabeledDataset& ds) {
  std::vector<std::string> out;
  for (const auto& r : ds.records) out.push_back(r.text);
  return out;
}

}  // namespace

TEST_CASE("load_jsonl reads records in order") {
  testing::TempDir dir;
  const auto path = dir.write("d.jsonl",
                              R"({"text": "password = a", "category": "Passwords", "is_true": true})"
                              "\n"
                              R"({"text": "token: b", "category": 3, "is_true": false, "source_path": "x.go", "line_number": 9, "language_tag": "Go"})"
                              "\n\n"
                              R"({"text": "salt=c", "category": "Seeds, Salts, Nonces", "is_true": true})"
                              "\n");
  const auto ds = load_jsonl(path);
  REQUIRE(ds.size() == 3);
  CHECK(ds.records[0].category == CredentialCategory::kPasswords);
  CHECK(category_id(ds.records[0].category) == 0);
  CHECK(ds.records[1].category == CredentialCategory::kGenericTokens);
  CHECK_FALSE(ds.records[1].is_true);
  CHECK(ds.records[1].source_path == "x.go");
  CHECK(ds.records[1].line_number == 9);
  CHECK(ds.records[1].language_tag == "Go");
  CHECK(ds.records[2].category == CredentialCategory::kSeedsSaltsNonces);
  CHECK(ds.true_only().size() == 2);
  const auto counts = ds.category_counts();
  CHECK(counts[0] == 1);
  CHECK(counts[3] == 1);
  CHECK(counts[6] == 1);
}

TEST_CASE("load_jsonl errors") {
  testing::TempDir dir;
  CHECK_THROWS_AS(load_jsonl(dir.file("missing.jsonl")), IoError);

  const auto no_text = dir.write("a.jsonl",
                                 R"({"text": "x", "category": 0, "is_true": true})"
                                 "\n"
                                 R"({"category": 0, "is_true": true})"
                                 "\n");
  try {
    load_jsonl(no_text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  const auto bad_json = dir.write("b.jsonl", "{not json}\n");
  CHECK_THROWS_AS(load_jsonl(bad_json), ParseError);

  const auto bad_cat = dir.write("c.jsonl", R"({"text": "x", "category": "Cookies", "is_true": true})");
  CHECK_THROWS_AS(load_jsonl(bad_cat), DomainError);

  const auto bad_bool = dir.write("d.jsonl", R"({"text": "x", "category": 0, "is_true": "maybe"})");
  CHECK_THROWS_AS(load_jsonl(bad_bool), ParseError);
  const auto num_bool = dir.write("e.jsonl", R"({"text": "x", "category": 0, "is_true": 3})");
  CHECK_THROWS_AS(load_jsonl(num_bool), ParseError);
}

TEST_CASE("jsonl round trip") {
  testing::TempDir dir;
  auto ds = make_dataset({2, 1, 0, 3});
  ds.records[1].source_path = "a/b.py";
  ds.records[1].line_number = 17;
  ds.records[1].language_tag = "Python";
  ds.records[2].is_true = false;
  ds.records[3].text = "quote \" and \\ and unicode \xc3\xa9";
  save_jsonl(ds, dir.file("o.jsonl"));
  const auto back = load_jsonl(dir.file("o.jsonl"));
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].text == ds.records[i].text);
    CHECK(back.records[i].category == ds.records[i].category);
    CHECK(back.records[i].is_true == ds.records[i].is_true);
    CHECK(back.records[i].source_path == ds.records[i].source_path);
    CHECK(back.records[i].line_number == ds.records[i].line_number);
    CHECK(back.records[i].language_tag == ds.records[i].language_tag);
  }
}

TEST_CASE("load_csv") {
  testing::TempDir dir;
  const auto path = dir.write("d.csv",
                              "text,category,is_true\n"
                              "\"password = \"\"a,b\"\"\",Passwords,TRUE\n"
                              "token: x,3,no\n");
  const auto ds = load_csv(path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0].text == "password = \"a,b\"");
  CHECK(ds.records[0].is_true);
  CHECK(ds.records[1].category == CredentialCategory::kGenericTokens);
  CHECK_FALSE(ds.records[1].is_true);

  const auto crlf = dir.write("e.csv", "text,category,is_true\r\nx,0,true\r\n");
  REQUIRE(load_csv(crlf).size() == 1);
  CHECK(load_csv(crlf).records[0].text == "x");

  const auto missing = dir.write("f.csv", "text,category\nx,0\n");
  CHECK_THROWS_AS(load_csv(missing), ParseError);

  const auto remapped = dir.write("g.csv", "line,kind,valid,file,ln\nx,Others,1,a.js,4\n");
  CsvColumnMapping m;
  m.text = "line";
  m.category = "kind";
  m.is_true = "valid";
  m.source_path = "file";
  m.line_number = "ln";
  const auto r = load_csv(remapped, m);
  REQUIRE(r.size() == 1);
  CHECK(r.records[0].source_path == "a.js");
  CHECK(r.records[0].line_number == 4);

  const auto multiline = dir.write("h.csv", "text,category,is_true\n\"a\nb\",0,true\n");
  REQUIRE(load_csv(multiline).size() == 1);
  CHECK(load_csv(multiline).records[0].text == "a\nb");

  const auto ragged = dir.write("i.csv", "text,category,is_true\nx,0\n");
  CHECK_THROWS_AS(load_csv(ragged), ParseError);
}

TEST_CASE("SplitSpec validation") {
  CHECK_NOTHROW(validate(SplitSpec{}));
  CHECK_THROWS_AS(validate(SplitSpec{0.8, 0.1, 0.2, 1, true}), DomainError);
  CHECK_THROWS_AS(validate(SplitSpec{1.2, -0.1, -0.1, 1, true}), DomainError);
  CHECK_THROWS_AS(split_dataset(LabeledDataset{}, SplitSpec{}), DomainError);
}

TEST_CASE("split sizes and determinism") {
  const auto ds = make_dataset({13, 13, 13, 13, 12, 12, 12, 12});
  REQUIRE(ds.size() == 100);
  for (bool stratified : {true, false}) {
    SplitSpec spec;
    spec.stratified = stratified;
    const auto a = split_dataset(ds, spec);
    CHECK(a.train.size() == 80);
    CHECK(a.valid.size() == 10);
    CHECK(a.test.size() == 10);
    const auto b = split_dataset(ds, spec);
    CHECK(ordered_texts(a.train) == ordered_texts(b.train));
    CHECK(ordered_texts(a.valid) == ordered_texts(b.valid));
    CHECK(ordered_texts(a.test) == ordered_texts(b.test));
  }
  SplitSpec other;
  other.seed = 43;
  CHECK(ordered_texts(split_dataset(ds, other).test) != ordered_texts(split_dataset(ds, SplitSpec{}).test));
}

TEST_CASE("single-class stratified split") {
  const auto ds = make_dataset({10});
  const auto s = split_dataset(ds, SplitSpec{});
  CHECK(s.train.size() == 8);
  CHECK(s.valid.size() == 1);
  CHECK(s.test.size() == 1);
}

TEST_CASE("split properties on random datasets") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::size_t> counts(kCategoryCount);
    for (auto& c : counts) c = uniform_below(rng, 40);
    if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; })) counts[0] = 1;
    const auto ds = make_dataset(counts);
    const std::size_t n = ds.size();
    SplitSpec spec;
    spec.seed = rng();
    spec.stratified = trial % 3 != 0;
    const auto s = split_dataset(ds, spec);

    auto all = texts(s.train);
    for (const auto& t : texts(s.valid)) all.insert(t);
    for (const auto& t : texts(s.test)) all.insert(t);
    CHECK(all == texts(ds));

    const auto nv = static_cast<std::size_t>(static_cast<double>(n) * spec.valid_fraction + 1e-9);
    const auto nt = static_cast<std::size_t>(static_cast<double>(n) * spec.test_fraction + 1e-9);
    CHECK(s.valid.size() == nv);
    CHECK(s.test.size() == nt);
    CHECK(s.train.size() == n - nv - nt);

    if (spec.stratified) {
      const auto cv = s.valid.category_counts();
      const auto ct = s.test.category_counts();
      const auto cr = s.train.category_counts();
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const double k = static_cast<double>(counts[c]);
        CHECK(std::abs(static_cast<double>(cv[c]) - k * spec.valid_fraction) < 1.0 + 1e-9);
        CHECK(std::abs(static_cast<double>(ct[c]) - k * spec.test_fraction) < 1.0 + 1e-9);
        CHECK(std::abs(static_cast<double>(cr[c]) - k * spec.train_fraction) < 2.0);
      }
    }
  }
}
