#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "drought/evaluate.hpp"
#include "drought/rng.hpp"

using namespace drought;
namespace fs = std::filesystem;

namespace {

// Direct-definition oracle, written independently of the library code:
// count tp/fp/fn/tn per class by brute force, then apply the formulas.
struct OracleClass {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  double p() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double r() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    const double pp = p(), rr = r();
    return pp + rr == 0.0 ? 0.0 : 2.0 * pp * rr / (pp + rr);
  }
};

struct Oracle {
  std::array<OracleClass, kNumCategories> cls;
  OracleClass micro;
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
};

Oracle oracle_metrics(const LabelMatrix& y_true, const LabelMatrix& y_pred) {
  Oracle o;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    for (int c = 0; c < kNumCategories; ++c) {
      const int t = y_true[i].bits[std::size_t(c)];
      const int p = y_pred[i].bits[std::size_t(c)];
      OracleClass& k = o.cls[std::size_t(c)];
      if (t && p) ++k.tp;
      if (!t && p) ++k.fp;
      if (t && !p) ++k.fn;
      if (!t && !p) ++k.tn;
    }
  }
  for (const OracleClass& k : o.cls) {
    o.micro.tp += k.tp;
    o.micro.fp += k.fp;
    o.micro.fn += k.fn;
    o.micro.tn += k.tn;
    o.macro_p += k.p() / kNumCategories;
    o.macro_r += k.r() / kNumCategories;
    o.macro_f1 += k.f1() / kNumCategories;
  }
  return o;
}

LabelMatrix random_labels(Rng& rng, std::size_t n) {
  LabelMatrix m(n);
  for (LabelVector& v : m)
    for (int c = 0; c < kNumCategories; ++c)
      v.bits[std::size_t(c)] = rng.uniform_int(2) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("evaluate_predictions matches the brute-force oracle on 1000 seeded instances") {
  Rng rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(50);
    LabelMatrix yt = random_labels(rng, n);
    LabelMatrix yp = random_labels(rng, n);
    MetricsReport rep = evaluate_predictions(yt, yp);
    Oracle o = oracle_metrics(yt, yp);
    for (int c = 0; c < kNumCategories; ++c) {
      const OracleClass& k = o.cls[std::size_t(c)];
      CHECK(rep.confusions[std::size_t(c)].tp == k.tp);
      CHECK(rep.confusions[std::size_t(c)].fp == k.fp);
      CHECK(rep.confusions[std::size_t(c)].fn == k.fn);
      CHECK(rep.confusions[std::size_t(c)].tn == k.tn);
      CHECK(rep.per_class[std::size_t(c)].precision == k.p());
      CHECK(rep.per_class[std::size_t(c)].recall == k.r());
      CHECK(rep.per_class[std::size_t(c)].f1 == k.f1());
    }
    CHECK(rep.micro.precision == o.micro.p());
    CHECK(rep.micro.recall == o.micro.r());
    CHECK(rep.micro.f1 == o.micro.f1());
    CHECK(rep.macro.precision == doctest::Approx(o.macro_p).epsilon(1e-12));
    CHECK(rep.macro.recall == doctest::Approx(o.macro_r).epsilon(1e-12));
    CHECK(rep.macro.f1 == doctest::Approx(o.macro_f1).epsilon(1e-12));
  }
}

TEST_CASE("published per-class F1 tables aggregate to their macro means") {
  // Fine-tuned encoder on held-out reports, per-class F1 in canonical order.
  const std::array<double, 7> table1 = {0.96, 0.85, 0.92, 0.83, 0.93, 0.72, 0.89};
  // Same model transferred to keyword-labeled tweets.
  const std::array<double, 7> table2 = {0.63, 0.43, 0.87, 0.66, 0.63, 0.15, 0.72};
  auto mean = [](const std::array<double, 7>& a) {
    double s = 0;
    for (double v : a) s += v;
    return s / 7.0;
  };
  CHECK(std::abs(mean(table1) - 0.871) < 0.01);
  CHECK(std::abs(mean(table2) - 0.584) < 0.01);
  CHECK(std::abs(mean(table1) - 0.87) < 0.01);  // the rounded published figures
  CHECK(std::abs(mean(table2) - 0.58) < 0.01);
}

TEST_CASE("0/0 metrics are zero and flagged undefined") {
  BinaryConfusion c;  // all zero
  ClassMetrics m = per_class_metrics(c);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK_FALSE(m.precision_defined);
  CHECK_FALSE(m.recall_defined);
}

TEST_CASE("perfect and inverted predictions bound the metrics") {
  Rng rng(5);
  LabelMatrix yt = random_labels(rng, 40);
  MetricsReport same = evaluate_predictions(yt, yt);
  CHECK(same.micro.f1 == 1.0);
  LabelMatrix flipped = yt;
  for (LabelVector& v : flipped)
    for (int c = 0; c < kNumCategories; ++c) v.bits[std::size_t(c)] ^= 1;
  MetricsReport inv = evaluate_predictions(yt, flipped);
  CHECK(inv.micro.f1 == 0.0);
  CHECK(inv.macro.f1 == 0.0);
}

TEST_CASE("evaluate_predictions rejects mismatched shapes") {
  LabelMatrix a(3), b(4);
  CHECK_THROWS_AS(evaluate_predictions(a, b), EvaluateError);
  // Empty inputs are degenerate, not an error: all cells 0/0 -> 0, flagged.
  MetricsReport rep = evaluate_predictions(LabelMatrix{}, LabelMatrix{});
  CHECK(rep.micro.f1 == 0.0);
  CHECK_FALSE(rep.per_class[0].precision_defined);
}

TEST_CASE("metrics renderings carry every per-class row") {
  Rng rng(9);
  LabelMatrix yt = random_labels(rng, 20), yp = random_labels(rng, 20);
  MetricsReport rep = evaluate_predictions(yt, yp);
  const std::string text = render_metrics_text(rep);
  const std::string json = metrics_to_json(rep);
  const std::string csv = confusions_to_csv(rep);
  for (auto name : kCategoryNames) {
    CHECK(text.find(std::string(name)) != std::string::npos);
    CHECK(json.find(std::string(name)) != std::string::npos);
    CHECK(csv.find(std::string(name)) != std::string::npos);
  }
  CHECK(json.find("macro") != std::string::npos);
  CHECK(json.find("micro") != std::string::npos);
}

TEST_CASE("controversial_split separates model-only from keyword-only positives") {
  std::vector<std::string> ids = {"a", "b", "c", "d"};
  LabelMatrix kw(4), mdl(4);
  const int cat = 2;
  kw[0].bits[cat] = 1;  // a: both positive -> not controversial
  mdl[0].bits[cat] = 1;
  mdl[1].bits[cat] = 1;  // b: model-only -> fp
  kw[2].bits[cat] = 1;   // c: keyword-only -> fn
  // d: both negative -> not controversial
  ControversialSplit s = controversial_split(ids, kw, mdl, cat);
  REQUIRE(s.fp_docs.size() == 1);
  REQUIRE(s.fn_docs.size() == 1);
  CHECK(s.fp_docs[0] == "b");
  CHECK(s.fn_docs[0] == "c");
}

TEST_CASE("a 100-document disagreement sample splits exactly into fp+fn") {
  // Mirrors the shape of the published spot check (39 fp / 61 fn).
  std::vector<std::string> ids;
  LabelMatrix kw(100), mdl(100);
  for (int i = 0; i < 100; ++i) {
    ids.push_back("t" + std::to_string(i));
    if (i < 39)
      mdl[std::size_t(i)].bits[0] = 1;  // false positives
    else
      kw[std::size_t(i)].bits[0] = 1;  // false negatives
  }
  ControversialSplit s = controversial_split(ids, kw, mdl, 0);
  CHECK(s.fp_docs.size() == 39);
  CHECK(s.fn_docs.size() == 61);
  CHECK(s.fp_docs.size() + s.fn_docs.size() == 100);
}

TEST_CASE("co-occurrence entries are exact integer-count ratios") {
  // 12 documents built from known label pairs.
  LabelMatrix m;
  auto push = [&](std::initializer_list<int> cats) {
    LabelVector v{};
    for (int c : cats) v.bits[std::size_t(c)] = 1;
    m.push_back(v);
  };
  for (int k = 0; k < 6; ++k) push({0, 1});  // agriculture with economy
  for (int k = 0; k < 2; ++k) push({0});
  for (int k = 0; k < 3; ++k) push({1, 6});
  push({2});
  CooccurrenceMatrix co = cooccurrence(m);
  CHECK(co.support[0] == 8);
  CHECK(co.support[1] == 9);
  CHECK(co.support[2] == 1);
  CHECK(co.support[3] == 0);
  CHECK(co.p[0][1] == 6.0 / 8.0);  // exactly, no rounding
  CHECK(co.p[1][0] == 6.0 / 9.0);
  CHECK(co.p[1][6] == 3.0 / 9.0);
  CHECK(co.p[0][0] == 1.0);  // diagonal is exactly one on supported rows
  CHECK(co.p[2][2] == 1.0);
  CHECK(co.p[2][0] == 0.0);
  CHECK(co.defined(0));
  CHECK_FALSE(co.defined(3));
}

TEST_CASE("co-occurrence renderings expose support and conditional rows") {
  LabelMatrix m(4);
  m[0].bits[0] = m[0].bits[1] = 1;
  m[1].bits[0] = 1;
  CooccurrenceMatrix co = cooccurrence(m);
  const std::string json = cooccurrence_to_json(co);
  CHECK(json.find("support") != std::string::npos);
  CHECK(json.find("agriculture") != std::string::npos);
  const std::string text = render_cooccurrence_text(co);
  CHECK(text.find("agriculture") != std::string::npos);
}

TEST_CASE("adjudication ledger appends, reloads, and summarizes") {
  const fs::path p = fs::temp_directory_path() / "drought_test_ledger.jsonl";
  fs::remove(p);
  for (int i = 0; i < 100; ++i) {
    AdjudicationRecord r;
    r.doc_id = "t" + std::to_string(i);
    r.category = 0;
    r.keyword_label = i < 39 ? 0 : 1;  // fp for the first 39, fn after
    r.model_label = 1 - r.keyword_label;
    r.verdict = i < 89 ? Verdict::model_correct : Verdict::keyword_correct;
    r.reviewer = "unit";
    r.timestamp = "2026-01-01T00:00:00Z";
    append_adjudication(r, p.string());
  }
  std::vector<AdjudicationRecord> recs = load_adjudications(p.string());
  REQUIRE(recs.size() == 100);
  CHECK(recs[0].doc_id == "t0");
  CHECK(recs[99].verdict == Verdict::keyword_correct);
  AdjudicationSummary s = adjudication_summary(recs, 0);
  CHECK(s.n == 100);
  CHECK(s.model_correct_fraction == doctest::Approx(0.89).epsilon(1e-12));
  CHECK(s.by_verdict[0] == 89);
  CHECK(s.by_verdict[1] == 11);
  fs::remove(p);
}

TEST_CASE("only model_correct counts toward the fraction") {
  std::vector<AdjudicationRecord> recs;
  auto add = [&](Verdict v) {
    AdjudicationRecord r;
    r.doc_id = "x" + std::to_string(recs.size());
    r.category = 3;
    r.keyword_label = 0;
    r.model_label = 1;
    r.verdict = v;
    recs.push_back(r);
  };
  add(Verdict::model_correct);
  add(Verdict::both_defensible);
  add(Verdict::both_defensible);
  add(Verdict::neither);
  AdjudicationSummary s = adjudication_summary(recs, 3);
  CHECK(s.n == 4);
  CHECK(s.model_correct_fraction == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("non-controversial records are rejected by the ledger") {
  AdjudicationRecord r;
  r.doc_id = "same";
  r.category = 1;
  r.keyword_label = 1;
  r.model_label = 1;  // agreement: nothing to adjudicate
  r.verdict = Verdict::model_correct;
  const fs::path p = fs::temp_directory_path() / "drought_test_ledger2.jsonl";
  CHECK_THROWS_AS(append_adjudication(r, p.string()), EvaluateError);
  fs::remove(p);
}

TEST_CASE("verdict names round trip") {
  for (Verdict v : {Verdict::model_correct, Verdict::keyword_correct,
                    Verdict::both_defensible, Verdict::neither})
    CHECK(parse_verdict(verdict_name(v)) == v);
  CHECK_THROWS_AS(parse_verdict("maybe"), EvaluateError);
}
