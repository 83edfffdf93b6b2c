#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drought/labels.hpp"

namespace drought {

struct EvaluateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BinaryConfusion {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  long long total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;  // false when tp+fp == 0
  bool recall_defined = true;     // false when tp+fn == 0
};

struct MetricsReport {
  std::vector<BinaryConfusion> confusions;  // one per category
  std::vector<ClassMetrics> per_class;
  ClassMetrics micro;
  ClassMetrics macro;
};

using LabelMatrix = std::vector<LabelVector>;

BinaryConfusion binary_confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); every 0/0 evaluates to 0.
ClassMetrics per_class_metrics(const BinaryConfusion& c);

// micro: metrics of the element-wise sum of the confusions;
// macro: unweighted means of the per-class P, R, and F1.
std::pair<ClassMetrics, ClassMetrics> micro_macro_metrics(
    const std::vector<BinaryConfusion>& confusions);

MetricsReport evaluate_predictions(const LabelMatrix& y_true, const LabelMatrix& y_pred);

std::string render_metrics_text(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);
std::string confusions_to_csv(const MetricsReport& report);

struct ControversialSplit {
  std::vector<std::string> fp_docs;  // model 1, keyword 0
  std::vector<std::string> fn_docs;  // model 0, keyword 1
};

// Disagreements for one category between the keyword labels and the model
// labels; ids must match pairwise.
ControversialSplit controversial_split(const std::vector<std::string>& ids,
                                       const LabelMatrix& keyword_labels,
                                       const LabelMatrix& model_labels, int category);

struct CooccurrenceMatrix {
  // entry(i,j) = P(label j | label i); rows with zero support are undefined.
  std::array<std::array<double, kNumCategories>, kNumCategories> p{};
  std::array<long long, kNumCategories> support{};
  bool defined(int i) const { return support[static_cast<std::size_t>(i)] > 0; }
};

CooccurrenceMatrix cooccurrence(const LabelMatrix& labels);

std::string cooccurrence_to_json(const CooccurrenceMatrix& m);
std::string render_cooccurrence_text(const CooccurrenceMatrix& m);

enum class Verdict { model_correct, keyword_correct, both_defensible, neither };

std::string verdict_name(Verdict v);
Verdict parse_verdict(const std::string& name);

struct AdjudicationRecord {
  std::string doc_id;
  int category = 0;
  int keyword_label = 0;
  int model_label = 0;
  Verdict verdict = Verdict::neither;
  std::string note;
  std::string reviewer;
  std::string timestamp;
};

// Append-only JSONL ledger, one record per line.
void append_adjudication(const AdjudicationRecord& rec, const std::string& path);
std::vector<AdjudicationRecord> load_adjudications(const std::string& path);

struct AdjudicationSummary {
  int n = 0;
  double model_correct_fraction = 0.0;  // only model_correct counts
  std::array<int, 4> by_verdict{};      // indexed by Verdict order
};

AdjudicationSummary adjudication_summary(const std::vector<AdjudicationRecord>& records,
                                         int category);

}  // namespace drought
