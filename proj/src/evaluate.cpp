#include "drought/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drought {

using nlohmann::json;

BinaryConfusion binary_confusion(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw EvaluateError("binary_confusion: length mismatch (" + std::to_string(y_true.size()) +
                        " vs " + std::to_string(y_pred.size()) + ")");
  BinaryConfusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0;
    const bool p = y_pred[i] != 0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ClassMetrics per_class_metrics(const BinaryConfusion& c) {
  ClassMetrics m;
  m.precision_defined = (c.tp + c.fp) > 0;
  m.recall_defined = (c.tp + c.fn) > 0;
  m.precision = m.precision_defined ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = m.recall_defined ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

std::pair<ClassMetrics, ClassMetrics> micro_macro_metrics(
    const std::vector<BinaryConfusion>& confusions) {
  BinaryConfusion sum;
  double p = 0, r = 0, f = 0;
  for (const auto& c : confusions) {
    sum.tp += c.tp;
    sum.fp += c.fp;
    sum.fn += c.fn;
    sum.tn += c.tn;
    const ClassMetrics m = per_class_metrics(c);
    p += m.precision;
    r += m.recall;
    f += m.f1;
  }
  ClassMetrics micro = per_class_metrics(sum);
  ClassMetrics macro;
  const double n = confusions.empty() ? 1.0 : static_cast<double>(confusions.size());
  macro.precision = p / n;
  macro.recall = r / n;
  macro.f1 = f / n;
  return {micro, macro};
}

MetricsReport evaluate_predictions(const LabelMatrix& y_true, const LabelMatrix& y_pred) {
  if (y_true.size() != y_pred.size())
    throw EvaluateError("evaluate_predictions: shape mismatch (" +
                        std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()) + ")");
  MetricsReport report;
  for (int c = 0; c < kNumCategories; ++c) {
    std::vector<int> t(y_true.size()), p(y_pred.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      t[i] = y_true[i].bits[static_cast<std::size_t>(c)];
      p[i] = y_pred[i].bits[static_cast<std::size_t>(c)];
    }
    report.confusions.push_back(binary_confusion(t, p));
    report.per_class.push_back(per_class_metrics(report.confusions.back()));
  }
  std::tie(report.micro, report.macro) = micro_macro_metrics(report.confusions);
  return report;
}

std::string render_metrics_text(const MetricsReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-32s %8s %10s %8s\n", "Category", "Recall", "Precision", "F1");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-32s %4.2f/%4.2f  %4.2f/%4.2f %4.2f/%4.2f\n",
                "Overall (micro/macro)", report.micro.recall, report.macro.recall,
                report.micro.precision, report.macro.precision, report.micro.f1,
                report.macro.f1);
  out << buf;
  for (int c = 0; c < kNumCategories; ++c) {
    const auto& m = report.per_class[static_cast<std::size_t>(c)];
    std::snprintf(buf, sizeof buf, "%-32s %8.2f %10.2f %8.2f\n",
                  std::string(kCategoryNames[static_cast<std::size_t>(c)]).c_str(), m.recall,
                  m.precision, m.f1);
    out << buf;
  }
  return out.str();
}

namespace {

json class_metrics_json(const ClassMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_defined", m.precision_defined},
          {"recall_defined", m.recall_defined}};
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report) {
  json j;
  json per_class = json::object();
  json confusions = json::object();
  for (int c = 0; c < kNumCategories; ++c) {
    const std::string name(kCategoryNames[static_cast<std::size_t>(c)]);
    per_class[name] = class_metrics_json(report.per_class[static_cast<std::size_t>(c)]);
    const auto& cm = report.confusions[static_cast<std::size_t>(c)];
    confusions[name] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
  }
  j["per_class"] = per_class;
  j["confusions"] = confusions;
  j["micro"] = class_metrics_json(report.micro);
  j["macro"] = class_metrics_json(report.macro);
  return j.dump(2);
}

std::string confusions_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "category,tp,fp,fn,tn\n";
  for (int c = 0; c < kNumCategories; ++c) {
    const auto& cm = report.confusions[static_cast<std::size_t>(c)];
    out << kCategoryNames[static_cast<std::size_t>(c)] << ',' << cm.tp << ',' << cm.fp << ','
        << cm.fn << ',' << cm.tn << '\n';
  }
  return out.str();
}

ControversialSplit controversial_split(const std::vector<std::string>& ids,
                                       const LabelMatrix& keyword_labels,
                                       const LabelMatrix& model_labels, int category) {
  if (ids.size() != keyword_labels.size() || ids.size() != model_labels.size())
    throw EvaluateError("controversial_split: id/label count mismatch");
  if (category < 0 || category >= kNumCategories)
    throw EvaluateError("controversial_split: invalid category");
  ControversialSplit out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int k = keyword_labels[i].bits[static_cast<std::size_t>(category)];
    const int m = model_labels[i].bits[static_cast<std::size_t>(category)];
    if (m == 1 && k == 0) out.fp_docs.push_back(ids[i]);
    else if (m == 0 && k == 1) out.fn_docs.push_back(ids[i]);
  }
  return out;
}

CooccurrenceMatrix cooccurrence(const LabelMatrix& labels) {
  if (labels.empty()) throw EvaluateError("cooccurrence: empty label matrix");
  CooccurrenceMatrix m;
  std::array<std::array<long long, kNumCategories>, kNumCategories> joint{};
  for (const auto& lv : labels) {
    for (int i = 0; i < kNumCategories; ++i) {
      if (!lv.bits[static_cast<std::size_t>(i)]) continue;
      ++m.support[static_cast<std::size_t>(i)];
      for (int j = 0; j < kNumCategories; ++j)
        if (lv.bits[static_cast<std::size_t>(j)]) ++joint[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  for (int i = 0; i < kNumCategories; ++i)
    for (int j = 0; j < kNumCategories; ++j)
      m.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          m.support[static_cast<std::size_t>(i)] > 0
              ? static_cast<double>(joint[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                    static_cast<double>(m.support[static_cast<std::size_t>(i)])
              : 0.0;
  return m;
}

std::string cooccurrence_to_json(const CooccurrenceMatrix& m) {
  json j = json::object();
  for (int i = 0; i < kNumCategories; ++i) {
    const std::string row_name(kCategoryNames[static_cast<std::size_t>(i)]);
    json row = json::object();
    row["support"] = m.support[static_cast<std::size_t>(i)];
    row["defined"] = m.defined(i);
    json cond = json::object();
    for (int jdx = 0; jdx < kNumCategories; ++jdx) {
      if (m.defined(i))
        cond[std::string(kCategoryNames[static_cast<std::size_t>(jdx)])] =
            m.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(jdx)];
      else
        cond[std::string(kCategoryNames[static_cast<std::size_t>(jdx)])] = nullptr;
    }
    row["p_given"] = cond;
    j[row_name] = row;
  }
  return j.dump(2);
}

std::string render_cooccurrence_text(const CooccurrenceMatrix& m) {
  std::ostringstream out;
  out << "P(column | row), support in brackets\n";
  char buf[64];
  for (int i = 0; i < kNumCategories; ++i) {
    std::snprintf(buf, sizeof buf, "%-30s [%5lld] ",
                  std::string(kCategoryNames[static_cast<std::size_t>(i)]).c_str(),
                  m.support[static_cast<std::size_t>(i)]);
    out << buf;
    for (int j = 0; j < kNumCategories; ++j) {
      if (m.defined(i))
        std::snprintf(buf, sizeof buf, " %5.2f", m.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      else
        std::snprintf(buf, sizeof buf, " %5s", "--");
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::model_correct: return "model_correct";
    case Verdict::keyword_correct: return "keyword_correct";
    case Verdict::both_defensible: return "both_defensible";
    case Verdict::neither: return "neither";
  }
  return "neither";
}

Verdict parse_verdict(const std::string& name) {
  if (name == "model_correct") return Verdict::model_correct;
  if (name == "keyword_correct") return Verdict::keyword_correct;
  if (name == "both_defensible") return Verdict::both_defensible;
  if (name == "neither") return Verdict::neither;
  throw EvaluateError("unknown verdict '" + name + "'");
}

void append_adjudication(const AdjudicationRecord& rec, const std::string& path) {
  if (rec.keyword_label == rec.model_label)
    throw EvaluateError("adjudication: record for doc \"" + rec.doc_id +
                        "\" is not controversial (labels agree)");
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw EvaluateError("cannot open " + path + " for appending");
  json j = {{"doc_id", rec.doc_id},
            {"category", std::string(kCategoryNames[static_cast<std::size_t>(rec.category)])},
            {"keyword_label", rec.keyword_label},
            {"model_label", rec.model_label},
            {"verdict", verdict_name(rec.verdict)},
            {"note", rec.note},
            {"reviewer", rec.reviewer},
            {"timestamp", rec.timestamp}};
  out << j.dump() << '\n';
}

std::vector<AdjudicationRecord> load_adjudications(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvaluateError("cannot open " + path);
  std::vector<AdjudicationRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw EvaluateError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    AdjudicationRecord rec;
    rec.doc_id = j.at("doc_id").get<std::string>();
    rec.category = category_index(j.at("category").get<std::string>());
    if (rec.category < 0)
      throw EvaluateError(path + ": line " + std::to_string(lineno) + ": unknown category");
    rec.keyword_label = j.at("keyword_label").get<int>();
    rec.model_label = j.at("model_label").get<int>();
    rec.verdict = parse_verdict(j.at("verdict").get<std::string>());
    rec.note = j.value("note", "");
    rec.reviewer = j.value("reviewer", "");
    rec.timestamp = j.value("timestamp", "");
    out.push_back(std::move(rec));
  }
  return out;
}

AdjudicationSummary adjudication_summary(const std::vector<AdjudicationRecord>& records,
                                         int category) {
  AdjudicationSummary s;
  for (const auto& rec : records) {
    if (rec.category != category) continue;
    ++s.n;
    ++s.by_verdict[static_cast<std::size_t>(rec.verdict)];
  }
  if (s.n == 0) throw EvaluateError("adjudication_summary: no records for category");
  s.model_correct_fraction =
      static_cast<double>(s.by_verdict[static_cast<std::size_t>(Verdict::model_correct)]) /
      static_cast<double>(s.n);
  return s;
}

}  // namespace drought
