// drought: end-to-end pipeline driver.
//
// Subcommands: ingest | clean | split | synth | keyword-label | train |
// predict | evaluate | cooccur | review | report. Exit codes: 0 success,
// 1 operation error, 2 usage error. Logs go to stderr, data to files or
// stdout. Every run writes a small JSON manifest next to its primary output
// recording the resolved configuration.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drought/corpus.hpp"
#include "drought/csv.hpp"
#include "drought/evaluate.hpp"
#include "drought/keywords.hpp"
#include "drought/labels.hpp"
#include "drought/model.hpp"
#include "drought/preprocess.hpp"

using json = nlohmann::ordered_json;
using namespace drought;

namespace {

CorpusFormat parse_format(const std::string& name) {
  if (name == "csv") return CorpusFormat::csv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  throw CorpusError("unknown format: " + name);
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Reproducibility manifest: resolved flags plus the timestamp, which lives
// in its own field so primary outputs stay byte-identical across runs.
void write_run_manifest(const std::string& subcommand, const json& flags,
                        const std::string& primary_output) {
  if (primary_output.empty() || primary_output == "-") return;
  json m;
  m["subcommand"] = subcommand;
  m["flags"] = flags;
  m["timestamp"] = iso_now();
  std::ofstream out(primary_output + ".run.json");
  out << m.dump(2) << "\n";
}

LabelMatrix labels_of(const DocumentSet& docs) {
  LabelMatrix m;
  m.reserve(docs.size());
  for (const Document& d : docs) {
    if (!d.labels) throw CorpusError("document " + d.id + " has no labels");
    m.push_back(*d.labels);
  }
  return m;
}

void write_predictions_csv(const PredictionBatch& preds, std::ostream& out) {
  std::vector<std::string> header{"id"};
  for (int c = 0; c < kNumCategories; ++c) header.emplace_back(kCategoryNames[c]);
  for (int c = 0; c < kNumCategories; ++c)
    header.push_back("p_" + std::string(kCategoryNames[c]));
  csv::write_record(out, header);
  for (std::size_t i = 0; i < preds.ids.size(); ++i) {
    std::vector<std::string> row{preds.ids[i]};
    for (int c = 0; c < kNumCategories; ++c)
      row.push_back(preds.labels[i].bits[static_cast<std::size_t>(c)] ? "1" : "0");
    for (int c = 0; c < kNumCategories; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", preds.probabilities(static_cast<Eigen::Index>(i), c));
      row.push_back(buf);
    }
    csv::write_record(out, row);
  }
}

struct PredictionFile {
  std::vector<std::string> ids;
  LabelMatrix labels;
};

PredictionFile read_predictions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path);
  auto header = csv::read_record(in);
  if (!header) throw CorpusError(path + ": empty file");
  std::vector<int> col(kNumCategories, -1);
  int id_col = -1;
  for (std::size_t j = 0; j < header->size(); ++j) {
    if ((*header)[j] == "id") id_col = static_cast<int>(j);
    for (int c = 0; c < kNumCategories; ++c)
      if ((*header)[j] == kCategoryNames[c]) col[static_cast<std::size_t>(c)] = static_cast<int>(j);
  }
  if (id_col < 0) throw CorpusError(path + ": missing id column");
  for (int c = 0; c < kNumCategories; ++c)
    if (col[static_cast<std::size_t>(c)] < 0)
      throw CorpusError(path + ": missing label column " + std::string(kCategoryNames[c]));
  PredictionFile pf;
  while (auto row = csv::read_record(in)) {
    pf.ids.push_back((*row)[static_cast<std::size_t>(id_col)]);
    LabelVector v{};
    for (int c = 0; c < kNumCategories; ++c) {
      const std::string& cell = (*row)[static_cast<std::size_t>(col[static_cast<std::size_t>(c)])];
      if (cell != "0" && cell != "1")
        throw CorpusError(path + ": label cell must be 0 or 1, got '" + cell + "'");
      v.bits[static_cast<std::size_t>(c)] = cell == "1" ? 1 : 0;
    }
    pf.labels.push_back(v);
  }
  return pf;
}

KeywordTable resolve_keyword_table(const std::string& path) {
  return path.empty() ? default_keyword_table() : load_keyword_table(path);
}

std::string ascii_bar(double fraction, int width = 40) {
  const int n = std::clamp(static_cast<int>(fraction * width + 0.5), 0, width);
  return std::string(static_cast<std::size_t>(n), '#');
}

std::string render_histogram(const CorpusStats& stats) {
  std::ostringstream out;
  out << "word-count histogram (bin width " << stats.bin_width << ")\n";
  int max_count = 1;
  for (const auto& [lo, n] : stats.histogram) max_count = std::max(max_count, n);
  for (const auto& [lo, n] : stats.histogram) {
    char label[32];
    std::snprintf(label, sizeof label, "%4d-%-4d", lo, lo + stats.bin_width - 1);
    out << "  " << label << " " << ascii_bar(static_cast<double>(n) / max_count, 40)
        << " " << n << "\n";
  }
  char line[96];
  std::snprintf(line, sizeof line, "  docs=%zu total_words=%lld mean=%.2f max=%d\n",
                stats.word_counts.size(), stats.total_words, stats.mean_words, stats.max_words);
  out << line;
  return out.str();
}

std::string render_label_distribution(const LabelMatrix& labels) {
  std::ostringstream out;
  out << "label distribution (" << labels.size() << " documents)\n";
  for (int c = 0; c < kNumCategories; ++c) {
    long long n = 0;
    for (const LabelVector& v : labels) n += v.bits[static_cast<std::size_t>(c)];
    const double frac = labels.empty() ? 0.0 : static_cast<double>(n) / labels.size();
    char head[64];
    std::snprintf(head, sizeof head, "  %-32s", std::string(kCategoryNames[c]).c_str());
    out << head << ascii_bar(frac, 40) << " " << n << "\n";
  }
  return out.str();
}

// --- subcommand bodies ---

int cmd_ingest(const std::string& input, const std::string& output,
               const std::string& format, const std::string& out_format) {
  DocumentSet docs = load_documents(input, parse_format(format));
  save_documents(docs, output, parse_format(out_format.empty() ? format : out_format));
  std::cerr << "ingested " << docs.size() << " documents -> " << output << "\n";
  write_run_manifest("ingest", {{"input", input}, {"format", format}, {"output", output}},
                     output);
  return 0;
}

int cmd_clean(const std::string& input, const std::string& output, const std::string& format) {
  DocumentSet docs = load_documents(input, parse_format(format));
  const CleaningConfig cfg = CleaningConfig::defaults();
  for (Document& d : docs) d.text = clean_text(d.text, cfg);
  save_documents(docs, output, parse_format(format));
  std::cerr << "cleaned " << docs.size() << " documents -> " << output << "\n";
  write_run_manifest("clean", {{"input", input}, {"format", format}, {"output", output}},
                     output);
  return 0;
}

int cmd_split(const std::string& input, const std::string& output, const std::string& format,
              SplitSpec spec) {
  DocumentSet docs = load_documents(input, parse_format(format));
  Split split = split_dataset(docs, spec);
  std::filesystem::create_directories(output);
  const CorpusFormat fmt = parse_format(format);
  const std::string ext = format == "jsonl" ? ".jsonl" : ".csv";
  save_documents(split.train, output + "/train" + ext, fmt);
  save_documents(split.val, output + "/val" + ext, fmt);
  save_documents(split.test, output + "/test" + ext, fmt);
  write_split_manifest(split, spec, output + "/split_manifest.json");
  std::cerr << "split " << docs.size() << " -> " << split.train.size() << "/"
            << split.val.size() << "/" << split.test.size() << " in " << output << "\n";
  write_run_manifest("split",
                     {{"input", input},
                      {"format", format},
                      {"output", output},
                      {"seed", spec.seed},
                      {"train", spec.train},
                      {"val", spec.val},
                      {"test", spec.test},
                      {"stratified", spec.stratified}},
                     output + "/split");
  return 0;
}

int cmd_synth(int n, std::uint64_t seed, double noise, const std::string& table_path,
              const std::string& output, const std::string& format) {
  KeywordTable table = resolve_keyword_table(table_path);
  DocumentSet docs = generate_synthetic(n, seed, table, noise);
  save_documents(docs, output, parse_format(format));
  std::cerr << "generated " << docs.size() << " synthetic documents -> " << output << "\n";
  write_run_manifest("synth",
                     {{"n", n}, {"seed", seed}, {"noise", noise},
                      {"keyword_table", table_path}, {"output", output}, {"format", format}},
                     output);
  return 0;
}

int cmd_keyword_label(const std::string& input, const std::string& output,
                      const std::string& format, const std::string& table_path) {
  DocumentSet docs = load_documents(input, parse_format(format));
  KeywordTable table = resolve_keyword_table(table_path);
  DocumentSet labeled = label_corpus(docs, table);
  save_documents(labeled, output, parse_format(format));
  std::cerr << "keyword-labeled " << labeled.size() << " of " << docs.size()
            << " documents -> " << output << "\n";
  write_run_manifest("keyword-label",
                     {{"input", input}, {"format", format},
                      {"keyword_table", table_path}, {"output", output}},
                     output);
  return 0;
}

int cmd_train(const std::string& input, const std::string& val_path, const std::string& output,
              const std::string& format, ModelConfig cfg, int min_count) {
  DocumentSet train_set = load_documents(input, parse_format(format));
  DocumentSet val_set =
      val_path.empty() ? train_set : load_documents(val_path, parse_format(format));

  Vocabulary vocab;
  if (cfg.encoder == EncoderKind::tiny) vocab = build_vocab(train_set, min_count);
  auto [model, resolved_vocab] = build_model(cfg, vocab);

  Checkpoint ckpt = train(std::move(model), train_set, val_set, resolved_vocab, cfg);
  std::filesystem::create_directories(output);
  save_checkpoint(ckpt, output);
  std::cerr << "trained " << cfg.epochs << " epochs; best epoch "
            << ckpt.metadata.best_epoch << " val macro-F1 "
            << ckpt.metadata.val_macro_f1 << " -> " << output << "\n";
  write_run_manifest("train",
                     {{"input", input}, {"val", val_path}, {"format", format},
                      {"output", output}, {"min_count", min_count},
                      {"config", json::parse(cfg.to_json())}},
                     output + "/train");
  return 0;
}

int cmd_predict(const std::string& model_dir, const std::string& input,
                const std::string& output, const std::string& format, double threshold) {
  Checkpoint ckpt = load_checkpoint(model_dir);
  DocumentSet docs = load_documents(input, parse_format(format));
  PredictionBatch preds = predict(ckpt.model, docs, ckpt.vocab, threshold);
  if (output.empty() || output == "-") {
    write_predictions_csv(preds, std::cout);
  } else {
    std::ofstream out(output);
    if (!out) throw CorpusError("cannot write " + output);
    write_predictions_csv(preds, out);
  }
  std::cerr << "predicted " << preds.ids.size() << " documents\n";
  write_run_manifest("predict",
                     {{"model", model_dir}, {"input", input}, {"format", format},
                      {"threshold", threshold}, {"output", output}},
                     output);
  return 0;
}

int cmd_evaluate(const std::string& truth_path, const std::string& pred_path,
                 const std::string& format, const std::string& output) {
  DocumentSet truth_docs = load_documents(truth_path, parse_format(format));
  PredictionFile preds = read_predictions_csv(pred_path);
  if (truth_docs.size() != preds.ids.size())
    throw EvaluateError("id mismatch: " + std::to_string(truth_docs.size()) + " truth vs " +
                        std::to_string(preds.ids.size()) + " prediction rows");
  for (std::size_t i = 0; i < truth_docs.size(); ++i)
    if (truth_docs[i].id != preds.ids[i])
      throw EvaluateError("id mismatch at row " + std::to_string(i + 1) + ": truth '" +
                          truth_docs[i].id + "' vs prediction '" + preds.ids[i] + "'");
  MetricsReport report = evaluate_predictions(labels_of(truth_docs), preds.labels);
  std::cout << render_metrics_text(report);
  if (!output.empty()) {
    std::ofstream out(output);
    out << metrics_to_json(report) << "\n";
  }
  write_run_manifest("evaluate",
                     {{"truth", truth_path}, {"predictions", pred_path},
                      {"format", format}, {"output", output}},
                     output);
  return 0;
}

int cmd_cooccur(const std::string& input, const std::string& format, const std::string& output) {
  DocumentSet docs = load_documents(input, parse_format(format));
  CooccurrenceMatrix m = cooccurrence(labels_of(docs));
  std::cout << render_cooccurrence_text(m);
  if (!output.empty()) {
    std::ofstream out(output);
    out << cooccurrence_to_json(m) << "\n";
  }
  write_run_manifest("cooccur", {{"input", input}, {"format", format}, {"output", output}},
                     output);
  return 0;
}

int cmd_review(const std::string& input, const std::string& pred_path, const std::string& format,
               const std::string& category_name, const std::string& ledger,
               const std::string& reviewer, const std::string& table_path) {
  const int category = category_index(category_name);
  DocumentSet docs = load_documents(input, parse_format(format));
  KeywordTable table = resolve_keyword_table(table_path);
  PredictionFile preds = read_predictions_csv(pred_path);

  std::map<std::string, const Document*> by_id;
  for (const Document& d : docs) by_id[d.id] = &d;

  LabelMatrix keyword_labels;
  for (const std::string& id : preds.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw EvaluateError("prediction id not in corpus: " + id);
    keyword_labels.push_back(label_document(it->second->text, table));
  }

  ControversialSplit split =
      controversial_split(preds.ids, keyword_labels, preds.labels, category);
  std::vector<std::string> queue = split.fp_docs;
  queue.insert(queue.end(), split.fn_docs.begin(), split.fn_docs.end());
  std::cerr << "category " << category_name << ": " << split.fp_docs.size()
            << " false-positive and " << split.fn_docs.size()
            << " false-negative candidates\n";

  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < preds.ids.size(); ++i) row_of[preds.ids[i]] = i;

  int reviewed = 0;
  for (const std::string& id : queue) {
    const std::size_t row = row_of[id];
    const int kw = keyword_labels[row].bits[static_cast<std::size_t>(category)];
    const int mdl = preds.labels[row].bits[static_cast<std::size_t>(category)];
    std::cout << "\n[" << id << "] " << by_id[id]->text << "\n"
              << "  keyword=" << kw << " model=" << mdl << " (" << category_name << ")\n"
              << "  verdict? [m]odel_correct [k]eyword_correct [b]oth_defensible "
                 "[n]either [s]kip [q]uit: "
              << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) break;
    if (line.empty() || line[0] == 's') continue;
    if (line[0] == 'q') break;
    Verdict verdict;
    switch (line[0]) {
      case 'm': verdict = Verdict::model_correct; break;
      case 'k': verdict = Verdict::keyword_correct; break;
      case 'b': verdict = Verdict::both_defensible; break;
      case 'n': verdict = Verdict::neither; break;
      default:
        std::cerr << "unrecognized verdict '" << line << "', skipping\n";
        continue;
    }
    AdjudicationRecord rec;
    rec.doc_id = id;
    rec.category = category;
    rec.keyword_label = kw;
    rec.model_label = mdl;
    rec.verdict = verdict;
    rec.reviewer = reviewer;
    rec.timestamp = iso_now();
    if (line.size() > 2) rec.note = line.substr(2);
    append_adjudication(rec, ledger);
    ++reviewed;
  }
  std::cerr << "appended " << reviewed << " verdicts to " << ledger << "\n";
  write_run_manifest("review",
                     {{"input", input}, {"predictions", pred_path}, {"format", format},
                      {"category", category_name}, {"ledger", ledger}, {"reviewer", reviewer}},
                     ledger);
  return 0;
}

int cmd_report(const std::string& input, const std::string& format, const std::string& pred_path,
               const std::string& ledger, const std::string& output) {
  DocumentSet docs = load_documents(input, parse_format(format));
  std::ostringstream doc;
  doc << "drought impact classification report\n"
      << "=====================================\n\n";

  CorpusStats stats = corpus_stats(docs);
  doc << render_histogram(stats) << "\n";

  const bool labeled = !docs.empty() && docs.front().labels.has_value();
  if (labeled) {
    LabelMatrix truth = labels_of(docs);
    doc << render_label_distribution(truth) << "\n";
    doc << render_cooccurrence_text(cooccurrence(truth)) << "\n";
    if (!pred_path.empty()) {
      PredictionFile preds = read_predictions_csv(pred_path);
      if (preds.ids.size() != docs.size())
        throw EvaluateError("prediction/corpus size mismatch");
      for (std::size_t i = 0; i < docs.size(); ++i)
        if (preds.ids[i] != docs[i].id)
          throw EvaluateError("id mismatch at row " + std::to_string(i + 1));
      doc << render_metrics_text(evaluate_predictions(truth, preds.labels)) << "\n";
    }
  }

  if (!ledger.empty()) {
    std::vector<AdjudicationRecord> recs = load_adjudications(ledger);
    doc << "adjudication summary\n";
    for (int c = 0; c < kNumCategories; ++c) {
      const bool any = std::any_of(recs.begin(), recs.end(),
                                   [c](const AdjudicationRecord& r) { return r.category == c; });
      if (!any) continue;
      AdjudicationSummary s = adjudication_summary(recs, c);
      char line[160];
      std::snprintf(line, sizeof line,
                    "  %-32s n=%-4d model_correct=%.2f (m=%d k=%d b=%d n=%d)\n",
                    std::string(kCategoryNames[c]).c_str(), s.n, s.model_correct_fraction, s.by_verdict[0],
                    s.by_verdict[1], s.by_verdict[2], s.by_verdict[3]);
      doc << line;
    }
    doc << "\n";
  }

  if (output.empty() || output == "-") {
    std::cout << doc.str();
  } else {
    std::ofstream out(output);
    if (!out) throw CorpusError("cannot write " + output);
    out << doc.str();
  }
  write_run_manifest("report",
                     {{"input", input}, {"format", format}, {"predictions", pred_path},
                      {"ledger", ledger}, {"output", output}},
                     output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drought impact multi-label classification pipeline"};
  app.require_subcommand(1);

  std::string input, output, val_path, model_dir, pred_path, truth_path, ledger;
  std::string format = "csv", out_format, table_path, config_path, category_name;
  std::string reviewer = "reviewer", encoder = "tiny";
  std::uint64_t seed = 0;
  double threshold = 0.5, noise = 0.0;
  int n = 64, min_count = 1;
  SplitSpec spec;

  auto* c_ingest = app.add_subcommand("ingest", "load and normalize a corpus file");
  c_ingest->add_option("--input", input)->required();
  c_ingest->add_option("--output", output)->required();
  c_ingest->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_ingest->add_option("--output-format", out_format)->check(CLI::IsMember({"csv", "jsonl"}));

  auto* c_clean = app.add_subcommand("clean", "apply the text cleaning pipeline");
  c_clean->add_option("--input", input)->required();
  c_clean->add_option("--output", output)->required();
  c_clean->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));

  auto* c_split = app.add_subcommand("split", "seeded train/val/test split");
  c_split->add_option("--input", input)->required();
  c_split->add_option("--output", output, "output directory")->required();
  c_split->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_split->add_option("--seed", spec.seed);
  c_split->add_option("--train", spec.train);
  c_split->add_option("--val", spec.val);
  c_split->add_option("--test", spec.test);
  c_split->add_flag("--stratified", spec.stratified);

  auto* c_synth = app.add_subcommand("synth", "generate a synthetic keyword corpus");
  c_synth->add_option("--n", n);
  c_synth->add_option("--seed", seed);
  c_synth->add_option("--noise", noise);
  c_synth->add_option("--keyword-table", table_path);
  c_synth->add_option("--output", output)->required();
  c_synth->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));

  auto* c_kw = app.add_subcommand("keyword-label", "apply the keyword weak labeler");
  c_kw->add_option("--input", input)->required();
  c_kw->add_option("--output", output)->required();
  c_kw->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_kw->add_option("--keyword-table", table_path);

  auto* c_train = app.add_subcommand("train", "fine-tune the classifier");
  c_train->add_option("--input", input)->required();
  c_train->add_option("--val", val_path, "validation corpus (defaults to the training set)");
  c_train->add_option("--output", output, "checkpoint directory")->required();
  c_train->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_train->add_option("--config", config_path, "ModelConfig JSON file");
  c_train->add_option("--encoder", encoder)->check(CLI::IsMember({"pretrained", "tiny"}));
  c_train->add_option("--seed", seed);
  c_train->add_option("--threshold", threshold);
  c_train->add_option("--min-count", min_count, "vocabulary minimum frequency");
  int epochs = -1, batch_size = -1;
  double lr = -1.0;
  bool freeze = false;
  c_train->add_option("--epochs", epochs);
  c_train->add_option("--batch-size", batch_size);
  c_train->add_option("--learning-rate", lr);
  c_train->add_flag("--freeze-encoder", freeze);

  auto* c_pred = app.add_subcommand("predict", "label a corpus with a trained model");
  c_pred->add_option("--model", model_dir, "checkpoint directory")->required();
  c_pred->add_option("--input", input)->required();
  c_pred->add_option("--output", output, "predictions CSV ('-' for stdout)");
  c_pred->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_pred->add_option("--threshold", threshold);

  auto* c_eval = app.add_subcommand("evaluate", "score predictions against labels");
  c_eval->add_option("--truth", truth_path, "labeled corpus")->required();
  c_eval->add_option("--predictions", pred_path, "predictions CSV")->required();
  c_eval->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_eval->add_option("--output", output, "metrics JSON output");

  auto* c_co = app.add_subcommand("cooccur", "label co-occurrence matrix");
  c_co->add_option("--input", input, "labeled corpus")->required();
  c_co->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_co->add_option("--output", output, "co-occurrence JSON output");

  auto* c_rev = app.add_subcommand("review", "interactive adjudication of disagreements");
  c_rev->add_option("--input", input, "corpus with raw text")->required();
  c_rev->add_option("--predictions", pred_path)->required();
  c_rev->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_rev->add_option("--category", category_name)->required();
  c_rev->add_option("--ledger", ledger, "adjudication JSONL ledger")->required();
  c_rev->add_option("--reviewer", reviewer);
  c_rev->add_option("--keyword-table", table_path);

  auto* c_rep = app.add_subcommand("report", "render metrics, co-occurrence, and histograms");
  c_rep->add_option("--input", input, "corpus")->required();
  c_rep->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  c_rep->add_option("--predictions", pred_path);
  c_rep->add_option("--ledger", ledger);
  c_rep->add_option("--output", output, "report text file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ? 0 : 2;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(input, output, format, out_format);
    if (c_clean->parsed()) return cmd_clean(input, output, format);
    if (c_split->parsed()) return cmd_split(input, output, format, spec);
    if (c_synth->parsed()) return cmd_synth(n, seed, noise, table_path, output, format);
    if (c_kw->parsed()) return cmd_keyword_label(input, output, format, table_path);
    if (c_train->parsed()) {
      ModelConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ModelError("cannot open config " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = ModelConfig::from_json(ss.str());
      }
      if (c_train->count("--encoder"))
        cfg.encoder = encoder == "pretrained" ? EncoderKind::pretrained_base_uncased
                                              : EncoderKind::tiny;
      if (c_train->count("--seed")) cfg.seed = seed;
      if (c_train->count("--threshold")) cfg.threshold = threshold;
      if (epochs >= 0) cfg.epochs = epochs;
      if (batch_size > 0) cfg.batch_size = batch_size;
      if (lr > 0) cfg.learning_rate = lr;
      if (freeze) cfg.freeze_encoder = true;
      return cmd_train(input, val_path, output, format, cfg, min_count);
    }
    if (c_pred->parsed()) return cmd_predict(model_dir, input, output, format, threshold);
    if (c_eval->parsed()) return cmd_evaluate(truth_path, pred_path, format, output);
    if (c_co->parsed()) return cmd_cooccur(input, format, output);
    if (c_rev->parsed())
      return cmd_review(input, pred_path, format, category_name, ledger, reviewer, table_path);
    if (c_rep->parsed()) return cmd_report(input, format, pred_path, ledger, output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
