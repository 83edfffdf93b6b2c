#include "drought/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "drought/evaluate.hpp"
#include "drought/nn.hpp"
#include "drought/rng.hpp"

namespace drought {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Matrix;
using nn::RowVector;

namespace {
constexpr double kProbEps = 1e-7;
constexpr double kMaskPenalty = 1e9;
}  // namespace

void ModelConfig::validate() const {
  if (threshold <= 0.0 || threshold >= 1.0) throw ModelError("threshold must be in (0,1)");
  if (head_hidden <= 0) throw ModelError("head_hidden must be positive");
  if (num_labels <= 0) throw ModelError("num_labels must be positive");
  if (max_len < 3) throw ModelError("max_len must be at least 3");
  if (encoder == EncoderKind::tiny) {
    if (layers <= 0 || hidden <= 0 || heads <= 0) throw ModelError("invalid tiny encoder shape");
    if (hidden % heads != 0) throw ModelError("hidden must be divisible by heads");
  }
  if (batch_size <= 0) throw ModelError("batch_size must be positive");
  if (epochs < 0) throw ModelError("epochs must be non-negative");
  if (learning_rate <= 0.0) throw ModelError("learning_rate must be positive");
}

std::string ModelConfig::to_json() const {
  json j = {{"encoder", encoder == EncoderKind::tiny ? "tiny" : "pretrained_base_uncased"},
            {"layers", layers},
            {"hidden", hidden},
            {"heads", heads},
            {"ff_mult", ff_mult},
            {"head_hidden", head_hidden},
            {"num_labels", num_labels},
            {"max_len", max_len},
            {"threshold", threshold},
            {"learning_rate", learning_rate},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"seed", seed},
            {"freeze_encoder", freeze_encoder}};
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("bad model config: ") + e.what());
  }
  ModelConfig cfg;
  const std::string enc = j.value("encoder", "tiny");
  if (enc == "tiny") cfg.encoder = EncoderKind::tiny;
  else if (enc == "pretrained_base_uncased") cfg.encoder = EncoderKind::pretrained_base_uncased;
  else throw ModelError("bad model config: unknown encoder '" + enc + "'");
  cfg.layers = j.value("layers", cfg.layers);
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.heads = j.value("heads", cfg.heads);
  cfg.ff_mult = j.value("ff_mult", cfg.ff_mult);
  cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
  cfg.num_labels = j.value("num_labels", cfg.num_labels);
  cfg.max_len = j.value("max_len", cfg.max_len);
  cfg.threshold = j.value("threshold", cfg.threshold);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.freeze_encoder = j.value("freeze_encoder", cfg.freeze_encoder);
  cfg.validate();
  return cfg;
}

// ---- model internals -------------------------------------------------------

struct EncoderLayer {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_g, ln1_b;
  Tensor w1, b1, w2, b2;
  Tensor ln2_g, ln2_b;
};

struct Model::Impl {
  Tensor tok_emb;  // vocab x d
  Tensor pos_emb;  // max_len x d
  Tensor lnf_g, lnf_b;  // final norm before pooling
  std::vector<EncoderLayer> layers;
  Tensor hw1, hb1;  // d x head_hidden
  Tensor hw2, hb2;  // head_hidden x num_labels
};

namespace {

// Pre-norm block: x += MHA(LN1(x)); x += FFN(LN2(x)).
struct LayerCache {
  Matrix y;  // LN1 output feeding attention
  nn::LayerNormCache ln1;
  Matrix q, k, v;
  std::vector<Matrix> att;  // per-head softmax, L x L
  Matrix ctx;               // L x d
  Matrix z;  // LN2 output feeding the feed-forward
  nn::LayerNormCache ln2;
  Matrix ffn_pre;  // L x ff
  Matrix ffn_act;
};

struct SeqCache {
  const TokenizedInput* input = nullptr;
  std::vector<LayerCache> layers;
  nn::LayerNormCache lnf;
  RowVector pooled;
  RowVector hz1, ha1, hz2;
  RowVector probs;
};

RowVector row_of(const Tensor& t) { return t.w.row(0); }

void fill_normal(Matrix& m, Rng& rng, double scale) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal() * scale;
}

}  // namespace

Model::Model(const ModelConfig& cfg, int vocab_size)
    : cfg_(cfg), vocab_size_(vocab_size), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  if (vocab_size < Vocabulary::kNumReserved) throw ModelError("vocabulary too small");
  const int d = cfg_.encoder_hidden();
  const int ff = d * cfg_.ff_mult;
  const int L = cfg_.max_len;

  Rng rng = Rng::forked(cfg_.seed, /*stream=*/3);

  auto weight = [&](const std::string& name, int rows, int cols) {
    Tensor t(name, rows, cols);
    fill_normal(t.w, rng, std::sqrt(2.0 / (rows + cols)));
    return t;
  };
  auto bias = [&](const std::string& name, int cols) { return Tensor(name, 1, cols); };
  auto ones = [&](const std::string& name, int cols) {
    Tensor t(name, 1, cols);
    t.w.setOnes();
    return t;
  };

  impl_->tok_emb = weight("tok_emb", vocab_size, d);
  impl_->pos_emb = weight("pos_emb", L, d);
  impl_->lnf_g = ones("lnf_g", d);
  impl_->lnf_b = bias("lnf_b", d);
  for (int l = 0; l < cfg_.encoder_layers(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    EncoderLayer layer;
    layer.wq = weight(p + "wq", d, d);
    layer.bq = bias(p + "bq", d);
    layer.wk = weight(p + "wk", d, d);
    layer.bk = bias(p + "bk", d);
    layer.wv = weight(p + "wv", d, d);
    layer.bv = bias(p + "bv", d);
    layer.wo = weight(p + "wo", d, d);
    layer.bo = bias(p + "bo", d);
    layer.ln1_g = ones(p + "ln1_g", d);
    layer.ln1_b = bias(p + "ln1_b", d);
    layer.w1 = weight(p + "w1", d, ff);
    layer.b1 = bias(p + "b1", ff);
    layer.w2 = weight(p + "w2", ff, d);
    layer.b2 = bias(p + "b2", d);
    layer.ln2_g = ones(p + "ln2_g", d);
    layer.ln2_b = bias(p + "ln2_b", d);
    impl_->layers.push_back(std::move(layer));
  }
  impl_->hw1 = weight("head.w1", d, cfg_.head_hidden);
  impl_->hb1 = bias("head.b1", cfg_.head_hidden);
  impl_->hw2 = weight("head.w2", cfg_.head_hidden, cfg_.num_labels);
  impl_->hb2 = bias("head.b2", cfg_.num_labels);
}

Model::Model(const Model& other)
    : cfg_(other.cfg_), vocab_size_(other.vocab_size_),
      impl_(std::make_unique<Impl>(*other.impl_)) {}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    cfg_ = other.cfg_;
    vocab_size_ = other.vocab_size_;
    impl_ = std::make_unique<Impl>(*other.impl_);
  }
  return *this;
}

Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

std::vector<Tensor*> Model::encoder_parameters() {
  std::vector<Tensor*> out = {&impl_->tok_emb, &impl_->pos_emb, &impl_->lnf_g, &impl_->lnf_b};
  for (auto& l : impl_->layers) {
    for (Tensor* t : {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln1_g,
                      &l.ln1_b, &l.w1, &l.b1, &l.w2, &l.b2, &l.ln2_g, &l.ln2_b})
      out.push_back(t);
  }
  return out;
}

std::vector<Tensor*> Model::head_parameters() {
  return {&impl_->hw1, &impl_->hb1, &impl_->hw2, &impl_->hb2};
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out = encoder_parameters();
  for (Tensor* t : head_parameters()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

long long Model::parameter_count() const {
  long long n = 0;
  for (const Tensor* t : parameters()) n += t->w.size();
  return n;
}

long long Model::head_parameter_count() const {
  auto head = const_cast<Model*>(this)->head_parameters();
  long long n = 0;
  for (const Tensor* t : head) n += t->w.size();
  return n;
}

void Model::zero_grad() {
  for (Tensor* t : parameters()) t->g.setZero();
}

namespace {

// One encoder+head forward pass; fills the cache when given.
RowVector forward_seq(const Model::Impl& m, const ModelConfig& cfg, const TokenizedInput& in,
                      SeqCache* cache) {
  const int d = cfg.encoder_hidden();
  const int heads = cfg.encoder_heads();
  const int dh = d / heads;
  const int L = cfg.max_len;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  if (static_cast<int>(in.token_ids.size()) != L)
    throw ModelError("tokenized input length does not match max_len");

  Matrix x(L, d);
  for (int t = 0; t < L; ++t) {
    const int id = in.token_ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= static_cast<int>(m.tok_emb.w.rows()))
      throw ModelError("token id out of vocabulary range");
    x.row(t) = m.tok_emb.w.row(id) + m.pos_emb.w.row(t);
  }

  if (cache) cache->layers.resize(m.layers.size());
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const EncoderLayer& layer = m.layers[li];
    LayerCache local;
    LayerCache& c = cache ? cache->layers[li] : local;
    c.y = nn::layer_norm(x, row_of(layer.ln1_g), row_of(layer.ln1_b), c.ln1);
    c.q = (c.y * layer.wq.w).rowwise() + row_of(layer.bq);
    c.k = (c.y * layer.wk.w).rowwise() + row_of(layer.bk);
    c.v = (c.y * layer.wv.w).rowwise() + row_of(layer.bv);
    c.ctx.resize(L, d);
    c.att.resize(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      const auto qh = c.q.middleCols(h * dh, dh);
      const auto kh = c.k.middleCols(h * dh, dh);
      const auto vh = c.v.middleCols(h * dh, dh);
      Matrix s = qh * kh.transpose() * scale;
      for (int j = 0; j < L; ++j)
        if (!in.attention_mask[static_cast<std::size_t>(j)]) s.col(j).array() -= kMaskPenalty;
      c.att[static_cast<std::size_t>(h)] = nn::softmax_rows(s);
      c.ctx.middleCols(h * dh, dh) = c.att[static_cast<std::size_t>(h)] * vh;
    }
    x += (c.ctx * layer.wo.w).rowwise() + row_of(layer.bo);
    c.z = nn::layer_norm(x, row_of(layer.ln2_g), row_of(layer.ln2_b), c.ln2);
    c.ffn_pre = (c.z * layer.w1.w).rowwise() + row_of(layer.b1);
    c.ffn_act = nn::gelu(c.ffn_pre);
    x += (c.ffn_act * layer.w2.w).rowwise() + row_of(layer.b2);
  }

  nn::LayerNormCache lnf_local;
  nn::LayerNormCache& lnf = cache ? cache->lnf : lnf_local;
  x = nn::layer_norm(x, row_of(m.lnf_g), row_of(m.lnf_b), lnf);

  RowVector pooled = x.row(0);
  RowVector hz1 = pooled * m.hw1.w + row_of(m.hb1);
  RowVector ha1 = nn::relu(hz1);
  RowVector hz2 = ha1 * m.hw2.w + row_of(m.hb2);
  RowVector probs = nn::sigmoid(hz2);
  if (cache) {
    cache->input = &in;
    cache->pooled = pooled;
    cache->hz1 = hz1;
    cache->ha1 = ha1;
    cache->hz2 = hz2;
    cache->probs = probs;
  }
  return probs;
}

// Back-propagates d(loss)/d(hz2) through head and encoder, accumulating
// parameter gradients.
void backward_seq(Model::Impl& m, const ModelConfig& cfg, const SeqCache& c,
                  const RowVector& dhz2) {
  const int d = cfg.encoder_hidden();
  const int heads = cfg.encoder_heads();
  const int dh = d / heads;
  const int L = cfg.max_len;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // head
  m.hw2.g += c.ha1.transpose() * dhz2;
  m.hb2.g.row(0) += dhz2;
  RowVector dha1 = dhz2 * m.hw2.w.transpose();
  RowVector dhz1 =
      (dha1.array() * (c.hz1.array() > 0.0).cast<double>()).matrix();
  m.hw1.g += c.pooled.transpose() * dhz1;
  m.hb1.g.row(0) += dhz1;
  RowVector dpooled = dhz1 * m.hw1.w.transpose();

  // final norm before pooling
  Matrix dxf = Matrix::Zero(L, d);
  dxf.row(0) = dpooled;
  RowVector dgf = RowVector::Zero(d), dbf = RowVector::Zero(d);
  Matrix dx = nn::layer_norm_backward(dxf, c.lnf, row_of(m.lnf_g), dgf, dbf);
  m.lnf_g.g.row(0) += dgf;
  m.lnf_b.g.row(0) += dbf;

  for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
    EncoderLayer& layer = m.layers[static_cast<std::size_t>(li)];
    const LayerCache& lc = c.layers[static_cast<std::size_t>(li)];

    // x += gelu(LN2(x) w1 + b1) w2 + b2
    layer.w2.g += lc.ffn_act.transpose() * dx;
    layer.b2.g.row(0) += dx.colwise().sum();
    Matrix dact = dx * layer.w2.w.transpose();
    Matrix dpre = (dact.array() * nn::gelu_grad(lc.ffn_pre).array()).matrix();
    layer.w1.g += lc.z.transpose() * dpre;
    layer.b1.g.row(0) += dpre.colwise().sum();
    Matrix dz = dpre * layer.w1.w.transpose();
    RowVector dg2 = RowVector::Zero(d), db2v = RowVector::Zero(d);
    dx += nn::layer_norm_backward(dz, lc.ln2, row_of(layer.ln2_g), dg2, db2v);
    layer.ln2_g.g.row(0) += dg2;
    layer.ln2_b.g.row(0) += db2v;

    // x += MHA(LN1(x)) wo + bo
    layer.wo.g += lc.ctx.transpose() * dx;
    layer.bo.g.row(0) += dx.colwise().sum();
    Matrix dctx = dx * layer.wo.w.transpose();

    Matrix dq = Matrix::Zero(L, d), dk = Matrix::Zero(L, d), dv = Matrix::Zero(L, d);
    for (int h = 0; h < heads; ++h) {
      const auto qh = lc.q.middleCols(h * dh, dh);
      const auto kh = lc.k.middleCols(h * dh, dh);
      const auto vh = lc.v.middleCols(h * dh, dh);
      const Matrix& a = lc.att[static_cast<std::size_t>(h)];
      const auto dch = dctx.middleCols(h * dh, dh);
      Matrix da = dch * vh.transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * dch;
      Matrix ds = nn::softmax_rows_backward(a, da);
      dq.middleCols(h * dh, dh) = ds * kh * scale;
      dk.middleCols(h * dh, dh) = ds.transpose() * qh * scale;
    }
    layer.wq.g += lc.y.transpose() * dq;
    layer.bq.g.row(0) += dq.colwise().sum();
    layer.wk.g += lc.y.transpose() * dk;
    layer.bk.g.row(0) += dk.colwise().sum();
    layer.wv.g += lc.y.transpose() * dv;
    layer.bv.g.row(0) += dv.colwise().sum();
    Matrix dy = dq * layer.wq.w.transpose() + dk * layer.wk.w.transpose() +
                dv * layer.wv.w.transpose();
    RowVector dg1 = RowVector::Zero(d), db1v = RowVector::Zero(d);
    dx += nn::layer_norm_backward(dy, lc.ln1, row_of(layer.ln1_g), dg1, db1v);
    layer.ln1_g.g.row(0) += dg1;
    layer.ln1_b.g.row(0) += db1v;
  }

  for (int t = 0; t < L; ++t) {
    const int id = c.input->token_ids[static_cast<std::size_t>(t)];
    m.tok_emb.g.row(id) += dx.row(t);
    m.pos_emb.g.row(t) += dx.row(t);
  }
}

}  // namespace

Eigen::MatrixXd Model::forward(const std::vector<TokenizedInput>& batch) const {
  Matrix out(static_cast<Eigen::Index>(batch.size()), cfg_.num_labels);
  for (std::size_t b = 0; b < batch.size(); ++b)
    out.row(static_cast<Eigen::Index>(b)) = forward_seq(*impl_, cfg_, batch[b], nullptr);
  return out;
}

double Model::compute_loss(const Eigen::MatrixXd& probabilities, const Eigen::MatrixXd& targets) {
  if (probabilities.rows() != targets.rows() || probabilities.cols() != targets.cols())
    throw ModelError("compute_loss: shape mismatch");
  const auto p = probabilities.array().max(kProbEps).min(1.0 - kProbEps);
  const auto t = targets.array();
  const double total = -(t * p.log() + (1.0 - t) * (1.0 - p).log()).sum();
  return total / static_cast<double>(probabilities.size());
}

double Model::forward_backward(const std::vector<TokenizedInput>& batch,
                               const Eigen::MatrixXd& targets) {
  if (static_cast<Eigen::Index>(batch.size()) != targets.rows() ||
      targets.cols() != cfg_.num_labels)
    throw ModelError("forward_backward: target shape mismatch");
  zero_grad();
  const double denom = static_cast<double>(batch.size()) * static_cast<double>(cfg_.num_labels);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    SeqCache cache;
    RowVector probs = forward_seq(*impl_, cfg_, batch[b], &cache);
    RowVector dhz2 = RowVector::Zero(cfg_.num_labels);
    for (int k = 0; k < cfg_.num_labels; ++k) {
      const double p = probs(k);
      const double t = targets(static_cast<Eigen::Index>(b), k);
      const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
      loss += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
      // Clamped probabilities sit on a flat piece of the loss.
      const double dldp = (p > kProbEps && p < 1.0 - kProbEps)
                              ? (-t / pc + (1.0 - t) / (1.0 - pc)) / denom
                              : 0.0;
      dhz2(k) = dldp * p * (1.0 - p);
    }
    backward_seq(*impl_, cfg_, cache, dhz2);
  }
  return loss / denom;
}

// ---- training ---------------------------------------------------------------

namespace {

struct AdamState {
  std::vector<Matrix> m, v;
  long long step = 0;

  explicit AdamState(const std::vector<Tensor*>& params) {
    for (const Tensor* t : params) {
      m.push_back(Matrix::Zero(t->w.rows(), t->w.cols()));
      v.push_back(Matrix::Zero(t->w.rows(), t->w.cols()));
    }
  }

  void update(std::vector<Tensor*>& params, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& t = *params[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * t.g;
      v[i] = (beta2 * v[i].array() + (1.0 - beta2) * t.g.array().square()).matrix();
      const auto mhat = m[i].array() / bc1;
      const auto vhat = v[i].array() / bc2;
      t.w.array() -= lr * mhat / (vhat.sqrt() + eps);
    }
  }
};

// Global-norm gradient clipping.
void clip_gradients(std::vector<Tensor*>& params, double max_norm) {
  double sq = 0.0;
  for (const Tensor* t : params) sq += t->g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (Tensor* t : params) t->g *= scale;
  }
}

std::vector<TokenizedInput> tokenize_set(const DocumentSet& docs, const Vocabulary& vocab,
                                          int max_len) {
  static const CleaningConfig cleaning = CleaningConfig::defaults();
  std::vector<TokenizedInput> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(tokenize(clean_text(d.text, cleaning), vocab, max_len));
  return out;
}

Eigen::MatrixXd targets_of(const DocumentSet& docs, int num_labels) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(docs.size()), num_labels);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].labels)
      throw ModelError("train: document \"" + docs[i].id + "\" has no labels");
    if (num_labels != kNumCategories)
      throw ModelError("train: label dimension mismatch (model expects " +
                       std::to_string(num_labels) + " labels)");
    for (int k = 0; k < num_labels; ++k)
      t(static_cast<Eigen::Index>(i), k) = docs[i].labels->bits[static_cast<std::size_t>(k)];
  }
  return t;
}

std::pair<double, double> val_macro_scores(const Model& model,
                                           const std::vector<TokenizedInput>& inputs,
                                           const DocumentSet& docs, double threshold) {
  Eigen::MatrixXd probs = model.forward(inputs);
  LabelMatrix y_true, y_pred;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    y_true.push_back(*docs[i].labels);
    LabelVector lv;
    for (int k = 0; k < kNumCategories; ++k)
      lv.bits[static_cast<std::size_t>(k)] = probs(static_cast<Eigen::Index>(i), k) >= threshold ? 1 : 0;
    y_pred.push_back(lv);
  }
  MetricsReport report = evaluate_predictions(y_true, y_pred);
  return {report.macro.f1, report.macro.recall};
}

}  // namespace

Checkpoint train(Model model, const DocumentSet& train_set, const DocumentSet& val_set,
                 const Vocabulary& vocab, const ModelConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw ModelError("train: empty training set");
  if (val_set.empty()) throw ModelError("train: empty validation set (epoch selection undefined)");

  const auto train_inputs = tokenize_set(train_set, vocab, cfg.max_len);
  const auto val_inputs = tokenize_set(val_set, vocab, cfg.max_len);
  const Eigen::MatrixXd train_targets = targets_of(train_set, cfg.num_labels);
  targets_of(val_set, cfg.num_labels);  // validates labels

  std::vector<Tensor*> trainable =
      cfg.freeze_encoder ? model.head_parameters() : model.parameters();
  AdamState adam(trainable);

  Checkpoint best{model, vocab, {}};
  std::tie(best.metadata.val_macro_f1, best.metadata.val_macro_recall) =
      val_macro_scores(model, val_inputs, val_set, cfg.threshold);
  best.metadata.best_epoch = 0;

  const std::size_t n = train_set.size();
  const long long batches_per_epoch =
      static_cast<long long>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  const long long total_steps = batches_per_epoch * cfg.epochs;
  const long long warmup_steps = std::max<long long>(1, total_steps / 10);
  long long step = 0;
  // Linear warmup then linear decay, the usual schedule for training
  // transformers from random initialization.
  auto lr_at = [&](long long s) {
    if (s <= warmup_steps) return cfg.learning_rate * static_cast<double>(s) /
                                  static_cast<double>(warmup_steps);
    const double remain = static_cast<double>(total_steps - s) /
                          static_cast<double>(std::max<long long>(1, total_steps - warmup_steps));
    return cfg.learning_rate * std::max(0.05, remain);
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = Rng::forked(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<TokenizedInput> batch;
      Eigen::MatrixXd targets(static_cast<Eigen::Index>(end - start), cfg.num_labels);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_inputs[order[i]]);
        targets.row(static_cast<Eigen::Index>(i - start)) =
            train_targets.row(static_cast<Eigen::Index>(order[i]));
      }
      epoch_loss += model.forward_backward(batch, targets);
      clip_gradients(trainable, 5.0);
      adam.update(trainable, lr_at(++step));
      ++batches;
    }
    best.metadata.epoch_losses.push_back(batches ? epoch_loss / batches : 0.0);

    const auto [f1, recall] = val_macro_scores(model, val_inputs, val_set, cfg.threshold);
    const bool better = f1 > best.metadata.val_macro_f1 ||
                        (f1 == best.metadata.val_macro_f1 &&
                         recall > best.metadata.val_macro_recall);
    if (better) {
      best.model = model;
      best.metadata.best_epoch = epoch;
      best.metadata.val_macro_f1 = f1;
      best.metadata.val_macro_recall = recall;
    }
  }
  return best;
}

PredictionBatch predict(const Model& model, const DocumentSet& docs, const Vocabulary& vocab,
                        double threshold) {
  const auto inputs = tokenize_set(docs, vocab, model.config().max_len);
  PredictionBatch out;
  out.probabilities = model.forward(inputs);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out.ids.push_back(docs[i].id);
    LabelVector lv;
    for (int k = 0; k < std::min(model.config().num_labels, kNumCategories); ++k)
      lv.bits[static_cast<std::size_t>(k)] =
          out.probabilities(static_cast<Eigen::Index>(i), k) >= threshold ? 1 : 0;
    out.labels.push_back(lv);
  }
  return out;
}

// ---- persistence ------------------------------------------------------------

namespace {

constexpr char kWeightsMagic[4] = {'D', 'R', 'W', 'T'};

void write_weights(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open " + path + " for writing");
  out.write(kWeightsMagic, 4);
  const auto params = model.parameters();
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const Tensor* t : params) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(t->name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof name_len);
    out.write(t->name.data(), name_len);
    const std::uint64_t rows = static_cast<std::uint64_t>(t->w.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(t->w.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(t->w.data()),
              static_cast<std::streamsize>(sizeof(double) * t->w.size()));
  }
}

void read_weights(Model& model, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open weights file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kWeightsMagic, 4) != 0)
    throw ModelError(path + ": not a weights file");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  auto params = model.parameters();
  if (count != params.size())
    throw ModelError(path + ": tensor count mismatch (config does not match weights)");
  for (Tensor* t : params) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
    if (!in || name_len > 4096) throw ModelError(path + ": corrupt weights file");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (name != t->name || rows != static_cast<std::uint64_t>(t->w.rows()) ||
        cols != static_cast<std::uint64_t>(t->w.cols()))
      throw ModelError(path + ": tensor \"" + name + "\" does not match config shape for \"" +
                       t->name + "\"");
    in.read(reinterpret_cast<char*>(t->w.data()),
            static_cast<std::streamsize>(sizeof(double) * t->w.size()));
    if (!in) throw ModelError(path + ": truncated weights file");
  }
}

std::vector<Tensor*> model_parameters(Model& m) { return m.parameters(); }

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "config.json");
    if (!out) throw ModelError("cannot write checkpoint config");
    out << ckpt.model.config().to_json() << '\n';
  }
  ckpt.vocab.save((fs::path(dir) / "vocab.txt").string());
  write_weights(ckpt.model, (fs::path(dir) / "weights.bin").string());
  {
    json meta = {{"best_epoch", ckpt.metadata.best_epoch},
                 {"val_macro_f1", ckpt.metadata.val_macro_f1},
                 {"val_macro_recall", ckpt.metadata.val_macro_recall},
                 {"epoch_losses", ckpt.metadata.epoch_losses}};
    std::ofstream out(fs::path(dir) / "metadata.json");
    if (!out) throw ModelError("cannot write checkpoint metadata");
    out << meta.dump(2) << '\n';
  }
}

Checkpoint load_checkpoint(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream cfg_in(base / "config.json");
  if (!cfg_in) throw ModelError("checkpoint " + dir + ": missing config.json");
  std::string cfg_text((std::istreambuf_iterator<char>(cfg_in)), std::istreambuf_iterator<char>());
  ModelConfig cfg = ModelConfig::from_json(cfg_text);

  Vocabulary vocab = Vocabulary::load((base / "vocab.txt").string());
  Model model(cfg, vocab.size());
  read_weights(model, (base / "weights.bin").string());

  TrainMetadata meta;
  std::ifstream meta_in(base / "metadata.json");
  if (meta_in) {
    json j;
    try {
      meta_in >> j;
      meta.best_epoch = j.value("best_epoch", 0);
      meta.val_macro_f1 = j.value("val_macro_f1", 0.0);
      meta.val_macro_recall = j.value("val_macro_recall", 0.0);
      meta.epoch_losses = j.value("epoch_losses", std::vector<double>{});
    } catch (const json::exception& e) {
      throw ModelError(dir + "/metadata.json: " + std::string(e.what()));
    }
  }
  return Checkpoint{std::move(model), std::move(vocab), std::move(meta)};
}

std::pair<Model, Vocabulary> build_model(const ModelConfig& cfg, const Vocabulary& vocab) {
  cfg.validate();
  if (cfg.encoder == EncoderKind::tiny) return {Model(cfg, vocab.size()), vocab};

  const char* cache = std::getenv("DROUGHT_PRETRAINED_DIR");
  if (!cache || !*cache)
    throw ModelError("missing pretrained weights: set DROUGHT_PRETRAINED_DIR to a directory "
                     "containing bert_base_uncased weights (weights.bin + vocab.txt)");
  const fs::path base(cache);
  if (!fs::exists(base / "weights.bin") || !fs::exists(base / "vocab.txt"))
    throw ModelError("missing pretrained weights under " + std::string(cache));
  Vocabulary pv = Vocabulary::load((base / "vocab.txt").string());
  Model model(cfg, pv.size());
  read_weights(model, (base / "weights.bin").string());
  return {std::move(model), std::move(pv)};
}

// ---- gradient checking -------------------------------------------------------

namespace {

double loss_at(Model& model, const std::vector<TokenizedInput>& batch,
               const Eigen::MatrixXd& targets) {
  return Model::compute_loss(model.forward(batch), targets);
}

double check_coords(Model& model, const std::vector<TokenizedInput>& batch,
                    const Eigen::MatrixXd& targets, const std::vector<Tensor*>& tensors,
                    const std::vector<std::vector<Eigen::Index>>& coords) {
  model.forward_backward(batch, targets);
  std::vector<Matrix> analytic;
  for (const Tensor* t : tensors) analytic.push_back(t->g);

  constexpr double step = 1e-4;
  double max_rel = 0.0;
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    Tensor* t = tensors[ti];
    for (Eigen::Index flat : coords[ti]) {
      double* w = t->w.data() + flat;
      const double saved = *w;
      *w = saved + step;
      const double lp = loss_at(model, batch, targets);
      *w = saved - step;
      const double lm = loss_at(model, batch, targets);
      *w = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic[ti].data()[flat];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace

double gradient_check(Model& model, const std::vector<TokenizedInput>& batch,
                      const Eigen::MatrixXd& targets) {
  auto tensors = model.head_parameters();
  std::vector<std::vector<Eigen::Index>> coords(tensors.size());
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    coords[ti].resize(static_cast<std::size_t>(tensors[ti]->w.size()));
    std::iota(coords[ti].begin(), coords[ti].end(), 0);
  }
  return check_coords(model, batch, targets, tensors, coords);
}

double gradient_check_full(Model& model, const std::vector<TokenizedInput>& batch,
                           const Eigen::MatrixXd& targets, int samples_per_tensor,
                           std::uint64_t seed) {
  auto tensors = model_parameters(model);
  Rng rng = Rng::forked(seed, /*stream=*/4);
  std::vector<std::vector<Eigen::Index>> coords(tensors.size());
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    const Eigen::Index size = tensors[ti]->w.size();
    for (int s = 0; s < samples_per_tensor; ++s)
      coords[ti].push_back(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(size))));
  }
  return check_coords(model, batch, targets, tensors, coords);
}

}  // namespace drought
