#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "drought/corpus.hpp"
#include "drought/preprocess.hpp"

namespace drought {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EncoderKind { pretrained_base_uncased, tiny };

struct ModelConfig {
  EncoderKind encoder = EncoderKind::tiny;
  // Encoder shape; fixed to 12/768/12 for the pretrained variant.
  int layers = 2;
  int hidden = 32;
  int heads = 2;
  int ff_mult = 4;

  int head_hidden = 50;
  int num_labels = 7;
  int max_len = 48;
  double threshold = 0.5;
  double learning_rate = 1e-3;  // 2e-5 is the customary pretrained default
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 0;
  bool freeze_encoder = false;

  void validate() const;
  int encoder_layers() const { return encoder == EncoderKind::pretrained_base_uncased ? 12 : layers; }
  int encoder_hidden() const { return encoder == EncoderKind::pretrained_base_uncased ? 768 : hidden; }
  int encoder_heads() const { return encoder == EncoderKind::pretrained_base_uncased ? 12 : heads; }

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// Named weight matrix with its gradient accumulator.
struct Tensor {
  std::string name;
  Eigen::MatrixXd w;
  Eigen::MatrixXd g;

  Tensor() = default;
  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), w(Eigen::MatrixXd::Zero(rows, cols)),
        g(Eigen::MatrixXd::Zero(rows, cols)) {}
};

// Transformer encoder (token + position embeddings, pre-pool layer norm,
// multi-head self-attention blocks with GELU feed-forward) followed by a
// ReLU dense layer and a sigmoid output layer over the start-marker position.
class Model {
 public:
  struct Impl;

  Model(const ModelConfig& cfg, int vocab_size);

  const ModelConfig& config() const { return cfg_; }
  int vocab_size() const { return vocab_size_; }

  // Forward pass over a tokenized batch; returns batch x num_labels
  // probabilities (strictly inside (0,1)).
  Eigen::MatrixXd forward(const std::vector<TokenizedInput>& batch) const;

  // Mean binary cross-entropy with probabilities clamped to [eps, 1-eps].
  static double compute_loss(const Eigen::MatrixXd& probabilities,
                             const Eigen::MatrixXd& targets);

  // Forward + loss + gradient accumulation into every tensor's .g.
  double forward_backward(const std::vector<TokenizedInput>& batch,
                          const Eigen::MatrixXd& targets);

  void zero_grad();
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor*> head_parameters();
  std::vector<Tensor*> encoder_parameters();

  long long parameter_count() const;
  long long head_parameter_count() const;

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

 private:
  ModelConfig cfg_;
  int vocab_size_ = 0;
  std::unique_ptr<Impl> impl_;
};

struct TrainMetadata {
  int best_epoch = 0;
  double val_macro_f1 = 0.0;
  double val_macro_recall = 0.0;
  std::vector<double> epoch_losses;
};

struct Checkpoint {
  Model model;
  Vocabulary vocab;
  TrainMetadata metadata;
};

// Adam over BCE with deterministic seeded batch order; after each epoch the
// validation macro-F1 (macro-recall tiebreak) selects the checkpoint to keep.
Checkpoint train(Model model, const DocumentSet& train_set, const DocumentSet& val_set,
                 const Vocabulary& vocab, const ModelConfig& cfg);

struct PredictionBatch {
  std::vector<std::string> ids;
  Eigen::MatrixXd probabilities;     // N x num_labels
  std::vector<LabelVector> labels;   // probabilities >= threshold
};

PredictionBatch predict(const Model& model, const DocumentSet& docs, const Vocabulary& vocab,
                        double threshold);

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir);
Checkpoint load_checkpoint(const std::string& dir);

// Builds a model for the config. The tiny encoder is randomly initialized
// from cfg.seed; the pretrained variant loads weights from
// $DROUGHT_PRETRAINED_DIR and fails when they are absent.
std::pair<Model, Vocabulary> build_model(const ModelConfig& cfg, const Vocabulary& vocab);

// Max relative error between analytic gradients of the head parameters and
// central finite differences (step 1e-4).
double gradient_check(Model& model, const std::vector<TokenizedInput>& batch,
                      const Eigen::MatrixXd& targets);

// Same comparison over a seeded sample of coordinates across all parameters.
double gradient_check_full(Model& model, const std::vector<TokenizedInput>& batch,
                           const Eigen::MatrixXd& targets, int samples_per_tensor,
                           std::uint64_t seed);

}  // namespace drought
