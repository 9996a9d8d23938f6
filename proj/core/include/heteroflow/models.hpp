#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "heteroflow/datagen.hpp"
#include "heteroflow/graph.hpp"

namespace heteroflow::models {

enum class Family { Gcn, GfGcn, AdaptiveMix };

inline constexpr Family kAllFamilies[] = {Family::Gcn, Family::GfGcn, Family::AdaptiveMix};

std::string_view to_string(Family f);
Family parse_family(std::string_view s);

enum class Activation { Relu, Identity };

enum class LossKind { Logistic, Mse };

std::string_view to_string(LossKind k);

struct ModelConfig {
  Family family = Family::Gcn;
  int input_dim = 8;
  int layers = 4;
  int hidden = 16;
  double tau = 0.2;  // gf_gcn step size
  Activation activation = Activation::Relu;

  /// Family defaults: ReLU for gcn/adaptive_mix, identity for gf_gcn.
  static ModelConfig defaults(Family family, int input_dim, int layers = 4, int hidden = 16);
};

/// Hidden width for `family` whose parameter count is closest to a gcn with
/// `reference_hidden` channels and the same depth and input width.
int matched_hidden_width(Family family, int input_dim, int layers, int reference_hidden);

struct Tensor {
  std::string name;
  Matrix value;
};

/// Trainable parameters as an ordered list of named tensors.
///
/// gcn:          W0..W{L-1}, head_w, head_b
/// gf_gcn:       encoder, W (symmetric, shared by all layers), head_w, head_b
/// adaptive_mix: per layer W_low{l}, W_high{l}, W_id{l}, alpha{l} (3x1), then head_w, head_b
class ModelParams {
 public:
  ModelParams() = default;
  /// Glorot-uniform weights, zero head bias and zero mixing logits.
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
  /// All-zero tensors in the layout of `cfg`.
  static ModelParams zeros(const ModelConfig& cfg);

  const ModelConfig& config() const noexcept { return config_; }
  Family family() const noexcept { return config_.family; }
  std::vector<Tensor>& tensors() noexcept { return tensors_; }
  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;
  std::size_t parameter_count() const;

  /// Mixing weights softmax(alpha{layer}) for adaptive_mix.
  Vector mixing(int layer) const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  ModelConfig config_;
  std::vector<Tensor> tensors_;
};

using Gradients = std::vector<Matrix>;

/// Block-diagonal stack of several graphs with their operators precomputed.
struct GraphBatch {
  int graphs = 0;
  std::vector<int> offsets;  // node offset of each graph; size graphs + 1
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_hat;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_hat_self_loops;
  Eigen::SparseMatrix<double, Eigen::RowMajor> pooling;  // graphs x nodes, mean readout
  Matrix features;
  Vector targets;

  int nodes() const { return offsets.back(); }
};

/// Targets: graph_label for logistic loss, the record target (or graph_label
/// when absent) for mse.
GraphBatch make_batch(std::span<const datagen::SyntheticGraphRecord> records, std::span<const int> indices,
                      LossKind loss);
GraphBatch make_batch(std::span<const datagen::SyntheticGraphRecord> records, LossKind loss);

struct ForwardResult {
  Matrix node_embeddings;   // nodes x width
  Matrix graph_embeddings;  // graphs x width
  Vector predictions;       // graphs
};

ForwardResult forward(const ModelParams& params, const GraphBatch& batch);
/// Single graph.
ForwardResult forward(const ModelParams& params, const Graph& g, const FeatureMatrix& f0);

/// Node representations after each layer, starting with the layer input.
std::vector<Matrix> layer_outputs(const ModelParams& params, const Graph& g, const FeatureMatrix& f0);

/// mse: mean squared error. logistic: mean log(1 + exp(-s * y_hat)) with s = +1
/// for target 1 and -1 for target 0. Throws ShapeMismatch.
double loss(const Vector& predictions, const Vector& targets, LossKind kind);

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

/// Reverse-mode gradient of the mean batch loss. Throws InvalidArgument on an
/// empty batch.
LossAndGrad grad(const ModelParams& params, const GraphBatch& batch, LossKind kind);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long long t = 0;

  static AdamState for_params(const ModelParams& params);
};

/// Bias-corrected Adam update in place; gf_gcn's W is re-symmetrized afterwards.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               const AdamOptions& opts = {});

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 300;
  /// 0 means full batch.
  int batch_size = 0;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::Logistic;
  int layers = 4;
  int hidden = 16;
  double tau = 0.2;
  /// Scale hidden widths so every family has about as many parameters as gcn.
  bool match_parameters = true;
};

struct TrainReport {
  Family family = Family::Gcn;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int selected_epoch = 0;  // 1-based; 0 means the initial model
  double test_loss = 0.0;
  /// Accuracy for classification, MSE for regression.
  double test_metric = 0.0;
  Matrix test_embeddings;
  std::vector<int> test_indices;
  ModelParams params;
};

/// Trains with Adam and keeps the parameters of the epoch with the lowest
/// validation loss. Throws NonFiniteLoss or EmptySplit.
TrainReport train(Family family, std::span<const datagen::SyntheticGraphRecord> records,
                  const datagen::SplitIndices& split, const TrainConfig& cfg);

/// Graph embeddings (mean readout) of the given records, one row each.
Matrix embed_graphs(const ModelParams& params, std::span<const datagen::SyntheticGraphRecord> records);

double accuracy(const Vector& predictions, const Vector& targets);

}  // namespace heteroflow::models
