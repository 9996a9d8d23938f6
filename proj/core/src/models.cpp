#include "heteroflow/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "heteroflow/error.hpp"
#include "heteroflow/rng.hpp"

namespace heteroflow::models {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

int count_parameters(Family family, int in, int layers, int h) {
  switch (family) {
    case Family::Gcn: return in * h + (layers - 1) * h * h + h + 1;
    case Family::GfGcn: return in * h + h * (h + 1) / 2 + h + 1;
    case Family::AdaptiveMix: return 3 * (in * h + (layers - 1) * h * h) + 3 * layers + h + 1;
  }
  return 0;
}

// Tensor positions inside ModelParams::tensors() for each family.
struct Layout {
  int layers;
  int gcn_w(int l) const { return l; }
  int gf_encoder() const { return 0; }
  int gf_w() const { return 1; }
  int mix_low(int l) const { return 4 * l; }
  int mix_high(int l) const { return 4 * l + 1; }
  int mix_id(int l) const { return 4 * l + 2; }
  int mix_alpha(int l) const { return 4 * l + 3; }
  int head_w(Family f) const {
    switch (f) {
      case Family::Gcn: return layers;
      case Family::GfGcn: return 2;
      case Family::AdaptiveMix: return 4 * layers;
    }
    return 0;
  }
  int head_b(Family f) const { return head_w(f) + 1; }
};

Vector softmax(const Matrix& logits) {
  const Vector z = logits.col(0);
  const double shift = z.maxCoeff();
  Vector e = (z.array() - shift).exp();
  return e / e.sum();
}

Matrix activate(const Matrix& z, Activation a) { return a == Activation::Relu ? Matrix(z.cwiseMax(0.0)) : z; }

Matrix activation_grad(const Matrix& z, const Matrix& upstream, Activation a) {
  if (a == Activation::Identity) return upstream;
  return upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
}

Matrix glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
  return m;
}

// Intermediate values kept for the backward pass.
struct Tape {
  std::vector<Matrix> inputs;       // H_l
  std::vector<Matrix> propagated;   // gcn: Ahat_sl H_l; gf/adaptive: Ahat H_l
  std::vector<Matrix> preact;       // Z_l (gcn, adaptive)
  std::vector<Matrix> channels;     // adaptive: [low, high, id] per layer, flattened
  Matrix encoded;                   // gf_gcn H_0
  Matrix output;                    // H_L
  Matrix pooled;
  Vector predictions;
};

Tape run_forward(const ModelParams& params, const GraphBatch& batch) {
  const auto& cfg = params.config();
  const auto& t = params.tensors();
  const Layout lay{cfg.layers};
  if (batch.features.cols() != cfg.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "feature width " + std::to_string(batch.features.cols()) +
                                                  " != model input " + std::to_string(cfg.input_dim));
  }
  Tape tape;
  Matrix h = batch.features;
  switch (cfg.family) {
    case Family::Gcn:
      for (int l = 0; l < cfg.layers; ++l) {
        tape.inputs.push_back(h);
        Matrix p = batch.a_hat_self_loops * h;
        Matrix z = p * t[static_cast<std::size_t>(lay.gcn_w(l))].value;
        tape.propagated.push_back(std::move(p));
        h = activate(z, cfg.activation);
        tape.preact.push_back(std::move(z));
      }
      break;
    case Family::GfGcn: {
      h = h * t[static_cast<std::size_t>(lay.gf_encoder())].value;
      tape.encoded = h;
      const Matrix& w = t[static_cast<std::size_t>(lay.gf_w())].value;
      for (int l = 0; l < cfg.layers; ++l) {
        tape.inputs.push_back(h);
        Matrix p = batch.a_hat * h;
        Matrix z = h + cfg.tau * p * w;
        tape.propagated.push_back(std::move(p));
        h = activate(z, cfg.activation);
        tape.preact.push_back(std::move(z));
      }
      break;
    }
    case Family::AdaptiveMix:
      for (int l = 0; l < cfg.layers; ++l) {
        tape.inputs.push_back(h);
        const Vector m = softmax(t[static_cast<std::size_t>(lay.mix_alpha(l))].value);
        Matrix low = batch.a_hat * h;
        Matrix high = h - low;
        Matrix c_low = low * t[static_cast<std::size_t>(lay.mix_low(l))].value;
        Matrix c_high = high * t[static_cast<std::size_t>(lay.mix_high(l))].value;
        Matrix c_id = h * t[static_cast<std::size_t>(lay.mix_id(l))].value;
        Matrix z = m(0) * c_low + m(1) * c_high + m(2) * c_id;
        tape.propagated.push_back(std::move(low));
        tape.channels.push_back(std::move(c_low));
        tape.channels.push_back(std::move(c_high));
        tape.channels.push_back(std::move(c_id));
        h = activate(z, cfg.activation);
        tape.preact.push_back(std::move(z));
      }
      break;
  }
  tape.output = h;
  tape.pooled = batch.pooling * h;
  tape.predictions = tape.pooled * t[static_cast<std::size_t>(lay.head_w(cfg.family))].value;
  tape.predictions.array() += t[static_cast<std::size_t>(lay.head_b(cfg.family))].value(0, 0);
  return tape;
}

Vector loss_derivative(const Vector& pred, const Vector& target, LossKind kind) {
  const double inv = 1.0 / static_cast<double>(pred.size());
  Vector d(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (kind == LossKind::Mse) {
      d(i) = 2.0 * (pred(i) - target(i)) * inv;
    } else {
      const double s = target(i) > 0.5 ? 1.0 : -1.0;
      // d/dy log(1 + exp(-s y)) = -s * sigmoid(-s y)
      const double x = -s * pred(i);
      const double sig = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      d(i) = -s * sig * inv;
    }
  }
  return d;
}

Graph record_graph_check(const datagen::SyntheticGraphRecord& r) { return r.graph; }

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Gcn: return "gcn";
    case Family::GfGcn: return "gf_gcn";
    case Family::AdaptiveMix: return "adaptive_mix";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model family '" + std::string(s) + "'");
}

std::string_view to_string(LossKind k) { return k == LossKind::Mse ? "mse" : "logistic"; }

ModelConfig ModelConfig::defaults(Family family, int input_dim, int layers, int hidden) {
  ModelConfig c;
  c.family = family;
  c.input_dim = input_dim;
  c.layers = layers;
  c.hidden = hidden;
  c.activation = family == Family::GfGcn ? Activation::Identity : Activation::Relu;
  return c;
}

int matched_hidden_width(Family family, int input_dim, int layers, int reference_hidden) {
  const int target = count_parameters(Family::Gcn, input_dim, layers, reference_hidden);
  int best = 1;
  int best_gap = std::numeric_limits<int>::max();
  for (int h = 1; h <= 512; ++h) {
    const int gap = std::abs(count_parameters(family, input_dim, layers, h) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = h;
    }
  }
  return best;
}

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  if (cfg.layers < 1 || cfg.hidden < 1 || cfg.input_dim < 1) {
    throw Error(ErrorCode::InvalidArgument, "model needs layers, hidden and input_dim >= 1");
  }
  ModelParams p;
  p.config_ = cfg;
  const int in = cfg.input_dim;
  const int h = cfg.hidden;
  auto add = [&](std::string name, int r, int c) { p.tensors_.push_back({std::move(name), Matrix::Zero(r, c)}); };
  switch (cfg.family) {
    case Family::Gcn:
      for (int l = 0; l < cfg.layers; ++l) add("W" + std::to_string(l), l == 0 ? in : h, h);
      break;
    case Family::GfGcn:
      add("encoder", in, h);
      add("W", h, h);
      break;
    case Family::AdaptiveMix:
      for (int l = 0; l < cfg.layers; ++l) {
        const int rows = l == 0 ? in : h;
        add("W_low" + std::to_string(l), rows, h);
        add("W_high" + std::to_string(l), rows, h);
        add("W_id" + std::to_string(l), rows, h);
        add("alpha" + std::to_string(l), 3, 1);
      }
      break;
  }
  add("head_w", h, 1);
  add("head_b", 1, 1);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = zeros(cfg);
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  for (auto& t : p.tensors_) {
    if (t.name == "head_b" || t.name.rfind("alpha", 0) == 0) continue;
    t.value = glorot(static_cast<int>(t.value.rows()), static_cast<int>(t.value.cols()), rng);
    if (cfg.family == Family::GfGcn && t.name == "W") t.value = 0.5 * (t.value + t.value.transpose()).eval();
  }
  return p;
}

Matrix& ModelParams::at(std::string_view name) {
  for (auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw Error(ErrorCode::InvalidArgument, "no tensor named '" + std::string(name) + "'");
}

const Matrix& ModelParams::at(std::string_view name) const { return const_cast<ModelParams*>(this)->at(name); }

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

Vector ModelParams::mixing(int layer) const { return softmax(at("alpha" + std::to_string(layer))); }

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.config_.family != b.config_.family || a.config_.layers != b.config_.layers ||
      a.config_.hidden != b.config_.hidden || a.config_.input_dim != b.config_.input_dim ||
      a.config_.tau != b.config_.tau || a.config_.activation != b.config_.activation ||
      a.tensors_.size() != b.tensors_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    if (a.tensors_[i].name != b.tensors_[i].name || a.tensors_[i].value != b.tensors_[i].value) return false;
  }
  return true;
}

GraphBatch make_batch(std::span<const datagen::SyntheticGraphRecord> records, std::span<const int> indices,
                      LossKind loss) {
  GraphBatch b;
  b.graphs = static_cast<int>(indices.size());
  b.offsets.reserve(indices.size() + 1);
  b.offsets.push_back(0);
  int width = -1;
  std::size_t nnz = 0;
  for (int idx : indices) {
    const auto& r = records[static_cast<std::size_t>(idx)];
    if (width < 0) width = r.features.cols();
    if (r.features.cols() != width) throw Error(ErrorCode::DimensionMismatch, "records differ in feature width");
    b.offsets.push_back(b.offsets.back() + r.graph.n());
    nnz += 2 * r.graph.edge_count();
  }
  const int n = b.offsets.back();
  b.features.resize(n, std::max(width, 0));
  b.targets.resize(b.graphs);

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> adj;
  std::vector<Trip> adj_sl;
  std::vector<Trip> pool;
  adj.reserve(nnz);
  adj_sl.reserve(nnz + static_cast<std::size_t>(n));
  pool.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < b.graphs; ++k) {
    const auto& r = records[static_cast<std::size_t>(indices[static_cast<std::size_t>(k)])];
    const Graph g = record_graph_check(r);
    const int off = b.offsets[static_cast<std::size_t>(k)];
    b.features.middleRows(off, g.n()) = r.features.values();
    for (const Edge& e : g.edges()) {
      const double w = 1.0 / std::sqrt(static_cast<double>(g.degree(e.u)) * g.degree(e.v));
      const double wsl = 1.0 / std::sqrt(static_cast<double>(g.degree(e.u) + 1) * (g.degree(e.v) + 1));
      adj.emplace_back(off + e.u, off + e.v, w);
      adj.emplace_back(off + e.v, off + e.u, w);
      adj_sl.emplace_back(off + e.u, off + e.v, wsl);
      adj_sl.emplace_back(off + e.v, off + e.u, wsl);
    }
    for (int i = 0; i < g.n(); ++i) {
      adj_sl.emplace_back(off + i, off + i, 1.0 / (g.degree(i) + 1.0));
      pool.emplace_back(k, off + i, 1.0 / g.n());
    }
    if (loss == LossKind::Mse && r.target) {
      b.targets(k) = *r.target;
    } else {
      b.targets(k) = static_cast<double>(r.graph_label);
    }
  }
  b.a_hat.resize(n, n);
  b.a_hat.setFromTriplets(adj.begin(), adj.end());
  b.a_hat_self_loops.resize(n, n);
  b.a_hat_self_loops.setFromTriplets(adj_sl.begin(), adj_sl.end());
  b.pooling.resize(b.graphs, n);
  b.pooling.setFromTriplets(pool.begin(), pool.end());
  return b;
}

GraphBatch make_batch(std::span<const datagen::SyntheticGraphRecord> records, LossKind loss) {
  std::vector<int> all(records.size());
  std::iota(all.begin(), all.end(), 0);
  return make_batch(records, all, loss);
}

ForwardResult forward(const ModelParams& params, const GraphBatch& batch) {
  Tape tape = run_forward(params, batch);
  return {std::move(tape.output), std::move(tape.pooled), std::move(tape.predictions)};
}

ForwardResult forward(const ModelParams& params, const Graph& g, const FeatureMatrix& f0) {
  datagen::SyntheticGraphRecord r;
  r.graph = g;
  r.features = f0;
  r.node_labels.assign(static_cast<std::size_t>(g.n()), 0);
  if (f0.rows() != g.n()) throw Error(ErrorCode::DimensionMismatch, "feature rows != node count");
  return forward(params, make_batch(std::span<const datagen::SyntheticGraphRecord>(&r, 1), LossKind::Logistic));
}

std::vector<Matrix> layer_outputs(const ModelParams& params, const Graph& g, const FeatureMatrix& f0) {
  datagen::SyntheticGraphRecord r;
  r.graph = g;
  r.features = f0;
  if (f0.rows() != g.n()) throw Error(ErrorCode::DimensionMismatch, "feature rows != node count");
  Tape tape = run_forward(params, make_batch(std::span<const datagen::SyntheticGraphRecord>(&r, 1), LossKind::Logistic));
  std::vector<Matrix> out = std::move(tape.inputs);
  out.push_back(std::move(tape.output));
  return out;
}

double loss(const Vector& predictions, const Vector& targets, LossKind kind) {
  if (predictions.size() != targets.size()) throw Error(ErrorCode::ShapeMismatch, "prediction/target sizes differ");
  if (predictions.size() == 0) throw Error(ErrorCode::ShapeMismatch, "empty prediction vector");
  double total = 0.0;
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    if (kind == LossKind::Mse) {
      const double r = predictions(i) - targets(i);
      total += r * r;
    } else {
      const double s = targets(i) > 0.5 ? 1.0 : -1.0;
      const double x = -s * predictions(i);
      // log(1 + exp(x)) without overflow
      total += x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
  }
  return total / static_cast<double>(predictions.size());
}

LossAndGrad grad(const ModelParams& params, const GraphBatch& batch, LossKind kind) {
  if (batch.graphs == 0) throw Error(ErrorCode::InvalidArgument, "gradient of an empty batch");
  const auto& cfg = params.config();
  const auto& t = params.tensors();
  const Layout lay{cfg.layers};
  const Tape tape = run_forward(params, batch);

  LossAndGrad out;
  out.loss = loss(tape.predictions, batch.targets, kind);
  out.grads.reserve(t.size());
  for (const auto& tensor : t) out.grads.push_back(Matrix::Zero(tensor.value.rows(), tensor.value.cols()));
  auto g_at = [&](int idx) -> Matrix& { return out.grads[static_cast<std::size_t>(idx)]; };
  auto w_at = [&](int idx) -> const Matrix& { return t[static_cast<std::size_t>(idx)].value; };

  const Vector dpred = loss_derivative(tape.predictions, batch.targets, kind);
  g_at(lay.head_b(cfg.family))(0, 0) = dpred.sum();
  g_at(lay.head_w(cfg.family)) = tape.pooled.transpose() * dpred;
  const Matrix dpooled = dpred * w_at(lay.head_w(cfg.family)).transpose();
  Matrix dh = batch.pooling.transpose() * dpooled;

  switch (cfg.family) {
    case Family::Gcn:
      for (int l = cfg.layers - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const Matrix dz = activation_grad(tape.preact[li], dh, cfg.activation);
        g_at(lay.gcn_w(l)) = tape.propagated[li].transpose() * dz;
        dh = batch.a_hat_self_loops * (dz * w_at(lay.gcn_w(l)).transpose());
      }
      break;
    case Family::GfGcn: {
      const Matrix& w = w_at(lay.gf_w());
      Matrix& dw = g_at(lay.gf_w());
      for (int l = cfg.layers - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const Matrix dz = activation_grad(tape.preact[li], dh, cfg.activation);
        dw += cfg.tau * tape.propagated[li].transpose() * dz;
        dh = dz + cfg.tau * (batch.a_hat * (dz * w.transpose()));
      }
      g_at(lay.gf_encoder()) = batch.features.transpose() * dh;
      break;
    }
    case Family::AdaptiveMix:
      for (int l = cfg.layers - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const Vector m = softmax(w_at(lay.mix_alpha(l)));
        const Matrix dz = activation_grad(tape.preact[li], dh, cfg.activation);
        const Matrix& low = tape.propagated[li];
        const Matrix high = tape.inputs[li] - low;
        g_at(lay.mix_low(l)) = m(0) * (low.transpose() * dz);
        g_at(lay.mix_high(l)) = m(1) * (high.transpose() * dz);
        g_at(lay.mix_id(l)) = m(2) * (tape.inputs[li].transpose() * dz);
        Vector dm(3);
        for (int c = 0; c < 3; ++c) dm(c) = tape.channels[3 * li + static_cast<std::size_t>(c)].cwiseProduct(dz).sum();
        const double mean = m.dot(dm);
        g_at(lay.mix_alpha(l)) = (m.array() * (dm.array() - mean)).matrix();

        const Matrix back_low = dz * w_at(lay.mix_low(l)).transpose();
        const Matrix back_high = dz * w_at(lay.mix_high(l)).transpose();
        const Matrix back_id = dz * w_at(lay.mix_id(l)).transpose();
        dh = m(0) * (batch.a_hat * back_low) + m(1) * (back_high - batch.a_hat * back_high) + m(2) * back_id;
      }
      break;
  }
  return out;
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s;
  for (const auto& t : params.tensors()) {
    s.m.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
    s.v.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
  }
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr, const AdamOptions& opts) {
  auto& t = params.tensors();
  if (grads.size() != t.size() || state.m.size() != t.size() || state.v.size() != t.size()) {
    throw Error(ErrorCode::ShapeMismatch, "Adam state/gradients do not match parameters");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (grads[i].rows() != t[i].value.rows() || grads[i].cols() != t[i].value.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "gradient shape differs for " + t[i].name);
    }
    state.m[i] = opts.beta1 * state.m[i] + (1.0 - opts.beta1) * grads[i];
    state.v[i] = opts.beta2 * state.v[i] + (1.0 - opts.beta2) * grads[i].cwiseProduct(grads[i]);
    const Matrix m_hat = state.m[i] / c1;
    const Matrix v_hat = state.v[i] / c2;
    t[i].value.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + opts.eps);
  }
  if (params.family() == Family::GfGcn) {
    Matrix& w = params.at("W");
    w = (0.5 * (w + w.transpose())).eval();
  }
}

double accuracy(const Vector& predictions, const Vector& targets) {
  if (predictions.size() != targets.size()) throw Error(ErrorCode::ShapeMismatch, "prediction/target sizes differ");
  if (predictions.size() == 0) return 0.0;
  int correct = 0;
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    if ((predictions(i) > 0.0) == (targets(i) > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

TrainReport train(Family family, std::span<const datagen::SyntheticGraphRecord> records,
                  const datagen::SplitIndices& split, const TrainConfig& cfg) {
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw Error(ErrorCode::EmptySplit, "train/val/test splits must be non-empty");
  }
  if (!(cfg.learning_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be >= 0");
  const int input_dim = records[static_cast<std::size_t>(split.train.front())].features.cols();
  const int hidden = cfg.match_parameters ? matched_hidden_width(family, input_dim, cfg.layers, cfg.hidden) : cfg.hidden;
  ModelConfig mc = ModelConfig::defaults(family, input_dim, cfg.layers, hidden);
  mc.tau = cfg.tau;

  TrainReport report;
  report.family = family;
  report.params = ModelParams::init(mc, cfg.seed);
  AdamState state = AdamState::for_params(report.params);
  Rng rng(derive_seed(cfg.seed, 0x747261696eULL));

  const GraphBatch val = make_batch(records, split.val, cfg.loss);
  const bool full_batch = cfg.batch_size <= 0 || cfg.batch_size >= static_cast<int>(split.train.size());
  std::optional<GraphBatch> full;
  if (full_batch) full = make_batch(records, split.train, cfg.loss);

  ModelParams current = report.params;
  double best_val = loss(forward(current, val).predictions, val.targets, cfg.loss);
  report.selected_epoch = 0;
  std::vector<int> order = split.train;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (full_batch) {
      const LossAndGrad lg = grad(current, *full, cfg.loss);
      epoch_loss = lg.loss;
      if (!std::isfinite(lg.loss)) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
      adam_step(current, lg.grads, state, cfg.learning_rate);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      double weighted = 0.0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
        const std::span<const int> idx(order.data() + start, stop - start);
        const GraphBatch b = make_batch(records, idx, cfg.loss);
        const LossAndGrad lg = grad(current, b, cfg.loss);
        if (!std::isfinite(lg.loss)) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
        weighted += lg.loss * static_cast<double>(stop - start);
        adam_step(current, lg.grads, state, cfg.learning_rate);
      }
      epoch_loss = weighted / static_cast<double>(order.size());
    }
    const double vl = loss(forward(current, val).predictions, val.targets, cfg.loss);
    if (!std::isfinite(vl)) throw Error(ErrorCode::NonFiniteLoss, "validation loss at epoch " + std::to_string(epoch));
    report.train_loss.push_back(epoch_loss);
    report.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      report.selected_epoch = epoch;
      report.params = current;
    }
  }

  const GraphBatch test = make_batch(records, split.test, cfg.loss);
  const ForwardResult fr = forward(report.params, test);
  report.test_loss = loss(fr.predictions, test.targets, cfg.loss);
  report.test_metric = cfg.loss == LossKind::Logistic ? accuracy(fr.predictions, test.targets) : report.test_loss;
  report.test_embeddings = fr.graph_embeddings;
  report.test_indices = split.test;
  return report;
}

Matrix embed_graphs(const ModelParams& params, std::span<const datagen::SyntheticGraphRecord> records) {
  if (records.empty()) return Matrix(0, params.config().hidden);
  return forward(params, make_batch(records, LossKind::Logistic)).graph_embeddings;
}

}  // namespace heteroflow::models
