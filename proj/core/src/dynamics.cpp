#include "heteroflow/dynamics.hpp"

#include <cmath>
#include <string>

#include "heteroflow/error.hpp"

namespace heteroflow::dynamics {

namespace {

void require_square(const Matrix& m, int d, const char* what) {
  if (m.rows() != d || m.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be " + std::to_string(d) + "x" +
                                                  std::to_string(d));
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::NotSymmetric, std::string(what) + " is not symmetric");
  }
}

void require_features(const Graph& g, const Matrix& f, const Matrix& f0, const WeightSpec& w) {
  if (f.rows() != g.n() || f0.rows() != g.n()) throw Error(ErrorCode::DimensionMismatch, "feature rows != node count");
  if (f.cols() != w.dim() || f0.cols() != w.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "feature width != weight dimension");
  }
}

}  // namespace

WeightSpec::WeightSpec(Matrix w, std::optional<Matrix> omega, std::optional<Matrix> w_tilde) : w_(std::move(w)) {
  const int d = static_cast<int>(w_.rows());
  if (d < 1) throw Error(ErrorCode::DimensionMismatch, "W must be at least 1x1");
  require_square(w_, d, "W");
  require_symmetric(w_, "W");
  omega_ = omega ? std::move(*omega) : Matrix::Zero(d, d);
  w_tilde_ = w_tilde ? std::move(*w_tilde) : Matrix::Zero(d, d);
  require_square(omega_, d, "Omega");
  require_symmetric(omega_, "Omega");
  require_square(w_tilde_, d, "W_tilde");
  auto spec = symmetric_eigendecomposition(w_);
  mu_ = std::move(spec.eigenvalues);
  q_ = std::move(spec.eigenvectors);
}

WeightSpec WeightSpec::scalar(double value, int d) { return WeightSpec(value * Matrix::Identity(d, d)); }

EigenSplit eigen_split(const WeightSpec& w) {
  const int d = w.dim();
  int pos = 0;
  int neg = 0;
  for (int k = 0; k < d; ++k) {
    if (w.mu()(k) > 0) ++pos;
    if (w.mu()(k) < 0) ++neg;
  }
  EigenSplit out;
  out.theta_plus = Matrix::Zero(pos, d);
  out.theta_minus = Matrix::Zero(neg, d);
  int ip = 0;
  int in = 0;
  for (int k = 0; k < d; ++k) {
    const double mu = w.mu()(k);
    if (mu > 0) out.theta_plus.row(ip++) = std::sqrt(mu) * w.q().col(k).transpose();
    if (mu < 0) out.theta_minus.row(in++) = std::sqrt(-mu) * w.q().col(k).transpose();
  }
  return out;
}

EigenSplit eigen_split(const Matrix& w) { return eigen_split(WeightSpec(w)); }

double energy_functional(const Graph& g, const Matrix& f, const Matrix& f0, const WeightSpec& w, Phi0Mode mode) {
  require_features(g, f, f0, w);
  const Matrix a_hat = normalized_adjacency(g);
  const double self = 0.5 * (f * w.omega()).cwiseProduct(f).sum();
  const double pair = 0.5 * (a_hat * f * w.w()).cwiseProduct(f).sum();
  double source = 0.0;
  if (mode == Phi0Mode::Quadratic) source = (f0 * w.w_tilde()).cwiseProduct(f).sum();
  return self - pair + source;
}

Matrix energy_gradient(const Graph& g, const Matrix& f, const Matrix& f0, const WeightSpec& w, Phi0Mode mode) {
  require_features(g, f, f0, w);
  Matrix grad = f * w.omega() - normalized_adjacency(g) * f * w.w();
  if (mode == Phi0Mode::Quadratic) grad += f0 * w.w_tilde();
  return grad;
}

Matrix flow_velocity(const Matrix& a_hat, const Matrix& f, const Matrix& f0, const WeightSpec& w,
                     FlowVariant variant) {
  Matrix v = a_hat * f * w.w();
  if (variant == FlowVariant::Full) v -= f * w.omega() + f0 * w.w_tilde();
  return v;
}

FeatureMatrix gradient_flow_step(const Graph& g, const FeatureMatrix& f, const FeatureMatrix& f0, const WeightSpec& w,
                                 double tau, FlowVariant variant) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be > 0");
  require_features(g, f.values(), f0.values(), w);
  const Matrix a_hat = normalized_adjacency(g);
  return FeatureMatrix(f.values() + tau * flow_velocity(a_hat, f.values(), f0.values(), w, variant));
}

DynamicsTrace simulate(const Graph& g, const FeatureMatrix& f0, const WeightSpec& w, const SimulationOptions& opts) {
  if (opts.steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(opts.tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be > 0");
  require_features(g, f0.values(), f0.values(), w);
  if (!(f0.norm() > 0.0)) throw Error(ErrorCode::ZeroFeatureNorm, "F(0) is zero");

  const Matrix a_hat = normalized_adjacency(g);
  const Matrix& source = f0.values();
  Matrix f = source;
  if (opts.renormalize) f /= f.norm();

  DynamicsTrace trace;
  trace.tau = opts.tau;
  const auto steps = static_cast<std::size_t>(opts.steps);
  trace.times.reserve(steps + 1);
  trace.dirichlet.reserve(steps + 1);
  trace.rayleigh.reserve(steps + 1);
  trace.feature_norm.reserve(steps + 1);

  auto record = [&](int k) {
    const double t = k * opts.tau;
    const double e = dirichlet_energy(g, f);
    const double norm = f.norm();
    trace.times.push_back(t);
    trace.dirichlet.push_back(e);
    trace.rayleigh.push_back(e / (norm * norm));
    trace.feature_norm.push_back(norm);
    if (opts.variant == FlowVariant::Full) {
      trace.energy.push_back(energy_functional(g, f, source, w, opts.phi0));
    }
    const bool keep = k == 0 || k == opts.steps || (opts.snapshot_stride > 0 && k % opts.snapshot_stride == 0);
    if (keep) trace.snapshots.push_back({t, f});
  };

  record(0);
  for (int k = 1; k <= opts.steps; ++k) {
    f += opts.tau * flow_velocity(a_hat, f, source, w, opts.variant);
    const double norm = f.norm();
    if (!std::isfinite(norm) || (!opts.renormalize && norm > opts.divergence_threshold)) {
      throw Error(ErrorCode::Diverged, "feature norm exceeded threshold at step " + std::to_string(k) +
                                           "; lower tau or enable renormalization");
    }
    if (norm == 0.0) throw Error(ErrorCode::ZeroFeatureNorm, "features collapsed to zero at step " + std::to_string(k));
    if (opts.renormalize) f /= norm;
    record(k);
  }
  return trace;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::LFD: return "LFD";
    case Regime::HFD: return "HFD";
    case Regime::Boundary: return "boundary";
    case Regime::Undecided: return "undecided";
  }
  return "?";
}

RegimePrediction predict_regime(const SpectralDecomposition& laplacian, const WeightSpec& w) {
  RegimePrediction p;
  p.lambda_max = laplacian.max();
  p.margin = std::abs(w.mu_min()) * (p.lambda_max - 1.0) - w.mu_max();
  if (p.margin > kRegimeBoundaryTolerance) {
    p.regime = Regime::HFD;
  } else if (p.margin < -kRegimeBoundaryTolerance) {
    p.regime = Regime::LFD;
  } else {
    p.regime = Regime::Boundary;
  }
  return p;
}

RegimePrediction predict_regime(const Graph& g, const WeightSpec& w) { return predict_regime(laplacian_spectrum(g), w); }

Regime classify_regime_empirical(const DynamicsTrace& trace, const SpectralDecomposition& laplacian, double eps) {
  if (trace.rayleigh.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  const double r = trace.final_rayleigh();
  if (r < eps) return Regime::LFD;
  if (laplacian.max() - r < eps) return Regime::HFD;
  return Regime::Undecided;
}

Graph barbell_graph(int clique_n, int path_len) {
  if (clique_n < 3) throw Error(ErrorCode::InvalidArgument, "clique_n must be >= 3");
  if (path_len < 1) throw Error(ErrorCode::InvalidArgument, "path_len must be >= 1");
  const int n = 2 * clique_n + path_len;
  const int second = clique_n + path_len;
  std::vector<Edge> edges;
  for (int base : {0, second}) {
    for (int i = 0; i < clique_n; ++i)
      for (int j = i + 1; j < clique_n; ++j) edges.push_back(Edge{base + i, base + j});
  }
  for (int v = clique_n - 1; v < second; ++v) edges.push_back(Edge{v, v + 1});
  return Graph::build(n, std::span<const Edge>(edges));
}

}  // namespace heteroflow::dynamics
