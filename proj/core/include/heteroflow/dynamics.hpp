#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "heteroflow/graph.hpp"

namespace heteroflow::dynamics {

/// Channel-mixing weights of the linear flow. W and Omega are symmetric;
/// W_tilde couples the source features F(0) and may be any d x d matrix.
class WeightSpec {
 public:
  /// Throws NotSymmetric or DimensionMismatch. Omega and W_tilde default to zero.
  explicit WeightSpec(Matrix w, std::optional<Matrix> omega = {}, std::optional<Matrix> w_tilde = {});

  static WeightSpec scalar(double value, int d = 1);

  int dim() const noexcept { return static_cast<int>(w_.rows()); }
  const Matrix& w() const noexcept { return w_; }
  const Matrix& omega() const noexcept { return omega_; }
  const Matrix& w_tilde() const noexcept { return w_tilde_; }
  /// Ascending eigenvalues mu_0 <= ... <= mu_{d-1} of W.
  const Vector& mu() const noexcept { return mu_; }
  const Matrix& q() const noexcept { return q_; }
  double mu_min() const { return mu_(0); }
  double mu_max() const { return mu_(mu_.size() - 1); }

 private:
  Matrix w_;
  Matrix omega_;
  Matrix w_tilde_;
  Vector mu_;
  Matrix q_;
};

/// W = Theta_plus^T Theta_plus - Theta_minus^T Theta_minus. Each Theta has one
/// row per strictly positive (resp. negative) eigenvalue of W.
struct EigenSplit {
  Matrix theta_plus;
  Matrix theta_minus;

  Matrix attractive() const { return theta_plus.transpose() * theta_plus; }
  Matrix repulsive() const { return theta_minus.transpose() * theta_minus; }
  Matrix reconstruct() const { return attractive() - repulsive(); }
};

EigenSplit eigen_split(const WeightSpec& w);
/// Throws NotSymmetric.
EigenSplit eigen_split(const Matrix& w);

enum class Phi0Mode {
  Zero,
  /// phi0(F, F0) = trace(F^T F0 W_tilde), whose gradient is the F0 W_tilde source term.
  Quadratic,
};

/// E(F) = 1/2 sum_i <f_i, Omega f_i> - 1/2 sum_ij Ahat_ij <f_i, W f_j> + phi0(F, F0).
/// Throws DimensionMismatch.
double energy_functional(const Graph& g, const Matrix& f, const Matrix& f0, const WeightSpec& w, Phi0Mode mode);

/// Analytic gradient of energy_functional with respect to F.
Matrix energy_gradient(const Graph& g, const Matrix& f, const Matrix& f0, const WeightSpec& w, Phi0Mode mode);

enum class FlowVariant {
  /// dF = -F Omega + Ahat F W - F0 W_tilde
  Full,
  /// dF = Ahat F W
  Simplified,
};

/// Right-hand side of the flow for the given variant.
Matrix flow_velocity(const Matrix& a_hat, const Matrix& f, const Matrix& f0, const WeightSpec& w, FlowVariant variant);

/// One explicit Euler step F + tau * dF with Ahat = D^{-1/2} A D^{-1/2}.
FeatureMatrix gradient_flow_step(const Graph& g, const FeatureMatrix& f, const FeatureMatrix& f0, const WeightSpec& w,
                                 double tau, FlowVariant variant);

struct SimulationOptions {
  double tau = 0.05;
  int steps = 2000;
  FlowVariant variant = FlowVariant::Simplified;
  /// Divide F by ||F|| after every step; the Rayleigh trajectory is unchanged.
  bool renormalize = false;
  Phi0Mode phi0 = Phi0Mode::Zero;
  /// Keep every k-th snapshot (the final one is always kept). 0 keeps only
  /// the first and last.
  int snapshot_stride = 1;
  double divergence_threshold = 1e12;
};

struct Snapshot {
  double t = 0.0;
  Matrix features;
};

struct DynamicsTrace {
  double tau = 0.0;
  std::vector<double> times;  // one entry per step, t = k * tau
  std::vector<double> dirichlet;
  std::vector<double> rayleigh;
  std::vector<double> feature_norm;
  /// Energy functional per step; empty for the simplified variant.
  std::vector<double> energy;
  std::vector<Snapshot> snapshots;

  std::size_t size() const { return times.size(); }
  double final_rayleigh() const { return rayleigh.back(); }
  const Matrix& final_features() const { return snapshots.back().features; }
};

/// Throws Diverged (with the step index) when ||F|| passes the threshold in
/// unnormalized mode, ZeroFeatureNorm for a zero start, InvalidArgument for
/// steps < 1 or tau <= 0.
DynamicsTrace simulate(const Graph& g, const FeatureMatrix& f0, const WeightSpec& w, const SimulationOptions& opts);

enum class Regime { LFD, HFD, Boundary, Undecided };

std::string_view to_string(Regime r);

struct RegimePrediction {
  Regime regime = Regime::Boundary;
  /// |mu_0| (lambda_max - 1) - mu_{d-1}; positive means HFD.
  double margin = 0.0;
  double lambda_max = 0.0;
};

inline constexpr double kRegimeBoundaryTolerance = 1e-9;

RegimePrediction predict_regime(const Graph& g, const WeightSpec& w);
RegimePrediction predict_regime(const SpectralDecomposition& laplacian, const WeightSpec& w);

/// LFD if the final Rayleigh quotient is below eps, HFD if it is within eps of
/// lambda_max, Undecided otherwise.
Regime classify_regime_empirical(const DynamicsTrace& trace, const SpectralDecomposition& laplacian, double eps);

/// Two K_k cliques joined through a path of `path_len` nodes. Nodes 0..k-1 are
/// the first clique, then the path, then the second clique.
Graph barbell_graph(int clique_n, int path_len);

}  // namespace heteroflow::dynamics
