#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace heteroflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected edge in canonical form (u < v).
struct Edge {
  int u = 0;
  int v = 0;

  static Edge canonical(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeSet = std::vector<Edge>;

/// Largest graph accepted; all operators are dense.
inline constexpr int kMaxNodes = 200;

/// Undirected simple graph. Validated at construction and immutable afterwards.
///
/// Edges are kept sorted in canonical order, so two graphs built from the same
/// edge multiset in any order compare equal.
class Graph {
 public:
  enum class Connectivity {
    Required,
    /// Allows isolated nodes and several components. Only the motif search
    /// accepts such graphs; the spectral operators reject them.
    Relaxed,
  };

  Graph() = default;

  /// Throws Error with SelfLoop, DuplicateEdge, Disconnected, IndexOutOfRange
  /// or TooLarge.
  static Graph build(int n, std::span<const std::pair<int, int>> edges,
                     Connectivity connectivity = Connectivity::Required);
  static Graph build(int n, std::span<const Edge> edges,
                     Connectivity connectivity = Connectivity::Required);

  int n() const noexcept { return n_; }
  const EdgeSet& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<int>& degrees() const noexcept { return degrees_; }
  int degree(int i) const { return degrees_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }

  bool has_edge(int a, int b) const;
  bool connected() const;

  /// Dense 0/1 adjacency matrix.
  Matrix adjacency() const;

  /// Graph with node i renamed to perm[i].
  Graph relabeled(std::span<const int> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  int n_ = 0;
  EdgeSet edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> adjacency_;  // sorted neighbor lists
};

/// n x d node-feature matrix; all entries finite, d >= 1.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix values);

  static FeatureMatrix zeros(int n, int d) { return FeatureMatrix(Matrix::Zero(n, d)); }

  int rows() const noexcept { return static_cast<int>(values_.rows()); }
  int cols() const noexcept { return static_cast<int>(values_.cols()); }
  const Matrix& values() const noexcept { return values_; }
  double norm() const { return values_.norm(); }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) { return a.values_ == b.values_; }

 private:
  Matrix values_;
};

enum class SpectralOperator { NormalizedLaplacian, NormalizedAdjacency, Generic };

struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns, orthonormal
  SpectralOperator op = SpectralOperator::Generic;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double min() const { return eigenvalues(0); }
  double max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Delta = I - D^{-1/2} A D^{-1/2}.
Matrix normalized_laplacian(const Graph& g);

/// A_hat = D^{-1/2} A D^{-1/2}, no self loops.
Matrix normalized_adjacency(const Graph& g);

/// D~^{-1/2} (A + I) D~^{-1/2}.
Matrix self_loop_normalized_adjacency(const Graph& g);

struct EigenOptions {
  double symmetry_tolerance = 1e-12;
  double offdiag_tolerance = 1e-12;
  /// Sweep cap is this factor times n^2.
  int sweep_factor = 100;
};

/// Cyclic Jacobi eigensolver. Eigenvalues ascending, eigenvectors sign-normalized
/// so the largest-magnitude entry of each column is positive.
/// Throws NotSymmetric or NoConvergence.
SpectralDecomposition symmetric_eigendecomposition(const Matrix& m, const EigenOptions& opts = {});

/// Eigendecomposition of the normalized Laplacian of g.
SpectralDecomposition laplacian_spectrum(const Graph& g);

/// Sum over undirected edges of ||f_i/sqrt(d_i) - f_j/sqrt(d_j)||^2, equal to trace(F^T Delta F).
double dirichlet_energy(const Graph& g, const FeatureMatrix& f);
double dirichlet_energy(const Graph& g, const Matrix& f);

/// E_Dir(F) / ||F||^2. Throws ZeroFeatureNorm.
double rayleigh_quotient(const Graph& g, const FeatureMatrix& f);
double rayleigh_quotient(const Graph& g, const Matrix& f);

/// Dirichlet sum restricted to `subset`. Throws EdgeNotInGraph.
double edge_subset_dirichlet_energy(const Graph& g, const FeatureMatrix& f, std::span<const Edge> subset);
double edge_subset_dirichlet_energy(const Graph& g, const Matrix& f, std::span<const Edge> subset);

/// Fraction of edges whose endpoints carry the same label.
double edge_homophily(const Graph& g, std::span<const int> labels);

}  // namespace heteroflow
