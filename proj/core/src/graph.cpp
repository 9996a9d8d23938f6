#include "heteroflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "heteroflow/error.hpp"

namespace heteroflow {

namespace {

std::string edge_str(int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }

bool is_connected(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

void require_rows(const Graph& g, const Matrix& f) {
  if (f.rows() != g.n()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows " + std::to_string(f.rows()) +
                                                  " != node count " + std::to_string(g.n()));
  }
}

std::vector<double> inv_sqrt_degrees(const Graph& g) {
  std::vector<double> out(static_cast<std::size_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) {
    if (g.degree(i) == 0) throw Error(ErrorCode::Disconnected, "node " + std::to_string(i) + " is isolated");
    out[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));
  }
  return out;
}

double edge_term(const Matrix& f, const std::vector<double>& s, const Edge& e) {
  return (f.row(e.u) * s[static_cast<std::size_t>(e.u)] - f.row(e.v) * s[static_cast<std::size_t>(e.v)])
      .squaredNorm();
}

}  // namespace

Graph Graph::build(int n, std::span<const std::pair<int, int>> edges, Connectivity connectivity) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (auto [a, b] : edges) es.push_back(Edge{a, b});
  return build(n, std::span<const Edge>(es), connectivity);
}

Graph Graph::build(int n, std::span<const Edge> edges, Connectivity connectivity) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "graph needs at least one node");
  if (n > kMaxNodes) {
    throw Error(ErrorCode::TooLarge, std::to_string(n) + " nodes exceeds cap " + std::to_string(kMaxNodes));
  }
  Graph g;
  g.n_ = n;
  g.edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "edge " + edge_str(e.u, e.v) + " outside [0," + std::to_string(n) + ")");
    }
    if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "edge " + edge_str(e.u, e.v));
    g.edges_.push_back(Edge::canonical(e.u, e.v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end()); dup != g.edges_.end()) {
    throw Error(ErrorCode::DuplicateEdge, "edge " + edge_str(dup->u, dup->v));
  }
  g.degrees_.assign(static_cast<std::size_t>(n), 0);
  g.adjacency_.assign(static_cast<std::size_t>(n), {});
  for (const Edge& e : g.edges_) {
    ++g.degrees_[static_cast<std::size_t>(e.u)];
    ++g.degrees_[static_cast<std::size_t>(e.v)];
    g.adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
    g.adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
  if (connectivity == Connectivity::Required && !is_connected(n, g.adjacency_)) {
    throw Error(ErrorCode::Disconnected, "graph on " + std::to_string(n) + " nodes is not connected");
  }
  return g;
}

bool Graph::has_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_ || a == b) return false;
  const auto& nb = adjacency_[static_cast<std::size_t>(a)];
  return std::binary_search(nb.begin(), nb.end(), b);
}

bool Graph::connected() const { return is_connected(n_, adjacency_); }

Matrix Graph::adjacency() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (const Edge& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Graph Graph::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) {
    throw Error(ErrorCode::DimensionMismatch, "permutation length differs from node count");
  }
  std::vector<Edge> es;
  es.reserve(edges_.size());
  for (const Edge& e : edges_) {
    es.push_back(Edge{perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)]});
  }
  return build(n_, std::span<const Edge>(es), connected() ? Connectivity::Required : Connectivity::Relaxed);
}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "feature width must be >= 1");
  if (!values_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "feature matrix has non-finite entries");
}

Matrix normalized_adjacency(const Graph& g) {
  const auto s = inv_sqrt_degrees(g);
  Matrix a = Matrix::Zero(g.n(), g.n());
  for (const Edge& e : g.edges()) {
    const double w = s[static_cast<std::size_t>(e.u)] * s[static_cast<std::size_t>(e.v)];
    a(e.u, e.v) = w;
    a(e.v, e.u) = w;
  }
  return a;
}

Matrix normalized_laplacian(const Graph& g) {
  Matrix l = -normalized_adjacency(g);
  l.diagonal().setOnes();
  return l;
}

Matrix self_loop_normalized_adjacency(const Graph& g) {
  Matrix a = g.adjacency();
  a.diagonal().setOnes();
  Vector s(g.n());
  for (int i = 0; i < g.n(); ++i) s(i) = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  return s.asDiagonal() * a * s.asDiagonal();
}

SpectralDecomposition symmetric_eigendecomposition(const Matrix& m, const EigenOptions& opts) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  const int n = static_cast<int>(m.rows());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tolerance) {
    throw Error(ErrorCode::NotSymmetric, "max |M - M^T| exceeds tolerance");
  }
  Matrix a = 0.5 * (m + m.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const long long max_sweeps = static_cast<long long>(opts.sweep_factor) * n * n;

  auto off_max = [&] {
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) worst = std::max(worst, std::abs(a(i, j)));
    return worst;
  };

  long long sweep = 0;
  for (; off_max() > opts.offdiag_tolerance * scale; ++sweep) {
    if (sweep >= max_sweeps) {
      throw Error(ErrorCode::NoConvergence, "Jacobi sweeps exceeded " + std::to_string(max_sweeps));
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    Vector col = v.col(src);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0) col = -col;
    out.eigenvectors.col(k) = col;
  }
  return out;
}

SpectralDecomposition laplacian_spectrum(const Graph& g) {
  auto s = symmetric_eigendecomposition(normalized_laplacian(g));
  s.op = SpectralOperator::NormalizedLaplacian;
  return s;
}

double dirichlet_energy(const Graph& g, const Matrix& f) {
  require_rows(g, f);
  const auto s = inv_sqrt_degrees(g);
  double total = 0.0;
  for (const Edge& e : g.edges()) total += edge_term(f, s, e);
  return total;
}

double dirichlet_energy(const Graph& g, const FeatureMatrix& f) { return dirichlet_energy(g, f.values()); }

double rayleigh_quotient(const Graph& g, const Matrix& f) {
  const double norm2 = f.squaredNorm();
  if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroFeatureNorm, "Rayleigh quotient of a zero feature matrix");
  return dirichlet_energy(g, f) / norm2;
}

double rayleigh_quotient(const Graph& g, const FeatureMatrix& f) { return rayleigh_quotient(g, f.values()); }

double edge_subset_dirichlet_energy(const Graph& g, const Matrix& f, std::span<const Edge> subset) {
  require_rows(g, f);
  const auto s = inv_sqrt_degrees(g);
  double total = 0.0;
  for (const Edge& raw : subset) {
    const Edge e = Edge::canonical(raw.u, raw.v);
    if (!g.has_edge(e.u, e.v)) throw Error(ErrorCode::EdgeNotInGraph, edge_str(e.u, e.v));
    total += edge_term(f, s, e);
  }
  return total;
}

double edge_subset_dirichlet_energy(const Graph& g, const FeatureMatrix& f, std::span<const Edge> subset) {
  return edge_subset_dirichlet_energy(g, f.values(), subset);
}

double edge_homophily(const Graph& g, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != g.n()) throw Error(ErrorCode::DimensionMismatch, "label count != node count");
  if (g.edge_count() == 0) return 0.0;
  std::size_t same = 0;
  for (const Edge& e : g.edges()) {
    if (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.edge_count());
}

}  // namespace heteroflow
