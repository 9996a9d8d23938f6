#include "heteroflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "heteroflow/error.hpp"

namespace heteroflow::metrics {

double rbf_kernel(const Vector& x, const Vector& y, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "RBF bandwidth must be > 0");
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in length");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

double median_bandwidth(const Matrix& samples) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "median heuristic needs at least two samples");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((samples.row(i) - samples.row(j)).norm());
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

double median_bandwidth(const Matrix& h, const Matrix& g) {
  if (h.cols() != g.cols()) throw Error(ErrorCode::DimensionMismatch, "sample widths differ");
  Matrix pooled(h.rows() + g.rows(), h.cols());
  pooled << h, g;
  return median_bandwidth(pooled);
}

MMDResult mmd2(const Matrix& h, const Matrix& g, double sigma) {
  if (h.rows() < 1 || g.rows() < 1) throw Error(ErrorCode::EmptySample, "MMD needs non-empty samples");
  if (h.cols() != g.cols()) throw Error(ErrorCode::DimensionMismatch, "sample widths differ");
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "RBF bandwidth must be > 0");
  const double scale = 1.0 / (2.0 * sigma * sigma);

  // Fixed index order for every sum so the value never depends on scheduling.
  auto block_sum = [scale](const Matrix& x, const Matrix& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < y.rows(); ++j) row += std::exp(-(x.row(i) - y.row(j)).squaredNorm() * scale);
      total += row;
    }
    return total;
  };

  const double p = static_cast<double>(h.rows());
  const double q = static_cast<double>(g.rows());
  MMDResult r;
  r.p = static_cast<int>(h.rows());
  r.q = static_cast<int>(g.rows());
  r.bandwidth = sigma;
  r.mmd2 = block_sum(h, h) / (p * p) + block_sum(g, g) / (q * q) - 2.0 * block_sum(h, g) / (p * q);
  return r;
}

double shrink_ratio(const Graph& g, const Matrix& f0, const Matrix& ft, std::span<const Edge> subset) {
  const double n0 = f0.squaredNorm();
  const double nt = ft.squaredNorm();
  if (!(n0 > 0.0) || !(nt > 0.0)) throw Error(ErrorCode::ZeroNorm, "shrink ratio of a zero feature matrix");
  const double e0 = edge_subset_dirichlet_energy(g, f0, subset);
  if (!(e0 > 0.0)) throw Error(ErrorCode::ZeroInitialSubsetEnergy, "initial subset energy is zero");
  const double et = edge_subset_dirichlet_energy(g, ft, subset);
  return (et / nt) / (e0 / n0);
}

Vector frequency_profile(const SpectralDecomposition& spectrum, const Matrix& f) {
  if (f.rows() != spectrum.eigenvectors.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows differ from spectrum size");
  }
  const double norm2 = f.squaredNorm();
  if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroNorm, "frequency profile of a zero feature matrix");
  const Matrix coeffs = spectrum.eigenvectors.transpose() * f;
  return coeffs.rowwise().squaredNorm() / norm2;
}

}  // namespace heteroflow::metrics
