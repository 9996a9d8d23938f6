#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "heteroflow/graph.hpp"

namespace heteroflow::metrics {

/// exp(-||x - y||^2 / (2 sigma^2)). Throws NonpositiveBandwidth.
double rbf_kernel(const Vector& x, const Vector& y, double sigma);

/// Median pairwise Euclidean distance over the rows of `samples`; 1.0 when the
/// median is zero. Throws TooFewSamples for fewer than two rows.
double median_bandwidth(const Matrix& samples);

/// Pools the rows of both sample sets before taking the median.
double median_bandwidth(const Matrix& h, const Matrix& g);

struct MMDResult {
  double mmd2 = 0.0;
  int p = 0;
  int q = 0;
  double bandwidth = 1.0;
};

/// Biased (V-statistic) squared MMD with an RBF kernel; rows are samples,
/// diagonal kernel terms included. Throws EmptySample, DimensionMismatch or
/// NonpositiveBandwidth.
MMDResult mmd2(const Matrix& h, const Matrix& g, double sigma);

/// Normalized subset Dirichlet energy at F(T) over the same quantity at F(0).
/// Throws ZeroInitialSubsetEnergy or ZeroNorm.
double shrink_ratio(const Graph& g, const Matrix& f0, const Matrix& ft, std::span<const Edge> subset);

struct ShrinkReport {
  /// Category name -> ratio; categories whose initial energy is zero are
  /// listed in `undefined` instead.
  std::map<std::string, double> ratios;
  std::map<std::string, std::string> undefined;
};

/// Share of ||F||^2 carried by each eigenvector: ||phi_k^T F||^2 / ||F||^2.
/// Throws ZeroNorm or DimensionMismatch.
Vector frequency_profile(const SpectralDecomposition& spectrum, const Matrix& f);

}  // namespace heteroflow::metrics
