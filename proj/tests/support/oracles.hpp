#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// None of them share code with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "heteroflow/graph.hpp"
#include "heteroflow/models.hpp"

namespace oracle {

using heteroflow::Edge;
using heteroflow::Graph;
using heteroflow::Matrix;

/// Node labels by enumerating every |V_M|-subset of host nodes and every
/// bijection from pattern nodes onto it.
inline std::vector<int> brute_force_node_labels(const Graph& host, const Graph& pattern) {
  const int n = host.n();
  const int k = pattern.n();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  if (k > n) return labels;
  std::vector<char> pick(static_cast<std::size_t>(n), 0);
  std::fill(pick.begin(), pick.begin() + k, 1);
  do {
    std::vector<int> subset;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) subset.push_back(i);
    bool hit = false;
    std::vector<int> perm = subset;
    std::sort(perm.begin(), perm.end());
    do {
      bool ok = true;
      for (const Edge& e : pattern.edges()) {
        if (!host.has_edge(perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)])) {
          ok = false;
          break;
        }
      }
      if (ok) {
        hit = true;
        break;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (hit)
      for (int v : subset) labels[static_cast<std::size_t>(v)] = 1;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return labels;
}

namespace detail {

inline int pair_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::uint32_t canonical_mask(std::uint32_t mask, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::uint32_t best = ~0u;
  do {
    std::uint32_t m = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (mask >> pair_index(i, j, n) & 1u) m |= 1u << pair_index(perm[i], perm[j], n);
    best = std::min(best, m);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Graph mask_graph(std::uint32_t mask, int n) {
  std::vector<Edge> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (mask >> pair_index(i, j, n) & 1u) es.push_back(Edge{i, j});
  return Graph::build(n, std::span<const Edge>(es), Graph::Connectivity::Relaxed);
}

inline std::uint32_t extend(std::uint32_t mask, int n, std::uint32_t neighbours) {
  // Re-index the n-node mask into the (n+1)-node layout and add the new vertex n.
  std::uint32_t out = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (mask >> pair_index(i, j, n) & 1u) out |= 1u << pair_index(i, j, n + 1);
  for (int i = 0; i < n; ++i)
    if (neighbours >> i & 1u) out |= 1u << pair_index(i, n, n + 1);
  return out;
}

}  // namespace detail

/// Graphs on n nodes containing at least one member of every isomorphism
/// class (connected or not). Classes are deduplicated up to n = 7; for n = 8
/// every 7-node class is extended by one vertex in all 2^7 ways.
inline std::vector<Graph> graphs_covering_all_classes(int n) {
  std::set<std::uint32_t> level{0u};  // one node, no edges
  for (int m = 1; m < n; ++m) {
    std::set<std::uint32_t> next;
    const bool dedupe = m + 1 <= 7;
    for (std::uint32_t mask : level) {
      for (std::uint32_t nb = 0; nb < (1u << m); ++nb) {
        const std::uint32_t e = detail::extend(mask, m, nb);
        next.insert(dedupe ? detail::canonical_mask(e, m + 1) : e);
      }
    }
    level = std::move(next);
  }
  std::vector<Graph> out;
  out.reserve(level.size());
  for (std::uint32_t mask : level) out.push_back(detail::mask_graph(mask, n));
  return out;
}

/// Eq. 3 with explicit loops over every (i, i'), (j, j') and (i, j) pair.
inline double naive_mmd2(const Matrix& h, const Matrix& g, double sigma) {
  auto k = [&](const auto& x, const auto& y) {
    double d2 = 0.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) d2 += (x(c) - y(c)) * (x(c) - y(c));
    return std::exp(-d2 / (2.0 * sigma * sigma));
  };
  const auto p = static_cast<double>(h.rows());
  const auto q = static_cast<double>(g.rows());
  double hh = 0.0;
  double gg = 0.0;
  double hg = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.rows(); ++j) hh += k(h.row(i), h.row(j));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.rows(); ++j) gg += k(g.row(i), g.row(j));
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < g.rows(); ++j) hg += k(h.row(i), g.row(j));
  return hh / (p * p) + gg / (q * q) - 2.0 * hg / (p * q);
}

struct GradCheck {
  int coordinates = 0;
  int failures = 0;
  /// Coordinates replaced because a ReLU kink lies inside the stencil.
  int kinks = 0;
  double worst = 0.0;
};

/// Central differences with step h on `count` random coordinates. Relative
/// error |a - n| / max(|a|, |n|, floor) must stay within `tol`.
///
/// Central differences are only meaningful where the loss is smooth across
/// [x - h, x + h]. When the estimates at h and h/10 disagree by more than
/// `tol`, a ReLU pre-activation changed sign inside the stencil; that
/// coordinate is replaced by the next one in the shuffled order.
inline GradCheck finite_difference_check(const heteroflow::models::ModelParams& params,
                                         const heteroflow::models::GraphBatch& batch,
                                         heteroflow::models::LossKind kind, int count, std::uint64_t seed,
                                         double tol = 1e-5, double h = 1e-5, double floor = 1e-6) {
  using namespace heteroflow::models;
  const auto analytic = grad(params, batch, kind).grads;
  std::mt19937_64 rng(seed);
  GradCheck out;
  const auto& tensors = params.tensors();
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t t = 0; t < tensors.size(); ++t)
    for (Eigen::Index i = 0; i < tensors[t].value.size(); ++i) coords.emplace_back(t, i);
  std::shuffle(coords.begin(), coords.end(), rng);
  for (std::size_t c = 0; c < coords.size() && out.coordinates < count; ++c) {
    const auto [t, i] = coords[c];
    auto eval = [&](double delta) {
      ModelParams p = params;
      p.tensors()[t].value.data()[i] += delta;
      // The symmetric gf_gcn weight is perturbed as stored; the loss is a
      // function of the raw entries, so the raw gradient is what is compared.
      return loss(forward(p, batch).predictions, batch.targets, kind);
    };
    const double numeric = (eval(h) - eval(-h)) / (2.0 * h);
    const double fine = (eval(h / 10) - eval(-h / 10)) / (h / 5);
    if (std::abs(numeric - fine) / std::max({std::abs(numeric), std::abs(fine), floor}) > tol) {
      ++out.kinks;
      continue;
    }
    const double a = analytic[t].data()[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    out.worst = std::max(out.worst, rel);
    ++out.coordinates;
    if (rel > tol) ++out.failures;
  }
  return out;
}

}  // namespace oracle
