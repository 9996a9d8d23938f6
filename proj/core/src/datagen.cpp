#include "heteroflow/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "heteroflow/error.hpp"

namespace heteroflow::datagen {

namespace {

// Seed streams. Backbones and motifs depend only on their connectivity type, so
// hom-hom and hom-het share the same homophilic backbones.
enum Stream : std::uint64_t {
  kStreamBackboneHom = 11,
  kStreamBackboneHet = 12,
  kStreamMotifHom = 21,
  kStreamMotifHet = 22,
  kStreamRecord = 31,
  kStreamEmbedding = 41,
};

std::uint64_t quadrant_tag(Quadrant q) { return static_cast<std::uint64_t>(q) + 1; }

struct Skeleton {
  Graph graph;
  std::vector<int> labels;
};

Skeleton make_skeleton(int n, bool homophilic, const GenConfig& cfg, Rng& rng, int label_offset) {
  Skeleton s;
  s.graph = random_skeleton(n, cfg.edge_mode, rng);
  s.labels = homophilic ? assign_labels_homophilic(s.graph)
                        : assign_labels_heterophilic(s.graph, cfg.heterophilic_classes, rng);
  for (int& l : s.labels) l += label_offset;
  return s;
}

}  // namespace

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::HomHom: return "hom-hom";
    case Quadrant::HomHet: return "hom-het";
    case Quadrant::HetHom: return "het-hom";
    case Quadrant::HetHet: return "het-het";
  }
  return "?";
}

Quadrant parse_quadrant(std::string_view s) {
  for (Quadrant q : kAllQuadrants) {
    if (to_string(q) == s) return q;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown quadrant '" + std::string(s) + "'");
}

bool backbone_homophilic(Quadrant q) { return q == Quadrant::HomHom || q == Quadrant::HomHet; }
bool motif_homophilic(Quadrant q) { return q == Quadrant::HomHom || q == Quadrant::HetHom; }

std::uint64_t GenConfig::resolved_embedding_seed() const {
  return embedding_seed ? *embedding_seed : derive_seed(seed, kStreamEmbedding);
}

void GenConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (backbone_n_min < 4 || backbone_n_min > backbone_n_max) fail("backbone size range invalid");
  if (motif_n_min < 4 || motif_n_min > motif_n_max) fail("motif size range invalid");
  if (backbone_n_max + motif_n_max > kMaxNodes) fail("combined graph exceeds node cap");
  if (!(noise_sigma > 0.0)) fail("noise_sigma must be > 0");
  if (backbone_count < 1 || motif_variants < 1) fail("counts must be >= 1");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (heterophilic_classes < 2) fail("heterophilic_classes must be >= 2");
  if (motif_label_offset < 0) fail("motif_label_offset must be >= 0");
}

void SyntheticGraphRecord::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ValidationError, m); };
  if (features.rows() != graph.n()) fail("features.n != graph.n");
  if (static_cast<int>(node_labels.size()) != graph.n()) fail("node_labels length != graph.n");
  if ((graph_label == 1) != !motif_nodes.empty()) fail("graph_label disagrees with motif_nodes");
  std::set<int> motif(motif_nodes.begin(), motif_nodes.end());
  for (int v : motif) {
    if (v < 0 || v >= graph.n()) fail("motif node out of range");
  }
  std::set<Edge> boundary(boundary_edges.begin(), boundary_edges.end());
  for (const Edge& e : boundary_edges) {
    if (!graph.has_edge(e.u, e.v)) fail("boundary edge not in graph");
    if (motif.count(e.u) + motif.count(e.v) != 1) fail("boundary edge does not straddle the motif");
  }
  for (const Edge& e : intra_motif_edges) {
    if (!graph.has_edge(e.u, e.v)) fail("intra-motif edge not in graph");
    if (motif.count(e.u) + motif.count(e.v) != 2) fail("intra-motif edge leaves the motif");
    if (boundary.count(e)) fail("boundary and intra-motif edges overlap");
  }
}

Graph random_tree(int n, Rng& rng) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "random_tree needs n >= 2");
  if (n == 2) {
    const Edge e{0, 1};
    return Graph::build(2, std::span<const Edge>(&e, 1));
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> code(static_cast<std::size_t>(n - 2));
  for (int& c : code) c = pick(rng);

  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (int c : code) ++degree[static_cast<std::size_t>(c)];
  std::set<int> leaves;
  for (int i = 0; i < n; ++i) {
    if (degree[static_cast<std::size_t>(i)] == 1) leaves.insert(i);
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (int c : code) {
    const int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    edges.push_back(Edge::canonical(leaf, c));
    if (--degree[static_cast<std::size_t>(c)] == 1) leaves.insert(c);
  }
  const int a = *leaves.begin();
  const int b = *std::next(leaves.begin());
  edges.push_back(Edge::canonical(a, b));
  return Graph::build(n, std::span<const Edge>(edges));
}

int max_edge_target(int n) { return n * (n - 1) / 4; }

Graph densify(const Graph& tree, int target_edges, Rng& rng) {
  const int n = tree.n();
  const int current = static_cast<int>(tree.edge_count());
  if (target_edges < n - 1 || target_edges > max_edge_target(n) || target_edges < current) {
    throw Error(ErrorCode::TargetOutOfRange, "target " + std::to_string(target_edges) + " outside [" +
                                                 std::to_string(n - 1) + "," + std::to_string(max_edge_target(n)) +
                                                 "]");
  }
  std::vector<Edge> candidates;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!tree.has_edge(u, v)) candidates.push_back(Edge{u, v});
    }
  }
  const std::size_t extra = static_cast<std::size_t>(target_edges - current);
  // Partial Fisher-Yates: the first `extra` slots become a uniform sample.
  for (std::size_t i = 0; i < extra; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  EdgeSet edges = tree.edges();
  edges.insert(edges.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(extra));
  return Graph::build(n, std::span<const Edge>(edges));
}

int sample_edge_target(int n, EdgeCountMode mode, Rng& rng) {
  const int hi = std::max(n - 1, max_edge_target(n));
  if (mode == EdgeCountMode::FixedHalf) return hi;
  std::uniform_int_distribution<int> pick(n - 1, hi);
  return pick(rng);
}

Graph random_skeleton(int n, EdgeCountMode mode, Rng& rng) {
  Graph tree = random_tree(n, rng);
  const int target = sample_edge_target(n, mode, rng);
  return densify(tree, target, rng);
}

std::vector<int> assign_labels_homophilic(const Graph& g) {
  const int n = g.n();
  const long long two_m = 2LL * static_cast<long long>(g.edge_count());
  std::vector<int> community(static_cast<std::size_t>(n));
  std::iota(community.begin(), community.end(), 0);
  if (two_m == 0) return community;

  // Community c is identified by its smallest node. between(a, b) counts edges
  // between communities a and b; strength(a) is the degree sum. The modularity
  // gain of merging a and b, scaled by 2m^2, is 2m * between - strength_a * strength_b,
  // so all comparisons are exact integers.
  std::vector<std::map<int, long long>> between(static_cast<std::size_t>(n));
  std::vector<long long> strength(static_cast<std::size_t>(n));
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) strength[static_cast<std::size_t>(i)] = g.degree(i);
  for (const Edge& e : g.edges()) {
    between[static_cast<std::size_t>(e.u)][e.v] += 1;
    between[static_cast<std::size_t>(e.v)][e.u] += 1;
  }

  for (;;) {
    long long best_gain = 0;
    int best_a = -1;
    int best_b = -1;
    for (int a = 0; a < n; ++a) {
      if (!alive[static_cast<std::size_t>(a)]) continue;
      for (const auto& [b, count] : between[static_cast<std::size_t>(a)]) {
        if (b <= a) continue;
        const long long gain =
            count * two_m - strength[static_cast<std::size_t>(a)] * strength[static_cast<std::size_t>(b)];
        if (gain > best_gain) {
          best_gain = gain;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a < 0) break;

    // Merge b into a (a < b keeps the smallest-node id).
    auto& row_a = between[static_cast<std::size_t>(best_a)];
    auto& row_b = between[static_cast<std::size_t>(best_b)];
    for (const auto& [c, count] : row_b) {
      if (c == best_a) continue;
      row_a[c] += count;
      auto& row_c = between[static_cast<std::size_t>(c)];
      row_c[best_a] += count;
      row_c.erase(best_b);
    }
    row_a.erase(best_b);
    row_b.clear();
    strength[static_cast<std::size_t>(best_a)] += strength[static_cast<std::size_t>(best_b)];
    alive[static_cast<std::size_t>(best_b)] = 0;
    for (int& c : community) {
      if (c == best_b) c = best_a;
    }
  }

  std::map<int, int> renumber;
  for (int c : community) renumber.emplace(c, 0);
  int next = 0;
  for (auto& [id, idx] : renumber) idx = next++;
  for (int& c : community) c = renumber[c];
  return community;
}

double modularity(const Graph& g, std::span<const int> labels) {
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  if (two_m == 0.0) return 0.0;
  std::map<int, double> internal;
  std::map<int, double> strength;
  for (const Edge& e : g.edges()) {
    if (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)]) {
      internal[labels[static_cast<std::size_t>(e.u)]] += 2.0;
    }
  }
  for (int i = 0; i < g.n(); ++i) strength[labels[static_cast<std::size_t>(i)]] += g.degree(i);
  double q = 0.0;
  for (const auto& [c, k] : strength) {
    const double in = internal.count(c) ? internal[c] : 0.0;
    q += in / two_m - (k / two_m) * (k / two_m);
  }
  return q;
}

std::vector<int> assign_labels_heterophilic(const Graph& g, int num_classes, Rng& rng) {
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "heterophilic labelling needs >= 2 classes");
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  std::vector<int> labels(static_cast<std::size_t>(g.n()));
  for (int& l : labels) l = pick(rng);
  return labels;
}

Vector class_embedding(std::uint64_t embedding_seed, int label, int d) {
  Rng rng(derive_seed(embedding_seed, static_cast<std::uint64_t>(label)));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(d);
  for (int k = 0; k < d; ++k) e(k) = normal(rng);
  return e;
}

FeatureMatrix features_from_labels(std::span<const int> labels, int d, double sigma, std::uint64_t embedding_seed,
                                   Rng& rng) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "feature dimension must be >= 1");
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  std::map<int, Vector> table;
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix f(static_cast<Eigen::Index>(labels.size()), d);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = table.find(labels[i]);
    if (it == table.end()) it = table.emplace(labels[i], class_embedding(embedding_seed, labels[i], d)).first;
    for (int k = 0; k < d; ++k) {
      f(static_cast<Eigen::Index>(i), k) = it->second(k) + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
    }
  }
  return FeatureMatrix(std::move(f));
}

SyntheticGraphRecord make_plain_record(Graph g, std::vector<int> labels, FeatureMatrix features,
                                       Provenance provenance) {
  SyntheticGraphRecord r;
  r.graph = std::move(g);
  r.node_labels = std::move(labels);
  r.features = std::move(features);
  r.graph_label = 0;
  r.provenance = provenance;
  r.validate();
  return r;
}

SyntheticGraphRecord attach_motif(const SyntheticGraphRecord& backbone, const SyntheticGraphRecord& motif,
                                  Rng& rng) {
  backbone.validate();
  motif.validate();
  if (backbone.features.cols() != motif.features.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "backbone and motif feature widths differ");
  }
  const int nb = backbone.graph.n();
  const int nm = motif.graph.n();

  std::uniform_int_distribution<int> pick_motif(0, nm - 1);
  std::uniform_int_distribution<int> pick_backbone(0, nb - 1);
  const int motif_end = nb + pick_motif(rng);
  const int backbone_end = pick_backbone(rng);
  const Edge bridge = Edge::canonical(backbone_end, motif_end);

  EdgeSet edges = backbone.graph.edges();
  EdgeSet intra;
  for (const Edge& e : motif.graph.edges()) intra.push_back(Edge{e.u + nb, e.v + nb});
  edges.insert(edges.end(), intra.begin(), intra.end());
  edges.push_back(bridge);

  SyntheticGraphRecord out;
  out.graph = Graph::build(nb + nm, std::span<const Edge>(edges));
  Matrix f(nb + nm, backbone.features.cols());
  f.topRows(nb) = backbone.features.values();
  f.bottomRows(nm) = motif.features.values();
  out.features = FeatureMatrix(std::move(f));
  out.node_labels = backbone.node_labels;
  out.node_labels.insert(out.node_labels.end(), motif.node_labels.begin(), motif.node_labels.end());
  out.motif_nodes.resize(static_cast<std::size_t>(nm));
  std::iota(out.motif_nodes.begin(), out.motif_nodes.end(), nb);
  out.boundary_edges = {bridge};
  out.intra_motif_edges = std::move(intra);
  out.graph_label = 1;
  out.provenance = backbone.provenance;
  out.provenance.motif_variant = motif.provenance.motif_variant;
  out.validate();
  return out;
}

std::vector<SyntheticGraphRecord> generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  const bool bb_hom = backbone_homophilic(cfg.quadrant);
  const bool mo_hom = motif_homophilic(cfg.quadrant);
  const std::uint64_t emb_seed = cfg.resolved_embedding_seed();

  std::vector<Skeleton> motifs;
  motifs.reserve(static_cast<std::size_t>(cfg.motif_variants));
  for (int v = 0; v < cfg.motif_variants; ++v) {
    Rng rng = make_rng(cfg.seed, mo_hom ? kStreamMotifHom : kStreamMotifHet, static_cast<std::uint64_t>(v));
    std::uniform_int_distribution<int> size(cfg.motif_n_min, cfg.motif_n_max);
    const int n = size(rng);
    motifs.push_back(make_skeleton(n, mo_hom, cfg, rng, cfg.motif_label_offset));
  }

  std::vector<SyntheticGraphRecord> out;
  out.reserve(static_cast<std::size_t>(2 * cfg.backbone_count * cfg.motif_variants));
  for (int b = 0; b < cfg.backbone_count; ++b) {
    Rng brng = make_rng(cfg.seed, bb_hom ? kStreamBackboneHom : kStreamBackboneHet, static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<int> size(cfg.backbone_n_min, cfg.backbone_n_max);
    const Skeleton backbone = make_skeleton(size(brng), bb_hom, cfg, brng, 0);

    for (int v = 0; v < cfg.motif_variants; ++v) {
      const std::uint64_t pair_index = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(cfg.motif_variants) +
                                       static_cast<std::uint64_t>(v);
      Rng rrng = make_rng(derive_seed(cfg.seed, kStreamRecord, quadrant_tag(cfg.quadrant)), pair_index);
      const Provenance base{cfg.quadrant, b, -1, cfg.seed};
      const auto& motif = motifs[static_cast<std::size_t>(v)];

      auto bb_pos = make_plain_record(
          backbone.graph, backbone.labels,
          features_from_labels(backbone.labels, cfg.feature_dim, cfg.noise_sigma, emb_seed, rrng), base);
      auto mo_rec = make_plain_record(
          motif.graph, motif.labels,
          features_from_labels(motif.labels, cfg.feature_dim, cfg.noise_sigma, emb_seed, rrng),
          Provenance{cfg.quadrant, -1, v, cfg.seed});
      out.push_back(attach_motif(bb_pos, mo_rec, rrng));

      out.push_back(make_plain_record(
          backbone.graph, backbone.labels,
          features_from_labels(backbone.labels, cfg.feature_dim, cfg.noise_sigma, emb_seed, rrng), base));
    }
  }
  return out;
}

std::vector<int> graph_labels_of(std::span<const SyntheticGraphRecord> records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.graph_label);
  return out;
}

SplitIndices split_dataset(std::span<const int> graph_labels, SplitRatios ratios, Rng& rng) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split ratios must be nonnegative and sum to 1");
  }
  const std::size_t n = graph_labels.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.val + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test + 1e-9));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw Error(ErrorCode::EmptySplit, "split of " + std::to_string(n) + " records leaves an empty part");
  }

  // Stratified order: shuffle each class, then key every item by its relative
  // rank inside its class. Any prefix of this order keeps the class mix.
  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[graph_labels[i]].push_back(static_cast<int>(i));
  struct Keyed {
    double key;
    double tie;
    int index;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& [label, members] : by_label) {
    std::shuffle(members.begin(), members.end(), rng);
    const double m = static_cast<double>(members.size());
    for (std::size_t r = 0; r < members.size(); ++r) {
      keyed.push_back({(static_cast<double>(r) + 0.5) / m, unit(rng), members[r]});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.tie < b.tie;
  });

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) {
    const int idx = keyed[i].index;
    if (i < n_test) {
      out.test.push_back(idx);
    } else if (i < n_test + n_val) {
      out.val.push_back(idx);
    } else {
      out.train.push_back(idx);
    }
  }
  return out;
}

SplitIndices split_dataset(std::span<const SyntheticGraphRecord> records, SplitRatios ratios, Rng& rng) {
  const auto labels = graph_labels_of(records);
  return split_dataset(std::span<const int>(labels), ratios, rng);
}

}  // namespace heteroflow::datagen
