#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heteroflow/graph.hpp"
#include "heteroflow/rng.hpp"

namespace heteroflow::datagen {

/// Backbone / motif connectivity pattern.
enum class Quadrant { HomHom, HomHet, HetHom, HetHet };

inline constexpr Quadrant kAllQuadrants[] = {Quadrant::HomHom, Quadrant::HomHet, Quadrant::HetHom,
                                             Quadrant::HetHet};

std::string_view to_string(Quadrant q);
Quadrant parse_quadrant(std::string_view s);
bool backbone_homophilic(Quadrant q);
bool motif_homophilic(Quadrant q);

enum class EdgeCountMode {
  /// Edge count drawn uniformly from [n-1, n(n-1)/4] per graph.
  Sampled,
  /// Always n(n-1)/4.
  FixedHalf,
};

struct GenConfig {
  std::uint64_t seed = 0;
  int backbone_n_min = 20;
  int backbone_n_max = 50;
  int motif_n_min = 5;
  int motif_n_max = 7;
  double noise_sigma = 0.05;
  int backbone_count = 1000;
  int motif_variants = 5;
  int feature_dim = 8;
  int heterophilic_classes = 3;
  /// Motif node classes are shifted by this amount so motif nodes draw from
  /// their own rows of the embedding table.
  int motif_label_offset = 100;
  EdgeCountMode edge_mode = EdgeCountMode::Sampled;
  Quadrant quadrant = Quadrant::HomHom;
  /// Defaults to a value derived from `seed`.
  std::optional<std::uint64_t> embedding_seed;

  std::uint64_t resolved_embedding_seed() const;
  /// Throws InvalidConfig.
  void validate() const;
};

struct Provenance {
  Quadrant quadrant = Quadrant::HomHom;
  int backbone_id = -1;
  /// -1 when no motif is attached.
  int motif_variant = -1;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SyntheticGraphRecord {
  Graph graph;
  FeatureMatrix features;
  std::vector<int> node_labels;
  std::vector<int> motif_nodes;  // sorted
  EdgeSet boundary_edges;
  EdgeSet intra_motif_edges;
  int graph_label = 0;
  Provenance provenance;
  /// Regression target, present for ingested regression data.
  std::optional<double> target;

  /// Throws ValidationError when a record invariant is broken.
  void validate() const;

  friend bool operator==(const SyntheticGraphRecord&, const SyntheticGraphRecord&) = default;
};

/// Uniform labeled tree via a Pruefer sequence. n >= 2.
Graph random_tree(int n, Rng& rng);

/// Largest edge count densify accepts: n(n-1)/4, rounded down.
int max_edge_target(int n);

/// Adds uniformly chosen non-edges until the graph has `target_edges` edges.
/// Throws TargetOutOfRange unless n-1 <= target_edges <= n(n-1)/4.
Graph densify(const Graph& tree, int target_edges, Rng& rng);

int sample_edge_target(int n, EdgeCountMode mode, Rng& rng);

/// random_tree + densify.
Graph random_skeleton(int n, EdgeCountMode mode, Rng& rng);

/// Clauset-Newman-Moore greedy modularity communities. Communities are
/// numbered by their smallest node.
std::vector<int> assign_labels_homophilic(const Graph& g);

/// Modularity of a partition (labels are community ids).
double modularity(const Graph& g, std::span<const int> labels);

/// I.i.d. uniform classes. Throws InvalidArgument if num_classes < 2.
std::vector<int> assign_labels_heterophilic(const Graph& g, int num_classes, Rng& rng);

/// Row `label` of the frozen class-embedding table, N(0, I_d).
Vector class_embedding(std::uint64_t embedding_seed, int label, int d);

/// f_i = e(label_i) + N(0, sigma^2 I).
FeatureMatrix features_from_labels(std::span<const int> labels, int d, double sigma,
                                   std::uint64_t embedding_seed, Rng& rng);

/// Motif-free record wrapping a graph and its labelled features.
SyntheticGraphRecord make_plain_record(Graph g, std::vector<int> labels, FeatureMatrix features,
                                       Provenance provenance);

/// Disjoint union plus one bridge between a uniform motif node and a uniform
/// backbone node. Motif nodes are appended after the backbone's nodes.
SyntheticGraphRecord attach_motif(const SyntheticGraphRecord& backbone, const SyntheticGraphRecord& motif,
                                  Rng& rng);

/// backbone_count * motif_variants motif graphs (label 1) followed pairwise by
/// as many motif-free backbones (label 0), for cfg.quadrant.
std::vector<SyntheticGraphRecord> generate_dataset(const GenConfig& cfg);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Stratified by graph_label. val and test sizes are floor(N * ratio), the
/// remainder goes to train. Throws EmptySplit or InvalidArgument.
SplitIndices split_dataset(std::span<const int> graph_labels, SplitRatios ratios, Rng& rng);
SplitIndices split_dataset(std::span<const SyntheticGraphRecord> records, SplitRatios ratios, Rng& rng);

std::vector<int> graph_labels_of(std::span<const SyntheticGraphRecord> records);

}  // namespace heteroflow::datagen
