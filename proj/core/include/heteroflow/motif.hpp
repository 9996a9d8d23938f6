#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "heteroflow/graph.hpp"

namespace heteroflow::motif {

inline constexpr int kMaxMotifNodes = 8;

/// Connected pattern graph with 2..8 nodes.
class Motif {
 public:
  /// Throws InvalidArgument if the pattern is too small or too large.
  explicit Motif(Graph pattern, std::string id = {});

  const Graph& pattern() const noexcept { return pattern_; }
  const std::string& id() const noexcept { return id_; }
  int size() const noexcept { return pattern_.n(); }

  static Motif triangle();
  static Motif path(int nodes);
  static Motif cycle(int nodes);
  static Motif clique(int nodes);
  static Motif star(int leaves);

 private:
  Graph pattern_;
  std::string id_;
};

/// Injective map pattern node -> host node; entry k is the image of pattern node k.
using Embedding = std::vector<int>;

/// Non-induced subgraph embeddings: every motif edge maps onto a host edge,
/// extra host edges among the image are allowed. Without a limit every
/// embedding is returned, including automorphic duplicates.
std::vector<Embedding> find_embeddings(const Graph& host, const Motif& m, std::optional<std::size_t> limit = {});

/// Visits embeddings until the visitor returns false.
void for_each_embedding(const Graph& host, const Motif& m, const std::function<bool(const Embedding&)>& visit);

/// y_i = 1 iff node i lies in the image of some embedding.
std::vector<int> node_level_labels(const Graph& host, const Motif& m);

/// Early-exit search for one embedding.
bool graph_contains_motif(const Graph& host, const Motif& m);

/// Same verdict derived from the node labelling, ||y||_0 > 0.
bool graph_contains_motif_from_labels(std::span<const int> node_labels);

struct EdgePartition {
  EdgeSet boundary;  // exactly one endpoint inside
  EdgeSet intra;     // both endpoints inside
};

/// Throws IndexOutOfRange if a node lies outside the graph.
EdgePartition boundary_and_intra_edges(const Graph& g, std::span<const int> motif_nodes);

}  // namespace heteroflow::motif
