#include "heteroflow/motif.hpp"

#include <algorithm>
#include <numeric>

#include "heteroflow/error.hpp"

namespace heteroflow::motif {

namespace {

Graph from_pairs(int n, const std::vector<std::pair<int, int>>& e) {
  return Graph::build(n, std::span<const std::pair<int, int>>(e));
}

// Expansion order: `first` (or the highest-degree node), then repeatedly the
// unmatched pattern node with the most already-ordered neighbours.
std::vector<int> expansion_order(const Graph& p, std::optional<int> first) {
  const int n = p.n();
  std::vector<int> order;
  std::vector<char> placed(static_cast<std::size_t>(n), 0);
  std::vector<int> matched_nbrs(static_cast<std::size_t>(n), 0);
  auto place = [&](int v) {
    order.push_back(v);
    placed[static_cast<std::size_t>(v)] = 1;
    for (int w : p.neighbors(v)) ++matched_nbrs[static_cast<std::size_t>(w)];
  };
  if (first) {
    place(*first);
  }
  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (placed[static_cast<std::size_t>(v)]) continue;
      if (best < 0) {
        best = v;
        continue;
      }
      const int mv = matched_nbrs[static_cast<std::size_t>(v)];
      const int mb = matched_nbrs[static_cast<std::size_t>(best)];
      if (mv > mb || (mv == mb && p.degree(v) > p.degree(best))) best = v;
    }
    place(best);
  }
  return order;
}

class Matcher {
 public:
  Matcher(const Graph& host, const Graph& pattern, std::optional<std::pair<int, int>> pin)
      : host_(host), pattern_(pattern), pin_(pin) {
    order_ = expansion_order(pattern, pin ? std::optional<int>(pin->first) : std::nullopt);
    map_.assign(static_cast<std::size_t>(pattern.n()), -1);
    used_.assign(static_cast<std::size_t>(host.n()), 0);
    by_degree_.resize(static_cast<std::size_t>(host.n()));
    std::iota(by_degree_.begin(), by_degree_.end(), 0);
    std::stable_sort(by_degree_.begin(), by_degree_.end(),
                     [&](int a, int b) { return host.degree(a) > host.degree(b); });
    // For each step, one previously placed pattern neighbour (if any) whose
    // image restricts the candidate set.
    anchor_.assign(order_.size(), -1);
    std::vector<int> position(static_cast<std::size_t>(pattern.n()), -1);
    for (std::size_t k = 0; k < order_.size(); ++k) {
      position[static_cast<std::size_t>(order_[k])] = static_cast<int>(k);
      for (int w : pattern.neighbors(order_[k])) {
        const int pos = position[static_cast<std::size_t>(w)];
        if (pos >= 0 && pos < static_cast<int>(k)) {
          anchor_[k] = w;
          break;
        }
      }
    }
  }

  void run(const std::function<bool(const Embedding&)>& visit) {
    if (pattern_.n() > host_.n()) return;
    visit_ = &visit;
    stopped_ = false;
    extend(0);
  }

 private:
  bool feasible(int p, int h) const {
    if (used_[static_cast<std::size_t>(h)]) return false;
    if (host_.degree(h) < pattern_.degree(p)) return false;
    for (int q : pattern_.neighbors(p)) {
      const int img = map_[static_cast<std::size_t>(q)];
      if (img >= 0 && !host_.has_edge(img, h)) return false;
    }
    return true;
  }

  void assign_and_recurse(std::size_t k, int p, int h) {
    map_[static_cast<std::size_t>(p)] = h;
    used_[static_cast<std::size_t>(h)] = 1;
    extend(k + 1);
    used_[static_cast<std::size_t>(h)] = 0;
    map_[static_cast<std::size_t>(p)] = -1;
  }

  void extend(std::size_t k) {
    if (stopped_) return;
    if (k == order_.size()) {
      if (!(*visit_)(map_)) stopped_ = true;
      return;
    }
    const int p = order_[k];
    if (k == 0 && pin_) {
      if (feasible(p, pin_->second)) assign_and_recurse(k, p, pin_->second);
      return;
    }
    const int anchor = anchor_[k];
    if (anchor >= 0) {
      for (int h : host_.neighbors(map_[static_cast<std::size_t>(anchor)])) {
        if (stopped_) return;
        if (feasible(p, h)) assign_and_recurse(k, p, h);
      }
    } else {
      for (int h : by_degree_) {
        if (stopped_) return;
        if (feasible(p, h)) assign_and_recurse(k, p, h);
      }
    }
  }

  const Graph& host_;
  const Graph& pattern_;
  std::optional<std::pair<int, int>> pin_;
  std::vector<int> order_;
  std::vector<int> anchor_;
  std::vector<int> by_degree_;
  Embedding map_;
  std::vector<char> used_;
  const std::function<bool(const Embedding&)>* visit_ = nullptr;
  bool stopped_ = false;
};

}  // namespace

Motif::Motif(Graph pattern, std::string id) : pattern_(std::move(pattern)), id_(std::move(id)) {
  if (pattern_.n() < 2 || pattern_.n() > kMaxMotifNodes) {
    throw Error(ErrorCode::InvalidArgument, "motif size must be in [2," + std::to_string(kMaxMotifNodes) + "]");
  }
  if (!pattern_.connected()) throw Error(ErrorCode::Disconnected, "motif pattern must be connected");
}

Motif Motif::triangle() { return Motif(from_pairs(3, {{0, 1}, {1, 2}, {0, 2}}), "triangle"); }

Motif Motif::path(int nodes) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < nodes; ++i) e.emplace_back(i, i + 1);
  return Motif(from_pairs(nodes, e), "path" + std::to_string(nodes));
}

Motif Motif::cycle(int nodes) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < nodes; ++i) e.emplace_back(i, (i + 1) % nodes);
  return Motif(from_pairs(nodes, e), "cycle" + std::to_string(nodes));
}

Motif Motif::clique(int nodes) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j) e.emplace_back(i, j);
  return Motif(from_pairs(nodes, e), "clique" + std::to_string(nodes));
}

Motif Motif::star(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Motif(from_pairs(leaves + 1, e), "star" + std::to_string(leaves));
}

void for_each_embedding(const Graph& host, const Motif& m, const std::function<bool(const Embedding&)>& visit) {
  Matcher(host, m.pattern(), std::nullopt).run(visit);
}

std::vector<Embedding> find_embeddings(const Graph& host, const Motif& m, std::optional<std::size_t> limit) {
  std::vector<Embedding> out;
  if (limit && *limit == 0) return out;
  for_each_embedding(host, m, [&](const Embedding& e) {
    out.push_back(e);
    return !(limit && out.size() >= *limit);
  });
  return out;
}

std::vector<int> node_level_labels(const Graph& host, const Motif& m) {
  std::vector<int> y(static_cast<std::size_t>(host.n()), 0);
  // For every still-unlabelled host node, look for one embedding that pins some
  // pattern node onto it; a hit labels its whole image.
  for (int v = 0; v < host.n(); ++v) {
    if (y[static_cast<std::size_t>(v)]) continue;
    for (int p = 0; p < m.size() && !y[static_cast<std::size_t>(v)]; ++p) {
      Matcher(host, m.pattern(), std::make_pair(p, v)).run([&](const Embedding& e) {
        for (int h : e) y[static_cast<std::size_t>(h)] = 1;
        return false;
      });
    }
  }
  return y;
}

bool graph_contains_motif(const Graph& host, const Motif& m) { return !find_embeddings(host, m, 1).empty(); }

bool graph_contains_motif_from_labels(std::span<const int> node_labels) {
  return std::any_of(node_labels.begin(), node_labels.end(), [](int y) { return y != 0; });
}

EdgePartition boundary_and_intra_edges(const Graph& g, std::span<const int> motif_nodes) {
  std::vector<char> inside(static_cast<std::size_t>(g.n()), 0);
  for (int v : motif_nodes) {
    if (v < 0 || v >= g.n()) throw Error(ErrorCode::IndexOutOfRange, "motif node " + std::to_string(v));
    inside[static_cast<std::size_t>(v)] = 1;
  }
  EdgePartition out;
  for (const Edge& e : g.edges()) {
    const int k = inside[static_cast<std::size_t>(e.u)] + inside[static_cast<std::size_t>(e.v)];
    if (k == 1) out.boundary.push_back(e);
    if (k == 2) out.intra.push_back(e);
  }
  return out;
}

}  // namespace heteroflow::motif
