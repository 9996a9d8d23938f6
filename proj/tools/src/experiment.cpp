#include "heteroflow_cli/experiment.hpp"

#include <map>
#include <sstream>

#include "heteroflow/error.hpp"
#include "heteroflow/metrics.hpp"

namespace heteroflow::cli {

ShrinkSummary shrink_summary(const models::ModelParams& params,
                             std::span<const datagen::SyntheticGraphRecord> records, std::span<const int> indices) {
  std::vector<int> motif_graphs;
  for (int i : indices) {
    if (records[static_cast<std::size_t>(i)].graph_label == 1) motif_graphs.push_back(i);
  }
  ShrinkSummary s;
  if (motif_graphs.empty()) return s;
  const auto batch = models::make_batch(records, motif_graphs, models::LossKind::Logistic);
  const Matrix nodes = models::forward(params, batch).node_embeddings;
  for (std::size_t k = 0; k < motif_graphs.size(); ++k) {
    const auto& r = records[static_cast<std::size_t>(motif_graphs[k])];
    const Matrix ft = nodes.middleRows(batch.offsets[k], r.graph.n());
    try {
      const double b = metrics::shrink_ratio(r.graph, r.features.values(), ft, r.boundary_edges);
      const double in = metrics::shrink_ratio(r.graph, r.features.values(), ft, r.intra_motif_edges);
      s.boundary += b;
      s.intra += in;
      ++s.graphs;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroInitialSubsetEnergy && e.code() != ErrorCode::ZeroNorm) throw;
      ++s.skipped;
    }
  }
  if (s.graphs > 0) {
    s.boundary /= s.graphs;
    s.intra /= s.graphs;
  }
  return s;
}

io::MetricReport evaluate_report(const models::TrainReport& report,
                                 std::span<const datagen::SyntheticGraphRecord> records,
                                 datagen::Quadrant quadrant) {
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
  for (std::size_t k = 0; k < report.test_indices.size(); ++k) {
    const int label = records[static_cast<std::size_t>(report.test_indices[k])].graph_label;
    (label == 1 ? pos : neg).push_back(static_cast<Eigen::Index>(k));
  }
  const Matrix h = report.test_embeddings(pos, Eigen::all);
  const Matrix g = report.test_embeddings(neg, Eigen::all);

  io::MetricReport m;
  m.scenario = std::string(datagen::to_string(quadrant));
  m.model = std::string(models::to_string(report.family));
  m.bandwidth = metrics::median_bandwidth(h, g);
  m.mmd2 = metrics::mmd2(h, g, m.bandwidth).mmd2;
  const ShrinkSummary s = shrink_summary(report.params, records, report.test_indices);
  if (s.graphs > 0) {
    m.shrink["boundary"] = s.boundary;
    m.shrink["intra"] = s.intra;
  }
  return m;
}

RunResult run_one(datagen::Quadrant quadrant, models::Family family,
                  std::span<const datagen::SyntheticGraphRecord> records, const datagen::SplitIndices& split,
                  const models::TrainConfig& cfg) {
  RunResult r;
  r.quadrant = quadrant;
  r.family = family;
  r.seed = cfg.seed;
  r.report = models::train(family, records, split, cfg);
  r.metrics = evaluate_report(r.report, records, quadrant);
  return r;
}

std::vector<QuadrantSummary> summarize(std::span<const RunResult> runs) {
  std::map<datagen::Quadrant, QuadrantSummary> rows;
  std::map<std::pair<datagen::Quadrant, int>, int> counts;
  for (const auto& run : runs) {
    auto& row = rows[run.quadrant];
    row.quadrant = run.quadrant;
    const int f = static_cast<int>(run.family);
    row.mmd2[f] += run.metrics.mmd2;
    row.accuracy[f] += run.report.test_metric;
    const auto b = run.metrics.shrink.find("boundary");
    const auto in = run.metrics.shrink.find("intra");
    if (b != run.metrics.shrink.end() && in != run.metrics.shrink.end()) row.shrink_quotient[f] += b->second / in->second;
    ++counts[{run.quadrant, f}];
  }
  std::vector<QuadrantSummary> out;
  for (auto& [q, row] : rows) {
    for (int f = 0; f < 3; ++f) {
      const int c = counts[{q, f}];
      if (c == 0) continue;
      row.mmd2[f] /= c;
      row.accuracy[f] /= c;
      row.shrink_quotient[f] /= c;
    }
    constexpr int kAdaptive = static_cast<int>(models::Family::AdaptiveMix);
    constexpr int kGcn = static_cast<int>(models::Family::Gcn);
    constexpr int kGf = static_cast<int>(models::Family::GfGcn);
    row.adaptive_mmd_wins = row.mmd2[kAdaptive] > row.mmd2[kGcn] && row.mmd2[kAdaptive] > row.mmd2[kGf];
    row.adaptive_accuracy_not_worse =
        row.accuracy[kAdaptive] >= row.accuracy[kGcn] && row.accuracy[kAdaptive] >= row.accuracy[kGf];
    row.adaptive_shrink_wins = row.shrink_quotient[kAdaptive] > row.shrink_quotient[kGcn] &&
                               row.shrink_quotient[kAdaptive] > row.shrink_quotient[kGf];
    out.push_back(row);
  }
  return out;
}

std::string summary_csv(std::span<const QuadrantSummary> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "scenario";
  for (const char* metric : {"mmd2", "accuracy", "shrink_quotient"})
    for (auto f : models::kAllFamilies) os << ',' << metric << '_' << models::to_string(f);
  os << ",adaptive_mmd_wins,adaptive_accuracy_not_worse,adaptive_shrink_wins\n";
  for (const auto& r : rows) {
    os << datagen::to_string(r.quadrant);
    for (const double* v : {r.mmd2, r.accuracy, r.shrink_quotient})
      for (int f = 0; f < 3; ++f) os << ',' << v[f];
    os << ',' << r.adaptive_mmd_wins << ',' << r.adaptive_accuracy_not_worse << ',' << r.adaptive_shrink_wins << '\n';
  }
  return os.str();
}

}  // namespace heteroflow::cli
