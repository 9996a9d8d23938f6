#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heteroflow/datagen.hpp"
#include "heteroflow/io.hpp"
#include "heteroflow/models.hpp"

namespace heteroflow::cli {

/// Per-category shrink ratios averaged over the motif-bearing test graphs,
/// comparing the input features with the final-layer node embeddings.
struct ShrinkSummary {
  double boundary = 0.0;
  double intra = 0.0;
  int graphs = 0;
  /// Graphs skipped because a category had zero initial energy.
  int skipped = 0;

  double quotient() const { return boundary / intra; }
};

ShrinkSummary shrink_summary(const models::ModelParams& params,
                             std::span<const datagen::SyntheticGraphRecord> records, std::span<const int> indices);

/// MMD^2 between the test embeddings of label-1 and label-0 graphs, bandwidth
/// from the pooled median heuristic, plus the shrink ratios.
io::MetricReport evaluate_report(const models::TrainReport& report,
                                 std::span<const datagen::SyntheticGraphRecord> records,
                                 datagen::Quadrant quadrant);

struct RunResult {
  datagen::Quadrant quadrant = datagen::Quadrant::HomHom;
  models::Family family = models::Family::Gcn;
  std::uint64_t seed = 0;
  models::TrainReport report;
  io::MetricReport metrics;
};

/// Trains one family on one quadrant's records and evaluates it.
RunResult run_one(datagen::Quadrant quadrant, models::Family family,
                  std::span<const datagen::SyntheticGraphRecord> records, const datagen::SplitIndices& split,
                  const models::TrainConfig& cfg);

/// Fixed-order summary lines comparing families per quadrant (means over seeds).
struct QuadrantSummary {
  datagen::Quadrant quadrant = datagen::Quadrant::HomHom;
  double mmd2[3] = {0, 0, 0};
  double accuracy[3] = {0, 0, 0};
  double shrink_quotient[3] = {0, 0, 0};
  bool adaptive_mmd_wins = false;
  bool adaptive_accuracy_not_worse = false;
  bool adaptive_shrink_wins = false;
};

std::vector<QuadrantSummary> summarize(std::span<const RunResult> runs);
std::string summary_csv(std::span<const QuadrantSummary> rows);

}  // namespace heteroflow::cli
