#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "heteroflow/datagen.hpp"
#include "heteroflow/dynamics.hpp"
#include "heteroflow/graph.hpp"
#include "heteroflow/metrics.hpp"
#include "heteroflow/models.hpp"
#include "heteroflow/motif.hpp"

// Persistence. Every JSON document is written with sorted keys and
// round-trip exact doubles, so equal values always produce equal bytes.
namespace heteroflow::io {

namespace fs = std::filesystem;

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Throws IoError.
std::string read_text(const fs::path& path);
/// Creates parent directories. Throws IoError.
void write_text(const fs::path& path, std::string_view content);

/// {"n": int, "edges": [[i, j], ...]} with i < j, sorted.
std::string graph_to_json(const Graph& g);
/// Throws ParseError, or the Graph construction error.
Graph graph_from_json(std::string_view text);

/// One record as a single-line JSON object.
std::string record_to_json(const datagen::SyntheticGraphRecord& r);
/// Throws ParseError or ValidationError.
datagen::SyntheticGraphRecord record_from_json(std::string_view text);

void write_dataset(const fs::path& path, std::span<const datagen::SyntheticGraphRecord> records);
/// Throws ParseError / ValidationError prefixed with the 1-based line number.
std::vector<datagen::SyntheticGraphRecord> read_dataset(const fs::path& path);

std::string split_to_json(const datagen::SplitIndices& s);
datagen::SplitIndices split_from_json(std::string_view text);

/// Columns t, dirichlet, rayleigh, energy, feature_norm. `energy` is empty for
/// the simplified flow.
std::string trace_to_csv(const dynamics::DynamicsTrace& trace);

std::string checkpoint_to_json(const models::ModelParams& params, std::uint64_t seed);
/// Throws ParseError or ShapeMismatch.
models::ModelParams checkpoint_from_json(std::string_view text, std::uint64_t* seed = nullptr);

std::string train_report_to_json(const models::TrainReport& r, std::uint64_t seed);
models::TrainReport train_report_from_json(std::string_view text);
/// Columns epoch, train_loss, val_loss.
std::string loss_curve_csv(const models::TrainReport& r);

struct MetricReport {
  std::string scenario;
  std::string model;
  double mmd2 = 0.0;
  double bandwidth = 1.0;
  std::map<std::string, double> shrink;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

std::string metric_report_to_json(const MetricReport& m);
MetricReport metric_report_from_json(std::string_view text);
/// Rows scenario, model, mmd2, bandwidth, then one column per shrink category.
std::string metric_reports_csv(std::span<const MetricReport> reports);

/// JSON array of {"id": string, "graph": Graph}.
std::string motif_library_to_json(std::span<const motif::Motif> motifs);
std::vector<motif::Motif> motif_library_from_json(std::string_view text);

/// JSON-lines graph regression data. Each line holds "graph", "features" and
/// a numeric "target"; "node_labels" and the motif annotations are optional.
/// Throws ParseError (malformed line or missing field) or ValidationError
/// (broken Graph invariant), both naming the line.
std::vector<datagen::SyntheticGraphRecord> ingest_graph_regression(const fs::path& path);
std::vector<datagen::SyntheticGraphRecord> ingest_graph_regression_text(std::string_view text);

}  // namespace heteroflow::io
