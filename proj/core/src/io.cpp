#include "heteroflow/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "heteroflow/error.hpp"
#include "json.hpp"

namespace heteroflow::io {

using json = nlohmann::json;
using datagen::SyntheticGraphRecord;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const json& require(const json& j, const char* key) {
  if (!j.is_object()) parse_fail("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field \"") + key + "\"");
  return *it;
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("field \"") + key + "\": " + e.what());
  }
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto shape = get_as<std::vector<long long>>(j, "shape");
  const auto data = get_as<std::vector<double>>(j, "data");
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) parse_fail("matrix shape must be [rows, cols]");
  if (static_cast<long long>(data.size()) != shape[0] * shape[1]) parse_fail("matrix data length != rows*cols");
  Matrix m(shape[0], shape[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = data[k++];
  return m;
}

json edges_to_json(const EdgeSet& edges) {
  json arr = json::array();
  for (const Edge& e : edges) arr.push_back({e.u, e.v});
  return arr;
}

EdgeSet edges_from_json(const json& j, const char* key) {
  const auto pairs = get_as<std::vector<std::array<int, 2>>>(j, key);
  EdgeSet out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(Edge::canonical(p[0], p[1]));
  return out;
}

json graph_json(const Graph& g) { return {{"n", g.n()}, {"edges", edges_to_json(g.edges())}}; }

Graph graph_from(const json& j) {
  const int n = get_as<int>(j, "n");
  const EdgeSet edges = edges_from_json(j, "edges");
  return Graph::build(n, std::span<const Edge>(edges));
}

std::string dump(const json& j) { return j.dump(); }

json record_json(const SyntheticGraphRecord& r) {
  json j = {
      {"graph", graph_json(r.graph)},
      {"features", matrix_to_json(r.features.values())},
      {"node_labels", r.node_labels},
      {"motif_nodes", r.motif_nodes},
      {"boundary_edges", edges_to_json(r.boundary_edges)},
      {"intra_motif_edges", edges_to_json(r.intra_motif_edges)},
      {"graph_label", r.graph_label},
      {"provenance",
       {{"quadrant", std::string(datagen::to_string(r.provenance.quadrant))},
        {"backbone_id", r.provenance.backbone_id},
        {"motif_variant", r.provenance.motif_variant},
        {"seed", r.provenance.seed}}},
  };
  if (r.target) j["target"] = *r.target;
  return j;
}

// Graph construction errors are reported as validation failures of the record.
Graph record_graph(const json& j) {
  try {
    return graph_from(require(j, "graph"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ValidationError, std::string(to_string(e.code())) + ": " + e.what());
  }
}

SyntheticGraphRecord record_from(const json& j, bool regression) {
  SyntheticGraphRecord r;
  r.graph = record_graph(j);
  try {
    r.features = FeatureMatrix(matrix_from_json(require(j, "features")));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ValidationError, std::string("features: ") + e.what());
  }
  const bool strict = !regression;
  auto optional_field = [&](const char* key) { return strict || j.contains(key); };
  if (optional_field("node_labels")) {
    r.node_labels = get_as<std::vector<int>>(j, "node_labels");
  } else {
    r.node_labels.assign(static_cast<std::size_t>(r.graph.n()), 0);
  }
  if (optional_field("motif_nodes")) r.motif_nodes = get_as<std::vector<int>>(j, "motif_nodes");
  if (optional_field("boundary_edges")) r.boundary_edges = edges_from_json(j, "boundary_edges");
  if (optional_field("intra_motif_edges")) r.intra_motif_edges = edges_from_json(j, "intra_motif_edges");
  if (optional_field("graph_label")) {
    r.graph_label = get_as<int>(j, "graph_label");
  } else {
    r.graph_label = r.motif_nodes.empty() ? 0 : 1;
  }
  if (optional_field("provenance")) {
    const json& p = require(j, "provenance");
    try {
      r.provenance.quadrant = datagen::parse_quadrant(get_as<std::string>(p, "quadrant"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      parse_fail(e.what());
    }
    r.provenance.backbone_id = get_as<int>(p, "backbone_id");
    r.provenance.motif_variant = get_as<int>(p, "motif_variant");
    r.provenance.seed = get_as<std::uint64_t>(p, "seed");
  }
  if (regression || j.contains("target")) {
    const json& t = require(j, "target");
    if (!t.is_number()) parse_fail("field \"target\" must be numeric");
    r.target = t.get<double>();
  }
  r.validate();
  return r;
}

std::vector<SyntheticGraphRecord> parse_lines(std::string_view text, bool regression) {
  std::vector<SyntheticGraphRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(record_from(parse(line), regression));
    } catch (const Error& e) {
      // Drop the "CODE: " prefix the constructor adds, so it is not repeated.
      std::string msg = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + msg);
    }
  }
  return out;
}

std::string csv_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::string graph_to_json(const Graph& g) { return dump(graph_json(g)); }

Graph graph_from_json(std::string_view text) { return graph_from(parse(text)); }

std::string record_to_json(const SyntheticGraphRecord& r) { return dump(record_json(r)); }

SyntheticGraphRecord record_from_json(std::string_view text) { return record_from(parse(text), false); }

void write_dataset(const fs::path& path, std::span<const SyntheticGraphRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r);
    out += '\n';
  }
  write_text(path, out);
}

std::vector<SyntheticGraphRecord> read_dataset(const fs::path& path) { return parse_lines(read_text(path), false); }

std::string split_to_json(const datagen::SplitIndices& s) {
  return dump(json{{"train", s.train}, {"val", s.val}, {"test", s.test}});
}

datagen::SplitIndices split_from_json(std::string_view text) {
  const json j = parse(text);
  datagen::SplitIndices s;
  s.train = get_as<std::vector<int>>(j, "train");
  s.val = get_as<std::vector<int>>(j, "val");
  s.test = get_as<std::vector<int>>(j, "test");
  return s;
}

std::string trace_to_csv(const dynamics::DynamicsTrace& trace) {
  std::string out = "t,dirichlet,rayleigh,energy,feature_norm\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out += csv_double(trace.times[k]) + ',' + csv_double(trace.dirichlet[k]) + ',' + csv_double(trace.rayleigh[k]) +
           ',' + (k < trace.energy.size() ? csv_double(trace.energy[k]) : std::string()) + ',' +
           csv_double(trace.feature_norm[k]) + '\n';
  }
  return out;
}

namespace {

json checkpoint_json(const models::ModelParams& p, std::uint64_t seed) {
  const auto& c = p.config();
  json tensors = json::array();
  for (const auto& t : p.tensors()) {
    json m = matrix_to_json(t.value);
    m["name"] = t.name;
    tensors.push_back(std::move(m));
  }
  return {{"family", std::string(models::to_string(c.family))},
          {"config",
           {{"input_dim", c.input_dim},
            {"layers", c.layers},
            {"hidden", c.hidden},
            {"tau", c.tau},
            {"activation", c.activation == models::Activation::Relu ? "relu" : "identity"}}},
          {"seed", seed},
          {"tensors", std::move(tensors)}};
}

models::ModelParams checkpoint_from(const json& j, std::uint64_t* seed) {
  models::ModelConfig c;
  try {
    c.family = models::parse_family(get_as<std::string>(j, "family"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    parse_fail(e.what());
  }
  const json& cfg = require(j, "config");
  c.input_dim = get_as<int>(cfg, "input_dim");
  c.layers = get_as<int>(cfg, "layers");
  c.hidden = get_as<int>(cfg, "hidden");
  c.tau = get_as<double>(cfg, "tau");
  const auto act = get_as<std::string>(cfg, "activation");
  if (act != "relu" && act != "identity") parse_fail("unknown activation '" + act + "'");
  c.activation = act == "relu" ? models::Activation::Relu : models::Activation::Identity;
  if (seed) *seed = get_as<std::uint64_t>(j, "seed");

  models::ModelParams p = models::ModelParams::zeros(c);
  const json& tensors = require(j, "tensors");
  if (!tensors.is_array() || tensors.size() != p.tensors().size()) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor count does not match the family layout");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& slot = p.tensors()[i];
    const auto name = get_as<std::string>(tensors[i], "name");
    if (name != slot.name) throw Error(ErrorCode::ShapeMismatch, "expected tensor " + slot.name + ", got " + name);
    Matrix m = matrix_from_json(tensors[i]);
    if (m.rows() != slot.value.rows() || m.cols() != slot.value.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + name + " has the wrong shape");
    }
    slot.value = std::move(m);
  }
  return p;
}

}  // namespace

std::string checkpoint_to_json(const models::ModelParams& params, std::uint64_t seed) {
  return dump(checkpoint_json(params, seed));
}

models::ModelParams checkpoint_from_json(std::string_view text, std::uint64_t* seed) {
  return checkpoint_from(parse(text), seed);
}

std::string train_report_to_json(const models::TrainReport& r, std::uint64_t seed) {
  return dump(json{{"family", std::string(models::to_string(r.family))},
                   {"train_loss", r.train_loss},
                   {"val_loss", r.val_loss},
                   {"selected_epoch", r.selected_epoch},
                   {"test_loss", r.test_loss},
                   {"test_metric", r.test_metric},
                   {"test_embeddings", matrix_to_json(r.test_embeddings)},
                   {"test_indices", r.test_indices},
                   {"checkpoint", checkpoint_json(r.params, seed)}});
}

models::TrainReport train_report_from_json(std::string_view text) {
  const json j = parse(text);
  models::TrainReport r;
  r.params = checkpoint_from(require(j, "checkpoint"), nullptr);
  r.family = r.params.family();
  r.train_loss = get_as<std::vector<double>>(j, "train_loss");
  r.val_loss = get_as<std::vector<double>>(j, "val_loss");
  r.selected_epoch = get_as<int>(j, "selected_epoch");
  r.test_loss = get_as<double>(j, "test_loss");
  r.test_metric = get_as<double>(j, "test_metric");
  r.test_embeddings = matrix_from_json(require(j, "test_embeddings"));
  r.test_indices = get_as<std::vector<int>>(j, "test_indices");
  return r;
}

std::string loss_curve_csv(const models::TrainReport& r) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t k = 0; k < r.train_loss.size(); ++k) {
    out += std::to_string(k + 1) + ',' + csv_double(r.train_loss[k]) + ',' + csv_double(r.val_loss[k]) + '\n';
  }
  return out;
}

std::string metric_report_to_json(const MetricReport& m) {
  return dump(json{{"scenario", m.scenario},
                   {"model", m.model},
                   {"mmd2", m.mmd2},
                   {"bandwidth", m.bandwidth},
                   {"shrink", m.shrink}});
}

MetricReport metric_report_from_json(std::string_view text) {
  const json j = parse(text);
  MetricReport m;
  m.scenario = get_as<std::string>(j, "scenario");
  m.model = get_as<std::string>(j, "model");
  m.mmd2 = get_as<double>(j, "mmd2");
  m.bandwidth = get_as<double>(j, "bandwidth");
  m.shrink = get_as<std::map<std::string, double>>(j, "shrink");
  return m;
}

std::string metric_reports_csv(std::span<const MetricReport> reports) {
  std::set<std::string> categories;
  for (const auto& r : reports)
    for (const auto& [k, v] : r.shrink) categories.insert(k);
  std::string out = "scenario,model,mmd2,bandwidth";
  for (const auto& c : categories) out += ",shrink_" + c;
  out += '\n';
  for (const auto& r : reports) {
    out += r.scenario + ',' + r.model + ',' + csv_double(r.mmd2) + ',' + csv_double(r.bandwidth);
    for (const auto& c : categories) {
      auto it = r.shrink.find(c);
      out += ',';
      if (it != r.shrink.end()) out += csv_double(it->second);
    }
    out += '\n';
  }
  return out;
}

std::string motif_library_to_json(std::span<const motif::Motif> motifs) {
  json arr = json::array();
  for (const auto& m : motifs) arr.push_back({{"id", m.id()}, {"graph", graph_json(m.pattern())}});
  return arr.dump(1);
}

std::vector<motif::Motif> motif_library_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_array()) parse_fail("motif library must be a JSON array");
  std::vector<motif::Motif> out;
  std::set<std::string> seen;
  for (const auto& item : j) {
    auto id = get_as<std::string>(item, "id");
    if (!seen.insert(id).second) throw Error(ErrorCode::ValidationError, "duplicate motif id '" + id + "'");
    out.emplace_back(graph_from(require(item, "graph")), std::move(id));
  }
  return out;
}

std::vector<SyntheticGraphRecord> ingest_graph_regression(const fs::path& path) {
  return ingest_graph_regression_text(read_text(path));
}

std::vector<SyntheticGraphRecord> ingest_graph_regression_text(std::string_view text) {
  return parse_lines(text, true);
}

}  // namespace heteroflow::io
