#include "heteroflow_cli/app.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "heteroflow/datagen.hpp"
#include "heteroflow/dynamics.hpp"
#include "heteroflow/error.hpp"
#include "heteroflow/io.hpp"
#include "heteroflow/metrics.hpp"
#include "heteroflow/models.hpp"
#include "heteroflow_cli/experiment.hpp"
#include "json.hpp"

namespace heteroflow::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using datagen::SyntheticGraphRecord;

double synthetic_regression_target(const SyntheticGraphRecord& r) {
  double total = 0.0;
  for (int label : r.node_labels) total += static_cast<double>(label % 3 + 1);
  total /= static_cast<double>(r.graph.n());
  return r.motif_nodes.empty() ? total : 2.0 * total;
}

void run_jobs(int jobs, int count, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974;  // "split"

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

/// HETEROFLOW_SEED wins over the command line and the config file.
std::uint64_t resolve_seed(std::uint64_t seed) {
  const char* env = std::getenv("HETEROFLOW_SEED");
  if (!env || !*env) return seed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    invalid(std::string("HETEROFLOW_SEED is not an unsigned integer: ") + env);
  }
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

// Every artifact directory gets the resolved options and the tool version.
void write_snapshot(const fs::path& dir, const CLI::App& app, const CLI::App& sub, std::uint64_t seed) {
  io::write_text(dir / "config.ini", app.config_to_str(true, false));
  json run = {{"command", sub.get_name()}, {"tool_version", std::string(io::kToolVersion)}, {"seed", seed}};
  io::write_text(dir / "run.json", pretty(run));
}

datagen::SplitRatios checked_ratios(double train, double val, double test) {
  if (train <= 0 || val <= 0 || test <= 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    invalid("split ratios must be positive and sum to 1");
  }
  return {train, val, test};
}

// ---------------------------------------------------------------------------
// graph / weight / feature sources shared by simulate and regime

struct GraphSource {
  std::string file;
  std::vector<int> barbell;
  int random_n = 0;

  void add(CLI::App* cmd) {
    auto* f = cmd->add_option("--graph", file, "Graph JSON file {n, edges}");
    auto* b = cmd->add_option("--barbell", barbell, "Barbell graph: CLIQUE_N PATH_LEN")->expected(2);
    auto* r = cmd->add_option("--random", random_n, "Random connected graph with N nodes");
    f->excludes(b)->excludes(r);
    b->excludes(r);
  }

  Graph load(std::uint64_t seed) const {
    if (!file.empty()) return io::graph_from_json(io::read_text(file));
    if (barbell.size() == 2) return dynamics::barbell_graph(barbell[0], barbell[1]);
    if (random_n > 0) {
      Rng rng = make_rng(seed, 0x677261706800);
      return datagen::random_skeleton(random_n, datagen::EdgeCountMode::Sampled, rng);
    }
    invalid("one of --graph, --barbell or --random is required");
  }
};

Matrix matrix_from_rows(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) invalid(what + " must be a non-empty array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j[0].size()) invalid(what + " rows differ in length");
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      if (!j[i][k].is_number()) invalid(what + " entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

struct WeightSource {
  std::string file;
  double scalar = 1.0;
  int dim = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--weights", file, "JSON file {\"w\": rows, \"omega\": rows, \"w_tilde\": rows}");
    cmd->add_option("--w", scalar, "Scalar preset W = w * I (used without --weights)")->capture_default_str();
    cmd->add_option("--dim", dim, "Channel count for the scalar preset")->capture_default_str()->check(
        CLI::PositiveNumber);
  }

  dynamics::WeightSpec load() const {
    if (file.empty()) return dynamics::WeightSpec::scalar(scalar, dim);
    const json j = parse_json_file(file);
    if (!j.is_object() || !j.contains("w")) invalid(file + ": missing \"w\"");
    std::optional<Matrix> omega;
    std::optional<Matrix> w_tilde;
    if (j.contains("omega")) omega = matrix_from_rows(j["omega"], "omega");
    if (j.contains("w_tilde")) w_tilde = matrix_from_rows(j["w_tilde"], "w_tilde");
    return dynamics::WeightSpec(matrix_from_rows(j["w"], "w"), omega, w_tilde);
  }
};

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string out;
  std::uint64_t seed = 0;
  int backbones = 200;
  int motifs = 5;
  int feature_dim = 8;
  int classes = 3;
  int backbone_min = 20;
  int backbone_max = 50;
  int motif_min = 5;
  int motif_max = 7;
  double noise = 0.05;
  std::string edge_mode = "sampled";
  std::vector<std::string> quadrants;
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  bool regression = false;
  int jobs = 1;
};

void add_gen(CLI::App& app, GenOptions& o) {
  auto* c = app.add_subcommand("gen", "Generate the four synthetic quadrant datasets and their splits");
  c->add_option("--out", o.out, "Output directory")->required();
  c->add_option("--seed", o.seed, "Root seed")->capture_default_str();
  c->add_option("--backbones", o.backbones, "Backbone graphs per quadrant")->capture_default_str();
  c->add_option("--motifs", o.motifs, "Motif variants per backbone")->capture_default_str();
  c->add_option("--feature-dim", o.feature_dim)->capture_default_str();
  c->add_option("--classes", o.classes, "Classes for heterophilic labelling")->capture_default_str();
  c->add_option("--backbone-min", o.backbone_min)->capture_default_str();
  c->add_option("--backbone-max", o.backbone_max)->capture_default_str();
  c->add_option("--motif-min", o.motif_min)->capture_default_str();
  c->add_option("--motif-max", o.motif_max)->capture_default_str();
  c->add_option("--noise", o.noise, "Feature noise sigma")->capture_default_str();
  c->add_option("--edge-mode", o.edge_mode)->check(CLI::IsMember({"sampled", "fixed-half"}))->capture_default_str();
  c->add_option("--quadrant", o.quadrants, "Quadrants to generate (default: all)")
      ->check(CLI::IsMember({"hom-hom", "hom-het", "het-hom", "het-het"}));
  c->add_option("--train", o.train)->capture_default_str();
  c->add_option("--val", o.val)->capture_default_str();
  c->add_option("--test", o.test)->capture_default_str();
  c->add_flag("--regression-target", o.regression, "Attach the synthetic regression target to every record");
  c->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

int cmd_gen(const CLI::App& app, const CLI::App& sub, GenOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  const auto ratios = checked_ratios(o.train, o.val, o.test);
  std::vector<datagen::Quadrant> quadrants;
  if (o.quadrants.empty()) {
    quadrants.assign(std::begin(datagen::kAllQuadrants), std::end(datagen::kAllQuadrants));
  } else {
    for (const auto& q : o.quadrants) quadrants.push_back(datagen::parse_quadrant(q));
  }
  datagen::GenConfig base;
  base.seed = o.seed;
  base.backbone_count = o.backbones;
  base.motif_variants = o.motifs;
  base.feature_dim = o.feature_dim;
  base.heterophilic_classes = o.classes;
  base.backbone_n_min = o.backbone_min;
  base.backbone_n_max = o.backbone_max;
  base.motif_n_min = o.motif_min;
  base.motif_n_max = o.motif_max;
  base.noise_sigma = o.noise;
  base.edge_mode = o.edge_mode == "sampled" ? datagen::EdgeCountMode::Sampled : datagen::EdgeCountMode::FixedHalf;
  base.validate();

  const fs::path dir = o.out;
  std::vector<json> entries(quadrants.size());
  run_jobs(o.jobs, static_cast<int>(quadrants.size()), [&](int k) {
    datagen::GenConfig cfg = base;
    cfg.quadrant = quadrants[static_cast<std::size_t>(k)];
    auto records = datagen::generate_dataset(cfg);
    if (o.regression)
      for (auto& r : records) r.target = synthetic_regression_target(r);
    Rng rng = make_rng(o.seed, kSplitStream, static_cast<std::uint64_t>(cfg.quadrant));
    const auto split = datagen::split_dataset(std::span<const SyntheticGraphRecord>(records), ratios, rng);
    const std::string name(datagen::to_string(cfg.quadrant));
    io::write_dataset(dir / (name + ".jsonl"), records);
    io::write_text(dir / (name + ".split.json"), io::split_to_json(split) + "\n");
    int positives = 0;
    for (const auto& r : records) positives += r.graph_label;
    entries[static_cast<std::size_t>(k)] = {{"quadrant", name},
                                            {"data", name + ".jsonl"},
                                            {"split", name + ".split.json"},
                                            {"records", records.size()},
                                            {"positives", positives},
                                            {"negatives", static_cast<int>(records.size()) - positives},
                                            {"train", split.train.size()},
                                            {"val", split.val.size()},
                                            {"test", split.test.size()}};
  });
  json manifest = {{"seed", o.seed},
                   {"tool_version", std::string(io::kToolVersion)},
                   {"embedding_seed", base.resolved_embedding_seed()},
                   {"datasets", entries}};
  io::write_text(dir / "manifest.json", pretty(manifest));
  write_snapshot(dir, app, sub, o.seed);
  for (const auto& e : entries) {
    out << e["quadrant"].get<std::string>() << ": " << e["records"].get<int>() << " records -> "
        << (dir / e["data"].get<std::string>()).string() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// split

struct SplitOptions {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

void add_split(CLI::App& app, SplitOptions& o) {
  auto* c = app.add_subcommand("split", "Stratified train/val/test split of a dataset file");
  c->add_option("--data", o.data, "Dataset (JSON lines)")->required();
  c->add_option("--out", o.out, "Split file to write")->required();
  c->add_option("--seed", o.seed)->capture_default_str();
  c->add_option("--train", o.train)->capture_default_str();
  c->add_option("--val", o.val)->capture_default_str();
  c->add_option("--test", o.test)->capture_default_str();
}

int cmd_split(const CLI::App& app, const CLI::App& sub, SplitOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  const auto records = io::read_dataset(o.data);
  Rng rng = make_rng(o.seed, kSplitStream);
  const auto split =
      datagen::split_dataset(std::span<const SyntheticGraphRecord>(records), checked_ratios(o.train, o.val, o.test), rng);
  const fs::path path = o.out;
  io::write_text(path, io::split_to_json(split) + "\n");
  write_snapshot(path.has_parent_path() ? path.parent_path() : fs::path("."), app, sub, o.seed);
  out << "train " << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate / regime

struct SimOptions {
  GraphSource graph;
  WeightSource weights;
  std::string features;
  std::string out;
  std::uint64_t seed = 0;
  double tau = 0.05;
  int steps = 2000;
  bool renormalize = false;
  std::string variant = "simplified";
  std::string phi0 = "zero";
  double eps = 1e-2;
};

void add_simulate(CLI::App& app, SimOptions& o) {
  auto* c = app.add_subcommand("simulate", "Integrate the linear graph flow and classify its frequency regime");
  o.graph.add(c);
  o.weights.add(c);
  c->add_option("--features", o.features, "Initial features as a JSON array of rows (default: Gaussian)");
  c->add_option("--out", o.out, "Output directory")->required();
  c->add_option("--seed", o.seed)->capture_default_str();
  c->add_option("--tau", o.tau)->capture_default_str();
  c->add_option("--steps", o.steps)->capture_default_str();
  c->add_flag("--renormalize", o.renormalize, "Divide F by its norm after every step");
  c->add_option("--variant", o.variant)->check(CLI::IsMember({"simplified", "full"}))->capture_default_str();
  c->add_option("--phi0", o.phi0)->check(CLI::IsMember({"zero", "quadratic"}))->capture_default_str();
  c->add_option("--eps", o.eps, "Tolerance of the empirical regime test")->capture_default_str();
}

struct RegimeOptions {
  GraphSource graph;
  WeightSource weights;
  std::string out;
  std::uint64_t seed = 0;
};

void add_regime(CLI::App& app, RegimeOptions& o) {
  auto* c = app.add_subcommand("regime", "Predict the frequency regime from the spectra of the graph and W");
  o.graph.add(c);
  o.weights.add(c);
  c->add_option("--out", o.out, "Optional JSON output file");
  c->add_option("--seed", o.seed)->capture_default_str();
}

json prediction_json(const dynamics::RegimePrediction& p) {
  json j = {{"regime", std::string(dynamics::to_string(p.regime))},
            {"margin", p.margin},
            {"lambda_max", p.lambda_max}};
  if (p.regime == dynamics::Regime::Boundary) j["note"] = "margin within tolerance of zero; regime is degenerate";
  return j;
}

int cmd_simulate(const CLI::App& app, const CLI::App& sub, SimOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  const Graph g = o.graph.load(o.seed);
  const auto w = o.weights.load();
  Matrix f0;
  if (!o.features.empty()) {
    f0 = matrix_from_rows(parse_json_file(o.features), "features");
  } else {
    Rng rng = make_rng(o.seed, 0x6665617400);
    std::normal_distribution<double> z(0.0, 1.0);
    f0.resize(g.n(), w.dim());
    for (Eigen::Index i = 0; i < f0.size(); ++i) f0.data()[i] = z(rng);
  }
  dynamics::SimulationOptions opts;
  opts.tau = o.tau;
  opts.steps = o.steps;
  opts.renormalize = o.renormalize;
  opts.variant = o.variant == "full" ? dynamics::FlowVariant::Full : dynamics::FlowVariant::Simplified;
  opts.phi0 = o.phi0 == "quadratic" ? dynamics::Phi0Mode::Quadratic : dynamics::Phi0Mode::Zero;
  opts.snapshot_stride = 0;

  dynamics::DynamicsTrace trace;
  try {
    trace = dynamics::simulate(g, FeatureMatrix(f0), w, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Diverged) throw;
    throw Error(ErrorCode::Diverged, std::string(e.what()) + " (lower --tau or pass --renormalize)");
  }
  const auto spectrum = laplacian_spectrum(g);
  const auto predicted = dynamics::predict_regime(spectrum, w);
  const auto empirical = dynamics::classify_regime_empirical(trace, spectrum, o.eps);

  const fs::path dir = o.out;
  io::write_text(dir / "trace.csv", io::trace_to_csv(trace));
  json verdict = {{"predicted", prediction_json(predicted)},
                  {"empirical", std::string(dynamics::to_string(empirical))},
                  {"final_rayleigh", trace.final_rayleigh()},
                  {"steps", o.steps},
                  {"tau", o.tau}};
  io::write_text(dir / "verdict.json", pretty(verdict));
  write_snapshot(dir, app, sub, o.seed);
  out << "predicted " << dynamics::to_string(predicted.regime) << " (margin " << predicted.margin << "), empirical "
      << dynamics::to_string(empirical) << " (final rayleigh " << trace.final_rayleigh() << ")\n";
  if (predicted.regime == dynamics::Regime::Boundary) out << "note: degenerate weights, regime undecided\n";
  return kExitOk;
}

int cmd_regime(const CLI::App& app, const CLI::App& sub, RegimeOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  const Graph g = o.graph.load(o.seed);
  const json j = prediction_json(dynamics::predict_regime(g, o.weights.load()));
  if (!o.out.empty()) {
    const fs::path path = o.out;
    io::write_text(path, pretty(j));
    write_snapshot(path.has_parent_path() ? path.parent_path() : fs::path("."), app, sub, o.seed);
  }
  out << pretty(j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string split;
  std::string scenario;
  std::string dataset_dir;
  std::string out;
  std::vector<std::string> families;
  std::uint64_t seed = 0;
  int seeds = 1;
  int epochs = 300;
  double lr = 0.01;
  int batch_size = 0;
  int layers = 4;
  int hidden = 16;
  double tau = 0.2;
  bool no_match = false;
  std::string loss = "logistic";
  int jobs = 1;
};

void add_train(CLI::App& app, TrainOptions& o) {
  auto* c = app.add_subcommand("train", "Train model families and evaluate MMD and shrink ratios on the test split");
  auto* d = c->add_option("--data", o.data, "Dataset file (JSON lines)");
  c->add_option("--split", o.split, "Split file for --data")->needs(d);
  c->add_option("--scenario", o.scenario, "Scenario name for --data (default: file stem)")->needs(d);
  c->add_option("--dataset-dir", o.dataset_dir, "Directory written by gen")->excludes(d);
  c->add_option("--out", o.out, "Output directory")->required();
  c->add_option("--family", o.families, "Families to train (default: all)")
      ->check(CLI::IsMember({"gcn", "gf_gcn", "adaptive_mix"}));
  c->add_option("--seed", o.seed, "First training seed")->capture_default_str();
  c->add_option("--seeds", o.seeds, "Number of consecutive seeds")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--epochs", o.epochs)->capture_default_str();
  c->add_option("--lr", o.lr)->capture_default_str();
  c->add_option("--batch-size", o.batch_size, "0 means full batch")->capture_default_str();
  c->add_option("--layers", o.layers)->capture_default_str();
  c->add_option("--hidden", o.hidden, "gcn width; other families are parameter matched")->capture_default_str();
  c->add_option("--tau", o.tau, "gf_gcn step size")->capture_default_str();
  c->add_flag("--no-match", o.no_match, "Use --hidden for every family");
  c->add_option("--loss", o.loss)->check(CLI::IsMember({"logistic", "mse"}))->capture_default_str();
  c->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

struct Scenario {
  std::string name;
  std::vector<SyntheticGraphRecord> records;
  datagen::SplitIndices split;
};

std::vector<Scenario> load_scenarios(const TrainOptions& o) {
  std::vector<Scenario> out;
  if (!o.dataset_dir.empty()) {
    const fs::path dir = o.dataset_dir;
    const json manifest = parse_json_file((dir / "manifest.json").string());
    if (!manifest.contains("datasets") || !manifest["datasets"].is_array()) {
      throw Error(ErrorCode::ParseError, "manifest.json has no datasets array");
    }
    for (const auto& e : manifest["datasets"]) {
      Scenario s;
      s.name = e.at("quadrant").get<std::string>();
      s.records = io::read_dataset(dir / e.at("data").get<std::string>());
      s.split = io::split_from_json(io::read_text(dir / e.at("split").get<std::string>()));
      out.push_back(std::move(s));
    }
  } else if (!o.data.empty()) {
    if (o.split.empty()) invalid("--split is required with --data");
    Scenario s;
    s.name = o.scenario.empty() ? fs::path(o.data).stem().string() : o.scenario;
    s.records = io::read_dataset(o.data);
    s.split = io::split_from_json(io::read_text(o.split));
    out.push_back(std::move(s));
  } else {
    invalid("one of --data or --dataset-dir is required");
  }
  for (const auto& s : out) {
    const int n = static_cast<int>(s.records.size());
    for (const auto* part : {&s.split.train, &s.split.val, &s.split.test})
      for (int i : *part)
        if (i < 0 || i >= n) throw Error(ErrorCode::ValidationError, s.name + ": split index out of range");
  }
  return out;
}

std::optional<datagen::Quadrant> quadrant_of(const std::string& name) {
  for (auto q : datagen::kAllQuadrants)
    if (datagen::to_string(q) == name) return q;
  return std::nullopt;
}

int cmd_train(const CLI::App& app, const CLI::App& sub, TrainOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  if (o.epochs < 1) invalid("--epochs must be >= 1");
  const auto scenarios = load_scenarios(o);
  std::vector<models::Family> families;
  if (o.families.empty()) {
    families.assign(std::begin(models::kAllFamilies), std::end(models::kAllFamilies));
  } else {
    for (const auto& f : o.families) families.push_back(models::parse_family(f));
  }
  const bool regression = o.loss == "mse";

  struct Job {
    std::size_t scenario;
    models::Family family;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (auto f : families)
      for (int k = 0; k < o.seeds; ++k) jobs.push_back({s, f, o.seed + static_cast<std::uint64_t>(k)});

  const fs::path dir = o.out;
  std::vector<RunResult> results(jobs.size());
  run_jobs(o.jobs, static_cast<int>(jobs.size()), [&](int j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    const Scenario& sc = scenarios[job.scenario];
    models::TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.seed = job.seed;
    cfg.loss = regression ? models::LossKind::Mse : models::LossKind::Logistic;
    cfg.layers = o.layers;
    cfg.hidden = o.hidden;
    cfg.tau = o.tau;
    cfg.match_parameters = !o.no_match;

    RunResult& r = results[static_cast<std::size_t>(j)];
    r.family = job.family;
    r.seed = job.seed;
    r.report = models::train(job.family, sc.records, sc.split, cfg);
    const fs::path run_dir = dir / sc.name / std::string(models::to_string(job.family)) /
                             ("seed" + std::to_string(job.seed));
    io::write_text(run_dir / "report.json", io::train_report_to_json(r.report, job.seed) + "\n");
    io::write_text(run_dir / "loss.csv", io::loss_curve_csv(r.report));
    io::write_text(run_dir / "checkpoint.json", io::checkpoint_to_json(r.report.params, job.seed) + "\n");
    if (!regression) {
      r.metrics = evaluate_report(r.report, sc.records, datagen::Quadrant::HomHom);
      r.metrics.scenario = sc.name;
      io::write_text(run_dir / "metrics.json", io::metric_report_to_json(r.metrics) + "\n");
    }
  });

  std::ostringstream runs_csv;
  runs_csv.precision(17);
  runs_csv << "scenario,model,seed,selected_epoch,test_loss," << (regression ? "test_mse" : "test_accuracy") << "\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = results[j];
    runs_csv << scenarios[jobs[j].scenario].name << ',' << models::to_string(r.family) << ',' << r.seed << ','
             << r.report.selected_epoch << ',' << r.report.test_loss << ',' << r.report.test_metric << "\n";
  }
  io::write_text(dir / "runs.csv", runs_csv.str());

  if (!regression) {
    std::vector<io::MetricReport> metrics;
    std::vector<RunResult> quadrant_runs;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      metrics.push_back(results[j].metrics);
      if (auto q = quadrant_of(scenarios[jobs[j].scenario].name)) {
        RunResult r = results[j];
        r.quadrant = *q;
        quadrant_runs.push_back(std::move(r));
      }
    }
    io::write_text(dir / "metrics.csv", io::metric_reports_csv(metrics));
    if (!quadrant_runs.empty()) io::write_text(dir / "summary.csv", summary_csv(summarize(quadrant_runs)));
  }
  write_snapshot(dir, app, sub, o.seed);
  out << runs_csv.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-mmd / shrink

struct EvalOptions {
  std::string data;
  std::string report;
  std::string out;
};

void add_eval(CLI::App& app, const char* name, const char* help, EvalOptions& o) {
  auto* c = app.add_subcommand(name, help);
  c->add_option("--data", o.data, "Dataset the report was trained on")->required();
  c->add_option("--report", o.report, "report.json written by train")->required();
  c->add_option("--out", o.out, "Optional JSON output file");
}

void emit(const EvalOptions& o, const json& j, std::ostream& out) {
  if (!o.out.empty()) io::write_text(o.out, pretty(j));
  out << pretty(j);
}

int cmd_eval_mmd(EvalOptions o, std::ostream& out) {
  const auto records = io::read_dataset(o.data);
  const auto report = io::train_report_from_json(io::read_text(o.report));
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
  for (std::size_t k = 0; k < report.test_indices.size(); ++k) {
    const int i = report.test_indices[k];
    if (i < 0 || i >= static_cast<int>(records.size())) {
      throw Error(ErrorCode::ValidationError, "report test index out of range for this dataset");
    }
    (records[static_cast<std::size_t>(i)].graph_label == 1 ? pos : neg).push_back(static_cast<Eigen::Index>(k));
  }
  const Matrix h = report.test_embeddings(pos, Eigen::all);
  const Matrix g = report.test_embeddings(neg, Eigen::all);
  const double sigma = metrics::median_bandwidth(h, g);
  const auto r = metrics::mmd2(h, g, sigma);
  emit(o, {{"model", std::string(models::to_string(report.family))}, {"mmd2", r.mmd2}, {"bandwidth", sigma},
           {"p", r.p}, {"q", r.q}},
       out);
  return kExitOk;
}

int cmd_shrink(EvalOptions o, std::ostream& out) {
  const auto records = io::read_dataset(o.data);
  const auto report = io::train_report_from_json(io::read_text(o.report));
  for (int i : report.test_indices)
    if (i < 0 || i >= static_cast<int>(records.size()))
      throw Error(ErrorCode::ValidationError, "report test index out of range for this dataset");
  const auto s = shrink_summary(report.params, records, report.test_indices);
  if (s.graphs == 0) throw Error(ErrorCode::ZeroInitialSubsetEnergy, "no test graph has a usable motif");
  emit(o, {{"model", std::string(models::to_string(report.family))}, {"boundary", s.boundary}, {"intra", s.intra},
           {"quotient", s.quotient()}, {"graphs", s.graphs}, {"skipped", s.skipped}},
       out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
};

void add_ingest(CLI::App& app, IngestOptions& o) {
  auto* c = app.add_subcommand("ingest", "Validate a graph-regression JSON-lines file and prepare it for training");
  c->add_option("--in", o.in, "Input file")->required();
  c->add_option("--out", o.out, "Output directory")->required();
  c->add_option("--seed", o.seed, "Split seed")->capture_default_str();
}

int cmd_ingest(const CLI::App& app, const CLI::App& sub, IngestOptions o, std::ostream& out) {
  o.seed = resolve_seed(o.seed);
  const auto records = io::ingest_graph_regression(o.in);
  // Regression targets carry no class; split on a constant label.
  const std::vector<int> labels(records.size(), 0);
  Rng rng = make_rng(o.seed, kSplitStream);
  const auto split = datagen::split_dataset(std::span<const int>(labels), {}, rng);
  const fs::path dir = o.out;
  io::write_dataset(dir / "dataset.jsonl", records);
  io::write_text(dir / "dataset.split.json", io::split_to_json(split) + "\n");
  write_snapshot(dir, app, sub, o.seed);
  out << records.size() << " records -> " << (dir / "dataset.jsonl").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string in;
  std::string out;
};

void add_report(CLI::App& app, ReportOptions& o) {
  auto* c = app.add_subcommand("report", "Summarize a train output directory per quadrant");
  c->add_option("--in", o.in, "Directory written by train")->required();
  c->add_option("--out", o.out, "Optional CSV output file");
}

int cmd_report(ReportOptions o, std::ostream& out) {
  const fs::path root = o.in;
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, "not a directory: " + o.in);
  // Sorted walk so the row order is stable.
  std::vector<fs::path> reports;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "metrics.json") reports.push_back(entry.path());
  std::sort(reports.begin(), reports.end());
  std::vector<RunResult> runs;
  for (const auto& path : reports) {
    RunResult r;
    r.metrics = io::metric_report_from_json(io::read_text(path));
    const auto q = quadrant_of(r.metrics.scenario);
    if (!q) continue;
    r.quadrant = *q;
    r.report = io::train_report_from_json(io::read_text(path.parent_path() / "report.json"));
    r.family = r.report.family;
    runs.push_back(std::move(r));
  }
  if (runs.empty()) throw Error(ErrorCode::ValidationError, "no quadrant metrics found under " + o.in);
  const std::string csv = summary_csv(summarize(runs));
  if (!o.out.empty()) io::write_text(o.out, csv);
  out << csv;
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Numerical:
      return kExitNumerical;
    case ErrorKind::Validation:
    case ErrorKind::Io:
      return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral dynamics and motif experiments on graph neural networks", "heteroflow"};
  app.set_config("--config", "", "INI configuration file; sections name subcommands");
  app.set_version_flag("--version", std::string(io::kToolVersion));
  app.require_subcommand(1);

  GenOptions gen;
  SplitOptions split;
  SimOptions sim;
  RegimeOptions regime;
  TrainOptions train;
  EvalOptions mmd;
  EvalOptions shrink;
  IngestOptions ingest;
  ReportOptions report;
  add_gen(app, gen);
  add_split(app, split);
  add_simulate(app, sim);
  add_regime(app, regime);
  add_train(app, train);
  add_eval(app, "eval-mmd", "MMD^2 between test embeddings of motif and motif-free graphs", mmd);
  add_eval(app, "shrink", "Boundary and intra-motif shrink ratios of a trained model", shrink);
  add_ingest(app, ingest);
  add_report(app, report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const CLI::App& sub = *app.get_subcommands().front();
    const std::string name = sub.get_name();
    if (name == "gen") return cmd_gen(app, sub, gen, out);
    if (name == "split") return cmd_split(app, sub, split, out);
    if (name == "simulate") return cmd_simulate(app, sub, sim, out);
    if (name == "regime") return cmd_regime(app, sub, regime, out);
    if (name == "train") return cmd_train(app, sub, train, out);
    if (name == "eval-mmd") return cmd_eval_mmd(mmd, out);
    if (name == "shrink") return cmd_shrink(shrink, out);
    if (name == "ingest") return cmd_ingest(app, sub, ingest, out);
    if (name == "report") return cmd_report(report, out);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace heteroflow::cli
