#include "abstain/cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"
#include "abstain/common/strings.hpp"
#include "abstain/core/dataset_io.hpp"
#include "abstain/core/split.hpp"
#include "abstain/ensemble/fusion.hpp"
#include "abstain/metrics/metrics.hpp"
#include "abstain/plot/svg.hpp"
#include "abstain/scores.hpp"
#include "abstain/selector/checkpoint.hpp"
#include "abstain/selector/train.hpp"
#include "abstain/synth/synth.hpp"
#include "abstain/verifier/client.hpp"
#include "abstain/verifier/mock_server.hpp"

namespace abstain::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void configure_logging() {
  const char* level = std::getenv("ABSTAIN_KIT_LOG");
  if (!level) {
    spdlog::set_level(spdlog::level::warn);
    return;
  }
  const std::string s = to_lower(level);
  if (s == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (s == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (s == "warn" || s == "warning") {
    spdlog::set_level(spdlog::level::warn);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

// Optional pipeline config file; subcommand flags override its values.
struct PipelineConfig {
  json raw = json::object();

  static PipelineConfig load(const std::string& path) {
    PipelineConfig config;
    if (path.empty()) return config;
    try {
      config.raw = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw ValidationError("config parse error (" + path + "): " + e.what());
    }
    return config;
  }

  template <typename T>
  T value(const std::string& key, const T& fallback) const {
    return raw.value(key, fallback);
  }

  json section(const std::string& key) const {
    return raw.contains(key) ? raw.at(key) : json::object();
  }
};

core::SplitSpec split_spec_from(const json& section) {
  core::SplitSpec spec;
  spec.train_fraction = section.value("train_fraction", spec.train_fraction);
  spec.val_fraction = section.value("val_fraction", spec.val_fraction);
  spec.seed = section.value("seed", spec.seed);
  return spec;
}

std::vector<core::FeatureRecord> subset_records(
    const std::vector<core::FeatureRecord>& records,
    const std::vector<std::string>& ids) {
  std::map<std::string, const core::FeatureRecord*> by_id;
  for (const auto& rec : records) by_id[rec.id] = &rec;
  std::vector<core::FeatureRecord> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::vector<core::FeatureRecord> select_subset(const core::Dataset& dataset,
                                               const std::string& subset,
                                               const core::SplitSpec& spec) {
  if (subset == "all") return dataset.records;
  const core::SplitResult split = core::split_dataset(dataset.records, spec);
  if (subset == "train") return subset_records(dataset.records, split.train_ids);
  if (subset == "val") return subset_records(dataset.records, split.val_ids);
  if (subset == "test") return subset_records(dataset.records, split.test_ids);
  throw ValidationError("unknown subset: " + subset);
}

void write_labels_csv(const std::vector<core::FeatureRecord>& records,
                      const fs::path& path) {
  std::string out = "id,accuracy\n";
  for (const auto& rec : records) {
    out += rec.id;
    out += ',';
    out += fmt_double(rec.accuracy);
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<metrics::ScoredSample> join_samples(const ScoreSet& scores,
                                                const std::string& column,
                                                const ScoreSet& labels) {
  const std::vector<double>& confidence = scores.column(column);
  std::vector<metrics::ScoredSample> samples;
  samples.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::string& id = scores.ids()[i];
    samples.push_back({id, confidence[i], labels.value("accuracy", id)});
  }
  metrics::validate_samples(samples);
  return samples;
}

json report_to_json(const metrics::EvaluationReport& report, const std::string& column) {
  json curve = json::array();
  for (const auto& p : report.curve) {
    curve.push_back(
        {{"threshold", p.threshold}, {"coverage", p.coverage}, {"risk", p.risk}});
  }
  json cov_at = json::object();
  for (const auto& [budget, coverage] : report.cov_at) {
    cov_at[fmt_double(budget)] = coverage;
  }
  return json{{"column", column},
              {"n_samples", report.n_samples},
              {"risk_mode",
               report.risk_mode == metrics::RiskMode::kSoft ? "soft" : "binarized"},
              {"auc100", report.auc100},
              {"cov_at", cov_at},
              {"phi_c", report.phi_c},
              {"chosen_threshold", report.chosen_threshold},
              {"cost", report.cost},
              {"curve", curve}};
}

void write_curve_csv(const std::vector<metrics::RiskCoveragePoint>& curve,
                     const fs::path& path) {
  std::string out = "threshold,coverage,risk\n";
  for (const auto& p : curve) {
    out += fmt_double(p.threshold);
    out += ',';
    out += fmt_double(p.coverage);
    out += ',';
    out += fmt_double(p.risk);
    out += '\n';
  }
  atomic_write_file(path, out);
}

metrics::RiskMode risk_mode_from_string(const std::string& s) {
  if (s == "soft") return metrics::RiskMode::kSoft;
  if (s == "binarized") return metrics::RiskMode::kBinarized;
  throw ValidationError("unknown risk mode: " + s);
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const PipelineConfig& config, const std::string& out_dir,
              std::uint64_t seed, bool seed_set, int n, bool n_set,
              std::ostream& out) {
  const json section = config.section("synth");
  synth::SynthConfig sc;
  sc.n_samples = n_set ? n : section.value("n_samples", sc.n_samples);
  sc.d_h = section.value("d_h", sc.d_h);
  sc.d_q = section.value("d_q", sc.d_q);
  sc.d_a = section.value("d_a", sc.d_a);
  if (section.contains("class_map"))
    sc.class_map = core::ClassMap(section.at("class_map").get<std::vector<double>>());
  if (section.contains("prior"))
    sc.prior = section.at("prior").get<std::vector<double>>();
  sc.signal_strength = section.value("signal_strength", sc.signal_strength);
  sc.noise_scale = section.value("noise_scale", sc.noise_scale);
  sc.seed = seed_set ? seed : section.value("seed", sc.seed);
  if (section.contains("encoding"))
    sc.encoding = core::feature_encoding_from_string(section.at("encoding"));

  const synth::SynthResult result = synth::generate_synthetic(sc);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  core::write_dataset(result.dataset, dir / "manifest.json", dir / "records.jsonl");

  std::vector<std::string> ids;
  for (const auto& rec : result.dataset.records) ids.push_back(rec.id);
  ScoreSet oracle(ids);
  oracle.add_column("oracle", result.oracle);
  oracle.save_csv(dir / "oracle.csv");
  write_labels_csv(result.dataset.records, dir / "labels.csv");

  std::map<int, std::size_t> class_counts;
  for (const auto& rec : result.dataset.records) ++class_counts[rec.class_index];
  json counts = json::object();
  for (const auto& [cls, count] : class_counts) counts[std::to_string(cls)] = count;

  out << json{{"command", "synth"},
              {"out_dir", dir.string()},
              {"records", result.dataset.records.size()},
              {"seed", sc.seed},
              {"class_counts", counts}}
             .dump()
      << "\n";
  return 0;
}

// --------------------------------------------------------------- ingest ----

int cmd_ingest(const std::string& manifest, const std::string& records,
               const std::string& out_dir, std::ostream& out) {
  const core::Dataset dataset = core::ingest_records(manifest, records);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_labels_csv(dataset.records, fs::path(out_dir) / "labels.csv");
  }
  out << json{{"command", "ingest"},
              {"records", dataset.records.size()},
              {"d_h", dataset.manifest.d_h},
              {"d_q", dataset.manifest.d_q},
              {"d_a", dataset.manifest.d_a},
              {"classes", dataset.manifest.class_map.size()},
              {"encoding", core::to_string(dataset.manifest.feature_encoding)}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- train ----

int cmd_train(const PipelineConfig& config, const std::string& manifest,
              const std::string& records, const std::string& out_dir,
              const std::string& arch, std::uint64_t seed, bool seed_set,
              int epochs, bool epochs_set, std::ostream& out) {
  const core::Dataset dataset = core::ingest_records(manifest, records);

  selector::TrainConfig tc;
  const json selectors = config.section("selectors");
  if (selectors.contains(arch)) tc = selector::train_config_from_json(selectors.at(arch));
  tc.architecture = selector::architecture_from_string(arch);
  if (seed_set) tc.seed = seed;
  if (epochs_set) tc.epochs = epochs;

  const core::SplitSpec split_spec = split_spec_from(config.section("split"));
  const core::SplitResult split = core::split_dataset(dataset.records, split_spec);
  if (split.val_ids.empty())
    throw ValidationError("validation split is empty; adjust split fractions");
  const auto train_records = subset_records(dataset.records, split.train_ids);
  const auto val_records = subset_records(dataset.records, split.val_ids);

  spdlog::info("training {} on {} records ({} validation)", arch,
               train_records.size(), val_records.size());
  auto [model, report] =
      selector::train_selector(train_records, val_records, tc, dataset.manifest.class_map);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path ckpt = dir / (arch + ".ckpt");
  selector::save_checkpoint(model, ckpt);
  atomic_write_file(dir / (arch + "_report.json"),
                    selector::train_report_to_json(report).dump(2) + "\n");

  out << json{{"command", "train"},
              {"architecture", arch},
              {"epochs", tc.epochs},
              {"selected_epoch", report.selected_epoch},
              {"val_metric", report.val_metric[static_cast<std::size_t>(
                                 report.selected_epoch)]},
              {"checkpoint", ckpt.string()},
              {"param_checksum", report.param_checksum}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- score ----

int cmd_score(const PipelineConfig& config, const std::string& manifest,
              const std::string& records, const std::vector<std::string>& checkpoints,
              std::vector<std::string> columns, const std::string& out_csv,
              const std::string& subset, std::ostream& out) {
  if (checkpoints.empty()) throw ValidationError("score needs at least one --checkpoint");
  const core::Dataset dataset = core::ingest_records(manifest, records);
  const core::SplitSpec split_spec = split_spec_from(config.section("split"));
  const auto rows = select_subset(dataset, subset, split_spec);
  if (rows.empty()) throw ValidationError("selected subset is empty");

  std::vector<std::string> ids;
  for (const auto& rec : rows) ids.push_back(rec.id);
  ScoreSet scores(ids);

  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const selector::SelectorModel model = selector::load_checkpoint(checkpoints[i]);
    if (!(model.class_map == dataset.manifest.class_map))
      throw ValidationError("checkpoint class map differs from dataset manifest");
    const std::string column =
        i < columns.size() ? columns[i] : selector::to_string(model.architecture());
    scores.add_column(column, model.predict_confidence(rows));
  }
  scores.save_csv(out_csv);

  out << json{{"command", "score"},
              {"rows", scores.size()},
              {"columns", scores.column_names()},
              {"subset", subset},
              {"out", out_csv}}
             .dump()
      << "\n";
  return 0;
}

// --------------------------------------------------------------- verify ----

int cmd_verify(const PipelineConfig& config, const std::string& manifest,
               const std::string& records, const std::string& out_csv,
               const std::string& column, const std::string& endpoint,
               std::uint64_t mock_seed, bool use_mock, const std::string& mock_table,
               int timeout_ms, int parallel, int retries, const std::string& match_mode,
               const std::string& subset, bool append, std::ostream& out) {
  const core::Dataset dataset = core::ingest_records(manifest, records);
  const core::SplitSpec split_spec = split_spec_from(config.section("split"));
  const auto rows = select_subset(dataset, subset, split_spec);
  const verifier::VerificationDataset vds = verifier::build_verification_dataset(rows);

  verifier::VerifierClientConfig vc;
  const json section = config.section("verifier");
  vc.endpoint = endpoint.empty() ? section.value("endpoint", std::string()) : endpoint;
  vc.timeout_ms = timeout_ms > 0 ? timeout_ms : section.value("timeout_ms", vc.timeout_ms);
  vc.max_in_flight = parallel > 0 ? parallel : section.value("max_in_flight", vc.max_in_flight);
  vc.retries = retries >= 0 ? retries : section.value("retries", vc.retries);
  vc.token_match_mode = verifier::token_match_mode_from_string(
      !match_mode.empty() ? match_mode
                          : section.value("token_match_mode",
                                          std::string("case-insensitive-trimmed")));

  std::unique_ptr<verifier::VerdictEndpoint> ep;
  if (use_mock || vc.endpoint.empty()) {
    auto mock = std::make_unique<verifier::MockVerifier>(mock_seed);
    if (!mock_table.empty()) {
      const ScoreSet table = ScoreSet::load_csv(mock_table);
      const auto& p = table.column("p_correct");
      for (std::size_t i = 0; i < table.size(); ++i)
        mock->set_correct_prob(table.ids()[i], p[i]);
    }
    ep = std::move(mock);
  } else {
    ep = std::make_unique<verifier::HttpVerifierEndpoint>(vc);
  }

  const verifier::VerifyOutcome outcome = verifier::verify_batch(vds.examples, *ep, vc);

  ScoreSet scores = [&] {
    if (append && fs::exists(out_csv)) {
      ScoreSet existing = ScoreSet::load_csv(out_csv);
      std::vector<std::string> ids;
      for (const auto& ex : vds.examples) ids.push_back(ex.id);
      if (ids != existing.ids())
        throw ValidationError("existing score set ids do not match the verify subset");
      return existing;
    }
    std::vector<std::string> ids;
    for (const auto& ex : vds.examples) ids.push_back(ex.id);
    return ScoreSet(ids);
  }();
  scores.add_column(column, outcome.scores);
  scores.save_csv(out_csv);

  out << json{{"command", "verify"},
              {"rows", vds.examples.size()},
              {"column", column},
              {"out", out_csv},
              {"flagged_absent_token", outcome.flagged_ids.size()},
              {"verdicts",
               {{"correct", vds.n_correct},
                {"uncertain", vds.n_uncertain},
                {"wrong", vds.n_wrong}}}}
             .dump()
      << "\n";
  return 0;
}

// ----------------------------------------------------------------- fuse ----

int cmd_fuse(const PipelineConfig& config, const std::string& scores_csv,
             const std::string& plan_path, const std::string& out_csv,
             const std::string& column_arg, std::ostream& out) {
  const std::string column = column_arg.empty() ? "fused" : column_arg;
  ScoreSet scores = ScoreSet::load_csv(scores_csv);
  ensemble::FusionPlan plan;
  if (!plan_path.empty()) {
    plan = ensemble::FusionPlan::load_json(plan_path);
  } else if (config.raw.contains("fusion")) {
    const json section = config.section("fusion");
    plan.sources = section.at("sources").get<std::vector<std::string>>();
    if (section.contains("stage_weights"))
      plan.stage_weights = section.at("stage_weights").get<std::vector<double>>();
    else
      plan.stage_weights.assign(plan.sources.size() - 1, 0.5);
  } else {
    plan = ensemble::FusionPlan::default_plan();
  }
  plan.validate();

  scores.add_column(column, ensemble::fuse_cascade(scores, plan));
  scores.save_csv(out_csv.empty() ? scores_csv : out_csv);

  out << json{{"command", "fuse"},
              {"column", column},
              {"sources", plan.sources},
              {"effective_weights", ensemble::effective_weights(plan)},
              {"out", out_csv.empty() ? scores_csv : out_csv}}
             .dump()
      << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const PipelineConfig& config, const std::string& scores_csv,
             const std::string& column, const std::string& labels_csv,
             const std::string& out_dir, double threshold, double cost, bool cost_set,
             std::string budgets_arg, const std::string& risk_mode, bool svg,
             std::ostream& out) {
  const ScoreSet scores = ScoreSet::load_csv(scores_csv);
  const ScoreSet labels = ScoreSet::load_csv(labels_csv);
  const auto samples = join_samples(scores, column, labels);

  const double final_cost = cost_set ? cost : config.value("cost", 100.0);
  std::vector<double> budgets;
  if (!budgets_arg.empty()) {
    for (const std::string& field : split_csv_line(budgets_arg))
      budgets.push_back(std::stod(field));
  } else if (config.raw.contains("budgets")) {
    budgets = config.raw.at("budgets").get<std::vector<double>>();
  } else {
    budgets = {0.005, 0.01, 0.02, 0.05};
  }

  const metrics::EvaluationReport report = metrics::evaluate(
      samples, final_cost, budgets, threshold, risk_mode_from_string(risk_mode));

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path report_path = dir / ("report_" + column + ".json");
  atomic_write_file(report_path, report_to_json(report, column).dump(2) + "\n");
  write_curve_csv(report.curve, dir / ("curve_" + column + ".csv"));
  if (svg) plot::write_risk_coverage_svg(report.curve, dir / ("curve_" + column + ".svg"));

  json cov_at = json::object();
  for (const auto& [budget, coverage] : report.cov_at)
    cov_at[fmt_double(budget)] = coverage;
  out << json{{"command", "eval"},
              {"column", column},
              {"n_samples", report.n_samples},
              {"auc100", report.auc100},
              {"phi_c", report.phi_c},
              {"chosen_threshold", report.chosen_threshold},
              {"cov_at", cov_at},
              {"report", report_path.string()}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- sweep ----

int cmd_sweep(const PipelineConfig& config, const std::string& scores_csv,
              const std::string& column, const std::string& labels_csv, double cost,
              bool cost_set, std::ostream& out) {
  const ScoreSet scores = ScoreSet::load_csv(scores_csv);
  const ScoreSet labels = ScoreSet::load_csv(labels_csv);
  const auto samples = join_samples(scores, column, labels);
  const double final_cost = cost_set ? cost : config.value("cost", 100.0);
  const metrics::SweepResult result = metrics::sweep_threshold(samples, final_cost);
  out << json{{"command", "sweep"},
              {"column", column},
              {"cost", final_cost},
              {"threshold", result.threshold},
              {"phi_c", result.phi}}
             .dump()
      << "\n";
  return 0;
}

// ----------------------------------------------------------- mock-serve ----

int cmd_mock_serve(const std::string& host, int port, std::uint64_t seed,
                   const std::string& table, std::ostream& out) {
  auto mock = std::make_shared<verifier::MockVerifier>(seed);
  if (!table.empty()) {
    const ScoreSet t = ScoreSet::load_csv(table);
    const auto& p = t.column("p_correct");
    for (std::size_t i = 0; i < t.size(); ++i)
      mock->set_correct_prob(t.ids()[i], p[i]);
  }
  verifier::MockVerifierServer server(std::move(mock));
  out << json{{"command", "mock-serve"}, {"host", host}, {"port", port}}.dump() << "\n";
  out.flush();
  server.listen(host, port);
  return 0;
}

// ----------------------------------------------------------------- plot ----

int cmd_plot(const std::string& curve_csv, const std::string& out_svg,
             std::ostream& out) {
  std::istringstream in(read_file(curve_csv));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"threshold", "coverage",
                                                              "risk"})
    throw ValidationError("curve file must have header threshold,coverage,risk");
  std::vector<metrics::RiskCoveragePoint> curve;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw ValidationError("bad curve row: " + line);
    curve.push_back({std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2])});
  }
  plot::write_risk_coverage_svg(curve, out_svg);
  out << json{{"command", "plot"}, {"out", out_svg}}.dump() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out) {
  configure_logging();

  CLI::App app{"Selective-prediction toolkit: train confidence selectors, verify "
               "answers cross-model, fuse scores and evaluate abstention policies"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config JSON")->configurable(false);

  // Shared option storage; each subcommand binds the subset it uses.
  std::string manifest, records, out_dir, out_csv, scores_csv, labels_csv, plan_path;
  std::string arch = "mlp", column, subset = "all", endpoint, mock_table, match_mode;
  std::string risk_mode = "soft", host = "127.0.0.1", curve_csv, budgets_arg;
  std::vector<std::string> checkpoints, columns;
  std::uint64_t seed = 0, mock_seed = 0;
  int n_samples = 0, epochs = 0, timeout_ms = 0, parallel = 0, retries = -1, port = 0;
  double threshold = std::numeric_limits<double>::quiet_NaN(), cost = 100.0;
  bool svg = false, append = false;

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", seed, "Generator seed");
  synth_cmd->add_option("-n,--n", n_samples, "Sample count");

  CLI::App* ingest_cmd = app.add_subcommand("ingest", "Validate and summarize a dataset");
  ingest_cmd->add_option("--manifest", manifest, "Manifest JSON")->required();
  ingest_cmd->add_option("--records", records, "Records JSONL")->required();
  ingest_cmd->add_option("--out", out_dir, "Optional directory for labels.csv");

  CLI::App* train_cmd = app.add_subcommand("train", "Train a confidence selector");
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--records", records)->required();
  train_cmd->add_option("--out", out_dir, "Checkpoint/report directory")->required();
  train_cmd->add_option("--arch", arch, "mlp or transformer");
  train_cmd->add_option("--seed", seed, "Training seed");
  train_cmd->add_option("--epochs", epochs, "Epoch count");

  CLI::App* score_cmd = app.add_subcommand("score", "Emit selector confidences");
  score_cmd->add_option("--manifest", manifest)->required();
  score_cmd->add_option("--records", records)->required();
  score_cmd->add_option("--checkpoint", checkpoints, "Checkpoint file(s)")->required();
  score_cmd->add_option("--column", columns, "Column name per checkpoint");
  score_cmd->add_option("--out", out_csv, "Scores CSV")->required();
  score_cmd->add_option("--subset", subset, "all, train, val or test");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Score answers through a verifier endpoint");
  verify_cmd->add_option("--manifest", manifest)->required();
  verify_cmd->add_option("--records", records)->required();
  verify_cmd->add_option("--out", out_csv, "Scores CSV")->required();
  verify_cmd->add_option("--column", column, "Score column name")->required();
  verify_cmd->add_option("--endpoint", endpoint, "Verifier URL (http://host:port)");
  auto* mock_seed_opt =
      verify_cmd->add_option("--mock-seed", mock_seed, "Use the in-process mock");
  verify_cmd->add_option("--mock-table", mock_table, "Mock override CSV (id,p_correct)");
  verify_cmd->add_option("--timeout", timeout_ms, "Request timeout (ms)");
  verify_cmd->add_option("--parallel", parallel, "Max in-flight requests");
  verify_cmd->add_option("--retries", retries, "Retry count");
  verify_cmd->add_option("--match", match_mode, "exact or case-insensitive-trimmed");
  verify_cmd->add_option("--subset", subset, "all, train, val or test");
  verify_cmd->add_flag("--append", append, "Add the column to an existing CSV");

  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse score columns by cascade");
  fuse_cmd->add_option("--scores", scores_csv, "Input scores CSV")->required();
  fuse_cmd->add_option("--plan", plan_path, "Fusion plan JSON");
  fuse_cmd->add_option("--out", out_csv, "Output CSV (default: in place)");
  fuse_cmd->add_option("--column", column, "Fused column name (default: fused)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Risk-coverage evaluation report");
  eval_cmd->add_option("--scores", scores_csv)->required();
  eval_cmd->add_option("--column", column, "Score column")->required();
  eval_cmd->add_option("--labels", labels_csv, "Accuracy CSV (id,accuracy)")->required();
  eval_cmd->add_option("--out", out_dir, "Report directory")->required();
  eval_cmd->add_option("--threshold", threshold, "Abstention threshold (default: sweep)");
  auto* eval_cost = eval_cmd->add_option("--cost", cost, "Wrong-answer cost");
  eval_cmd->add_option("--budgets", budgets_arg, "Comma-separated risk budgets");
  eval_cmd->add_option("--risk-mode", risk_mode, "soft or binarized");
  eval_cmd->add_flag("--svg", svg, "Also write an SVG plot");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Pick the best abstention threshold");
  sweep_cmd->add_option("--scores", scores_csv)->required();
  sweep_cmd->add_option("--column", column)->required();
  sweep_cmd->add_option("--labels", labels_csv)->required();
  auto* sweep_cost = sweep_cmd->add_option("--cost", cost, "Wrong-answer cost");

  CLI::App* serve_cmd = app.add_subcommand("mock-serve", "Run the mock verifier server");
  serve_cmd->add_option("--host", host, "Bind host");
  serve_cmd->add_option("--port", port, "Bind port")->required();
  serve_cmd->add_option("--seed", mock_seed, "Mock seed");
  serve_cmd->add_option("--table", mock_table, "Override CSV (id,p_correct)");

  CLI::App* plot_cmd = app.add_subcommand("plot", "Render a curve CSV as SVG");
  plot_cmd->add_option("--curve", curve_csv, "Curve CSV")->required();
  plot_cmd->add_option("--out", out_csv, "SVG path")->required();

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << app.help();
    spdlog::error("argument error: {}", e.what());
    return 1;
  }

  try {
    const PipelineConfig config = PipelineConfig::load(config_path);
    if (synth_cmd->parsed())
      return cmd_synth(config, out_dir, seed, synth_cmd->count("--seed") > 0, n_samples,
                       synth_cmd->count("--n") > 0, out);
    if (ingest_cmd->parsed()) return cmd_ingest(manifest, records, out_dir, out);
    if (train_cmd->parsed())
      return cmd_train(config, manifest, records, out_dir, arch, seed,
                       train_cmd->count("--seed") > 0, epochs,
                       train_cmd->count("--epochs") > 0, out);
    if (score_cmd->parsed())
      return cmd_score(config, manifest, records, checkpoints, columns, out_csv, subset,
                       out);
    if (verify_cmd->parsed())
      return cmd_verify(config, manifest, records, out_csv, column, endpoint, mock_seed,
                        mock_seed_opt->count() > 0, mock_table, timeout_ms, parallel,
                        retries, match_mode, subset, append, out);
    if (fuse_cmd->parsed())
      return cmd_fuse(config, scores_csv, plan_path, out_csv, column, out);
    if (eval_cmd->parsed())
      return cmd_eval(config, scores_csv, column, labels_csv, out_dir, threshold, cost,
                      eval_cost->count() > 0, budgets_arg, risk_mode, svg, out);
    if (sweep_cmd->parsed())
      return cmd_sweep(config, scores_csv, column, labels_csv, cost,
                       sweep_cost->count() > 0, out);
    if (serve_cmd->parsed()) return cmd_mock_serve(host, port, mock_seed, mock_table, out);
    if (plot_cmd->parsed()) return cmd_plot(curve_csv, out_csv, out);
    throw ValidationError("no subcommand given");
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    out << json{{"error", e.what()}, {"kind", "io"}}.dump() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    out << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    out << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 1;
  }
}

}  // namespace abstain::cli
