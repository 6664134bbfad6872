#include "rumnet/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rumnet/analysis.hpp"
#include "rumnet/dataio.hpp"
#include "rumnet/models.hpp"
#include "rumnet/synthdata.hpp"
#include "rumnet/text_io.hpp"
#include "rumnet/theory.hpp"
#include "rumnet/training.hpp"

namespace rumnet::cli {

namespace {

// Flag values that passed CLI11 but are semantically invalid.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ArchFlags {
  std::string model = "rumnet";
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t K = 5;
  std::size_t d_eps = 4;
  std::size_t d_nu = 4;

  void add(CLI::App* app, bool model_required) {
    auto* opt = app->add_option("--model", model, "mnl | tastenet | deepmnl | rumnet | vnn")
                    ->check(CLI::IsMember({"mnl", "tastenet", "deepmnl", "rumnet", "vnn"}));
    if (model_required) opt->required();
    app->add_option("--depth", depth, "hidden layers per network");
    app->add_option("--width", width, "units per hidden layer");
    app->add_option("--K", K, "latent samples per side (RUMnet)")->check(CLI::PositiveNumber);
    app->add_option("--d-eps", d_eps, "latent product attribute dimension");
    app->add_option("--d-nu", d_nu, "latent customer attribute dimension");
  }

  ModelArchitecture architecture(const Dataset& data) const {
    ModelArchitecture a;
    a.type = model_type_from_string(model);
    a.depth = depth;
    a.width = width;
    a.K = K;
    a.d_eps = d_eps;
    a.d_nu = d_nu;
    if (depth > 0 && width == 0) throw UsageError("--width must be positive when --depth > 0");
    if (a.type == ModelType::Vnn) {
      a.vnn_n = data.max_assortment();
      for (const auto& e : data.events) {
        if (e.size() != a.vnn_n) throw UsageError("vnn requires a uniform assortment size");
      }
    }
    return a;
  }
};

struct DataFlags {
  std::string events;
  std::string customers;

  void add(CLI::App* app) {
    app->add_option("--events", events, "long-format events CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--customers", customers, "customers CSV")->check(CLI::ExistingFile);
  }

  Dataset load() const { return load_long_csv(events, customers); }
};

struct TrainFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::size_t> patience;
  std::optional<double> tolerance;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "key=value TrainConfig file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed for splits, initialisation and shuffling");
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    app->add_option("--lr", learning_rate);
    app->add_option("--patience", patience);
    app->add_option("--tolerance", tolerance);
  }

  TrainConfig config() const {
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : TrainConfig::from_file(config_path);
    if (epochs) cfg.epochs = *epochs;
    if (batch_size) cfg.batch_size = *batch_size;
    if (learning_rate) cfg.learning_rate = *learning_rate;
    if (patience) cfg.patience = *patience;
    if (tolerance) cfg.tolerance = *tolerance;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw UsageError("--grid cells look like DEPTHxWIDTH, got '" + item + "'");
    try {
      cells.emplace_back(parse_uint(item.substr(0, x), "depth"), parse_uint(item.substr(x + 1), "width"));
    } catch (const FormatError& e) {
      throw UsageError(std::string("--grid: ") + e.what());
    }
    if (cells.back().first > 0 && cells.back().second == 0) {
      throw UsageError("--grid: width must be positive when depth > 0");
    }
  }
  if (cells.empty()) throw UsageError("--grid is empty");
  return cells;
}

std::vector<std::size_t> parse_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_uint(item, flag));
    } catch (const FormatError& e) {
      throw UsageError(e.what());
    }
    if (out.back() == 0) throw UsageError(std::string(flag) + " entries must be positive");
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RUMnet discrete choice toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth dataset");
  int setting = 1;
  std::size_t synth_T = 10000;
  std::size_t synth_kappa = 5;
  std::size_t synth_P = 50;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--setting", setting, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  synth->add_option("--T", synth_T, "number of events")->check(CLI::PositiveNumber);
  synth->add_option("--kappa", synth_kappa, "assortment size")->check(CLI::PositiveNumber);
  synth->add_option("--P", synth_P, "product universe size")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out, "events CSV path (sidecar at <out>.truth)")->required();

  // train
  auto* train = app.add_subcommand("train", "fit a model on a 70/15/15 split");
  ArchFlags train_arch;
  DataFlags train_data;
  TrainFlags train_flags;
  std::string out_model;
  std::string out_report;
  train_arch.add(train, true);
  train_data.add(train);
  train_flags.add(train);
  train->add_option("--out-model", out_model, "model file to write");
  train->add_option("--out-report", out_report, "per-epoch history CSV to write");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  std::string eval_model;
  DataFlags eval_data;
  double eval_tolerance = TrainConfig{}.tolerance;
  eval->add_option("--model-file", eval_model)->required()->check(CLI::ExistingFile);
  eval_data.add(eval);
  eval->add_option("--tolerance", eval_tolerance)->check(CLI::NonNegativeNumber);

  // cv
  auto* cv = app.add_subcommand("cv", "repeated 70/15/15 cross-validation over a grid");
  ArchFlags cv_arch;
  DataFlags cv_data;
  TrainFlags cv_flags;
  std::size_t cv_k = 10;
  std::string cv_grid;
  std::string cv_Ks;
  std::string cv_out;
  cv_arch.add(cv, true);
  cv_data.add(cv);
  cv_flags.add(cv);
  cv->add_option("--k", cv_k, "number of resampled splits")->check(CLI::Range(2, 1000000));
  cv->add_option("--grid", cv_grid, "comma-separated DEPTHxWIDTH cells, e.g. 0x0,1x3,2x5");
  cv->add_option("--Ks", cv_Ks, "comma-separated K values for rumnet, e.g. 2,5");
  cv->add_option("--out", cv_out, "summary CSV (default stdout)");

  // bound
  auto* bound = app.add_subcommand("bound", "generalisation and compact-representation bounds");
  BoundInputs b;
  std::optional<double> bound_M;
  std::string bound_model;
  double epsilon = 0.1;
  bound->add_option("--kappa", b.kappa)->required()->check(CLI::PositiveNumber);
  bound->add_option("--T", b.T)->required()->check(CLI::PositiveNumber);
  auto* m_opt = bound->add_option("--M", bound_M, "node 1-norm bound")->check(CLI::NonNegativeNumber);
  auto* mf_opt = bound->add_option("--model-file", bound_model, "measure M from a trained model")
                     ->check(CLI::ExistingFile);
  m_opt->excludes(mf_opt);
  bound->add_option("--ell", b.ell, "network depth");
  bound->add_option("--delta", b.delta)->check(CLI::Range(0.0, 1.0));
  bound->add_option("--c1", b.c1)->check(CLI::PositiveNumber);
  bound->add_option("--c2", b.c2)->check(CLI::PositiveNumber);
  bound->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "probability curves along one product attribute");
  std::string sweep_model;
  DataFlags sweep_data;
  SweepSpec sweep_spec;
  std::size_t sweep_event = 0;
  std::string sweep_out;
  sweep_cmd->add_option("--model-file", sweep_model)->required()->check(CLI::ExistingFile);
  sweep_data.add(sweep_cmd);
  sweep_cmd->add_option("--event-index", sweep_event, "base event (0-based)");
  sweep_cmd->add_option("--alt", sweep_spec.target_alternative, "target alternative (0-based)");
  sweep_cmd->add_option("--feature", sweep_spec.target_feature, "target feature (0-based)");
  sweep_cmd->add_option("--lo", sweep_spec.lo)->required();
  sweep_cmd->add_option("--hi", sweep_spec.hi)->required();
  sweep_cmd->add_option("--steps", sweep_spec.steps)->check(CLI::Range(2, 1000000));
  sweep_cmd->add_option("--out", sweep_out, "curve CSV (default stdout)");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "K-means customer types");
  DataFlags cluster_data;
  std::size_t cluster_k = 3;
  std::uint64_t cluster_seed = 0;
  std::size_t cluster_iter = 100;
  bool cluster_standardize = false;
  std::string cluster_out;
  cluster_data.add(cluster);
  cluster->add_option("--k", cluster_k)->check(CLI::PositiveNumber);
  cluster->add_option("--seed", cluster_seed);
  cluster->add_option("--max-iter", cluster_iter)->check(CLI::PositiveNumber);
  cluster->add_flag("--standardize", cluster_standardize, "z-score features before clustering");
  cluster->add_option("--out", cluster_out, "centroids CSV (default stdout)");

  std::vector<const char*> argv{"rumnet_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (synth->parsed()) {
      if (synth_kappa > synth_P) throw UsageError("--kappa must not exceed --P");
      Rng rng = derive_rng(synth_seed, 0x67u);
      const GroundTruth gt = draw_ground_truth(setting, synth_P, rng);
      const Dataset data = generate(gt, synth_T, synth_kappa, synth_seed);
      save_long_csv(data, synth_out, "");
      auto sidecar = open_out(synth_out + ".truth");
      write_ground_truth(sidecar, gt, synth_seed);
      out << "events=" << data.size() << "\nground_truth_loss=" << format_double(ground_truth_loss(gt, data))
          << "\nrandom_guess_loss=" << format_double(random_guess_loss(synth_kappa)) << '\n';
    } else if (train->parsed()) {
      const TrainConfig cfg = train_flags.config();
      const Dataset data = train_data.load();
      const ModelArchitecture arch = train_arch.architecture(data);
      const DataSplit split = split_703015(data, cfg.seed);
      Rng init_rng = derive_rng(cfg.seed, 0x1717u);
      ChoiceModel model = make_model(arch, data.d_x, data.d_z, init_rng);
      const FitReport report = fit(model, split.train, split.val, cfg, &split.test);
      if (!out_model.empty()) save_model(out_model, model);
      if (!out_report.empty()) {
        auto os = open_out(out_report);
        report.write_history_csv(os);
      }
      FitReport::write_summary_header(out);
      report.write_summary_row(out);
    } else if (eval->parsed()) {
      const ChoiceModel model = load_model(eval_model);
      const Dataset data = eval_data.load();
      const Evaluation ev = evaluate(model, data, eval_tolerance);
      out << "loss,accuracy\n" << format_double(ev.loss) << ',' << format_double(ev.accuracy) << '\n';
    } else if (cv->parsed()) {
      const TrainConfig cfg = cv_flags.config();
      const Dataset data = cv_data.load();
      const auto grid = cv_grid.empty() ? std::vector<std::pair<std::size_t, std::size_t>>{{cv_arch.depth, cv_arch.width}}
                                        : parse_grid(cv_grid);
      const ModelType type = model_type_from_string(cv_arch.model);
      const auto Ks = type != ModelType::Rumnet ? std::vector<std::size_t>{0}
                      : cv_Ks.empty()           ? std::vector<std::size_t>{cv_arch.K}
                                                : parse_list(cv_Ks, "--Ks");
      std::ofstream file;
      if (!cv_out.empty()) file = open_out(cv_out);
      std::ostream& os = cv_out.empty() ? out : file;
      os << "model,depth,width,K,folds,mean_train_loss,mean_val_loss,mean_test_loss,std_test_loss,"
            "mean_test_acc,std_test_acc\n";
      for (const auto& [depth, width] : grid) {
        for (std::size_t K : Ks) {
          ArchFlags cell = cv_arch;
          cell.depth = depth;
          cell.width = width;
          if (K > 0) cell.K = K;
          const auto reports = cross_validate(cell.architecture(data), data, cfg, cv_k);
          const MetricSummary s = aggregate(reports);
          os << cv_arch.model << ',' << depth << ',' << width << ',' << K << ',' << s.count << ','
             << format_double(s.mean.train_loss) << ',' << format_double(s.mean.val_loss) << ','
             << format_double(s.mean.test_loss) << ',' << format_double(s.stddev.test_loss) << ','
             << format_double(s.mean.test_acc) << ',' << format_double(s.stddev.test_acc) << '\n';
          os.flush();
        }
      }
    } else if (bound->parsed()) {
      if (!bound_M && bound_model.empty()) throw UsageError("bound needs --M or --model-file");
      b.M = bound_M ? *bound_M : load_model(bound_model).max_node_l1();
      b.validate();
      const GapTerms gap = generalization_gap_terms(b);
      out << "M=" << format_double(b.M) << '\n';
      out << "generalization_gap=" << format_double(gap.total()) << '\n';
      out << "gap_complexity_term=" << format_double(gap.complexity) << '\n';
      out << "gap_confidence_term=" << format_double(gap.confidence) << '\n';
      try {
        out << "compact_K=" << compact_K(epsilon, b) << '\n';
      } catch (const std::domain_error& e) {
        out << "compact_K=undefined  # " << e.what() << '\n';
      }
      out << "pmin_bound=" << format_double(pmin_bound(b.kappa, b.M)) << '\n';
    } else if (sweep_cmd->parsed()) {
      const ChoiceModel model = load_model(sweep_model);
      const Dataset data = sweep_data.load();
      if (sweep_event >= data.size()) throw UsageError("--event-index out of range");
      sweep_spec.base_event = data.events[sweep_event];
      const auto rows = sweep(model, sweep_spec);
      if (sweep_out.empty()) {
        write_sweep_csv(out, rows);
      } else {
        auto os = open_out(sweep_out);
        write_sweep_csv(os, rows);
      }
    } else if (cluster->parsed()) {
      const Dataset data = cluster_data.load();
      if (data.d_z == 0) throw UsageError("cluster needs customer features (--customers)");
      Points points;
      points.reserve(data.size());
      for (const auto& e : data.events) points.push_back(e.customer);
      Rng rng = derive_rng(cluster_seed, 0xc1u);
      const KMeansResult r = kmeans(cluster_standardize ? standardize(points) : points, cluster_k, rng, cluster_iter);
      if (cluster_out.empty()) {
        write_centroids_csv(out, r.centroids);
      } else {
        auto os = open_out(cluster_out);
        write_centroids_csv(os, r.centroids);
      }
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rumnet::cli
