#include "rumnet/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "rumnet/text_io.hpp"

namespace rumnet {

namespace {

constexpr std::array<double Metrics::*, 6> kMetricFields = {
    &Metrics::train_loss, &Metrics::val_loss, &Metrics::test_loss,
    &Metrics::train_acc,  &Metrics::val_acc,  &Metrics::test_acc,
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void shuffle_in_place(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be non-negative");
  if (patience == 0) throw std::invalid_argument("patience must be positive");
  if (patience > epochs) throw std::invalid_argument("patience must not exceed epochs");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw std::invalid_argument("adam_beta1 must be in [0,1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw std::invalid_argument("adam_beta2 must be in [0,1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "epochs") {
      epochs = parse_uint(value, key);
    } else if (key == "batch_size") {
      batch_size = parse_uint(value, key);
    } else if (key == "learning_rate") {
      learning_rate = parse_double(value, key);
    } else if (key == "patience") {
      patience = parse_uint(value, key);
    } else if (key == "tolerance") {
      tolerance = parse_double(value, key);
    } else if (key == "adam_beta1") {
      adam_beta1 = parse_double(value, key);
    } else if (key == "adam_beta2") {
      adam_beta2 = parse_double(value, key);
    } else if (key == "adam_eps") {
      adam_eps = parse_double(value, key);
    } else if (key == "seed") {
      seed = parse_uint(value, key);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const FormatError& e) {
    throw std::invalid_argument(e.what());
  }
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void FitReport::write_history_csv(std::ostream& os) const {
  os << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < val_history.size(); ++e) {
    os << e << ',' << format_double(train_history[e]) << ',' << format_double(val_history[e]) << '\n';
  }
}

void FitReport::write_summary_header(std::ostream& os) {
  os << "best_epoch,epochs_run,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc\n";
}

void FitReport::write_summary_row(std::ostream& os) const {
  os << best_epoch << ',' << val_history.size();
  for (auto field : kMetricFields) os << ',' << format_double(final.*field);
  os << '\n';
}

double choice_loss(std::span<const double> probs, std::size_t chosen,
                   const std::vector<bool>& available, double tolerance) {
  if (probs.size() != available.size()) {
    throw DimensionError("loss probabilities", available.size(), probs.size());
  }
  if (chosen >= probs.size() || !available[chosen]) {
    throw InvalidEvent("loss: chosen alternative " + std::to_string(chosen) + " is unavailable");
  }
  const auto kappa = static_cast<double>(std::count(available.begin(), available.end(), true));
  const double q = (probs[chosen] + tolerance) / (1.0 + kappa * tolerance);
  return -std::log(q);
}

std::size_t predict(std::span<const double> probs, const std::vector<bool>& available) {
  std::size_t best = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!available[i]) continue;
    if (best == probs.size() || probs[i] > probs[best]) best = i;
  }
  return best;
}

Evaluation evaluate(const ChoiceModel& model, const Dataset& data, double tolerance) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  ChoiceEvaluator ev(model);
  double loss = 0.0;
  std::size_t hits = 0;
  for (const auto& e : data.events) {
    const auto& p = ev.forward(e);
    loss += choice_loss(p, e.chosen, e.available, tolerance);
    if (predict(p, e.available) == e.chosen) ++hits;
  }
  const auto n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(hits) / n};
}

double dataset_loss(const ChoiceModel& model, const Dataset& data, double tolerance) {
  return evaluate(model, data, tolerance).loss;
}

double accuracy(const ChoiceModel& model, const Dataset& data) {
  return evaluate(model, data, 0.0).accuracy;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<std::span<double>>& params,
                const std::vector<std::span<double>>& grads) {
  if (params.size() != grads.size()) throw DimensionError("Adam parameter blocks", params.size(), grads.size());
  std::size_t total = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size()) {
      throw DimensionError("Adam block " + std::to_string(b), params[b].size(), grads[b].size());
    }
    total += params[b].size();
  }
  if (m_.empty()) {
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
  } else if (m_.size() != total) {
    throw DimensionError("Adam state", m_.size(), total);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    for (std::size_t i = 0; i < p.size(); ++i, ++k) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[i];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m_[k] / bc1;
      const double v_hat = v_[k] / bc2;
      p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

FitReport fit(ChoiceModel& model, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const Dataset* test) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (val.empty()) throw std::invalid_argument("fit: empty validation set");
  for (const Dataset* d : {&train, &val}) {
    if (d->d_x != model.d_x()) throw DimensionError("fit: dataset d_x", model.d_x(), d->d_x);
    if (d->d_z != model.d_z()) throw DimensionError("fit: dataset d_z", model.d_z(), d->d_z);
  }

  FitReport report;
  Adam adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  EarlyStopping<ChoiceModel> stopper(cfg.patience);
  ModelGradients grads(model);
  const auto params = model.parameters();
  const auto grad_views = grads.parameters();
  ChoiceEvaluator ev(model);
  std::vector<double> upstream;

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = derive_rng(cfg.seed, epoch);
    shuffle_in_place(order, rng);

    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.zero();
      double batch_loss = 0.0;
      for (std::size_t j = start; j < stop; ++j) {
        const ChoiceEvent& e = train.events[order[j]];
        const auto& p = ev.forward(e);
        const double l = choice_loss(p, e.chosen, e.available, cfg.tolerance);
        if (!std::isfinite(l)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch));
        }
        batch_loss += l;
        upstream.assign(e.size(), 0.0);
        upstream[e.chosen] = -scale / (p[e.chosen] + cfg.tolerance);
        ev.backward(upstream, grads);
      }
      epoch_loss += batch_loss;
      adam.step(params, grad_views);
    }
    report.train_history.push_back(epoch_loss / static_cast<double>(train.size()));
    const double val_loss = dataset_loss(model, val, cfg.tolerance);
    if (!std::isfinite(val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    report.val_history.push_back(val_loss);
    if (stopper.observe(val_loss, model)) break;
  }

  report.best_epoch = stopper.best_epoch();
  model = stopper.best();

  const Evaluation tr = evaluate(model, train, cfg.tolerance);
  const Evaluation va = evaluate(model, val, cfg.tolerance);
  report.final.train_loss = tr.loss;
  report.final.train_acc = tr.accuracy;
  report.final.val_loss = va.loss;
  report.final.val_acc = va.accuracy;
  if (test != nullptr && !test->empty()) {
    const Evaluation te = evaluate(model, *test, cfg.tolerance);
    report.final.test_loss = te.loss;
    report.final.test_acc = te.accuracy;
  }
  return report;
}

SplitIndices split_indices_703015(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("split: need at least 10 events, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, 0x5b11u);
  shuffle_in_place(order, rng);
  const std::size_t n_holdout = n * 15 / 100;
  const std::size_t n_train = n - 2 * n_holdout;
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_holdout));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_holdout), order.end());
  return s;
}

DataSplit split_703015(const Dataset& data, std::uint64_t seed) {
  const SplitIndices s = split_indices_703015(data.size(), seed);
  return {data.subset(s.train), data.subset(s.val), data.subset(s.test)};
}

std::vector<SplitIndices> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  std::vector<SplitIndices> out;
  out.reserve(k);
  for (std::size_t fold = 0; fold < k; ++fold) {
    Rng rng = derive_rng(seed, fold);
    out.push_back(split_indices_703015(n, rng()));
  }
  return out;
}

std::vector<DataSplit> kfold(const Dataset& data, std::size_t k, std::uint64_t seed) {
  std::vector<DataSplit> out;
  for (const auto& s : kfold_indices(data.size(), k, seed)) {
    out.push_back({data.subset(s.train), data.subset(s.val), data.subset(s.test)});
  }
  return out;
}

MetricSummary aggregate(std::span<const FitReport> reports) {
  MetricSummary out;
  out.count = reports.size();
  if (reports.empty()) return out;
  const auto n = static_cast<double>(reports.size());
  for (auto field : kMetricFields) {
    double mean = 0.0;
    for (const auto& r : reports) mean += r.final.*field;
    mean /= n;
    double ss = 0.0;
    for (const auto& r : reports) {
      const double d = r.final.*field - mean;
      ss += d * d;
    }
    out.mean.*field = mean;
    out.stddev.*field = reports.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return out;
}

std::vector<FitReport> cross_validate(const ModelArchitecture& arch, const Dataset& data,
                                      const TrainConfig& cfg, std::size_t k) {
  const auto splits = kfold_indices(data.size(), k, cfg.seed);
  std::vector<FitReport> reports;
  reports.reserve(k);
  for (std::size_t fold = 0; fold < k; ++fold) {
    const Dataset train = data.subset(splits[fold].train);
    const Dataset val = data.subset(splits[fold].val);
    const Dataset test = data.subset(splits[fold].test);
    Rng init_rng = derive_rng(cfg.seed, 0x1000u + fold);
    ChoiceModel model = make_model(arch, data.d_x, data.d_z, init_rng);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = init_rng();
    reports.push_back(fit(model, train, val, fold_cfg, &test));
  }
  return reports;
}

}  // namespace rumnet
