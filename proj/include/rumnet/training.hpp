#pragma once

// Empirical risk minimisation for choice models: minibatch Adam on the
// tolerance-renormalised negative log-likelihood with early stopping and
// best-epoch restoration, plus evaluation metrics and data splits.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumnet/choice_event.hpp"
#include "rumnet/models.hpp"

namespace rumnet {

// Defaults follow the synthetic-experiment column of the training protocol.
struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::size_t patience = 50;
  double tolerance = 0.0001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;

  // Sets one field by its name (the same names as the members). Throws
  // std::invalid_argument on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  // Plain-text key=value lines; blank lines and '#' comments ignored.
  static TrainConfig from_file(const std::string& path);
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Metrics {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;

  bool operator==(const Metrics&) const = default;
};

struct FitReport {
  std::vector<double> train_history;
  std::vector<double> val_history;
  std::size_t best_epoch = 0;
  Metrics final;

  void write_history_csv(std::ostream& os) const;
  static void write_summary_header(std::ostream& os);
  void write_summary_row(std::ostream& os) const;

  bool operator==(const FitReport&) const = default;
};

// -ln q_chosen with q_i = (p_i + tol) / (1 + kappa * tol) over the available
// alternatives (kappa = number available).
double choice_loss(std::span<const double> probs, std::size_t chosen,
                   const std::vector<bool>& available, double tolerance);

// Argmax over available alternatives, ties to the lowest index.
std::size_t predict(std::span<const double> probs, const std::vector<bool>& available);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const ChoiceModel& model, const Dataset& data, double tolerance);
double dataset_loss(const ChoiceModel& model, const Dataset& data, double tolerance);
double accuracy(const ChoiceModel& model, const Dataset& data);

class Adam {
 public:
  Adam(double learning_rate, double beta1, double beta2, double eps);

  // One bias-corrected update. The span lists must keep the same layout
  // across calls.
  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<double>>& grads);

  std::size_t steps() const noexcept { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Tracks the best validation loss and the state that produced it. A value
// counts as an improvement only if it is below best - 1e-12.
template <class Snapshot>
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records the epoch's validation loss; returns true when training should
  // stop (patience epochs without improvement).
  bool observe(double val_loss, const Snapshot& current) {
    const std::size_t epoch = epochs_seen_++;
    if (!best_ || val_loss < best_loss_ - 1e-12) {
      best_loss_ = val_loss;
      best_epoch_ = epoch;
      best_ = current;
      return false;
    }
    return epoch - best_epoch_ >= patience_;
  }

  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }
  const Snapshot& best() const { return best_.value(); }
  bool has_best() const noexcept { return best_.has_value(); }

 private:
  std::size_t patience_;
  std::size_t epochs_seen_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  std::optional<Snapshot> best_;
};

// Trains `model` in place and restores the best-validation parameters. If
// `test` is given its loss/accuracy are filled into the report.
FitReport fit(ChoiceModel& model, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const Dataset* test = nullptr);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct DataSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Random 70/15/15 partition. Validation and test sizes are floor(0.15 n);
// the remainder goes to training.
SplitIndices split_indices_703015(std::size_t n, std::uint64_t seed);
DataSplit split_703015(const Dataset& data, std::uint64_t seed);

// k independently seeded 70/15/15 resamplings.
std::vector<SplitIndices> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed);
std::vector<DataSplit> kfold(const Dataset& data, std::size_t k, std::uint64_t seed);

struct MetricSummary {
  Metrics mean;
  Metrics stddev;
  std::size_t count = 0;
};

// Per-metric mean and sample standard deviation (0 for a single report).
MetricSummary aggregate(std::span<const FitReport> reports);

// Fits a fresh model of the given architecture on each of k resamplings
// (restoring the best epoch per split) and returns the per-split reports.
std::vector<FitReport> cross_validate(const ModelArchitecture& arch, const Dataset& data,
                                      const TrainConfig& cfg, std::size_t k);

}  // namespace rumnet
