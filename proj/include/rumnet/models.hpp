#pragma once

// Choice models mapping a ChoiceEvent to a probability vector over its
// assortment. RUMnet averages softmax probabilities over K x K samples of
// latent product/customer attributes; the baselines are degenerate members
// of the same interface (one sample, S = 1).

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "rumnet/choice_event.hpp"
#include "rumnet/netcore.hpp"
#include "rumnet/random.hpp"

namespace rumnet {

// u_i = beta' x_i
struct MnlModel {
  std::vector<double> beta;

  bool operator==(const MnlModel&) const = default;
};

// u_i = beta' x_i + taste(z)' x_i
struct TasteNetModel {
  std::vector<double> beta;
  DenseNetwork taste;

  bool operator==(const TasteNetModel&) const = default;
};

// u_i = net(x_i ++ z)
struct DeepMnlModel {
  DenseNetwork net;

  bool operator==(const DeepMnlModel&) const = default;
};

// u^{k1,k2}_i = utility(x_i ++ eps_{k1}(x_i) ++ z ++ nu_{k2}(z))
struct RumnetModel {
  DenseNetwork utility;
  std::vector<DenseNetwork> eps_nets;
  std::vector<DenseNetwork> nu_nets;
  std::size_t K = 1;
  std::size_t d_eps = 0;
  std::size_t d_nu = 0;

  bool operator==(const RumnetModel&) const = default;
};

// (u_1..u_n) = net(x_1 ++ .. ++ x_n ++ z); bound to a fixed cardinality n.
struct VnnModel {
  DenseNetwork net;
  std::size_t n = 0;

  bool operator==(const VnnModel&) const = default;
};

enum class ModelType { Mnl, TasteNet, DeepMnl, Rumnet, Vnn };

const char* to_string(ModelType t);
ModelType model_type_from_string(const std::string& name);

class ChoiceModel {
 public:
  using Kind = std::variant<MnlModel, TasteNetModel, DeepMnlModel, RumnetModel, VnnModel>;

  // Validates every constituent's dimensions against (d_x, d_z).
  ChoiceModel(Kind kind, std::size_t d_x, std::size_t d_z);

  ModelType type() const noexcept { return static_cast<ModelType>(kind_.index()); }
  std::size_t d_x() const noexcept { return d_x_; }
  std::size_t d_z() const noexcept { return d_z_; }

  const Kind& kind() const noexcept { return kind_; }
  Kind& kind() noexcept { return kind_; }

  template <class T>
  const T& as() const {
    return std::get<T>(kind_);
  }
  template <class T>
  T& as() {
    return std::get<T>(kind_);
  }

  // Number of latent samples S (K^2 for RUMnet, 1 otherwise).
  std::size_t sample_count() const noexcept;

  // beta for MNL/TasteNet, empty otherwise.
  std::span<double> linear_coefficients() noexcept;
  std::span<const double> linear_coefficients() const noexcept;

  // Constituent networks in canonical order: TasteNet {taste}; DeepMNL
  // {net}; RUMnet {utility, eps_1..eps_K, nu_1..nu_K}; VNN {net}.
  std::vector<DenseNetwork*> networks();
  std::vector<const DenseNetwork*> networks() const;

  // Linear coefficients followed by every network's layers.
  std::vector<std::span<double>> parameters();
  std::size_t parameter_count() const;

  // Largest node 1-norm over all constituent networks (and beta as one node).
  double max_node_l1() const;

  bool operator==(const ChoiceModel&) const = default;

 private:
  void validate() const;

  Kind kind_;
  std::size_t d_x_ = 0;
  std::size_t d_z_ = 0;
};

// Gradient storage with the layout of ChoiceModel::parameters().
struct ModelGradients {
  std::vector<double> linear;
  std::vector<GradientBuffer> nets;

  explicit ModelGradients(const ChoiceModel& model);

  void zero();
  std::vector<std::span<double>> parameters();
};

struct ModelArchitecture {
  ModelType type = ModelType::Rumnet;
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t K = 5;
  std::size_t d_eps = 4;
  std::size_t d_nu = 4;
  // VNN only: fixed assortment size.
  std::size_t vnn_n = 0;
  Activation activation = Activation::Elu;
};

// Builds a model with freshly initialised networks (beta starts at zero).
// Every constituent network uses the architecture's (depth, width).
ChoiceModel make_model(const ModelArchitecture& arch, std::size_t d_x, std::size_t d_z, Rng& rng);

// Softmax of u over available entries; unavailable entries get 0. Throws
// InvalidEvent if nothing is available.
void masked_softmax(std::span<const double> u, const std::vector<bool>& available,
                    std::span<double> out);

// Evaluates one event at a time and keeps the intermediate state needed to
// back-propagate through it. The model must outlive the evaluator and must
// not be mutated between forward() and backward(); the event passed to
// forward() must outlive the matching backward().
class ChoiceEvaluator {
 public:
  explicit ChoiceEvaluator(const ChoiceModel& model);

  // Returns the averaged probability vector.
  const std::vector<double>& forward(const ChoiceEvent& event);

  // Per-sample utilities from the last forward, S rows of n.
  const std::vector<std::vector<double>>& sample_utilities() const noexcept { return utils_; }
  const std::vector<std::vector<double>>& sample_probabilities() const noexcept {
    return sample_probs_;
  }

  // Accumulates d(loss)/d(parameters) given upstream = d(loss)/d(probabilities).
  void backward(std::span<const double> upstream, ModelGradients& grads);

 private:
  void check_event(const ChoiceEvent& event) const;
  void compute_utilities();
  void backward_utilities(ModelGradients& grads);

  const ChoiceModel* model_;
  const ChoiceEvent* event_ = nullptr;

  std::vector<std::vector<double>> utils_;
  std::vector<std::vector<double>> sample_probs_;
  std::vector<double> probs_;
  std::vector<std::vector<double>> util_grads_;

  // Network caches. For RUMnet: eps_caches_[k1 * n + i], nu_caches_[k2],
  // util_caches_[s * n + i]; DeepMNL uses util_caches_[i]; TasteNet and VNN
  // use util_caches_[0].
  std::vector<ForwardCache> eps_caches_;
  std::vector<ForwardCache> nu_caches_;
  std::vector<ForwardCache> util_caches_;
  std::vector<std::vector<double>> eps_out_;
  std::vector<std::vector<double>> nu_out_;
  std::vector<double> scratch_;
  // First utility layer projections: x-block per alternative, eps-block per
  // (k1, i), customer block (with bias), nu-block per k2.
  std::vector<std::vector<double>> proj_x_;
  std::vector<std::vector<double>> proj_eps_;
  std::vector<double> proj_z_;
  std::vector<std::vector<double>> proj_nu_;
};

std::vector<std::vector<double>> utilities(const ChoiceModel& model, const ChoiceEvent& event);
std::vector<double> probabilities(const ChoiceModel& model, const ChoiceEvent& event);
void prob_gradients(const ChoiceModel& model, const ChoiceEvent& event,
                    std::span<const double> upstream, ModelGradients& grads);

// Draws a latent sample uniformly, perturbs available utilities with i.i.d.
// standard Gumbel noise and returns the argmax (ties to the lowest index).
std::size_t sample_choice(const ChoiceModel& model, const ChoiceEvent& event, Rng& rng);

// Model container: kind tag, dims, then constituent networks.
void write_model(std::ostream& os, const ChoiceModel& model);
ChoiceModel read_model(std::istream& is);
void save_model(const std::string& path, const ChoiceModel& model);
ChoiceModel load_model(const std::string& path);

}  // namespace rumnet
