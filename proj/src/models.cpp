#include "rumnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rumnet {

const char* to_string(ModelType t) {
  switch (t) {
    case ModelType::Mnl:
      return "mnl";
    case ModelType::TasteNet:
      return "tastenet";
    case ModelType::DeepMnl:
      return "deepmnl";
    case ModelType::Rumnet:
      return "rumnet";
    case ModelType::Vnn:
      return "vnn";
  }
  return "?";
}

ModelType model_type_from_string(const std::string& name) {
  if (name == "mnl") return ModelType::Mnl;
  if (name == "tastenet") return ModelType::TasteNet;
  if (name == "deepmnl") return ModelType::DeepMnl;
  if (name == "rumnet") return ModelType::Rumnet;
  if (name == "vnn") return ModelType::Vnn;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void expect_io(const DenseNetwork& net, std::size_t in, std::size_t out, const std::string& role) {
  if (net.input_dim() != in) throw DimensionError(role + " input_dim", in, net.input_dim());
  if (net.output_dim() != out) throw DimensionError(role + " output_dim", out, net.output_dim());
}

// out[r] = sum_c W[r][offset + c] * v[c] for one column block of a layer.
void project_block(const DenseLayer& layer, std::size_t offset, std::span<const double> v,
                   std::vector<double>& out) {
  out.assign(layer.out, 0.0);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double* w = layer.weight.data() + r * layer.in + offset;
    double acc = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) {
      acc += w[c] * v[c];
    }
    out[r] = acc;
  }
}

// G[r][offset + c] += g[r] * v[c]
void accumulate_outer(DenseLayer& g, std::size_t offset, std::span<const double> row_grad,
                      std::span<const double> v) {
  for (std::size_t r = 0; r < g.out; ++r) {
    const double d = row_grad[r];
    if (d == 0.0) continue;
    double* gw = g.weight.data() + r * g.in + offset;
    for (std::size_t c = 0; c < v.size(); ++c) {
      gw[c] += d * v[c];
    }
  }
}

// d/d(block input)[c] = sum_r W[r][offset + c] * g[r]
void transpose_block(const DenseLayer& layer, std::size_t offset, std::size_t len,
                     std::span<const double> row_grad, std::vector<double>& out) {
  out.assign(len, 0.0);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double d = row_grad[r];
    if (d == 0.0) continue;
    const double* w = layer.weight.data() + r * layer.in + offset;
    for (std::size_t c = 0; c < len; ++c) {
      out[c] += d * w[c];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

}  // namespace

ChoiceModel::ChoiceModel(Kind kind, std::size_t d_x, std::size_t d_z)
    : kind_(std::move(kind)), d_x_(d_x), d_z_(d_z) {
  validate();
}

void ChoiceModel::validate() const {
  std::visit(
      Overloaded{
          [&](const MnlModel& m) {
            if (m.beta.size() != d_x_) throw DimensionError("MNL beta", d_x_, m.beta.size());
          },
          [&](const TasteNetModel& m) {
            if (m.beta.size() != d_x_) throw DimensionError("TasteNet beta", d_x_, m.beta.size());
            expect_io(m.taste, d_z_, d_x_, "TasteNet taste network");
          },
          [&](const DeepMnlModel& m) { expect_io(m.net, d_x_ + d_z_, 1, "DeepMNL network"); },
          [&](const RumnetModel& m) {
            if (m.K == 0) throw std::invalid_argument("RUMnet: K must be positive");
            if (m.eps_nets.size() != m.K) throw DimensionError("RUMnet eps networks", m.K, m.eps_nets.size());
            if (m.nu_nets.size() != m.K) throw DimensionError("RUMnet nu networks", m.K, m.nu_nets.size());
            expect_io(m.utility, d_x_ + m.d_eps + d_z_ + m.d_nu, 1, "RUMnet utility network");
            for (const auto& net : m.eps_nets) {
              expect_io(net, d_x_, m.d_eps, "RUMnet eps network");
              if (!(net.spec() == m.eps_nets.front().spec())) {
                throw std::invalid_argument("RUMnet: eps networks must share one spec");
              }
            }
            for (const auto& net : m.nu_nets) {
              expect_io(net, d_z_, m.d_nu, "RUMnet nu network");
              if (!(net.spec() == m.nu_nets.front().spec())) {
                throw std::invalid_argument("RUMnet: nu networks must share one spec");
              }
            }
          },
          [&](const VnnModel& m) {
            if (m.n == 0) throw std::invalid_argument("VNN: assortment size must be positive");
            expect_io(m.net, m.n * d_x_ + d_z_, m.n, "VNN network");
          },
      },
      kind_);
}

std::size_t ChoiceModel::sample_count() const noexcept {
  if (const auto* r = std::get_if<RumnetModel>(&kind_)) {
    return r->K * r->K;
  }
  return 1;
}

std::span<double> ChoiceModel::linear_coefficients() noexcept {
  if (auto* m = std::get_if<MnlModel>(&kind_)) return m->beta;
  if (auto* m = std::get_if<TasteNetModel>(&kind_)) return m->beta;
  return {};
}

std::span<const double> ChoiceModel::linear_coefficients() const noexcept {
  if (const auto* m = std::get_if<MnlModel>(&kind_)) return m->beta;
  if (const auto* m = std::get_if<TasteNetModel>(&kind_)) return m->beta;
  return {};
}

std::vector<DenseNetwork*> ChoiceModel::networks() {
  std::vector<DenseNetwork*> out;
  std::visit(Overloaded{
                 [](MnlModel&) {},
                 [&](TasteNetModel& m) { out.push_back(&m.taste); },
                 [&](DeepMnlModel& m) { out.push_back(&m.net); },
                 [&](RumnetModel& m) {
                   out.push_back(&m.utility);
                   for (auto& n : m.eps_nets) out.push_back(&n);
                   for (auto& n : m.nu_nets) out.push_back(&n);
                 },
                 [&](VnnModel& m) { out.push_back(&m.net); },
             },
             kind_);
  return out;
}

std::vector<const DenseNetwork*> ChoiceModel::networks() const {
  auto nets = const_cast<ChoiceModel*>(this)->networks();
  return {nets.begin(), nets.end()};
}

std::vector<std::span<double>> ChoiceModel::parameters() {
  std::vector<std::span<double>> out;
  auto beta = linear_coefficients();
  if (!beta.empty()) out.push_back(beta);
  for (DenseNetwork* net : networks()) {
    net->collect_parameters(out);
  }
  return out;
}

std::size_t ChoiceModel::parameter_count() const {
  std::size_t n = linear_coefficients().size();
  for (const DenseNetwork* net : networks()) {
    n += net->parameter_count();
  }
  return n;
}

double ChoiceModel::max_node_l1() const {
  double best = 0.0;
  auto beta = linear_coefficients();
  if (!beta.empty()) {
    double s = 0.0;
    for (double b : beta) s += std::abs(b);
    best = s;
  }
  for (const DenseNetwork* net : networks()) {
    best = std::max(best, rumnet::max_node_l1(*net));
  }
  return best;
}

ModelGradients::ModelGradients(const ChoiceModel& model)
    : linear(model.linear_coefficients().size(), 0.0) {
  for (const DenseNetwork* net : model.networks()) {
    nets.emplace_back(*net);
  }
}

void ModelGradients::zero() {
  std::fill(linear.begin(), linear.end(), 0.0);
  for (auto& g : nets) g.zero();
}

std::vector<std::span<double>> ModelGradients::parameters() {
  std::vector<std::span<double>> out;
  if (!linear.empty()) out.emplace_back(linear);
  for (auto& g : nets) g.collect_parameters(out);
  return out;
}

ChoiceModel make_model(const ModelArchitecture& arch, std::size_t d_x, std::size_t d_z, Rng& rng) {
  auto spec = [&](std::size_t in, std::size_t out) {
    NetworkSpec s{in, out, arch.depth, arch.width, arch.activation};
    s.validate();
    return s;
  };
  switch (arch.type) {
    case ModelType::Mnl:
      return ChoiceModel(MnlModel{std::vector<double>(d_x, 0.0)}, d_x, d_z);
    case ModelType::TasteNet:
      return ChoiceModel(
          TasteNetModel{std::vector<double>(d_x, 0.0), init_network(spec(d_z, d_x), rng)}, d_x, d_z);
    case ModelType::DeepMnl:
      return ChoiceModel(DeepMnlModel{init_network(spec(d_x + d_z, 1), rng)}, d_x, d_z);
    case ModelType::Rumnet: {
      if (arch.K == 0) throw std::invalid_argument("RUMnet: K must be positive");
      RumnetModel m;
      m.K = arch.K;
      m.d_eps = arch.d_eps;
      m.d_nu = arch.d_nu;
      m.utility = init_network(spec(d_x + arch.d_eps + d_z + arch.d_nu, 1), rng);
      for (std::size_t k = 0; k < arch.K; ++k) {
        m.eps_nets.push_back(init_network(spec(d_x, arch.d_eps), rng));
      }
      for (std::size_t k = 0; k < arch.K; ++k) {
        m.nu_nets.push_back(init_network(spec(d_z, arch.d_nu), rng));
      }
      return ChoiceModel(std::move(m), d_x, d_z);
    }
    case ModelType::Vnn:
      if (arch.vnn_n == 0) throw std::invalid_argument("VNN: assortment size must be positive");
      return ChoiceModel(VnnModel{init_network(spec(arch.vnn_n * d_x + d_z, arch.vnn_n), rng), arch.vnn_n},
                         d_x, d_z);
  }
  throw std::invalid_argument("unknown model type");
}

void masked_softmax(std::span<const double> u, const std::vector<bool>& available,
                    std::span<double> out) {
  if (u.size() != available.size()) throw DimensionError("softmax mask", u.size(), available.size());
  if (out.size() != u.size()) throw DimensionError("softmax output", u.size(), out.size());
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (available[i]) {
      top = std::max(top, u[i]);
      any = true;
    }
  }
  if (!any) throw InvalidEvent("softmax: no available alternative");
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = available[i] ? std::exp(u[i] - top) : 0.0;
    total += out[i];
  }
  for (double& p : out) p /= total;
}

ChoiceEvaluator::ChoiceEvaluator(const ChoiceModel& model) : model_(&model) {}

void ChoiceEvaluator::check_event(const ChoiceEvent& event) const {
  const std::size_t n = event.size();
  if (n == 0) throw InvalidEvent("choice event has no alternatives");
  if (event.product_features.size() != n * model_->d_x()) {
    throw DimensionError("event product features", n * model_->d_x(), event.product_features.size());
  }
  if (event.customer.size() != model_->d_z()) {
    throw DimensionError("event customer features", model_->d_z(), event.customer.size());
  }
  if (const auto* v = std::get_if<VnnModel>(&model_->kind())) {
    if (n != v->n) throw DimensionError("VNN assortment size", v->n, n);
  }
}

const std::vector<double>& ChoiceEvaluator::forward(const ChoiceEvent& event) {
  check_event(event);
  event_ = &event;
  const std::size_t n = event.size();
  const std::size_t S = model_->sample_count();
  utils_.resize(S);
  sample_probs_.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    utils_[s].assign(n, 0.0);
    sample_probs_[s].assign(n, 0.0);
  }
  compute_utilities();
  probs_.assign(n, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    masked_softmax(utils_[s], event.available, sample_probs_[s]);
    for (std::size_t i = 0; i < n; ++i) probs_[i] += sample_probs_[s][i];
  }
  if (S > 1) {
    const double inv = 1.0 / static_cast<double>(S);
    for (double& p : probs_) p *= inv;
  }
  return probs_;
}

void ChoiceEvaluator::compute_utilities() {
  const ChoiceEvent& e = *event_;
  const std::size_t n = e.size();
  std::visit(
      Overloaded{
          [&](const MnlModel& m) {
            for (std::size_t i = 0; i < n; ++i) utils_[0][i] = dot(m.beta, e.product(i));
          },
          [&](const TasteNetModel& m) {
            util_caches_.resize(1);
            scratch_ = rumnet::forward(m.taste, e.customer, util_caches_[0]);
            for (std::size_t j = 0; j < scratch_.size(); ++j) scratch_[j] += m.beta[j];
            for (std::size_t i = 0; i < n; ++i) utils_[0][i] = dot(scratch_, e.product(i));
          },
          [&](const DeepMnlModel& m) {
            util_caches_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
              auto x = e.product(i);
              scratch_.assign(x.begin(), x.end());
              scratch_.insert(scratch_.end(), e.customer.begin(), e.customer.end());
              utils_[0][i] = rumnet::forward(m.net, scratch_, util_caches_[i])[0];
            }
          },
          [&](const RumnetModel& m) {
            const std::size_t K = m.K;
            const DenseLayer& first = m.utility.layers()[0];
            const std::size_t off_eps = model_->d_x();
            const std::size_t off_z = off_eps + m.d_eps;
            const std::size_t off_nu = off_z + model_->d_z();
            eps_caches_.resize(K * n);
            eps_out_.resize(K * n);
            proj_eps_.resize(K * n);
            nu_caches_.resize(K);
            nu_out_.resize(K);
            proj_nu_.resize(K);
            proj_x_.resize(n);
            util_caches_.resize(K * K * n);

            for (std::size_t i = 0; i < n; ++i) project_block(first, 0, e.product(i), proj_x_[i]);
            project_block(first, off_z, e.customer, proj_z_);
            for (std::size_t r = 0; r < first.out; ++r) proj_z_[r] += first.bias[r];
            for (std::size_t k1 = 0; k1 < K; ++k1) {
              for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx = k1 * n + i;
                eps_out_[idx] = rumnet::forward(m.eps_nets[k1], e.product(i), eps_caches_[idx]);
                project_block(first, off_eps, eps_out_[idx], proj_eps_[idx]);
              }
            }
            for (std::size_t k2 = 0; k2 < K; ++k2) {
              nu_out_[k2] = rumnet::forward(m.nu_nets[k2], e.customer, nu_caches_[k2]);
              project_block(first, off_nu, nu_out_[k2], proj_nu_[k2]);
            }
            scratch_.resize(first.out);
            for (std::size_t k1 = 0; k1 < K; ++k1) {
              for (std::size_t k2 = 0; k2 < K; ++k2) {
                const std::size_t s = k1 * K + k2;
                for (std::size_t i = 0; i < n; ++i) {
                  const auto& px = proj_x_[i];
                  const auto& pe = proj_eps_[k1 * n + i];
                  const auto& pn = proj_nu_[k2];
                  for (std::size_t r = 0; r < first.out; ++r) {
                    scratch_[r] = px[r] + pe[r] + proj_z_[r] + pn[r];
                  }
                  utils_[s][i] =
                      forward_from_first_preactivation(m.utility, scratch_, util_caches_[s * n + i])[0];
                }
              }
            }
          },
          [&](const VnnModel& m) {
            util_caches_.resize(1);
            scratch_.assign(e.product_features.begin(), e.product_features.end());
            scratch_.insert(scratch_.end(), e.customer.begin(), e.customer.end());
            utils_[0] = rumnet::forward(m.net, scratch_, util_caches_[0]);
          },
      },
      model_->kind());
}

void ChoiceEvaluator::backward(std::span<const double> upstream, ModelGradients& grads) {
  if (event_ == nullptr) throw std::logic_error("ChoiceEvaluator::backward called before forward");
  const std::size_t n = event_->size();
  if (upstream.size() != n) throw DimensionError("probability upstream", n, upstream.size());
  const std::size_t S = model_->sample_count();
  const double inv = 1.0 / static_cast<double>(S);
  // Softmax Jacobian per sample: du_i = p_i (g_i - sum_j p_j g_j) / S.
  util_grads_.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& p = sample_probs_[s];
    const double mean = dot(p, upstream);
    util_grads_[s].assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      util_grads_[s][i] = p[i] * (upstream[i] - mean) * inv;
    }
  }
  backward_utilities(grads);
}

void ChoiceEvaluator::backward_utilities(ModelGradients& grads) {
  const ChoiceEvent& e = *event_;
  const std::size_t n = e.size();
  std::visit(
      Overloaded{
          [&](const MnlModel&) {
            for (std::size_t i = 0; i < n; ++i) {
              const double du = util_grads_[0][i];
              if (du == 0.0) continue;
              auto x = e.product(i);
              for (std::size_t j = 0; j < x.size(); ++j) grads.linear[j] += du * x[j];
            }
          },
          [&](const TasteNetModel& m) {
            std::vector<double> dcoef(model_->d_x(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
              const double du = util_grads_[0][i];
              if (du == 0.0) continue;
              auto x = e.product(i);
              for (std::size_t j = 0; j < x.size(); ++j) dcoef[j] += du * x[j];
            }
            for (std::size_t j = 0; j < dcoef.size(); ++j) grads.linear[j] += dcoef[j];
            rumnet::backward(m.taste, util_caches_[0], dcoef, grads.nets[0]);
          },
          [&](const DeepMnlModel& m) {
            for (std::size_t i = 0; i < n; ++i) {
              const double du = util_grads_[0][i];
              if (du == 0.0) continue;
              rumnet::backward(m.net, util_caches_[i], std::span<const double>(&du, 1), grads.nets[0]);
            }
          },
          [&](const RumnetModel& m) {
            const std::size_t K = m.K;
            const DenseLayer& first = m.utility.layers()[0];
            const std::size_t h0 = first.out;
            const std::size_t off_eps = model_->d_x();
            const std::size_t off_z = off_eps + m.d_eps;
            const std::size_t off_nu = off_z + model_->d_z();
            GradientBuffer& gu = grads.nets[0];

            std::vector<std::vector<double>> sum_x(n, std::vector<double>(h0, 0.0));
            std::vector<std::vector<double>> sum_eps(K * n, std::vector<double>(h0, 0.0));
            std::vector<std::vector<double>> sum_nu(K, std::vector<double>(h0, 0.0));
            std::vector<double> total(h0, 0.0);
            std::vector<double> dpre(h0);

            for (std::size_t k1 = 0; k1 < K; ++k1) {
              for (std::size_t k2 = 0; k2 < K; ++k2) {
                const std::size_t s = k1 * K + k2;
                for (std::size_t i = 0; i < n; ++i) {
                  const double du = util_grads_[s][i];
                  if (du == 0.0) continue;
                  backward_to_first_preactivation(m.utility, util_caches_[s * n + i],
                                                  std::span<const double>(&du, 1), gu, dpre);
                  auto& sx = sum_x[i];
                  auto& se = sum_eps[k1 * n + i];
                  auto& sn = sum_nu[k2];
                  for (std::size_t r = 0; r < h0; ++r) {
                    sx[r] += dpre[r];
                    se[r] += dpre[r];
                    sn[r] += dpre[r];
                    total[r] += dpre[r];
                  }
                }
              }
            }

            DenseLayer& g0 = gu.layers[0];
            for (std::size_t i = 0; i < n; ++i) accumulate_outer(g0, 0, sum_x[i], e.product(i));
            accumulate_outer(g0, off_z, total, e.customer);
            for (std::size_t r = 0; r < h0; ++r) g0.bias[r] += total[r];

            std::vector<double> d_latent;
            for (std::size_t k1 = 0; k1 < K; ++k1) {
              for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx = k1 * n + i;
                accumulate_outer(g0, off_eps, sum_eps[idx], eps_out_[idx]);
                if (m.d_eps == 0) continue;
                transpose_block(first, off_eps, m.d_eps, sum_eps[idx], d_latent);
                rumnet::backward(m.eps_nets[k1], eps_caches_[idx], d_latent, grads.nets[1 + k1]);
              }
            }
            for (std::size_t k2 = 0; k2 < K; ++k2) {
              accumulate_outer(g0, off_nu, sum_nu[k2], nu_out_[k2]);
              if (m.d_nu == 0) continue;
              transpose_block(first, off_nu, m.d_nu, sum_nu[k2], d_latent);
              rumnet::backward(m.nu_nets[k2], nu_caches_[k2], d_latent, grads.nets[1 + K + k2]);
            }
          },
          [&](const VnnModel& m) { rumnet::backward(m.net, util_caches_[0], util_grads_[0], grads.nets[0]); },
      },
      model_->kind());
}

std::vector<std::vector<double>> utilities(const ChoiceModel& model, const ChoiceEvent& event) {
  ChoiceEvaluator ev(model);
  ev.forward(event);
  return ev.sample_utilities();
}

std::vector<double> probabilities(const ChoiceModel& model, const ChoiceEvent& event) {
  ChoiceEvaluator ev(model);
  return ev.forward(event);
}

void prob_gradients(const ChoiceModel& model, const ChoiceEvent& event,
                    std::span<const double> upstream, ModelGradients& grads) {
  ChoiceEvaluator ev(model);
  ev.forward(event);
  ev.backward(upstream, grads);
}

std::size_t sample_choice(const ChoiceModel& model, const ChoiceEvent& event, Rng& rng) {
  if (event.available_count() == 0) throw InvalidEvent("sample_choice: no available alternative");
  ChoiceEvaluator ev(model);
  ev.forward(event);
  const std::size_t S = model.sample_count();
  const std::size_t s = S == 1 ? 0 : uniform_index(rng, S);
  const auto& u = ev.sample_utilities()[s];
  std::size_t best = event.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < event.size(); ++i) {
    if (!event.available[i]) continue;
    const double v = u[i] + gumbel(rng);
    if (best == event.size() || v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

}  // namespace rumnet
