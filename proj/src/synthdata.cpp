#include "rumnet/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rumnet/models.hpp"
#include "rumnet/text_io.hpp"

namespace rumnet {

namespace {

std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

double linear(std::span<const double> coef, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += coef[i] * x[i];
  return acc;
}

std::size_t product_index(std::span<const double> x, std::size_t universe) {
  for (std::size_t j = 0; j < universe; ++j) {
    if (x[2 + j] == 1.0) return j;
  }
  throw InvalidEvent("synthetic event: product has no one-hot index");
}

double setting2_utility(const Setting2& s, std::span<const double> x, std::size_t universe) {
  const double x1 = x[0];
  const double x2 = x[1];
  return s.beta[0] * x1 + s.beta[1] * x2 + s.beta[2] * x1 * x1 + s.beta[3] * x1 * x2 +
         s.beta[4] * x2 * x2 + s.gamma[product_index(x, universe)];
}

// Deterministic utilities of class `cls` (Setting 3: 0 -> beta, 1 -> gamma).
void class_utilities(const GroundTruth& gt, const ChoiceEvent& e, int cls, std::vector<double>& u) {
  u.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto x = e.product(i);
    u[i] = std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Setting1>) {
            return linear(s.beta, x);
          } else if constexpr (std::is_same_v<T, Setting2>) {
            return setting2_utility(s, x, gt.universe);
          } else {
            return linear(cls == 0 ? s.beta : s.gamma, x);
          }
        },
        gt.params);
  }
}

void check_event_dims(const GroundTruth& gt, const ChoiceEvent& e) {
  if (e.product_dim() != gt.feature_dim()) {
    throw DimensionError("synthetic event feature dim", gt.feature_dim(), e.product_dim());
  }
}

}  // namespace

void GroundTruth::validate() const {
  const std::size_t d = feature_dim();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Setting1>) {
          if (s.beta.size() != d) throw DimensionError("setting 1 beta", d, s.beta.size());
        } else if constexpr (std::is_same_v<T, Setting2>) {
          if (s.beta.size() != 5) throw DimensionError("setting 2 beta", 5, s.beta.size());
          if (s.gamma.size() != universe) throw DimensionError("setting 2 gamma", universe, s.gamma.size());
        } else {
          if (s.beta.size() != d) throw DimensionError("setting 3 beta", d, s.beta.size());
          if (s.gamma.size() != d) throw DimensionError("setting 3 gamma", d, s.gamma.size());
          if (!(s.p_class > 0.0 && s.p_class < 1.0)) {
            throw std::invalid_argument("setting 3 class probability must lie in (0, 1)");
          }
        }
      },
      params);
}

GroundTruth draw_ground_truth(int setting, std::size_t universe, Rng& rng) {
  if (universe == 0) throw std::invalid_argument("universe size must be positive");
  const std::size_t d = 2 + universe;
  GroundTruth gt;
  gt.universe = universe;
  switch (setting) {
    case 1:
      gt.params = Setting1{uniform_vector(rng, d, -1.0, 1.0)};
      break;
    case 2: {
      Setting2 s;
      s.beta = uniform_vector(rng, 5, -1.0, 1.0);
      s.gamma = uniform_vector(rng, universe, -1.0, 1.0);
      gt.params = std::move(s);
      break;
    }
    case 3: {
      Setting3 s;
      s.beta = uniform_vector(rng, d, -100.0, 100.0);
      s.gamma = uniform_vector(rng, d, -100.0, 100.0);
      gt.params = std::move(s);
      break;
    }
    default:
      throw std::invalid_argument("setting must be 1, 2 or 3, got " + std::to_string(setting));
  }
  return gt;
}

Dataset generate(const GroundTruth& gt, std::size_t T, std::size_t kappa, std::uint64_t seed,
                 std::vector<int>* classes) {
  gt.validate();
  const std::size_t P = gt.universe;
  if (kappa == 0) throw std::invalid_argument("kappa must be positive");
  if (kappa > P) {
    throw std::invalid_argument("kappa (" + std::to_string(kappa) + ") exceeds universe size (" +
                                std::to_string(P) + ")");
  }
  const std::size_t d = gt.feature_dim();
  const double feature_hi = gt.setting() == 2 ? 10.0 : 1.0;

  Dataset data;
  data.d_x = d;
  data.d_z = 0;
  data.events.reserve(T);
  std::vector<std::size_t> universe(P);
  std::vector<double> u;
  for (std::size_t t = 0; t < T; ++t) {
    Rng rng = derive_rng(seed, t);
    // Partial Fisher-Yates: the first kappa entries are a uniform draw
    // without replacement.
    std::iota(universe.begin(), universe.end(), std::size_t{0});
    for (std::size_t i = 0; i < kappa; ++i) {
      std::swap(universe[i], universe[i + uniform_index(rng, P - i)]);
    }
    ChoiceEvent e;
    e.available.assign(kappa, true);
    e.product_features.assign(kappa * d, 0.0);
    for (std::size_t i = 0; i < kappa; ++i) {
      double* x = e.product_features.data() + i * d;
      x[0] = uniform(rng, 0.0, feature_hi);
      x[1] = uniform(rng, 0.0, feature_hi);
      x[2 + universe[i]] = 1.0;
    }
    int cls = 0;
    if (const auto* s3 = std::get_if<Setting3>(&gt.params)) {
      cls = bernoulli(rng, s3->p_class) ? 0 : 1;
      if (classes != nullptr) classes->push_back(cls == 0 ? 1 : 0);
    }
    class_utilities(gt, e, cls, u);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kappa; ++i) {
      const double v = u[i] + gumbel(rng);
      if (v > best) {
        best = v;
        e.chosen = i;
      }
    }
    data.events.push_back(std::move(e));
  }
  return data;
}

std::vector<double> ground_truth_probabilities(const GroundTruth& gt, const ChoiceEvent& e) {
  check_event_dims(gt, e);
  std::vector<double> u;
  std::vector<double> p(e.size());
  class_utilities(gt, e, 0, u);
  masked_softmax(u, e.available, p);
  if (const auto* s3 = std::get_if<Setting3>(&gt.params)) {
    std::vector<double> q(e.size());
    class_utilities(gt, e, 1, u);
    masked_softmax(u, e.available, q);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = s3->p_class * p[i] + (1.0 - s3->p_class) * q[i];
    }
  }
  return p;
}

double ground_truth_loss(const GroundTruth& gt, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("ground_truth_loss: empty dataset");
  if (data.d_x != gt.feature_dim()) throw DimensionError("dataset d_x", gt.feature_dim(), data.d_x);
  double total = 0.0;
  for (const auto& e : data.events) {
    total -= std::log(ground_truth_probabilities(gt, e)[e.chosen]);
  }
  return total / static_cast<double>(data.size());
}

double random_guess_loss(std::size_t kappa) {
  if (kappa < 1) throw std::invalid_argument("random_guess_loss: kappa must be at least 1");
  return std::log(static_cast<double>(kappa));
}

namespace {

void write_coefs(std::ostream& os, const char* tag, const std::vector<double>& v) {
  os << tag << ' ' << v.size();
  for (double x : v) os << ' ' << format_double(x);
  os << '\n';
}

std::vector<double> read_coefs(TokenReader& in, const char* tag) {
  in.expect(tag);
  std::vector<double> v(in.next_size("length"));
  for (double& x : v) x = in.next_double(tag);
  return v;
}

}  // namespace

void write_ground_truth(std::ostream& os, const GroundTruth& gt, std::uint64_t seed) {
  os << "ground_truth v1\n";
  os << "setting " << gt.setting() << '\n';
  os << "universe " << gt.universe << '\n';
  os << "seed " << seed << '\n';
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        write_coefs(os, "beta", s.beta);
        if constexpr (!std::is_same_v<T, Setting1>) write_coefs(os, "gamma", s.gamma);
        if constexpr (std::is_same_v<T, Setting3>) os << "p_class " << format_double(s.p_class) << '\n';
      },
      gt.params);
}

GroundTruth read_ground_truth(std::istream& is) {
  TokenReader in(is);
  in.expect("ground_truth");
  in.expect("v1");
  in.expect("setting");
  const auto setting = in.next_size("setting");
  in.expect("universe");
  GroundTruth gt;
  gt.universe = in.next_size("universe");
  in.expect("seed");
  in.next_size("seed");
  switch (setting) {
    case 1:
      gt.params = Setting1{read_coefs(in, "beta")};
      break;
    case 2: {
      Setting2 s;
      s.beta = read_coefs(in, "beta");
      s.gamma = read_coefs(in, "gamma");
      gt.params = std::move(s);
      break;
    }
    case 3: {
      Setting3 s;
      s.beta = read_coefs(in, "beta");
      s.gamma = read_coefs(in, "gamma");
      in.expect("p_class");
      s.p_class = in.next_double("p_class");
      gt.params = std::move(s);
      break;
    }
    default:
      throw FormatError("ground truth: unknown setting " + std::to_string(setting));
  }
  gt.validate();
  return gt;
}

}  // namespace rumnet
