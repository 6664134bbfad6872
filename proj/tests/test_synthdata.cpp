#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rumnet/synthdata.hpp"
#include "rumnet/training.hpp"

using namespace rumnet;

namespace {

GroundTruth draw(int setting, std::size_t P, std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0x67u);
  return draw_ground_truth(setting, P, rng);
}

}  // namespace

TEST_CASE("draw_ground_truth dimensions and ranges") {
  const auto g1 = draw(1, 50, 1);
  const auto& s1 = std::get<Setting1>(g1.params);
  CHECK(s1.beta.size() == 52);
  for (double b : s1.beta) CHECK(std::abs(b) <= 1.0);

  const auto g2 = draw(2, 50, 1);
  const auto& s2 = std::get<Setting2>(g2.params);
  CHECK(s2.beta.size() == 5);
  CHECK(s2.gamma.size() == 50);
  for (double b : s2.beta) CHECK(std::abs(b) <= 1.0);
  for (double g : s2.gamma) CHECK(std::abs(g) <= 1.0);

  const auto g3 = draw(3, 50, 1);
  const auto& s3 = std::get<Setting3>(g3.params);
  CHECK(s3.beta.size() == 52);
  CHECK(s3.gamma.size() == 52);
  CHECK(s3.p_class == 0.3);
  double widest = 0.0;
  for (double b : s3.beta) {
    CHECK(std::abs(b) <= 100.0);
    widest = std::max(widest, std::abs(b));
  }
  CHECK(widest > 50.0);

  CHECK(std::get<Setting1>(draw(1, 50, 9).params).beta == std::get<Setting1>(draw(1, 50, 9).params).beta);
  CHECK_THROWS(draw(4, 50, 1));
}

TEST_CASE("generated events") {
  for (int setting = 1; setting <= 3; ++setting) {
    const auto gt = draw(setting, 50, 2);
    const auto data = generate(gt, 10000, 5, 3);
    CHECK(data.size() == 10000);
    CHECK(data.d_x == 52);
    CHECK(data.d_z == 0);
    const double hi = setting == 2 ? 10.0 : 1.0;
    for (const auto& e : data.events) {
      REQUIRE(e.size() == 5);
      CHECK(e.chosen < 5);
      CHECK(e.customer.empty());
      std::set<std::size_t> ids;
      for (std::size_t i = 0; i < 5; ++i) {
        const auto x = e.product(i);
        CHECK(x[0] >= 0.0);
        CHECK(x[0] < hi);
        CHECK(x[1] >= 0.0);
        CHECK(x[1] < hi);
        int ones = 0;
        for (std::size_t j = 0; j < 50; ++j) {
          if (x[2 + j] == 1.0) {
            ++ones;
            ids.insert(j);
          } else {
            CHECK(x[2 + j] == 0.0);
          }
        }
        CHECK(ones == 1);
      }
      CHECK(ids.size() == 5);
    }
  }
  const auto gt = draw(1, 10, 2);
  CHECK(generate(gt, 100, 5, 4) == generate(gt, 100, 5, 4));
  CHECK_FALSE(generate(gt, 100, 5, 4) == generate(gt, 100, 5, 5));
  CHECK_THROWS_AS(generate(gt, 100, 11, 4), std::invalid_argument);
}

TEST_CASE("beta = 0 gives uniform-predictor accuracy near 1/kappa") {
  GroundTruth gt;
  gt.universe = 50;
  gt.params = Setting1{std::vector<double>(52, 0.0)};
  const auto data = generate(gt, 10000, 5, 12);
  const ChoiceModel zero(MnlModel{std::vector<double>(52, 0.0)}, 52, 0);
  CHECK(std::abs(accuracy(zero, data) - 0.2) <= 3.0 * std::sqrt(0.2 * 0.8 / 10000.0));
}

TEST_CASE("fixed-assortment replays match closed-form MNL") {
  // Universe of 5 products with kappa 5 and no weight on x1, x2: every
  // event offers the same assortment and utilities depend only on identity.
  GroundTruth gt;
  gt.universe = 5;
  gt.params = Setting1{{0.0, 0.0, 0.4, -0.6, 0.9, 0.1, -0.2}};
  const std::size_t T = 100000;
  const auto data = generate(gt, T, 5, 77);
  std::vector<double> counts(5, 0.0);
  for (const auto& e : data.events) {
    const auto x = e.product(e.chosen);
    for (std::size_t j = 0; j < 5; ++j) counts[j] += x[2 + j];
  }
  const std::vector<double> u{0.4, -0.6, 0.9, 0.1, -0.2};
  double z = 0.0;
  for (double v : u) z += std::exp(v);
  for (std::size_t j = 0; j < 5; ++j) {
    const double p = std::exp(u[j]) / z;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(T));
    CHECK(std::abs(counts[j] / static_cast<double>(T) - p) <= 3.0 * sigma);
  }
}

TEST_CASE("Setting 3 class frequencies") {
  const auto gt = draw(3, 10, 4);
  std::vector<int> classes;
  const std::size_t T = 100000;
  generate(gt, T, 5, 5, &classes);
  REQUIRE(classes.size() == T);
  double ones = 0;
  for (int b : classes) ones += b;
  CHECK(std::abs(ones / T - 0.3) <= 3.0 * std::sqrt(0.3 * 0.7 / T));
}

TEST_CASE("ground-truth probabilities") {
  SUBCASE("Setting 3 is the 0.3 / 0.7 mixture") {
    GroundTruth gt;
    gt.universe = 2;
    gt.params = Setting3{{1.0, 0.0, 0.0, 0.0}, {-1.0, 0.0, 0.0, 0.0}, 0.3};
    const auto e = make_event({{1.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}}, {}, 0);
    const double pb = std::exp(1.0) / (std::exp(1.0) + 1.0);
    const double pg = std::exp(-1.0) / (std::exp(-1.0) + 1.0);
    CHECK(ground_truth_probabilities(gt, e)[0] == doctest::Approx(0.3 * pb + 0.7 * pg).epsilon(1e-14));
  }
  SUBCASE("Setting 2 quadratic utility") {
    GroundTruth gt;
    gt.universe = 2;
    gt.params = Setting2{{0.1, 0.2, 0.3, 0.4, 0.5}, {0.7, -0.7}};
    const auto e = make_event({{1.0, 2.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}}, {}, 0);
    const double u0 = 0.1 + 0.4 + 0.3 + 0.8 + 2.0 + 0.7;
    const double u1 = -0.7;
    const double p0 = std::exp(u0) / (std::exp(u0) + std::exp(u1));
    CHECK(ground_truth_probabilities(gt, e)[0] == doctest::Approx(p0).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    const auto gt = draw(1, 50, 1);
    Dataset d;
    d.d_x = 3;
    d.events.push_back(make_event({{1, 2, 3}}, {}, 0));
    CHECK_THROWS_AS(ground_truth_loss(gt, d), DimensionError);
  }
}

TEST_CASE("random guess loss") {
  CHECK(random_guess_loss(5) == std::log(5.0));
  CHECK(random_guess_loss(5) == doctest::Approx(1.609437912).epsilon(1e-9));
  CHECK(random_guess_loss(1) == 0.0);
  CHECK(random_guess_loss(2) == std::log(2.0));
  CHECK_THROWS(random_guess_loss(0));
}

TEST_CASE("ground-truth loss is not beaten by a fitted MNL") {
  double gap = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto gt = draw(1, 50, 300 + seed);
    const auto data = generate(gt, 3000, 5, 300 + seed);
    const auto split = split_703015(data, seed);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.patience = 10;
    cfg.learning_rate = 0.01;
    cfg.seed = seed;
    ChoiceModel m(MnlModel{std::vector<double>(52, 0.0)}, 52, 0);
    fit(m, split.train, split.val, cfg);
    gap += dataset_loss(m, split.test, 0.0) - ground_truth_loss(gt, split.test);
  }
  gap /= 10.0;
  MESSAGE("mean fitted-minus-truth test loss over 10 seeds: " << gap);
  CHECK(gap >= -0.01);
}

TEST_CASE("sidecar round trip") {
  for (int setting = 1; setting <= 3; ++setting) {
    const auto gt = draw(setting, 7, 8);
    std::stringstream ss;
    write_ground_truth(ss, gt, 42);
    const auto back = read_ground_truth(ss);
    CHECK(back.setting() == setting);
    CHECK(back.universe == 7);
    const auto data = generate(gt, 50, 3, 1);
    CHECK(ground_truth_loss(back, data) == ground_truth_loss(gt, data));
  }
}
