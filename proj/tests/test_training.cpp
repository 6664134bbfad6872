#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles/frozen_values.hpp"
#include "oracles/oracle_fixtures.hpp"
#include "rumnet/synthdata.hpp"
#include "rumnet/training.hpp"

using namespace rumnet;

namespace {

Dataset setting1(std::size_t T, std::uint64_t seed, GroundTruth* truth = nullptr) {
  Rng rng = derive_rng(seed, 0x67u);
  const auto gt = draw_ground_truth(1, 50, rng);
  if (truth != nullptr) *truth = gt;
  return generate(gt, T, 5, seed);
}

ChoiceModel fresh_mnl(std::size_t d_x) { return ChoiceModel(MnlModel{std::vector<double>(d_x, 0.0)}, d_x, 0); }

// Model that puts probability one on a fixed index through huge utilities.
ChoiceModel pointer_model(std::size_t d_x, std::size_t feature) {
  std::vector<double> beta(d_x, 0.0);
  beta[feature] = 1000.0;
  return ChoiceModel(MnlModel{beta}, d_x, 0);
}

}  // namespace

TEST_CASE("loss examples") {
  const std::vector<bool> two(2, true);
  CHECK(choice_loss(std::vector<double>{0.5, 0.5}, 0, two, 1e-4) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(std::abs(choice_loss(std::vector<double>{1.0, 0.0}, 1, two, 1e-4) - oracle::kLossZeroProb) <= 1e-12);
  CHECK(choice_loss(std::vector<double>{1.0, 0.0}, 1, two, 1e-4) == doctest::Approx(9.2105).epsilon(1e-5));
  CHECK(choice_loss(std::vector<double>{1.0 / 6, 1.0 / 3, 0.5}, 2, std::vector<bool>(3, true), 0.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(choice_loss(std::vector<double>{1.0, 0.0}, 1, {true, false}, 1e-4), std::invalid_argument);
}

TEST_CASE("loss is finite and non-negative on any simplex") {
  Rng rng = derive_rng(1, 0);
  for (int c = 0; c < 1000; ++c) {
    std::vector<double> p(4);
    double s = 0.0;
    for (double& v : p) s += v = uniform01(rng) < 0.3 ? 0.0 : uniform01(rng);
    if (s == 0.0) p[0] = s = 1.0;
    for (double& v : p) v /= s;
    const double l = choice_loss(p, uniform_index(rng, 4), std::vector<bool>(4, true), 1e-4);
    CHECK(std::isfinite(l));
    CHECK(l >= 0.0);
  }
}

TEST_CASE("predict and accuracy") {
  CHECK(predict(std::vector<double>{0.4, 0.4, 0.2}, {true, true, true}) == 0);
  CHECK(predict(std::vector<double>{0.0, 0.4, 0.6}, {true, true, false}) == 1);

  Dataset d;
  d.d_x = 2;
  d.events.push_back(make_event({{1, 0}, {0, 0}}, {}, 0));
  CHECK(accuracy(pointer_model(2, 0), d) == 1.0);
  d.events[0].chosen = 1;
  CHECK(accuracy(pointer_model(2, 0), d) == 0.0);
  CHECK_THROWS(accuracy(pointer_model(2, 0), Dataset{2, 0, {}}));

  SUBCASE("uniform model on synthetic data") {
    // Generator with beta = 0, so choices are uniform over positions. Every
    // utility of the zero model ties, the argmax is alternative 0, and the
    // accuracy is the frequency of chosen == 0.
    GroundTruth gt;
    gt.universe = 50;
    gt.params = Setting1{std::vector<double>(52, 0.0)};
    const auto data = generate(gt, 10000, 5, 2024);
    const double acc = accuracy(fresh_mnl(data.d_x), data);
    CHECK(std::abs(acc - 0.2) <= 3.0 * std::sqrt(0.2 * 0.8 / 10000.0));
  }
}

TEST_CASE("config validation and key=value file") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.patience = 600;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.tolerance = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_NOTHROW(c.validate());
  c.set("epochs", "30");
  c.set("learning_rate", "0.01");
  CHECK(c.epochs == 30);
  CHECK(c.learning_rate == 0.01);
  CHECK_THROWS_AS(c.set("momentum", "0.9"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("epochs", "ten"), std::invalid_argument);

  const std::string path = "test_training_config.txt";
  {
    std::ofstream os(path);
    os << "# comment\nepochs = 40\n\npatience=7\nseed=99\n";
  }
  const auto f = TrainConfig::from_file(path);
  CHECK(f.epochs == 40);
  CHECK(f.patience == 7);
  CHECK(f.seed == 99);
  {
    std::ofstream os(path);
    os << "epochs 40\n";
  }
  CHECK_THROWS(TrainConfig::from_file(path));
  std::remove(path.c_str());
}

TEST_CASE("one Adam step descends a quadratic") {
  double w = 2.0;
  double g = 0.0;
  Adam adam(1e-3, 0.9, 0.999, 1e-8);
  const std::vector<std::span<double>> params{std::span<double>(&w, 1)};
  const std::vector<std::span<double>> grads{std::span<double>(&g, 1)};
  const double before = (w - 0.5) * (w - 0.5);
  g = 2.0 * (w - 0.5);
  adam.step(params, grads);
  CHECK((w - 0.5) * (w - 0.5) < before);
  // The first bias-corrected step moves by lr * sign(g).
  CHECK(w == doctest::Approx(2.0 - 1e-3).epsilon(1e-9));
}

TEST_CASE("early stopping with a constructed validation sequence") {
  const std::size_t patience = 4;
  const std::size_t e = 3;
  EarlyStopping<int> stop(patience);
  std::vector<double> vals{5.0, 4.0, 3.5, 3.0};
  for (std::size_t k = 1; k <= 10; ++k) vals.push_back(3.0 + 0.1 * static_cast<double>(k));
  std::size_t stopped_at = 0;
  for (std::size_t epoch = 0; epoch < vals.size(); ++epoch) {
    if (stop.observe(vals[epoch], static_cast<int>(epoch))) {
      stopped_at = epoch;
      break;
    }
  }
  CHECK(stopped_at == e + patience);
  CHECK(stop.best_epoch() == e);
  CHECK(stop.best() == static_cast<int>(e));

  EarlyStopping<int> flat(2);
  CHECK_FALSE(flat.observe(1.0, 0));
  CHECK_FALSE(flat.observe(1.0 - 1e-13, 1));
  CHECK(flat.observe(1.0 - 2e-13, 2));
  CHECK(flat.best_epoch() == 0);
}

TEST_CASE("fit") {
  const auto data = setting1(1500, 5);
  const auto split = split_703015(data, 5);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.patience = 8;
  cfg.seed = 11;

  SUBCASE("zero learning rate leaves parameters unchanged") {
    cfg.learning_rate = 0.0;
    Rng rng = derive_rng(1, 1);
    auto model = oracle::random_model(ModelType::DeepMnl, 1, 3, data.d_x, 0, rng);
    const auto before = model;
    const auto r = fit(model, split.train, split.val, cfg);
    CHECK(model == before);
    for (double v : r.val_history) CHECK(v == r.val_history.front());
  }

  SUBCASE("same seed twice is bit-identical") {
    Rng a = derive_rng(2, 1);
    Rng b = derive_rng(2, 1);
    auto m1 = oracle::random_model(ModelType::Rumnet, 1, 3, data.d_x, 0, a);
    auto m2 = oracle::random_model(ModelType::Rumnet, 1, 3, data.d_x, 0, b);
    const auto r1 = fit(m1, split.train, split.val, cfg, &split.test);
    const auto r2 = fit(m2, split.train, split.val, cfg, &split.test);
    CHECK(r1 == r2);
    CHECK(m1 == m2);
  }

  SUBCASE("report invariants and best-epoch restore") {
    auto model = fresh_mnl(data.d_x);
    cfg.epochs = 30;
    cfg.patience = 3;
    cfg.learning_rate = 0.05;
    const auto r = fit(model, split.train, split.val, cfg, &split.test);
    REQUIRE(r.val_history.size() == r.train_history.size());
    REQUIRE(r.best_epoch < r.val_history.size());
    for (double v : r.val_history) CHECK(r.val_history[r.best_epoch] <= v);
    CHECK(dataset_loss(model, split.val, cfg.tolerance) == r.val_history[r.best_epoch]);
    CHECK(r.final.val_loss == r.val_history[r.best_epoch]);
    CHECK(r.final.test_loss == dataset_loss(model, split.test, cfg.tolerance));
  }

  SUBCASE("non-finite loss aborts naming epoch and batch") {
    auto model = fresh_mnl(data.d_x);
    model.linear_coefficients()[0] = std::numeric_limits<double>::quiet_NaN();
    try {
      fit(model, split.train, split.val, cfg);
      FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("epoch") != std::string::npos);
      CHECK(msg.find("batch") != std::string::npos);
    }
  }

  SUBCASE("dimension mismatch") {
    auto model = fresh_mnl(data.d_x + 1);
    CHECK_THROWS(fit(model, split.train, split.val, cfg));
  }
}

TEST_CASE("history CSV and summary row") {
  FitReport r;
  r.train_history = {1.5, 1.25};
  r.val_history = {1.75, 1.5};
  r.best_epoch = 1;
  r.final = {1.25, 1.5, 1.625, 0.5, 0.25, 0.125};
  std::ostringstream h;
  r.write_history_csv(h);
  CHECK(h.str() == "epoch,train_loss,val_loss\n0,1.5,1.75\n1,1.25,1.5\n");
  std::ostringstream s;
  FitReport::write_summary_header(s);
  r.write_summary_row(s);
  CHECK(s.str() ==
        "best_epoch,epochs_run,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc\n"
        "1,2,1.25,1.5,1.625,0.5,0.25,0.125\n");
}

TEST_CASE("70/15/15 split sizes") {
  auto check = [](std::size_t n, std::size_t tr, std::size_t va, std::size_t te) {
    const auto s = split_indices_703015(n, 3);
    CHECK(s.train.size() == tr);
    CHECK(s.val.size() == va);
    CHECK(s.test.size() == te);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.val.begin(), s.val.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == n);
    CHECK(*all.rbegin() == n - 1);
  };
  check(100, 70, 15, 15);
  check(10719, 7505, 1607, 1607);
  check(10, 8, 1, 1);
  CHECK_THROWS(split_indices_703015(9, 0));
  CHECK(split_indices_703015(500, 1).train == split_indices_703015(500, 1).train);
  CHECK(split_indices_703015(500, 1).train != split_indices_703015(500, 2).train);
}

TEST_CASE("kfold and aggregate") {
  const auto folds = kfold_indices(100, 10, 4);
  REQUIRE(folds.size() == 10);
  for (const auto& f : folds) {
    CHECK(f.train.size() == 70);
    CHECK(f.val.size() == 15);
    CHECK(f.test.size() == 15);
  }
  CHECK(folds[0].test != folds[1].test);
  CHECK_THROWS(kfold_indices(100, 1, 4));

  FitReport a;
  a.final = {0.5, 0.6, 0.7, 0.1, 0.2, 0.3};
  std::vector<FitReport> same{a, a, a};
  const auto s = aggregate(same);
  CHECK(s.count == 3);
  CHECK(s.mean.train_loss == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.mean.test_acc == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s.stddev.test_loss <= 1e-15);
  CHECK(s.stddev.val_acc <= 1e-15);
  FitReport b = a;
  b.final.test_loss = 0.5;
  a.final.test_loss = 0.7;
  std::vector<FitReport> two{a, b};
  CHECK(aggregate(two).mean.test_loss == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("cross_validate runs one fit per split") {
  const auto data = setting1(300, 8);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.patience = 3;
  ModelArchitecture arch;
  arch.type = ModelType::Mnl;
  const auto reports = cross_validate(arch, data, cfg, 3);
  CHECK(reports.size() == 3);
  for (const auto& r : reports) CHECK(r.train_history.size() == 3);
}

TEST_CASE("training loss over the first epochs (reported)") {
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = setting1(3000, 100 + seed);
    const auto split = split_703015(data, seed);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.patience = 5;
    cfg.seed = seed;
    auto model = fresh_mnl(data.d_x);
    const auto r = fit(model, split.train, split.val, cfg);
    bool ok = true;
    for (std::size_t t = 1; t < r.train_history.size(); ++t) ok &= r.train_history[t] <= r.train_history[t - 1];
    monotone += ok;
  }
  MESSAGE("train loss non-increasing over the first 5 epochs in " << monotone << " of 10 seeds");
}
