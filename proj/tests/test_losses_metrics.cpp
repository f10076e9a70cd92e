#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dscnet/evaluation.hpp"
#include "dscnet/losses.hpp"
#include "dscnet/metrics.hpp"
#include "dscnet/ops.hpp"
#include "support/test_support.hpp"

using namespace dscnet;
using namespace dscnet::testing;

namespace {

Tensor mask_tensor(std::size_t batch, std::size_t h, std::size_t w, Rng& rng, double fraction) {
  Tensor y({batch, 1, h, w});
  for (double& v : y.data()) v = rng.uniform() < fraction ? 1.0 : 0.0;
  return y;
}

Image8 mask_from(std::initializer_list<std::uint8_t> v, std::size_t w) {
  Image8 m(w, v.size() / w, 1);
  m.values.assign(v);
  return m;
}

}  // namespace

TEST_CASE("weighted cross entropies match the oracle on random instances") {
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t batch = 1 + rng.below(2), h = 2 + rng.below(5), w = 2 + rng.below(5);
    Tensor p = random_tensor({batch, 1, h, w}, rng, 0.0, 1.0);
    if (trial % 5 == 0) {
      p.data()[0] = 0.0;  // exercises the clamp
      p.data()[1] = 1.0;
    }
    const Tensor y = mask_tensor(batch, h, w, rng, rng.uniform(0.1, 0.9));
    Graph g(false);
    CHECK(std::abs(weighted_ce_class(g, p, y).item() - ce_oracle(p, y, false)) <= 1e-12);
    CHECK(std::abs(weighted_ce_accuracy(g, p, y).item() - ce_oracle(p, y, true)) <= 1e-12);
  }
}

TEST_CASE("single-class images") {
  Rng rng(2);
  Tensor p = random_tensor({1, 1, 4, 4}, rng, 0.05, 0.95);
  Graph g(false);
  const Tensor all_shadow({1, 1, 4, 4}, 1.0), no_shadow({1, 1, 4, 4}, 0.0);
  // class weights vanish for the only class present
  CHECK(weighted_ce_class(g, p, all_shadow).item() == 0.0);
  CHECK(weighted_ce_class(g, p, no_shadow).item() == 0.0);
  CHECK(std::isfinite(weighted_ce_accuracy(g, p, all_shadow).item()));
  CHECK(std::abs(weighted_ce_accuracy(g, p, no_shadow).item() - ce_oracle(p, no_shadow, true)) <= 1e-12);
}

TEST_CASE("perfect predictions incur no accuracy-weighted loss") {
  Rng rng(3);
  const Tensor y = mask_tensor(1, 6, 6, rng, 0.5);
  Tensor p(y.shape());
  for (std::size_t i = 0; i < p.size(); ++i) p.data()[i] = y.data()[i] == 1.0 ? 0.8 : 0.2;
  Graph g(false);
  CHECK(weighted_ce_accuracy(g, p, y).item() == 0.0);
  CHECK(weighted_ce_class(g, p, y).item() > 0.0);
}

TEST_CASE("cross entropy gradients") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor p = random_param({2, 1, 3, 4}, rng, 0.05, 0.95);
    const Tensor y = mask_tensor(2, 3, 4, rng, 0.5);
    auto rc = grad_check({p}, [&](Graph& g) { return weighted_ce_class(g, p, y); });
    CHECK_MESSAGE(rc.ok(), rc.worst);
    auto ra = grad_check({p}, [&](Graph& g) { return weighted_ce_accuracy(g, p, y); });
    CHECK(ra.failed == 0);
  }
}

TEST_CASE("mean squared error") {
  Tensor a({1, 3, 1, 1}, std::vector<double>{1.0, 2.0, 3.0});
  Tensor b({1, 3, 1, 1}, std::vector<double>{1.0, 2.0, 4.0});
  Graph g(false);
  CHECK(mean_squared_error(g, a, b).item() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(mean_squared_error(g, a, Tensor({1, 2, 1, 1})), ShapeError);
  Rng rng(5);
  Tensor p = random_param({1, 3, 2, 2}, rng), t = random_param({1, 3, 2, 2}, rng);
  auto r = grad_check({p, t}, [&](Graph& gg) { return mean_squared_error(gg, p, t); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("loss aggregation is linear in the head weights") {
  Rng rng(6);
  Prediction pred;
  for (int i = 0; i < 2; ++i) pred.per_scale.push_back(random_tensor({1, 1, 4, 4}, rng, 0.05, 0.95));
  pred.mlif = random_tensor({1, 1, 4, 4}, rng, 0.05, 0.95);
  pred.fusion = random_tensor({1, 1, 4, 4}, rng, 0.05, 0.95);
  const Tensor y = mask_tensor(1, 4, 4, rng, 0.4);
  Graph g(false);
  const LossBreakdown unit = detection_loss(g, pred, y);
  double sum = unit.mlif + unit.fusion;
  for (double v : unit.per_scale) sum += v;
  CHECK(unit.total.item() == doctest::Approx(sum).epsilon(1e-14));
  const double head = weighted_ce_class(g, pred.mlif, y).item() + weighted_ce_accuracy(g, pred.mlif, y).item();
  CHECK(unit.mlif == doctest::Approx(head).epsilon(1e-14));
  HeadWeights hw;
  hw.per_scale = {2.0, 0.5};
  hw.mlif = 3.0;
  hw.fusion = 0.0;
  const LossBreakdown weighted = detection_loss(g, pred, y, hw);
  CHECK(weighted.total.item() ==
        doctest::Approx(2.0 * unit.per_scale[0] + 0.5 * unit.per_scale[1] + 3.0 * unit.mlif).epsilon(1e-14));
}

TEST_CASE("accuracy and BER agree with brute-force counting") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Image8 truth = random_mask(8, 8, rng, rng.uniform(0.1, 0.9));
    const Image8 pred = random_mask(8, 8, rng, rng.uniform(0.1, 0.9));
    int tp = 0, tn = 0, np = 0, nn = 0;
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) {
        if (truth.at(x, y)) {
          ++np;
          if (pred.at(x, y)) ++tp;
        } else {
          ++nn;
          if (!pred.at(x, y)) ++tn;
        }
      }
    const MaskStats s = mask_stats(pred, truth);
    CHECK(s.tp == std::uint64_t(tp));
    CHECK(s.tn == std::uint64_t(tn));
    CHECK(accuracy(s) == double(tp + tn) / 64.0);
    if (np > 0 && nn > 0) {
      CHECK(ber(s).value == (1.0 - 0.5 * (double(tp) / np + double(tn) / nn)) * 100.0);
      CHECK_FALSE(ber(s).partial);
    }
  }
}

TEST_CASE("hand-derived accuracy and BER") {
  const Image8 truth = mask_from({1, 1, 0, 0}, 2);
  const Image8 pred = mask_from({1, 0, 0, 0}, 2);
  const MaskStats s = mask_stats(pred, truth);
  CHECK(s == MaskStats{1, 2, 2, 2});
  CHECK(accuracy(s) == 0.75);
  CHECK(ber(s).value == 25.0);
}

TEST_CASE("BER with a missing class is flagged partial") {
  const Image8 none = mask_from({0, 0, 0, 0}, 2);
  const Ber b = ber(mask_stats(mask_from({1, 0, 0, 0}, 2), none));
  CHECK(b.partial);
  CHECK(b.value == 25.0);
  const Image8 all = mask_from({1, 1, 1, 1}, 2);
  CHECK(ber(mask_stats(all, all)).value == 0.0);
  CHECK(ber(mask_stats(all, all)).partial);
  CHECK_THROWS_AS(accuracy(MaskStats{}), std::invalid_argument);
  CHECK_THROWS(mask_stats(none, mask_from({0, 0}, 2)));
}

TEST_CASE("pooled BER uses dataset-wide counts") {
  std::vector<SampleMetrics> samples;
  samples.push_back(detection_metrics("a", mask_from({1, 1, 0, 0}, 2), mask_from({1, 1, 0, 0}, 2)));
  samples.push_back(detection_metrics("b", mask_from({0, 0, 0, 0, 0, 0}, 3), mask_from({1, 1, 0, 0, 0, 0}, 3)));
  const EvalSummary sum = summarize(samples);
  // pooled: tp 2 of 4, tn 6 of 6
  CHECK(sum.ber->value == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(*sum.accuracy == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*sum.mean_image_ber == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("LAB RMSE of a unit offset in one channel") {
  ImageF a(3, 2, 3, 50.0), b = a;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) b.values[i * 3 + 1] += 1.0;
  CHECK(rmse_lab(a, b) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  Image8 region(3, 2, 1, 0);
  CHECK_THROWS_AS(rmse_lab(a, b, &region), std::invalid_argument);
  region.values[4] = 1;
  CHECK(rmse_lab(a, b, &region) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  Image8 mask(3, 2, 1, 0);
  mask.values[0] = 1;
  b.values[0] += 2.0;
  const SampleMetrics m = removal_metrics("x", b, a, mask);
  CHECK(*m.shadow.rmse() == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(*m.nonshadow.rmse() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(*m.all.rmse() == doctest::Approx(std::sqrt(10.0 / 18.0)).epsilon(1e-15));
  CHECK_FALSE(ErrorSum{}.rmse().has_value());
}

TEST_CASE("parallel evaluation loop covers every index and rethrows") {
  for (std::size_t threads : {1, 3}) {
    std::vector<int> hits(17, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(5, threads, [](std::size_t i) {
                      if (i == 3) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
  }
}
