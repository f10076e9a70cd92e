#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dscnet/ops.hpp"
#include "dscnet/optim.hpp"
#include "support/test_support.hpp"

using namespace dscnet;
using namespace dscnet::testing;

TEST_CASE("tensor construction and shape errors") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.data()[5] == 1.5);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_FALSE(t.has_grad());
  CHECK_THROWS_AS(t.grad(), std::logic_error);
  t.ensure_grad();
  CHECK(t.grad().size() == t.size());
}

TEST_CASE("tensor copies alias storage; clone does not") {
  Tensor a({2}, 1.0);
  Tensor b = a;
  b.data()[0] = 7.0;
  CHECK(a.data()[0] == 7.0);
  Tensor c = a.clone();
  c.data()[0] = 3.0;
  CHECK(a.data()[0] == 7.0);
  CHECK(a.shares_storage_with(b));
  CHECK_FALSE(a.shares_storage_with(c));
}

TEST_CASE("conv2d hand examples") {
  Graph g;
  Tensor x({1, 1, 3, 3}, 1.0);
  Tensor k({1, 1, 1, 1}, std::vector<double>{2.0});
  Tensor b({1}, 0.0);
  Tensor y = ops::conv2d(g, x, k, b, 0);
  CHECK(y.shape() == Shape{1, 1, 3, 3});
  for (double v : y.data()) CHECK(v == 2.0);

  Tensor x2({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tensor k2({1, 1, 2, 2}, std::vector<double>{1, 0, 0, 1});
  Tensor y2 = ops::conv2d(g, x2, k2, b, 0);
  CHECK(y2.shape() == Shape{1, 1, 1, 1});
  CHECK(y2.item() == 5.0);
}

TEST_CASE("conv2d rejects mismatched channels") {
  Graph g;
  Tensor x({1, 2, 4, 4});
  Tensor k({1, 3, 3, 3});
  CHECK_THROWS_AS(ops::conv2d(g, x, k, Tensor(), 1), ShapeError);
}

TEST_CASE("conv2d matches the nested-loop oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = random_tensor({2, 3, 5, 5}, rng);
    Tensor k = random_tensor({4, 3, 3, 3}, rng);
    Tensor b = random_tensor({4}, rng);
    Graph g;
    CHECK(max_abs_diff(ops::conv2d(g, x, k, b, 1), naive_conv2d(x, k, b, 1)) <= 1e-12);
    CHECK(max_abs_diff(ops::conv2d(g, x, k, b, 0), naive_conv2d(x, k, b, 0)) <= 1e-12);
  }
}

TEST_CASE("conv2d gradient check") {
  Rng rng(12);
  Tensor x = random_param({2, 3, 5, 4}, rng);
  Tensor k = random_param({2, 3, 3, 3}, rng);
  Tensor b = random_param({2}, rng);
  Tensor w = random_tensor({2, 2, 5, 4}, rng);
  auto r = grad_check({x, k, b}, [&](Graph& g) {
    return ops::sum(g, ops::mul(g, ops::conv2d(g, x, k, b, 1), w));
  });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("relu values and dead region") {
  Graph g;
  Tensor x({3}, std::vector<double>{-1, 0, 2});
  x.set_requires_grad();
  Tensor y = ops::relu(g, x);
  CHECK(y.data()[0] == 0.0);
  CHECK(y.data()[1] == 0.0);
  CHECK(y.data()[2] == 2.0);

  Graph g2;
  Tensor n({4}, -1.0);
  n.set_requires_grad();
  Tensor s = ops::sum(g2, ops::relu(g2, n));
  g2.backward(s);
  CHECK(s.item() == 0.0);
  for (double v : n.grad()) CHECK(v == 0.0);
}

TEST_CASE("relu gradient check away from zero") {
  Rng rng(13);
  Tensor x = random_param({2, 3, 4}, rng);
  for (double& v : x.data()) {
    if (std::abs(v) < 1e-3) v = 0.5;
  }
  Tensor w = random_tensor({2, 3, 4}, rng);
  auto r = grad_check({x}, [&](Graph& g) { return ops::sum(g, ops::mul(g, ops::relu(g, x), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
  CHECK(r.skipped == 0);
}

TEST_CASE("sigmoid values and gradient") {
  Graph g;
  Tensor x({3}, std::vector<double>{0.0, 800.0, -800.0});
  Tensor y = ops::sigmoid(g, x);
  CHECK(y.data()[0] == 0.5);
  CHECK(y.data()[1] == 1.0);
  CHECK(y.data()[2] >= 0.0);
  CHECK(std::isfinite(y.data()[2]));

  Rng rng(14);
  Tensor p = random_param({5, 2}, rng, -3, 3);
  Tensor w = random_tensor({5, 2}, rng);
  auto r = grad_check({p}, [&](Graph& gg) { return ops::sum(gg, ops::mul(gg, ops::sigmoid(gg, p), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("concat_channels layout, identity and gradients") {
  Graph g;
  Tensor a({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tensor b({1, 1, 2, 2}, std::vector<double>{5, 6, 7, 8});
  Tensor c = ops::concat_channels(g, {a, b});
  CHECK(c.shape() == Shape{1, 2, 2, 2});
  CHECK(c.at(0, 0, 1, 1) == 4.0);
  CHECK(c.at(0, 1, 0, 0) == 5.0);
  Tensor single = ops::concat_channels(g, {a});
  CHECK(max_abs_diff(single, a) == 0.0);

  CHECK_THROWS_AS(ops::concat_channels(g, {a, Tensor({1, 1, 3, 2})}), ShapeError);

  Rng rng(15);
  Tensor p = random_param({2, 2, 3, 3}, rng), q = random_param({2, 3, 3, 3}, rng);
  Graph g2;
  g2.backward(ops::sum(g2, ops::concat_channels(g2, {p, q})));
  for (double v : p.grad()) CHECK(v == 1.0);
  for (double v : q.grad()) CHECK(v == 1.0);
  Tensor w = random_tensor({2, 5, 3, 3}, rng);
  auto r = grad_check({p, q}, [&](Graph& gg) {
    return ops::sum(gg, ops::mul(gg, ops::concat_channels(gg, {p, q}), w));
  });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("slice_channels gradient") {
  Rng rng(16);
  Tensor x = random_param({2, 4, 3, 2}, rng);
  Tensor w = random_tensor({2, 2, 3, 2}, rng);
  auto r = grad_check({x}, [&](Graph& g) { return ops::sum(g, ops::mul(g, ops::slice_channels(g, x, 1, 2), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("mul_gate identity, annihilator and gradients") {
  Rng rng(17);
  Tensor f = random_param({2, 3, 4, 4}, rng);
  {
    Graph g;
    Tensor out = ops::mul_gate(g, f, Tensor({2, 1, 4, 4}, 1.0));
    CHECK(max_abs_diff(out, f) == 0.0);
  }
  {
    f.zero_grad();
    Graph g;
    Tensor zero({2, 1, 4, 4}, 0.0);
    Tensor out = ops::mul_gate(g, f, zero);
    for (double v : out.data()) CHECK(v == 0.0);
    g.backward(ops::sum(g, out));
    for (double v : f.grad()) CHECK(v == 0.0);
  }
  Graph g;
  CHECK_THROWS_AS(ops::mul_gate(g, f, Tensor({2, 2, 4, 4})), ShapeError);
  Tensor gate = random_param({2, 1, 4, 4}, rng);
  Tensor w = random_tensor({2, 3, 4, 4}, rng);
  auto r = grad_check({f, gate}, [&](Graph& gg) { return ops::sum(gg, ops::mul(gg, ops::mul_gate(gg, f, gate), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("upsample_bilinear closed forms") {
  Graph g;
  Tensor c({1, 2, 3, 2}, 4.25);
  Tensor up = ops::upsample_bilinear(g, c, 7, 5);
  CHECK(up.shape() == Shape{1, 2, 7, 5});
  for (double v : up.data()) CHECK(v == doctest::Approx(4.25).epsilon(1e-15));

  Tensor r({1, 1, 1, 2}, std::vector<double>{0.0, 1.0});
  Tensor u = ops::upsample_bilinear(g, r, 1, 3);
  CHECK(u.data()[0] == 0.0);
  CHECK(u.data()[1] == 0.5);
  CHECK(u.data()[2] == 1.0);

  CHECK_THROWS_AS(ops::upsample_bilinear(g, c, 2, 5), ShapeError);
}

TEST_CASE("upsample_bilinear gradient") {
  Rng rng(18);
  Tensor x = random_param({1, 2, 3, 4}, rng);
  Tensor w = random_tensor({1, 2, 6, 7}, rng);
  auto r = grad_check({x}, [&](Graph& g) { return ops::sum(g, ops::mul(g, ops::upsample_bilinear(g, x, 6, 7), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("max_pool2x2 values and gradient") {
  Graph g;
  Tensor x({1, 1, 2, 4}, std::vector<double>{1, 5, 2, 2, 3, 4, 0, 1});
  Tensor y = ops::max_pool2x2(g, x);
  CHECK(y.shape() == Shape{1, 1, 1, 2});
  CHECK(y.data()[0] == 5.0);
  CHECK(y.data()[1] == 2.0);

  Rng rng(19);
  Tensor p = random_param({2, 2, 4, 6}, rng);
  Tensor w = random_tensor({2, 2, 2, 3}, rng);
  auto r = grad_check({p}, [&](Graph& gg) { return ops::sum(gg, ops::mul(gg, ops::max_pool2x2(gg, p), w)); });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("add, scale and mul gradients") {
  Rng rng(20);
  Tensor a = random_param({3, 4}, rng), b = random_param({3, 4}, rng);
  auto r = grad_check({a, b}, [&](Graph& g) {
    return ops::sum(g, ops::mul(g, ops::add(g, a, ops::scale(g, b, -2.5)), a));
  });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("backward linearity and quadratic examples") {
  Rng rng(21);
  Tensor x = random_param({2, 3}, rng);
  {
    Graph g;
    g.backward(ops::sum(g, x));
    for (double v : x.grad()) CHECK(v == 1.0);
  }
  x.zero_grad();
  {
    Graph g;
    g.backward(ops::sum(g, ops::mul(g, x, x)));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(2 * x.data()[i]).epsilon(1e-15));
  }
}

TEST_CASE("backward rejects non-scalar losses and accumulates") {
  Rng rng(22);
  Tensor x = random_param({3}, rng);
  Graph g;
  Tensor y = ops::scale(g, x, 2.0);
  CHECK_THROWS_AS(g.backward(y), std::invalid_argument);

  x.zero_grad();
  for (int i = 0; i < 2; ++i) {
    Graph gg;
    gg.backward(ops::sum(gg, x));
  }
  for (double v : x.grad()) CHECK(v == 2.0);
}

TEST_CASE("an input feeding two consumers receives both path gradients") {
  Rng rng(23);
  Tensor x = random_param({1, 2, 4, 4}, rng);
  Tensor k = random_param({2, 2, 3, 3}, rng);
  auto loss = [&](Graph& g) {
    Tensor a = ops::relu(g, ops::conv2d(g, x, k, Tensor(), 1));
    Tensor b = ops::sigmoid(g, x);
    return ops::sum(g, ops::mul(g, a, b));
  };
  auto r = grad_check({x, k}, loss);
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("composite conv, relu, mul, sum passes the gradient check") {
  Rng rng(24);
  Tensor x = random_param({1, 3, 5, 5}, rng);
  Tensor k = random_param({4, 3, 3, 3}, rng);
  Tensor b = random_param({4}, rng);
  Tensor m = random_param({1, 4, 5, 5}, rng);
  auto r = grad_check({x, k, b, m}, [&](Graph& g) {
    return ops::sum(g, ops::mul(g, ops::relu(g, ops::conv2d(g, x, k, b, 1)), m));
  });
  CHECK_MESSAGE(r.ok(), r.worst);
}

TEST_CASE("operations are bit-deterministic") {
  auto run = [] {
    Rng rng(25);
    Tensor x = random_param({1, 3, 6, 6}, rng);
    Tensor k = random_param({2, 3, 3, 3}, rng);
    Graph g;
    Tensor y = ops::upsample_bilinear(g, ops::max_pool2x2(g, ops::relu(g, ops::conv2d(g, x, k, Tensor(), 1))), 6, 6);
    g.backward(ops::sum(g, y));
    std::vector<double> out(y.data().begin(), y.data().end());
    out.insert(out.end(), k.grad().begin(), k.grad().end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("sgd step examples") {
  Tensor p({1}, 1.0);
  p.set_requires_grad();
  SgdMomentum sgd({p}, 0.0, 0.0);
  CHECK_THROWS_AS(sgd.step(0.1), std::logic_error);
  sgd.zero_grad();
  sgd.step(0.1);
  CHECK(p.item() == 1.0);
  p.grad()[0] = 1.0;
  sgd.step(0.1);
  CHECK(p.item() == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("sgd momentum matches a scalar reference") {
  Tensor p({1}, 0.7);
  p.set_requires_grad();
  SgdMomentum sgd({p}, 0.9, 5e-4);
  double ref = 0.7, v = 0.0;
  for (int t = 0; t < 50; ++t) {
    const double grad = std::sin(t * 0.3) + ref;
    sgd.zero_grad();
    p.grad()[0] = grad;
    sgd.step(0.01);
    v = 0.9 * v + grad + 5e-4 * ref;
    ref -= 0.01 * v;
    CHECK(std::abs(p.item() - ref) <= 1e-12);
  }
}

TEST_CASE("sgd trajectories are reproducible") {
  auto run = [] {
    Rng rng(26);
    Tensor p = random_param({4}, rng);
    SgdMomentum sgd({p}, 0.9, 5e-4);
    for (int t = 0; t < 20; ++t) {
      sgd.zero_grad();
      Graph g;
      g.backward(ops::sum(g, ops::mul(g, p, p)));
      sgd.step(0.05);
    }
    return std::vector<double>(p.data().begin(), p.data().end());
  };
  CHECK(run() == run());
}

TEST_CASE("adam examples and scalar reference") {
  Tensor z({2}, 0.5);
  z.set_requires_grad();
  Adam fixed({z}, 0.9, 0.99, 0.0);
  fixed.zero_grad();
  fixed.step(0.001);
  CHECK(z.data()[0] == 0.5);

  Tensor p({1}, 2.0);
  p.set_requires_grad();
  Adam one({p}, 0.9, 0.99, 0.0);
  one.zero_grad();
  p.grad()[0] = 1.0;
  one.step(0.001);
  CHECK(std::abs((2.0 - p.item()) - 0.001) < 1e-10);

  Tensor q({1}, -0.3);
  q.set_requires_grad();
  Adam adam({q}, 0.9, 0.99, 1e-3);
  double ref = -0.3, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const double grad = std::cos(0.1 * t) * 2.0 + ref;
    adam.zero_grad();
    q.grad()[0] = grad;
    adam.step(0.01);
    const double gw = grad + 1e-3 * ref;
    m = 0.9 * m + 0.1 * gw;
    v = 0.99 * v + 0.01 * gw * gw;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.99, t));
    ref -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(std::abs(q.item() - ref) <= 1e-12);
  }
  CHECK(adam.steps_taken() == 100);
}

TEST_CASE("aliased parameters are updated once") {
  Tensor p({1}, 1.0);
  p.set_requires_grad();
  Tensor alias = p;
  const auto unique = unique_params({p, alias});
  CHECK(unique.size() == 1);
}
