#include <doctest.h>

#include <cmath>

#include "afford/ops.hpp"
#include "afford/rng.hpp"
#include "afford/tensor.hpp"

using namespace afford;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_SUITE("numeric-core") {

TEST_CASE("tensor construction validates shape and finiteness") {
  CHECK_NOTHROW(Tensor({2, 2}, {1, 2, 3, 4}));
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), NumericError);
  CHECK_THROWS_AS(Tensor({2}, {1.0, std::nan("")}), NumericError);
  CHECK_THROWS_AS(Tensor({0}, {}), NumericError);
}

TEST_CASE("linear identity and zero-weight cases") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor zero_b = Tensor::zeros({2});
  Tensor x({2}, {3, 4});
  Tensor y = linear(eye, zero_b, x);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 4.0);

  Tensor w0 = Tensor::zeros({2, 2});
  Tensor b({2}, {1, 2});
  Tensor x9({2}, {9, 9});
  Tensor y0 = linear(w0, b, x9);
  CHECK(y0[0] == 1.0);
  CHECK(y0[1] == 2.0);
}

TEST_CASE("linear rejects mismatched shapes naming the operands") {
  Tensor w({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({2}, {0, 0});
  Tensor x({2}, {1, 1});
  try {
    linear(w, b, x);
    FAIL("expected a dimension error");
  } catch (const NumericError& e) {
    std::string msg = e.what();
    CHECK(msg.find("W=") != std::string::npos);
    CHECK(msg.find("x=") != std::string::npos);
  }
}

// Central finite differences written out inline; the analytic backward must
// match it without going through the gradcheck harness.
TEST_CASE("linear gradients match central finite differences (seed 7)") {
  Rng rng(7);
  const int m = 3, n = 3;
  Tensor w = random_tensor({m, n}, rng);
  Tensor b = random_tensor({m}, rng);
  Tensor x = random_tensor({n}, rng);
  Tensor dy = random_tensor({m}, rng);

  auto loss = [&]() {
    Tensor y = linear(w, b, x);
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += dy[i] * y[i];
    return s;
  };
  LinearGrads grads = linear_backward(w, x, dy);

  const double eps = 1e-5;
  double worst = 0.0;
  auto probe = [&](Tensor& t, const Tensor& analytic) {
    for (int i = 0; i < t.size(); ++i) {
      double saved = t[i];
      t[i] = saved + eps;
      double fp = loss();
      t[i] = saved - eps;
      double fm = loss();
      t[i] = saved;
      double numeric = (fp - fm) / (2 * eps);
      double rel = std::fabs(analytic[i] - numeric) /
                   std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  };
  probe(w, grads.dw);
  probe(b, grads.db);
  probe(x, grads.dx);
  CHECK(worst <= 1e-6);
}

TEST_CASE("activation values at fixed points") {
  Tensor r = relu(Tensor({3}, {-1, 0, 2}));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 2.0);

  Tensor s = softmax(Tensor({3}, {0, 0, 0}));
  for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  CHECK(sigmoid(Tensor({1}, {0}))[0] == 0.5);
  CHECK(afford::tanh(Tensor({1}, {0}))[0] == 0.0);
}

TEST_CASE("softmax sums to one and is shift invariant") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    int n = rng.uniform_int(1, 9);
    Tensor x = random_tensor({n}, rng, -5, 5);
    Tensor y = softmax(x);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(y[i] > 0.0);
      sum += y[i];
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-6);

    double c = rng.uniform(-10, 10);
    Tensor shifted = x;
    for (int i = 0; i < n; ++i) shifted[i] += c;
    Tensor y2 = softmax(shifted);
    for (int i = 0; i < n; ++i) CHECK(std::fabs(y[i] - y2[i]) <= 1e-9);
  }
}

TEST_CASE("activation backwards match finite differences") {
  Rng rng(17);
  Tensor x = random_tensor({6}, rng, -2, 2);
  Tensor dy = random_tensor({6}, rng);
  const double eps = 1e-6;

  auto check_one = [&](auto fwd, auto bwd) {
    Tensor y = fwd(x);
    Tensor dx = bwd(y, dy);
    for (int i = 0; i < x.size(); ++i) {
      double saved = x[i];
      x[i] = saved + eps;
      Tensor yp = fwd(x);
      x[i] = saved - eps;
      Tensor ym = fwd(x);
      x[i] = saved;
      double numeric = 0.0;
      for (int j = 0; j < x.size(); ++j) numeric += dy[j] * (yp[j] - ym[j]) / (2 * eps);
      CHECK(std::fabs(dx[i] - numeric) <=
            1e-5 * std::max({std::fabs(dx[i]), std::fabs(numeric), 1.0}));
    }
  };
  check_one([](const Tensor& t) { return sigmoid(t); },
            [](const Tensor& y, const Tensor& g) { return sigmoid_backward(y, g); });
  check_one([](const Tensor& t) { return afford::tanh(t); },
            [](const Tensor& y, const Tensor& g) { return tanh_backward(y, g); });
  check_one([](const Tensor& t) { return softmax(t); },
            [](const Tensor& y, const Tensor& g) { return softmax_backward(y, g); });
}

TEST_CASE("cross entropy fixed values") {
  Tensor confident({3}, {50, 0, -10});
  CHECK(cross_entropy(confident, 0) == doctest::Approx(0.0).epsilon(1e-12));
  Tensor uniform2({2}, {0, 0});
  CHECK(cross_entropy(uniform2, 0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(cross_entropy(uniform2, 2), NumericError);
  CHECK_THROWS_AS(cross_entropy(uniform2, -1), NumericError);
}

TEST_CASE("cross entropy gradient matches finite differences (seed 3)") {
  Rng rng(3);
  const int k = 7;
  Tensor logits = random_tensor({k}, rng, -2, 2);
  int target = rng.uniform_int(0, k - 1);
  Tensor grad = cross_entropy_grad(logits, target);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    double saved = logits[i];
    logits[i] = saved + eps;
    double fp = cross_entropy(logits, target);
    logits[i] = saved - eps;
    double fm = cross_entropy(logits, target);
    logits[i] = saved;
    double numeric = (fp - fm) / (2 * eps);
    worst = std::max(worst, std::fabs(grad[i] - numeric) /
                                std::max({std::fabs(grad[i]), std::fabs(numeric), 1e-8}));
  }
  CHECK(worst <= 1e-6);
}

}  // TEST_SUITE
