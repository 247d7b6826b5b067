#include <doctest.h>

#include "afford/gradcheck.hpp"
#include "afford/ops.hpp"
#include "afford/rng.hpp"

using namespace afford;

TEST_SUITE("numeric-core") {

TEST_CASE("gradient check on a linear+relu composite (seed 11)") {
  Rng rng(11);
  ParamStore store;
  store.add("w", Tensor::glorot(4, 5, rng));
  Tensor b = Tensor::zeros({4});
  for (int i = 0; i < 4; ++i) b[i] = rng.uniform(-0.5, 0.5);
  store.add("b", b);
  Tensor x = Tensor::zeros({5});
  for (int i = 0; i < 5; ++i) x[i] = rng.uniform(-1, 1);

  auto loss = [&]() {
    Tensor y = relu(linear(store.at("w").value, store.at("b").value, x));
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i) s += y[i] * y[i];
    return 0.5 * s;
  };
  auto backward = [&]() {
    Tensor y = relu(linear(store.at("w").value, store.at("b").value, x));
    Tensor dpre = relu_backward(y, y);
    LinearGrads g = linear_backward(store.at("w").value, x, dpre);
    for (int i = 0; i < g.dw.size(); ++i) store.at("w").grad[i] += g.dw[i];
    for (int i = 0; i < g.db.size(); ++i) store.at("b").grad[i] += g.db[i];
  };

  GradCheckReport report = gradient_check(store, loss, backward, 1e-5);
  CHECK(report.max_rel_err <= 1e-5);
  CHECK(report.per_param.size() == 2);
}

TEST_CASE("gradient check flags a wrong backward") {
  ParamStore store;
  store.add("w", Tensor({2}, {0.3, -0.7}));
  auto loss = [&]() {
    const Tensor& w = store.at("w").value;
    return w[0] * w[0] + 3.0 * w[1];
  };
  auto backward = [&]() {
    store.at("w").grad[0] = 2.0 * store.at("w").value[0];
    store.at("w").grad[1] = -3.0;  // sign flipped on purpose
  };
  GradCheckReport report = gradient_check(store, loss, backward, 1e-5);
  CHECK(report.max_rel_err > 0.5);
  CHECK(report.worst_param == "w");
  CHECK(report.worst_index == 1);
}

TEST_CASE("non-deterministic forward closure is rejected") {
  ParamStore store;
  store.add("w", Tensor({1}, {1.0}));
  int calls = 0;
  auto loss = [&]() { return store.at("w").value[0] + 0.001 * (calls++); };
  auto backward = [&]() { store.at("w").grad[0] = 1.0; };
  CHECK_THROWS_AS(gradient_check(store, loss, backward, 1e-5), NumericError);
}

}  // TEST_SUITE
