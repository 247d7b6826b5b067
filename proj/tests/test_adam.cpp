#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "afford/checkpoint.hpp"
#include "afford/param_store.hpp"
#include "afford/rng.hpp"

using namespace afford;

namespace {

ParamStore make_store(uint64_t seed) {
  Rng rng(seed);
  ParamStore store;
  store.add("a", Tensor::glorot(3, 4, rng));
  store.add("b", Tensor::glorot(2, 2, rng));
  return store;
}

}  // namespace

TEST_SUITE("numeric-core") {

TEST_CASE("adam with zero gradients is the identity on parameters") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ParamStore store = make_store(seed);
    std::vector<double> before = store.at("a").value.values();
    adam_step(store, AdamConfig{}, 1);
    CHECK(store.at("a").value.values() == before);
    CHECK(store.step() == 1);
  }
}

TEST_CASE("first adam step moves a scalar by about -lr * sign(g)") {
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  ParamStore store;
  store.add("w", Tensor({1}, {0.5}));
  store.at("w").grad[0] = 0.37;  // any positive constant
  adam_step(store, cfg, 1);
  // Bias-corrected magnitude is lr * |g| / (|g| + eps') ~ lr.
  CHECK(store.at("w").value[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-4));
  CHECK(store.at("w").grad[0] == 0.0);  // gradients are zeroed after the step
}

TEST_CASE("two successive steps are bit-identical across runs") {
  auto run = [](uint64_t seed) {
    ParamStore store = make_store(seed);
    Rng rng(seed + 100);
    for (int step = 0; step < 2; ++step) {
      for (auto& [name, p] : store.entries()) {
        Rng g(mix_seed(seed, static_cast<uint64_t>(step)));
        for (int i = 0; i < p.grad.size(); ++i) p.grad[i] = g.uniform(-1, 1);
      }
      adam_step(store, AdamConfig{}, 1);
    }
    return store.at("a").value.values();
  };
  CHECK(run(11) == run(11));
}

TEST_CASE("learning-rate decay schedule") {
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.decay_factor = 0.85;
  cfg.decay_after_epochs = 10;
  CHECK(cfg.effective_lr(1) == 1e-3);
  CHECK(cfg.effective_lr(10) == 1e-3);
  CHECK(cfg.effective_lr(11) == doctest::Approx(1e-3 * 0.85));
  CHECK(cfg.effective_lr(12) == doctest::Approx(1e-3 * 0.85 * 0.85));

  cfg.decay_once = true;
  CHECK(cfg.effective_lr(11) == doctest::Approx(1e-3 * 0.85));
  CHECK(cfg.effective_lr(30) == doctest::Approx(1e-3 * 0.85));
}

TEST_CASE("NaN gradient aborts naming the parameter") {
  ParamStore store = make_store(2);
  store.at("b").grad[0] = std::nan("");
  try {
    adam_step(store, AdamConfig{}, 1);
    FAIL("expected divergence error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("global-norm clipping rescales long gradients only") {
  ParamStore store;
  store.add("w", Tensor::zeros({4}));
  for (int i = 0; i < 4; ++i) store.at("w").grad[i] = 3.0;  // norm 6
  store.clip_gradients(5.0);
  CHECK(store.global_grad_norm() == doctest::Approx(5.0));
  for (int i = 0; i < 4; ++i) store.at("w").grad[i] = 0.1;
  double before = store.global_grad_norm();
  store.clip_gradients(5.0);
  CHECK(store.global_grad_norm() == before);
}

TEST_CASE("checkpoint round-trips bitwise at both precisions") {
  ParamStore store = make_store(9);
  Rng rng(33);
  for (auto& [name, p] : store.entries()) {
    for (int i = 0; i < p.grad.size(); ++i) {
      p.m[i] = rng.uniform(-1, 1);
      p.v[i] = rng.uniform(0, 1);
    }
  }
  store.set_step(42);

  std::string path64 = "ckpt_test_f64.bin";
  save_checkpoint(path64, store, 7, Precision::f64, {{"note", "x"}});
  Checkpoint ck = load_checkpoint(path64);
  CHECK(ck.epoch == 7);
  CHECK(ck.store.step() == 42);
  CHECK(ck.meta.at("note") == "x");
  for (auto& [name, p] : store.entries()) {
    CHECK(ck.store.at(name).value.values() == p.value.values());
    CHECK(ck.store.at(name).m.values() == p.m.values());
    CHECK(ck.store.at(name).v.values() == p.v.values());
  }

  // f32: save -> load -> save must reproduce the first file byte for byte.
  std::string path32a = "ckpt_test_f32a.bin";
  std::string path32b = "ckpt_test_f32b.bin";
  save_checkpoint(path32a, store, 7, Precision::f32);
  Checkpoint ck32 = load_checkpoint(path32a);
  save_checkpoint(path32b, ck32.store, ck32.epoch, Precision::f32);
  std::ifstream fa(path32a, std::ios::binary), fb(path32b, std::ios::binary);
  std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ba == bb);
}

}  // TEST_SUITE
