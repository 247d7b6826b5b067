#include <doctest.h>

#include <cmath>

#include "afford/decoder.hpp"
#include "afford/gradcheck.hpp"
#include "afford/param_store.hpp"
#include "afford/rng.hpp"

using namespace afford;

namespace {

struct Dec {
  ParamStore store;
  DecoderParams params;
  DecoderConfig cfg;
};

Dec make_decoder(uint64_t seed, int hidden = 12, int vocab = 11, int cond = 9) {
  Dec d;
  d.cfg = DecoderConfig{hidden, vocab, cond, 20};
  Rng rng(seed);
  d.params = add_decoder_params(d.store, d.cfg, rng, "dec");
  return d;
}

Tensor random_ho(int n, uint64_t seed) {
  Rng rng(seed);
  Tensor t = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) t[i] = rng.uniform(0, 1);
  return t;
}

}  // namespace

TEST_SUITE("decoder") {

TEST_CASE("tokenize lowercases, splits, strips terminal punctuation") {
  auto toks = tokenize("The chair, sadly, is Taken!");
  CHECK(toks == std::vector<std::string>{"the", "chair", "sadly", "is", "taken"});
  CHECK(tokenize("").empty());
}

TEST_CASE("vocabulary pruning at the frequency threshold") {
  Vocabulary v = Vocabulary::build({"a b", "a c"}, 2);
  CHECK(v.size() == 5);  // 4 reserved + "a"
  CHECK(v.id_of("a") == 4);
  CHECK(v.id_of("b") == Vocabulary::kUnk);
  CHECK(v.id_of("c") == Vocabulary::kUnk);

  Vocabulary all = Vocabulary::build({"a b", "a c"}, 1);
  CHECK(all.size() == 7);

  Vocabulary again = Vocabulary::build({"a b", "a c"}, 2);
  CHECK(again.tokens() == v.tokens());

  CHECK_THROWS_AS(Vocabulary::build({}, 2), DataError);
}

TEST_CASE("vocabulary round-trips sentences and files") {
  Vocabulary v = Vocabulary::build({"the chair is taken", "the chair is free"}, 1);
  std::string sentence = "the chair is free";
  CHECK(v.decode(v.encode(sentence)) == sentence);

  v.save("vocab_test.txt");
  Vocabulary loaded = Vocabulary::load("vocab_test.txt");
  CHECK(loaded.tokens() == v.tokens());
  CHECK(loaded.tokens()[0] == "<pad>");
  CHECK(loaded.tokens()[3] == "<unk>");
}

TEST_CASE("uniform output projection gives ln V per token") {
  Dec d = make_decoder(5);
  d.store.at("dec.out.w").value.fill(0.0);
  d.store.at("dec.out.b").value.fill(0.0);
  Tensor ho = random_ho(d.cfg.cond_dim, 1);
  double loss = teacher_forced_loss(ho.data(), {4, 5, 6}, d.params, d.cfg);
  CHECK(loss == doctest::Approx(std::log(d.cfg.vocab)).epsilon(1e-12));
}

TEST_CASE("loss is invariant to PAD tokens beyond EOS") {
  Dec d = make_decoder(6);
  Tensor ho = random_ho(d.cfg.cond_dim, 2);
  double plain = teacher_forced_loss(ho.data(), {4, 7, 5}, d.params, d.cfg);
  double padded = teacher_forced_loss(
      ho.data(), {4, 7, 5, Vocabulary::kEos, Vocabulary::kPad, Vocabulary::kPad}, d.params, d.cfg);
  CHECK(plain == padded);
}

TEST_CASE("vocabulary errors") {
  Dec d = make_decoder(7);
  Tensor ho = random_ho(d.cfg.cond_dim, 3);
  CHECK_THROWS_AS(teacher_forced_loss(ho.data(), {d.cfg.vocab + 1}, d.params, d.cfg), DataError);
  CHECK_THROWS_AS(teacher_forced_loss(ho.data(), {}, d.params, d.cfg), DataError);
}

TEST_CASE("teacher-forced gradients match finite differences on a 3-token target") {
  Dec d = make_decoder(8, 6, 9, 5);
  Tensor ho = random_ho(d.cfg.cond_dim, 4);
  std::vector<int> sentence = {4, 8, 5};
  auto loss = [&]() { return teacher_forced_loss(ho.data(), sentence, d.params, d.cfg); };
  auto backward = [&]() {
    DecoderTrace trace;
    teacher_forced_loss(ho.data(), sentence, d.params, d.cfg, &trace);
    decoder_backward(ho.data(), d.params, d.cfg, trace);
  };
  GradCheckReport report = gradient_check(d.store, loss, backward, 1e-5);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("gradient at the conditioning feature matches finite differences") {
  Dec d = make_decoder(9, 6, 9, 5);
  Tensor ho = random_ho(d.cfg.cond_dim, 5);
  std::vector<int> sentence = {4, 8, 5, 6};
  DecoderTrace trace;
  teacher_forced_loss(ho.data(), sentence, d.params, d.cfg, &trace);
  Tensor dho = Tensor::zeros({d.cfg.cond_dim});
  decoder_backward(ho.data(), d.params, d.cfg, trace, dho.data());
  const double eps = 1e-6;
  for (int i = 0; i < d.cfg.cond_dim; ++i) {
    double saved = ho[i];
    ho[i] = saved + eps;
    double fp = teacher_forced_loss(ho.data(), sentence, d.params, d.cfg);
    ho[i] = saved - eps;
    double fm = teacher_forced_loss(ho.data(), sentence, d.params, d.cfg);
    ho[i] = saved;
    double numeric = (fp - fm) / (2 * eps);
    CHECK(std::fabs(dho[i] - numeric) <=
          1e-4 * std::max({std::fabs(dho[i]), std::fabs(numeric), 1.0}));
  }
}

TEST_CASE("greedy decoding is deterministic and respects max_len") {
  Dec d = make_decoder(10);
  Tensor ho = random_ho(d.cfg.cond_dim, 6);
  Sentence a = decode_greedy(ho.data(), d.params, d.cfg, 20);
  Sentence b = decode_greedy(ho.data(), d.params, d.cfg, 20);
  CHECK(a.ids == b.ids);
  CHECK(a.truncated == b.truncated);

  Sentence one = decode_greedy(ho.data(), d.params, d.cfg, 1);
  CHECK(one.ids.size() <= 1);
}

TEST_CASE("overfitting one sample reproduces the sentence via greedy decode") {
  // at the default hidden size the sample is memorized in a few hundred steps
  Dec d = make_decoder(11, 128, 12, 10);
  Tensor ho = random_ho(d.cfg.cond_dim, 7);
  std::vector<int> sentence = {4, 9, 6, 11, 5};  // 5 tokens

  AdamConfig adam;
  adam.learning_rate = 3e-4;
  adam.clip_norm = 5.0;
  double prev = 1e300;
  double loss = 0.0;
  int step = 0;
  bool decreased_strictly = true;
  for (; step < 500; ++step) {
    DecoderTrace trace;
    loss = teacher_forced_loss(ho.data(), sentence, d.params, d.cfg, &trace);
    if (step < 50 && loss >= prev) decreased_strictly = false;
    prev = loss;
    if (loss < 0.05) break;
    decoder_backward(ho.data(), d.params, d.cfg, trace);
    adam_step(d.store, adam, 1);
  }
  CHECK(decreased_strictly);
  CHECK(loss < 0.1);  // within 500 steps
  Sentence decoded = decode_greedy(ho.data(), d.params, d.cfg, 20);
  CHECK(decoded.ids == sentence);
  CHECK_FALSE(decoded.truncated);
}

}  // TEST_SUITE
