#include "afford/decoder.hpp"

#include <cmath>

#include "afford/linalg.hpp"
#include "afford/ops.hpp"

namespace afford {

namespace {

inline double sigmoid_s(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<int> masked_content(const std::vector<int>& content_ids, int vocab) {
  std::vector<int> out;
  for (int id : content_ids) {
    if (id == Vocabulary::kEos) break;
    if (id == Vocabulary::kPad) continue;
    if (id < 0 || id >= vocab) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(vocab));
    }
    out.push_back(id);
  }
  return out;
}

struct GateViews {
  const Param *w, *u, *b;
};

}  // namespace

DecoderParams add_decoder_params(ParamStore& store, const DecoderConfig& cfg, Rng& rng,
                                 const std::string& prefix) {
  int h = cfg.hidden;
  DecoderParams p;
  p.embed = &store.add(prefix + ".embed", Tensor::glorot(cfg.vocab, h, rng));
  p.w_i = &store.add(prefix + ".lstm.w_i", Tensor::glorot(h, h, rng));
  p.u_i = &store.add(prefix + ".lstm.u_i", Tensor::glorot(h, h, rng));
  p.b_i = &store.add(prefix + ".lstm.b_i", Tensor::zeros({h}));
  p.w_f = &store.add(prefix + ".lstm.w_f", Tensor::glorot(h, h, rng));
  p.u_f = &store.add(prefix + ".lstm.u_f", Tensor::glorot(h, h, rng));
  p.b_f = &store.add(prefix + ".lstm.b_f", Tensor::zeros({h}));
  p.w_o = &store.add(prefix + ".lstm.w_o", Tensor::glorot(h, h, rng));
  p.u_o = &store.add(prefix + ".lstm.u_o", Tensor::glorot(h, h, rng));
  p.b_o = &store.add(prefix + ".lstm.b_o", Tensor::zeros({h}));
  p.w_g = &store.add(prefix + ".lstm.w_g", Tensor::glorot(h, h, rng));
  p.u_g = &store.add(prefix + ".lstm.u_g", Tensor::glorot(h, h, rng));
  p.b_g = &store.add(prefix + ".lstm.b_g", Tensor::zeros({h}));
  p.w_out = &store.add(prefix + ".out.w", Tensor::glorot(cfg.vocab, h, rng));
  p.b_out = &store.add(prefix + ".out.b", Tensor::zeros({cfg.vocab}));
  p.w_cond = &store.add(prefix + ".cond.w", Tensor::glorot(h, cfg.cond_dim, rng));
  p.b_cond = &store.add(prefix + ".cond.b", Tensor::zeros({h}));
  return p;
}

DecoderParams bind_decoder_params(ParamStore& store, const std::string& prefix) {
  DecoderParams p;
  p.embed = &store.at(prefix + ".embed");
  p.w_i = &store.at(prefix + ".lstm.w_i");
  p.u_i = &store.at(prefix + ".lstm.u_i");
  p.b_i = &store.at(prefix + ".lstm.b_i");
  p.w_f = &store.at(prefix + ".lstm.w_f");
  p.u_f = &store.at(prefix + ".lstm.u_f");
  p.b_f = &store.at(prefix + ".lstm.b_f");
  p.w_o = &store.at(prefix + ".lstm.w_o");
  p.u_o = &store.at(prefix + ".lstm.u_o");
  p.b_o = &store.at(prefix + ".lstm.b_o");
  p.w_g = &store.at(prefix + ".lstm.w_g");
  p.u_g = &store.at(prefix + ".lstm.u_g");
  p.b_g = &store.at(prefix + ".lstm.b_g");
  p.w_out = &store.at(prefix + ".out.w");
  p.b_out = &store.at(prefix + ".out.b");
  p.w_cond = &store.at(prefix + ".cond.w");
  p.b_cond = &store.at(prefix + ".cond.b");
  return p;
}

namespace {

void lstm_step(const DecoderParams& p, int h, const double* e, const double* h_prev,
               const double* c_prev, double* i, double* f, double* o, double* g, double* c,
               double* tc, double* h_out) {
  std::vector<double> a(static_cast<size_t>(h));
  auto gate = [&](const Param* w, const Param* u, const Param* b, double* out, bool is_tanh) {
    linalg::matvec(w->value.data(), h, h, e, a.data());
    linalg::matvec_add(u->value.data(), h, h, h_prev, a.data());
    for (int k = 0; k < h; ++k) {
      double pre = a[static_cast<size_t>(k)] + b->value[k];
      out[k] = is_tanh ? std::tanh(pre) : sigmoid_s(pre);
    }
  };
  gate(p.w_i, p.u_i, p.b_i, i, false);
  gate(p.w_f, p.u_f, p.b_f, f, false);
  gate(p.w_o, p.u_o, p.b_o, o, false);
  gate(p.w_g, p.u_g, p.b_g, g, true);
  for (int k = 0; k < h; ++k) {
    c[k] = f[k] * c_prev[k] + i[k] * g[k];
    tc[k] = std::tanh(c[k]);
    h_out[k] = o[k] * tc[k];
  }
}

}  // namespace

double teacher_forced_loss(const double* ho, const std::vector<int>& content_ids,
                           const DecoderParams& params, const DecoderConfig& cfg,
                           DecoderTrace* trace_out) {
  std::vector<int> words = masked_content(content_ids, cfg.vocab);
  if (words.empty() && content_ids.empty()) {
    throw DataError("teacher_forced_loss: target sentence is empty");
  }
  int h = cfg.hidden;
  DecoderTrace trace;
  trace.inputs.push_back(Vocabulary::kBos);
  for (int w : words) trace.inputs.push_back(w);
  trace.targets = words;
  trace.targets.push_back(Vocabulary::kEos);
  trace.steps = static_cast<int>(trace.targets.size());

  trace.h_init = Tensor::zeros({h});
  linalg::matvec(params.w_cond->value.data(), h, cfg.cond_dim, ho, trace.h_init.data());
  linalg::add(trace.h_init.data(), params.b_cond->value.data(), h);

  int n = trace.steps;
  auto blank = [&](std::vector<Tensor>& v) { v.assign(static_cast<size_t>(n), Tensor::zeros({h})); };
  blank(trace.i);
  blank(trace.f);
  blank(trace.o);
  blank(trace.g);
  blank(trace.c);
  blank(trace.tc);
  blank(trace.h);
  trace.logits.assign(static_cast<size_t>(n), Tensor::zeros({cfg.vocab}));

  Tensor zero_c = Tensor::zeros({h});
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    const double* e = params.embed->value.row(trace.inputs[static_cast<size_t>(t)]);
    const double* h_prev = t == 0 ? trace.h_init.data() : trace.h[static_cast<size_t>(t - 1)].data();
    const double* c_prev = t == 0 ? zero_c.data() : trace.c[static_cast<size_t>(t - 1)].data();
    lstm_step(params, h, e, h_prev, c_prev, trace.i[static_cast<size_t>(t)].data(),
              trace.f[static_cast<size_t>(t)].data(), trace.o[static_cast<size_t>(t)].data(),
              trace.g[static_cast<size_t>(t)].data(), trace.c[static_cast<size_t>(t)].data(),
              trace.tc[static_cast<size_t>(t)].data(), trace.h[static_cast<size_t>(t)].data());
    Tensor& logits = trace.logits[static_cast<size_t>(t)];
    linalg::matvec(params.w_out->value.data(), cfg.vocab, h, trace.h[static_cast<size_t>(t)].data(),
                   logits.data());
    linalg::add(logits.data(), params.b_out->value.data(), cfg.vocab);
    total += cross_entropy(logits, trace.targets[static_cast<size_t>(t)]);
  }
  trace.loss = total / n;
  if (trace_out) *trace_out = std::move(trace);
  return total / n;
}

void decoder_backward(const double* ho, const DecoderParams& params, const DecoderConfig& cfg,
                      const DecoderTrace& trace, double* dho, double scale) {
  int h = cfg.hidden;
  int n = trace.steps;
  scale /= n;

  Tensor zero_c = Tensor::zeros({h});
  std::vector<double> dh(static_cast<size_t>(h), 0.0);
  std::vector<double> dc(static_cast<size_t>(h), 0.0);
  std::vector<double> da(static_cast<size_t>(h));
  std::vector<double> dgate(static_cast<size_t>(h));

  for (int t = n - 1; t >= 0; --t) {
    const double* h_prev = t == 0 ? trace.h_init.data() : trace.h[static_cast<size_t>(t - 1)].data();
    const double* c_prev = t == 0 ? zero_c.data() : trace.c[static_cast<size_t>(t - 1)].data();
    const double* e = params.embed->value.row(trace.inputs[static_cast<size_t>(t)]);

    // output projection + cross entropy at step t
    Tensor dlogits = cross_entropy_grad(trace.logits[static_cast<size_t>(t)],
                                        trace.targets[static_cast<size_t>(t)]);
    for (int k = 0; k < dlogits.size(); ++k) dlogits[k] *= scale;
    linalg::outer_add(params.w_out->grad.data(), dlogits.data(), cfg.vocab,
                      trace.h[static_cast<size_t>(t)].data(), h);
    linalg::add(params.b_out->grad.data(), dlogits.data(), cfg.vocab);
    linalg::matvec_t_add(params.w_out->value.data(), cfg.vocab, h, dlogits.data(), dh.data());

    const double* iv = trace.i[static_cast<size_t>(t)].data();
    const double* fv = trace.f[static_cast<size_t>(t)].data();
    const double* ov = trace.o[static_cast<size_t>(t)].data();
    const double* gv = trace.g[static_cast<size_t>(t)].data();
    const double* tcv = trace.tc[static_cast<size_t>(t)].data();

    // h = o ⊙ tanh(c)
    for (int k = 0; k < h; ++k) {
      dc[static_cast<size_t>(k)] += dh[static_cast<size_t>(k)] * ov[k] * (1.0 - tcv[k] * tcv[k]);
    }

    std::vector<double> dh_prev(static_cast<size_t>(h), 0.0);
    std::vector<double> de(static_cast<size_t>(h), 0.0);

    auto gate_backward = [&](Param* w, Param* u, Param* b, const double* gate, bool is_tanh) {
      for (int k = 0; k < h; ++k) {
        double local = is_tanh ? (1.0 - gate[k] * gate[k]) : gate[k] * (1.0 - gate[k]);
        da[static_cast<size_t>(k)] = dgate[static_cast<size_t>(k)] * local;
      }
      linalg::outer_add(w->grad.data(), da.data(), h, e, h);
      linalg::outer_add(u->grad.data(), da.data(), h, h_prev, h);
      linalg::add(b->grad.data(), da.data(), h);
      linalg::matvec_t_add(w->value.data(), h, h, da.data(), de.data());
      linalg::matvec_t_add(u->value.data(), h, h, da.data(), dh_prev.data());
    };

    // c = f ⊙ c_prev + i ⊙ g
    for (int k = 0; k < h; ++k) dgate[static_cast<size_t>(k)] = dh[static_cast<size_t>(k)] * tcv[k];
    gate_backward(params.w_o, params.u_o, params.b_o, ov, false);
    for (int k = 0; k < h; ++k) dgate[static_cast<size_t>(k)] = dc[static_cast<size_t>(k)] * gv[k];
    gate_backward(params.w_i, params.u_i, params.b_i, iv, false);
    for (int k = 0; k < h; ++k) dgate[static_cast<size_t>(k)] = dc[static_cast<size_t>(k)] * c_prev[k];
    gate_backward(params.w_f, params.u_f, params.b_f, fv, false);
    for (int k = 0; k < h; ++k) dgate[static_cast<size_t>(k)] = dc[static_cast<size_t>(k)] * iv[k];
    gate_backward(params.w_g, params.u_g, params.b_g, gv, true);

    linalg::add(params.embed->grad.row(trace.inputs[static_cast<size_t>(t)]), de.data(), h);

    for (int k = 0; k < h; ++k) {
      dc[static_cast<size_t>(k)] *= fv[k];  // into c_{t-1}
      dh[static_cast<size_t>(k)] = dh_prev[static_cast<size_t>(k)];
    }
  }

  // h_init = W_cond ho + b_cond
  linalg::outer_add(params.w_cond->grad.data(), dh.data(), h, ho, cfg.cond_dim);
  linalg::add(params.b_cond->grad.data(), dh.data(), h);
  if (dho) linalg::matvec_t_add(params.w_cond->value.data(), h, cfg.cond_dim, dh.data(), dho);
}

Sentence decode_greedy(const double* ho, const DecoderParams& params, const DecoderConfig& cfg,
                       int max_len) {
  int h = cfg.hidden;
  Tensor h_state = Tensor::zeros({h});
  linalg::matvec(params.w_cond->value.data(), h, cfg.cond_dim, ho, h_state.data());
  linalg::add(h_state.data(), params.b_cond->value.data(), h);
  Tensor c_state = Tensor::zeros({h});

  Tensor i = Tensor::zeros({h}), f = Tensor::zeros({h}), o = Tensor::zeros({h}),
         g = Tensor::zeros({h}), c = Tensor::zeros({h}), tc = Tensor::zeros({h}),
         hn = Tensor::zeros({h});
  Tensor logits = Tensor::zeros({cfg.vocab});

  Sentence out;
  int token = Vocabulary::kBos;
  for (int step = 0; step < max_len; ++step) {
    lstm_step(params, h, params.embed->value.row(token), h_state.data(), c_state.data(),
              i.data(), f.data(), o.data(), g.data(), c.data(), tc.data(), hn.data());
    linalg::matvec(params.w_out->value.data(), cfg.vocab, h, hn.data(), logits.data());
    linalg::add(logits.data(), params.b_out->value.data(), cfg.vocab);
    int best = 0;
    for (int k = 1; k < cfg.vocab; ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    if (best == Vocabulary::kEos) return out;
    out.ids.push_back(best);
    token = best;
    h_state = hn;
    c_state = c;
  }
  out.truncated = true;
  return out;
}

}  // namespace afford
