#pragma once

#include <string>
#include <vector>

#include "afford/param_store.hpp"
#include "afford/rng.hpp"
#include "afford/vocab.hpp"

namespace afford {

// BOS/EOS-delimited token sequence; `ids` holds the content tokens only.
struct Sentence {
  std::vector<int> ids;
  bool truncated = false;  // hit max_len before emitting EOS
};

struct DecoderConfig {
  int hidden = 128;
  int vocab = 0;
  int cond_dim = 128;  // length of the conditioning feature h^o
  int max_len = 20;
};

// Captioning LSTM conditioned on h^o through an affine projection that
// initializes the hidden state (cell state starts at zero).
struct DecoderParams {
  Param* embed = nullptr;  // V x H
  Param* w_i = nullptr;
  Param* u_i = nullptr;
  Param* b_i = nullptr;
  Param* w_f = nullptr;
  Param* u_f = nullptr;
  Param* b_f = nullptr;
  Param* w_o = nullptr;
  Param* u_o = nullptr;
  Param* b_o = nullptr;
  Param* w_g = nullptr;
  Param* u_g = nullptr;
  Param* b_g = nullptr;
  Param* w_out = nullptr;  // V x H
  Param* b_out = nullptr;  // V
  Param* w_cond = nullptr;  // H x cond_dim
  Param* b_cond = nullptr;  // H
};

DecoderParams add_decoder_params(ParamStore& store, const DecoderConfig& cfg, Rng& rng,
                                 const std::string& prefix);
DecoderParams bind_decoder_params(ParamStore& store, const std::string& prefix);

struct DecoderTrace {
  int steps = 0;
  std::vector<int> inputs;   // BOS, w1 .. wn
  std::vector<int> targets;  // w1 .. wn, EOS
  Tensor h_init;             // {H}
  std::vector<Tensor> i, f, o, g, c, tc, h;  // per step, {H}
  std::vector<Tensor> logits;                // per step, {V}
  double loss = 0.0;
};

// Mean per-token cross entropy of teacher-forced next-token prediction.
// PAD tokens and anything after an explicit EOS in `content_ids` are masked
// out of both inputs and targets.
double teacher_forced_loss(const double* ho, const std::vector<int>& content_ids,
                           const DecoderParams& params, const DecoderConfig& cfg,
                           DecoderTrace* trace_out = nullptr);

// Accumulates parameter gradients of (scale * traced loss); optionally adds
// the gradient at the conditioning feature into dho.
void decoder_backward(const double* ho, const DecoderParams& params, const DecoderConfig& cfg,
                      const DecoderTrace& trace, double* dho = nullptr, double scale = 1.0);

Sentence decode_greedy(const double* ho, const DecoderParams& params, const DecoderConfig& cfg,
                       int max_len = 20);

}  // namespace afford
