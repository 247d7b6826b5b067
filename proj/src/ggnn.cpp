#include "afford/ggnn.hpp"

#include <cmath>

#include "afford/linalg.hpp"
#include "afford/ops.hpp"

namespace afford {

namespace {

Tensor glorot_vec(int n) { return Tensor::zeros({n}); }

inline double sigmoid_s(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Neighbor states are summed in extended precision so the rounded result is
// independent of enumeration order; permutation equivariance then holds
// bitwise at 64-bit.
void sum_rows(const Tensor& states, const std::vector<int>& rows, int h, double* out) {
  std::vector<linalg::accum_t> acc(static_cast<size_t>(h), 0);
  for (int rindex : rows) {
    const double* src = states.row(rindex);
    for (int k = 0; k < h; ++k) acc[static_cast<size_t>(k)] += src[k];
  }
  for (int k = 0; k < h; ++k) out[k] = static_cast<double>(acc[static_cast<size_t>(k)]);
}

struct Kernels {
  const TrunkParams& p;
  const GgnnConfig& cfg;

  // gc/gf are the two ReLU factors, h0 their product. A dropped input
  // contributes an all-ones factor.
  void init_node(int class_id, const double* feature, const AblationFlags& ab, double* gc,
                 double* gf, double* h0) const {
    int h = cfg.hidden;
    if (ab.drop_class) {
      for (int k = 0; k < h; ++k) gc[k] = 1.0;
    } else {
      if (class_id < 0 || class_id >= cfg.num_classes) {
        throw DataError("unknown class id " + std::to_string(class_id) + ", model has " +
                        std::to_string(cfg.num_classes) + " classes");
      }
      const Tensor& wc = p.w_c->value;
      for (int k = 0; k < h; ++k) gc[k] = std::max(0.0, wc.at(k, class_id));
    }
    if (ab.drop_object_feature) {
      for (int k = 0; k < h; ++k) gf[k] = 1.0;
    } else {
      const Tensor& wf = p.w_f->value;
      linalg::matvec(wf.data(), h, cfg.feature_dim, feature, gf);
      for (int k = 0; k < h; ++k) gf[k] = std::max(0.0, gf[k]);
    }
    for (int k = 0; k < h; ++k) h0[k] = gc[k] * gf[k];
  }

  // x = W_p hsum + b_p
  void message(const double* hsum, double* x) const {
    int h = cfg.hidden;
    linalg::matvec(p.w_p->value.data(), h, h, hsum, x);
    linalg::add(x, p.b_p->value.data(), h);
  }

  void gru(const double* x, const double* h_prev, double* z, double* r, double* hc,
           double* h_out) const {
    int h = cfg.hidden;
    std::vector<double> a(static_cast<size_t>(h));
    // z = sigma(W_z x + U_z h + b_z)
    linalg::matvec(p.w_z->value.data(), h, h, x, a.data());
    linalg::matvec_add(p.u_z->value.data(), h, h, h_prev, a.data());
    for (int k = 0; k < h; ++k) z[k] = sigmoid_s(a[static_cast<size_t>(k)] + p.b_z->value[k]);
    // r = sigma(W_r x + U_r h + b_r)
    linalg::matvec(p.w_r->value.data(), h, h, x, a.data());
    linalg::matvec_add(p.u_r->value.data(), h, h, h_prev, a.data());
    for (int k = 0; k < h; ++k) r[k] = sigmoid_s(a[static_cast<size_t>(k)] + p.b_r->value[k]);
    // hc = tanh(W_h x + U_h (r ⊙ h) + b_h)
    std::vector<double> rh(static_cast<size_t>(h));
    for (int k = 0; k < h; ++k) rh[static_cast<size_t>(k)] = r[k] * h_prev[k];
    linalg::matvec(p.w_h->value.data(), h, h, x, a.data());
    linalg::matvec_add(p.u_h->value.data(), h, h, rh.data(), a.data());
    for (int k = 0; k < h; ++k) hc[k] = std::tanh(a[static_cast<size_t>(k)] + p.b_h->value[k]);
    // h = (1 - z) ⊙ h_prev + z ⊙ hc
    for (int k = 0; k < h; ++k) h_out[k] = (1.0 - z[k]) * h_prev[k] + z[k] * hc[k];
  }

  void fusion(const double* h_final, const double* h_init, const double* global,
              const double* action_emb, const AblationFlags& ab, double* concat,
              double* ho) const {
    int h = cfg.hidden;
    linalg::copy(concat, h_final, h);
    linalg::copy(concat + h, h_init, h);
    if (ab.drop_global) {
      for (int k = 0; k < cfg.global_dim; ++k) concat[2 * h + k] = 0.0;
    } else {
      linalg::copy(concat + 2 * h, global, cfg.global_dim);
    }
    if (cfg.action_embed_dim > 0) {
      linalg::copy(concat + 2 * h + cfg.global_dim, action_emb, cfg.action_embed_dim);
    }
    linalg::matvec(p.w_ho->value.data(), h, cfg.fusion_dim(), concat, ho);
    for (int k = 0; k < h; ++k) ho[k] = std::max(0.0, ho[k]);
  }
};

void validate_inputs(const SceneGraph& graph, const SceneInputs& inputs, const GgnnConfig& cfg) {
  if (static_cast<int>(inputs.nodes.size()) != graph.num_nodes()) {
    throw DataError("incomplete scene: " + std::to_string(graph.num_nodes()) +
                    " graph nodes but " + std::to_string(inputs.nodes.size()) + " node inputs");
  }
  for (const auto& node : inputs.nodes) {
    if (node.feature.size() != cfg.feature_dim) {
      throw DataError("node feature length " + std::to_string(node.feature.size()) +
                      " does not match model feature_dim " + std::to_string(cfg.feature_dim));
    }
  }
  if (inputs.global.size() != cfg.global_dim) {
    throw DataError("global feature length " + std::to_string(inputs.global.size()) +
                    " does not match model global_dim " + std::to_string(cfg.global_dim));
  }
  if (cfg.action_embed_dim > 0 &&
      (inputs.action_index < 0 || inputs.action_index >= cfg.num_actions)) {
    throw DataError("action index out of range");
  }
}

}  // namespace

TrunkParams add_trunk_params(ParamStore& store, const GgnnConfig& cfg, Rng& rng,
                             const std::string& prefix) {
  int h = cfg.hidden;
  TrunkParams p;
  p.w_c = &store.add(prefix + ".w_c", Tensor::glorot(h, cfg.num_classes, rng));
  p.w_f = &store.add(prefix + ".w_f", Tensor::glorot(h, cfg.feature_dim, rng));
  p.w_p = &store.add(prefix + ".w_p", Tensor::glorot(h, h, rng));
  p.b_p = &store.add(prefix + ".b_p", glorot_vec(h));
  p.w_z = &store.add(prefix + ".gru.w_z", Tensor::glorot(h, h, rng));
  p.u_z = &store.add(prefix + ".gru.u_z", Tensor::glorot(h, h, rng));
  p.b_z = &store.add(prefix + ".gru.b_z", glorot_vec(h));
  p.w_r = &store.add(prefix + ".gru.w_r", Tensor::glorot(h, h, rng));
  p.u_r = &store.add(prefix + ".gru.u_r", Tensor::glorot(h, h, rng));
  p.b_r = &store.add(prefix + ".gru.b_r", glorot_vec(h));
  p.w_h = &store.add(prefix + ".gru.w_h", Tensor::glorot(h, h, rng));
  p.u_h = &store.add(prefix + ".gru.u_h", Tensor::glorot(h, h, rng));
  p.b_h = &store.add(prefix + ".gru.b_h", glorot_vec(h));
  p.w_ho = &store.add(prefix + ".w_ho", Tensor::glorot(h, cfg.fusion_dim(), rng));
  if (cfg.action_embed_dim > 0) {
    p.action_embed = &store.add(prefix + ".action_embed",
                                Tensor::glorot(cfg.num_actions, cfg.action_embed_dim, rng));
  }
  return p;
}

TrunkParams bind_trunk_params(ParamStore& store, const GgnnConfig& cfg,
                              const std::string& prefix) {
  TrunkParams p;
  p.w_c = &store.at(prefix + ".w_c");
  p.w_f = &store.at(prefix + ".w_f");
  p.w_p = &store.at(prefix + ".w_p");
  p.b_p = &store.at(prefix + ".b_p");
  p.w_z = &store.at(prefix + ".gru.w_z");
  p.u_z = &store.at(prefix + ".gru.u_z");
  p.b_z = &store.at(prefix + ".gru.b_z");
  p.w_r = &store.at(prefix + ".gru.w_r");
  p.u_r = &store.at(prefix + ".gru.u_r");
  p.b_r = &store.at(prefix + ".gru.b_r");
  p.w_h = &store.at(prefix + ".gru.w_h");
  p.u_h = &store.at(prefix + ".gru.u_h");
  p.b_h = &store.at(prefix + ".gru.b_h");
  p.w_ho = &store.at(prefix + ".w_ho");
  if (cfg.action_embed_dim > 0) p.action_embed = &store.at(prefix + ".action_embed");
  return p;
}

RelHeadParams add_rel_head_params(ParamStore& store, int hidden, Rng& rng,
                                  const std::string& prefix) {
  RelHeadParams p;
  p.w1 = &store.add(prefix + ".w1", Tensor::glorot(hidden, hidden, rng));
  p.b1 = &store.add(prefix + ".b1", Tensor::zeros({hidden}));
  p.w2 = &store.add(prefix + ".w2", Tensor::glorot(kNumRelationships, hidden, rng));
  p.b2 = &store.add(prefix + ".b2", Tensor::zeros({kNumRelationships}));
  return p;
}

RelHeadParams bind_rel_head_params(ParamStore& store, const std::string& prefix) {
  RelHeadParams p;
  p.w1 = &store.at(prefix + ".w1");
  p.b1 = &store.at(prefix + ".b1");
  p.w2 = &store.at(prefix + ".w2");
  p.b2 = &store.at(prefix + ".b2");
  return p;
}

TrunkTrace trunk_forward(const SceneGraph& graph, const SceneInputs& inputs,
                         const TrunkParams& params, const GgnnConfig& cfg, int T,
                         const AblationFlags& ablation) {
  if (T < 0) throw DataError("propagation steps T must be >= 0");
  validate_inputs(graph, inputs, cfg);
  Kernels kernel{params, cfg};
  int m = graph.num_nodes();
  int h = cfg.hidden;

  TrunkTrace trace;
  trace.num_nodes = m;
  trace.T = T;
  trace.init_c = Tensor::zeros({m, h});
  trace.init_f = Tensor::zeros({m, h});
  trace.h.assign(static_cast<size_t>(T) + 1, Tensor::zeros({m, h}));
  trace.hsum.assign(static_cast<size_t>(T), Tensor::zeros({m, h}));
  trace.x.assign(static_cast<size_t>(T), Tensor::zeros({m, h}));
  trace.z.assign(static_cast<size_t>(T), Tensor::zeros({m, h}));
  trace.r.assign(static_cast<size_t>(T), Tensor::zeros({m, h}));
  trace.hc.assign(static_cast<size_t>(T), Tensor::zeros({m, h}));

  for (int v = 0; v < m; ++v) {
    kernel.init_node(inputs.nodes[static_cast<size_t>(v)].class_id,
                     inputs.nodes[static_cast<size_t>(v)].feature.data(), ablation,
                     trace.init_c.row(v), trace.init_f.row(v), trace.h[0].row(v));
  }

  auto adjacency = graph.in_neighbors();
  // Synchronous update: every step-t state is computed from step t-1 only.
  for (int t = 1; t <= T; ++t) {
    const Tensor& prev = trace.h[static_cast<size_t>(t - 1)];
    Tensor& hsum = trace.hsum[static_cast<size_t>(t - 1)];
    Tensor& x = trace.x[static_cast<size_t>(t - 1)];
    for (int v = 0; v < m; ++v) {
      sum_rows(prev, adjacency[static_cast<size_t>(v)], h, hsum.row(v));
      kernel.message(hsum.row(v), x.row(v));
    }
    for (int v = 0; v < m; ++v) {
      kernel.gru(x.row(v), prev.row(v), trace.z[static_cast<size_t>(t - 1)].row(v),
                 trace.r[static_cast<size_t>(t - 1)].row(v),
                 trace.hc[static_cast<size_t>(t - 1)].row(v),
                 trace.h[static_cast<size_t>(t)].row(v));
    }
  }

  trace.fusion_in = Tensor::zeros({m, cfg.fusion_dim()});
  trace.ho = Tensor::zeros({m, h});
  const double* action_emb = nullptr;
  if (cfg.action_embed_dim > 0) {
    action_emb = params.action_embed->value.row(inputs.action_index);
  }
  for (int v = 0; v < m; ++v) {
    kernel.fusion(trace.h[static_cast<size_t>(T)].row(v), trace.h[0].row(v),
                  inputs.global.data(), action_emb, ablation, trace.fusion_in.row(v),
                  trace.ho.row(v));
  }
  return trace;
}

void trunk_backward(const SceneGraph& graph, const SceneInputs& inputs,
                    const TrunkParams& params, const GgnnConfig& cfg, const TrunkTrace& trace,
                    const Tensor& dho, const AblationFlags& ablation) {
  int m = trace.num_nodes;
  int h = cfg.hidden;
  int T = trace.T;
  auto adjacency = graph.in_neighbors();

  // dh accumulates the gradient at h^t while walking t = T .. 0. The fusion
  // layer contributes to both h^T and h^0.
  Tensor dh = Tensor::zeros({m, h});
  Tensor dh0_fusion = Tensor::zeros({m, h});

  std::vector<double> da(static_cast<size_t>(h));
  std::vector<double> dconcat(static_cast<size_t>(cfg.fusion_dim()));

  for (int v = 0; v < m; ++v) {
    const double* ho = trace.ho.row(v);
    const double* g = dho.row(v);
    for (int k = 0; k < h; ++k) da[static_cast<size_t>(k)] = ho[k] > 0.0 ? g[k] : 0.0;
    linalg::outer_add(params.w_ho->grad.data(), da.data(), h, trace.fusion_in.row(v),
                      cfg.fusion_dim());
    std::fill(dconcat.begin(), dconcat.end(), 0.0);
    linalg::matvec_t_add(params.w_ho->value.data(), h, cfg.fusion_dim(), da.data(),
                         dconcat.data());
    linalg::add(dh.row(v), dconcat.data(), h);
    linalg::add(dh0_fusion.row(v), dconcat.data() + h, h);
    if (cfg.action_embed_dim > 0) {
      linalg::add(params.action_embed->grad.row(inputs.action_index),
                  dconcat.data() + 2 * h + cfg.global_dim, cfg.action_embed_dim);
    }
  }

  std::vector<double> dz(static_cast<size_t>(h)), dr(static_cast<size_t>(h)),
      dhc(static_cast<size_t>(h)), dx(static_cast<size_t>(h)), rh(static_cast<size_t>(h)),
      tmp(static_cast<size_t>(h));

  for (int t = T; t >= 1; --t) {
    const Tensor& h_prev = trace.h[static_cast<size_t>(t - 1)];
    const Tensor& z = trace.z[static_cast<size_t>(t - 1)];
    const Tensor& r = trace.r[static_cast<size_t>(t - 1)];
    const Tensor& hc = trace.hc[static_cast<size_t>(t - 1)];
    const Tensor& x = trace.x[static_cast<size_t>(t - 1)];
    const Tensor& hsum = trace.hsum[static_cast<size_t>(t - 1)];

    Tensor dh_prev = Tensor::zeros({m, h});
    Tensor dx_all = Tensor::zeros({m, h});

    for (int v = 0; v < m; ++v) {
      const double* dhv = dh.row(v);
      const double* zv = z.row(v);
      const double* rv = r.row(v);
      const double* hcv = hc.row(v);
      const double* hpv = h_prev.row(v);
      const double* xv = x.row(v);
      double* dhp = dh_prev.row(v);
      double* dxv = dx_all.row(v);

      // h = (1-z) ⊙ h_prev + z ⊙ hc
      for (int k = 0; k < h; ++k) {
        dz[static_cast<size_t>(k)] = dhv[k] * (hcv[k] - hpv[k]);
        dhc[static_cast<size_t>(k)] = dhv[k] * zv[k];
        dhp[k] += dhv[k] * (1.0 - zv[k]);
      }

      // candidate: hc = tanh(W_h x + U_h (r ⊙ h_prev) + b_h)
      for (int k = 0; k < h; ++k) {
        da[static_cast<size_t>(k)] = dhc[static_cast<size_t>(k)] * (1.0 - hcv[k] * hcv[k]);
        rh[static_cast<size_t>(k)] = rv[k] * hpv[k];
      }
      linalg::outer_add(params.w_h->grad.data(), da.data(), h, xv, h);
      linalg::outer_add(params.u_h->grad.data(), da.data(), h, rh.data(), h);
      linalg::add(params.b_h->grad.data(), da.data(), h);
      std::fill(dx.begin(), dx.end(), 0.0);
      linalg::matvec_t_add(params.w_h->value.data(), h, h, da.data(), dx.data());
      std::fill(tmp.begin(), tmp.end(), 0.0);
      linalg::matvec_t_add(params.u_h->value.data(), h, h, da.data(), tmp.data());
      for (int k = 0; k < h; ++k) {
        dr[static_cast<size_t>(k)] = tmp[static_cast<size_t>(k)] * hpv[k];
        dhp[k] += tmp[static_cast<size_t>(k)] * rv[k];
      }

      // reset gate: r = sigma(W_r x + U_r h_prev + b_r)
      for (int k = 0; k < h; ++k) {
        da[static_cast<size_t>(k)] = dr[static_cast<size_t>(k)] * rv[k] * (1.0 - rv[k]);
      }
      linalg::outer_add(params.w_r->grad.data(), da.data(), h, xv, h);
      linalg::outer_add(params.u_r->grad.data(), da.data(), h, hpv, h);
      linalg::add(params.b_r->grad.data(), da.data(), h);
      linalg::matvec_t_add(params.w_r->value.data(), h, h, da.data(), dx.data());
      linalg::matvec_t_add(params.u_r->value.data(), h, h, da.data(), dhp);

      // update gate: z = sigma(W_z x + U_z h_prev + b_z)
      for (int k = 0; k < h; ++k) {
        da[static_cast<size_t>(k)] = dz[static_cast<size_t>(k)] * zv[k] * (1.0 - zv[k]);
      }
      linalg::outer_add(params.w_z->grad.data(), da.data(), h, xv, h);
      linalg::outer_add(params.u_z->grad.data(), da.data(), h, hpv, h);
      linalg::add(params.b_z->grad.data(), da.data(), h);
      linalg::matvec_t_add(params.w_z->value.data(), h, h, da.data(), dx.data());
      linalg::matvec_t_add(params.u_z->value.data(), h, h, da.data(), dhp);

      linalg::copy(dxv, dx.data(), h);
    }

    // message: x_v = W_p hsum_v + b_p; hsum_v = sum of neighbor h^{t-1}
    for (int v = 0; v < m; ++v) {
      const double* dxv = dx_all.row(v);
      linalg::add(params.b_p->grad.data(), dxv, h);
      linalg::outer_add(params.w_p->grad.data(), dxv, h, hsum.row(v), h);
      const auto& neigh = adjacency[static_cast<size_t>(v)];
      if (neigh.empty()) continue;
      std::fill(tmp.begin(), tmp.end(), 0.0);
      linalg::matvec_t_add(params.w_p->value.data(), h, h, dxv, tmp.data());
      for (int src : neigh) linalg::add(dh_prev.row(src), tmp.data(), h);
    }
    dh = std::move(dh_prev);
  }

  // h^0 receives gradient from step 1 and from the fusion concat.
  for (int v = 0; v < m; ++v) linalg::add(dh.row(v), dh0_fusion.row(v), h);

  for (int v = 0; v < m; ++v) {
    const double* dh0 = dh.row(v);
    const double* gc = trace.init_c.row(v);
    const double* gf = trace.init_f.row(v);
    if (!ablation.drop_class) {
      int cls = inputs.nodes[static_cast<size_t>(v)].class_id;
      Tensor& dwc = params.w_c->grad;
      for (int k = 0; k < h; ++k) {
        if (gc[k] > 0.0) dwc.at(k, cls) += dh0[k] * gf[k];
      }
    }
    if (!ablation.drop_object_feature) {
      for (int k = 0; k < h; ++k) {
        da[static_cast<size_t>(k)] = gf[k] > 0.0 ? dh0[k] * gc[k] : 0.0;
      }
      linalg::outer_add(params.w_f->grad.data(), da.data(), h,
                        inputs.nodes[static_cast<size_t>(v)].feature.data(), cfg.feature_dim);
    }
  }
}

RelHeadTrace rel_head_forward(const Tensor& ho, const RelHeadParams& params) {
  int m = ho.rows();
  int h = ho.cols();
  RelHeadTrace trace;
  trace.hidden = Tensor::zeros({m, h});
  trace.logits = Tensor::zeros({m, kNumRelationships});
  for (int v = 0; v < m; ++v) {
    double* hid = trace.hidden.row(v);
    linalg::matvec(params.w1->value.data(), h, h, ho.row(v), hid);
    for (int k = 0; k < h; ++k) hid[k] = std::max(0.0, hid[k] + params.b1->value[k]);
    double* logits = trace.logits.row(v);
    linalg::matvec(params.w2->value.data(), kNumRelationships, h, hid, logits);
    linalg::add(logits, params.b2->value.data(), kNumRelationships);
  }
  return trace;
}

void rel_head_backward(const Tensor& ho, const RelHeadParams& params, const RelHeadTrace& trace,
                       const Tensor& dlogits, Tensor& dho) {
  int m = ho.rows();
  int h = ho.cols();
  std::vector<double> dhid(static_cast<size_t>(h));
  for (int v = 0; v < m; ++v) {
    const double* dl = dlogits.row(v);
    const double* hid = trace.hidden.row(v);
    linalg::outer_add(params.w2->grad.data(), dl, kNumRelationships, hid, h);
    linalg::add(params.b2->grad.data(), dl, kNumRelationships);
    std::fill(dhid.begin(), dhid.end(), 0.0);
    linalg::matvec_t_add(params.w2->value.data(), kNumRelationships, h, dl, dhid.data());
    for (int k = 0; k < h; ++k) {
      if (hid[k] <= 0.0) dhid[static_cast<size_t>(k)] = 0.0;
    }
    linalg::outer_add(params.w1->grad.data(), dhid.data(), h, ho.row(v), h);
    linalg::add(params.b1->grad.data(), dhid.data(), h);
    linalg::matvec_t_add(params.w1->value.data(), h, h, dhid.data(), dho.row(v));
  }
}

Tensor init_node(int class_id, const Tensor& feature, const TrunkParams& params,
                 const GgnnConfig& cfg) {
  Kernels kernel{params, cfg};
  Tensor gc = Tensor::zeros({cfg.hidden});
  Tensor gf = Tensor::zeros({cfg.hidden});
  Tensor h0 = Tensor::zeros({cfg.hidden});
  kernel.init_node(class_id, feature.data(), {}, gc.data(), gf.data(), h0.data());
  return h0;
}

Tensor aggregate(const std::vector<Tensor>& neighbor_states, const TrunkParams& params,
                 const GgnnConfig& cfg) {
  int h = cfg.hidden;
  std::vector<linalg::accum_t> acc(static_cast<size_t>(h), 0);
  for (const Tensor& state : neighbor_states) {
    for (int k = 0; k < h; ++k) acc[static_cast<size_t>(k)] += state[k];
  }
  Tensor hsum = Tensor::zeros({h});
  for (int k = 0; k < h; ++k) hsum[k] = static_cast<double>(acc[static_cast<size_t>(k)]);
  Tensor x = Tensor::zeros({h});
  Kernels{params, cfg}.message(hsum.data(), x.data());
  return x;
}

Tensor gru_update(const Tensor& x, const Tensor& h_prev, const TrunkParams& params) {
  GgnnConfig cfg;
  cfg.hidden = x.size();
  Kernels kernel{params, cfg};
  Tensor z = Tensor::zeros({cfg.hidden});
  Tensor r = Tensor::zeros({cfg.hidden});
  Tensor hc = Tensor::zeros({cfg.hidden});
  Tensor h = Tensor::zeros({cfg.hidden});
  kernel.gru(x.data(), h_prev.data(), z.data(), r.data(), hc.data(), h.data());
  return h;
}

TrunkTrace propagate(const SceneGraph& graph, const SceneInputs& inputs,
                     const TrunkParams& params, const GgnnConfig& cfg, int T,
                     const AblationFlags& ablation) {
  return trunk_forward(graph, inputs, params, cfg, T, ablation);
}

Tensor output_feature(const Tensor& h_final, const Tensor& h_init, const Tensor& global,
                      const TrunkParams& params, const GgnnConfig& cfg) {
  if (global.size() != cfg.global_dim) {
    throw DataError("global feature length " + std::to_string(global.size()) +
                    " does not match model global_dim " + std::to_string(cfg.global_dim));
  }
  Tensor concat = Tensor::zeros({cfg.fusion_dim()});
  Tensor ho = Tensor::zeros({cfg.hidden});
  Kernels{params, cfg}.fusion(h_final.data(), h_init.data(), global.data(), nullptr, {},
                              concat.data(), ho.data());
  return ho;
}

Tensor relationship_logits(const Tensor& ho, const RelHeadParams& params) {
  int h = ho.size();
  Tensor hid = Tensor::zeros({h});
  linalg::matvec(params.w1->value.data(), h, h, ho.data(), hid.data());
  for (int k = 0; k < h; ++k) hid[k] = std::max(0.0, hid[k] + params.b1->value[k]);
  Tensor logits = Tensor::zeros({kNumRelationships});
  linalg::matvec(params.w2->value.data(), kNumRelationships, h, hid.data(), logits.data());
  linalg::add(logits.data(), params.b2->value.data(), kNumRelationships);
  return logits;
}

Tensor relationship_distribution(const Tensor& ho, const RelHeadParams& params) {
  return softmax(relationship_logits(ho, params));
}

}  // namespace afford
