#pragma once

#include <string>
#include <vector>

#include "afford/param_store.hpp"
#include "afford/relationship.hpp"
#include "afford/rng.hpp"
#include "afford/scene_graph.hpp"

namespace afford {

struct GgnnConfig {
  int hidden = 128;
  int num_classes = 0;
  int feature_dim = 0;
  int global_dim = 0;
  // MA-MT extension: a learned per-action embedding appended to the fusion
  // input. Zero disables it.
  int action_embed_dim = 0;
  int num_actions = 1;

  int fusion_dim() const { return 2 * hidden + global_dim + action_embed_dim; }
};

// Shared trunk: node init, message passing, GRU update, output fusion.
struct TrunkParams {
  Param* w_c = nullptr;  // H x C
  Param* w_f = nullptr;  // H x D
  Param* w_p = nullptr;  // H x H
  Param* b_p = nullptr;  // H
  Param* w_z = nullptr;
  Param* u_z = nullptr;
  Param* b_z = nullptr;
  Param* w_r = nullptr;
  Param* u_r = nullptr;
  Param* b_r = nullptr;
  Param* w_h = nullptr;
  Param* u_h = nullptr;
  Param* b_h = nullptr;
  Param* w_ho = nullptr;          // H x fusion_dim
  Param* action_embed = nullptr;  // num_actions x action_embed_dim, MA-MT only
};

TrunkParams add_trunk_params(ParamStore& store, const GgnnConfig& cfg, Rng& rng,
                             const std::string& prefix = "trunk");
TrunkParams bind_trunk_params(ParamStore& store, const GgnnConfig& cfg,
                              const std::string& prefix = "trunk");

// Two affine layers H -> H -> 7 with a ReLU between them.
struct RelHeadParams {
  Param* w1 = nullptr;
  Param* b1 = nullptr;
  Param* w2 = nullptr;
  Param* b2 = nullptr;
};

RelHeadParams add_rel_head_params(ParamStore& store, int hidden, Rng& rng,
                                  const std::string& prefix = "rel");
RelHeadParams bind_rel_head_params(ParamStore& store, const std::string& prefix = "rel");

struct SceneNodeInput {
  int class_id = 0;
  Tensor feature;  // length D
};

struct SceneInputs {
  std::vector<SceneNodeInput> nodes;  // aligned with graph.nodes
  Tensor global;                      // length G
  int action_index = 0;               // row of the action embedding (MA-MT)
};

// Input-removal ablations. Dropping the class or object-feature input
// removes that gating factor from the node initialization (the factor
// becomes all-ones); dropping the global feature zeroes its fusion slice.
struct AblationFlags {
  bool drop_class = false;           // OC
  bool drop_object_feature = false;  // OR
  bool drop_global = false;          // GR
};

// Everything the backward pass needs: hidden states for t in [0, T], per-step
// message sums, gate activations, and the fused output features.
struct TrunkTrace {
  int num_nodes = 0;
  int T = 0;
  Tensor init_c;               // relu(W_c c), {M, H}
  Tensor init_f;               // relu(W_f phi), {M, H}
  std::vector<Tensor> h;       // T+1 entries, {M, H}
  std::vector<Tensor> hsum;    // T entries, {M, H} summed neighbor states
  std::vector<Tensor> x;       // T entries, {M, H}
  std::vector<Tensor> z;       // T entries, {M, H}
  std::vector<Tensor> r;       // T entries, {M, H}
  std::vector<Tensor> hc;      // T entries, {M, H} tanh candidates
  Tensor fusion_in;            // {M, fusion_dim}
  Tensor ho;                   // {M, H}
};

TrunkTrace trunk_forward(const SceneGraph& graph, const SceneInputs& inputs,
                         const TrunkParams& params, const GgnnConfig& cfg, int T,
                         const AblationFlags& ablation = {});

// Accumulates parameter gradients for dL/dho (shape {M, H}).
void trunk_backward(const SceneGraph& graph, const SceneInputs& inputs,
                    const TrunkParams& params, const GgnnConfig& cfg, const TrunkTrace& trace,
                    const Tensor& dho, const AblationFlags& ablation = {});

struct RelHeadTrace {
  Tensor hidden;  // {M, H} relu
  Tensor logits;  // {M, 7}
};

RelHeadTrace rel_head_forward(const Tensor& ho, const RelHeadParams& params);

// dlogits {M, 7}; accumulates parameter gradients and adds the trunk part
// into dho {M, H}.
void rel_head_backward(const Tensor& ho, const RelHeadParams& params, const RelHeadTrace& trace,
                       const Tensor& dlogits, Tensor& dho);

// --- Per-node operations (the same kernels the batched forward uses) ---

// h0 = relu(W_c onehot(class)) ⊙ relu(W_f feature)
Tensor init_node(int class_id, const Tensor& feature, const TrunkParams& params,
                 const GgnnConfig& cfg);

// x = W_p * (sum of neighbor states) + b_p; empty neighbor set gives b_p.
Tensor aggregate(const std::vector<Tensor>& neighbor_states, const TrunkParams& params,
                 const GgnnConfig& cfg);

Tensor gru_update(const Tensor& x, const Tensor& h_prev, const TrunkParams& params);

// Full propagation; returns the trace (h[t] for t in [0, T]).
TrunkTrace propagate(const SceneGraph& graph, const SceneInputs& inputs,
                     const TrunkParams& params, const GgnnConfig& cfg, int T,
                     const AblationFlags& ablation = {});

// ho = relu(W_ho [hT, h0, global]) for a single node.
Tensor output_feature(const Tensor& h_final, const Tensor& h_init, const Tensor& global,
                      const TrunkParams& params, const GgnnConfig& cfg);

// affine -> relu -> affine -> softmax over the 7 relationship classes.
Tensor relationship_logits(const Tensor& ho, const RelHeadParams& params);
Tensor relationship_distribution(const Tensor& ho, const RelHeadParams& params);

}  // namespace afford
