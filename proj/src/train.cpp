#include "afford/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "afford/gradcheck.hpp"
#include "afford/linalg.hpp"
#include "afford/ops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace afford {

std::string to_string(Task t) {
  switch (t) {
    case Task::relationship: return "relationship";
    case Task::explanation: return "explanation";
    case Task::consequence: return "consequence";
    case Task::multitask: return "multitask";
  }
  return "relationship";
}

Task task_from_string(const std::string& s) {
  if (s == "relationship") return Task::relationship;
  if (s == "explanation") return Task::explanation;
  if (s == "consequence") return Task::consequence;
  if (s == "multitask") return Task::multitask;
  throw UsageError("unknown task '" + s + "'");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::independent: return "independent";
    case Regime::sa_mt: return "sa-mt";
    case Regime::ma_mt: return "ma-mt";
  }
  return "independent";
}

Regime regime_from_string(const std::string& s) {
  if (s == "independent") return Regime::independent;
  if (s == "sa-mt" || s == "sa_mt") return Regime::sa_mt;
  if (s == "ma-mt" || s == "ma_mt") return Regime::ma_mt;
  throw UsageError("unknown regime '" + s + "'");
}

void RunConfig::validate_and_canonicalize() {
  if (actions.empty()) throw UsageError("at least one action is required");
  if (T < 0) throw UsageError("T must be >= 0");
  if (hidden <= 0) throw UsageError("hidden size must be positive");
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (task == Task::multitask) {
    if (regime == Regime::independent) {
      throw UsageError("multitask training needs regime sa-mt or ma-mt");
    }
  } else if (regime != Regime::independent) {
    throw UsageError("tasks other than multitask use the independent regime");
  }
  if (regime == Regime::ma_mt) {
    if (actions.size() < 2) throw UsageError("ma-mt expects all actions");
  } else if (actions.size() != 1) {
    throw UsageError(to_string(regime) + " " + to_string(task) + " trains one action per run");
  }
  if (topology == Topology::unary) T = 0;  // a unary model is the T=0 model
  if (splits_path.empty()) splits_path = (fs::path(data_dir) / "splits.json").string();
}

json RunConfig::to_json() const {
  json j;
  j["data_dir"] = data_dir;
  j["out_dir"] = out_dir;
  j["splits_path"] = splits_path;
  j["actions"] = actions;
  j["topology"] = afford::to_string(topology);
  j["T"] = T;
  j["hidden"] = hidden;
  j["task"] = afford::to_string(task);
  j["regime"] = afford::to_string(regime);
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["rel_lr"] = rel_lr;
  j["rel_batch"] = rel_batch;
  j["dec_lr"] = dec_lr;
  j["dec_batch"] = dec_batch;
  j["decay_factor"] = decay_factor;
  j["decay_after"] = decay_after;
  j["decay_once"] = decay_once;
  j["clip_norm"] = clip_norm;
  j["drop_oc"] = drop_oc;
  j["drop_or"] = drop_or;
  j["drop_gr"] = drop_gr;
  j["w_rel"] = w_rel;
  j["w_expl"] = w_expl;
  j["w_cons"] = w_cons;
  j["class_weights"] = class_weights;
  j["precision"] = precision == Precision::f64 ? "f64" : "f32";
  j["min_word_freq"] = min_word_freq;
  j["adjacency"] = adjacency == Connectivity::four ? 4 : 8;
  j["max_len"] = max_len;
  j["action_embed_dim"] = action_embed_dim;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.data_dir = j.value("data_dir", "");
  c.out_dir = j.value("out_dir", "run");
  c.splits_path = j.value("splits_path", "");
  if (j.contains("actions")) c.actions = j.at("actions").get<std::vector<std::string>>();
  c.topology = topology_from_string(j.value("topology", "spatial"));
  c.T = j.value("T", 3);
  c.hidden = j.value("hidden", 128);
  c.task = task_from_string(j.value("task", "relationship"));
  c.regime = regime_from_string(j.value("regime", "independent"));
  c.epochs = j.value("epochs", 30);
  c.seed = j.value("seed", static_cast<uint64_t>(1));
  c.rel_lr = j.value("rel_lr", 1e-3);
  c.rel_batch = j.value("rel_batch", 128);
  c.dec_lr = j.value("dec_lr", 3e-4);
  c.dec_batch = j.value("dec_batch", 32);
  c.decay_factor = j.value("decay_factor", 0.85);
  c.decay_after = j.value("decay_after", 10);
  c.decay_once = j.value("decay_once", false);
  c.clip_norm = j.value("clip_norm", 5.0);
  c.drop_oc = j.value("drop_oc", false);
  c.drop_or = j.value("drop_or", false);
  c.drop_gr = j.value("drop_gr", false);
  c.w_rel = j.value("w_rel", 1.0);
  c.w_expl = j.value("w_expl", 1.0);
  c.w_cons = j.value("w_cons", 1.0);
  c.class_weights = j.value("class_weights", false);
  c.precision = j.value("precision", "f64") == "f32" ? Precision::f32 : Precision::f64;
  c.min_word_freq = j.value("min_word_freq", 2);
  c.adjacency = j.value("adjacency", 4) == 8 ? Connectivity::eight : Connectivity::four;
  c.max_len = j.value("max_len", 20);
  c.action_embed_dim = j.value("action_embed_dim", 16);
  return c;
}

namespace {

uint64_t fnv1a_text(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string RunConfig::config_hash() const { return hex64(fnv1a_text(to_json().dump())); }

// ---------------------------------------------------------------------------
// data plumbing
// ---------------------------------------------------------------------------

namespace {

struct LoadedScene {
  std::string id;
  SceneGraph graph;
  SceneInputs inputs;
  std::vector<int> node_instances;  // node index -> instance id
  std::map<std::string, std::map<int, InstanceAnnotation>> annotations;
};

SceneGraph graph_for_config(const InstanceMap& map, const RunConfig& cfg,
                            const std::string& scene_id) {
  SceneGraph spatial = build_spatial_graph(map, cfg.adjacency);
  if (cfg.topology == Topology::spatial) return spatial;
  // The chain order is drawn per scene from the run seed, so identical runs
  // see identical chains while scenes differ from one another.
  return make_variant(spatial, cfg.topology, mix_seed(cfg.seed, fnv1a_text(scene_id)));
}

LoadedScene load_scene_for_run(const Dataset& dataset, const std::string& id,
                               const RunConfig& cfg) {
  Scene scene = dataset.load_scene(id);
  LoadedScene ls;
  ls.id = id;
  ls.graph = graph_for_config(scene.map, cfg, id);
  for (const auto& node : ls.graph.nodes) {
    SceneNodeInput in;
    in.class_id = node.class_id;
    in.feature = scene.features.per_instance.at(node.instance_id);
    ls.inputs.nodes.push_back(std::move(in));
    ls.node_instances.push_back(node.instance_id);
  }
  ls.inputs.global = scene.features.global;
  ls.annotations = std::move(scene.record.actions);
  return ls;
}

struct NodeSample {
  int scene = 0;
  int action = 0;  // index into config.actions
  int node = 0;
  Relationship label = Relationship::kPositive;
  std::vector<int> expl_ids;  // teacher-forcing targets (first reference)
  std::vector<int> cons_ids;
  bool has_sentences = false;
};

// Everything a run needs in memory.
struct RunData {
  Dataset dataset;
  SplitSpec splits;
  std::vector<LoadedScene> train_scenes, val_scenes;
  std::map<std::string, Vocabulary> vocabs;  // per action, decoder tasks only
};

struct AssembledModel {
  GgnnConfig ggnn;
  TrunkParams trunk;
  std::map<std::string, RelHeadParams> heads;
  std::map<std::string, DecoderParams> expl;
  std::map<std::string, DecoderParams> cons;
  std::map<std::string, DecoderConfig> expl_cfg, cons_cfg;
};

bool wants_rel_head(const RunConfig& cfg) {
  return cfg.task == Task::relationship || cfg.task == Task::multitask;
}
bool wants_expl(const RunConfig& cfg) {
  return cfg.task == Task::explanation || cfg.task == Task::multitask;
}
bool wants_cons(const RunConfig& cfg) {
  return cfg.task == Task::consequence || cfg.task == Task::multitask;
}

GgnnConfig ggnn_config_for(const RunConfig& cfg, const DatasetManifest& manifest) {
  GgnnConfig g;
  g.hidden = cfg.hidden;
  g.num_classes = static_cast<int>(manifest.classes.size());
  g.feature_dim = manifest.feature_dim;
  g.global_dim = manifest.global_dim;
  g.action_embed_dim = cfg.regime == Regime::ma_mt ? cfg.action_embed_dim : 0;
  g.num_actions = static_cast<int>(cfg.actions.size());
  return g;
}

// Creation order is fixed (trunk, then per action: rel head, decoders) so a
// shared seed gives bitwise-identical shared parameters across regimes.
AssembledModel assemble_model(ParamStore& store, const RunConfig& cfg,
                              const DatasetManifest& manifest,
                              const std::map<std::string, Vocabulary>& vocabs) {
  AssembledModel m;
  m.ggnn = ggnn_config_for(cfg, manifest);
  Rng rng(cfg.seed);
  m.trunk = add_trunk_params(store, m.ggnn, rng);
  for (const auto& action : cfg.actions) {
    if (wants_rel_head(cfg)) {
      m.heads[action] = add_rel_head_params(store, cfg.hidden, rng, action + ".rel");
    }
    if (wants_expl(cfg)) {
      DecoderConfig dc{cfg.hidden, vocabs.at(action).size(), cfg.hidden, cfg.max_len};
      m.expl_cfg[action] = dc;
      m.expl[action] = add_decoder_params(store, dc, rng, action + ".expl");
    }
    if (wants_cons(cfg)) {
      DecoderConfig dc{cfg.hidden, vocabs.at(action).size(), cfg.hidden, cfg.max_len};
      m.cons_cfg[action] = dc;
      m.cons[action] = add_decoder_params(store, dc, rng, action + ".cons");
    }
  }
  return m;
}

std::vector<NodeSample> build_samples(const RunConfig& cfg, const std::vector<LoadedScene>& scenes,
                                      const std::map<std::string, Vocabulary>& vocabs) {
  std::vector<NodeSample> samples;
  bool needs_sentences = wants_expl(cfg) || wants_cons(cfg);
  bool decoder_only = cfg.task == Task::explanation || cfg.task == Task::consequence;
  for (size_t s = 0; s < scenes.size(); ++s) {
    const LoadedScene& ls = scenes[s];
    for (size_t a = 0; a < cfg.actions.size(); ++a) {
      const auto& anns = ls.annotations.at(cfg.actions[a]);
      for (size_t v = 0; v < ls.node_instances.size(); ++v) {
        auto it = anns.find(ls.node_instances[v]);
        if (it == anns.end()) continue;
        const InstanceAnnotation& ann = it->second;
        if (decoder_only && !is_exception(ann.label)) continue;
        NodeSample ns;
        ns.scene = static_cast<int>(s);
        ns.action = static_cast<int>(a);
        ns.node = static_cast<int>(v);
        ns.label = ann.label;
        if (needs_sentences && is_exception(ann.label)) {
          const Vocabulary& vocab = vocabs.at(cfg.actions[a]);
          if (!ann.explanations.empty()) ns.expl_ids = vocab.encode(ann.explanations.front());
          if (!ann.consequences.empty()) ns.cons_ids = vocab.encode(ann.consequences.front());
          ns.has_sentences = true;
        }
        samples.push_back(std::move(ns));
      }
    }
  }
  return samples;
}

std::map<std::string, Vocabulary> build_vocabs(const RunConfig& cfg,
                                               const std::vector<LoadedScene>& train_scenes) {
  std::map<std::string, Vocabulary> vocabs;
  if (!wants_expl(cfg) && !wants_cons(cfg)) return vocabs;
  for (const auto& action : cfg.actions) {
    // explanation and consequence share the per-action vocabulary
    std::vector<std::string> corpus;
    for (const auto& ls : train_scenes) {
      for (const auto& [iid, ann] : ls.annotations.at(action)) {
        for (const auto& s : ann.explanations) corpus.push_back(s);
        for (const auto& s : ann.consequences) corpus.push_back(s);
      }
    }
    if (corpus.empty()) {
      throw DataError("no training sentences for action '" + action + "'");
    }
    vocabs[action] = Vocabulary::build(corpus, cfg.min_word_freq);
  }
  return vocabs;
}

std::array<double, kNumRelationships> class_loss_weights(const RunConfig& cfg,
                                                         const std::vector<NodeSample>& samples) {
  std::array<double, kNumRelationships> w;
  w.fill(1.0);
  if (!cfg.class_weights) return w;
  std::array<int64_t, kNumRelationships> counts = {};
  for (const auto& s : samples) counts[static_cast<size_t>(s.label)] += 1;
  int present = 0;
  int64_t total = 0;
  for (int64_t c : counts) {
    if (c > 0) present += 1;
    total += c;
  }
  for (int k = 0; k < kNumRelationships; ++k) {
    if (counts[static_cast<size_t>(k)] > 0) {
      w[static_cast<size_t>(k)] =
          static_cast<double>(total) / (present * static_cast<double>(counts[static_cast<size_t>(k)]));
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// batch forward/backward
// ---------------------------------------------------------------------------

struct BatchStats {
  double loss_sum = 0.0;  // already weighted, per-sample mean applied outside
  int samples = 0;
};

// Runs one mini-batch: groups samples by (scene, action), one trunk pass per
// group, heads/decoders per sample, full BPTT backward when training.
BatchStats run_batch(const RunConfig& cfg, const std::vector<LoadedScene>& scenes,
                     const std::vector<NodeSample>& samples, const std::vector<int>& batch,
                     AssembledModel& model,
                     const std::array<double, kNumRelationships>& class_w, bool train_mode) {
  BatchStats stats;
  stats.samples = static_cast<int>(batch.size());
  double inv_b = 1.0 / static_cast<double>(batch.size());

  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int idx : batch) {
    const NodeSample& s = samples[static_cast<size_t>(idx)];
    groups[{s.scene, s.action}].push_back(idx);
  }

  for (const auto& [key, members] : groups) {
    const LoadedScene& ls = scenes[static_cast<size_t>(key.first)];
    const std::string& action = cfg.actions[static_cast<size_t>(key.second)];
    SceneInputs inputs = ls.inputs;
    inputs.action_index = key.second;

    TrunkTrace trace = trunk_forward(ls.graph, inputs, model.trunk, model.ggnn, cfg.T,
                                     cfg.ablation());
    int m = ls.graph.num_nodes();
    Tensor dho = Tensor::zeros({m, model.ggnn.hidden});

    RelHeadTrace head_trace;
    Tensor dlogits;
    bool rel_active = wants_rel_head(cfg);
    if (rel_active) {
      head_trace = rel_head_forward(trace.ho, model.heads.at(action));
      dlogits = Tensor::zeros({m, kNumRelationships});
    }

    for (int idx : members) {
      const NodeSample& s = samples[static_cast<size_t>(idx)];
      if (rel_active) {
        Tensor logits = Tensor::zeros({kNumRelationships});
        for (int k = 0; k < kNumRelationships; ++k) logits[k] = head_trace.logits.at(s.node, k);
        double w = cfg.w_rel * class_w[static_cast<size_t>(s.label)];
        stats.loss_sum += w * cross_entropy(logits, static_cast<int>(s.label)) * inv_b;
        if (train_mode && w != 0.0) {
          Tensor dl = cross_entropy_grad(logits, static_cast<int>(s.label));
          for (int k = 0; k < kNumRelationships; ++k) {
            dlogits.at(s.node, k) += w * inv_b * dl[k];
          }
        }
      }
      if (s.has_sentences) {
        if (wants_expl(cfg) && !s.expl_ids.empty()) {
          DecoderTrace dt;
          double loss = teacher_forced_loss(trace.ho.row(s.node), s.expl_ids,
                                            model.expl.at(action), model.expl_cfg.at(action), &dt);
          stats.loss_sum += cfg.w_expl * loss * inv_b;
          if (train_mode && cfg.w_expl != 0.0) {
            decoder_backward(trace.ho.row(s.node), model.expl.at(action),
                             model.expl_cfg.at(action), dt, dho.row(s.node),
                             cfg.w_expl * inv_b);
          }
        }
        if (wants_cons(cfg) && !s.cons_ids.empty()) {
          DecoderTrace dt;
          double loss = teacher_forced_loss(trace.ho.row(s.node), s.cons_ids,
                                            model.cons.at(action), model.cons_cfg.at(action), &dt);
          stats.loss_sum += cfg.w_cons * loss * inv_b;
          if (train_mode && cfg.w_cons != 0.0) {
            decoder_backward(trace.ho.row(s.node), model.cons.at(action),
                             model.cons_cfg.at(action), dt, dho.row(s.node),
                             cfg.w_cons * inv_b);
          }
        }
      }
    }

    if (train_mode) {
      if (rel_active) {
        rel_head_backward(trace.ho, model.heads.at(action), head_trace, dlogits, dho);
      }
      trunk_backward(ls.graph, inputs, model.trunk, model.ggnn, trace, dho, cfg.ablation());
    }
  }
  return stats;
}

double val_relationship_macc(const RunConfig& cfg, const std::vector<LoadedScene>& scenes,
                             AssembledModel& model) {
  std::vector<Relationship> preds, gts;
  for (size_t si = 0; si < scenes.size(); ++si) {
    const LoadedScene& ls = scenes[si];
    for (size_t a = 0; a < cfg.actions.size(); ++a) {
      SceneInputs inputs = ls.inputs;
      inputs.action_index = static_cast<int>(a);
      TrunkTrace trace = trunk_forward(ls.graph, inputs, model.trunk, model.ggnn, cfg.T,
                                       cfg.ablation());
      RelHeadTrace head = rel_head_forward(trace.ho, model.heads.at(cfg.actions[a]));
      const auto& anns = ls.annotations.at(cfg.actions[a]);
      for (size_t v = 0; v < ls.node_instances.size(); ++v) {
        auto it = anns.find(ls.node_instances[v]);
        if (it == anns.end()) continue;
        int best = 0;
        for (int k = 1; k < kNumRelationships; ++k) {
          if (head.logits.at(static_cast<int>(v), k) > head.logits.at(static_cast<int>(v), best)) {
            best = k;
          }
        }
        preds.push_back(static_cast<Relationship>(best));
        gts.push_back(it->second.label);
      }
    }
  }
  return mean_accuracy(preds, gts, AccuracyMode::collapsed);
}

double val_token_loss(const RunConfig& cfg, const std::vector<LoadedScene>& scenes,
                      const std::vector<NodeSample>& val_samples, AssembledModel& model) {
  if (val_samples.empty()) return 0.0;
  double total = 0.0;
  int count = 0;
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (size_t i = 0; i < val_samples.size(); ++i) {
    groups[{val_samples[i].scene, val_samples[i].action}].push_back(static_cast<int>(i));
  }
  for (const auto& [key, members] : groups) {
    const LoadedScene& ls = scenes[static_cast<size_t>(key.first)];
    const std::string& action = cfg.actions[static_cast<size_t>(key.second)];
    SceneInputs inputs = ls.inputs;
    inputs.action_index = key.second;
    TrunkTrace trace = trunk_forward(ls.graph, inputs, model.trunk, model.ggnn, cfg.T,
                                     cfg.ablation());
    for (int idx : members) {
      const NodeSample& s = val_samples[static_cast<size_t>(idx)];
      if (wants_expl(cfg) && !s.expl_ids.empty()) {
        total += teacher_forced_loss(trace.ho.row(s.node), s.expl_ids, model.expl.at(action),
                                     model.expl_cfg.at(action));
        count += 1;
      }
      if (wants_cons(cfg) && !s.cons_ids.empty()) {
        total += teacher_forced_loss(trace.ho.row(s.node), s.cons_ids, model.cons.at(action),
                                     model.cons_cfg.at(action));
        count += 1;
      }
    }
  }
  return count ? total / count : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

TrainResult train(const RunConfig& config_in) {
  RunConfig cfg = config_in;
  cfg.validate_and_canonicalize();
  fs::create_directories(cfg.out_dir);

  Dataset dataset = Dataset::open(cfg.data_dir);
  SplitSpec splits = load_splits_file(cfg.splits_path);

  std::vector<LoadedScene> train_scenes, val_scenes;
  for (const auto& id : splits.train) train_scenes.push_back(load_scene_for_run(dataset, id, cfg));
  for (const auto& id : splits.val) val_scenes.push_back(load_scene_for_run(dataset, id, cfg));
  if (train_scenes.empty()) throw DataError("training split is empty");

  std::map<std::string, Vocabulary> vocabs = build_vocabs(cfg, train_scenes);
  ParamStore store;
  AssembledModel model = assemble_model(store, cfg, dataset.manifest(), vocabs);

  std::vector<NodeSample> samples = build_samples(cfg, train_scenes, vocabs);
  std::vector<NodeSample> val_samples = build_samples(cfg, val_scenes, vocabs);
  if (samples.empty()) throw DataError("no training samples for this task");
  std::array<double, kNumRelationships> class_w = class_loss_weights(cfg, samples);

  bool decoder_schedule = cfg.task == Task::explanation || cfg.task == Task::consequence;
  AdamConfig adam;
  adam.learning_rate = decoder_schedule ? cfg.dec_lr : cfg.rel_lr;
  adam.decay_factor = cfg.decay_factor;
  adam.decay_after_epochs = cfg.decay_after;
  adam.decay_once = cfg.decay_once;
  // clipping stabilizes BPTT through the decoders; relationship runs leave it off
  adam.clip_norm = cfg.task == Task::relationship ? 0.0 : cfg.clip_norm;
  int batch_size = decoder_schedule ? cfg.dec_batch : cfg.rel_batch;

  bool best_is_loss = decoder_schedule;
  double best_metric = best_is_loss ? 1e300 : -1e300;
  int best_epoch = 0;
  ParamStore best_store;
  auto snapshot = [&](int epoch) {
    best_store = store;
    best_epoch = epoch;
  };

  TrainResult result;
  auto log_event = [&](int epoch, const std::string& split, const std::string& metric,
                       double value) {
    json e;
    e["epoch"] = epoch;
    e["split"] = split;
    e["metric"] = metric;
    e["value"] = value;
    result.log_lines.push_back(e.dump());
  };

  std::vector<int> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  auto write_outputs = [&](const ParamStore& chosen, int chosen_epoch) {
    std::map<std::string, std::string> meta;
    meta["config"] = cfg.to_json().dump();
    json model_meta;
    model_meta["hidden"] = model.ggnn.hidden;
    model_meta["num_classes"] = model.ggnn.num_classes;
    model_meta["feature_dim"] = model.ggnn.feature_dim;
    model_meta["global_dim"] = model.ggnn.global_dim;
    model_meta["action_embed_dim"] = model.ggnn.action_embed_dim;
    model_meta["num_actions"] = model.ggnn.num_actions;
    model_meta["fusion_order"] =
        model.ggnn.action_embed_dim > 0 ? "hT,h0,global,action" : "hT,h0,global";
    meta["model"] = model_meta.dump();
    for (const auto& [action, vocab] : vocabs) meta["vocab." + action] = vocab.to_text();
    meta["best_epoch"] = std::to_string(chosen_epoch);
    meta["best_val_metric"] = std::to_string(best_metric);
    meta["data_version"] = dataset.manifest().data_version;
    std::string ckpt = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
    save_checkpoint(ckpt, chosen, chosen_epoch, cfg.precision, meta);
    result.checkpoint_path = ckpt;

    std::ofstream cfg_os(fs::path(cfg.out_dir) / "config.json", std::ios::trunc);
    cfg_os << cfg.to_json().dump(2) << "\n";

    result.log_path = (fs::path(cfg.out_dir) / "train_log.jsonl").string();
    std::ofstream log_os(result.log_path, std::ios::trunc);
    for (const auto& line : result.log_lines) log_os << line << "\n";
  };

  snapshot(0);  // epoch 0 = initialization, retained on first-epoch divergence
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, 7000 + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int epoch_samples = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
      std::vector<int> batch(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(std::min(
                                                 order.size(), start + static_cast<size_t>(batch_size))));
      BatchStats stats = run_batch(cfg, train_scenes, samples, batch, model, class_w, true);
      if (!std::isfinite(stats.loss_sum)) {
        write_outputs(best_store, best_epoch);
        throw NumericError("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch) + "; last good checkpoint retained");
      }
      epoch_loss += stats.loss_sum * stats.samples;
      epoch_samples += stats.samples;
      adam_step(store, adam, epoch);
    }
    log_event(epoch, "train", "loss", epoch_loss / std::max(1, epoch_samples));
    log_event(epoch, "train", "lr", adam.effective_lr(epoch));

    double val_metric;
    if (decoder_schedule) {
      val_metric = val_token_loss(cfg, val_scenes, val_samples, model);
      log_event(epoch, "val", "token_loss", val_metric);
      if (val_metric < best_metric) {
        best_metric = val_metric;
        snapshot(epoch);
      }
    } else {
      val_metric = val_scenes.empty() ? 0.0 : val_relationship_macc(cfg, val_scenes, model);
      log_event(epoch, "val", "macc", val_metric);
      if (val_metric > best_metric) {
        best_metric = val_metric;
        snapshot(epoch);
      }
    }
  }

  result.best_epoch = best_epoch;
  result.best_val_metric = best_metric;
  write_outputs(best_store, best_epoch);
  return result;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

EvalReport evaluate_predictor(const Dataset& dataset, const std::vector<std::string>& scene_ids,
                              const std::string& split_name,
                              const std::vector<std::string>& actions, const Predictor& predictor,
                              bool with_sentences) {
  if (scene_ids.empty()) throw DataError("evaluation split is empty");
  EvalReport report;
  report.split = split_name;
  report.data_version = dataset.manifest().data_version;

  struct CaptionItems {
    std::vector<CaptionEvalItem> expl, cons;
  };

  for (const auto& action : actions) {
    std::vector<Relationship> preds, gts;
    std::vector<int> class_ids;
    CaptionItems captions;

    for (const auto& id : scene_ids) {
      Scene scene = dataset.load_scene(id);
      ScenePrediction prediction = predictor(scene, action);
      const auto& anns = scene.record.actions.at(action);
      if (prediction.labels.size() != scene.map.instance_class().size()) {
        throw DataError("predictor returned " + std::to_string(prediction.labels.size()) +
                        " labels for " + std::to_string(scene.map.instance_class().size()) +
                        " instances in scene " + id);
      }
      for (const auto& [iid, ann] : anns) {
        Relationship pred = prediction.labels.at(iid);
        preds.push_back(pred);
        gts.push_back(ann.label);
        class_ids.push_back(scene.map.class_of(iid));

        if (with_sentences && is_exception(ann.label)) {
          auto tokenize_refs = [](const std::vector<std::string>& refs) {
            std::vector<Tokens> out;
            for (const auto& r : refs) out.push_back(tokenize(r));
            return out;
          };
          if (!ann.explanations.empty()) {
            CaptionEvalItem item;
            item.references = tokenize_refs(ann.explanations);
            auto it = prediction.explanations.find(iid);
            if (it != prediction.explanations.end()) item.candidate = tokenize(it->second);
            captions.expl.push_back(std::move(item));
          }
          if (!ann.consequences.empty()) {
            CaptionEvalItem item;
            item.references = tokenize_refs(ann.consequences);
            auto it = prediction.consequences.find(iid);
            if (it != prediction.consequences.end()) item.candidate = tokenize(it->second);
            captions.cons.push_back(std::move(item));
          }
        }
      }
    }

    ActionEval eval;
    eval.samples = static_cast<int>(gts.size());
    eval.macc = mean_accuracy(preds, gts, AccuracyMode::collapsed);
    eval.macc_e = mean_accuracy(preds, gts, AccuracyMode::full);
    ConfusionMatrix cm = confusion_matrix(preds, gts, AccuracyMode::full);
    eval.confusion7 = cm.counts;
    for (int c = 2; c < kNumRelationships; ++c) {
      if (cm.row_sum(c) > 0) {
        eval.per_exception_recall[relationship_names()[static_cast<size_t>(c)]] =
            static_cast<double>(cm.at(c, c)) / static_cast<double>(cm.row_sum(c));
      }
    }

    // positive-vs-exception decision over classes that carry both outcomes
    std::map<int, std::pair<bool, bool>> class_has;  // class -> (has positive, has exception)
    for (size_t i = 0; i < gts.size(); ++i) {
      if (gts[i] == Relationship::kPositive) class_has[class_ids[i]].first = true;
      if (is_exception(gts[i])) class_has[class_ids[i]].second = true;
    }
    int correct = 0, total = 0;
    for (size_t i = 0; i < gts.size(); ++i) {
      auto it = class_has.find(class_ids[i]);
      if (it == class_has.end() || !it->second.first || !it->second.second) continue;
      if (gts[i] != Relationship::kPositive && !is_exception(gts[i])) continue;
      total += 1;
      if (is_exception(preds[i]) == is_exception(gts[i])) correct += 1;
    }
    eval.decision_samples = total;
    eval.decision_accuracy = total ? static_cast<double>(correct) / total : 0.0;

    if (with_sentences) {
      auto add_caption_metrics = [&](const std::string& task,
                                     const std::vector<CaptionEvalItem>& items) {
        if (items.empty()) return;
        eval.caption[task + ".bleu4"] = multi_reference_average(bleu4, items);
        eval.caption[task + ".rouge_l"] = multi_reference_average(rouge_l, items);
        std::vector<std::vector<Tokens>> ref_sets;
        for (const auto& item : items) ref_sets.push_back(item.references);
        CiderCorpus corpus = CiderCorpus::build(ref_sets);
        double total_cider = 0.0;
        for (const auto& item : items) total_cider += cider(item.candidate, item.references, corpus);
        eval.caption[task + ".cider"] = total_cider / static_cast<double>(items.size());
        eval.caption_items = static_cast<int>(items.size());
      };
      add_caption_metrics("explanation", captions.expl);
      add_caption_metrics("consequence", captions.cons);
    }
    report.per_action[action] = std::move(eval);
  }
  return report;
}

json EvalReport::to_json() const {
  json j;
  j["split"] = split;
  j["data_version"] = data_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  json actions = json::object();
  for (const auto& [action, e] : per_action) {
    json a;
    a["samples"] = e.samples;
    a["macc"] = e.macc;
    a["macc_e"] = e.macc_e;
    a["confusion7"] = e.confusion7;
    a["decision_accuracy"] = e.decision_accuracy;
    a["decision_samples"] = e.decision_samples;
    a["per_exception_recall"] = e.per_exception_recall;
    a["caption"] = e.caption;
    a["caption_items"] = e.caption_items;
    actions[action] = a;
  }
  j["per_action"] = actions;
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.split = j.at("split").get<std::string>();
  r.data_version = j.at("data_version").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  for (const auto& [action, a] : j.at("per_action").items()) {
    ActionEval e;
    e.samples = a.at("samples").get<int>();
    e.macc = a.at("macc").get<double>();
    e.macc_e = a.at("macc_e").get<double>();
    e.confusion7 = a.at("confusion7").get<std::vector<int64_t>>();
    e.decision_accuracy = a.at("decision_accuracy").get<double>();
    e.decision_samples = a.at("decision_samples").get<int>();
    e.per_exception_recall = a.at("per_exception_recall").get<std::map<std::string, double>>();
    e.caption = a.at("caption").get<std::map<std::string, double>>();
    e.caption_items = a.at("caption_items").get<int>();
    r.per_action[action] = std::move(e);
  }
  return r;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "split: " << split << "   data: " << data_version << "\n";
  os << std::left << std::setw(10) << "action" << std::right << std::setw(9) << "mAcc"
     << std::setw(9) << "mAcc-E" << std::setw(9) << "dec" << std::setw(8) << "n";
  bool any_caption = false;
  for (const auto& [action, e] : per_action) {
    if (!e.caption.empty()) any_caption = true;
  }
  if (any_caption) {
    for (const char* c : {"E.Bleu4", "E.ROUGE", "E.CIDEr", "C.Bleu4", "C.ROUGE", "C.CIDEr"}) {
      os << std::setw(9) << c;
    }
  }
  os << "\n";
  for (const auto& [action, e] : per_action) {
    os << std::left << std::setw(10) << action << std::right << std::fixed
       << std::setprecision(3) << std::setw(9) << e.macc << std::setw(9) << e.macc_e
       << std::setw(9) << e.decision_accuracy << std::setw(8) << e.samples;
    if (any_caption) {
      for (const char* key : {"explanation.bleu4", "explanation.rouge_l", "explanation.cider",
                              "consequence.bleu4", "consequence.rouge_l", "consequence.cider"}) {
        auto it = e.caption.find(key);
        if (it != e.caption.end()) {
          os << std::setw(9) << it->second;
        } else {
          os << std::setw(9) << "-";
        }
      }
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// model bundle + predictors
// ---------------------------------------------------------------------------

ModelBundle::LoadedModel ModelBundle::load_one(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  LoadedModel m;
  m.meta = ck.meta;
  if (!ck.meta.count("config") || !ck.meta.count("model")) {
    throw DataError(path + ": checkpoint is missing config metadata");
  }
  m.config = RunConfig::from_json(json::parse(ck.meta.at("config")));
  json model_meta = json::parse(ck.meta.at("model"));
  m.ggnn.hidden = model_meta.at("hidden").get<int>();
  m.ggnn.num_classes = model_meta.at("num_classes").get<int>();
  m.ggnn.feature_dim = model_meta.at("feature_dim").get<int>();
  m.ggnn.global_dim = model_meta.at("global_dim").get<int>();
  m.ggnn.action_embed_dim = model_meta.at("action_embed_dim").get<int>();
  m.ggnn.num_actions = model_meta.at("num_actions").get<int>();
  m.store = std::move(ck.store);
  m.trunk = bind_trunk_params(m.store, m.ggnn);
  for (const auto& action : m.config.actions) {
    if (m.store.contains(action + ".rel.w1")) {
      m.heads[action] = bind_rel_head_params(m.store, action + ".rel");
      m.has_rel_head = true;
    }
    auto vocab_it = m.meta.find("vocab." + action);
    if (vocab_it != m.meta.end()) {
      m.vocabs[action] = Vocabulary::from_text(vocab_it->second);
    }
    if (m.store.contains(action + ".expl.embed")) {
      m.expl_decoders[action] = bind_decoder_params(m.store, action + ".expl");
    }
    if (m.store.contains(action + ".cons.embed")) {
      m.cons_decoders[action] = bind_decoder_params(m.store, action + ".cons");
    }
  }
  return m;
}

ModelBundle ModelBundle::load(const std::string& relationship_ckpt,
                              const std::string& explanation_ckpt,
                              const std::string& consequence_ckpt) {
  ModelBundle b;
  if (!relationship_ckpt.empty()) b.rel_ = load_one(relationship_ckpt);
  if (!explanation_ckpt.empty()) {
    if (explanation_ckpt == relationship_ckpt) {
      b.expl_ = b.rel_;
    } else {
      b.expl_ = load_one(explanation_ckpt);
    }
  }
  if (!consequence_ckpt.empty()) {
    if (consequence_ckpt == relationship_ckpt) {
      b.cons_ = b.rel_;
    } else if (consequence_ckpt == explanation_ckpt) {
      b.cons_ = b.expl_;
    } else {
      b.cons_ = load_one(consequence_ckpt);
    }
  }
  if (!b.rel_ && !b.expl_ && !b.cons_) throw UsageError("no checkpoints given");
  b.primary_config_ = b.rel_ ? b.rel_->config : (b.expl_ ? b.expl_->config : b.cons_->config);
  return b;
}

std::string ModelBundle::data_version() const {
  const LoadedModel* m = rel_ ? &*rel_ : (expl_ ? &*expl_ : &*cons_);
  auto it = m->meta.find("data_version");
  return it == m->meta.end() ? "" : it->second;
}

namespace {

// Forward one scene through a loaded model and return per-instance outputs.
struct ModelSceneOutputs {
  std::map<int, Relationship> labels;
  Tensor ho;                       // {M, H}
  std::vector<int> node_instances;
};

}  // namespace

struct BundleAccess {
  static ModelSceneOutputs forward(const ModelBundle::LoadedModel& m, const Scene& scene,
                                   const std::string& action, bool want_labels) {
    if (scene.features.dim != m.ggnn.feature_dim ||
        scene.features.global_dim != m.ggnn.global_dim) {
      throw DataError("scene feature dimensions " + std::to_string(scene.features.dim) + "/" +
                      std::to_string(scene.features.global_dim) +
                      " do not match the checkpoint (" + std::to_string(m.ggnn.feature_dim) +
                      "/" + std::to_string(m.ggnn.global_dim) + ")");
    }
    auto action_it = std::find(m.config.actions.begin(), m.config.actions.end(), action);
    if (action_it == m.config.actions.end()) {
      throw DataError("checkpoint does not cover action '" + action + "'");
    }
    SceneGraph graph = graph_for_config(scene.map, m.config, scene.record.id);
    ModelSceneOutputs out;
    SceneInputs inputs;
    for (const auto& node : graph.nodes) {
      SceneNodeInput in;
      in.class_id = node.class_id;
      in.feature = scene.features.per_instance.at(node.instance_id);
      inputs.nodes.push_back(std::move(in));
      out.node_instances.push_back(node.instance_id);
    }
    inputs.global = scene.features.global;
    inputs.action_index = static_cast<int>(action_it - m.config.actions.begin());

    // const_cast-free: LoadedModel params are bound to a non-const store held
    // by value inside the bundle; forward passes only read values.
    TrunkTrace trace = trunk_forward(graph, inputs, m.trunk, m.ggnn, m.config.T,
                                     m.config.ablation());
    out.ho = trace.ho;
    if (want_labels && m.heads.count(action)) {
      RelHeadTrace head = rel_head_forward(trace.ho, m.heads.at(action));
      for (size_t v = 0; v < out.node_instances.size(); ++v) {
        int best = 0;
        for (int k = 1; k < kNumRelationships; ++k) {
          if (head.logits.at(static_cast<int>(v), k) >
              head.logits.at(static_cast<int>(v), best)) {
            best = k;
          }
        }
        out.labels[out.node_instances[v]] = static_cast<Relationship>(best);
      }
    }
    return out;
  }

  static std::map<int, std::string> generate(const ModelBundle::LoadedModel& m,
                                             const Scene& scene, const std::string& action,
                                             const std::map<int, DecoderParams>::size_type,
                                             bool explanation, const std::vector<int>& gate_ids) {
    std::map<int, std::string> out;
    const auto& decoders = explanation ? m.expl_decoders : m.cons_decoders;
    auto dec_it = decoders.find(action);
    if (dec_it == decoders.end() || gate_ids.empty()) return out;
    const Vocabulary& vocab = m.vocabs.at(action);
    DecoderConfig dc{m.config.hidden, vocab.size(), m.config.hidden, m.config.max_len};
    ModelSceneOutputs fwd = forward(m, scene, action, false);
    for (size_t v = 0; v < fwd.node_instances.size(); ++v) {
      int iid = fwd.node_instances[v];
      if (std::find(gate_ids.begin(), gate_ids.end(), iid) == gate_ids.end()) continue;
      Sentence s = decode_greedy(fwd.ho.row(static_cast<int>(v)), dec_it->second, dc,
                                 m.config.max_len);
      out[iid] = vocab.decode(s.ids);
    }
    return out;
  }

  static const std::optional<ModelBundle::LoadedModel>& rel(const ModelBundle& b) { return b.rel_; }
  static const std::optional<ModelBundle::LoadedModel>& expl(const ModelBundle& b) {
    return b.expl_;
  }
  static const std::optional<ModelBundle::LoadedModel>& cons(const ModelBundle& b) {
    return b.cons_;
  }
};

Predictor ModelBundle::predictor(const Dataset& dataset) const {
  (void)dataset;
  const ModelBundle* self = this;
  return [self](const Scene& scene, const std::string& action) {
    ScenePrediction prediction;
    const auto& rel = BundleAccess::rel(*self);
    const auto& expl = BundleAccess::expl(*self);
    const auto& cons = BundleAccess::cons(*self);

    if (rel && rel->has_rel_head) {
      prediction.labels = BundleAccess::forward(*rel, scene, action, true).labels;
    } else {
      // no relationship model: fall back to the ground-truth labels so that
      // decoder-only checkpoints can still be evaluated (gating: gt)
      for (const auto& [iid, ann] : scene.record.actions.at(action)) {
        prediction.labels[iid] = ann.label;
      }
      for (const auto& [iid, cls] : scene.map.instance_class()) {
        prediction.labels.try_emplace(iid, Relationship::kFirmlyNegative);
      }
    }

    // generation is gated on the predicted relationship being an exception
    std::vector<int> gate_ids;
    for (const auto& [iid, label] : prediction.labels) {
      if (is_exception(label)) gate_ids.push_back(iid);
    }
    if (expl) {
      prediction.explanations = BundleAccess::generate(*expl, scene, action, 0, true, gate_ids);
    }
    if (cons) {
      prediction.consequences = BundleAccess::generate(*cons, scene, action, 0, false, gate_ids);
    }
    return prediction;
  };
}

Predictor kb_predictor(const AffordanceKB& kb) {
  return [kb](const Scene& scene, const std::string& action) {
    ScenePrediction prediction;
    for (const auto& [iid, cls] : scene.map.instance_class()) {
      prediction.labels[iid] = kb.predict(action, cls);
    }
    return prediction;
  };
}

Predictor oracle_predictor() {
  return [](const Scene& scene, const std::string& action) {
    ScenePrediction prediction;
    const auto& anns = scene.record.actions.at(action);
    for (const auto& [iid, cls] : scene.map.instance_class()) {
      auto it = anns.find(iid);
      prediction.labels[iid] = it == anns.end() ? Relationship::kPositive : it->second.label;
      if (it != anns.end() && is_exception(it->second.label)) {
        if (!it->second.explanations.empty()) {
          prediction.explanations[iid] = it->second.explanations.front();
        }
        if (!it->second.consequences.empty()) {
          prediction.consequences[iid] = it->second.consequences.front();
        }
      }
    }
    return prediction;
  };
}

// ---------------------------------------------------------------------------
// T sweep + canonical gradient checks
// ---------------------------------------------------------------------------

std::vector<SweepRow> sweep_T(const RunConfig& base, const std::vector<int>& ts) {
  std::vector<SweepRow> rows;
  for (int t : ts) {
    RunConfig cfg = base;
    cfg.T = t;
    cfg.out_dir = (fs::path(base.out_dir) / ("T" + std::to_string(t))).string();
    TrainResult tr = train(cfg);
    ModelBundle bundle = ModelBundle::load(tr.checkpoint_path, "", "");
    Dataset dataset = Dataset::open(cfg.data_dir);
    SplitSpec splits = load_splits_file(cfg.splits_path.empty()
                                            ? (fs::path(cfg.data_dir) / "splits.json").string()
                                            : cfg.splits_path);
    EvalReport test = evaluate_predictor(dataset, splits.test, "test", cfg.actions,
                                         bundle.predictor(dataset), false);
    SweepRow row;
    row.T = t;
    row.val_macc = tr.best_val_metric;
    const ActionEval& e = test.per_action.at(cfg.actions.front());
    row.test_macc = e.macc;
    row.test_macc_e = e.macc_e;
    row.test_decision_accuracy = e.decision_accuracy;
    rows.push_back(row);
  }
  return rows;
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json j;
    j["T"] = r.T;
    j["val_macc"] = r.val_macc;
    j["test_macc"] = r.test_macc;
    j["test_macc_e"] = r.test_macc_e;
    j["test_decision_accuracy"] = r.test_decision_accuracy;
    out.push_back(j);
  }
  return out;
}

std::string sweep_to_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::setw(4) << "T" << std::setw(10) << "val" << std::setw(10) << "test"
     << std::setw(10) << "test-E" << std::setw(10) << "dec" << "\n";
  for (const auto& r : rows) {
    os << std::setw(4) << r.T << std::fixed << std::setprecision(3) << std::setw(10)
       << r.val_macc << std::setw(10) << r.test_macc << std::setw(10) << r.test_macc_e
       << std::setw(10) << r.test_decision_accuracy << "\n";
  }
  return os.str();
}

GradCheckSummary run_canonical_gradchecks(int hidden, uint64_t seed, double tolerance) {
  GradCheckSummary summary;

  // (a) node init + propagation (T=3) + fusion + relationship head, i.e. the
  // full forward stack, on a random 5-node spatial graph.
  {
    GgnnConfig cfg;
    cfg.hidden = hidden;
    cfg.num_classes = 6;
    cfg.feature_dim = 8;
    cfg.global_dim = 5;
    ParamStore store;
    Rng rng(seed);
    TrunkParams trunk = add_trunk_params(store, cfg, rng);
    RelHeadParams head = add_rel_head_params(store, cfg.hidden, rng, "rel");

    SceneGraph g;
    for (int i = 0; i < 5; ++i) {
      SceneNode node;
      node.instance_id = i + 1;
      g.nodes.push_back(node);
    }
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}};
    SceneInputs in;
    Rng in_rng(mix_seed(seed, 1));
    for (int v = 0; v < 5; ++v) {
      SceneNodeInput ni;
      ni.class_id = in_rng.uniform_int(0, cfg.num_classes - 1);
      ni.feature = Tensor::zeros({cfg.feature_dim});
      for (int i = 0; i < cfg.feature_dim; ++i) ni.feature[i] = in_rng.uniform(-1, 1);
      in.nodes.push_back(std::move(ni));
    }
    in.global = Tensor::zeros({cfg.global_dim});
    for (int i = 0; i < cfg.global_dim; ++i) in.global[i] = in_rng.uniform(-1, 1);
    std::vector<int> targets;
    for (int v = 0; v < 5; ++v) targets.push_back(in_rng.uniform_int(0, kNumRelationships - 1));

    const int T = 3;
    auto loss = [&]() {
      TrunkTrace trace = trunk_forward(g, in, trunk, cfg, T);
      RelHeadTrace ht = rel_head_forward(trace.ho, head);
      double total = 0.0;
      for (int v = 0; v < 5; ++v) {
        Tensor logits = Tensor::zeros({kNumRelationships});
        for (int k = 0; k < kNumRelationships; ++k) logits[k] = ht.logits.at(v, k);
        total += cross_entropy(logits, targets[static_cast<size_t>(v)]);
      }
      return total / 5.0;
    };
    auto backward = [&]() {
      TrunkTrace trace = trunk_forward(g, in, trunk, cfg, T);
      RelHeadTrace ht = rel_head_forward(trace.ho, head);
      Tensor dlogits = Tensor::zeros({5, kNumRelationships});
      for (int v = 0; v < 5; ++v) {
        Tensor logits = Tensor::zeros({kNumRelationships});
        for (int k = 0; k < kNumRelationships; ++k) logits[k] = ht.logits.at(v, k);
        Tensor dl = cross_entropy_grad(logits, targets[static_cast<size_t>(v)]);
        for (int k = 0; k < kNumRelationships; ++k) dlogits.at(v, k) = dl[k] / 5.0;
      }
      Tensor dho = Tensor::zeros({5, cfg.hidden});
      rel_head_backward(trace.ho, head, ht, dlogits, dho);
      trunk_backward(g, in, trunk, cfg, trace, dho);
    };
    GradCheckReport report = gradient_check(store, loss, backward, 1e-5);
    summary.ggnn_max_rel_err = report.max_rel_err;
    for (const auto& [name, err] : report.per_param) {
      std::ostringstream os;
      os << "ggnn    " << std::left << std::setw(18) << name << std::scientific
         << std::setprecision(3) << err;
      summary.lines.push_back(os.str());
    }
  }

  // (b) teacher-forced decoder on a 5-token sentence.
  {
    DecoderConfig cfg{hidden, 14, hidden, 20};
    ParamStore store;
    Rng rng(mix_seed(seed, 2));
    DecoderParams params = add_decoder_params(store, cfg, rng, "dec");
    Tensor ho = Tensor::zeros({hidden});
    for (int i = 0; i < hidden; ++i) ho[i] = rng.uniform(0, 1);
    std::vector<int> sentence = {4, 9, 5, 13, 7};

    auto loss = [&]() { return teacher_forced_loss(ho.data(), sentence, params, cfg); };
    auto backward = [&]() {
      DecoderTrace trace;
      teacher_forced_loss(ho.data(), sentence, params, cfg, &trace);
      decoder_backward(ho.data(), params, cfg, trace);
    };
    GradCheckReport report = gradient_check(store, loss, backward, 1e-5);
    summary.decoder_max_rel_err = report.max_rel_err;
    for (const auto& [name, err] : report.per_param) {
      std::ostringstream os;
      os << "decoder " << std::left << std::setw(18) << name << std::scientific
         << std::setprecision(3) << err;
      summary.lines.push_back(os.str());
    }
  }

  if (summary.ggnn_max_rel_err > tolerance || summary.decoder_max_rel_err > tolerance) {
    throw NumericError("gradient check failed: ggnn " +
                       std::to_string(summary.ggnn_max_rel_err) + ", decoder " +
                       std::to_string(summary.decoder_max_rel_err) + " exceeds " +
                       std::to_string(tolerance));
  }
  return summary;
}

}  // namespace afford
