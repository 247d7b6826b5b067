#include "afford/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "afford/scene_graph.hpp"
#include "afford/vocab.hpp"

namespace fs = std::filesystem;

namespace afford {

const std::vector<std::string>& synth_class_names() {
  static const std::vector<std::string> names = {"floor", "wall",   "chair", "table", "person",
                                                 "fire",  "bottle", "water", "bench"};
  return names;
}

const std::vector<SynthRule>& synth_rules_radius1() {
  using namespace synth_class;
  static const std::vector<SynthRule> rules = {
      {"sit", kChair, kPerson, -1, Relationship::kPhysicalObstacle},
      {"sit", kTable, kPerson, -1, Relationship::kSociallyAwkward},
      {"sit", kBench, kWater, -1, Relationship::kObjectNonFunctional},
      {"run", kFloor, kFire, -1, Relationship::kDangerous},
      {"grasp", kBottle, kPerson, -1, Relationship::kSociallyForbidden},
  };
  return rules;
}

const std::vector<SynthRule>& synth_rules_radius2() {
  using namespace synth_class;
  static const std::vector<SynthRule> rules = {
      {"sit", kChair, kPerson, kTable, Relationship::kPhysicalObstacle},
  };
  return rules;
}

void SynthConfig::validate() const {
  if (out_dir.empty()) throw DataError("synth: out_dir is required");
  if (num_scenes <= 0) throw DataError("synth: num_scenes must be positive");
  if (cell < 10) throw DataError("synth: cell must be at least 10 pixels");
  if (width % cell != 0 || height % cell != 0) {
    throw DataError("synth: width and height must be multiples of the cell size");
  }
  if ((width / cell) * (height / cell) < max_clusters) {
    throw DataError("synth: degenerate config, not enough cells for the requested clusters");
  }
  if (p_exception < 0.0 || p_exception > 1.0) throw DataError("synth: p_exception out of [0,1]");
  if (radius != 1 && radius != 2) throw DataError("synth: radius must be 1 or 2");
  if (min_clusters < 1 || max_clusters < min_clusters) throw DataError("synth: bad cluster range");
  if (global_dim < synth_class::kCount) {
    throw DataError("synth: global_dim must be at least the class count");
  }
  if (refs_per_exception < 1) throw DataError("synth: refs_per_exception must be >= 1");
}

const std::vector<SynthRule>& SynthConfig::rules() const {
  return radius == 2 ? synth_rules_radius2() : synth_rules_radius1();
}

double synth_unary_decision_ceiling(const SynthConfig& cfg) {
  return std::max(cfg.p_exception, 1.0 - cfg.p_exception);
}

namespace {

using namespace synth_class;

struct ClusterPlan {
  int cell_x = 0;
  int cell_y = 0;
  int rule_index = -1;        // >= 0 for affordance-target clusters
  int distractor_class = -1;  // >= 0 for lone distractors
  bool exception = false;
};

struct ScenePlan {
  std::string id;
  std::vector<ClusterPlan> clusters;
};

struct RuleTemplates {
  std::array<std::string, 2> expl;
  std::array<std::string, 2> cons;
};

std::string fill(std::string s, const std::string& slot, const std::string& value) {
  auto pos = s.find(slot);
  while (pos != std::string::npos) {
    s.replace(pos, slot.size(), value);
    pos = s.find(slot);
  }
  return s;
}

RuleTemplates templates_for(const SynthRule& rule) {
  const auto& names = synth_class_names();
  const std::string t = names[static_cast<size_t>(rule.target_class)];
  const std::string g = names[static_cast<size_t>(rule.trigger_class)];
  const std::string m =
      rule.mediator_class >= 0 ? names[static_cast<size_t>(rule.mediator_class)] : "";
  RuleTemplates tpl;
  if (rule.mediator_class >= 0) {
    tpl.expl = {"a {g} sits at the {m} against this {t}",
                "the {t} is wedged between the {m} and a {g}"};
    tpl.cons = {"you would bother the {g} at the {m}", "the {g} would have to move away"};
  } else {
    switch (rule.exception) {
      case Relationship::kPhysicalObstacle:
        tpl.expl = {"the {t} is occupied by a {g} right now", "a {g} is blocking the {t}"};
        tpl.cons = {"you would disturb the {g} there", "the {g} would be pushed away"};
        break;
      case Relationship::kSociallyAwkward:
        tpl.expl = {"people are using the {t} near the {g}",
                    "sitting at the {t} next to a {g} looks odd"};
        tpl.cons = {"everyone around would stare at you", "you would embarrass yourself in public"};
        break;
      case Relationship::kObjectNonFunctional:
        tpl.expl = {"the {t} is soaked by the {g} and unusable", "the {g} has ruined the {t}"};
        tpl.cons = {"your clothes would get wet and dirty", "you could slip off the ruined {t}"};
        break;
      case Relationship::kDangerous:
        tpl.expl = {"the {t} runs right next to a {g}", "a {g} is burning close to the {t}"};
        tpl.cons = {"you could get badly burned there", "the {g} would hurt you quickly"};
        break;
      default:
        tpl.expl = {"the {t} belongs to the {g} standing nearby", "a {g} is holding that {t}"};
        tpl.cons = {"taking it would count as theft", "the {g} would call the police"};
        break;
    }
  }
  for (auto& s : tpl.expl) s = fill(fill(fill(s, "{t}", t), "{g}", g), "{m}", m);
  for (auto& s : tpl.cons) s = fill(fill(fill(s, "{t}", t), "{g}", g), "{m}", m);
  return tpl;
}

struct Rect {
  int x0, y0, x1, y1;  // inclusive
};

void paint(std::vector<uint16_t>& px, int width, const Rect& r, int id) {
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) px[static_cast<size_t>(y) * width + x] = static_cast<uint16_t>(id);
  }
}

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a_str(uint64_t h, const std::string& s) { return fnv1a(h, s.data(), s.size()); }

}  // namespace

DatasetManifest synth_generate(const SynthConfig& cfg, uint64_t seed) {
  cfg.validate();
  const auto& rules = cfg.rules();
  const auto& class_names = synth_class_names();

  // Class-mean feature vectors, shared across the dataset. The floor/wall and
  // bottle/water pairs sit close together so the object feature is a noisy
  // class signal rather than a clean one.
  Rng mean_rng(mix_seed(seed, 0xfea7));
  std::vector<Tensor> means;
  for (int c = 0; c < kCount; ++c) {
    Tensor m = Tensor::zeros({cfg.feature_dim});
    for (int i = 0; i < cfg.feature_dim; ++i) m[i] = mean_rng.uniform(-1, 1);
    means.push_back(std::move(m));
  }
  auto nudge = [&](int from, int to) {
    Tensor dir = Tensor::zeros({cfg.feature_dim});
    double norm = 0.0;
    for (int i = 0; i < cfg.feature_dim; ++i) {
      dir[i] = mean_rng.normal();
      norm += dir[i] * dir[i];
    }
    norm = std::sqrt(norm);
    for (int i = 0; i < cfg.feature_dim; ++i) {
      means[static_cast<size_t>(to)][i] = means[static_cast<size_t>(from)][i] + 0.6 * dir[i] / norm;
    }
  };
  nudge(kFloor, kWall);
  nudge(kBottle, kWater);

  // --- plan phase ---
  Rng plan_rng(mix_seed(seed, 0x9a11));
  int cells_x = cfg.width / cfg.cell;
  int cells_y = cfg.height / cfg.cell;
  std::vector<ScenePlan> plans;
  std::vector<std::pair<int, int>> rule_sites;  // (scene index, cluster index) per target

  std::vector<int> distractors = cfg.radius == 2
                                     ? std::vector<int>{kWall, kFloor, kPerson}
                                     : std::vector<int>{kWall, kPerson, kFire, kWater};
  for (int s = 0; s < cfg.num_scenes; ++s) {
    ScenePlan plan;
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%04d", s);
    plan.id = buf;
    int n_clusters = plan_rng.uniform_int(cfg.min_clusters, cfg.max_clusters);
    std::vector<int> cells(static_cast<size_t>(cells_x) * cells_y);
    for (size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    plan_rng.shuffle(cells);
    for (int k = 0; k < n_clusters; ++k) {
      ClusterPlan cluster;
      cluster.cell_x = cells[static_cast<size_t>(k)] % cells_x;
      cluster.cell_y = cells[static_cast<size_t>(k)] / cells_x;
      if (plan_rng.uniform01() < 0.7) {
        cluster.rule_index = plan_rng.uniform_int(0, static_cast<int>(rules.size()) - 1);
      } else {
        cluster.distractor_class = distractors[static_cast<size_t>(
            plan_rng.uniform_int(0, static_cast<int>(distractors.size()) - 1))];
      }
      plan.clusters.push_back(cluster);
    }
    plans.push_back(std::move(plan));
  }

  // Quota-exact exception assignment per rule: exactly round(p * count) of
  // each rule's target instances are exceptions, so the dataset-wide majority
  // rate equals the configured probability up to rounding.
  for (size_t r = 0; r < rules.size(); ++r) {
    rule_sites.clear();
    for (size_t s = 0; s < plans.size(); ++s) {
      for (size_t k = 0; k < plans[s].clusters.size(); ++k) {
        if (plans[s].clusters[k].rule_index == static_cast<int>(r)) {
          rule_sites.push_back({static_cast<int>(s), static_cast<int>(k)});
        }
      }
    }
    plan_rng.shuffle(rule_sites);
    auto quota = static_cast<size_t>(
        std::lround(cfg.p_exception * static_cast<double>(rule_sites.size())));
    for (size_t i = 0; i < quota; ++i) {
      plans[static_cast<size_t>(rule_sites[i].first)]
          .clusters[static_cast<size_t>(rule_sites[i].second)]
          .exception = true;
    }
  }

  // --- emission phase (independent per scene given the plan) ---
  fs::create_directories(fs::path(cfg.out_dir));
  uint64_t content_hash = 0xcbf29ce484222325ull;
  std::vector<std::string> all_sentences;
  DatasetManifest manifest;
  manifest.classes = class_names;
  manifest.actions = kb_actions();
  manifest.feature_dim = cfg.feature_dim;
  manifest.global_dim = cfg.global_dim;

  for (size_t s = 0; s < plans.size(); ++s) {
    const ScenePlan& plan = plans[s];
    Rng rng(mix_seed(seed, 0x5ce0 + s));
    std::vector<uint16_t> px(static_cast<size_t>(cfg.width) * cfg.height, 0);
    std::map<int, int> classes;
    // (instance id, rule index, exception) for labeling below
    struct Placed {
      int id;
      int class_id;
      int rule_index = -1;
      bool exception = false;
    };
    std::vector<Placed> placed;
    int next_id = 1;

    for (const ClusterPlan& cluster : plan.clusters) {
      int bx = cluster.cell_x * cfg.cell;
      int by = cluster.cell_y * cfg.cell;
      int inner = cfg.cell - 2;  // 1px margin keeps clusters disconnected
      if (cluster.distractor_class >= 0) {
        int w = rng.uniform_int(2, 4), h = rng.uniform_int(2, 4);
        int x = bx + 1 + rng.uniform_int(0, inner - w);
        int y = by + 1 + rng.uniform_int(0, inner - h);
        paint(px, cfg.width, {x, y, x + w - 1, y + h - 1}, next_id);
        classes[next_id] = cluster.distractor_class;
        placed.push_back({next_id, cluster.distractor_class});
        ++next_id;
        continue;
      }
      const SynthRule& rule = rules[static_cast<size_t>(cluster.rule_index)];
      if (rule.mediator_class < 0) {
        // target rect, trigger sharing a boundary iff exception
        int tw = rng.uniform_int(3, 4), th = rng.uniform_int(3, 4);
        bool side_right = rng.bernoulli(0.5);
        int gw = rng.uniform_int(2, 3), gh = rng.uniform_int(2, 3);
        int max_x = inner - tw - (side_right ? gw : 0);
        int max_y = inner - th - (side_right ? 0 : gh);
        int x = bx + 1 + rng.uniform_int(0, std::max(0, max_x));
        int y = by + 1 + rng.uniform_int(0, std::max(0, max_y));
        paint(px, cfg.width, {x, y, x + tw - 1, y + th - 1}, next_id);
        classes[next_id] = rule.target_class;
        placed.push_back({next_id, rule.target_class, cluster.rule_index, cluster.exception});
        int target_id = next_id;
        ++next_id;
        if (cluster.exception) {
          Rect g;
          if (side_right) {
            int gy = y + rng.uniform_int(0, std::max(0, th - gh));
            g = {x + tw, gy, x + tw + gw - 1, gy + gh - 1};
          } else {
            int gx = x + rng.uniform_int(0, std::max(0, tw - gw));
            g = {gx, y + th, gx + gw - 1, y + th + gh - 1};
          }
          paint(px, cfg.width, g, next_id);
          classes[next_id] = rule.trigger_class;
          placed.push_back({next_id, rule.trigger_class});
          ++next_id;
        }
        (void)target_id;
      } else {
        // radius-2 cluster: target | mediator | trigger in a row; the trigger
        // never touches the target.
        int rows = rng.uniform_int(3, 4);
        int y = by + 1 + rng.uniform_int(0, inner - rows);
        int x = bx + 1 + rng.uniform_int(0, inner - 8);
        paint(px, cfg.width, {x, y, x + 2, y + rows - 1}, next_id);  // target, 3 wide
        classes[next_id] = rule.target_class;
        placed.push_back({next_id, rule.target_class, cluster.rule_index, cluster.exception});
        ++next_id;
        paint(px, cfg.width, {x + 3, y, x + 4, y + rows - 1}, next_id);  // mediator, 2 wide
        classes[next_id] = rule.mediator_class;
        placed.push_back({next_id, rule.mediator_class});
        ++next_id;
        if (cluster.exception) {
          paint(px, cfg.width, {x + 5, y, x + 6, y + rows - 1}, next_id);  // trigger, 2 wide
          classes[next_id] = rule.trigger_class;
          placed.push_back({next_id, rule.trigger_class});
          ++next_id;
        }
      }
    }

    InstanceMap map(cfg.width, cfg.height, px, classes);

    // labels: rule exceptions where planned, otherwise the KB prior
    auto kb_positive = [&](const std::string& action, int cls) {
      if (action == "sit") return cls == kChair || cls == kTable || cls == kBench || cls == kFloor;
      if (action == "run") return cls == kFloor;
      return cls == kBottle;
    };
    SceneRecord record;
    record.id = plan.id;
    record.map_path = "maps/" + plan.id + ".pgm";
    record.map_classes_path = "maps/" + plan.id + ".classes.json";
    record.feat_bin_path = "feats/" + plan.id + ".bin";
    record.feat_header_path = "feats/" + plan.id + ".json";
    for (const auto& action : kb_actions()) {
      auto& entries = record.actions[action];
      for (const Placed& inst : placed) {
        InstanceAnnotation ann;
        if (inst.rule_index >= 0 && inst.exception &&
            rules[static_cast<size_t>(inst.rule_index)].action == action) {
          const SynthRule& rule = rules[static_cast<size_t>(inst.rule_index)];
          ann.label = rule.exception;
          RuleTemplates tpl = templates_for(rule);
          for (int ref = 0; ref < cfg.refs_per_exception; ++ref) {
            int ve = rng.bernoulli(0.75) ? 0 : 1;
            int vc = rng.bernoulli(0.75) ? 0 : 1;
            ann.explanations.push_back(tpl.expl[static_cast<size_t>(ve)]);
            ann.consequences.push_back(tpl.cons[static_cast<size_t>(vc)]);
          }
          for (const auto& t : ann.explanations) all_sentences.push_back(t);
          for (const auto& t : ann.consequences) all_sentences.push_back(t);
        } else {
          ann.label = kb_positive(action, inst.class_id) ? Relationship::kPositive
                                                         : Relationship::kFirmlyNegative;
        }
        entries[inst.id] = std::move(ann);
      }
    }

    // features: class mean + isotropic noise; the whole-image vector is pure
    // noise unless global_hint asks for a noisy class-count histogram.
    FeatureTable table;
    table.dim = cfg.feature_dim;
    table.global_dim = cfg.global_dim;
    for (const Placed& inst : placed) {
      Tensor f = Tensor::zeros({cfg.feature_dim});
      for (int i = 0; i < cfg.feature_dim; ++i) {
        f[i] = means[static_cast<size_t>(inst.class_id)][i] + rng.normal(0.0, cfg.feature_noise);
      }
      table.per_instance[inst.id] = std::move(f);
    }
    table.global = Tensor::zeros({cfg.global_dim});
    if (cfg.global_hint) {
      for (const Placed& inst : placed) table.global[inst.class_id] += 1.0;
      for (int i = 0; i < cfg.global_dim; ++i) table.global[i] += rng.normal(0.0, 0.3);
    } else {
      for (int i = 0; i < cfg.global_dim; ++i) table.global[i] = rng.normal(0.0, 1.0);
    }

    save_scene(cfg.out_dir, record, map, table);
    manifest.scene_ids.push_back(plan.id);

    content_hash = fnv1a_str(content_hash, plan.id);
    content_hash = fnv1a(content_hash, px.data(), px.size() * sizeof(uint16_t));
    for (const auto& [action, entries] : record.actions) {
      for (const auto& [iid, ann] : entries) {
        content_hash = fnv1a(content_hash, &iid, sizeof iid);
        int label = static_cast<int>(ann.label);
        content_hash = fnv1a(content_hash, &label, sizeof label);
      }
    }
  }

  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(content_hash));
  manifest.data_version = hex;
  save_manifest(cfg.out_dir, manifest);

  // kb.json mirrors the generator's prior
  {
    std::map<std::string, std::set<int>> kb_entries;
    kb_entries["sit"] = {kChair, kTable, kBench, kFloor};
    kb_entries["run"] = {kFloor};
    kb_entries["grasp"] = {kBottle};
    AffordanceKB kb(std::move(kb_entries));
    kb.save((fs::path(cfg.out_dir) / "kb.json").string(), class_names);
  }

  // dataset-level vocabulary over every emitted sentence, for diffing
  if (!all_sentences.empty()) {
    Vocabulary vocab = Vocabulary::build(all_sentences, cfg.vocab_min_freq);
    vocab.save((fs::path(cfg.out_dir) / "vocab.txt").string());
  }
  return manifest;
}

}  // namespace afford
