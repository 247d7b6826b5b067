#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afford/dataset.hpp"

namespace afford {

// Fixed class inventory for the synthetic scenes.
namespace synth_class {
inline constexpr int kFloor = 0;
inline constexpr int kWall = 1;
inline constexpr int kChair = 2;
inline constexpr int kTable = 3;
inline constexpr int kPerson = 4;
inline constexpr int kFire = 5;
inline constexpr int kBottle = 6;
inline constexpr int kWater = 7;
inline constexpr int kBench = 8;
inline constexpr int kCount = 9;
}  // namespace synth_class

const std::vector<std::string>& synth_class_names();

// One labeling rule: instances of `target_class` are `exception` for `action`
// iff a `trigger_class` instance is adjacent (radius 1) or adjacent to an
// adjacent mediator (radius 2). Rules with distinct (action, target) pairs
// never overlap.
struct SynthRule {
  std::string action;
  int target_class;
  int trigger_class;
  int mediator_class;  // -1 for radius-1 rules
  Relationship exception;
};

const std::vector<SynthRule>& synth_rules_radius1();
const std::vector<SynthRule>& synth_rules_radius2();

struct SynthConfig {
  std::string out_dir;
  int num_scenes = 500;
  int width = 60;
  int height = 60;
  int cell = 12;  // scenes are a grid of cell x cell regions, one cluster each
  int feature_dim = 32;
  int global_dim = 16;
  double p_exception = 0.3;    // per affordance-target instance, quota-exact
  double feature_noise = 0.35;
  bool global_hint = false;    // informative whole-image feature
  int radius = 1;              // 1 or 2
  int min_clusters = 3;
  int max_clusters = 6;
  int refs_per_exception = 2;
  int vocab_min_freq = 2;

  void validate() const;
  const std::vector<SynthRule>& rules() const;
};

// Best context-free accuracy on the exception-vs-positive decision for the
// rule-affected classes. Exception labels depend only on adjacency, which the
// per-object features do not carry, so no unary model can beat the majority
// rate; quotas make that rate exactly p_exception up to rounding.
double synth_unary_decision_ceiling(const SynthConfig& cfg);

// Writes a complete dataset (manifest, scenes, maps, features, kb.json,
// vocab.txt). Byte-identical for identical (config, seed).
DatasetManifest synth_generate(const SynthConfig& cfg, uint64_t seed);

}  // namespace afford
