#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afford/instance_map.hpp"
#include "afford/kb.hpp"
#include "afford/relationship.hpp"
#include "afford/tensor.hpp"

namespace afford {

// Per (action, instance) annotation. Explanation/consequence references are
// present exactly when the label is an exception; the test-style scenes may
// carry up to three references each.
struct InstanceAnnotation {
  Relationship label = Relationship::kPositive;
  std::vector<std::string> explanations;
  std::vector<std::string> consequences;
};

struct SceneRecord {
  std::string id;
  std::string map_path;          // all paths relative to the dataset root
  std::string map_classes_path;
  std::string feat_bin_path;
  std::string feat_header_path;
  std::map<std::string, std::map<int, InstanceAnnotation>> actions;
};

// Externally supplied fixed-dimension vectors: one per instance plus a single
// whole-image vector.
struct FeatureTable {
  int dim = 0;
  int global_dim = 0;
  Tensor global;
  std::map<int, Tensor> per_instance;
};

struct DatasetManifest {
  std::string version = "v1";
  std::vector<std::string> classes;
  std::vector<std::string> actions;
  int feature_dim = 0;
  int global_dim = 0;
  std::vector<std::string> scene_ids;
  std::string data_version;  // content hash written by the generator
};

struct Scene {
  SceneRecord record;
  InstanceMap map;
  FeatureTable features;
};

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  const std::vector<std::string>& split(const std::string& name) const;
};

// Directory layout: dataset.json, scenes/<id>.json, maps/<id>.pgm (+
// .classes.json), feats/<id>.bin (+ .json header), kb.json, splits.json,
// vocab.txt. See FORMATS.md.
class Dataset {
 public:
  static Dataset open(const std::string& root);

  const std::string& root() const { return root_; }
  const DatasetManifest& manifest() const { return manifest_; }
  const std::vector<std::string>& class_names() const { return manifest_.classes; }

  // Fully cross-validated scene: labels on real instances, sentences exactly
  // on exceptions, feature table consistent with the manifest dimensions.
  Scene load_scene(const std::string& scene_id) const;

  AffordanceKB load_kb() const;
  SplitSpec load_splits() const;

 private:
  std::string root_;
  DatasetManifest manifest_;
};

// Writer-side helpers shared by the synthetic generator.
void save_manifest(const std::string& root, const DatasetManifest& manifest);
void save_scene(const std::string& root, const SceneRecord& record, const InstanceMap& map,
                const FeatureTable& features);
void save_splits(const std::string& root, const SplitSpec& splits);
SplitSpec load_splits_file(const std::string& path);

FeatureTable load_feature_table(const std::string& bin_path, const std::string& header_path);
void save_feature_table(const std::string& bin_path, const std::string& header_path,
                        const FeatureTable& table);

// Scene id plus its per-class exception-instance counts, the statistic the
// stratified splitter balances.
struct SceneSummary {
  std::string id;
  std::array<int, kNumRelationships> exception_counts = {};
};

SceneSummary summarize_scene(const SceneRecord& record);

// Greedy stratification: per-split exception-class proportions land within
// 10% relative of the global proportions when feasible. If the sizes sum to
// less than the scene count the remainder goes to train so the spec stays
// covering. Deterministic per seed.
SplitSpec stratified_split(const std::vector<SceneSummary>& scenes, int train_size, int val_size,
                           int test_size, uint64_t seed);

}  // namespace afford
