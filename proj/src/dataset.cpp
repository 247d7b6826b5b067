#include "afford/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace afford {

namespace {

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write " + path);
  os << j.dump(2) << "\n";
}

std::vector<std::string> sentence_list(const json& j) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& s : j) out.push_back(s.get<std::string>());
  } else {
    throw DataError("expected a sentence or list of sentences");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& SplitSpec::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw DataError("unknown split '" + name + "' (expected train, val, or test)");
}

Dataset Dataset::open(const std::string& root) {
  json j = read_json_file((fs::path(root) / "dataset.json").string());
  Dataset ds;
  ds.root_ = root;
  DatasetManifest& m = ds.manifest_;
  m.version = j.at("version").get<std::string>();
  if (m.version != "v1") throw DataError("unsupported dataset version '" + m.version + "'");
  m.classes = j.at("classes").get<std::vector<std::string>>();
  m.actions = j.at("actions").get<std::vector<std::string>>();
  m.feature_dim = j.at("feature_dim").get<int>();
  m.global_dim = j.at("global_dim").get<int>();
  m.scene_ids = j.at("scenes").get<std::vector<std::string>>();
  m.data_version = j.value("data_version", "");
  return ds;
}

Scene Dataset::load_scene(const std::string& scene_id) const {
  fs::path scene_path = fs::path(root_) / "scenes" / (scene_id + ".json");
  json j = read_json_file(scene_path.string());
  static const std::set<std::string> known_keys = {
      "version", "id", "map", "map_classes", "features", "feature_header", "actions"};
  for (const auto& [key, value] : j.items()) {
    if (!known_keys.count(key)) {
      throw DataError(scene_path.string() + ": unknown field '" + key + "'");
    }
  }
  if (j.at("version").get<std::string>() != "v1") {
    throw DataError(scene_path.string() + ": unsupported scene version");
  }

  SceneRecord record;
  record.id = j.at("id").get<std::string>();
  if (record.id != scene_id) {
    throw DataError(scene_path.string() + ": id field does not match file name");
  }
  record.map_path = j.at("map").get<std::string>();
  record.map_classes_path = j.at("map_classes").get<std::string>();
  record.feat_bin_path = j.at("features").get<std::string>();
  record.feat_header_path = j.at("feature_header").get<std::string>();

  for (const auto& [action, entries] : j.at("actions").items()) {
    if (std::find(manifest_.actions.begin(), manifest_.actions.end(), action) ==
        manifest_.actions.end()) {
      throw DataError(scene_path.string() + ": unknown action '" + action + "'");
    }
    auto& per_instance = record.actions[action];
    for (const auto& [iid_str, ann] : entries.items()) {
      InstanceAnnotation a;
      a.label = relationship_from_string(ann.at("relationship").get<std::string>());
      if (ann.contains("explanations")) a.explanations = sentence_list(ann.at("explanations"));
      if (ann.contains("explanation")) a.explanations = sentence_list(ann.at("explanation"));
      if (ann.contains("consequences")) a.consequences = sentence_list(ann.at("consequences"));
      if (ann.contains("consequence")) a.consequences = sentence_list(ann.at("consequence"));
      per_instance[std::stoi(iid_str)] = std::move(a);
    }
  }
  for (const auto& action : manifest_.actions) {
    if (!record.actions.count(action)) {
      throw DataError(scene_path.string() + ": missing annotations for action '" + action + "'");
    }
  }

  InstanceMap map = InstanceMap::load_pgm((fs::path(root_) / record.map_path).string(),
                                          (fs::path(root_) / record.map_classes_path).string());
  FeatureTable features =
      load_feature_table((fs::path(root_) / record.feat_bin_path).string(),
                         (fs::path(root_) / record.feat_header_path).string());

  // Cross-validation of the three files.
  if (features.dim != manifest_.feature_dim || features.global_dim != manifest_.global_dim) {
    throw DataError(scene_path.string() + ": feature dimensions " +
                    std::to_string(features.dim) + "/" + std::to_string(features.global_dim) +
                    " do not match the manifest");
  }
  for (const auto& [iid, cls] : map.instance_class()) {
    if (cls >= static_cast<int>(manifest_.classes.size())) {
      throw DataError(scene_path.string() + ": instance " + std::to_string(iid) +
                      " has class id " + std::to_string(cls) + " outside the class table");
    }
    if (!features.per_instance.count(iid)) {
      throw DataError(scene_path.string() + ": no feature vector for instance " +
                      std::to_string(iid));
    }
  }
  for (const auto& [action, entries] : record.actions) {
    for (const auto& [iid, ann] : entries) {
      if (!map.instance_class().count(iid)) {
        throw DataError(scene_path.string() + ": action '" + action + "' labels instance " +
                        std::to_string(iid) + " which is not in the instance map");
      }
      bool exc = is_exception(ann.label);
      bool has_sentences = !ann.explanations.empty() || !ann.consequences.empty();
      if (exc && (ann.explanations.empty() || ann.consequences.empty())) {
        throw DataError(scene_path.string() + ": exception label on instance " +
                        std::to_string(iid) + " (" + action +
                        ") must carry explanation and consequence sentences");
      }
      if (!exc && has_sentences) {
        throw DataError(scene_path.string() + ": non-exception label on instance " +
                        std::to_string(iid) + " (" + action + ") must not carry sentences");
      }
    }
  }

  Scene scene{std::move(record), std::move(map), std::move(features)};
  return scene;
}

AffordanceKB Dataset::load_kb() const {
  return AffordanceKB::load((fs::path(root_) / "kb.json").string(), manifest_.classes);
}

SplitSpec Dataset::load_splits() const {
  return load_splits_file((fs::path(root_) / "splits.json").string());
}

SplitSpec load_splits_file(const std::string& path) {
  json j = read_json_file(path);
  SplitSpec s;
  s.train = j.at("train").get<std::vector<std::string>>();
  s.val = j.at("val").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  return s;
}

void save_manifest(const std::string& root, const DatasetManifest& manifest) {
  json j;
  j["version"] = manifest.version;
  j["classes"] = manifest.classes;
  j["actions"] = manifest.actions;
  j["feature_dim"] = manifest.feature_dim;
  j["global_dim"] = manifest.global_dim;
  j["scenes"] = manifest.scene_ids;
  j["data_version"] = manifest.data_version;
  write_json_file((fs::path(root) / "dataset.json").string(), j);
}

void save_scene(const std::string& root, const SceneRecord& record, const InstanceMap& map,
                const FeatureTable& features) {
  fs::create_directories(fs::path(root) / "scenes");
  fs::create_directories(fs::path(root) / "maps");
  fs::create_directories(fs::path(root) / "feats");

  json actions = json::object();
  for (const auto& [action, entries] : record.actions) {
    json per_instance = json::object();
    for (const auto& [iid, ann] : entries) {
      json a;
      a["relationship"] = to_string(ann.label);
      if (!ann.explanations.empty()) a["explanations"] = ann.explanations;
      if (!ann.consequences.empty()) a["consequences"] = ann.consequences;
      per_instance[std::to_string(iid)] = a;
    }
    actions[action] = per_instance;
  }
  json j;
  j["version"] = "v1";
  j["id"] = record.id;
  j["map"] = record.map_path;
  j["map_classes"] = record.map_classes_path;
  j["features"] = record.feat_bin_path;
  j["feature_header"] = record.feat_header_path;
  j["actions"] = actions;
  write_json_file((fs::path(root) / "scenes" / (record.id + ".json")).string(), j);

  map.save_pgm((fs::path(root) / record.map_path).string(),
               (fs::path(root) / record.map_classes_path).string());
  save_feature_table((fs::path(root) / record.feat_bin_path).string(),
                     (fs::path(root) / record.feat_header_path).string(), features);
}

void save_splits(const std::string& root, const SplitSpec& splits) {
  json j;
  j["train"] = splits.train;
  j["val"] = splits.val;
  j["test"] = splits.test;
  write_json_file((fs::path(root) / "splits.json").string(), j);
}

FeatureTable load_feature_table(const std::string& bin_path, const std::string& header_path) {
  json h = read_json_file(header_path);
  FeatureTable table;
  table.dim = h.at("dimension").get<int>();
  table.global_dim = h.at("global_dimension").get<int>();
  int count = h.at("count").get<int>();
  std::vector<int> ids = h.at("ids").get<std::vector<int>>();
  if (static_cast<int>(ids.size()) != count) {
    throw DataError(header_path + ": count does not match the id list");
  }

  std::ifstream is(bin_path, std::ios::binary);
  if (!is) throw DataError("cannot open feature file: " + bin_path);
  size_t expected = static_cast<size_t>(table.global_dim) +
                    static_cast<size_t>(count) * static_cast<size_t>(table.dim);
  std::vector<float> raw(expected);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(expected * sizeof(float)));
  if (!is || is.peek() != EOF) {
    throw DataError(bin_path + ": size does not match header (expected " +
                    std::to_string(expected) + " float32 values)");
  }

  table.global = Tensor::zeros({table.global_dim});
  for (int i = 0; i < table.global_dim; ++i) table.global[i] = raw[static_cast<size_t>(i)];
  size_t off = static_cast<size_t>(table.global_dim);
  for (int n = 0; n < count; ++n) {
    Tensor f = Tensor::zeros({table.dim});
    for (int i = 0; i < table.dim; ++i) f[i] = raw[off++];
    table.per_instance[ids[static_cast<size_t>(n)]] = std::move(f);
  }
  return table;
}

void save_feature_table(const std::string& bin_path, const std::string& header_path,
                        const FeatureTable& table) {
  json h;
  h["count"] = table.per_instance.size();
  h["dimension"] = table.dim;
  h["global_dimension"] = table.global_dim;
  std::vector<int> ids;
  for (const auto& [iid, f] : table.per_instance) ids.push_back(iid);
  h["ids"] = ids;
  write_json_file(header_path, h);

  std::vector<float> raw;
  raw.reserve(static_cast<size_t>(table.global_dim) + ids.size() * static_cast<size_t>(table.dim));
  for (int i = 0; i < table.global_dim; ++i) raw.push_back(static_cast<float>(table.global[i]));
  for (int iid : ids) {
    const Tensor& f = table.per_instance.at(iid);
    if (f.size() != table.dim) {
      throw DataError("feature for instance " + std::to_string(iid) +
                      " has inconsistent dimension");
    }
    for (int i = 0; i < table.dim; ++i) raw.push_back(static_cast<float>(f[i]));
  }
  std::ofstream os(bin_path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write feature file: " + bin_path);
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(float)));
}

SceneSummary summarize_scene(const SceneRecord& record) {
  SceneSummary s;
  s.id = record.id;
  for (const auto& [action, entries] : record.actions) {
    for (const auto& [iid, ann] : entries) {
      if (is_exception(ann.label)) s.exception_counts[static_cast<size_t>(ann.label)] += 1;
    }
  }
  return s;
}

SplitSpec stratified_split(const std::vector<SceneSummary>& scenes, int train_size, int val_size,
                           int test_size, uint64_t seed) {
  int n = static_cast<int>(scenes.size());
  if (train_size < 0 || val_size < 0 || test_size < 0 ||
      train_size + val_size + test_size > n) {
    throw DataError("infeasible split sizes for " + std::to_string(n) + " scenes");
  }
  // Remainder goes to train so the splits stay covering.
  train_size += n - (train_size + val_size + test_size);

  std::array<double, kNumRelationships> global = {};
  for (const auto& s : scenes) {
    for (int c = 0; c < kNumRelationships; ++c) global[static_cast<size_t>(c)] += s.exception_counts[static_cast<size_t>(c)];
  }

  std::vector<int> order(scenes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    int ta = 0, tb = 0;
    for (int c = 0; c < kNumRelationships; ++c) {
      ta += scenes[static_cast<size_t>(a)].exception_counts[static_cast<size_t>(c)];
      tb += scenes[static_cast<size_t>(b)].exception_counts[static_cast<size_t>(c)];
    }
    return ta > tb;  // scenes with exceptions placed first, ties shuffled
  });

  struct Bucket {
    std::vector<std::string>* out;
    int capacity;
    double share;
    std::array<double, kNumRelationships> counts = {};
  };
  SplitSpec spec;
  std::array<Bucket, 3> buckets = {
      Bucket{&spec.train, train_size, static_cast<double>(train_size) / n},
      Bucket{&spec.val, val_size, static_cast<double>(val_size) / n},
      Bucket{&spec.test, test_size, static_cast<double>(test_size) / n},
  };

  for (int idx : order) {
    const SceneSummary& s = scenes[static_cast<size_t>(idx)];
    double best_score = -1e300;
    Bucket* best = nullptr;
    for (Bucket& b : buckets) {
      if (static_cast<int>(b.out->size()) >= b.capacity) continue;
      // Deficit against the bucket's expected share of each exception class,
      // plus a mild pull toward keeping scene counts proportional.
      double score = 0.0;
      for (int c = 0; c < kNumRelationships; ++c) {
        double expected = global[static_cast<size_t>(c)] * b.share;
        if (expected > 0.0) {
          score += (expected - b.counts[static_cast<size_t>(c)]) / expected *
                   s.exception_counts[static_cast<size_t>(c)];
        }
      }
      score += (b.capacity - static_cast<double>(b.out->size())) / std::max(1, b.capacity) * 0.01;
      if (score > best_score) {
        best_score = score;
        best = &b;
      }
    }
    best->out->push_back(s.id);
    for (int c = 0; c < kNumRelationships; ++c) {
      best->counts[static_cast<size_t>(c)] += s.exception_counts[static_cast<size_t>(c)];
    }
  }
  for (Bucket& b : buckets) std::sort(b.out->begin(), b.out->end());
  return spec;
}

}  // namespace afford
