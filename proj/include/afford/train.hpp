#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afford/checkpoint.hpp"
#include "afford/dataset.hpp"
#include "afford/decoder.hpp"
#include "afford/ggnn.hpp"
#include "afford/metrics.hpp"
#include "afford/scene_graph.hpp"

namespace afford {

enum class Task { relationship, explanation, consequence, multitask };
enum class Regime { independent, sa_mt, ma_mt };

std::string to_string(Task t);
Task task_from_string(const std::string& s);
std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct RunConfig {
  std::string data_dir;
  std::string out_dir = "run";
  std::string splits_path;  // defaults to <data_dir>/splits.json

  std::vector<std::string> actions = {"sit"};
  Topology topology = Topology::spatial;
  int T = 3;
  int hidden = 128;
  Task task = Task::relationship;
  Regime regime = Regime::independent;
  int epochs = 30;
  uint64_t seed = 1;

  // schedules straight from the training protocol
  double rel_lr = 1e-3;
  int rel_batch = 128;
  double dec_lr = 3e-4;
  int dec_batch = 32;
  double decay_factor = 0.85;
  int decay_after = 10;
  bool decay_once = false;
  double clip_norm = 5.0;  // decoder/multitask runs; relationship runs use none

  // input-removal ablations
  bool drop_oc = false;
  bool drop_or = false;
  bool drop_gr = false;

  // multitask loss weights (diagnostic; 1,1,1 is the unweighted sum)
  double w_rel = 1.0;
  double w_expl = 1.0;
  double w_cons = 1.0;

  bool class_weights = false;  // optional inverse-frequency loss weights
  Precision precision = Precision::f64;
  int min_word_freq = 2;
  Connectivity adjacency = Connectivity::four;
  int max_len = 20;
  int action_embed_dim = 16;  // used by MA-MT only

  void validate_and_canonicalize();  // unary forces T=0, multitask checks regime
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  std::string config_hash() const;

  AblationFlags ablation() const { return {drop_oc, drop_or, drop_gr}; }
};

struct TrainResult {
  std::string checkpoint_path;
  std::string log_path;
  int best_epoch = 0;
  double best_val_metric = 0.0;
  std::vector<std::string> log_lines;
};

TrainResult train(const RunConfig& config);

// --- evaluation ---

struct ScenePrediction {
  std::map<int, Relationship> labels;
  std::map<int, std::string> explanations;  // predicted-exception instances only
  std::map<int, std::string> consequences;
};

using Predictor = std::function<ScenePrediction(const Scene&, const std::string& action)>;

struct ActionEval {
  int samples = 0;
  double macc = 0.0;    // exceptions collapsed, 3-way
  double macc_e = 0.0;  // all seven classes
  std::vector<int64_t> confusion7;  // row-major 7x7, rows = ground truth
  // Accuracy of the positive-vs-exception decision over instances of classes
  // that carry both outcomes in this split; the unary Bayes ceiling applies
  // to exactly this number on the synthetic data.
  double decision_accuracy = 0.0;
  int decision_samples = 0;
  std::map<std::string, double> per_exception_recall;
  // caption metrics, keyed explanation.bleu4 / explanation.rouge_l /
  // explanation.cider and same for consequence
  std::map<std::string, double> caption;
  int caption_items = 0;
};

struct EvalReport {
  std::string split;
  std::string data_version;
  std::string config_hash;
  uint64_t seed = 0;
  std::map<std::string, ActionEval> per_action;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_table() const;  // aligned plain-text table
};

EvalReport evaluate_predictor(const Dataset& dataset, const std::vector<std::string>& scene_ids,
                              const std::string& split_name,
                              const std::vector<std::string>& actions, const Predictor& predictor,
                              bool with_sentences);

// A trained model (or set of models) able to produce ScenePredictions.
class ModelBundle {
 public:
  // Any of the three may be empty; sentence generation is gated on the
  // relationship model's predicted exception when one is present, otherwise
  // on the ground-truth label.
  static ModelBundle load(const std::string& relationship_ckpt, const std::string& explanation_ckpt,
                          const std::string& consequence_ckpt);

  Predictor predictor(const Dataset& dataset) const;
  const RunConfig& primary_config() const { return primary_config_; }
  std::string data_version() const;

 private:
  struct LoadedModel {
    RunConfig config;
    GgnnConfig ggnn;
    ParamStore store;
    TrunkParams trunk;
    std::map<std::string, RelHeadParams> heads;               // per action
    std::map<std::string, DecoderParams> expl_decoders;       // per action
    std::map<std::string, DecoderParams> cons_decoders;
    std::map<std::string, Vocabulary> vocabs;
    std::map<std::string, std::string> meta;
    bool has_rel_head = false;
  };
  std::optional<LoadedModel> rel_, expl_, cons_;
  RunConfig primary_config_;

  static LoadedModel load_one(const std::string& path);
  friend struct BundleAccess;
};

Predictor kb_predictor(const AffordanceKB& kb);
Predictor oracle_predictor();  // predicts the ground truth; eval plumbing check

// One full training+eval run per T, identical seed.
struct SweepRow {
  int T = 0;
  double val_macc = 0.0;
  double test_macc = 0.0;
  double test_macc_e = 0.0;
  double test_decision_accuracy = 0.0;
};
std::vector<SweepRow> sweep_T(const RunConfig& base, const std::vector<int>& ts);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
std::string sweep_to_table(const std::vector<SweepRow>& rows);

// The two canonical gradient checks (full GGNN with T=3 on a 5-node spatial
// graph; teacher-forced decoder on a 5-token sentence) at the given hidden
// size. Throws NumericError when tolerance is exceeded.
struct GradCheckSummary {
  double ggnn_max_rel_err = 0.0;
  double decoder_max_rel_err = 0.0;
  std::vector<std::string> lines;
};
GradCheckSummary run_canonical_gradchecks(int hidden, uint64_t seed, double tolerance = 1e-4);

}  // namespace afford
