#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "afford/relationship.hpp"

namespace afford {

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
  int k = 0;
  std::vector<int64_t> counts;

  explicit ConfusionMatrix(int classes) : k(classes), counts(static_cast<size_t>(classes) * classes, 0) {}
  int64_t& at(int gt, int pred) { return counts[static_cast<size_t>(gt) * k + pred]; }
  int64_t at(int gt, int pred) const { return counts[static_cast<size_t>(gt) * k + pred]; }
  int64_t row_sum(int gt) const;
  int64_t total() const;
};

enum class AccuracyMode {
  collapsed,  // mAcc: the five exceptions merge into one class, 3-way
  full,       // mAcc-E: all seven classes distinct
};

// Mean per-class recall over the classes present in the ground truth.
double mean_accuracy(const std::vector<Relationship>& preds,
                     const std::vector<Relationship>& gts, AccuracyMode mode);

ConfusionMatrix confusion_matrix(const std::vector<Relationship>& preds,
                                 const std::vector<Relationship>& gts, AccuracyMode mode);

// --- caption metrics over whitespace-tokenized sentences ---

using Tokens = std::vector<std::string>;

// Geometric mean of modified n-gram precisions (n = 1..4) with brevity
// penalty. Precisions for n >= 2 carry add-1 smoothing; an empty candidate
// or zero unigram overlap scores 0.
double bleu4(const Tokens& candidate, const Tokens& reference);

// LCS F-measure with beta = 1.2.
double rouge_l(const Tokens& candidate, const Tokens& reference);

// Corpus document frequencies for CIDEr: df is the number of items whose
// reference set contains the n-gram; idf = log(N) - log(max(1, df)).
class CiderCorpus {
 public:
  static CiderCorpus build(const std::vector<std::vector<Tokens>>& reference_sets);
  int num_items() const { return num_items_; }
  bool degenerate() const { return num_items_ < 2; }
  double idf(int n, const std::string& key) const;

 private:
  int num_items_ = 0;
  std::map<std::string, int> df_[4];
};

// CIDEr-D style: per reference, Gaussian length penalty (sigma = 6) times the
// mean over n = 1..4 of the clipped TF-IDF cosine similarity; averaged over
// references and scaled by 10.
double cider(const Tokens& candidate, const std::vector<Tokens>& references,
             const CiderCorpus& corpus);

struct CaptionEvalItem {
  Tokens candidate;
  std::vector<Tokens> references;  // 1..3
};

// metric evaluated once per reference, averaged per item, then over items.
double multi_reference_average(const std::function<double(const Tokens&, const Tokens&)>& metric,
                               const std::vector<CaptionEvalItem>& items);

}  // namespace afford
