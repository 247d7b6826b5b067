#include "afford/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace afford {

int64_t ConfusionMatrix::row_sum(int gt) const {
  int64_t s = 0;
  for (int j = 0; j < k; ++j) s += at(gt, j);
  return s;
}

int64_t ConfusionMatrix::total() const {
  int64_t s = 0;
  for (int64_t c : counts) s += c;
  return s;
}

namespace {

int collapse(Relationship r) {
  // positive -> 0, firmly negative -> 1, any exception -> 2
  return is_exception(r) ? 2 : static_cast<int>(r);
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<Relationship>& preds,
                                 const std::vector<Relationship>& gts, AccuracyMode mode) {
  if (preds.size() != gts.size()) {
    throw DataError("mean_accuracy: " + std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(gts.size()) + " ground-truth labels");
  }
  int k = mode == AccuracyMode::collapsed ? 3 : kNumRelationships;
  ConfusionMatrix cm(k);
  for (size_t i = 0; i < preds.size(); ++i) {
    int gt = mode == AccuracyMode::collapsed ? collapse(gts[i]) : static_cast<int>(gts[i]);
    int pr = mode == AccuracyMode::collapsed ? collapse(preds[i]) : static_cast<int>(preds[i]);
    cm.at(gt, pr) += 1;
  }
  return cm;
}

double mean_accuracy(const std::vector<Relationship>& preds,
                     const std::vector<Relationship>& gts, AccuracyMode mode) {
  if (gts.empty()) throw DataError("mean_accuracy: no samples");
  ConfusionMatrix cm = confusion_matrix(preds, gts, mode);
  double total = 0.0;
  int present = 0;
  for (int c = 0; c < cm.k; ++c) {
    int64_t row = cm.row_sum(c);
    if (row == 0) continue;  // classes absent from ground truth are excluded
    total += static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
    present += 1;
  }
  return total / present;
}

namespace {

// n-grams are joined with an unprintable separator to form map keys.
std::map<std::string, int> ngram_counts(const Tokens& tokens, int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key.push_back('\x1f');
      key += tokens[i + static_cast<size_t>(j)];
    }
    counts[key] += 1;
  }
  return counts;
}

}  // namespace

double bleu4(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    int64_t matched = 0, total = 0;
    for (const auto& [key, count] : cand) {
      total += count;
      auto it = ref.find(key);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      if (matched == 0) return 0.0;
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(p);
  }
  double c = static_cast<double>(candidate.size());
  double r = static_cast<double>(reference.size());
  double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / 4.0);
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  size_t n = candidate.size(), m = reference.size();
  std::vector<size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  double lcs = static_cast<double>(prev[m]);
  if (lcs == 0.0) return 0.0;
  double rec = lcs / static_cast<double>(m);
  double prec = lcs / static_cast<double>(n);
  const double beta = 1.2;
  return (1.0 + beta * beta) * rec * prec / (rec + beta * beta * prec);
}

CiderCorpus CiderCorpus::build(const std::vector<std::vector<Tokens>>& reference_sets) {
  CiderCorpus corpus;
  corpus.num_items_ = static_cast<int>(reference_sets.size());
  if (corpus.degenerate()) {
    std::cerr << "warning: CIDEr corpus has fewer than 2 items; idf is degenerate\n";
  }
  for (const auto& refs : reference_sets) {
    for (int n = 1; n <= 4; ++n) {
      std::map<std::string, int> seen;
      for (const auto& ref : refs) {
        for (const auto& [key, count] : ngram_counts(ref, n)) seen[key] = 1;
      }
      for (const auto& [key, one] : seen) corpus.df_[n - 1][key] += 1;
    }
  }
  return corpus;
}

double CiderCorpus::idf(int n, const std::string& key) const {
  const auto& df = df_[n - 1];
  auto it = df.find(key);
  int d = it == df.end() ? 0 : it->second;
  return std::log(static_cast<double>(std::max(1, num_items_))) -
         std::log(static_cast<double>(std::max(1, d)));
}

double cider(const Tokens& candidate, const std::vector<Tokens>& references,
             const CiderCorpus& corpus) {
  if (references.empty()) throw DataError("cider: no references");
  double item_total = 0.0;
  for (const auto& ref : references) {
    double sim_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
      auto cand_counts = ngram_counts(candidate, n);
      auto ref_counts = ngram_counts(ref, n);
      double dot = 0.0, cnorm = 0.0, rnorm = 0.0;
      for (const auto& [key, count] : cand_counts) {
        double w = count * corpus.idf(n, key);
        cnorm += w * w;
      }
      for (const auto& [key, count] : ref_counts) {
        double w = count * corpus.idf(n, key);
        rnorm += w * w;
      }
      for (const auto& [key, count] : ref_counts) {
        auto it = cand_counts.find(key);
        if (it == cand_counts.end()) continue;
        double idf = corpus.idf(n, key);
        double gc = it->second * idf;
        double gr = count * idf;
        dot += std::min(gc, gr) * gr;  // clipped, CIDEr-D style
      }
      if (cnorm > 0.0 && rnorm > 0.0) {
        sim_sum += dot / (std::sqrt(cnorm) * std::sqrt(rnorm));
      }
    }
    double delta = static_cast<double>(candidate.size()) - static_cast<double>(ref.size());
    double penalty = std::exp(-delta * delta / (2.0 * 6.0 * 6.0));
    item_total += penalty * sim_sum / 4.0;
  }
  return 10.0 * item_total / static_cast<double>(references.size());
}

double multi_reference_average(const std::function<double(const Tokens&, const Tokens&)>& metric,
                               const std::vector<CaptionEvalItem>& items) {
  if (items.empty()) throw DataError("multi_reference_average: no items");
  double total = 0.0;
  for (const auto& item : items) {
    if (item.references.empty()) throw DataError("multi_reference_average: item has no references");
    double per_item = 0.0;
    for (const auto& ref : item.references) per_item += metric(item.candidate, ref);
    total += per_item / static_cast<double>(item.references.size());
  }
  return total / static_cast<double>(items.size());
}

}  // namespace afford
