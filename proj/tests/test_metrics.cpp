#include <doctest.h>

#include <cmath>
#include <map>

#include "afford/metrics.hpp"
#include "afford/rng.hpp"
#include "afford/vocab.hpp"

using namespace afford;

// ---------------------------------------------------------------------------
// Brute-force oracles, written from the metric definitions and kept separate
// from the library implementations.
// ---------------------------------------------------------------------------
namespace oracle {

std::vector<std::vector<std::string>> grams(const Tokens& t, int n) {
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i + n <= static_cast<int>(t.size()); ++i) {
    out.push_back(std::vector<std::string>(t.begin() + i, t.begin() + i + n));
  }
  return out;
}

int count_gram(const std::vector<std::vector<std::string>>& haystack,
               const std::vector<std::string>& needle) {
  int c = 0;
  for (const auto& g : haystack) {
    if (g == needle) ++c;
  }
  return c;
}

double bleu(const Tokens& cand, const Tokens& ref) {
  if (cand.empty()) return 0.0;
  double logsum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    auto cg = grams(cand, n);
    auto rg = grams(ref, n);
    // clipped matches: each candidate n-gram type matches at most its
    // reference count
    std::map<std::string, bool> seen;
    double matched = 0;
    for (const auto& g : cg) {
      std::string key;
      for (const auto& w : g) key += w + "|";
      if (seen[key]) continue;
      seen[key] = true;
      matched += std::min(count_gram(cg, g), count_gram(rg, g));
    }
    double total = static_cast<double>(cg.size());
    double p = n == 1 ? (total > 0 ? matched / total : 0.0) : (matched + 1.0) / (total + 1.0);
    if (p == 0.0) return 0.0;
    logsum += std::log(p) / 4.0;
  }
  double bp = cand.size() >= ref.size()
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
  return bp * std::exp(logsum);
}

int lcs_rec(const Tokens& a, const Tokens& b, size_t i, size_t j,
            std::map<std::pair<size_t, size_t>, int>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  auto key = std::make_pair(i, j);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  int best;
  if (a[i] == b[j]) {
    best = 1 + lcs_rec(a, b, i + 1, j + 1, memo);
  } else {
    best = std::max(lcs_rec(a, b, i + 1, j, memo), lcs_rec(a, b, i, j + 1, memo));
  }
  memo[key] = best;
  return best;
}

double rouge(const Tokens& cand, const Tokens& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  std::map<std::pair<size_t, size_t>, int> memo;
  double lcs = lcs_rec(cand, ref, 0, 0, memo);
  if (lcs == 0.0) return 0.0;
  double r = lcs / ref.size();
  double p = lcs / cand.size();
  double b2 = 1.2 * 1.2;
  return (1 + b2) * r * p / (r + b2 * p);
}

double cider_one(const Tokens& cand, const std::vector<Tokens>& refs,
                 const std::vector<std::vector<Tokens>>& corpus) {
  double total = 0.0;
  for (const auto& ref : refs) {
    double sim = 0.0;
    for (int n = 1; n <= 4; ++n) {
      auto cg = grams(cand, n);
      auto rg = grams(ref, n);
      // idf over the corpus of reference sets
      auto idf = [&](const std::vector<std::string>& g) {
        int df = 0;
        for (const auto& item : corpus) {
          bool found = false;
          for (const auto& r : item) {
            if (count_gram(grams(r, n), g) > 0) found = true;
          }
          if (found) ++df;
        }
        return std::log(static_cast<double>(std::max<size_t>(1, corpus.size()))) -
               std::log(static_cast<double>(std::max(1, df)));
      };
      std::map<std::string, std::pair<double, std::vector<std::string>>> cand_vec, ref_vec;
      for (const auto& g : cg) {
        std::string key;
        for (const auto& w : g) key += w + "|";
        cand_vec[key] = {count_gram(cg, g) * idf(g), g};
      }
      for (const auto& g : rg) {
        std::string key;
        for (const auto& w : g) key += w + "|";
        ref_vec[key] = {count_gram(rg, g) * idf(g), g};
      }
      double dot = 0, cn = 0, rn = 0;
      for (const auto& [k, v] : cand_vec) cn += v.first * v.first;
      for (const auto& [k, v] : ref_vec) rn += v.first * v.first;
      for (const auto& [k, v] : ref_vec) {
        auto it = cand_vec.find(k);
        if (it != cand_vec.end()) dot += std::min(it->second.first, v.first) * v.first;
      }
      if (cn > 0 && rn > 0) sim += dot / (std::sqrt(cn) * std::sqrt(rn));
    }
    double delta = static_cast<double>(cand.size()) - static_cast<double>(ref.size());
    total += std::exp(-delta * delta / 72.0) * sim / 4.0;
  }
  return 10.0 * total / refs.size();
}

double macc(const std::vector<Relationship>& preds, const std::vector<Relationship>& gts,
            bool collapsed) {
  auto fold = [&](Relationship r) {
    int v = static_cast<int>(r);
    return collapsed ? (v >= 2 ? 2 : v) : v;
  };
  std::map<int, std::pair<int, int>> per_class;  // class -> (correct, total)
  for (size_t i = 0; i < gts.size(); ++i) {
    auto& [correct, total] = per_class[fold(gts[i])];
    total += 1;
    if (fold(preds[i]) == fold(gts[i])) correct += 1;
  }
  double sum = 0;
  for (const auto& [cls, ct] : per_class) sum += static_cast<double>(ct.first) / ct.second;
  return sum / per_class.size();
}

}  // namespace oracle

namespace {

Tokens tok(const std::string& s) { return tokenize(s); }

// Ten fixture pairs exercising repeats, partial overlap, and length effects.
const std::vector<std::pair<std::string, std::string>>& fixture_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"the cat sat on the mat", "the cat is on the mat"},
      {"a person is blocking the chair", "the chair is occupied by a person"},
      {"the chair is occupied by a person right now",
       "the chair is occupied by a person right now"},
      {"you could get badly burned there", "running there could burn you"},
      {"the the the the", "the cat the cat"},
      {"one two three four five six", "one two three four"},
      {"fire fire everywhere", "water water everywhere"},
      {"taking it would count as theft", "taking it would count as theft and more"},
      {"a", "a"},
      {"completely different words here", "nothing shared at all"},
      {"the floor runs right next to a fire", "a fire is burning close to the floor"},
  };
  return pairs;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mean accuracy trivial and hand-computed cases") {
  using R = Relationship;
  std::vector<R> gts = {R::kPositive, R::kFirmlyNegative, R::kPhysicalObstacle};
  CHECK(mean_accuracy(gts, gts, AccuracyMode::collapsed) == 1.0);
  CHECK(mean_accuracy(gts, gts, AccuracyMode::full) == 1.0);

  // gts = {Positive x2, PhysicalObstacle x2}, preds all Positive:
  // per-class recall (1.0 + 0.0) / 2 over the two present classes.
  std::vector<R> gts2 = {R::kPositive, R::kPositive, R::kPhysicalObstacle, R::kPhysicalObstacle};
  std::vector<R> preds2(4, R::kPositive);
  CHECK(mean_accuracy(preds2, gts2, AccuracyMode::collapsed) == doctest::Approx(0.5));

  // one exception mistaken for another is correct when collapsed only
  std::vector<R> gts3 = {R::kPhysicalObstacle};
  std::vector<R> preds3 = {R::kSociallyAwkward};
  CHECK(mean_accuracy(preds3, gts3, AccuracyMode::collapsed) == 1.0);
  CHECK(mean_accuracy(preds3, gts3, AccuracyMode::full) == 0.0);

  CHECK_THROWS_AS(mean_accuracy({}, {}, AccuracyMode::full), DataError);
}

TEST_CASE("mean accuracy matches the recount oracle on random label sets") {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Relationship> gts, preds;
    int n = rng.uniform_int(3, 40);
    for (int i = 0; i < n; ++i) {
      gts.push_back(static_cast<Relationship>(rng.uniform_int(0, 6)));
      preds.push_back(static_cast<Relationship>(rng.uniform_int(0, 6)));
    }
    CHECK(mean_accuracy(preds, gts, AccuracyMode::full) ==
          doctest::Approx(oracle::macc(preds, gts, false)).epsilon(1e-12));
    CHECK(mean_accuracy(preds, gts, AccuracyMode::collapsed) ==
          doctest::Approx(oracle::macc(preds, gts, true)).epsilon(1e-12));
  }
}

TEST_CASE("collapsing never decreases the merged exception recall") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Relationship> gts, preds;
    for (int i = 0; i < 30; ++i) {
      gts.push_back(static_cast<Relationship>(rng.uniform_int(2, 6)));
      preds.push_back(static_cast<Relationship>(rng.uniform_int(0, 6)));
    }
    ConfusionMatrix full = confusion_matrix(preds, gts, AccuracyMode::full);
    double merged_correct = 0, merged_total = 0, split_correct = 0;
    for (int c = 2; c < 7; ++c) {
      merged_total += static_cast<double>(full.row_sum(c));
      split_correct += static_cast<double>(full.at(c, c));
      for (int p = 2; p < 7; ++p) merged_correct += static_cast<double>(full.at(c, p));
    }
    CHECK(merged_correct / merged_total >= split_correct / merged_total);
  }
}

TEST_CASE("confusion matrix row sums equal per-class ground-truth counts") {
  using R = Relationship;
  std::vector<R> gts = {R::kPositive, R::kPositive, R::kDangerous, R::kFirmlyNegative};
  std::vector<R> preds = {R::kDangerous, R::kPositive, R::kPositive, R::kFirmlyNegative};
  ConfusionMatrix cm = confusion_matrix(preds, gts, AccuracyMode::full);
  CHECK(cm.row_sum(0) == 2);
  CHECK(cm.row_sum(1) == 1);
  CHECK(cm.row_sum(6) == 1);
  CHECK(cm.total() == 4);
}

TEST_CASE("bleu4 endpoints") {
  Tokens same = tok("the chair is occupied right now");
  CHECK(bleu4(same, same) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleu4({}, same) == 0.0);
  CHECK(bleu4(tok("completely unrelated words"), tok("nothing matches here at all")) == 0.0);
}

TEST_CASE("caption metrics match the brute-force oracles on the fixture suite") {
  std::vector<std::vector<Tokens>> corpus;
  for (const auto& [c, r] : fixture_pairs()) corpus.push_back({tok(r)});
  CiderCorpus cc = CiderCorpus::build(corpus);

  for (const auto& [c, r] : fixture_pairs()) {
    Tokens cand = tok(c), ref = tok(r);
    CAPTURE(c);
    CHECK(std::fabs(bleu4(cand, ref) - oracle::bleu(cand, ref)) <= 1e-9);
    CHECK(std::fabs(rouge_l(cand, ref) - oracle::rouge(cand, ref)) <= 1e-9);
    CHECK(std::fabs(cider(cand, {ref}, cc) - oracle::cider_one(cand, {ref}, corpus)) <= 1e-9);
  }
}

TEST_CASE("rouge endpoints") {
  Tokens a = tok("the bench is soaked");
  CHECK(rouge_l(a, a) == doctest::Approx(1.0));
  CHECK(rouge_l(a, tok("fire burns everything down")) == 0.0);
}

TEST_CASE("cider behavior on a two-item corpus") {
  Tokens r1 = tok("the chair is occupied by a person");
  Tokens r2 = tok("running near the fire is dangerous");
  CiderCorpus cc = CiderCorpus::build({{r1}, {r2}});

  // identical candidate scores the corpus maximum for that item
  double self_score = cider(r1, {r1}, cc);
  CHECK(self_score > 0.0);
  double other = cider(r2, {r1}, cc);
  CHECK(self_score > other);
  CHECK(cider(tok("zero overlap sentence entirely"), {r1}, cc) == 0.0);

  // a candidate can never beat the reference itself under the clipped dot
  double partial = cider(tok("the chair is occupied"), {r1}, cc);
  CHECK(partial < self_score);
}

TEST_CASE("cider warns but stays finite on a degenerate corpus") {
  Tokens r = tok("only one item");
  CiderCorpus cc = CiderCorpus::build({{r}});
  CHECK(cc.degenerate());
  double v = cider(r, {r}, cc);
  CHECK(std::isfinite(v));
  CHECK(v >= 0.0);
}

TEST_CASE("multi-reference averaging decomposes as the hand computation") {
  Tokens c = tok("the chair is occupied by a person");
  Tokens r1 = c;
  Tokens r2 = tok("a person is sitting on the chair");

  std::vector<CaptionEvalItem> one = {{c, {r2}}};
  CHECK(multi_reference_average(bleu4, one) == doctest::Approx(bleu4(c, r2)));

  std::vector<CaptionEvalItem> two = {{c, {r1, r2}}};
  CHECK(multi_reference_average(bleu4, two) ==
        doctest::Approx(0.5 * (1.0 + bleu4(c, r2))));

  std::vector<CaptionEvalItem> triple = {{c, {r2, r2, r2}}};
  CHECK(multi_reference_average(bleu4, triple) == doctest::Approx(bleu4(c, r2)));

  // order of references is irrelevant
  std::vector<CaptionEvalItem> swapped = {{c, {r2, r1}}};
  CHECK(multi_reference_average(bleu4, two) ==
        doctest::Approx(multi_reference_average(bleu4, swapped)));
}

}  // TEST_SUITE
