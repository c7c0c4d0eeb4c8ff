#include "rfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rfs/error.hpp"

namespace rfs::metrics {

namespace {

void check_sizes(const ScoreVector& score, const Labels& y) {
  if (score.size() != y.size()) throw DataError("scores and labels differ in length");
  if (!score.allFinite()) throw DataError("scores must be finite");
}

void check_both_classes(const Labels& y, const char* what) {
  const auto pos = (y.array() == 1).count();
  if (pos == 0 || pos == y.size()) {
    throw UndefinedMetric(std::string(what) + " is undefined when only one class is present");
  }
}

}  // namespace

ThresholdedRates rates(const ScoreVector& score, const Labels& y, const GroupVector& s, int g, double t) {
  check_sizes(score, y);
  long tp = 0, fn = 0, fp = 0, tn = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (g >= 0 && s[i] != g) continue;
    const bool pred = score[i] >= t;
    if (y[i] == 1) {
      (pred ? tp : fn) += 1;
    } else {
      (pred ? fp : tn) += 1;
    }
  }
  ThresholdedRates r;
  if (tp + fn > 0) r.tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (fp + tn > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(fp + tn);
  return r;
}

double roc_auc(const ScoreVector& score, const Labels& y) {
  check_sizes(score, y);
  check_both_classes(y, "ROC-AUC");
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

  // Twice the Mann-Whitney statistic, kept integral so the result is the
  // exact ratio of pair counts.
  long long twice_wins = 0;
  long long neg_below = 0;
  long long pos = 0, neg = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    long long p = 0, q = 0;
    while (j < n && score[order[j]] == score[order[i]]) {
      (y[order[j]] == 1 ? p : q) += 1;
      ++j;
    }
    twice_wins += p * (2 * neg_below + q);
    neg_below += q;
    pos += p;
    neg += q;
    i = j;
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

YoudenResult youden(const ScoreVector& score, const Labels& y) {
  check_sizes(score, y);
  check_both_classes(y, "Youden threshold");
  std::vector<double> v(score.data(), score.data() + score.size());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());

  std::vector<double> candidates{0.0};
  for (std::size_t k = 0; k + 1 < v.size(); ++k) candidates.push_back(0.5 * (v[k] + v[k + 1]));
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());

  const GroupVector none = GroupVector::Zero(y.size());
  YoudenResult best{candidates.front(), -2.0};
  for (double t : candidates) {
    const auto r = rates(score, y, none, -1, t);
    const double j = *r.tpr - *r.fpr;
    if (j > best.j) best = {t, j};
  }
  return best;
}

double youden_threshold(const ScoreVector& score, const Labels& y) { return youden(score, y).threshold; }

double sp(const ScoreVector& score, const Labels& y, const GroupVector& s, double t) {
  check_sizes(score, y);
  if (s.size() != y.size()) throw DataError("groups and labels differ in length");
  const auto r1 = rates(score, y, s, 1, t);
  const auto r0 = rates(score, y, s, 0, t);
  if (!r1.tpr || !r1.fpr || !r0.tpr || !r0.fpr) {
    throw UndefinedMetric("SP needs a positive and a negative in each group");
  }
  return 0.5 * std::abs((*r1.fpr - *r0.fpr) + (*r1.tpr - *r0.tpr));
}

double leo(const ScoreVector& score, const Labels& y, const GroupVector& s) {
  check_sizes(score, y);
  if (s.size() != y.size()) throw DataError("groups and labels differ in length");
  double sum[2] = {0.0, 0.0};
  long cnt[2] = {0, 0};
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    const double p = std::clamp(score[i], kScoreEps, 1.0 - kScoreEps);
    sum[s[i]] += 1.0 + std::log(p);
    cnt[s[i]] += 1;
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw UndefinedMetric("LEO needs defaulters in both groups");
  return std::abs(sum[1] / static_cast<double>(cnt[1]) - sum[0] / static_cast<double>(cnt[0]));
}

}  // namespace rfs::metrics
