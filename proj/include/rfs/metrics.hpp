#pragma once

#include <optional>

#include "rfs/types.hpp"

namespace rfs::metrics {

/// Clamp applied to scores before taking logarithms.
inline constexpr double kScoreEps = 1e-12;

/// Confusion rates of one group at a threshold. A rate whose denominator is
/// zero is left empty rather than reported as 0.
struct ThresholdedRates {
  std::optional<double> tpr;
  std::optional<double> fpr;
};

/// Rows with group[i] == g (or all rows when g < 0), classifying score >= t
/// as a predicted default.
ThresholdedRates rates(const ScoreVector& score, const Labels& y, const GroupVector& s, int g, double t);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Throws UndefinedMetric when y has a single class.
double roc_auc(const ScoreVector& score, const Labels& y);

struct YoudenResult {
  double threshold = 0.0;
  double j = 0.0;
};

/// Maximizes TPR - FPR over {0, 1} and the midpoints of consecutive distinct
/// scores; ties go to the smallest threshold.
YoudenResult youden(const ScoreVector& score, const Labels& y);
double youden_threshold(const ScoreVector& score, const Labels& y);

/// 0.5 * |(FPR_1 - FPR_0) + (TPR_1 - TPR_0)| at threshold t.
double sp(const ScoreVector& score, const Labels& y, const GroupVector& s, double t);

/// |E[1 + ln score | s=1, y=1] - E[1 + ln score | s=0, y=1]| with scores
/// clamped to [kScoreEps, 1 - kScoreEps].
double leo(const ScoreVector& score, const Labels& y, const GroupVector& s);

}  // namespace rfs::metrics
