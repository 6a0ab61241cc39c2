#pragma once

#include <span>
#include <string>
#include <vector>

namespace i2lt::eval {

/// Fraction of positions where prediction and truth (+1/-1) disagree.
double error_rate(std::span<const int> predictions, std::span<const int> truth);

/// Mean, over positives in descending-score order, of the precision at each
/// positive's rank. Ties keep input order. Needs at least one positive.
double average_precision(std::span<const double> scores, std::span<const int> truth);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Needs both classes present.
double auc(std::span<const double> scores, std::span<const int> truth);

double mean_ap(std::span<const double> per_class_aps);

struct ClassReport {
  std::string class_id;
  std::size_t count = 0;
  double error_rate = 0.0;
  /// Unset (NaN) when the class has no positives, or for AUC no negatives.
  double ap = 0.0;
  double auc = 0.0;
};

/// Aggregate over classes: mean error rate, MAP and mean AUC over the classes
/// where each is defined.
struct EvalReport {
  double error_rate = 0.0;
  double ap = 0.0;
  double auc = 0.0;
  std::vector<ClassReport> per_class;

  /// Flat key=value lines.
  std::string to_text() const;
};

/// Builds one ClassReport from scores, thresholded labels and truth.
ClassReport evaluate_class(std::string class_id, std::span<const double> scores, std::span<const int> predictions,
                           std::span<const int> truth);

/// Averages per-class reports. Throws std::invalid_argument when empty.
EvalReport summarize(std::vector<ClassReport> per_class);

}  // namespace i2lt::eval
