#include "i2lt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace i2lt::eval {

namespace {

void check_pair(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double error_rate(std::span<const int> predictions, std::span<const int> truth) {
  check_pair(predictions.size(), truth.size(), "error_rate");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predictions[i] != truth[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double average_precision(std::span<const double> scores, std::span<const int> truth) {
  check_pair(scores.size(), truth.size(), "average_precision");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double total = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (truth[order[rank]] == 1) {
      ++hits;
      total += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average_precision: undefined without positives");
  return total / static_cast<double>(hits);
}

double auc(std::span<const double> scores, std::span<const int> truth) {
  check_pair(scores.size(), truth.size(), "auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of (1-based, tie-averaged) ranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double avg_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (truth[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("auc: needs both positives and negatives");
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double mean_ap(std::span<const double> per_class_aps) {
  if (per_class_aps.empty()) throw std::invalid_argument("mean_ap: empty input");
  return std::accumulate(per_class_aps.begin(), per_class_aps.end(), 0.0) / static_cast<double>(per_class_aps.size());
}

ClassReport evaluate_class(std::string class_id, std::span<const double> scores, std::span<const int> predictions,
                           std::span<const int> truth) {
  ClassReport r;
  r.class_id = std::move(class_id);
  r.count = truth.size();
  r.error_rate = error_rate(predictions, truth);
  const auto pos = std::count(truth.begin(), truth.end(), 1);
  const auto neg = static_cast<std::ptrdiff_t>(truth.size()) - pos;
  r.ap = pos > 0 ? average_precision(scores, truth) : std::numeric_limits<double>::quiet_NaN();
  r.auc = pos > 0 && neg > 0 ? auc(scores, truth) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

EvalReport summarize(std::vector<ClassReport> per_class) {
  if (per_class.empty()) throw std::invalid_argument("summarize: no classes");
  EvalReport out;
  std::vector<double> errors;
  std::vector<double> aps;
  std::vector<double> aucs;
  for (const auto& c : per_class) {
    errors.push_back(c.error_rate);
    if (!std::isnan(c.ap)) aps.push_back(c.ap);
    if (!std::isnan(c.auc)) aucs.push_back(c.auc);
  }
  out.error_rate = mean_ap(errors);
  out.ap = aps.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_ap(aps);
  out.auc = aucs.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_ap(aucs);
  out.per_class = std::move(per_class);
  return out;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "error_rate=" << fmt(error_rate) << '\n';
  os << "ap=" << fmt(ap) << '\n';
  os << "auc=" << fmt(auc) << '\n';
  os << "classes=" << per_class.size() << '\n';
  for (const auto& c : per_class) {
    const std::string key = "class." + c.class_id + ".";
    os << key << "count=" << c.count << '\n';
    os << key << "error_rate=" << fmt(c.error_rate) << '\n';
    os << key << "ap=" << fmt(c.ap) << '\n';
    os << key << "auc=" << fmt(c.auc) << '\n';
  }
  return os.str();
}

}  // namespace i2lt::eval
