// Shared fixtures and independent reference computations for the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "i2lt/matrix.hpp"
#include "i2lt/model.hpp"
#include "i2lt/solver.hpp"

namespace i2lt::test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  int sign() { return index(0, 1) == 0 ? -1 : 1; }

  FeatureVector vec(std::size_t n, double scale = 1.0) {
    FeatureVector v(n);
    for (auto& x : v) x = scale * normal();
    return v;
  }
  DenseMatrix mat(std::size_t r, std::size_t c, double scale = 1.0) {
    DenseMatrix m(r, c);
    for (auto& x : m.entries()) x = scale * normal();
    return m;
  }
  /// Random matrix of the given rank (at most min(r, c)).
  DenseMatrix low_rank(std::size_t r, std::size_t c, std::size_t rank) {
    DenseMatrix out(r, c);
    for (std::size_t k = 0; k < rank; ++k) out += multiply_a_bt(mat(r, 1), mat(c, 1));
    return out;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Small random binary problem with explicit labels and a Gaussian Gram matrix.
inline TrainingProblem random_problem(Gen& g, std::size_t p, std::size_t q, std::size_t n, std::size_t m,
                                      std::size_t l, double bandwidth = 1.5) {
  TrainingProblem pr;
  pr.texts = g.mat(n, p);
  pr.images = g.mat(m, q);
  pr.pair_texts = g.mat(l, p);
  pr.pair_images = g.mat(l, q);
  LabelAssignment task;
  for (std::size_t i = 0; i < n; ++i) task.text_labels.push_back(g.sign());
  for (std::size_t j = 0; j < m; ++j) task.image_labels.push_back(g.sign());
  pr.tasks.push_back(task);
  pr.image_kernel = DenseMatrix(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < q; ++k) d2 += std::pow(pr.images(a, k) - pr.images(b, k), 2);
      pr.image_kernel(a, b) = std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    }
  pr.intramodal = true;
  return pr;
}

/// Discriminant on training image j for task t, written directly from the model definition.
inline double ref_f(const DenseMatrix& s, const std::vector<double>& alpha, const TrainingProblem& pr, std::size_t t,
                    std::size_t j) {
  const auto& task = pr.tasks[t];
  double f = 0.0;
  for (std::size_t i = 0; i < pr.texts.rows(); ++i) {
    double a = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r)
      for (std::size_t c = 0; c < s.cols(); ++c) a += pr.texts(i, r) * s(r, c) * pr.images(j, c);
    f += task.text_labels[i] * std::tanh(a);
  }
  if (pr.intramodal)
    for (std::size_t k = 0; k < alpha.size(); ++k) f += task.image_labels[k] * alpha[k] * pr.image_kernel(k, j);
  return f;
}

inline double ref_smooth(const DenseMatrix& s, const std::vector<double>& alpha, const TrainingProblem& pr,
                         double gamma, double lambda) {
  double total = 0.0;
  for (std::size_t t = 0; t < pr.tasks.size(); ++t)
    for (std::size_t j = 0; j < pr.images.rows(); ++j)
      total += gamma * std::max(0.0, 1.0 - pr.tasks[t].image_labels[j] * ref_f(s, alpha, pr, t, j));
  for (std::size_t k = 0; k < pr.pair_texts.rows(); ++k) {
    double a = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r)
      for (std::size_t c = 0; c < s.cols(); ++c) a += pr.pair_texts(k, r) * s(r, c) * pr.pair_images(k, c);
    total += lambda * std::log1p(std::exp(-2.0 * a));
  }
  return total;
}

/// Smallest |y f - 1| over all hinge terms; the smooth part is differentiable when this is positive.
inline double kink_distance(const DenseMatrix& s, const std::vector<double>& alpha, const TrainingProblem& pr) {
  double d = INFINITY;
  for (std::size_t t = 0; t < pr.tasks.size(); ++t)
    for (std::size_t j = 0; j < pr.images.rows(); ++j)
      d = std::min(d, std::abs(pr.tasks[t].image_labels[j] * ref_f(s, alpha, pr, t, j) - 1.0));
  return d;
}

inline double central_difference(const std::function<double(double)>& fn, double x, double h) {
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

/// Reference singular values: square roots of the eigenvalues of M'M via cyclic Jacobi rotations.
inline std::vector<double> ref_singular_values(const DenseMatrix& m) {
  DenseMatrix a = multiply_at_b(m, m);
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> sv;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) sv.push_back(0.0);
  std::vector<double> eig;
  for (std::size_t i = 0; i < n; ++i) eig.push_back(std::sqrt(std::max(0.0, a(i, i))));
  std::sort(eig.rbegin(), eig.rend());
  for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = eig[i];
  return sv;
}

inline double ref_trace_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : ref_singular_values(m)) s += v;
  return s;
}

/// Average precision by direct counting: item j is ranked at or above i when it scores higher,
/// or scores the same and comes no later in the input.
inline double ref_average_precision(const std::vector<double>& scores, const std::vector<int>& truth) {
  double sum = 0.0;
  int positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] != 1) continue;
    ++positives;
    int above = 0, pos_above = 0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j <= i)) {
        ++above;
        if (truth[j] == 1) ++pos_above;
      }
    }
    sum += static_cast<double>(pos_above) / above;
  }
  return sum / positives;
}

/// AUC by enumerating every positive/negative pair.
inline double ref_auc(const std::vector<double>& scores, const std::vector<int>& truth) {
  double wins = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (truth[i] == 1 && truth[j] == -1) {
        ++pairs;
        wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("i2lt_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace i2lt::test
