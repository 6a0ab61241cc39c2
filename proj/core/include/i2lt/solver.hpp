#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "i2lt/matrix.hpp"
#include "i2lt/model.hpp"

namespace i2lt {

/// One +1/-1 labeling of the source texts and the training images. Each
/// labeling contributes its own hinge sum to the objective; binary training
/// has exactly one, zero-shot training one per seen class.
struct LabelAssignment {
  std::vector<double> text_labels;
  std::vector<double> image_labels;
};

/// Dense, solver-ready view of the training data.
struct TrainingProblem {
  DenseMatrix texts;        // n x p
  DenseMatrix images;       // m x q
  DenseMatrix pair_texts;   // l x p
  DenseMatrix pair_images;  // l x q
  std::vector<LabelAssignment> tasks;
  /// Gram matrix K(z_j, z_j') over training images; used only when intramodal.
  DenseMatrix image_kernel;
  /// Learn alpha and include f_intra. Requires exactly one task.
  bool intramodal = true;

  std::size_t text_dim() const noexcept { return texts.cols(); }
  std::size_t image_dim() const noexcept { return images.cols(); }
  std::size_t alpha_size() const noexcept { return intramodal ? images.rows() : 0; }

  /// Binary problem with labels taken from the examples (must be +1/-1).
  static TrainingProblem binary(const TrainingData& data, const KernelSpec& kernel);

  /// Throws std::invalid_argument on shape or label inconsistencies.
  void validate() const;
};

/// gamma * sum hinge(y_j f(z_j)) + lambda * sum misalign(x_k' S z_k), summed over tasks.
double smooth_value(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                    const Hyperparameters& hyper);

/// smooth_value + trace_norm(S).
double objective(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                 const Hyperparameters& hyper);

/// Chain-rule (sub)gradient of smooth_value with respect to S, p x q.
DenseMatrix grad_S(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                   const Hyperparameters& hyper);

/// (Sub)gradient of smooth_value with respect to alpha.
std::vector<double> grad_alpha(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                               const Hyperparameters& hyper);

/// Minimizer of the quadratic model around s_tau: svt(s_tau - grad / L, 1 / L).
DenseMatrix prox_step(const DenseMatrix& s_tau, const DenseMatrix& grad, double lipschitz);

/// Elementwise clamp to [0, cap].
std::vector<double> project_alpha(std::span<const double> alpha, double cap);

struct TrainState {
  DenseMatrix S;
  std::vector<double> alpha;
  std::size_t iter = 0;
  std::vector<double> objective_trace;
  double lipschitz = 1.0;
  double eps_alpha = 0.1;
};

struct TrainReport {
  bool converged = false;
  std::size_t iterations = 0;
  double final_objective = 0.0;
  std::size_t final_rank = 0;
  /// Objective at the starting point followed by one entry per iteration.
  std::vector<double> objective_trace;
};

struct TrainOptions {
  /// When set, one `iter,objective,rank,L,eps_alpha` line per iteration.
  std::ostream* log = nullptr;
  /// Resume from a previous state instead of S = 0, alpha = 0.
  const TrainState* warm_start = nullptr;
};

struct OptimizationResult {
  TrainState state;
  TrainReport report;
};

/// Alternates one backtracked proximal step on S with one backtracked
/// projected-gradient step on alpha until the relative objective decrease
/// drops below hyper.tol or hyper.max_iter iterations have run.
///
/// Throws NumericalError if the objective becomes non-finite.
OptimizationResult optimize(const TrainingProblem& problem, const Hyperparameters& hyper,
                            const TrainOptions& options = {});

}  // namespace i2lt
