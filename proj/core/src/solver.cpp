#include "i2lt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "i2lt/errors.hpp"
#include "i2lt/linalg.hpp"
#include "i2lt/losses.hpp"

namespace i2lt {

namespace {

constexpr int kMaxBacktracks = 60;
constexpr double kMinLipschitz = 1e-8;
constexpr double kMaxEpsAlpha = 1e8;

double majorization_slack(double f) { return 1e-12 * std::max(1.0, std::abs(f)); }

// Cached pieces of the smooth objective at one (S, alpha).
struct Evaluation {
  DenseMatrix tanh_scores;  // n x m, tanh(x_i' S z_j)
  std::vector<double> intra;  // m, f_intra at each training image
  std::vector<std::vector<double>> margins;  // per task, y_j f(z_j)
  std::vector<double> pair_scores;  // l, x_k' S z_k
  double hinge_sum = 0.0;
  double misalign_sum = 0.0;
  double value = 0.0;
};

bool uses_hinge(const TrainingProblem& p, const Hyperparameters& h) { return h.gamma != 0.0 && p.images.rows() > 0; }
bool uses_pairs(const TrainingProblem& p, const Hyperparameters& h) { return h.lambda != 0.0 && p.pair_texts.rows() > 0; }

// Terms that depend on S only.
void evaluate_transfer(Evaluation& ev, const DenseMatrix& s, const TrainingProblem& problem,
                       const Hyperparameters& hyper) {
  if (uses_hinge(problem, hyper)) {
    DenseMatrix sz = multiply_a_bt(s, problem.images);  // p x m
    ev.tanh_scores = multiply(problem.texts, sz);       // n x m
    for (double& v : ev.tanh_scores.entries()) v = std::tanh(v);
  } else {
    ev.tanh_scores = DenseMatrix();
  }

  ev.misalign_sum = 0.0;
  ev.pair_scores.clear();
  if (uses_pairs(problem, hyper)) {
    const DenseMatrix zs = multiply_a_bt(problem.pair_images, s);  // l x p, row k = (S z_k)'
    ev.pair_scores.resize(problem.pair_texts.rows());
    for (std::size_t k = 0; k < ev.pair_scores.size(); ++k) {
      ev.pair_scores[k] = dot(problem.pair_texts.row(k), zs.row(k));
      ev.misalign_sum += losses::misalign(ev.pair_scores[k]);
    }
  }
}

// Terms that depend on alpha (given the S-dependent cache).
void evaluate_margins(Evaluation& ev, std::span<const double> alpha, const TrainingProblem& problem,
                      const Hyperparameters& hyper) {
  ev.hinge_sum = 0.0;
  ev.margins.assign(problem.tasks.size(), {});
  const std::size_t n = problem.texts.rows();
  const std::size_t m = problem.images.rows();
  if (uses_hinge(problem, hyper)) {
    ev.intra.assign(m, 0.0);
    if (problem.intramodal) {
      const auto& y = problem.tasks.front().image_labels;
      for (std::size_t jp = 0; jp < m; ++jp) {
        const double c = y[jp] * alpha[jp];
        if (c == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) ev.intra[j] += c * problem.image_kernel(jp, j);
      }
    }
    for (std::size_t t = 0; t < problem.tasks.size(); ++t) {
      const auto& task = problem.tasks[t];
      auto& margin = ev.margins[t];
      margin.assign(m, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        double f = ev.intra[j];
        for (std::size_t i = 0; i < n; ++i) f += task.text_labels[i] * ev.tanh_scores(i, j);
        margin[j] = task.image_labels[j] * f;
        ev.hinge_sum += losses::hinge(margin[j]);
      }
    }
  }
  ev.value = hyper.gamma * ev.hinge_sum + hyper.lambda * ev.misalign_sum;
  if (!std::isfinite(ev.value)) {
    throw NumericalError("objective became non-finite (hinge sum " + std::to_string(ev.hinge_sum) +
                         ", misalignment sum " + std::to_string(ev.misalign_sum) + ")");
  }
}

Evaluation evaluate(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                    const Hyperparameters& hyper) {
  Evaluation ev;
  evaluate_transfer(ev, s, problem, hyper);
  evaluate_margins(ev, alpha, problem, hyper);
  return ev;
}

// Sum over tasks and images of hinge(m_new) - hinge(m_old) - dl(m_old) (m_new - m_old).
// Non-negative; it is the part of the change in the hinge sum that no quadratic
// model in S can bound once a margin crosses the kink at 1. The backtracking
// test discounts it, and in exchange requires the full objective not to rise.
double hinge_kink_gap(const Evaluation& from, const Evaluation& to) {
  double gap = 0.0;
  for (std::size_t t = 0; t < from.margins.size(); ++t) {
    for (std::size_t j = 0; j < from.margins[t].size(); ++j) {
      const double m0 = from.margins[t][j];
      const double m1 = to.margins[t][j];
      gap += losses::hinge(m1) - losses::hinge(m0) - losses::hinge_subgrad(m0) * (m1 - m0);
    }
  }
  return gap;
}

DenseMatrix gradient_s(const Evaluation& ev, const TrainingProblem& problem, const Hyperparameters& hyper) {
  DenseMatrix grad(problem.text_dim(), problem.image_dim());
  const std::size_t n = problem.texts.rows();
  const std::size_t m = problem.images.rows();
  if (uses_hinge(problem, hyper) && n > 0) {
    // weights(i, j) = sum_t dl(margin_tj) y_tj y_ti (1 - tanh^2)
    DenseMatrix weights(n, m);
    for (std::size_t t = 0; t < problem.tasks.size(); ++t) {
      const auto& task = problem.tasks[t];
      for (std::size_t j = 0; j < m; ++j) {
        const double c = losses::hinge_subgrad(ev.margins[t][j]) * task.image_labels[j];
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          const double th = ev.tanh_scores(i, j);
          weights(i, j) += c * task.text_labels[i] * (1.0 - th * th);
        }
      }
    }
    DenseMatrix hinge_part = multiply_at_b(problem.texts, multiply(weights, problem.images));
    hinge_part *= hyper.gamma;
    grad += hinge_part;
  }
  if (uses_pairs(problem, hyper)) {
    DenseMatrix scaled = problem.pair_images;
    for (std::size_t k = 0; k < scaled.rows(); ++k) {
      const double d = losses::misalign_deriv(ev.pair_scores[k]);
      for (double& v : scaled.row(k)) v *= d;
    }
    DenseMatrix pair_part = multiply_at_b(problem.pair_texts, scaled);
    pair_part *= hyper.lambda;
    grad += pair_part;
  }
  if (!grad.all_finite()) throw NumericalError("grad_S: non-finite entries");
  return grad;
}

std::vector<double> gradient_alpha(const Evaluation& ev, const TrainingProblem& problem, const Hyperparameters& hyper) {
  const std::size_t m = problem.alpha_size();
  std::vector<double> grad(m, 0.0);
  if (m == 0 || !uses_hinge(problem, hyper)) return grad;
  const auto& y = problem.tasks.front().image_labels;
  const auto& margin = ev.margins.front();
  for (std::size_t jp = 0; jp < m; ++jp) {
    const double c = losses::hinge_subgrad(margin[jp]) * y[jp];
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) grad[j] += hyper.gamma * c * y[j] * problem.image_kernel(j, jp);
  }
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericalError("grad_alpha: non-finite entries");
  return grad;
}

void check_alpha(std::span<const double> alpha, const TrainingProblem& problem) {
  if (alpha.size() != problem.alpha_size()) {
    throw std::invalid_argument("alpha has length " + std::to_string(alpha.size()) + ", expected " +
                                std::to_string(problem.alpha_size()));
  }
}

void check_s(const DenseMatrix& s, const TrainingProblem& problem) {
  if (s.rows() != problem.text_dim() || s.cols() != problem.image_dim()) {
    throw std::invalid_argument("S is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + ", expected " +
                                std::to_string(problem.text_dim()) + "x" + std::to_string(problem.image_dim()));
  }
}

}  // namespace

TrainingProblem TrainingProblem::binary(const TrainingData& data, const KernelSpec& kernel) {
  data.validate_dims();
  const std::size_t p = data.text_dim();
  const std::size_t q = data.image_dim();
  if (p == 0 || q == 0) throw DataError("training data must determine both text and image dimensions");

  TrainingProblem problem;
  LabelAssignment task;
  std::vector<FeatureVector> rows;
  for (const auto& t : data.texts) {
    if (t.label != 1 && t.label != -1) throw DataError("text '" + t.id + "' needs a +1/-1 label");
    rows.push_back(t.features);
    task.text_labels.push_back(t.label);
  }
  problem.texts = DenseMatrix::from_rows(rows, p);
  rows.clear();
  for (const auto& im : data.images) {
    if (im.label != 1 && im.label != -1) throw DataError("image '" + im.id + "' needs a +1/-1 label");
    rows.push_back(im.features);
    task.image_labels.push_back(im.label);
  }
  problem.images = DenseMatrix::from_rows(rows, q);
  rows.clear();
  std::vector<FeatureVector> zrows;
  for (const auto& pr : data.pairs) {
    rows.push_back(pr.text_features);
    zrows.push_back(pr.image_features);
  }
  problem.pair_texts = DenseMatrix::from_rows(rows, p);
  problem.pair_images = DenseMatrix::from_rows(zrows, q);
  problem.tasks.push_back(std::move(task));

  const std::size_t m = data.images.size();
  problem.image_kernel = DenseMatrix(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      problem.image_kernel(i, j) = kernel_eval(kernel, data.images[i].features, data.images[j].features);
  problem.intramodal = true;
  return problem;
}

void TrainingProblem::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("training problem: " + msg); };
  const std::size_t n = texts.rows();
  const std::size_t m = images.rows();
  if (text_dim() == 0 || image_dim() == 0) fail("text and image dimensions must be >= 1");
  if (pair_texts.rows() != pair_images.rows()) fail("pair text/image counts differ");
  if (pair_texts.cols() != text_dim() || pair_images.cols() != image_dim()) fail("pair dimensions differ from corpora");
  if (tasks.empty()) fail("at least one labeling is required");
  if (intramodal && tasks.size() != 1) fail("intramodal training needs exactly one labeling");
  if (intramodal && (image_kernel.rows() != m || image_kernel.cols() != m)) fail("image kernel must be m x m");
  for (const auto& t : tasks) {
    if (t.text_labels.size() != n || t.image_labels.size() != m) fail("label vector lengths differ from corpora");
    for (double y : t.text_labels)
      if (y != 1.0 && y != -1.0) fail("labels must be +1 or -1");
    for (double y : t.image_labels)
      if (y != 1.0 && y != -1.0) fail("labels must be +1 or -1");
  }
  if (!texts.all_finite() || !images.all_finite() || !pair_texts.all_finite() || !pair_images.all_finite()) {
    throw DataError("training problem: non-finite feature values");
  }
}

double smooth_value(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                    const Hyperparameters& hyper) {
  check_s(s, problem);
  check_alpha(alpha, problem);
  return evaluate(s, alpha, problem, hyper).value;
}

double objective(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                 const Hyperparameters& hyper) {
  return smooth_value(s, alpha, problem, hyper) + linalg::trace_norm(s);
}

DenseMatrix grad_S(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                   const Hyperparameters& hyper) {
  check_s(s, problem);
  check_alpha(alpha, problem);
  return gradient_s(evaluate(s, alpha, problem, hyper), problem, hyper);
}

std::vector<double> grad_alpha(const DenseMatrix& s, std::span<const double> alpha, const TrainingProblem& problem,
                               const Hyperparameters& hyper) {
  check_s(s, problem);
  check_alpha(alpha, problem);
  return gradient_alpha(evaluate(s, alpha, problem, hyper), problem, hyper);
}

DenseMatrix prox_step(const DenseMatrix& s_tau, const DenseMatrix& grad, double lipschitz) {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("prox_step: L must be positive");
  DenseMatrix g = s_tau;
  g -= (1.0 / lipschitz) * grad;
  return linalg::svt(g, 1.0 / lipschitz);
}

std::vector<double> project_alpha(std::span<const double> alpha, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("project_alpha: C must be positive");
  std::vector<double> out(alpha.begin(), alpha.end());
  for (double& a : out) a = std::clamp(a, 0.0, cap);
  return out;
}

OptimizationResult optimize(const TrainingProblem& problem, const Hyperparameters& hyper, const TrainOptions& options) {
  hyper.validate();
  problem.validate();

  TrainState state;
  if (options.warm_start != nullptr) {
    state.S = options.warm_start->S;
    state.alpha = options.warm_start->alpha;
    state.lipschitz = options.warm_start->lipschitz;
    state.eps_alpha = options.warm_start->eps_alpha;
    check_s(state.S, problem);
    check_alpha(state.alpha, problem);
    state.alpha = project_alpha(state.alpha, hyper.cap_c);
  } else {
    state.S = DenseMatrix(problem.text_dim(), problem.image_dim());
    state.alpha.assign(problem.alpha_size(), 0.0);
    state.lipschitz = hyper.lipschitz0;
    state.eps_alpha = hyper.eps_alpha0;
  }

  Evaluation ev = evaluate(state.S, state.alpha, problem, hyper);
  double s_norm = options.warm_start != nullptr ? linalg::trace_norm(state.S) : 0.0;
  std::size_t s_rank = options.warm_start != nullptr ? linalg::numerical_rank(state.S) : 0;
  double current = ev.value + s_norm;
  state.objective_trace.push_back(current);

  const bool alpha_active = problem.alpha_size() > 0 && uses_hinge(problem, hyper);
  OptimizationResult result;
  for (std::size_t it = 1; it <= hyper.max_iter; ++it) {
    // Proximal step on S with backtracking on L.
    {
      const DenseMatrix grad = gradient_s(ev, problem, hyper);
      linalg::ThresholdResult cand;
      Evaluation cand_ev;
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        DenseMatrix g = state.S;
        g -= (1.0 / state.lipschitz) * grad;
        cand = linalg::svt_detailed(g, 1.0 / state.lipschitz);
        evaluate_transfer(cand_ev, cand.value, problem, hyper);
        evaluate_margins(cand_ev, state.alpha, problem, hyper);
        const DenseMatrix step = cand.value - state.S;
        const double model = ev.value + frobenius_inner(grad, step) + 0.5 * state.lipschitz * frobenius_inner(step, step);
        const double slack = majorization_slack(ev.value);
        if (cand_ev.value <= model + slack ||
            (cand_ev.value - hyper.gamma * hinge_kink_gap(ev, cand_ev) <= model + slack &&
             cand_ev.value + cand.trace_norm <= ev.value + s_norm)) {
          accepted = true;
          break;
        }
        state.lipschitz *= hyper.eta;
      }
      if (accepted) {
        state.S = std::move(cand.value);
        s_norm = cand.trace_norm;
        s_rank = cand.rank;
        ev = std::move(cand_ev);
      }
    }

    // Projected-gradient step on alpha with backtracking on eps.
    if (alpha_active) {
      const std::vector<double> grad = gradient_alpha(ev, problem, hyper);
      std::vector<double> cand;
      Evaluation cand_ev;
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        cand.resize(state.alpha.size());
        for (std::size_t j = 0; j < cand.size(); ++j)
          cand[j] = std::clamp(state.alpha[j] - state.eps_alpha * grad[j], 0.0, hyper.cap_c);
        cand_ev = ev;
        evaluate_margins(cand_ev, cand, problem, hyper);
        double lin = 0.0;
        double sq = 0.0;
        for (std::size_t j = 0; j < cand.size(); ++j) {
          const double d = cand[j] - state.alpha[j];
          lin += grad[j] * d;
          sq += d * d;
        }
        const double model = ev.value + lin + sq / (2.0 * state.eps_alpha);
        const double slack = majorization_slack(ev.value);
        if (cand_ev.value <= model + slack ||
            (cand_ev.value - hyper.gamma * hinge_kink_gap(ev, cand_ev) <= model + slack && cand_ev.value <= ev.value)) {
          accepted = true;
          break;
        }
        state.eps_alpha /= hyper.eta;
      }
      if (accepted) {
        state.alpha = std::move(cand);
        ev = std::move(cand_ev);
      }
    }

    const double next = ev.value + s_norm;
    state.objective_trace.push_back(next);
    state.iter = it;
    if (options.log != nullptr) {
      *options.log << it << ',' << next << ',' << s_rank << ',' << state.lipschitz << ',' << state.eps_alpha << '\n';
    }
    const double rel = std::abs(current - next) / std::max(1.0, std::abs(current));
    current = next;
    // Probe a longer step next time.
    state.lipschitz = std::max(0.5 * state.lipschitz, kMinLipschitz);
    state.eps_alpha = std::min(state.eps_alpha * hyper.eta, kMaxEpsAlpha);
    if (rel < hyper.tol) {
      result.report.converged = true;
      break;
    }
  }

  result.report.iterations = state.iter;
  result.report.final_objective = current;
  result.report.final_rank = linalg::numerical_rank(state.S);
  result.report.objective_trace = state.objective_trace;
  result.state = std::move(state);
  return result;
}

}  // namespace i2lt
