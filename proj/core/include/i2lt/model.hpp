#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "i2lt/matrix.hpp"

namespace i2lt {

/// A feature vector with its binary label (+1/-1) and/or class tag, in either modality.
struct CorpusExample {
  std::string id;
  FeatureVector features;
  int label = 0;  // 0 when unlabeled
  std::string class_id;
};

/// A text vector and an image vector known to describe the same entity.
struct CooccurrencePair {
  FeatureVector text_features;
  FeatureVector image_features;
  std::string class_id;
  std::string id;
};

/// Source texts, labeled training images and co-occurrence pairs.
struct TrainingData {
  std::vector<CorpusExample> texts;
  std::vector<CorpusExample> images;
  std::vector<CooccurrencePair> pairs;

  /// Infers (p, q) from whichever records are present; 0 when unknown.
  std::size_t text_dim() const;
  std::size_t image_dim() const;
  /// Throws DataError on dimension drift between records.
  void validate_dims() const;
};

/// The p x q matrix S that aligns text space with image space through x' S z.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  explicit TransferMatrix(DenseMatrix s);
  static TransferMatrix zeros(std::size_t text_dim, std::size_t image_dim);

  std::size_t text_dim() const noexcept { return s_.rows(); }
  std::size_t image_dim() const noexcept { return s_.cols(); }
  const DenseMatrix& matrix() const noexcept { return s_; }

  friend bool operator==(const TransferMatrix&, const TransferMatrix&) = default;

 private:
  DenseMatrix s_;
};

enum class KernelKind { gaussian, linear };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double bandwidth = 1.0;  // gaussian only

  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

struct Hyperparameters {
  double gamma = 1.0;
  double lambda = 1.0;
  double cap_c = 1.0;
  KernelKind kernel = KernelKind::gaussian;
  /// Unset selects the median-distance heuristic over the training images.
  std::optional<double> bandwidth;
  /// L2-normalize every feature vector before training and prediction.
  bool normalize = false;
  std::size_t max_iter = 500;
  double tol = 1e-6;
  /// Initial Lipschitz estimate for the S step.
  double lipschitz0 = 1.0;
  /// Backtracking multiplier, > 1.
  double eta = 2.0;
  /// Initial step for the alpha projected-gradient step.
  double eps_alpha0 = 0.1;

  void validate() const;
  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

enum class ModelMode { binary, zeroshot };

/// Everything prediction needs: S, alpha, the embedded corpora and kernel.
struct TrainedModel {
  ModelMode mode = ModelMode::binary;
  TransferMatrix S;
  std::vector<double> alpha;
  std::vector<CorpusExample> source_texts;
  std::vector<CorpusExample> train_images;
  KernelSpec kernel;
  Hyperparameters hyper;
  /// Whether the embedded corpora were L2-normalized; queries get the same treatment.
  bool normalized = false;
  double final_objective = 0.0;
  /// Zero-shot mode: the classes that prediction scores.
  std::vector<std::string> unseen_classes;

  std::size_t text_dim() const noexcept { return S.text_dim(); }
  std::size_t image_dim() const noexcept { return S.image_dim(); }
  /// Throws DataError if alpha, corpora or dimensions are inconsistent.
  void validate() const;
};

/// tanh(x' S z)
double transfer_score(std::span<const double> x, const TransferMatrix& s, std::span<const double> z);

/// Sum over source texts of y_i tanh(x_i' S z).
double f_inter(const TransferMatrix& s, std::span<const CorpusExample> source_texts, std::span<const double> z);

double kernel_eval(const KernelSpec& kernel, std::span<const double> z1, std::span<const double> z2);

/// Median pairwise Euclidean distance; at most 10,000 pairs, subsampled with a
/// fixed seed when there are more. Throws DataError when every distance is zero.
double median_bandwidth(std::span<const FeatureVector> images);

/// Sum over training images of y_j alpha_j K(z_j, z).
double f_intra(const TrainedModel& model, std::span<const double> z);

/// f_inter + f_intra for a binary model.
double discriminant(const TrainedModel& model, std::span<const double> z);

/// sign(f) with f = 0 mapped to -1.
inline int predict_label(double f) noexcept { return f > 0.0 ? 1 : -1; }

/// Returns x / ||x||, or x unchanged when it is the zero vector.
FeatureVector l2_normalized(FeatureVector x);

}  // namespace i2lt
