#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "i2lt/model.hpp"
#include "i2lt/solver.hpp"

namespace i2lt {

/// Resolves the kernel for training: explicit bandwidth if given, otherwise the
/// median heuristic over the training images (falling back to the pair images
/// when there are fewer than two training images, and to 1.0 when neither set
/// has two points).
KernelSpec resolve_kernel(const Hyperparameters& hyper, const TrainingData& data);

/// L2-normalizes every feature vector in place.
void normalize_features(TrainingData& data);

/// Trains a binary model. Texts and images must carry +1/-1 labels.
std::pair<TrainedModel, TrainReport> train(const TrainingData& data, const Hyperparameters& hyper,
                                           const TrainOptions& options = {});

/// Relabels texts and images +1 when their class tag equals `positive_class`
/// and -1 otherwise.
TrainingData binarize(const TrainingData& data, const std::string& positive_class);

struct ClassModel {
  std::string class_id;
  TrainedModel model;
  TrainReport report;
};

/// One independent binary model per class tag found among the training images.
std::vector<ClassModel> train_one_vs_rest(const TrainingData& data, const Hyperparameters& hyper);

/// Discriminant for a raw query image, applying the model's preprocessing.
double score_image(const TrainedModel& model, std::span<const double> z);

}  // namespace i2lt
