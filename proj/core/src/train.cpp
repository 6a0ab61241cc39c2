#include "i2lt/train.hpp"

#include <set>

#include "i2lt/errors.hpp"

namespace i2lt {

KernelSpec resolve_kernel(const Hyperparameters& hyper, const TrainingData& data) {
  if (hyper.kernel == KernelKind::linear) return {KernelKind::linear, 1.0};
  if (hyper.bandwidth) return {KernelKind::gaussian, *hyper.bandwidth};
  std::vector<FeatureVector> points;
  for (const auto& im : data.images) points.push_back(im.features);
  if (points.size() < 2) {
    points.clear();
    for (const auto& pr : data.pairs) points.push_back(pr.image_features);
  }
  if (points.size() < 2) return {KernelKind::gaussian, 1.0};
  return {KernelKind::gaussian, median_bandwidth(points)};
}

void normalize_features(TrainingData& data) {
  for (auto& t : data.texts) t.features = l2_normalized(std::move(t.features));
  for (auto& im : data.images) im.features = l2_normalized(std::move(im.features));
  for (auto& pr : data.pairs) {
    pr.text_features = l2_normalized(std::move(pr.text_features));
    pr.image_features = l2_normalized(std::move(pr.image_features));
  }
}

std::pair<TrainedModel, TrainReport> train(const TrainingData& data, const Hyperparameters& hyper,
                                           const TrainOptions& options) {
  hyper.validate();
  TrainingData prepared = data;
  if (hyper.normalize) normalize_features(prepared);
  const KernelSpec kernel = resolve_kernel(hyper, prepared);
  kernel.validate();

  const TrainingProblem problem = TrainingProblem::binary(prepared, kernel);
  OptimizationResult result = optimize(problem, hyper, options);

  TrainedModel model;
  model.mode = ModelMode::binary;
  model.S = TransferMatrix(std::move(result.state.S));
  model.alpha = std::move(result.state.alpha);
  model.source_texts = std::move(prepared.texts);
  model.train_images = std::move(prepared.images);
  model.kernel = kernel;
  model.hyper = hyper;
  model.normalized = hyper.normalize;
  model.final_objective = result.report.final_objective;
  return {std::move(model), std::move(result.report)};
}

TrainingData binarize(const TrainingData& data, const std::string& positive_class) {
  TrainingData out = data;
  for (auto& t : out.texts) {
    if (t.class_id.empty()) throw DataError("text '" + t.id + "' has no class tag");
    t.label = t.class_id == positive_class ? 1 : -1;
  }
  for (auto& im : out.images) {
    if (im.class_id.empty()) throw DataError("image '" + im.id + "' has no class tag");
    im.label = im.class_id == positive_class ? 1 : -1;
  }
  return out;
}

std::vector<ClassModel> train_one_vs_rest(const TrainingData& data, const Hyperparameters& hyper) {
  std::set<std::string> classes;
  for (const auto& im : data.images) classes.insert(im.class_id);
  std::vector<ClassModel> out;
  for (const auto& c : classes) {
    auto [model, report] = train(binarize(data, c), hyper);
    out.push_back({c, std::move(model), std::move(report)});
  }
  return out;
}

double score_image(const TrainedModel& model, std::span<const double> z) {
  if (!model.normalized) return discriminant(model, z);
  const FeatureVector zn = l2_normalized(FeatureVector(z.begin(), z.end()));
  return discriminant(model, zn);
}

}  // namespace i2lt
