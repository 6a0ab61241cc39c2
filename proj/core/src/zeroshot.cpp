#include "i2lt/zeroshot.hpp"

#include <algorithm>
#include <optional>

#include "i2lt/errors.hpp"
#include "i2lt/train.hpp"

namespace i2lt::zeroshot {

ZeroShotDataset::ZeroShotDataset(ClassSet seen, ClassSet unseen, std::vector<CorpusExample> texts,
                                 std::vector<CorpusExample> images, std::vector<CooccurrencePair> pairs)
    : seen_(std::move(seen)), unseen_(std::move(unseen)), texts_(std::move(texts)), images_(std::move(images)) {
  if (seen_.empty()) throw std::invalid_argument("zero-shot training needs at least one seen class");
  for (const auto& c : unseen_)
    if (seen_.contains(c)) throw DataError("class '" + c + "' is both seen and unseen");
  for (const auto& im : images_) {
    if (im.class_id.empty()) throw DataError("training image '" + im.id + "' has no class tag");
    if (unseen_.contains(im.class_id))
      throw DataError("training image '" + im.id + "' belongs to unseen class '" + im.class_id + "'");
    if (!seen_.contains(im.class_id))
      throw DataError("training image '" + im.id + "' has unknown class '" + im.class_id + "'");
  }
  for (const auto& t : texts_) {
    if (!seen_.contains(t.class_id) && !unseen_.contains(t.class_id))
      throw DataError("text '" + t.id + "' has unknown class '" + t.class_id + "'");
  }
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k].class_id.empty()) throw DataError("pair " + std::to_string(k) + " has no class tag");
  pairs_ = filter_pairs(pairs, unseen_);
  TrainingData probe{texts_, images_, pairs_};
  probe.validate_dims();
}

std::vector<CooccurrencePair> filter_pairs(std::span<const CooccurrencePair> pairs, const ClassSet& unseen) {
  std::vector<CooccurrencePair> out;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
               [&](const CooccurrencePair& p) { return !unseen.contains(p.class_id); });
  return out;
}

TrainingProblem make_problem(const ZeroShotDataset& ds) {
  TrainingData view{{}, ds.train_images(), ds.pairs()};
  // Unseen-class texts take no part in training.
  for (const auto& t : ds.source_texts())
    if (ds.seen_classes().contains(t.class_id)) view.texts.push_back(t);
  const std::size_t p = !view.texts.empty() ? view.texts.front().features.size()
                        : !view.pairs.empty() ? view.pairs.front().text_features.size()
                        : !ds.source_texts().empty() ? ds.source_texts().front().features.size()
                                                      : 0;
  const std::size_t q = view.image_dim();
  if (p == 0 || q == 0) throw DataError("zero-shot data must determine both text and image dimensions");

  TrainingProblem problem;
  std::vector<FeatureVector> rows;
  for (const auto& t : view.texts) rows.push_back(t.features);
  problem.texts = DenseMatrix::from_rows(rows, p);
  rows.clear();
  for (const auto& im : view.images) rows.push_back(im.features);
  problem.images = DenseMatrix::from_rows(rows, q);
  rows.clear();
  std::vector<FeatureVector> zrows;
  for (const auto& pr : view.pairs) {
    rows.push_back(pr.text_features);
    zrows.push_back(pr.image_features);
  }
  problem.pair_texts = DenseMatrix::from_rows(rows, p);
  problem.pair_images = DenseMatrix::from_rows(zrows, q);
  for (const auto& c : ds.seen_classes()) {
    LabelAssignment task;
    for (const auto& t : view.texts) task.text_labels.push_back(t.class_id == c ? 1.0 : -1.0);
    for (const auto& im : view.images) task.image_labels.push_back(im.class_id == c ? 1.0 : -1.0);
    problem.tasks.push_back(std::move(task));
  }
  problem.intramodal = false;
  return problem;
}

std::pair<TrainedModel, TrainReport> train_zeroshot(const ZeroShotDataset& ds, const Hyperparameters& hyper,
                                                    const TrainOptions& options) {
  hyper.validate();
  const ZeroShotDataset* active = &ds;
  std::optional<ZeroShotDataset> normalized;
  if (hyper.normalize) {
    TrainingData d{ds.source_texts(), ds.train_images(), ds.pairs()};
    normalize_features(d);
    normalized.emplace(ds.seen_classes(), ds.unseen_classes(), std::move(d.texts), std::move(d.images),
                       std::move(d.pairs));
    active = &*normalized;
  }
  const TrainingProblem problem = make_problem(*active);
  OptimizationResult result = optimize(problem, hyper, options);

  TrainedModel model;
  model.mode = ModelMode::zeroshot;
  model.S = TransferMatrix(std::move(result.state.S));
  model.source_texts = active->source_texts();
  model.kernel = KernelSpec{};
  model.hyper = hyper;
  model.normalized = hyper.normalize;
  model.final_objective = result.report.final_objective;
  model.unseen_classes.assign(ds.unseen_classes().begin(), ds.unseen_classes().end());
  return {std::move(model), std::move(result.report)};
}

std::vector<CorpusExample> one_vs_rest_texts(std::span<const CorpusExample> texts, const std::string& class_id) {
  std::vector<CorpusExample> out(texts.begin(), texts.end());
  for (auto& t : out) t.label = t.class_id == class_id ? 1 : -1;
  return out;
}

double score_unseen(const TransferMatrix& s, std::span<const CorpusExample> class_texts, std::span<const double> z) {
  return f_inter(s, class_texts, z);
}

double score_class(const TrainedModel& model, const std::string& class_id, std::span<const double> z) {
  const auto texts = one_vs_rest_texts(model.source_texts, class_id);
  if (!model.normalized) return score_unseen(model.S, texts, z);
  return score_unseen(model.S, texts, l2_normalized(FeatureVector(z.begin(), z.end())));
}

}  // namespace i2lt::zeroshot
