#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "i2lt/model.hpp"
#include "i2lt/solver.hpp"

namespace i2lt::zeroshot {

using ClassSet = std::set<std::string>;

/// Training data for zero-shot label transfer. Construction enforces that no
/// training image and no retained pair belongs to an unseen class.
class ZeroShotDataset {
 public:
  /// Throws DataError if the class sets overlap, `seen` is empty, an image is
  /// untagged or tagged with a class outside `seen` (in particular an unseen
  /// one), a pair is untagged, or a text is tagged with an unknown class.
  /// Pairs of unseen classes are dropped.
  ZeroShotDataset(ClassSet seen, ClassSet unseen, std::vector<CorpusExample> texts,
                  std::vector<CorpusExample> images, std::vector<CooccurrencePair> pairs);

  const ClassSet& seen_classes() const noexcept { return seen_; }
  const ClassSet& unseen_classes() const noexcept { return unseen_; }
  const std::vector<CorpusExample>& source_texts() const noexcept { return texts_; }
  const std::vector<CorpusExample>& train_images() const noexcept { return images_; }
  const std::vector<CooccurrencePair>& pairs() const noexcept { return pairs_; }

 private:
  ClassSet seen_;
  ClassSet unseen_;
  std::vector<CorpusExample> texts_;
  std::vector<CorpusExample> images_;
  std::vector<CooccurrencePair> pairs_;
};

/// Pairs whose tag is not in `unseen`, in their original order.
std::vector<CooccurrencePair> filter_pairs(std::span<const CooccurrencePair> pairs, const ClassSet& unseen);

/// Solver problem with one one-vs-rest labeling per seen class over the
/// seen-class texts and images, the seen-class pairs, and no alpha.
TrainingProblem make_problem(const ZeroShotDataset& ds);

/// Trains the class-independent transfer matrix. The returned model embeds
/// every source text (seen and unseen) for scoring; alpha is empty.
std::pair<TrainedModel, TrainReport> train_zeroshot(const ZeroShotDataset& ds, const Hyperparameters& hyper,
                                                    const TrainOptions& options = {});

/// Copies of `texts` labeled +1 for `class_id` and -1 otherwise.
std::vector<CorpusExample> one_vs_rest_texts(std::span<const CorpusExample> texts, const std::string& class_id);

/// f_inter over texts already labeled one-vs-rest for the class being scored.
double score_unseen(const TransferMatrix& s, std::span<const CorpusExample> class_texts, std::span<const double> z);

/// Scores a raw query image for `class_id` with a zero-shot model, applying its preprocessing.
double score_class(const TrainedModel& model, const std::string& class_id, std::span<const double> z);

}  // namespace i2lt::zeroshot
