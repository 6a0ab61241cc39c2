#include "i2lt/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <random>
#include <thread>

#include "i2lt/errors.hpp"
#include "i2lt/metrics.hpp"
#include "i2lt/train.hpp"

namespace i2lt::eval {

std::vector<Hyperparameters> HyperGrid::expand(const Hyperparameters& base) const {
  std::vector<Hyperparameters> out;
  out.reserve(size());
  for (double lambda : lambdas)
    for (double gamma : gammas)
      for (double cap : caps) {
        Hyperparameters h = base;
        h.lambda = lambda;
        h.gamma = gamma;
        h.cap_c = cap;
        out.push_back(h);
      }
  return out;
}

std::array<std::vector<std::size_t>, 2> stratified_folds(std::span<const CorpusExample> images, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t j = 0; j < images.size(); ++j) (images[j].label == 1 ? pos : neg).push_back(j);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::array<std::vector<std::size_t>, 2> folds;
  std::size_t dealt = 0;
  for (auto idx : pos) folds[dealt++ % 2].push_back(idx);
  for (auto idx : neg) folds[dealt++ % 2].push_back(idx);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

double fold_error(const TrainingData& data, const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& valid_idx, const Hyperparameters& hyper) {
  TrainingData fold{data.texts, {}, data.pairs};
  for (auto j : train_idx) fold.images.push_back(data.images[j]);
  const auto model = train(fold, hyper).first;
  std::vector<int> pred;
  std::vector<int> truth;
  for (auto j : valid_idx) {
    pred.push_back(predict_label(score_image(model, data.images[j].features)));
    truth.push_back(data.images[j].label);
  }
  return error_rate(pred, truth);
}

}  // namespace

CrossValResult crossval_select(const TrainingData& data, const HyperGrid& grid, const Hyperparameters& base,
                               std::uint64_t seed, unsigned threads) {
  base.validate();
  if (grid.size() == 0) throw std::invalid_argument("crossval: empty grid");
  if (data.images.size() < 2) throw DataError("crossval: twofold cross-validation needs at least 2 labeled images");
  for (const auto& im : data.images)
    if (im.label != 1 && im.label != -1) throw DataError("crossval: image '" + im.id + "' needs a +1/-1 label");

  Hyperparameters fixed = base;
  if (fixed.kernel == KernelKind::gaussian && !fixed.bandwidth) {
    TrainingData prepared = data;
    if (fixed.normalize) normalize_features(prepared);
    fixed.bandwidth = resolve_kernel(fixed, prepared).bandwidth;
  }
  const auto folds = stratified_folds(data.images, seed);
  const auto candidates = grid.expand(fixed);

  std::vector<double> errors(candidates.size());
  std::vector<std::exception_ptr> failures(candidates.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < candidates.size(); k = next++) {
      try {
        const double e0 = fold_error(data, folds[0], folds[1], candidates[k]);
        const double e1 = fold_error(data, folds[1], folds[0], candidates[k]);
        errors[k] = 0.5 * (e0 + e1);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, candidates.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  CrossValResult result;
  std::size_t best = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    result.scores.push_back({candidates[k], errors[k]});
    if (errors[k] < errors[best]) best = k;
  }
  result.best = candidates[best];
  result.best_error = errors[best];
  return result;
}

}  // namespace i2lt::eval
