#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "i2lt/model.hpp"

namespace i2lt::eval {

/// Candidate values for lambda, gamma and C. Enumerated lambda-major, then gamma, then C.
struct HyperGrid {
  std::vector<double> lambdas{0.0, 0.5, 1.0, 2.0};
  std::vector<double> gammas{0.1, 0.5, 1.0, 2.0};
  std::vector<double> caps{1.0, 2.0, 5.0, 10.0};

  std::size_t size() const noexcept { return lambdas.size() * gammas.size() * caps.size(); }
  /// Grid points in enumeration order, each a copy of `base` with the three values replaced.
  std::vector<Hyperparameters> expand(const Hyperparameters& base) const;
};

struct GridScore {
  Hyperparameters hyper;
  double mean_error = 0.0;
};

struct CrossValResult {
  Hyperparameters best;
  double best_error = 0.0;
  std::vector<GridScore> scores;  // grid order
};

/// Twofold split of the labeled images, stratified by label: positives then
/// negatives, each shuffled with `seed`, dealt alternately into the folds.
std::array<std::vector<std::size_t>, 2> stratified_folds(std::span<const CorpusExample> images, std::uint64_t seed);

/// Picks the grid point with the lowest mean validation error over the two
/// folds; ties go to the earliest grid point. The Gaussian bandwidth (when
/// unset in `base`) is fixed once from all labeled images and reported in the
/// result. Grid points run on up to `threads` workers (0 = hardware
/// concurrency); the result does not depend on the thread count.
/// Throws DataError with fewer than two labeled images.
CrossValResult crossval_select(const TrainingData& data, const HyperGrid& grid, const Hyperparameters& base,
                               std::uint64_t seed = 0, unsigned threads = 0);

}  // namespace i2lt::eval
