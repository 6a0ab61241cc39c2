#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "i2lt/matrix.hpp"
#include "i2lt/model.hpp"

namespace i2lt::eval {

/// Planted latent-topic generator. Every entity draws h ~ N(0, I_r); texts
/// emit x = A h + noise, images z = B h + noise, and the two halves of a
/// co-occurrence pair share one h. With two classes the label is sign(w' h);
/// with more, the class is argmax_c w_c' h over unit-norm w_c.
struct SynthConfig {
  std::size_t p = 40;
  std::size_t q = 30;
  std::size_t r_true = 5;
  std::size_t n_texts = 200;
  /// Labeled training images, split evenly across classes.
  std::size_t m_images = 4;
  /// Held-out test images.
  std::size_t n_test = 500;
  std::size_t l_pairs = 2000;
  std::size_t classes = 2;
  double noise_sigma = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct SynthDataset {
  TrainingData train;
  std::vector<CorpusExample> test_images;
  DenseMatrix text_map;   // A, p x r
  DenseMatrix image_map;  // B, q x r
};

/// Class tag for class index k: "pos"/"neg" in binary mode, "c<k>" otherwise.
std::string synth_class_name(std::size_t k, std::size_t classes);

/// Deterministic in the config. Per-class counts within each set differ by at
/// most one; throws DataError when rejection sampling cannot fill a class.
SynthDataset synth_generate(const SynthConfig& cfg);

}  // namespace i2lt::eval
