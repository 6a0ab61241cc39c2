#include "i2lt/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "i2lt/errors.hpp"

namespace i2lt::eval {

namespace {

constexpr std::size_t kAttemptsPerEntity = 1000;

struct Latent {
  FeatureVector h;
  std::size_t cls = 0;
};

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    text_map_ = gaussian_matrix(cfg.p, cfg.r_true, 1.0 / std::sqrt(static_cast<double>(cfg.r_true)));
    image_map_ = gaussian_matrix(cfg.q, cfg.r_true, 1.0 / std::sqrt(static_cast<double>(cfg.r_true)));
    const std::size_t directions = cfg.classes == 2 ? 1 : cfg.classes;
    class_dirs_ = gaussian_matrix(directions, cfg.r_true, 1.0);
    for (std::size_t c = 0; c < directions; ++c) {
      auto w = class_dirs_.row(c);
      const double nrm = std::sqrt(dot(w, w));
      for (double& v : w) v /= nrm;
    }
  }

  const DenseMatrix& text_map() const { return text_map_; }
  const DenseMatrix& image_map() const { return image_map_; }

  // Draws latents until each class holds its share of `count`.
  std::vector<Latent> balanced_latents(std::size_t count, const char* what) {
    std::vector<std::size_t> quota(cfg_.classes, count / cfg_.classes);
    for (std::size_t c = 0; c < count % cfg_.classes; ++c) ++quota[c];
    std::vector<Latent> out;
    out.reserve(count);
    const std::size_t max_attempts = kAttemptsPerEntity * (count + 1);
    std::size_t attempts = 0;
    while (out.size() < count) {
      if (++attempts > max_attempts) {
        throw DataError(std::string("synth: could not balance classes for ") + what + " after " +
                        std::to_string(max_attempts) + " draws");
      }
      Latent lat;
      lat.h.resize(cfg_.r_true);
      for (double& v : lat.h) v = normal_(rng_);
      lat.cls = classify(lat.h);
      if (quota[lat.cls] == 0) continue;
      --quota[lat.cls];
      out.push_back(std::move(lat));
    }
    return out;
  }

  FeatureVector emit(const DenseMatrix& map, const FeatureVector& h) {
    FeatureVector v = multiply(map, h);
    if (cfg_.noise_sigma > 0.0)
      for (double& x : v) x += cfg_.noise_sigma * normal_(rng_);
    return v;
  }

  CorpusExample example(std::string id, const DenseMatrix& map, const Latent& lat) {
    CorpusExample ex;
    ex.id = std::move(id);
    ex.features = emit(map, lat.h);
    ex.class_id = synth_class_name(lat.cls, cfg_.classes);
    if (cfg_.classes == 2) ex.label = lat.cls == 0 ? 1 : -1;
    return ex;
  }

 private:
  DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale) {
    DenseMatrix m(rows, cols);
    for (double& v : m.entries()) v = scale * normal_(rng_);
    return m;
  }

  std::size_t classify(const FeatureVector& h) const {
    if (cfg_.classes == 2) return dot(class_dirs_.row(0), h) > 0.0 ? 0 : 1;
    std::size_t best = 0;
    double best_score = dot(class_dirs_.row(0), h);
    for (std::size_t c = 1; c < cfg_.classes; ++c) {
      const double s = dot(class_dirs_.row(c), h);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    return best;
  }

  SynthConfig cfg_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  DenseMatrix text_map_;
  DenseMatrix image_map_;
  DenseMatrix class_dirs_;
};

}  // namespace

void SynthConfig::validate() const {
  if (p == 0 || q == 0) throw std::invalid_argument("synth: p and q must be >= 1");
  if (r_true == 0 || r_true > std::min(p, q)) throw std::invalid_argument("synth: need 1 <= r_true <= min(p, q)");
  if (classes < 2) throw std::invalid_argument("synth: need at least 2 classes");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw std::invalid_argument("synth: noise_sigma must be >= 0");
}

std::string synth_class_name(std::size_t k, std::size_t classes) {
  if (classes == 2) return k == 0 ? "pos" : "neg";
  return "c" + std::to_string(k);
}

SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Generator gen(cfg);
  SynthDataset out;
  out.text_map = gen.text_map();
  out.image_map = gen.image_map();

  // Draw order is fixed: texts, training images, test images, pairs. Changing
  // l_pairs therefore leaves the other sets untouched for a given seed.
  const auto text_latents = gen.balanced_latents(cfg.n_texts, "texts");
  for (std::size_t i = 0; i < text_latents.size(); ++i)
    out.train.texts.push_back(gen.example("t" + std::to_string(i), gen.text_map(), text_latents[i]));
  const auto image_latents = gen.balanced_latents(cfg.m_images, "training images");
  for (std::size_t j = 0; j < image_latents.size(); ++j)
    out.train.images.push_back(gen.example("i" + std::to_string(j), gen.image_map(), image_latents[j]));
  const auto test_latents = gen.balanced_latents(cfg.n_test, "test images");
  for (std::size_t j = 0; j < test_latents.size(); ++j)
    out.test_images.push_back(gen.example("x" + std::to_string(j), gen.image_map(), test_latents[j]));
  const auto pair_latents = gen.balanced_latents(cfg.l_pairs, "pairs");
  for (std::size_t k = 0; k < pair_latents.size(); ++k) {
    CooccurrencePair pr;
    pr.text_features = gen.emit(gen.text_map(), pair_latents[k].h);
    pr.image_features = gen.emit(gen.image_map(), pair_latents[k].h);
    pr.class_id = synth_class_name(pair_latents[k].cls, cfg.classes);
    pr.id = "p" + std::to_string(k);
    out.train.pairs.push_back(std::move(pr));
  }
  return out;
}

}  // namespace i2lt::eval
