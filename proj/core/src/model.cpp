#include "i2lt/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "i2lt/errors.hpp"

namespace i2lt {

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(got) + ", expected " +
                                std::to_string(want));
  }
}

constexpr std::size_t kMaxBandwidthPairs = 10000;
constexpr std::uint64_t kBandwidthSeed = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::size_t TrainingData::text_dim() const {
  if (!texts.empty()) return texts.front().features.size();
  if (!pairs.empty()) return pairs.front().text_features.size();
  return 0;
}

std::size_t TrainingData::image_dim() const {
  if (!images.empty()) return images.front().features.size();
  if (!pairs.empty()) return pairs.front().image_features.size();
  return 0;
}

void TrainingData::validate_dims() const {
  const std::size_t p = text_dim();
  const std::size_t q = image_dim();
  for (const auto& t : texts)
    if (t.features.size() != p)
      throw DataError("text '" + t.id + "' has dimension " + std::to_string(t.features.size()) + ", expected " +
                      std::to_string(p));
  for (const auto& im : images)
    if (im.features.size() != q)
      throw DataError("image '" + im.id + "' has dimension " + std::to_string(im.features.size()) +
                      ", expected " + std::to_string(q));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k].text_features.size() != p || pairs[k].image_features.size() != q)
      throw DataError("pair " + std::to_string(k) + " has dimensions (" +
                      std::to_string(pairs[k].text_features.size()) + ", " +
                      std::to_string(pairs[k].image_features.size()) + "), expected (" + std::to_string(p) + ", " +
                      std::to_string(q) + ")");
  }
}

TransferMatrix::TransferMatrix(DenseMatrix s) : s_(std::move(s)) {
  if (!s_.all_finite()) throw NumericalError("TransferMatrix: non-finite entries");
}

TransferMatrix TransferMatrix::zeros(std::size_t text_dim, std::size_t image_dim) {
  return TransferMatrix(DenseMatrix(text_dim, image_dim));
}

void KernelSpec::validate() const {
  if (kind == KernelKind::gaussian && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw std::invalid_argument("gaussian kernel bandwidth must be positive, got " + std::to_string(bandwidth));
  }
}

std::string to_string(KernelKind kind) { return kind == KernelKind::gaussian ? "gaussian" : "linear"; }

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "linear") return KernelKind::linear;
  throw std::invalid_argument("unknown kernel '" + name + "' (expected gaussian or linear)");
}

void Hyperparameters::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("hyperparameters: " + msg); };
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (!(cap_c > 0.0) || !std::isfinite(cap_c)) fail("C must be > 0");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) fail("bandwidth must be > 0");
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (!(lipschitz0 > 0.0) || !std::isfinite(lipschitz0)) fail("L0 must be > 0");
  if (!(eta > 1.0) || !std::isfinite(eta)) fail("eta must be > 1");
  if (!(eps_alpha0 > 0.0) || !std::isfinite(eps_alpha0)) fail("eps_alpha0 must be > 0");
}

void TrainedModel::validate() const {
  if (alpha.size() != (mode == ModelMode::binary ? train_images.size() : 0)) {
    throw DataError("model: alpha has length " + std::to_string(alpha.size()) + " but there are " +
                    std::to_string(train_images.size()) + " training images");
  }
  for (double a : alpha)
    if (!(a >= 0.0 && a <= hyper.cap_c)) throw DataError("model: alpha outside [0, C]");
  for (const auto& t : source_texts)
    if (t.features.size() != text_dim()) throw DataError("model: source text '" + t.id + "' has wrong dimension");
  for (const auto& im : train_images)
    if (im.features.size() != image_dim()) throw DataError("model: image '" + im.id + "' has wrong dimension");
  kernel.validate();
}

double transfer_score(std::span<const double> x, const TransferMatrix& s, std::span<const double> z) {
  require_dim(x.size(), s.text_dim(), "transfer_score text");
  require_dim(z.size(), s.image_dim(), "transfer_score image");
  return std::tanh(bilinear(x, s.matrix(), z));
}

double f_inter(const TransferMatrix& s, std::span<const CorpusExample> source_texts, std::span<const double> z) {
  require_dim(z.size(), s.image_dim(), "f_inter image");
  if (source_texts.empty()) return 0.0;
  // S z once, then one dot product per text.
  const FeatureVector sz = multiply(s.matrix(), z);
  double total = 0.0;
  for (const auto& t : source_texts) {
    require_dim(t.features.size(), s.text_dim(), "f_inter text");
    total += static_cast<double>(t.label) * std::tanh(dot(t.features, sz));
  }
  return total;
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> z1, std::span<const double> z2) {
  require_dim(z2.size(), z1.size(), "kernel_eval");
  if (kernel.kind == KernelKind::linear) return dot(z1, z2);
  return std::exp(-squared_distance(z1, z2) / (2.0 * kernel.bandwidth * kernel.bandwidth));
}

double median_bandwidth(std::span<const FeatureVector> images) {
  const std::size_t n = images.size();
  if (n < 2) throw DataError("median bandwidth needs at least 2 images; pass an explicit bandwidth");
  for (const auto& im : images) require_dim(im.size(), images.front().size(), "median_bandwidth");

  std::vector<double> dists;
  const std::size_t total_pairs = n * (n - 1) / 2;
  if (total_pairs <= kMaxBandwidthPairs) {
    dists.reserve(total_pairs);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dists.push_back(std::sqrt(squared_distance(images[i], images[j])));
  } else {
    std::mt19937_64 rng(kBandwidthSeed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    dists.reserve(kMaxBandwidthPairs);
    while (dists.size() < kMaxBandwidthPairs) {
      const std::size_t i = pick(rng);
      const std::size_t j = pick(rng);
      if (i == j) continue;
      dists.push_back(std::sqrt(squared_distance(images[i], images[j])));
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t mid = dists.size() / 2;
  const double median = dists.size() % 2 == 1 ? dists[mid] : 0.5 * (dists[mid - 1] + dists[mid]);
  if (!(median > 0.0)) {
    throw DataError("median pairwise image distance is zero; pass an explicit bandwidth");
  }
  return median;
}

double f_intra(const TrainedModel& model, std::span<const double> z) {
  require_dim(z.size(), model.image_dim(), "f_intra image");
  double total = 0.0;
  for (std::size_t j = 0; j < model.alpha.size(); ++j) {
    if (model.alpha[j] == 0.0) continue;
    const auto& im = model.train_images[j];
    total += static_cast<double>(im.label) * model.alpha[j] * kernel_eval(model.kernel, im.features, z);
  }
  return total;
}

double discriminant(const TrainedModel& model, std::span<const double> z) {
  return f_inter(model.S, model.source_texts, z) + f_intra(model, z);
}

FeatureVector l2_normalized(FeatureVector x) {
  const double nrm = std::sqrt(dot(x, x));
  if (nrm > 0.0)
    for (double& v : x) v /= nrm;
  return x;
}

}  // namespace i2lt
