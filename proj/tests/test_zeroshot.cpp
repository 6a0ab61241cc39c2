#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "i2lt/errors.hpp"
#include "i2lt/synth.hpp"
#include "i2lt/zeroshot.hpp"
#include "support.hpp"

using namespace i2lt;
using namespace i2lt::zeroshot;
using i2lt::test::Gen;

namespace {

eval::SynthDataset small_multiclass(std::uint64_t seed, std::size_t classes = 3) {
  eval::SynthConfig cfg;
  cfg.p = 6;
  cfg.q = 5;
  cfg.r_true = 3;
  cfg.n_texts = 3 * classes;
  cfg.m_images = 2 * classes;
  cfg.n_test = 20;
  cfg.l_pairs = 30;
  cfg.classes = classes;
  cfg.seed = seed;
  return eval::synth_generate(cfg);
}

Hyperparameters quick() {
  Hyperparameters h;
  h.max_iter = 60;
  return h;
}

std::vector<CorpusExample> without_class(std::vector<CorpusExample> v, const std::string& c) {
  std::erase_if(v, [&](const CorpusExample& e) { return e.class_id == c; });
  return v;
}

}  // namespace

TEST_CASE("filter pairs") {
  std::vector<CooccurrencePair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({{1.0}, {1.0}, i == 2 || i == 5 || i == 9 ? "u" : "s", std::to_string(i)});
  CHECK(filter_pairs(pairs, {}).size() == 10);
  CHECK(filter_pairs(pairs, {"u", "s"}).empty());
  const auto kept = filter_pairs(pairs, {"u"});
  REQUIRE(kept.size() == 7);
  const std::vector<std::string> order{"0", "1", "3", "4", "6", "7", "8"};
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].id == order[i]);
}

TEST_CASE("dataset construction refuses unseen-class image labels") {
  const auto ds = small_multiclass(1);
  const auto& d = ds.train;
  CHECK_THROWS_AS(ZeroShotDataset({"c0", "c1"}, {"c2"}, d.texts, d.images, d.pairs), DataError);
  CHECK_NOTHROW(ZeroShotDataset({"c0", "c1"}, {"c2"}, d.texts, without_class(d.images, "c2"), d.pairs));

  auto untagged = without_class(d.images, "c2");
  untagged[0].class_id.clear();
  CHECK_THROWS_AS(ZeroShotDataset({"c0", "c1"}, {"c2"}, d.texts, untagged, d.pairs), DataError);
  CHECK_THROWS_AS(ZeroShotDataset({"c0"}, {"c2"}, d.texts, without_class(d.images, "c2"), d.pairs), DataError);
  CHECK_THROWS_AS(ZeroShotDataset({"c0", "c1"}, {"c1", "c2"}, d.texts, without_class(d.images, "c2"), d.pairs),
                  DataError);
  CHECK_THROWS_AS(ZeroShotDataset({}, {"c2"}, d.texts, {}, d.pairs), std::invalid_argument);

  auto stray_text = d.texts;
  stray_text[0].class_id = "c9";
  CHECK_THROWS_AS(ZeroShotDataset({"c0", "c1"}, {"c2"}, stray_text, without_class(d.images, "c2"), d.pairs), DataError);

  auto untagged_pair = d.pairs;
  untagged_pair[0].class_id.clear();
  CHECK_THROWS_AS(ZeroShotDataset({"c0", "c1"}, {"c2"}, d.texts, without_class(d.images, "c2"), untagged_pair),
                  DataError);
}

TEST_CASE("unseen-class pairs are dropped and the problem has one task per seen class") {
  const auto ds = small_multiclass(2);
  const auto& d = ds.train;
  const ZeroShotDataset z({"c0", "c1"}, {"c2"}, d.texts, without_class(d.images, "c2"), d.pairs);
  for (const auto& pr : z.pairs()) CHECK(pr.class_id != "c2");
  CHECK(z.pairs().size() == filter_pairs(d.pairs, {"c2"}).size());

  const auto problem = make_problem(z);
  CHECK(problem.tasks.size() == 2);
  CHECK_FALSE(problem.intramodal);
  CHECK(problem.images.rows() == z.train_images().size());
  CHECK(problem.texts.rows() == without_class(d.texts, "c2").size());
  for (const auto& task : problem.tasks) {
    int positives = 0;
    for (double y : task.image_labels) positives += y > 0;
    CHECK(positives == 2);
  }
}

TEST_CASE("one seen class reduces to the plain inter-modal solver") {
  const auto ds = small_multiclass(3, 2);
  const auto& d = ds.train;
  const std::string seen = eval::synth_class_name(0, 2), unseen = eval::synth_class_name(1, 2);
  const ZeroShotDataset z({seen}, {unseen}, d.texts, without_class(d.images, unseen), d.pairs);
  const auto [model, report] = train_zeroshot(z, quick());

  TrainingProblem direct;
  std::vector<FeatureVector> rows;
  LabelAssignment task;
  for (const auto& t : d.texts)
    if (t.class_id == seen) {
      rows.push_back(t.features);
      task.text_labels.push_back(1.0);
    }
  direct.texts = DenseMatrix::from_rows(rows, 6);
  rows.clear();
  for (const auto& im : d.images)
    if (im.class_id == seen) {
      rows.push_back(im.features);
      task.image_labels.push_back(1.0);
    }
  direct.images = DenseMatrix::from_rows(rows, 5);
  std::vector<FeatureVector> xs, zs;
  for (const auto& pr : d.pairs)
    if (pr.class_id == seen) {
      xs.push_back(pr.text_features);
      zs.push_back(pr.image_features);
    }
  direct.pair_texts = DenseMatrix::from_rows(xs, 6);
  direct.pair_images = DenseMatrix::from_rows(zs, 5);
  direct.tasks.push_back(task);
  direct.intramodal = false;
  const auto ref = optimize(direct, quick());

  CHECK(ref.report.objective_trace == report.objective_trace);
  CHECK(ref.state.S == model.S.matrix());
}

TEST_CASE("unseen-class texts do not influence training") {
  const auto ds = small_multiclass(4);
  const auto& d = ds.train;
  const auto images = without_class(d.images, "c2");
  const ZeroShotDataset with({"c0", "c1"}, {"c2"}, d.texts, images, d.pairs);
  const ZeroShotDataset without({"c0", "c1"}, {"c2"}, without_class(d.texts, "c2"), images, d.pairs);
  const auto [m1, r1] = train_zeroshot(with, quick());
  const auto [m2, r2] = train_zeroshot(without, quick());
  CHECK(r1.objective_trace == r2.objective_trace);
  CHECK(m1.S == m2.S);
  CHECK(m1.source_texts.size() == d.texts.size());
}

TEST_CASE("zero-shot model shape and trivial weights") {
  const auto ds = small_multiclass(5);
  const auto& d = ds.train;
  const ZeroShotDataset z({"c0", "c1"}, {"c2"}, d.texts, without_class(d.images, "c2"), d.pairs);
  Hyperparameters h = quick();
  h.gamma = 0.0;
  h.lambda = 0.0;
  const auto [model, report] = train_zeroshot(z, h);
  CHECK(frobenius_norm(model.S.matrix()) == 0.0);
  CHECK(model.mode == ModelMode::zeroshot);
  CHECK(model.alpha.empty());
  CHECK(model.unseen_classes == std::vector<std::string>{"c2"});
}

TEST_CASE("unseen-class scoring") {
  Gen g(61);
  const auto ds = small_multiclass(6);
  const auto& d = ds.train;
  const auto z = g.vec(5);
  const auto texts = one_vs_rest_texts(d.texts, "c2");
  for (const auto& t : texts) CHECK(t.label == (t.class_id == "c2" ? 1 : -1));
  CHECK(score_unseen(TransferMatrix::zeros(6, 5), texts, z) == 0.0);

  const TransferMatrix s(g.mat(6, 5));
  std::vector<CorpusExample> single{{"x", g.vec(6), 1, "c2"}};
  CHECK(score_unseen(s, single, z) == doctest::Approx(std::tanh(bilinear(single[0].features, s.matrix(), z))));

  auto flipped = texts;
  for (auto& t : flipped) t.label = -t.label;
  CHECK(score_unseen(s, flipped, z) == doctest::Approx(-score_unseen(s, texts, z)).epsilon(1e-12));

  const ZeroShotDataset zd({"c0", "c1"}, {"c2"}, d.texts, without_class(d.images, "c2"), d.pairs);
  const auto [model, report] = train_zeroshot(zd, quick());
  CHECK(score_class(model, "c2", z) == score_unseen(model.S, texts, z));
}
