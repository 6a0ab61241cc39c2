// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "i2lt/errors.hpp"
#include "i2lt/io.hpp"
#include "i2lt/linalg.hpp"
#include "i2lt/losses.hpp"
#include "i2lt/metrics.hpp"
#include "i2lt/solver.hpp"
#include "i2lt/synth.hpp"
#include "i2lt/train.hpp"
#include "i2lt/zeroshot.hpp"
#include "support.hpp"

using namespace i2lt;
using i2lt::test::Gen;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Stats {
  double mean;
  double se;
};

Stats stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double test_error(const TrainingData& train_data, const std::vector<CorpusExample>& test, const Hyperparameters& h) {
  const auto model = train(train_data, h).first;
  std::vector<int> pred, truth;
  for (const auto& im : test) {
    pred.push_back(predict_label(score_image(model, im.features)));
    truth.push_back(im.label);
  }
  return eval::error_rate(pred, truth);
}

double prox_objective(const DenseMatrix& x, const DenseMatrix& m, double t) {
  const double d = frobenius_norm(x - m);
  return 0.5 * d * d + t * test::ref_trace_norm(x);
}

Outcome prox_oracle() {
  Gen g(1001);
  double worst = -INFINITY;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t r = g.index(1, 6), c = g.index(1, 8);
    const DenseMatrix m = g.mat(r, c, g.uniform(0.1, 3.0));
    const double t = g.uniform(0.0, 3.0);
    const DenseMatrix x = linalg::svt(m, t);
    const double best = prox_objective(x, m, t);
    for (int k = 0; k < 100; ++k) {
      DenseMatrix cand;
      switch (k % 4) {
        case 0: cand = x + g.mat(r, c, 0.01); break;
        case 1: cand = x + g.mat(r, c, 0.3); break;
        case 2: cand = g.mat(r, c, 2.0); break;
        default: cand = m * g.uniform(0.0, 1.0); break;
      }
      worst = std::max(worst, best - prox_objective(cand, m, t));
    }
  }
  return {worst <= 1e-9, fmt("max(prox(svt) - prox(candidate)) = %.3g over 20000 candidates", worst)};
}

Outcome gradient_oracle() {
  Gen g(1002);
  double worst = 0.0;
  int done = 0;
  while (done < 20) {
    const std::size_t p = g.index(1, 5), q = g.index(1, 5);
    const auto pr = test::random_problem(g, p, q, g.index(1, 4), g.index(1, 4), g.index(1, 4));
    const DenseMatrix s = g.mat(p, q, 0.5);
    std::vector<double> alpha;
    for (std::size_t j = 0; j < pr.images.rows(); ++j) alpha.push_back(g.uniform(0.0, 1.0));
    Hyperparameters h;
    h.gamma = g.uniform(0.1, 2.0);
    h.lambda = g.uniform(0.1, 2.0);
    if (test::kink_distance(s, alpha, pr) <= 1e-4) continue;
    ++done;
    const auto smooth = [&](const DenseMatrix& sv, const std::vector<double>& av) { return smooth_value(sv, av, pr, h); };
    const double step = 1e-6;
    const DenseMatrix gs = grad_S(s, alpha, pr, h);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < q; ++c) {
        DenseMatrix hi = s, lo = s;
        hi(r, c) += step;
        lo(r, c) -= step;
        worst = std::max(worst, std::abs(gs(r, c) - (smooth(hi, alpha) - smooth(lo, alpha)) / (2 * step)));
      }
    const auto ga = grad_alpha(s, alpha, pr, h);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      auto hi = alpha, lo = alpha;
      hi[j] += step;
      lo[j] -= step;
      worst = std::max(worst, std::abs(ga[j] - (smooth(s, hi) - smooth(s, lo)) / (2 * step)));
    }
  }
  return {worst < 1e-5, fmt("max |grad - central difference| = %.3g over 20 instances", worst)};
}

Outcome descent() {
  const auto ds = eval::synth_generate(eval::SynthConfig{});
  Hyperparameters h;
  h.tol = 1e-300;
  const auto problem = TrainingProblem::binary(ds.train, resolve_kernel(h, ds.train));
  // The solver stops early once the objective stops moving; resuming from the
  // saved state keeps the run going until 200 iterations have been checked.
  std::vector<double> tr;
  std::size_t done = 0, restarts = 0;
  TrainState state;
  while (done < 200) {
    h.max_iter = 200 - done;
    TrainOptions opts;
    if (done > 0) opts.warm_start = &state;
    auto res = optimize(problem, h, opts);
    tr.insert(tr.end(), res.report.objective_trace.begin(), res.report.objective_trace.end());
    done += res.report.iterations;
    restarts += done < 200;
    state = std::move(res.state);
  }
  double worst = -INFINITY;
  for (std::size_t t = 0; t + 1 < tr.size(); ++t) worst = std::max(worst, tr[t + 1] - tr[t]);
  const bool ok = worst <= 1e-9 && tr.back() <= 0.9 * tr.front();
  return {ok, fmt("%.0f iterations (%.0f resumes), max step increase %.3g, final/initial = %.4g",
                  static_cast<double>(done), static_cast<double>(restarts), worst, tr.back() / tr.front())};
}

Outcome loss_identities() {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = -15.0 + 30.0 * i / 999.0;
    worst = std::max(worst, std::abs(losses::misalign_deriv(a) - (std::tanh(a) - 1.0)));
  }
  const double at0 = std::abs(losses::misalign(0.0) - std::log(2.0));
  return {worst <= 1e-10 && at0 <= 1e-12, fmt("max |deriv - (tanh - 1)| = %.3g, |misalign(0) - log 2| = %.3g", worst, at0)};
}

Outcome planted_advantage() {
  std::vector<double> full, base, diff;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    eval::SynthConfig cfg;
    cfg.seed = seed;
    const auto ds = eval::synth_generate(cfg);
    Hyperparameters h;
    full.push_back(test_error(ds.train, ds.test_images, h));
    TrainingData intra = ds.train;
    intra.texts.clear();
    Hyperparameters hb = h;
    hb.lambda = 0.0;
    base.push_back(test_error(intra, ds.test_images, hb));
    diff.push_back(base.back() - full.back());
  }
  const auto d = stats(diff);
  return {d.mean > 2.0 * d.se, fmt("full %.4f, intramodal-only %.4f, paired difference %.4f (se %.4f)", stats(full).mean,
                                   stats(base).mean, d.mean, d.se)};
}

Outcome pairs_trend() {
  const std::vector<std::size_t> counts{100, 500, 2000};
  std::vector<std::vector<double>> errs(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      eval::SynthConfig cfg;
      cfg.seed = seed;
      cfg.l_pairs = counts[k];
      const auto ds = eval::synth_generate(cfg);
      errs[k].push_back(test_error(ds.train, ds.test_images, Hyperparameters{}));
    }
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto s = stats(errs[k]);
    detail << (k ? ", " : "") << "l=" << counts[k] << ": " << fmt("%.4f (se %.4f)", s.mean, s.se);
    if (k > 0 && s.mean > stats(errs[k - 1]).mean + s.se) ok = false;
  }
  return {ok, detail.str()};
}

Outcome low_rank() {
  const auto ds = eval::synth_generate(eval::SynthConfig{});
  const auto model = train(ds.train, Hyperparameters{}).first;
  const std::size_t rank = linalg::numerical_rank(model.S.matrix(), 1e-10);
  return {rank <= 15, fmt("numerical rank %.0f (planted rank 5)", static_cast<double>(rank))};
}

Outcome zero_shot() {
  // Construction: an unseen-class training image must be rejected, and the
  // training problem only ever contains seen-class images.
  eval::SynthConfig cfg;
  cfg.classes = 5;
  cfg.m_images = 10;
  bool construction_ok = false;
  {
    const auto ds = eval::synth_generate(cfg);
    try {
      zeroshot::ZeroShotDataset bad({"c0", "c1", "c2", "c3"}, {"c4"}, ds.train.texts, ds.train.images, ds.train.pairs);
    } catch (const DataError&) {
      construction_ok = true;
    }
  }
  std::vector<double> aucs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto ds = eval::synth_generate(cfg);
    std::vector<CorpusExample> seen_images;
    for (const auto& im : ds.train.images)
      if (im.class_id != "c4") seen_images.push_back(im);
    const zeroshot::ZeroShotDataset z({"c0", "c1", "c2", "c3"}, {"c4"}, ds.train.texts, seen_images, ds.train.pairs);
    const auto problem = zeroshot::make_problem(z);
    construction_ok = construction_ok && problem.images.rows() == seen_images.size();
    for (const auto& im : z.train_images()) construction_ok = construction_ok && im.class_id != "c4";
    const auto model = zeroshot::train_zeroshot(z, Hyperparameters{}).first;
    std::vector<double> scores;
    std::vector<int> truth;
    for (const auto& im : ds.test_images) {
      scores.push_back(zeroshot::score_class(model, "c4", im.features));
      truth.push_back(im.class_id == "c4" ? 1 : -1);
    }
    aucs.push_back(eval::auc(scores, truth));
  }
  const auto s = stats(aucs);
  return {construction_ok && s.mean > 0.5 + 3.0 * s.se,
          fmt("mean unseen-class AUC %.4f (se %.4f), construction checks ", s.mean, s.se) +
              (construction_ok ? "ok" : "FAILED")};
}

Outcome metric_oracles() {
  Gen g(1009);
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 8; ++n)
    for (int draw = 0; draw < 6; ++draw) {
      std::vector<double> scores;
      for (std::size_t i = 0; i < n; ++i) scores.push_back(draw % 2 == 0 ? static_cast<double>(g.index(0, 2)) : g.normal());
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> truth;
        int pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
          truth.push_back((mask >> i) & 1u ? 1 : -1);
          pos += truth.back() == 1;
        }
        if (pos > 0) {
          worst = std::max(worst, std::abs(eval::average_precision(scores, truth) - test::ref_average_precision(scores, truth)));
          ++cases;
        }
        if (pos > 0 && pos < static_cast<int>(n)) {
          worst = std::max(worst, std::abs(eval::auc(scores, truth) - test::ref_auc(scores, truth)));
          ++cases;
        }
      }
    }
  return {worst <= 1e-12, fmt("max deviation %.3g over %.0f metric evaluations", worst, static_cast<double>(cases))};
}

Outcome determinism() {
  auto pipeline = [](const std::string& tag) {
    test::TempDir dir(tag);
    std::ostringstream out, err;
    auto run = [&](std::vector<std::string> args) {
      args.insert(args.begin(), "i2lt");
      return cli::cli_main(args, out, err);
    };
    int rc = run({"synth", "--out", dir.file("d.jsonl"), "--seed", "7"});
    rc |= run({"train", "--data", dir.file("d.jsonl"), "--out", dir.file("m.json")});
    rc |= run({"predict", "--model", dir.file("m.json"), "--images", dir.file("d.test.jsonl"), "--out", dir.file("p.csv")});
    std::ostringstream report;
    std::vector<std::string> eval_args{"i2lt", "evaluate", "--pred", dir.file("p.csv"), "--truth", dir.file("d.test.jsonl")};
    rc |= cli::cli_main(eval_args, report, err);
    return std::make_pair(rc, report.str() + io::read_file(dir.file("m.json")));
  };
  const auto a = pipeline("acc_a");
  const auto b = pipeline("acc_b");
  const bool same = a.first == 0 && b.first == 0 && a.second == b.second;

  const auto ds = eval::synth_generate(eval::SynthConfig{});
  const auto model = train(ds.train, Hyperparameters{}).first;
  const auto back = io::parse_model(io::serialize_model(model));
  bool exact = true;
  for (const auto& im : ds.test_images) exact = exact && score_image(back, im.features) == score_image(model, im.features);
  return {same && exact, std::string("pipeline reports ") + (same ? "identical" : "DIFFER") + ", round-trip discriminants " +
                             (exact ? "bit-exact" : "DIFFER")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"prox oracle", 5, prox_oracle},
      {"gradient oracle", 5, gradient_oracle},
      {"monotone descent", 60, descent},
      {"loss identities", 5, loss_identities},
      {"planted-alignment advantage", 600, planted_advantage},
      {"pairs-count trend", 600, pairs_trend},
      {"low-rank recovery", 60, low_rank},
      {"zero-shot sanity", 600, zero_shot},
      {"metric oracles", 5, metric_oracles},
      {"pipeline determinism", 60, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.budget_s;
    failures += !pass;
    std::printf("%s criterion %zu (%s): %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", i + 1, c.name,
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
