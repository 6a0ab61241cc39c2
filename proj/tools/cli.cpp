#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "i2lt/crossval.hpp"
#include "i2lt/errors.hpp"
#include "i2lt/io.hpp"
#include "i2lt/metrics.hpp"
#include "i2lt/synth.hpp"
#include "i2lt/train.hpp"
#include "i2lt/zeroshot.hpp"

namespace i2lt::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Flags shared by train, crossval and zeroshot.
struct HyperFlags {
  double gamma = 1.0;
  double lambda = 1.0;
  double cap_c = 1.0;
  std::string kernel = "gaussian";
  double bandwidth = 0.0;
  std::size_t max_iter = 500;
  double tol = 1e-6;
  double lipschitz0 = 1.0;
  double eta = 2.0;
  double eps_alpha0 = 0.1;
  bool normalize = false;

  void attach(CLI::App& cmd, bool with_grid_values) {
    if (with_grid_values) {
      cmd.add_option("--gamma", gamma, "Weight of the labeled-image hinge loss")->capture_default_str();
      cmd.add_option("--lambda", lambda, "Weight of the pair misalignment loss")->capture_default_str();
      cmd.add_option("--cap-c", cap_c, "Upper bound C on the intramodal coefficients")->capture_default_str();
    }
    cmd.add_option("--kernel", kernel, "Image kernel")->check(CLI::IsMember({"gaussian", "linear"}))->capture_default_str();
    cmd.add_option("--bandwidth", bandwidth, "Gaussian bandwidth (default: median pairwise distance)");
    cmd.add_option("--max-iter", max_iter, "Maximum outer iterations")->capture_default_str();
    cmd.add_option("--tol", tol, "Relative objective decrease that stops training")->capture_default_str();
    cmd.add_option("--L0", lipschitz0, "Initial Lipschitz estimate for the S step")->capture_default_str();
    cmd.add_option("--eta", eta, "Backtracking multiplier")->capture_default_str();
    cmd.add_option("--eps-alpha0", eps_alpha0, "Initial alpha step size")->capture_default_str();
    cmd.add_flag("--normalize", normalize, "L2-normalize every feature vector");
  }

  Hyperparameters build() const {
    Hyperparameters h;
    h.gamma = gamma;
    h.lambda = lambda;
    h.cap_c = cap_c;
    h.kernel = parse_kernel_kind(kernel);
    if (bandwidth > 0.0) h.bandwidth = bandwidth;
    h.max_iter = max_iter;
    h.tol = tol;
    h.lipschitz0 = lipschitz0;
    h.eta = eta;
    h.eps_alpha0 = eps_alpha0;
    h.normalize = normalize;
    h.validate();
    return h;
  }
};

void print_report(std::ostream& out, const TrainReport& r) {
  out << "converged=" << (r.converged ? "true" : "false") << '\n';
  out << "iterations=" << r.iterations << '\n';
  out << "initial_objective=" << fmt(r.objective_trace.front()) << '\n';
  out << "final_objective=" << fmt(r.final_objective) << '\n';
  out << "final_rank=" << r.final_rank << '\n';
}

fs::path default_test_path(const fs::path& out) {
  fs::path test = out;
  test.replace_extension();
  test += ".test";
  test += out.has_extension() ? out.extension() : fs::path(".jsonl");
  return test;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

eval::HyperGrid load_grid(const std::string& source) {
  if (source == "default") return {};
  const auto j = nlohmann::json::parse(io::read_file(source), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("grid file '" + source + "' is not a JSON object");
  eval::HyperGrid g;
  try {
    if (j.contains("lambda")) g.lambdas = j.at("lambda").get<std::vector<double>>();
    if (j.contains("gamma")) g.gammas = j.at("gamma").get<std::vector<double>>();
    if (j.contains("C")) g.caps = j.at("C").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("grid file '" + source + "': " + e.what());
  }
  return g;
}

int run_synth(const std::string& config_path, const fs::path& out_path, const std::string& test_out,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  eval::SynthConfig cfg;
  if (!config_path.empty() && config_path != "default") cfg = io::parse_synth_config(io::read_file(config_path));
  if (seed) cfg.seed = *seed;
  const auto ds = eval::synth_generate(cfg);
  const fs::path test_path = test_out.empty() ? default_test_path(out_path) : fs::path(test_out);
  std::ostringstream train_text;
  io::write_dataset(train_text, ds.train);
  std::ostringstream test_text;
  io::write_images(test_text, ds.test_images);
  io::write_file_atomic(out_path, train_text.str());
  io::write_file_atomic(test_path, test_text.str());
  out << "texts=" << ds.train.texts.size() << '\n'
      << "images=" << ds.train.images.size() << '\n'
      << "pairs=" << ds.train.pairs.size() << '\n'
      << "test_images=" << ds.test_images.size() << '\n'
      << "test_path=" << test_path.string() << '\n';
  return kSuccess;
}

int run_train(const std::string& data_path, const HyperFlags& flags, const std::string& positive_class,
              const fs::path& model_path, bool verbose, std::ostream& out, std::ostream& err) {
  const Hyperparameters hyper = flags.build();
  TrainingData data = io::read_dataset(data_path);
  if (!positive_class.empty()) data = binarize(data, positive_class);
  TrainOptions options;
  if (verbose) options.log = &err;
  auto [model, report] = train(data, hyper, options);
  io::write_file_atomic(model_path, io::serialize_model(model));
  print_report(out, report);
  return kSuccess;
}

int run_predict(const fs::path& model_path, const std::string& images_path, const fs::path& out_path,
                std::ostream& out) {
  const TrainedModel model = io::parse_model(io::read_file(model_path));
  const TrainingData queries = io::read_dataset(images_path);
  for (const auto& im : queries.images) {
    if (im.features.size() != model.image_dim()) {
      throw DataError("image '" + im.id + "' has dimension " + std::to_string(im.features.size()) +
                      ", model expects " + std::to_string(model.image_dim()));
    }
  }
  std::vector<io::Prediction> preds;
  if (model.mode == ModelMode::binary) {
    for (const auto& im : queries.images) {
      const double f = score_image(model, im.features);
      preds.push_back({im.id, "-", f, predict_label(f)});
    }
  } else {
    for (const auto& c : model.unseen_classes) {
      const auto texts = zeroshot::one_vs_rest_texts(model.source_texts, c);
      for (const auto& im : queries.images) {
        const FeatureVector z = model.normalized ? l2_normalized(im.features) : im.features;
        const double f = zeroshot::score_unseen(model.S, texts, z);
        preds.push_back({im.id, c, f, predict_label(f)});
      }
    }
  }
  std::ostringstream text;
  io::write_predictions(text, preds);
  io::write_file_atomic(out_path, text.str());
  out << "predictions=" << preds.size() << '\n';
  return kSuccess;
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path, std::ostream& out) {
  std::istringstream pred_text(io::read_file(pred_path));
  const auto preds = io::parse_predictions(pred_text);
  const TrainingData truth = io::read_dataset(truth_path);
  std::map<std::string, const CorpusExample*> by_id;
  for (const auto& im : truth.images) by_id[im.id] = &im;

  std::vector<std::string> order;
  std::map<std::string, std::vector<const io::Prediction*>> groups;
  for (const auto& p : preds) {
    if (!groups.contains(p.class_id)) order.push_back(p.class_id);
    groups[p.class_id].push_back(&p);
  }
  std::vector<eval::ClassReport> per_class;
  for (const auto& cls : order) {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<int> truth_labels;
    for (const auto* p : groups[cls]) {
      const auto it = by_id.find(p->id);
      if (it == by_id.end()) throw DataError("prediction for unknown image '" + p->id + "'");
      const CorpusExample& im = *it->second;
      int y = 0;
      if (cls == "-") {
        y = im.label;
        if (y != 1 && y != -1) throw DataError("truth image '" + im.id + "' needs a +1/-1 label");
      } else {
        if (im.class_id.empty()) throw DataError("truth image '" + im.id + "' has no class tag");
        y = im.class_id == cls ? 1 : -1;
      }
      scores.push_back(p->score);
      labels.push_back(p->label);
      truth_labels.push_back(y);
    }
    per_class.push_back(eval::evaluate_class(cls, scores, labels, truth_labels));
  }
  if (per_class.empty()) throw DataError("no predictions to evaluate");
  out << eval::summarize(std::move(per_class)).to_text();
  return kSuccess;
}

int run_crossval(const std::string& data_path, const std::string& grid_spec, const HyperFlags& flags,
                 const std::string& positive_class, std::uint64_t seed, unsigned threads, std::ostream& out) {
  const Hyperparameters base = flags.build();
  const eval::HyperGrid grid = load_grid(grid_spec);
  TrainingData data = io::read_dataset(data_path);
  if (!positive_class.empty()) data = binarize(data, positive_class);
  const auto result = eval::crossval_select(data, grid, base, seed, threads);
  const auto& b = result.best;
  out << "lambda=" << fmt(b.lambda) << '\n'
      << "gamma=" << fmt(b.gamma) << '\n'
      << "C=" << fmt(b.cap_c) << '\n'
      << "kernel=" << to_string(b.kernel) << '\n';
  if (b.bandwidth) out << "bandwidth=" << fmt(*b.bandwidth) << '\n';
  out << "cv_error=" << fmt(result.best_error) << '\n' << "grid_points=" << result.scores.size() << '\n';
  return kSuccess;
}

int run_zeroshot(const std::string& data_path, const std::string& unseen_list, const HyperFlags& flags,
                 const fs::path& model_path, bool verbose, std::ostream& out, std::ostream& err) {
  const Hyperparameters hyper = flags.build();
  const auto unseen_vec = split_list(unseen_list);
  if (unseen_vec.empty()) throw std::invalid_argument("--unseen needs at least one class");
  const zeroshot::ClassSet unseen(unseen_vec.begin(), unseen_vec.end());
  TrainingData data = io::read_dataset(data_path);

  // Labeled images of unseen classes are withheld before the dataset is built.
  std::vector<CorpusExample> images;
  std::size_t withheld = 0;
  zeroshot::ClassSet seen;
  for (auto& im : data.images) {
    if (unseen.contains(im.class_id)) {
      ++withheld;
      continue;
    }
    seen.insert(im.class_id);
    images.push_back(std::move(im));
  }
  if (withheld > 0) err << "withheld " << withheld << " training images of unseen classes\n";
  for (const auto& t : data.texts)
    if (!unseen.contains(t.class_id)) seen.insert(t.class_id);
  for (const auto& c : unseen) {
    const bool has_text = std::any_of(data.texts.begin(), data.texts.end(),
                                      [&](const CorpusExample& t) { return t.class_id == c; });
    if (!has_text) throw DataError("unseen class '" + c + "' has no labeled texts");
  }
  const zeroshot::ZeroShotDataset ds(seen, unseen, std::move(data.texts), std::move(images), std::move(data.pairs));
  TrainOptions options;
  if (verbose) options.log = &err;
  auto [model, report] = zeroshot::train_zeroshot(ds, hyper, options);
  io::write_file_atomic(model_path, io::serialize_model(model));
  print_report(out, report);
  out << "seen_classes=" << ds.seen_classes().size() << '\n' << "training_pairs=" << ds.pairs().size() << '\n';
  return kSuccess;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint intermodal and intramodal label transfer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string test_out;
  std::uint64_t seed_value = 0;
  std::string data_path;
  std::string model_path;
  std::string images_path;
  std::string pred_path;
  std::string truth_path;
  std::string grid_spec = "default";
  std::string unseen_list;
  std::string positive_class;
  unsigned threads = 0;
  bool verbose = false;
  HyperFlags train_flags;
  HyperFlags cv_flags;
  HyperFlags zs_flags;

  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  synth->add_option("--config", config_path, "JSON synth config (or 'default')");
  synth->add_option("--out", out_path, "Training dataset output")->required();
  synth->add_option("--test-out", test_out, "Held-out test images output (default: <out>.test.jsonl)");
  auto* seed_opt = synth->add_option("--seed", seed_value, "Random seed (overrides the config)");

  auto* train_cmd = app.add_subcommand("train", "Train a binary model");
  train_cmd->add_option("--data", data_path, "Dataset file")->required();
  train_flags.attach(*train_cmd, true);
  train_cmd->add_option("--positive-class", positive_class, "Binarize labels one-vs-rest on this class tag");
  train_cmd->add_option("--out", out_path, "Model output")->required();
  train_cmd->add_flag("--verbose", verbose, "Log iter,objective,rank,L,eps_alpha to stderr");

  auto* predict_cmd = app.add_subcommand("predict", "Score images with a trained model");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--images", images_path, "Dataset file; its image records are scored")->required();
  predict_cmd->add_option("--out", out_path, "Predictions CSV output")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--pred", pred_path, "Predictions CSV")->required();
  evaluate_cmd->add_option("--truth", truth_path, "Dataset file with labeled images")->required();

  auto* cv_cmd = app.add_subcommand("crossval", "Select lambda, gamma, C by twofold cross-validation");
  cv_cmd->add_option("--data", data_path, "Dataset file")->required();
  cv_cmd->add_option("--grid", grid_spec, "'default' or a JSON file with lambda/gamma/C arrays")->capture_default_str();
  cv_flags.attach(*cv_cmd, false);
  cv_cmd->add_option("--positive-class", positive_class, "Binarize labels one-vs-rest on this class tag");
  cv_cmd->add_option("--seed", seed_value, "Fold assignment seed");
  cv_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* zs_cmd = app.add_subcommand("zeroshot", "Train a shared transfer matrix for unseen classes");
  zs_cmd->add_option("--data", data_path, "Dataset file with class tags")->required();
  zs_cmd->add_option("--unseen", unseen_list, "Comma-separated unseen class tags")->required();
  zs_flags.attach(*zs_cmd, true);
  zs_cmd->add_option("--out", out_path, "Model output")->required();
  zs_cmd->add_flag("--verbose", verbose, "Log iter,objective,rank,L,eps_alpha to stderr");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (synth->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return run_synth(config_path, out_path, test_out, seed, out);
    }
    if (train_cmd->parsed()) return run_train(data_path, train_flags, positive_class, out_path, verbose, out, err);
    if (predict_cmd->parsed()) return run_predict(model_path, images_path, out_path, out);
    if (evaluate_cmd->parsed()) return run_evaluate(pred_path, truth_path, out);
    if (cv_cmd->parsed()) return run_crossval(data_path, grid_spec, cv_flags, positive_class, seed_value, threads, out);
    if (zs_cmd->parsed()) return run_zeroshot(data_path, unseen_list, zs_flags, out_path, verbose, out, err);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace i2lt::cli
