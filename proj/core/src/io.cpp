#include "i2lt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "i2lt/errors.hpp"

namespace i2lt::io {

using nlohmann::json;

namespace {

FeatureVector read_features(const json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_array()) throw DataError(std::string("missing array field '") + key + "'");
  FeatureVector out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw DataError(std::string("non-numeric entry in '") + key + "'");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DataError(std::string("non-finite entry in '") + key + "'");
    out.push_back(d);
  }
  return out;
}

std::string read_string(const json& rec, const char* key, bool required) {
  const auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) {
    if (required) throw DataError(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

int read_label(const json& rec) {
  const auto it = rec.find("label");
  if (it == rec.end() || it->is_null()) return 0;
  if (!it->is_number_integer()) throw DataError("field 'label' must be an integer");
  return it->get<int>();
}

json example_json(const char* kind, const CorpusExample& ex) {
  json j = {{"kind", kind}, {"id", ex.id}};
  if (ex.label != 0) j["label"] = ex.label;
  if (!ex.class_id.empty()) j["class"] = ex.class_id;
  j["features"] = ex.features;
  return j;
}

CorpusExample example_from_json(const json& rec) {
  CorpusExample ex;
  ex.id = read_string(rec, "id", true);
  ex.label = read_label(rec);
  ex.class_id = read_string(rec, "class", false);
  ex.features = read_features(rec, "features");
  return ex;
}

// Tracks the first dimension seen for one feature slot.
struct DimTracker {
  const char* name;
  std::size_t dim = 0;
  std::size_t line = 0;

  void check(std::size_t got, std::size_t at_line) {
    if (line == 0) {
      dim = got;
      line = at_line;
    } else if (got != dim) {
      throw DataError(std::string(name) + " features have dimension " + std::to_string(got) + ", expected " +
                      std::to_string(dim) + " (established at line " + std::to_string(line) + ")");
    }
  }
};

json hyper_json(const Hyperparameters& h) {
  json j = {{"gamma", h.gamma},           {"lambda", h.lambda}, {"C", h.cap_c},
            {"kernel", to_string(h.kernel)}, {"normalize", h.normalize}, {"max_iter", h.max_iter},
            {"tol", h.tol},               {"L0", h.lipschitz0}, {"eta", h.eta},
            {"eps_alpha0", h.eps_alpha0}};
  j["bandwidth"] = h.bandwidth ? json(*h.bandwidth) : json(nullptr);
  return j;
}

Hyperparameters hyper_from_json(const json& j) {
  Hyperparameters h;
  h.gamma = j.at("gamma").get<double>();
  h.lambda = j.at("lambda").get<double>();
  h.cap_c = j.at("C").get<double>();
  h.kernel = parse_kernel_kind(j.at("kernel").get<std::string>());
  if (!j.at("bandwidth").is_null()) h.bandwidth = j.at("bandwidth").get<double>();
  h.normalize = j.at("normalize").get<bool>();
  h.max_iter = j.at("max_iter").get<std::size_t>();
  h.tol = j.at("tol").get<double>();
  h.lipschitz0 = j.at("L0").get<double>();
  h.eta = j.at("eta").get<double>();
  h.eps_alpha0 = j.at("eps_alpha0").get<double>();
  return h;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TrainingData parse_dataset(std::istream& in) {
  TrainingData data;
  DimTracker text_dim{"text"};
  DimTracker image_dim{"image"};
  std::map<std::string, std::set<std::string>> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed record: ") + e.what());
      }
      if (!rec.is_object()) throw DataError("record is not a JSON object");
      const std::string kind = read_string(rec, "kind", true);
      std::string id;
      if (kind == "text" || kind == "image") {
        CorpusExample ex = example_from_json(rec);
        (kind == "text" ? text_dim : image_dim).check(ex.features.size(), lineno);
        id = ex.id;
        (kind == "text" ? data.texts : data.images).push_back(std::move(ex));
      } else if (kind == "pair") {
        CooccurrencePair pr;
        pr.id = read_string(rec, "id", false);
        pr.class_id = read_string(rec, "class", false);
        pr.text_features = read_features(rec, "text_features");
        pr.image_features = read_features(rec, "image_features");
        text_dim.check(pr.text_features.size(), lineno);
        image_dim.check(pr.image_features.size(), lineno);
        id = pr.id;
        data.pairs.push_back(std::move(pr));
      } else {
        throw DataError("unknown record kind '" + kind + "'");
      }
      if (!id.empty() && !ids[kind].insert(id).second) throw DataError("duplicate " + kind + " id '" + id + "'");
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return data;
}

TrainingData read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  try {
    return parse_dataset(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_dataset(std::ostream& out, const TrainingData& data) {
  for (const auto& t : data.texts) out << example_json("text", t).dump() << '\n';
  for (const auto& im : data.images) out << example_json("image", im).dump() << '\n';
  for (const auto& pr : data.pairs) {
    json j = {{"kind", "pair"}};
    if (!pr.id.empty()) j["id"] = pr.id;
    if (!pr.class_id.empty()) j["class"] = pr.class_id;
    j["text_features"] = pr.text_features;
    j["image_features"] = pr.image_features;
    out << j.dump() << '\n';
  }
}

void write_images(std::ostream& out, const std::vector<CorpusExample>& images) {
  for (const auto& im : images) out << example_json("image", im).dump() << '\n';
}

std::string serialize_model(const TrainedModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["mode"] = model.mode == ModelMode::binary ? "binary" : "zeroshot";
  j["p"] = model.text_dim();
  j["q"] = model.image_dim();
  j["S"] = model.S.matrix().storage();
  j["alpha"] = model.alpha;
  j["kernel"] = {{"kind", to_string(model.kernel.kind)}, {"bandwidth", model.kernel.bandwidth}};
  j["normalize"] = model.normalized;
  json texts = json::array();
  for (const auto& t : model.source_texts) texts.push_back(example_json("text", t));
  j["source_texts"] = std::move(texts);
  json images = json::array();
  for (const auto& im : model.train_images) images.push_back(example_json("image", im));
  j["train_images"] = std::move(images);
  j["unseen_classes"] = model.unseen_classes;
  j["hyper"] = hyper_json(model.hyper);
  j["final_objective"] = model.final_objective;
  return j.dump() + "\n";
}

TrainedModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model: malformed file: ") + e.what());
  }
  try {
    if (!j.is_object()) throw DataError("model: not a JSON object");
    const auto version = j.at("format_version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
      throw DataError("model: unsupported format_version " + version.dump() + " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    TrainedModel m;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "binary") {
      m.mode = ModelMode::binary;
    } else if (mode == "zeroshot") {
      m.mode = ModelMode::zeroshot;
    } else {
      throw DataError("model: unknown mode '" + mode + "'");
    }
    const auto p = j.at("p").get<std::size_t>();
    const auto q = j.at("q").get<std::size_t>();
    auto entries = j.at("S").get<std::vector<double>>();
    if (entries.size() != p * q) throw DataError("model: S has " + std::to_string(entries.size()) + " entries, expected p*q");
    m.S = TransferMatrix(DenseMatrix(p, q, std::move(entries)));
    m.alpha = j.at("alpha").get<std::vector<double>>();
    m.kernel.kind = parse_kernel_kind(j.at("kernel").at("kind").get<std::string>());
    m.kernel.bandwidth = j.at("kernel").at("bandwidth").get<double>();
    m.normalized = j.at("normalize").get<bool>();
    for (const auto& t : j.at("source_texts")) m.source_texts.push_back(example_from_json(t));
    for (const auto& im : j.at("train_images")) m.train_images.push_back(example_from_json(im));
    m.unseen_classes = j.at("unseen_classes").get<std::vector<std::string>>();
    m.hyper = hyper_from_json(j.at("hyper"));
    m.final_objective = j.at("final_objective").get<double>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
  out << "id,class,score,label\n";
  for (const auto& p : preds) out << p.id << ',' << p.class_id << ',' << fmt17(p.score) << ',' << p.label << '\n';
}

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("id,class,score,label", 0) != 0) throw DataError("predictions: missing header");
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DataError("predictions line " + std::to_string(lineno) + ": expected 4 columns");
    try {
      Prediction p{cells[0], cells[1], std::stod(cells[2]), std::stoi(cells[3])};
      if (p.label != 1 && p.label != -1) throw DataError("label must be +1 or -1");
      out.push_back(std::move(p));
    } catch (const std::logic_error&) {
      throw DataError("predictions line " + std::to_string(lineno) + ": bad number");
    } catch (const DataError& e) {
      throw DataError("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (lineno == 0) throw DataError("predictions: empty file");
  return out;
}

eval::SynthConfig parse_synth_config(std::string_view text) {
  eval::SynthConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw DataError("synth config: not a JSON object");
    static const std::set<std::string> known = {"p",       "q",      "r_true",  "n_texts",     "m_images",
                                                "n_test",  "l_pairs", "classes", "noise_sigma", "seed"};
    for (const auto& [key, _] : j.items())
      if (!known.contains(key)) throw DataError("synth config: unknown field '" + key + "'");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("p", cfg.p);
    get("q", cfg.q);
    get("r_true", cfg.r_true);
    get("n_texts", cfg.n_texts);
    get("m_images", cfg.m_images);
    get("n_test", cfg.n_test);
    get("l_pairs", cfg.l_pairs);
    get("classes", cfg.classes);
    get("noise_sigma", cfg.noise_sigma);
    get("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw DataError(std::string("synth config: ") + e.what());
  }
  return cfg;
}

void write_sweep_csv(std::ostream& out, const std::vector<std::pair<std::size_t, double>>& rows) {
  out << "pairs_count,error_rate\n";
  for (const auto& [count, err] : rows) out << count << ',' << fmt17(err) << '\n';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace i2lt::io
