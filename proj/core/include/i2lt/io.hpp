#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "i2lt/model.hpp"
#include "i2lt/synth.hpp"

namespace i2lt::io {

/// Version written into model files; parse_model rejects anything else.
inline constexpr int kModelFormatVersion = 1;

// Dataset files hold one JSON object per line:
//   {"kind":"text","id":"t0","label":1,"class":"pos","features":[...]}
//   {"kind":"image","id":"i0","label":-1,"features":[...]}
//   {"kind":"pair","id":"p0","class":"c2","text_features":[...],"image_features":[...]}
// Blank lines are ignored. "label" and "class" are optional.

/// Throws DataError naming the line for malformed records, dimension drift
/// or duplicate ids.
TrainingData parse_dataset(std::istream& in);
TrainingData read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const TrainingData& data);
/// Only "image" records, e.g. a held-out test split.
void write_images(std::ostream& out, const std::vector<CorpusExample>& images);

std::string serialize_model(const TrainedModel& model);
/// Throws DataError on malformed input or an unknown format_version.
TrainedModel parse_model(std::string_view text);

struct Prediction {
  std::string id;
  std::string class_id;  // "-" for binary models
  double score = 0.0;
  int label = -1;
};

/// CSV with header `id,class,score,label`.
void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);
std::vector<Prediction> parse_predictions(std::istream& in);

/// JSON object with any subset of the SynthConfig field names.
eval::SynthConfig parse_synth_config(std::string_view text);

/// `pairs_count,error_rate` CSV for pairs-count sweeps.
void write_sweep_csv(std::ostream& out, const std::vector<std::pair<std::size_t, double>>& rows);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace i2lt::io
