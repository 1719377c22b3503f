#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingergan/dataset.hpp"
#include "fingergan/evaluation.hpp"
#include "fingergan/inference.hpp"
#include "fingergan/training.hpp"

namespace fingergan::config {

/// Raised for unknown keys, unparsable values and values that violate a
/// module invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Merged view of every module configuration. `seed` feeds both the data
/// synthesis and the training streams.
struct RunConfig {
  std::uint64_t seed = 0;
  dataset::SynthConfig synth;
  training::TrainConfig train;
  inference::InferenceConfig inference;
  tv::TVConfig enhance_tv;  ///< decomposition applied by `enhance --decompose`
  evaluation::MatchTolerance match;
  evaluation::SimilarityConfig similarity;

  /// Copies `seed` into the module configs and runs every module validator.
  void validate();
};

/// Keys in dump order, e.g. "train.eta".
const std::vector<std::string>& keys();
/// Environment variable read for `key`: "FGAN_" + upper-case key with '.'
/// replaced by '_' ("train.eta" -> "FGAN_TRAIN_ETA").
std::string env_name(const std::string& key);

void set(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get(const RunConfig& cfg, const std::string& key);

/// Applies "key=value" lines. Blank lines and lines whose first character is
/// '#' are skipped; whitespace around keys and values is trimmed. `source`
/// names the origin in error messages.
void apply_text(RunConfig& cfg, const std::string& text, const std::string& source);
void apply_file(RunConfig& cfg, const std::filesystem::path& path);
/// Applies every key whose environment variable is set, as reported by `lookup`.
void apply_env(RunConfig& cfg, const std::function<std::optional<std::string>(const std::string&)>& lookup);
/// The process environment.
std::optional<std::string> process_env(const std::string& name);

/// Every key as "key=value", one per line, in keys() order. Reals are
/// written with 17 significant digits so apply_text(dump(c)) reproduces c.
std::string dump(const RunConfig& cfg);

}  // namespace fingergan::config
