#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "raga/aligner.hpp"
#include "raga/encoder.hpp"
#include "raga/synthetic.hpp"

namespace raga {

/// Invalid or incomplete run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunPaths {
  std::filesystem::path kg1_triples;
  std::filesystem::path kg2_triples;
  std::filesystem::path seeds;
  std::filesystem::path tests;
  std::filesystem::path kg1_embeddings;
  std::filesystem::path kg2_embeddings;
  std::filesystem::path output_dir = "run";
};

struct RunConfig {
  RunPaths paths;
  /// d_e == 0 means "take the width of the embedding file".
  HyperParams hyper = [] {
    HyperParams h;
    h.d_e = 0;
    return h;
  }();
  Ablation ablation;
  MatchMethod matcher = MatchMethod::Daa;
  std::uint64_t rng_seed = 1;
  int threads = 1;
  SyntheticParams synthetic;
  std::vector<double> seed_ratios;

  /// Checks that the data files exist. Throws ConfigError such as
  /// "seeds not found: <path>".
  void require_data_files() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& c);

}  // namespace raga
