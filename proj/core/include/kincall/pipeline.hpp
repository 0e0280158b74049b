#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kincall/kinclass.hpp"
#include "kincall/lifecourse.hpp"
#include "kincall/synth.hpp"

namespace kincall {

/// Raised for a config that does not parse or validate. Stages throw it
/// before touching the output directory.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "KINCALL_CONFIG";

struct RunPaths {
  std::filesystem::path cdr;       // raw call records
  std::filesystem::path dyads;     // pre-aggregated dyads, used when cdr is empty
  std::filesystem::path registry;
  std::filesystem::path truth;     // relations file for scoring
  std::filesystem::path out = "kincall_out";
};

struct RunConfig {
  RunPaths paths;
  std::string salt = "kincall";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t hash_hex_len = 20;
  char delimiter = '\t';
  int year = 2015;  // observation window
  SlotBounds bounds;
  AgeGrid grid;
  std::size_t min_cohort = 30;
  bool downsample = true;
  bool export_metrics = false;  // also write ego_metrics.tsv
  SynthConfig synth;             // its seed is taken from `seed`

  /// Throws ConfigError.
  void validate() const;
  /// Effective config as pretty-printed JSON.
  std::string to_json() const;
};

/// Parses a JSON config; missing keys keep their defaults, unknown keys are
/// errors. Throws ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// File names inside the output directory.
namespace artifact {
inline constexpr const char* kDyads = "dyads.tsv";
inline constexpr const char* kRegistryResolved = "registry_resolved.tsv";
inline constexpr const char* kAssignments = "assignments.tsv";
inline constexpr const char* kConfirmation = "confirmation.tsv";
inline constexpr const char* kEgoMetrics = "ego_metrics.tsv";
inline constexpr const char* kCurves = "curves.tsv";
inline constexpr const char* kStats = "stats.tsv";
inline constexpr const char* kVariation = "variation.tsv";
inline constexpr const char* kScore = "score.tsv";
inline constexpr const char* kSynthCdr = "synth_cdr.tsv";
inline constexpr const char* kSynthRegistry = "synth_registry.tsv";
inline constexpr const char* kSynthTruth = "synth_truth.tsv";
}  // namespace artifact

/// Each stage writes its artifacts atomically plus `<stage>.manifest.json`
/// and returns the paths written. Errors are thrown as exceptions.
std::vector<std::filesystem::path> run_ingest(const RunConfig& config);
std::vector<std::filesystem::path> run_classify(const RunConfig& config);
std::vector<std::filesystem::path> run_stats(const RunConfig& config);
std::vector<std::filesystem::path> run_synth(const RunConfig& config);
std::vector<std::filesystem::path> run_score(const RunConfig& config);

/// ingest, classify, stats and, when a relations file is known, score.
/// Without cdr/dyads and registry inputs a synthetic world is generated
/// first and used as input.
std::vector<std::filesystem::path> run_all(const RunConfig& config);

}  // namespace kincall
