// kincall: kin detection in call-detail records.
//
//   kincall <ingest|classify|stats|synth|score|all> [--config FILE] [--out DIR]
//           [--seed N] [--workers N] [--min-cohort N]
//
// Without --config the file named by $KINCALL_CONFIG is used, and without
// either the built-in defaults apply. Flags override config values.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kincall/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::size_t> min_cohort;
};

kincall::RunConfig effective_config(const Overrides& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kincall::kConfigEnvVar); env && *env) path = env;
  }
  kincall::RunConfig config = path.empty() ? kincall::RunConfig{} : kincall::load_config(path);
  if (!o.out.empty()) config.paths.out = o.out;
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  if (o.min_cohort) config.min_cohort = *o.min_cohort;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kin detection and life-course statistics for call-detail records"};
  app.require_subcommand(1);
  Overrides overrides;
  app.add_option("--config", overrides.config, "JSON config (default: $KINCALL_CONFIG)");
  app.add_option("--out", overrides.out, "Output directory");
  app.add_option("--seed", overrides.seed, "Seed for downsampling and synthesis");
  app.add_option("--workers", overrides.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--min-cohort", overrides.min_cohort, "Minimum group size per age bin");

  using Stage = std::function<std::vector<std::filesystem::path>(const kincall::RunConfig&)>;
  const std::map<std::string, std::pair<Stage, std::string>> stages = {
      {"ingest", {kincall::run_ingest, "Aggregate raw CDRs into dyads"}},
      {"classify", {kincall::run_classify, "Resolve the registry and label kin / quasi-kin"}},
      {"stats", {kincall::run_stats, "Life-course curves and two-sample tables"}},
      {"synth", {kincall::run_synth, "Generate a synthetic world"}},
      {"score", {kincall::run_score, "Score assignments against a relations file"}},
      {"all", {kincall::run_all, "Run every stage"}},
  };
  for (const auto& [name, stage] : stages) app.add_subcommand(name, stage.second)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  kincall::RunConfig config;
  try {
    config = effective_config(overrides);
  } catch (const std::exception& e) {
    std::cerr << "kincall: config error: " << e.what() << '\n';
    return 2;
  }
  for (const auto& [name, stage] : stages) {
    if (!app.got_subcommand(name)) continue;
    try {
      for (const auto& path : stage.first(config)) std::cout << path.string() << '\n';
    } catch (const kincall::ConfigError& e) {
      std::cerr << "kincall: config error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "kincall " << name << ": " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
