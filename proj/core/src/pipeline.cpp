#include "kincall/pipeline.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "json.hpp"

#include "kincall/callgraph.hpp"
#include "kincall/cdr_ingest.hpp"
#include "kincall/phone_hash.hpp"
#include "kincall/registry.hpp"
#include "kincall/table_io.hpp"

namespace kincall {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

void check_keys(const json& obj, std::string_view where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void read_range(const json& obj, const char* key, AgeRange& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError(std::string("config key '") + key + "': expected [min, max]");
  }
  out = AgeRange{v[0].get<int>(), v[1].get<int>()};
}

void read_path(const json& obj, const char* key, fs::path& out) {
  std::string s = out.string();
  read(obj, key, s);
  out = s;
}

json range_json(const AgeRange& r) { return json::array({r.min, r.max}); }

std::string delimiter_name(char d) {
  switch (d) {
    case '\t': return "tab";
    case ',': return "comma";
    case ';': return "semicolon";
    case '|': return "pipe";
    default: return std::string(1, d);
  }
}

json synth_json(const SynthConfig& s) {
  return json{
      {"n_families", s.n_families},
      {"generations", s.generations},
      {"fertility", s.fertility},
      {"mother_birth_age", range_json(s.mother_birth_age)},
      {"spouse_age_gap", range_json(s.spouse_age_gap)},
      {"founder_age", range_json(s.founder_age)},
      {"marriage_age", s.marriage_age},
      {"marriage_rate", s.marriage_rate},
      {"min_phone_age", s.min_phone_age},
      {"surname_pool", s.surname_pool},
      {"coverage", s.coverage},
      {"family_plan_rate", s.family_plan_rate},
      {"base_call_rate", s.base_call_rate},
      {"kin_rate_multiplier", s.kin_rate_multiplier},
      {"kin_duration_multiplier", s.kin_duration_multiplier},
      {"duration_mean", s.duration_mean},
      {"duration_sd", s.duration_sd},
      {"nonkin_degree", s.nonkin_degree},
      {"nonkin_cross_generation", s.nonkin_cross_generation},
      {"grandparent_contact", s.grandparent_contact},
      {"aunt_contact", s.aunt_contact},
      {"aunt_preference", s.aunt_preference},
      {"aunt_preference_boost", s.aunt_preference_boost},
      {"boost_ages", range_json(s.boost_ages)},
      {"age_boost", s.age_boost},
  };
}

void parse_synth(const json& j, SynthConfig& s) {
  check_keys(j, "synth",
             {"n_families", "generations", "fertility", "mother_birth_age", "spouse_age_gap", "founder_age",
              "marriage_age", "marriage_rate", "min_phone_age", "surname_pool", "coverage", "family_plan_rate",
              "base_call_rate", "kin_rate_multiplier", "kin_duration_multiplier", "duration_mean", "duration_sd",
              "nonkin_degree", "nonkin_cross_generation", "grandparent_contact", "aunt_contact", "aunt_preference",
              "aunt_preference_boost", "boost_ages", "age_boost"});
  read(j, "n_families", s.n_families);
  read(j, "generations", s.generations);
  read(j, "fertility", s.fertility);
  read_range(j, "mother_birth_age", s.mother_birth_age);
  read_range(j, "spouse_age_gap", s.spouse_age_gap);
  read_range(j, "founder_age", s.founder_age);
  read(j, "marriage_age", s.marriage_age);
  read(j, "marriage_rate", s.marriage_rate);
  read(j, "min_phone_age", s.min_phone_age);
  read(j, "surname_pool", s.surname_pool);
  read(j, "coverage", s.coverage);
  read(j, "family_plan_rate", s.family_plan_rate);
  read(j, "base_call_rate", s.base_call_rate);
  read(j, "kin_rate_multiplier", s.kin_rate_multiplier);
  read(j, "kin_duration_multiplier", s.kin_duration_multiplier);
  read(j, "duration_mean", s.duration_mean);
  read(j, "duration_sd", s.duration_sd);
  read(j, "nonkin_degree", s.nonkin_degree);
  read(j, "nonkin_cross_generation", s.nonkin_cross_generation);
  read(j, "grandparent_contact", s.grandparent_contact);
  read(j, "aunt_contact", s.aunt_contact);
  read(j, "aunt_preference", s.aunt_preference);
  read(j, "aunt_preference_boost", s.aunt_preference_boost);
  read_range(j, "boost_ages", s.boost_ages);
  read(j, "age_boost", s.age_boost);
}

json config_json(const RunConfig& c) {
  return json{
      {"paths",
       {{"cdr", c.paths.cdr.string()},
        {"dyads", c.paths.dyads.string()},
        {"registry", c.paths.registry.string()},
        {"truth", c.paths.truth.string()},
        {"out", c.paths.out.string()}}},
      {"salt", c.salt},
      {"seed", c.seed},
      {"workers", c.workers},
      {"hash_hex_len", c.hash_hex_len},
      {"delimiter", delimiter_name(c.delimiter)},
      {"year", c.year},
      {"slots",
       {{"mother", range_json(c.bounds.mother)},
        {"father", range_json(c.bounds.father)},
        {"child_of_female", range_json(c.bounds.child_of_female)},
        {"child_of_male", range_json(c.bounds.child_of_male)}}},
      {"age_bins", {{"min", c.grid.min_age}, {"max", c.grid.max_age}, {"width", c.grid.width}}},
      {"min_cohort", c.min_cohort},
      {"downsample", c.downsample},
      {"export_metrics", c.export_metrics},
      {"synth", synth_json(c.synth)},
  };
}

SynthConfig effective_synth(const RunConfig& c) {
  SynthConfig s = c.synth;
  s.seed = c.seed;
  s.year = c.year;
  return s;
}

fs::path out_file(const RunConfig& c, const char* name) { return c.paths.out / name; }

void require_input(const fs::path& path, std::string_view what) {
  if (path.empty()) throw std::runtime_error(std::string(what) + " path is not configured");
  if (!fs::is_regular_file(path)) throw std::runtime_error(std::string(what) + " not found: " + path.string());
}

std::ifstream open_input(const fs::path& path, std::string_view what) {
  require_input(path, what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot open ") + std::string(what) + ": " + path.string());
  return in;
}

void prepare(const RunConfig& c) {
  c.validate();
  fs::create_directories(c.paths.out);
}

template <typename WriteFn>
fs::path write_table(const RunConfig& c, const char* name, WriteFn&& fn) {
  const auto path = out_file(c, name);
  AtomicFileWriter writer(path);
  fn(writer.stream());
  writer.commit();
  return path;
}

json input_entry(const fs::path& path) { return json{{"path", path.string()}, {"blake2b", file_digest_hex(path)}}; }

fs::path write_manifest(const RunConfig& c, std::string_view stage, json body) {
  json m;
  m["stage"] = stage;
  m["version"] = kVersion;
  m["seed"] = c.seed;
  m["config"] = config_json(c);
  for (auto& [k, v] : body.items()) m[k] = v;
  const auto path = c.paths.out / (std::string(stage) + ".manifest.json");
  write_file_atomic(path, m.dump(2) + "\n");
  return path;
}

json ingest_report_json(const IngestReport& r) {
  json rejected = json::object();
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    rejected[std::string(to_string(static_cast<RejectReason>(i)))] = r.rejected[i];
  }
  return json{{"records", r.records},
              {"accepted", r.accepted},
              {"accepted_seconds", r.accepted_seconds},
              {"rejected", rejected}};
}

}  // namespace

void RunConfig::validate() const {
  try {
    bounds.validate();
    grid.validate();
    effective_synth(*this).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (salt.empty()) throw ConfigError("salt must not be empty");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (hash_hex_len < 8 || hash_hex_len > 32) throw ConfigError("hash_hex_len must be in [8, 32]");
  if (paths.out.empty()) throw ConfigError("paths.out must not be empty");
  if (delimiter == '\n' || delimiter == '\r') throw ConfigError("bad delimiter");
}

std::string RunConfig::to_json() const { return config_json(*this).dump(2); }

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config does not parse: ") + e.what());
  }
  check_keys(j, "config",
             {"paths", "salt", "seed", "workers", "hash_hex_len", "delimiter", "year", "slots", "age_bins",
              "min_cohort", "downsample", "export_metrics", "synth"});
  RunConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    check_keys(p, "paths", {"cdr", "dyads", "registry", "truth", "out"});
    read_path(p, "cdr", c.paths.cdr);
    read_path(p, "dyads", c.paths.dyads);
    read_path(p, "registry", c.paths.registry);
    read_path(p, "truth", c.paths.truth);
    read_path(p, "out", c.paths.out);
  }
  read(j, "salt", c.salt);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "hash_hex_len", c.hash_hex_len);
  if (j.contains("delimiter")) {
    std::string d;
    read(j, "delimiter", d);
    try {
      c.delimiter = parse_delimiter(d);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "year", c.year);
  if (j.contains("slots")) {
    const auto& s = j.at("slots");
    check_keys(s, "slots", {"mother", "father", "child_of_female", "child_of_male"});
    read_range(s, "mother", c.bounds.mother);
    read_range(s, "father", c.bounds.father);
    read_range(s, "child_of_female", c.bounds.child_of_female);
    read_range(s, "child_of_male", c.bounds.child_of_male);
  }
  if (j.contains("age_bins")) {
    const auto& a = j.at("age_bins");
    check_keys(a, "age_bins", {"min", "max", "width"});
    read(a, "min", c.grid.min_age);
    read(a, "max", c.grid.max_age);
    read(a, "width", c.grid.width);
  }
  read(j, "min_cohort", c.min_cohort);
  read(j, "downsample", c.downsample);
  read(j, "export_metrics", c.export_metrics);
  if (j.contains("synth")) parse_synth(j.at("synth"), c.synth);
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path));
}

std::vector<fs::path> run_ingest(const RunConfig& c) {
  c.validate();
  const PhoneHasher hasher(c.salt, c.hash_hex_len);
  IngestReport report;
  DyadSet dyads;
  json inputs;
  std::string source;
  if (!c.paths.cdr.empty()) {
    auto in = open_input(c.paths.cdr, "cdr");
    fs::create_directories(c.paths.out);
    IngestOptions options;
    options.delimiter = c.delimiter;
    options.workers = c.workers;
    options.window = TimeWindow::calendar_year(c.year);
    dyads = aggregate_stream(in, hasher, options, report);
    inputs["cdr"] = input_entry(c.paths.cdr);
    source = "raw";
  } else if (!c.paths.dyads.empty()) {
    auto in = open_input(c.paths.dyads, "dyads");
    fs::create_directories(c.paths.out);
    dyads = read_dyads(in, c.delimiter, &report);
    inputs["dyads"] = input_entry(c.paths.dyads);
    source = "aggregated";
  } else {
    throw std::runtime_error("ingest needs paths.cdr or paths.dyads");
  }
  std::uint64_t calls = 0;
  std::uint64_t seconds = 0;
  for (const auto& d : dyads) {
    calls += d.calls();
    seconds += d.total_sec;
  }
  std::vector<fs::path> written;
  written.push_back(write_table(c, artifact::kDyads, [&](std::ostream& o) { write_dyads(o, dyads, c.delimiter); }));
  written.push_back(write_manifest(c, "ingest",
                                   json{{"source", source},
                                        {"inputs", inputs},
                                        {"ingest", ingest_report_json(report)},
                                        {"rows", {{artifact::kDyads, dyads.size()}}},
                                        {"calls", calls},
                                        {"seconds", seconds}}));
  return written;
}

std::vector<fs::path> run_classify(const RunConfig& c) {
  c.validate();
  const auto dyad_path = out_file(c, artifact::kDyads);
  auto dyad_in = open_input(dyad_path, "dyads (run ingest first)");
  auto registry_in = open_input(c.paths.registry, "registry");
  fs::create_directories(c.paths.out);

  IngestReport dyad_report;
  auto dyads = read_dyads(dyad_in, c.delimiter, &dyad_report);
  RegistryLoadReport load;
  auto records = read_registry(registry_in, c.delimiter, &load);
  ResolveReport resolve;
  auto resolved = resolve_family_contracts(std::move(records), &resolve);

  std::vector<fs::path> written;
  written.push_back(write_table(c, artifact::kRegistryResolved,
                                [&](std::ostream& o) { write_registry(o, resolved, c.delimiter); }));
  const Registry registry(std::move(resolved));
  const auto graph = CallGraph::build(std::move(dyads), registry);
  ClassifyStats stats;
  const auto assignments = classify_graph(graph, c.bounds, c.workers, &stats);
  const auto confirmation = confirmation_ratio(assignments);
  written.push_back(write_table(c, artifact::kAssignments,
                                [&](std::ostream& o) { write_assignments(o, assignments, c.delimiter); }));
  written.push_back(write_table(c, artifact::kConfirmation,
                                [&](std::ostream& o) { write_confirmation(o, confirmation, c.delimiter); }));
  if (c.export_metrics) {
    written.push_back(
        write_table(c, artifact::kEgoMetrics, [&](std::ostream& o) { write_ego_metrics(o, graph, c.delimiter); }));
  }
  std::size_t kin = 0;
  for (const auto& a : assignments) kin += a.kin() ? 1 : 0;
  written.push_back(write_manifest(
      c, "classify",
      json{{"inputs", {{"dyads", input_entry(dyad_path)}, {"registry", input_entry(c.paths.registry)}}},
           {"registry",
            {{"rows", load.rows},
             {"loaded", load.loaded},
             {"malformed", load.malformed},
             {"coerced_grey", load.coerced_grey},
             {"duplicate_phones", load.duplicate_phones},
             {"family_groups", resolve.family_groups},
             {"family_nulled", resolve.nulled},
             {"family_ties", resolve.ties},
             {"labeled", registry.labeled_count()}}},
           {"graph", {{"nodes", graph.node_count()}, {"edges", graph.edge_count()}}},
           {"classify",
            {{"egos", stats.egos},
             {"skipped_grey", stats.skipped_grey},
             {"assignments", stats.assignments},
             {"kin", kin},
             {"quasi", assignments.size() - kin},
             {"unresolvable", stats.unresolvable},
             {"overlaps", stats.overlaps}}},
           {"rows",
            {{artifact::kRegistryResolved, registry.size()},
             {artifact::kAssignments, assignments.size()},
             {artifact::kConfirmation, confirmation.size()}}}}));
  return written;
}

std::vector<fs::path> run_stats(const RunConfig& c) {
  c.validate();
  const auto path = out_file(c, artifact::kAssignments);
  auto in = open_input(path, "assignments (run classify first)");
  const auto assignments = read_assignments(in, c.delimiter);
  TableConfig tc;
  tc.grid = c.grid;
  tc.min_cohort = c.min_cohort;
  tc.downsample = c.downsample;
  tc.seed = c.seed;
  tc.workers = c.workers;
  const auto tables = build_tables(assignments, tc);

  std::vector<fs::path> written;
  written.push_back(
      write_table(c, artifact::kCurves, [&](std::ostream& o) { write_curves(o, tables.curve_rows, c.delimiter); }));
  written.push_back(
      write_table(c, artifact::kStats, [&](std::ostream& o) { write_stat_table(o, tables.stats, c.delimiter); }));
  written.push_back(write_table(c, artifact::kVariation,
                                [&](std::ostream& o) { write_variation_table(o, tables.variation, c.delimiter); }));
  json short_cohorts = json::array();
  for (const auto& k : tables.balance.quasi_short) {
    short_cohorts.push_back({{"age", k.ego_age}, {"sex", to_string(k.ego_sex)}, {"slot", to_string(k.slot)}});
  }
  written.push_back(write_manifest(
      c, "stats",
      json{{"inputs", {{"assignments", input_entry(path)}}},
           {"variation_test", kVariationTestName},
           {"balance",
            {{"cohorts", tables.balance.cohorts},
             {"downsampled", tables.balance.downsampled},
             {"quasi_removed", tables.balance.quasi_removed},
             {"quasi_short", short_cohorts}}},
           {"omitted", tables.omitted},
           {"rows",
            {{artifact::kAssignments, assignments.size()},
             {artifact::kCurves, tables.curve_rows.size()},
             {artifact::kStats, tables.stats.size()},
             {artifact::kVariation, tables.variation.size()}}}}));
  return written;
}

std::vector<fs::path> run_synth(const RunConfig& c) {
  prepare(c);
  const auto synth = effective_synth(c);
  const auto population = generate_population(synth);
  const PhoneHasher hasher(c.salt, c.hash_hex_len);

  std::vector<fs::path> written;
  CallCensus census;
  written.push_back(write_table(c, artifact::kSynthCdr, [&](std::ostream& o) {
    write_raw_call_header(o, c.delimiter);
    census = generate_calls(population, synth, [&](const RawCallRecord& r) { write_raw_call(o, r, c.delimiter); });
  }));
  const auto registry = synth_registry(population, synth, hasher);
  written.push_back(write_table(c, artifact::kSynthRegistry,
                                [&](std::ostream& o) { write_registry(o, registry, c.delimiter); }));
  written.push_back(write_table(c, artifact::kSynthTruth, [&](std::ostream& o) {
    write_ground_truth(o, population, hasher, c.delimiter);
  }));
  std::size_t phones = 0;
  std::size_t covered = 0;
  for (const auto& p : population.people) {
    phones += p.has_phone ? 1 : 0;
    covered += p.covered ? 1 : 0;
  }
  written.push_back(write_manifest(c, "synth",
                                   json{{"people", population.people.size()},
                                        {"phones", phones},
                                        {"covered", covered},
                                        {"visible_dyads", census.dyads.size()},
                                        {"dyads_with_calls", census.dyads_with_calls()},
                                        {"phones_with_calls", census.phones_with_calls()},
                                        {"rows",
                                         {{artifact::kSynthCdr, census.calls},
                                          {artifact::kSynthRegistry, registry.size()}}}}));
  return written;
}

std::vector<fs::path> run_score(const RunConfig& c) {
  c.validate();
  const auto assignment_path = out_file(c, artifact::kAssignments);
  const auto registry_path = out_file(c, artifact::kRegistryResolved);
  const auto truth_path = c.paths.truth.empty() ? out_file(c, artifact::kSynthTruth) : c.paths.truth;
  auto assignment_in = open_input(assignment_path, "assignments (run classify first)");
  auto registry_in = open_input(registry_path, "resolved registry (run classify first)");
  auto truth_in = open_input(truth_path, "relations file");

  const auto assignments = read_assignments(assignment_in, c.delimiter);
  const Registry registry(read_registry(registry_in, c.delimiter));
  const auto truth = GroundTruth::read(truth_in, c.delimiter);
  const auto scores = score_classifier(assignments, truth, registry);

  std::vector<fs::path> written;
  written.push_back(write_table(c, artifact::kScore, [&](std::ostream& o) { write_scores(o, scores, c.delimiter); }));
  written.push_back(write_manifest(c, "score",
                                   json{{"inputs",
                                         {{"assignments", input_entry(assignment_path)},
                                          {"registry", input_entry(registry_path)},
                                          {"truth", input_entry(truth_path)}}},
                                        {"rows", {{artifact::kScore, scores.size()}}}}));
  return written;
}

std::vector<fs::path> run_all(const RunConfig& config) {
  config.validate();
  RunConfig c = config;
  std::vector<fs::path> written;
  auto append = [&](std::vector<fs::path> more) { written.insert(written.end(), more.begin(), more.end()); };
  const bool have_calls = !c.paths.cdr.empty() || !c.paths.dyads.empty();
  if (!have_calls && c.paths.registry.empty()) {
    append(run_synth(c));
    c.paths.cdr = out_file(c, artifact::kSynthCdr);
    c.paths.registry = out_file(c, artifact::kSynthRegistry);
    c.paths.truth = out_file(c, artifact::kSynthTruth);
  }
  append(run_ingest(c));
  append(run_classify(c));
  append(run_stats(c));
  if (!c.paths.truth.empty()) append(run_score(c));
  return written;
}

}  // namespace kincall
