#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kincall/cdr_ingest.hpp"
#include "kincall/kinclass.hpp"
#include "kincall/phone_hash.hpp"
#include "kincall/registry.hpp"

namespace kincall {

/// Parameters of a synthetic society with two-surname inheritance.
struct SynthConfig {
  std::size_t n_families = 1000;
  int generations = 3;
  double fertility = 2.2;             // mean children per couple (Poisson)
  AgeRange mother_birth_age{22, 38};  // mother's age at each birth
  AgeRange spouse_age_gap{0, 4};      // husband age minus wife age
  AgeRange founder_age{50, 95};       // age of founding wives
  int marriage_age = 22;
  double marriage_rate = 0.85;
  int min_phone_age = 12;
  /// 0 draws fresh tokens for every person entering the population, so each
  /// lineage has a unique surname; otherwise tokens come from a pool of
  /// this size.
  std::size_t surname_pool = 0;
  double coverage = 0.4;              // probability a person is a labeled subscriber
  double family_plan_rate = 0.0;      // covered young adults put on a covered parent's plan
  double base_call_rate = 12.0;       // calls/year on a maintained non-kin dyad
  double kin_rate_multiplier = 4.0;
  double kin_duration_multiplier = 1.0;
  double duration_mean = 90.0;        // seconds, lognormal
  double duration_sd = 80.0;
  double nonkin_degree = 6.0;         // mean non-kin contacts per person
  double nonkin_cross_generation = 0.6;  // share of non-kin contacts one generation up or down
  double grandparent_contact = 0.5;
  double aunt_contact = 0.3;          // aunt/uncle - niece/nephew dyads
  double aunt_preference = 0.0;       // share of egos with a boosted maternal-aunt dyad
  double aunt_preference_boost = 3.0;
  AgeRange boost_ages{25, 40};        // kin dyads whose younger member is in range...
  double age_boost = 1.0;             // ...get this rate multiplier
  int year = 2015;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument for infeasible settings.
  void validate() const;
};

struct Person {
  int age = 0;
  Sex sex = Sex::kFemale;
  std::string ln_p;
  std::string ln_m;
  std::int32_t mother = -1;
  std::int32_t father = -1;
  std::int32_t spouse = -1;
  std::uint32_t family = 0;
  bool has_phone = false;
  bool covered = false;
  std::vector<std::int32_t> children;
};

/// Generated people, indexed by position. Parent/child/spouse links are the
/// ground truth.
struct Population {
  std::vector<Person> people;

  std::vector<std::int32_t> siblings(std::int32_t person) const;
  /// Raw dialable number of a person.
  std::string phone_number(std::int32_t person) const;
};

Population generate_population(const SynthConfig& config);

/// One visible dyad of the generated call stream (both members have phones
/// and at least one is covered).
struct PlannedDyad {
  std::int32_t a = 0;
  std::int32_t b = 0;
  bool kin = false;
  std::uint32_t calls = 0;
};

struct CallCensus {
  std::vector<PlannedDyad> dyads;  // sorted by (a, b)
  std::uint64_t calls = 0;

  std::size_t dyads_with_calls() const;
  std::size_t phones_with_calls() const;
};

/// Emits the call stream in dyad order. Deterministic given the seed.
CallCensus generate_calls(const Population& population, const SynthConfig& config,
                          const std::function<void(const RawCallRecord&)>& sink);
std::vector<RawCallRecord> generate_calls(const Population& population, const SynthConfig& config,
                                          CallCensus* census = nullptr);

/// Operator registry of covered people (pre family-plan resolution).
std::vector<SubscriberRecord> synth_registry(const Population& population, const SynthConfig& config,
                                             const PhoneHasher& hasher);

void write_raw_calls(std::ostream& out, std::span<const RawCallRecord> records, char delim);
/// Streaming form: header then one line per call.
void write_raw_call_header(std::ostream& out, char delim);
void write_raw_call(std::ostream& out, const RawCallRecord& record, char delim);

/// Relations file rows (person, relation, person) with relations mother,
/// father, daughter, son, sister, brother, spouse. People are hashed phones.
void write_ground_truth(std::ostream& out, const Population& population, const PhoneHasher& hasher, char delim);

/// Relative kinds recovered from the relations file, seen from an ego.
enum class TrueRelation : std::uint8_t {
  kMother,
  kFather,
  kChild,
  kSibling,
  kSpouse,
  kMaternalAuntUncle,
  kPaternalAuntUncle,
  kNieceNephew,
  kGrandparent,
  kGrandchild,
  kCousin,
  kUnrelated,
};
std::string_view to_string(TrueRelation relation) noexcept;

class GroundTruth {
 public:
  struct Links {
    std::optional<HashedId> mother;
    std::optional<HashedId> father;
    std::vector<HashedId> daughters;
    std::vector<HashedId> sons;
    std::vector<HashedId> sisters;
    std::vector<HashedId> brothers;
    std::vector<HashedId> spouses;
  };

  static GroundTruth read(std::istream& in, char delim);
  static GroundTruth from_population(const Population& population, const PhoneHasher& hasher);

  const Links* find(const HashedId& person) const noexcept;
  TrueRelation relation(const HashedId& ego, const HashedId& alter) const;
  /// True relatives that would fill the slot exactly (mother, father,
  /// daughters or sons).
  std::vector<HashedId> slot_relatives(const HashedId& ego, Slot slot) const;
  std::size_t size() const noexcept { return links_.size(); }
  /// Everyone in the relations file, sorted.
  std::vector<HashedId> people() const;

 private:
  Links& at(const HashedId& person) { return links_[person]; }
  std::unordered_map<HashedId, Links> links_;
};

struct SlotScore {
  Slot slot = Slot::kMother;
  std::uint64_t kin_labeled = 0;
  std::uint64_t correct = 0;         // alter is the true relative of the slot
  std::uint64_t in_class_misid = 0;  // maternal aunt, paternal uncle, niece or nephew
  std::uint64_t out_of_class = 0;
  double precision = 0.0;
  std::map<std::string, std::uint64_t> breakdown;  // true relation of kin-labeled alters
  std::uint64_t eligible = 0;        // phones having such a relative
  std::uint64_t covered_pairs = 0;   // ego and at least one such relative labeled
  std::uint64_t recovered = 0;
  double recall_covered = 0.0;       // recovered / covered_pairs
  double recall_all = 0.0;           // recovered / eligible, at most covered_pairs / eligible
};

/// Precision of kin labels and recall of true relations, per slot.
std::vector<SlotScore> score_classifier(std::span<const KinAssignment> assignments, const GroundTruth& truth,
                                        const Registry& registry);

void write_scores(std::ostream& out, std::span<const SlotScore> scores, char delim);

}  // namespace kincall
