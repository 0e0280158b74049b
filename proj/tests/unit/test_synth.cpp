#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "kincall/lifecourse.hpp"
#include "kincall/synth.hpp"
#include "support/world.hpp"

using namespace kincall;
using kincall::testing::run_world;

namespace {

SynthConfig small(std::size_t families = 150, std::uint64_t seed = 3) {
  SynthConfig c;
  c.n_families = families;
  c.seed = seed;
  return c;
}

std::string cdr_text(const Population& pop, const SynthConfig& c) {
  std::ostringstream out;
  write_raw_calls(out, generate_calls(pop, c), '\t');
  return out.str();
}

std::string registry_text(const Population& pop, const SynthConfig& c) {
  std::ostringstream out;
  write_registry(out, synth_registry(pop, c, PhoneHasher("kincall")), '\t');
  return out.str();
}

struct RateMoments {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

RateMoments moments(const CallCensus& census, bool kin) {
  std::vector<double> v;
  for (const auto& d : census.dyads) {
    if (d.kin == kin) v.push_back(d.calls);
  }
  RateMoments m;
  m.n = v.size();
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return m;
}

}  // namespace

TEST(SynthPopulation, SurnameRuleForEveryChild) {
  for (std::size_t pool : {std::size_t{0}, std::size_t{5}}) {
    auto c = small(300);
    c.surname_pool = pool;
    const auto pop = generate_population(c);
    std::size_t children = 0;
    for (const auto& p : pop.people) {
      if (p.mother < 0) continue;
      ++children;
      ASSERT_GE(p.father, 0);
      EXPECT_EQ(p.ln_p, pop.people[static_cast<std::size_t>(p.father)].ln_p);
      EXPECT_EQ(p.ln_m, pop.people[static_cast<std::size_t>(p.mother)].ln_p);
    }
    EXPECT_GT(children, 300u);
  }
}

TEST(SynthPopulation, FullSiblingsShareBothTokens) {
  const auto pop = generate_population(small());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(pop.people.size()); ++i) {
    for (auto s : pop.siblings(i)) {
      EXPECT_EQ(pop.people[static_cast<std::size_t>(i)].ln_p, pop.people[static_cast<std::size_t>(s)].ln_p);
      EXPECT_EQ(pop.people[static_cast<std::size_t>(i)].ln_m, pop.people[static_cast<std::size_t>(s)].ln_m);
    }
  }
}

TEST(SynthPopulation, UniqueLineageTokens) {
  const auto pop = generate_population(small());
  // Founders and married-in spouses each bring two tokens nobody else was born with.
  std::set<std::string> seen;
  for (const auto& p : pop.people) {
    if (p.mother >= 0) continue;
    EXPECT_TRUE(seen.insert(p.ln_p).second);
    EXPECT_TRUE(seen.insert(p.ln_m).second);
  }
}

TEST(SynthPopulation, AgesConsistentWithBirthModel) {
  const auto c = small();
  const auto pop = generate_population(c);
  for (const auto& p : pop.people) {
    EXPECT_GE(p.age, 0);
    EXPECT_LE(p.age, kMaxAge);
    if (p.mother < 0) continue;
    const int gap = pop.people[static_cast<std::size_t>(p.mother)].age - p.age;
    EXPECT_GE(gap, c.mother_birth_age.min);
    EXPECT_LE(gap, c.mother_birth_age.max);
    EXPECT_EQ(p.has_phone, p.age >= c.min_phone_age);
  }
}

TEST(SynthPopulation, InfeasibleConfigsThrow) {
  auto c = small();
  c.generations = 0;
  EXPECT_THROW(generate_population(c), std::invalid_argument);
  c = small();
  c.n_families = 0;
  EXPECT_THROW(generate_population(c), std::invalid_argument);
  c = small();
  c.coverage = 0.0;
  EXPECT_THROW(generate_population(c), std::invalid_argument);
  c = small();
  c.mother_birth_age = {40, 20};
  EXPECT_THROW(generate_population(c), std::invalid_argument);
  c = small();
  c.aunt_preference = 1.5;
  EXPECT_THROW(generate_population(c), std::invalid_argument);
}

TEST(SynthCalls, SameSeedByteIdentical) {
  const auto c = small(120, 9);
  const auto p1 = generate_population(c);
  const auto p2 = generate_population(c);
  EXPECT_EQ(cdr_text(p1, c), cdr_text(p2, c));
  EXPECT_EQ(registry_text(p1, c), registry_text(p2, c));
  auto other = c;
  other.seed = 10;
  EXPECT_NE(cdr_text(generate_population(other), other), cdr_text(p1, c));
}

TEST(SynthCalls, ZeroBaseRateIsEmpty) {
  auto c = small();
  c.base_call_rate = 0.0;
  CallCensus census;
  const auto calls = generate_calls(generate_population(c), c, &census);
  EXPECT_TRUE(calls.empty());
  EXPECT_EQ(census.calls, 0u);
}

TEST(SynthCalls, UnitMultiplierEqualRates) {
  auto c = small(600, 4);
  c.kin_rate_multiplier = 1.0;
  CallCensus census;
  generate_calls(generate_population(c), c, &census);
  const auto kin = moments(census, true);
  const auto non = moments(census, false);
  ASSERT_GT(kin.n, 1000u);
  ASSERT_GT(non.n, 1000u);
  EXPECT_LE(std::abs(kin.mean - non.mean), 3.0 * std::hypot(kin.se, non.se));
}

TEST(SynthCalls, KinMultiplierScalesRate) {
  auto c = small(600, 4);
  CallCensus census;
  generate_calls(generate_population(c), c, &census);
  const double ratio = moments(census, true).mean / moments(census, false).mean;
  EXPECT_NEAR(ratio, c.kin_rate_multiplier, 0.1);
}

TEST(SynthCalls, StreamMatchesCensus) {
  const auto c = small();
  const auto pop = generate_population(c);
  CallCensus census;
  const auto calls = generate_calls(pop, c, &census);
  EXPECT_EQ(calls.size(), census.calls);
  const auto window = TimeWindow::calendar_year(c.year);
  for (const auto& r : calls) {
    EXPECT_TRUE(window.contains(r.timestamp));
    EXPECT_GE(r.duration_sec, 1);
    EXPECT_NE(r.origin, r.destination);
  }
  // Every visible dyad has at least one covered member with a phone.
  for (const auto& d : census.dyads) {
    const auto& a = pop.people[static_cast<std::size_t>(d.a)];
    const auto& b = pop.people[static_cast<std::size_t>(d.b)];
    EXPECT_TRUE(a.has_phone && b.has_phone);
    EXPECT_TRUE(a.covered || b.covered);
  }
}

TEST(SynthCalls, EgoAltersMatchCensus) {
  const auto c = small(100, 5);
  const auto w = run_world(c);
  const PhoneHasher hasher("kincall");
  std::set<std::pair<HashedId, HashedId>> planned;
  for (const auto& d : w.census.dyads) {
    if (d.calls == 0) continue;
    auto a = hasher.hash(w.population.phone_number(d.a)).value();
    auto b = hasher.hash(w.population.phone_number(d.b)).value();
    if (b < a) std::swap(a, b);
    planned.emplace(a, b);
  }
  std::set<std::pair<HashedId, HashedId>> ingested;
  for (const auto& d : w.dyads) ingested.emplace(d.phone_a, d.phone_b);
  EXPECT_EQ(planned, ingested);
  EXPECT_EQ(w.ingest.accepted, w.census.calls);
}

TEST(SynthRegistry, FamilyPlansResolveToParent) {
  auto c = small(300, 6);
  c.family_plan_rate = 1.0;
  const auto pop = generate_population(c);
  const auto records = synth_registry(pop, c, PhoneHasher("kincall"));
  std::size_t family = 0;
  for (const auto& r : records) family += r.contract == ContractType::kFamily;
  ASSERT_GT(family, 0u);
  ResolveReport report;
  const Registry reg(resolve_family_contracts(records, &report));
  EXPECT_GT(report.nulled, 0u);
  EXPECT_EQ(report.ties, 0u);
  EXPECT_EQ(reg.labeled_count() + report.nulled, records.size());
}

TEST(GroundTruthFile, RoundTrip) {
  const auto c = small(80);
  const auto pop = generate_population(c);
  const PhoneHasher hasher("kincall");
  std::ostringstream out;
  write_ground_truth(out, pop, hasher, '\t');
  std::istringstream in(out.str());
  const auto read = GroundTruth::read(in, '\t');
  const auto direct = GroundTruth::from_population(pop, hasher);
  EXPECT_EQ(read.size(), direct.size());
  EXPECT_EQ(read.people(), direct.people());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(pop.people.size()); ++i) {
    const auto& p = pop.people[static_cast<std::size_t>(i)];
    if (!p.has_phone || p.mother < 0) continue;
    const auto& m = pop.people[static_cast<std::size_t>(p.mother)];
    if (!m.has_phone) continue;
    const auto ego = hasher.hash(pop.phone_number(i)).value();
    const auto mom = hasher.hash(pop.phone_number(p.mother)).value();
    EXPECT_EQ(read.relation(ego, mom), TrueRelation::kMother);
    EXPECT_EQ(read.relation(mom, ego), TrueRelation::kChild);
  }
}

TEST(Scoring, UniqueSurnamesNoOutOfClass) {
  const auto c = small(300, 8);
  const auto w = run_world(c);
  const auto truth = GroundTruth::from_population(w.population, PhoneHasher("kincall"));
  const auto scores = score_classifier(w.assignments, truth, w.registry);
  std::uint64_t labeled = 0;
  for (const auto& s : scores) {
    labeled += s.kin_labeled;
    EXPECT_EQ(s.out_of_class, 0u) << to_string(s.slot);
    EXPECT_EQ(s.correct + s.in_class_misid, s.kin_labeled);
  }
  EXPECT_GT(labeled, 100u);
}

TEST(Scoring, TopOlderFemaleIsMotherGivesPrecisionOne) {
  auto c = small(300, 8);
  c.aunt_contact = 0.0;
  const auto w = run_world(c);
  const auto truth = GroundTruth::from_population(w.population, PhoneHasher("kincall"));
  const auto mother = score_classifier(w.assignments, truth, w.registry)[0];
  ASSERT_EQ(mother.slot, Slot::kMother);
  ASSERT_GT(mother.kin_labeled, 50u);
  EXPECT_EQ(mother.precision, 1.0);
}

TEST(Scoring, AuntPreferenceShortfallIsMaternalAunt) {
  auto c = small(600, 8);
  c.aunt_contact = 0.0;
  c.aunt_preference = 0.2;
  const auto w = run_world(c);
  const auto truth = GroundTruth::from_population(w.population, PhoneHasher("kincall"));
  const auto mother = score_classifier(w.assignments, truth, w.registry)[0];
  EXPECT_LT(mother.precision, 1.0);
  EXPECT_GT(mother.breakdown.at("maternal_aunt"), 0u);
  for (const auto& [name, count] : mother.breakdown) {
    EXPECT_TRUE(name == "mother" || name == "maternal_aunt") << name;
  }
  EXPECT_EQ(mother.kin_labeled - mother.correct, mother.breakdown.at("maternal_aunt"));
}

TEST(Scoring, RecallRespectsCoverageBound) {
  const auto c = small(400, 12);
  const auto w = run_world(c);
  const auto truth = GroundTruth::from_population(w.population, PhoneHasher("kincall"));
  for (const auto& s : score_classifier(w.assignments, truth, w.registry)) {
    ASSERT_GT(s.eligible, 0u);
    const double bound = static_cast<double>(s.covered_pairs) / static_cast<double>(s.eligible);
    EXPECT_LE(s.recall_all, bound);
    EXPECT_LE(s.recovered, s.covered_pairs);
    EXPECT_LT(bound, 1.0);
  }
}

TEST(Scoring, PipelineFrequencyRatioTracksMultiplier) {
  auto c = small(1500, 21);
  c.kin_rate_multiplier = 4.0;
  const auto w = run_world(c);
  TableConfig tc;
  tc.seed = 21;
  const auto tables = build_tables(w.assignments, tc);
  double kin = 0.0;
  double quasi = 0.0;
  std::size_t nk = 0;
  std::size_t nq = 0;
  for (const auto& s : tables.stats) {
    if (s.metric != Metric::kFrequency) continue;
    kin += s.kin_mean * static_cast<double>(s.n_kin);
    quasi += s.quasi_mean * static_cast<double>(s.n_quasi);
    nk += s.n_kin;
    nq += s.n_quasi;
  }
  ASSERT_GT(nk, 0u);
  ASSERT_GT(nq, 0u);
  const double ratio = (kin / static_cast<double>(nk)) / (quasi / static_cast<double>(nq));
  EXPECT_NEAR(ratio, 4.0, 0.6) << "kin/quasi Frequency ratio " << ratio;
}

// No aunt or uncle dyads and few non-kin ties: quasi alters are plain non-kin.
TEST(Scoring, FrequencyRatioWithoutQuasiRelatives) {
  auto c = small(1500, 21);
  c.kin_rate_multiplier = 4.0;
  c.nonkin_degree = 2.0;
  c.aunt_contact = 0.0;
  const auto w = run_world(c);
  TableConfig tc;
  tc.seed = 21;
  const auto tables = build_tables(w.assignments, tc);
  double kin = 0.0;
  double quasi = 0.0;
  std::size_t nk = 0;
  std::size_t nq = 0;
  for (const auto& s : tables.stats) {
    if (s.metric != Metric::kFrequency) continue;
    kin += s.kin_mean * static_cast<double>(s.n_kin);
    quasi += s.quasi_mean * static_cast<double>(s.n_quasi);
    nk += s.n_kin;
    nq += s.n_quasi;
  }
  const double ratio = (kin / static_cast<double>(nk)) / (quasi / static_cast<double>(nq));
  EXPECT_NEAR(ratio, 4.0, 0.6) << "kin/quasi Frequency ratio " << ratio;
}
