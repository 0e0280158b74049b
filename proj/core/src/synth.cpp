#include "kincall/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "kincall/table_io.hpp"

namespace kincall {
namespace {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(splitmix64(seed ^ splitmix64(stream))); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return p > 0.0 && std::bernoulli_distribution(std::min(p, 1.0))(rng); }

class SurnameSource {
 public:
  SurnameSource(std::size_t pool, Rng& rng) : pool_(pool), rng_(rng) {}
  std::string next() {
    char buf[24];
    if (pool_ == 0) {
      std::snprintf(buf, sizeof buf, "L%07zu", counter_++);
    } else {
      std::snprintf(buf, sizeof buf, "P%05zu", std::uniform_int_distribution<std::size_t>(0, pool_ - 1)(rng_));
    }
    return buf;
  }

 private:
  std::size_t pool_;
  Rng& rng_;
  std::size_t counter_ = 0;
};

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::uint64_t pair_key(std::int32_t a, std::int32_t b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct DyadPlan {
  bool kin = false;
  double rate_multiplier = 1.0;
};

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("synth config: ") + what); };
  if (n_families == 0) fail("n_families must be positive");
  if (generations < 1) fail("generations must be at least 1");
  if (!(fertility >= 0.0)) fail("fertility must be >= 0");
  if (!(coverage > 0.0 && coverage <= 1.0)) fail("coverage must be in (0, 1]");
  if (!(kin_rate_multiplier >= 0.0)) fail("kin_rate_multiplier must be >= 0");
  if (!(base_call_rate >= 0.0)) fail("base_call_rate must be >= 0");
  if (!(kin_duration_multiplier > 0.0)) fail("kin_duration_multiplier must be > 0");
  if (!(duration_mean > 0.0) || !(duration_sd >= 0.0)) fail("duration model needs mean > 0 and sd >= 0");
  if (mother_birth_age.min > mother_birth_age.max || mother_birth_age.min < 10) fail("bad mother_birth_age");
  if (spouse_age_gap.min > spouse_age_gap.max) fail("bad spouse_age_gap");
  if (founder_age.min > founder_age.max || founder_age.min < 0 || founder_age.max > kMaxAge) fail("bad founder_age");
  if (boost_ages.min > boost_ages.max) fail("bad boost_ages");
  if (min_phone_age < 0 || min_phone_age > kMaxAge) fail("bad min_phone_age");
  if (!(nonkin_degree >= 0.0)) fail("nonkin_degree must be >= 0");
  for (double p : {marriage_rate, family_plan_rate, grandparent_contact, aunt_contact, aunt_preference,
                   nonkin_cross_generation}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must be in [0, 1]");
  }
  if (!(aunt_preference_boost > 0.0) || !(age_boost >= 0.0)) fail("multipliers must be positive");
  if (year < 1971 || year > 9998) fail("bad year");
}

std::vector<std::int32_t> Population::siblings(std::int32_t person) const {
  std::vector<std::int32_t> out;
  const auto& p = people.at(static_cast<std::size_t>(person));
  const std::int32_t parent = p.mother >= 0 ? p.mother : p.father;
  if (parent < 0) return out;
  for (auto c : people[static_cast<std::size_t>(parent)].children) {
    if (c != person) out.push_back(c);
  }
  return out;
}

std::string Population::phone_number(std::int32_t person) const {
  // 7919 is coprime with 10^8, so the mapping is a bijection on 8 digits.
  const auto local = (static_cast<std::uint64_t>(person) * 7919ULL + 1234567ULL) % 100000000ULL;
  char buf[24];
  std::snprintf(buf, sizeof buf, "+56 9 %04llu %04llu", static_cast<unsigned long long>(local / 10000),
                static_cast<unsigned long long>(local % 10000));
  return buf;
}

Population generate_population(const SynthConfig& config) {
  config.validate();
  Population pop;
  auto& people = pop.people;
  Rng rng = stream_rng(config.seed, 1);
  SurnameSource surnames(config.surname_pool, rng);

  auto add = [&](Person p) {
    people.push_back(std::move(p));
    return static_cast<std::int32_t>(people.size() - 1);
  };
  auto marry = [&](std::int32_t a, std::int32_t b) {
    people[static_cast<std::size_t>(a)].spouse = b;
    people[static_cast<std::size_t>(b)].spouse = a;
  };

  // Couples that may still have children, as (wife, husband).
  std::vector<std::pair<std::int32_t, std::int32_t>> couples;
  for (std::size_t f = 0; f < config.n_families; ++f) {
    Person wife;
    wife.sex = Sex::kFemale;
    wife.age = uniform_int(rng, config.founder_age.min, config.founder_age.max);
    wife.ln_p = surnames.next();
    wife.ln_m = surnames.next();
    wife.family = static_cast<std::uint32_t>(f);
    Person husband;
    husband.sex = Sex::kMale;
    husband.age = std::min(kMaxAge, wife.age + uniform_int(rng, config.spouse_age_gap.min, config.spouse_age_gap.max));
    husband.ln_p = surnames.next();
    husband.ln_m = surnames.next();
    husband.family = wife.family;
    const auto w = add(std::move(wife));
    const auto h = add(std::move(husband));
    marry(w, h);
    couples.emplace_back(w, h);
  }

  std::poisson_distribution<int> n_children(config.fertility);
  for (int gen = 1; gen < config.generations; ++gen) {
    std::vector<std::pair<std::int32_t, std::int32_t>> next;
    const bool can_marry = gen + 1 < config.generations;
    for (auto [w, h] : couples) {
      const int k = config.fertility > 0.0 ? n_children(rng) : 0;
      for (int c = 0; c < k; ++c) {
        const int mother_age = people[static_cast<std::size_t>(w)].age;
        const int age = mother_age - uniform_int(rng, config.mother_birth_age.min, config.mother_birth_age.max);
        if (age < 0) continue;  // not born by the reference date
        Person child;
        child.sex = coin(rng, 0.5) ? Sex::kMale : Sex::kFemale;
        child.age = age;
        child.ln_p = people[static_cast<std::size_t>(h)].ln_p;
        child.ln_m = people[static_cast<std::size_t>(w)].ln_p;
        child.mother = w;
        child.father = h;
        child.family = people[static_cast<std::size_t>(w)].family;
        const auto id = add(std::move(child));
        people[static_cast<std::size_t>(w)].children.push_back(id);
        people[static_cast<std::size_t>(h)].children.push_back(id);

        if (!can_marry || age < config.marriage_age || !coin(rng, config.marriage_rate)) continue;
        Person spouse;
        spouse.ln_p = surnames.next();
        spouse.ln_m = surnames.next();
        spouse.family = people[static_cast<std::size_t>(id)].family;
        const int gap = uniform_int(rng, config.spouse_age_gap.min, config.spouse_age_gap.max);
        if (people[static_cast<std::size_t>(id)].sex == Sex::kFemale) {
          spouse.sex = Sex::kMale;
          spouse.age = std::min(kMaxAge, age + gap);
        } else {
          spouse.sex = Sex::kFemale;
          spouse.age = std::max(0, age - gap);
        }
        const auto s = add(std::move(spouse));
        marry(id, s);
        const bool child_is_wife = people[static_cast<std::size_t>(id)].sex == Sex::kFemale;
        next.emplace_back(child_is_wife ? id : s, child_is_wife ? s : id);
      }
    }
    couples = std::move(next);
  }

  Rng cover = stream_rng(config.seed, 2);
  for (auto& p : people) {
    p.has_phone = p.age >= config.min_phone_age;
    const bool drawn = coin(cover, config.coverage);
    p.covered = p.has_phone && drawn;
  }
  return pop;
}

std::size_t CallCensus::dyads_with_calls() const {
  return static_cast<std::size_t>(std::count_if(dyads.begin(), dyads.end(), [](const auto& d) { return d.calls > 0; }));
}

std::size_t CallCensus::phones_with_calls() const {
  std::unordered_set<std::int32_t> phones;
  for (const auto& d : dyads) {
    if (d.calls == 0) continue;
    phones.insert(d.a);
    phones.insert(d.b);
  }
  return phones.size();
}

CallCensus generate_calls(const Population& population, const SynthConfig& config,
                          const std::function<void(const RawCallRecord&)>& sink) {
  config.validate();
  const auto& people = population.people;
  const auto n = static_cast<std::int32_t>(people.size());
  auto person = [&](std::int32_t i) -> const Person& { return people[static_cast<std::size_t>(i)]; };

  std::unordered_map<std::uint64_t, DyadPlan> plan;
  auto add_kin = [&](std::int32_t a, std::int32_t b, double mult) {
    if (a < 0 || b < 0 || a == b || !person(a).has_phone || !person(b).has_phone) return;
    auto& d = plan[pair_key(a, b)];
    d.kin = true;
    d.rate_multiplier = std::max(d.rate_multiplier, mult);
  };

  Rng kin_rng = stream_rng(config.seed, 3);
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& p = person(i);
    if (!p.has_phone) continue;
    add_kin(i, p.mother, 1.0);
    add_kin(i, p.father, 1.0);
    add_kin(i, p.spouse, 1.0);
    for (auto s : population.siblings(i)) {
      if (s > i) add_kin(i, s, 1.0);
    }
    for (auto parent : {p.mother, p.father}) {
      if (parent < 0) continue;
      for (auto gp : {person(parent).mother, person(parent).father}) {
        if (gp >= 0 && coin(kin_rng, config.grandparent_contact)) add_kin(i, gp, 1.0);
      }
      for (auto au : population.siblings(parent)) {
        if (coin(kin_rng, config.aunt_contact)) add_kin(i, au, 1.0);
      }
    }
    if (p.mother >= 0 && config.aunt_preference > 0.0) {
      std::vector<std::int32_t> aunts;
      for (auto s : population.siblings(p.mother)) {
        if (person(s).sex == Sex::kFemale && person(s).has_phone) aunts.push_back(s);
      }
      if (!aunts.empty() && coin(kin_rng, config.aunt_preference)) {
        const auto pick = aunts[std::uniform_int_distribution<std::size_t>(0, aunts.size() - 1)(kin_rng)];
        add_kin(i, pick, config.aunt_preference_boost);
      }
    }
  }

  // Non-kin contacts: a generation offset, then a partner within ten years
  // of the target age from another family.
  std::vector<std::vector<std::int32_t>> by_age(kMaxAge + 1);
  for (std::int32_t i = 0; i < n; ++i) {
    if (person(i).has_phone) by_age[static_cast<std::size_t>(std::clamp(person(i).age, 0, kMaxAge))].push_back(i);
  }
  Rng nk_rng = stream_rng(config.seed, 4);
  std::poisson_distribution<int> degree(config.nonkin_degree / 2.0);
  for (std::int32_t i = 0; i < n && config.nonkin_degree > 0.0; ++i) {
    const auto& p = person(i);
    if (!p.has_phone) continue;
    const int k = degree(nk_rng);
    for (int e = 0; e < k; ++e) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(nk_rng);
      const int offset = u < config.nonkin_cross_generation / 2 ? 28 : (u < config.nonkin_cross_generation ? -28 : 0);
      for (int attempt = 0; attempt < 8; ++attempt) {
        const int target = std::clamp(p.age + offset + uniform_int(nk_rng, -10, 10), config.min_phone_age, kMaxAge);
        const auto& bucket = by_age[static_cast<std::size_t>(target)];
        if (bucket.empty()) continue;
        const auto j = bucket[std::uniform_int_distribution<std::size_t>(0, bucket.size() - 1)(nk_rng)];
        if (j == i || person(j).family == p.family) continue;
        plan.try_emplace(pair_key(i, j), DyadPlan{});
        break;
      }
    }
  }

  std::vector<std::pair<std::uint64_t, DyadPlan>> ordered(plan.begin(), plan.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  const auto first_day = std::chrono::sys_days{std::chrono::year{config.year} / 1 / 1};
  const auto next_day = std::chrono::sys_days{std::chrono::year{config.year + 1} / 1 / 1};
  const std::int64_t begin = std::chrono::duration_cast<std::chrono::seconds>(first_day.time_since_epoch()).count();
  const std::int64_t span = std::chrono::duration_cast<std::chrono::seconds>(next_day - first_day).count();

  auto lognormal_for = [&](double mean) {
    const double cv2 = (config.duration_sd * config.duration_sd) / (mean * mean);
    const double sigma = std::sqrt(std::log1p(cv2));
    return std::lognormal_distribution<double>(std::log(mean) - sigma * sigma / 2.0, sigma);
  };
  auto nonkin_duration = lognormal_for(config.duration_mean);
  auto kin_duration = lognormal_for(config.duration_mean * config.kin_duration_multiplier);

  CallCensus census;
  Rng call_rng = stream_rng(config.seed, 5);
  std::uniform_int_distribution<std::int64_t> when(0, span - 1);
  RawCallRecord rec;
  for (const auto& [key, d] : ordered) {
    const auto a = static_cast<std::int32_t>(key >> 32);
    const auto b = static_cast<std::int32_t>(key & 0xffffffffULL);
    if (!person(a).covered && !person(b).covered) continue;
    double rate = config.base_call_rate * d.rate_multiplier;
    if (d.kin) {
      rate *= config.kin_rate_multiplier;
      if (config.boost_ages.contains(std::min(person(a).age, person(b).age))) rate *= config.age_boost;
    }
    const auto calls = rate > 0.0 ? std::poisson_distribution<std::uint32_t>(rate)(call_rng) : 0U;
    census.dyads.push_back(PlannedDyad{a, b, d.kin, calls});
    census.calls += calls;
    if (calls == 0) continue;
    const auto phone_a = population.phone_number(a);
    const auto phone_b = population.phone_number(b);
    for (std::uint32_t c = 0; c < calls; ++c) {
      const bool forward = coin(call_rng, 0.5);
      rec.origin = forward ? phone_a : phone_b;
      rec.destination = forward ? phone_b : phone_a;
      rec.timestamp = begin + when(call_rng);
      const double secs = d.kin ? kin_duration(call_rng) : nonkin_duration(call_rng);
      rec.duration_sec = std::max<std::int64_t>(1, std::llround(secs));
      sink(rec);
    }
  }
  return census;
}

std::vector<RawCallRecord> generate_calls(const Population& population, const SynthConfig& config,
                                          CallCensus* census) {
  std::vector<RawCallRecord> out;
  auto c = generate_calls(population, config, [&](const RawCallRecord& r) { out.push_back(r); });
  if (census) *census = std::move(c);
  return out;
}

std::vector<SubscriberRecord> synth_registry(const Population& population, const SynthConfig& config,
                                             const PhoneHasher& hasher) {
  config.validate();
  const auto& people = population.people;
  Rng rng = stream_rng(config.seed, 6);
  const auto earliest = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
  const auto latest = std::chrono::sys_days{std::chrono::year{config.year - 1} / 12 / 31};
  const auto date_span = static_cast<int>((latest - earliest).count());

  std::vector<SubscriberRecord> out;
  std::vector<std::int32_t> index_of(people.size(), -1);
  std::vector<std::chrono::sys_days> start(people.size(), earliest);
  for (std::size_t i = 0; i < people.size(); ++i) {
    const auto& p = people[i];
    if (!p.covered) continue;
    char owner[24];
    std::snprintf(owner, sizeof owner, "own%016llx",
                  static_cast<unsigned long long>(splitmix64(config.seed ^ (i * 0x100000001b3ULL))));
    start[i] = earliest + std::chrono::days{uniform_int(rng, 0, std::max(0, date_span))};
    SubscriberRecord rec;
    rec.phone = hasher.hash(population.phone_number(static_cast<std::int32_t>(i))).value();
    rec.meta = Metadata{p.ln_p, p.ln_m, p.sex, p.age};
    rec.owner_id = owner;
    rec.contract = ContractType::kIndividual;
    index_of[i] = static_cast<std::int32_t>(out.size());
    out.push_back(std::move(rec));
  }
  // Young adults added to a covered parent's plan after the parent signed.
  for (std::size_t i = 0; i < people.size() && config.family_plan_rate > 0.0; ++i) {
    const auto& p = people[i];
    if (index_of[i] < 0 || p.age >= 30) continue;
    std::int32_t parent = -1;
    for (auto q : {p.mother, p.father}) {
      if (q >= 0 && index_of[static_cast<std::size_t>(q)] >= 0) {
        parent = q;
        break;
      }
    }
    if (parent < 0 || !coin(rng, config.family_plan_rate)) continue;
    auto& owner_rec = out[static_cast<std::size_t>(index_of[static_cast<std::size_t>(parent)])];
    auto& rec = out[static_cast<std::size_t>(index_of[i])];
    owner_rec.contract = ContractType::kFamily;
    rec.contract = ContractType::kFamily;
    rec.owner_id = owner_rec.owner_id;
    start[i] = start[static_cast<std::size_t>(parent)] + std::chrono::days{uniform_int(rng, 1, 365)};
  }
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (index_of[i] >= 0) out[static_cast<std::size_t>(index_of[i])].contract_start = format_date(start[i]);
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.phone < r.phone; });
  return out;
}

void write_raw_call_header(std::ostream& out, char delim) {
  out << "origin" << delim << "destination" << delim << "timestamp" << delim << "duration_sec\n";
}

void write_raw_call(std::ostream& out, const RawCallRecord& record, char delim) {
  out << record.origin << delim << record.destination << delim << format_timestamp(record.timestamp) << delim
      << record.duration_sec << '\n';
}

void write_raw_calls(std::ostream& out, std::span<const RawCallRecord> records, char delim) {
  write_raw_call_header(out, delim);
  for (const auto& r : records) write_raw_call(out, r, delim);
}

void write_ground_truth(std::ostream& out, const Population& population, const PhoneHasher& hasher, char delim) {
  const auto& people = population.people;
  std::vector<std::string> ids(people.size());
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (people[i].has_phone) ids[i] = hasher.hash(population.phone_number(static_cast<std::int32_t>(i)))->str();
  }
  out << "person" << delim << "relation" << delim << "relative\n";
  auto row = [&](std::size_t i, std::string_view rel, std::int32_t j) {
    if (j < 0 || ids[static_cast<std::size_t>(j)].empty()) return;
    out << ids[i] << delim << rel << delim << ids[static_cast<std::size_t>(j)] << '\n';
  };
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (ids[i].empty()) continue;
    const auto& p = people[i];
    row(i, "mother", p.mother);
    row(i, "father", p.father);
    for (auto c : p.children) row(i, people[static_cast<std::size_t>(c)].sex == Sex::kFemale ? "daughter" : "son", c);
    for (auto s : population.siblings(static_cast<std::int32_t>(i))) {
      row(i, people[static_cast<std::size_t>(s)].sex == Sex::kFemale ? "sister" : "brother", s);
    }
    row(i, "spouse", p.spouse);
  }
}

std::string_view to_string(TrueRelation relation) noexcept {
  switch (relation) {
    case TrueRelation::kMother: return "mother";
    case TrueRelation::kFather: return "father";
    case TrueRelation::kChild: return "child";
    case TrueRelation::kSibling: return "sibling";
    case TrueRelation::kSpouse: return "spouse";
    case TrueRelation::kMaternalAuntUncle: return "maternal_aunt_uncle";
    case TrueRelation::kPaternalAuntUncle: return "paternal_aunt_uncle";
    case TrueRelation::kNieceNephew: return "niece_nephew";
    case TrueRelation::kGrandparent: return "grandparent";
    case TrueRelation::kGrandchild: return "grandchild";
    case TrueRelation::kCousin: return "cousin";
    case TrueRelation::kUnrelated: return "unrelated";
  }
  return "unrelated";
}

GroundTruth GroundTruth::read(std::istream& in, char delim) {
  GroundTruth truth;
  std::vector<std::string> header;
  for_each_row(in, delim, header, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    const auto ego = f.size() == 3 ? HashedId::parse(f[0]) : std::nullopt;
    const auto alter = f.size() == 3 ? HashedId::parse(f[2]) : std::nullopt;
    if (!ego || !alter) throw std::runtime_error("relations file: malformed line " + std::to_string(line_no));
    auto& links = truth.at(*ego);
    truth.at(*alter);
    const auto rel = f[1];
    if (rel == "mother") links.mother = *alter;
    else if (rel == "father") links.father = *alter;
    else if (rel == "daughter") links.daughters.push_back(*alter);
    else if (rel == "son") links.sons.push_back(*alter);
    else if (rel == "sister") links.sisters.push_back(*alter);
    else if (rel == "brother") links.brothers.push_back(*alter);
    else if (rel == "spouse") links.spouses.push_back(*alter);
    else throw std::runtime_error("relations file: unknown relation on line " + std::to_string(line_no));
  });
  return truth;
}

GroundTruth GroundTruth::from_population(const Population& population, const PhoneHasher& hasher) {
  std::ostringstream buf;
  write_ground_truth(buf, population, hasher, '\t');
  std::istringstream in(buf.str());
  return read(in, '\t');
}

std::vector<HashedId> GroundTruth::people() const {
  std::vector<HashedId> out;
  out.reserve(links_.size());
  for (const auto& [id, links] : links_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

const GroundTruth::Links* GroundTruth::find(const HashedId& person) const noexcept {
  const auto it = links_.find(person);
  return it == links_.end() ? nullptr : &it->second;
}

TrueRelation GroundTruth::relation(const HashedId& ego, const HashedId& alter) const {
  const auto* e = find(ego);
  if (!e) return TrueRelation::kUnrelated;
  auto has = [](const std::vector<HashedId>& v, const HashedId& x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  auto is_sibling = [&](const Links& l, const HashedId& x) { return has(l.sisters, x) || has(l.brothers, x); };
  auto is_child = [&](const Links& l, const HashedId& x) { return has(l.daughters, x) || has(l.sons, x); };

  if (e->mother == alter) return TrueRelation::kMother;
  if (e->father == alter) return TrueRelation::kFather;
  if (is_child(*e, alter)) return TrueRelation::kChild;
  if (is_sibling(*e, alter)) return TrueRelation::kSibling;
  if (has(e->spouses, alter)) return TrueRelation::kSpouse;
  const auto* mother = e->mother ? find(*e->mother) : nullptr;
  const auto* father = e->father ? find(*e->father) : nullptr;
  if (mother && is_sibling(*mother, alter)) return TrueRelation::kMaternalAuntUncle;
  if (father && is_sibling(*father, alter)) return TrueRelation::kPaternalAuntUncle;
  for (const auto* l : {mother, father}) {
    if (l && (l->mother == alter || l->father == alter)) return TrueRelation::kGrandparent;
  }
  for (const auto& group : {e->sisters, e->brothers}) {
    for (const auto& s : group) {
      const auto* sl = find(s);
      if (sl && is_child(*sl, alter)) return TrueRelation::kNieceNephew;
    }
  }
  for (const auto& group : {e->daughters, e->sons}) {
    for (const auto& c : group) {
      const auto* cl = find(c);
      if (cl && is_child(*cl, alter)) return TrueRelation::kGrandchild;
    }
  }
  for (const auto* l : {mother, father}) {
    if (!l) continue;
    for (const auto& group : {l->sisters, l->brothers}) {
      for (const auto& s : group) {
        const auto* sl = find(s);
        if (sl && is_child(*sl, alter)) return TrueRelation::kCousin;
      }
    }
  }
  return TrueRelation::kUnrelated;
}

std::vector<HashedId> GroundTruth::slot_relatives(const HashedId& ego, Slot slot) const {
  const auto* e = find(ego);
  if (!e) return {};
  switch (slot) {
    case Slot::kMother: return e->mother ? std::vector<HashedId>{*e->mother} : std::vector<HashedId>{};
    case Slot::kFather: return e->father ? std::vector<HashedId>{*e->father} : std::vector<HashedId>{};
    case Slot::kDaughter: return e->daughters;
    case Slot::kSon: return e->sons;
  }
  return {};
}

namespace {

bool in_class(Slot slot, TrueRelation r) noexcept {
  switch (slot) {
    case Slot::kMother: return r == TrueRelation::kMother || r == TrueRelation::kMaternalAuntUncle;
    case Slot::kFather: return r == TrueRelation::kFather || r == TrueRelation::kPaternalAuntUncle;
    case Slot::kDaughter:
    case Slot::kSon: return r == TrueRelation::kChild || r == TrueRelation::kNieceNephew;
  }
  return false;
}

bool correct(Slot slot, TrueRelation r) noexcept {
  switch (slot) {
    case Slot::kMother: return r == TrueRelation::kMother;
    case Slot::kFather: return r == TrueRelation::kFather;
    case Slot::kDaughter:
    case Slot::kSon: return r == TrueRelation::kChild;
  }
  return false;
}

// Relation name with the alter's sex filled in; the slot fixes that sex.
std::string gendered(TrueRelation r, Slot slot) {
  const bool female = slot == Slot::kMother || slot == Slot::kDaughter;
  switch (r) {
    case TrueRelation::kChild: return female ? "daughter" : "son";
    case TrueRelation::kSibling: return female ? "sister" : "brother";
    case TrueRelation::kMaternalAuntUncle: return female ? "maternal_aunt" : "maternal_uncle";
    case TrueRelation::kPaternalAuntUncle: return female ? "paternal_aunt" : "paternal_uncle";
    case TrueRelation::kNieceNephew: return female ? "niece" : "nephew";
    case TrueRelation::kGrandparent: return female ? "grandmother" : "grandfather";
    case TrueRelation::kGrandchild: return female ? "granddaughter" : "grandson";
    default: return std::string(to_string(r));
  }
}

double ratio(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<SlotScore> score_classifier(std::span<const KinAssignment> assignments, const GroundTruth& truth,
                                        const Registry& registry) {
  std::vector<SlotScore> scores;
  for (auto slot : kAllSlots) {
    SlotScore s;
    s.slot = slot;
    scores.push_back(std::move(s));
  }
  auto score_of = [&](Slot s) -> SlotScore& { return scores[static_cast<std::size_t>(s)]; };

  std::unordered_map<HashedId, std::array<std::vector<HashedId>, 4>> kin_labels;
  for (const auto& a : assignments) {
    if (!a.kin()) continue;
    auto& s = score_of(a.slot);
    ++s.kin_labeled;
    const auto rel = truth.relation(a.ego, a.alter);
    ++s.breakdown[gendered(rel, a.slot)];
    if (correct(a.slot, rel)) ++s.correct;
    else if (in_class(a.slot, rel)) ++s.in_class_misid;
    else ++s.out_of_class;
    kin_labels[a.ego][static_cast<std::size_t>(a.slot)].push_back(a.alter);
  }

  // Recall runs over every phone in the relations file; a covered pair is
  // an ego labeled together with at least one of its slot relatives.
  for (const auto& ego : truth.people()) {
    const bool ego_labeled = registry.lookup(ego) != nullptr;
    const auto labels = kin_labels.find(ego);
    for (auto slot : kAllSlots) {
      const auto relatives = truth.slot_relatives(ego, slot);
      if (relatives.empty()) continue;
      auto& s = score_of(slot);
      ++s.eligible;
      const bool pair = ego_labeled && std::any_of(relatives.begin(), relatives.end(),
                                                   [&](const auto& r) { return registry.lookup(r) != nullptr; });
      if (!pair) continue;
      ++s.covered_pairs;
      if (labels == kin_labels.end()) continue;
      const auto& got = labels->second[static_cast<std::size_t>(slot)];
      if (std::any_of(got.begin(), got.end(), [&](const auto& g) {
            return std::find(relatives.begin(), relatives.end(), g) != relatives.end();
          })) {
        ++s.recovered;
      }
    }
  }
  for (auto slot : kAllSlots) {
    auto& s = score_of(slot);
    s.precision = ratio(s.correct, s.kin_labeled);
    s.recall_covered = ratio(s.recovered, s.covered_pairs);
    s.recall_all = ratio(s.recovered, s.eligible);
  }
  return scores;
}

void write_scores(std::ostream& out, std::span<const SlotScore> scores, char delim) {
  out << "slot" << delim << "kin_labeled" << delim << "correct" << delim << "in_class_misid" << delim
      << "out_of_class" << delim << "precision" << delim << "eligible" << delim << "covered_pairs" << delim
      << "recovered" << delim << "recall_covered" << delim << "recall_all" << delim << "breakdown\n";
  for (const auto& s : scores) {
    std::string breakdown;
    for (const auto& [name, count] : s.breakdown) {
      if (!breakdown.empty()) breakdown += ';';
      breakdown += name + "=" + std::to_string(count);
    }
    out << to_string(s.slot) << delim << s.kin_labeled << delim << s.correct << delim << s.in_class_misid << delim
        << s.out_of_class << delim << format_double(s.precision) << delim << s.eligible << delim << s.covered_pairs
        << delim << s.recovered << delim << format_double(s.recall_covered) << delim << format_double(s.recall_all)
        << delim << (breakdown.empty() ? "NA" : breakdown) << '\n';
  }
}

}  // namespace kincall
