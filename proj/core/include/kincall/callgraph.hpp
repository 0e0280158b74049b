#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kincall/cdr_ingest.hpp"
#include "kincall/registry.hpp"

namespace kincall {

enum class Metric : std::uint8_t { kFrequency, kFracOfTime, kOutCallFrac, kCallLength };
inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::kFrequency, Metric::kFracOfTime, Metric::kOutCallFrac,
                                                      Metric::kCallLength};

std::string_view to_string(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view text) noexcept;

/// Ego-relative call pattern of one dyad.
struct MetricTuple {
  std::uint64_t frequency = 0;  // calls in both directions over the window
  double frac_of_time = 0.0;    // dyad seconds / ego's seconds over all dyads
  double out_call_frac = 0.0;   // ego-initiated share of calls
  double call_length = 0.0;     // mean seconds per call
  std::uint64_t total_sec = 0;  // dyad seconds, kept for exact arithmetic and tie-breaks

  double value(Metric metric) const noexcept;
  bool operator==(const MetricTuple&) const = default;
};

/// Metrics of `dyad` seen from `ego`. `ego_total_sec` is the sum of
/// total_sec over all of ego's dyads; when it is 0 frac_of_time is 0.
/// Throws std::invalid_argument if ego is not an endpoint.
MetricTuple dyad_metrics(const HashedId& ego, const DyadAggregate& dyad, std::uint64_t ego_total_sec);

/// Undirected mobile call graph in CSR form. Labels point into the Registry
/// passed to build(), which must outlive the graph.
class CallGraph {
 public:
  struct Incidence {
    std::uint32_t neighbor;
    std::uint32_t edge;
  };

  /// `dyads` must be canonical; self-dyads are rejected with
  /// std::invalid_argument.
  static CallGraph build(DyadSet dyads, const Registry& registry);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const HashedId> nodes() const noexcept { return nodes_; }
  const HashedId& node(std::size_t i) const noexcept { return nodes_[i]; }
  std::optional<std::size_t> index_of(const HashedId& id) const noexcept;

  const Metadata* label(std::size_t node) const noexcept { return labels_[node]; }
  std::span<const Incidence> incident(std::size_t node) const noexcept;
  const DyadAggregate& edge(std::size_t e) const noexcept { return edges_[e]; }
  std::span<const DyadAggregate> edges() const noexcept { return edges_; }

  /// Seconds over all of the node's dyads, grey alters included.
  std::uint64_t total_sec(std::size_t node) const noexcept { return total_sec_[node]; }

 private:
  std::vector<HashedId> nodes_;
  std::vector<const Metadata*> labels_;
  DyadSet edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
  std::vector<std::uint64_t> total_sec_;
};

struct AlterEntry {
  HashedId alter;
  const Metadata* meta = nullptr;  // nullptr for grey alters
  MetricTuple metrics;
};

struct EgoNetwork {
  HashedId ego;
  Metadata ego_meta;
  std::vector<AlterEntry> alters;  // one per incident edge, in alter id order
};

/// Per-ego view. nullopt when the ego is grey or has no edges.
std::optional<EgoNetwork> ego_network(const CallGraph& graph, std::size_t node);
std::optional<EgoNetwork> ego_network(const CallGraph& graph, const HashedId& ego);

/// Long-format export: ego, alter, frequency, frac_of_time, out_call_frac,
/// call_length, one row per (labeled ego, alter).
void write_ego_metrics(std::ostream& out, const CallGraph& graph, char delim);

}  // namespace kincall
