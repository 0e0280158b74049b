#include "kincall/callgraph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "kincall/table_io.hpp"

namespace kincall {

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::kFrequency: return "Frequency";
    case Metric::kFracOfTime: return "FracOfTime";
    case Metric::kOutCallFrac: return "OutCallFrac";
    case Metric::kCallLength: return "CallLength";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view text) noexcept {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

double MetricTuple::value(Metric metric) const noexcept {
  switch (metric) {
    case Metric::kFrequency: return static_cast<double>(frequency);
    case Metric::kFracOfTime: return frac_of_time;
    case Metric::kOutCallFrac: return out_call_frac;
    case Metric::kCallLength: return call_length;
  }
  return 0.0;
}

MetricTuple dyad_metrics(const HashedId& ego, const DyadAggregate& dyad, std::uint64_t ego_total_sec) {
  std::uint64_t initiated = 0;
  std::uint64_t received = 0;
  if (ego == dyad.phone_a) {
    initiated = dyad.out_calls;
    received = dyad.in_calls;
  } else if (ego == dyad.phone_b) {
    initiated = dyad.in_calls;
    received = dyad.out_calls;
  } else {
    throw std::invalid_argument("dyad_metrics: ego " + ego.str() + " is not an endpoint of the dyad");
  }
  MetricTuple m;
  m.frequency = initiated + received;
  m.total_sec = dyad.total_sec;
  if (m.frequency == 0) return m;
  const double n = static_cast<double>(m.frequency);
  // The larger share is taken as the complement of the smaller one so both
  // directions of a dyad add up to exactly 1.
  m.out_call_frac = initiated <= received ? static_cast<double>(initiated) / n
                                          : 1.0 - static_cast<double>(received) / n;
  m.call_length = static_cast<double>(dyad.total_sec) / n;
  m.frac_of_time =
      ego_total_sec == 0 ? 0.0 : static_cast<double>(dyad.total_sec) / static_cast<double>(ego_total_sec);
  return m;
}

CallGraph CallGraph::build(DyadSet dyads, const Registry& registry) {
  for (const auto& d : dyads) {
    if (d.phone_a == d.phone_b) throw std::invalid_argument("build_graph: self dyad " + d.phone_a.str());
  }
  if (!is_canonical(dyads)) throw std::invalid_argument("build_graph: dyads are not canonical");

  CallGraph g;
  g.nodes_.reserve(dyads.size() * 2);
  for (const auto& d : dyads) {
    g.nodes_.push_back(d.phone_a);
    g.nodes_.push_back(d.phone_b);
  }
  std::sort(g.nodes_.begin(), g.nodes_.end());
  g.nodes_.erase(std::unique(g.nodes_.begin(), g.nodes_.end()), g.nodes_.end());
  g.nodes_.shrink_to_fit();

  const std::size_t n = g.nodes_.size();
  g.labels_.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.labels_[i] = registry.lookup(g.nodes_[i]);

  g.edges_ = std::move(dyads);
  std::vector<std::uint32_t> a_idx(g.edges_.size());
  std::vector<std::uint32_t> b_idx(g.edges_.size());
  g.offsets_.assign(n + 1, 0);
  g.total_sec_.assign(n, 0);
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const auto& d = g.edges_[e];
    a_idx[e] = static_cast<std::uint32_t>(*g.index_of(d.phone_a));
    b_idx[e] = static_cast<std::uint32_t>(*g.index_of(d.phone_b));
    ++g.offsets_[a_idx[e] + 1];
    ++g.offsets_[b_idx[e] + 1];
    g.total_sec_[a_idx[e]] += d.total_sec;
    g.total_sec_[b_idx[e]] += d.total_sec;
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.incidence_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const auto ei = static_cast<std::uint32_t>(e);
    g.incidence_[cursor[a_idx[e]]++] = {b_idx[e], ei};
    g.incidence_[cursor[b_idx[e]]++] = {a_idx[e], ei};
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.incidence_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.incidence_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]),
              [](const Incidence& x, const Incidence& y) { return x.neighbor < y.neighbor; });
  }
  return g;
}

std::optional<std::size_t> CallGraph::index_of(const HashedId& id) const noexcept {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || !(*it == id)) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::span<const CallGraph::Incidence> CallGraph::incident(std::size_t node) const noexcept {
  return std::span<const Incidence>(incidence_).subspan(offsets_[node], offsets_[node + 1] - offsets_[node]);
}

std::optional<EgoNetwork> ego_network(const CallGraph& graph, std::size_t node) {
  const Metadata* meta = graph.label(node);
  const auto inc = graph.incident(node);
  if (!meta || inc.empty()) return std::nullopt;
  EgoNetwork net;
  net.ego = graph.node(node);
  net.ego_meta = *meta;
  net.alters.reserve(inc.size());
  const std::uint64_t total = graph.total_sec(node);
  for (const auto& x : inc) {
    net.alters.push_back({graph.node(x.neighbor), graph.label(x.neighbor),
                          dyad_metrics(net.ego, graph.edge(x.edge), total)});
  }
  return net;
}

std::optional<EgoNetwork> ego_network(const CallGraph& graph, const HashedId& ego) {
  const auto idx = graph.index_of(ego);
  if (!idx) return std::nullopt;
  return ego_network(graph, *idx);
}

void write_ego_metrics(std::ostream& out, const CallGraph& graph, char delim) {
  out << "ego" << delim << "alter" << delim << "frequency" << delim << "frac_of_time" << delim << "out_call_frac"
      << delim << "call_length\n";
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto net = ego_network(graph, i);
    if (!net) continue;
    for (const auto& a : net->alters) {
      out << net->ego.view() << delim << a.alter.view() << delim << a.metrics.frequency << delim
          << format_double(a.metrics.frac_of_time) << delim << format_double(a.metrics.out_call_frac) << delim
          << format_double(a.metrics.call_length) << '\n';
    }
  }
}

}  // namespace kincall
