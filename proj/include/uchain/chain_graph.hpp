#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/parallel.hpp"
#include "uchain/systems.hpp"

namespace uchain {

/// Directed graph on point indices; paths of length k are exactly the
/// (D, f)-chains of length k.
class TransitionGraph {
 public:
  TransitionGraph() = default;

  /// Successor lists are sorted and deduplicated.
  explicit TransitionGraph(std::vector<std::vector<Index>> successors, std::string system = {},
                           std::string entourage = {})
      : succ_(std::move(successors)), system_(std::move(system)), entourage_(std::move(entourage)) {
    const std::size_t n = succ_.size();
    for (auto& row : succ_) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      if (!row.empty() && row.back() >= n) throw error(errc::out_of_range, "edge target outside the vertex range");
    }
  }

  std::size_t size() const noexcept { return succ_.size(); }
  const std::vector<Index>& successors(std::size_t v) const { return succ_.at(v); }
  const std::vector<std::vector<Index>>& adjacency() const noexcept { return succ_; }
  const std::string& source_system() const noexcept { return system_; }
  const std::string& source_entourage() const noexcept { return entourage_; }

  bool has_edge(std::size_t u, std::size_t v) const {
    const auto& r = succ_.at(u);
    return std::binary_search(r.begin(), r.end(), static_cast<Index>(v));
  }

  std::size_t edge_count() const noexcept {
    std::size_t m = 0;
    for (const auto& r : succ_) m += r.size();
    return m;
  }

  /// Subgraph induced on `keep` (sorted); vertices are renumbered 0..k-1
  /// in the order of `keep`.
  TransitionGraph induced(const std::vector<Index>& keep) const {
    std::vector<long> pos(size(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) pos.at(keep[i]) = static_cast<long>(i);
    std::vector<std::vector<Index>> rows(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (Index w : succ_[keep[i]])
        if (pos[w] >= 0) rows[i].push_back(static_cast<Index>(pos[w]));
    return TransitionGraph(std::move(rows), system_, entourage_);
  }

 private:
  std::vector<std::vector<Index>> succ_;
  std::string system_;
  std::string entourage_;
};

/// Edge x -> y iff (f(x), y) ∈ D, with f(x) the exact image under the
/// system's step map.
inline TransitionGraph build_transition_graph(const SystemSpec& system, const Entourage& d) {
  require_same_space(system.space(), d.space(), "build_transition_graph: entourage lives on another space");
  const std::size_t n = system.phase_space().size();
  std::vector<std::vector<Index>> succ(n);
  parallel_for(n, [&](std::size_t x) {
    const auto img = system.evaluate(x, 1);
    if (d.scale()) {
      for (std::size_t y = 0; y < n; ++y)
        if (d.relates(img.image, y)) succ[x].push_back(static_cast<Index>(y));
    } else {
      auto row = d.row(img.nearest_index);
      succ[x].assign(row.begin(), row.end());
    }
  });
  return TransitionGraph(std::move(succ), system.name(), d.label());
}

/// Strongly connected components labelled 0..k-1 in order of their
/// smallest vertex.
struct Components {
  std::vector<Index> id;
  std::vector<std::vector<Index>> members;
  std::size_t count() const noexcept { return members.size(); }
};

inline Components strongly_connected_components(const TransitionGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<Index> stack;
  std::vector<std::size_t> raw(n, 0);
  std::size_t counter = 0, comps = 0;
  // Iterative Tarjan: frames hold (vertex, next successor position).
  std::vector<std::pair<Index, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.emplace_back(static_cast<Index>(root), 0);
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<Index>(root));
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& succ = g.successors(v);
      if (pos < succ.size()) {
        const Index w = succ[pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const Index done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          raw[w] = comps;
        } while (w != done);
        ++comps;
      }
    }
  }
  // Relabel by smallest member so labels are independent of traversal order.
  std::vector<long> relabel(comps, -1);
  Components out;
  out.id.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (relabel[raw[v]] < 0) {
      relabel[raw[v]] = static_cast<long>(out.members.size());
      out.members.emplace_back();
    }
    out.id[v] = static_cast<Index>(relabel[raw[v]]);
    out.members[out.id[v]].push_back(static_cast<Index>(v));
  }
  return out;
}

namespace detail {

inline bool has_internal_edge(const TransitionGraph& g, const Components& c, std::size_t comp) {
  for (Index v : c.members[comp])
    for (Index w : g.successors(v))
      if (c.id[w] == comp) return true;
  return false;
}

/// BFS levels from the smallest member, following edges inside the component.
inline std::vector<long> component_levels(const TransitionGraph& g, const Components& c, std::size_t comp) {
  std::vector<long> level(g.size(), -1);
  const Index root = c.members[comp].front();
  std::queue<Index> q;
  level[root] = 0;
  q.push(root);
  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    for (Index w : g.successors(v))
      if (c.id[w] == comp && level[w] < 0) {
        level[w] = level[v] + 1;
        q.push(w);
      }
  }
  return level;
}

inline void check_component(const Components& c, std::size_t comp) {
  if (comp >= c.count())
    throw error(errc::out_of_range, "component " + std::to_string(comp) + " does not exist");
}

}  // namespace detail

/// Vertices with a chain of length >= 1 back to themselves.
inline std::vector<Index> chain_recurrent_set(const TransitionGraph& g) {
  const Components c = strongly_connected_components(g);
  std::vector<Index> out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (c.members[c.id[v]].size() > 1 || g.has_edge(v, v)) out.push_back(static_cast<Index>(v));
  return out;
}

/// Every ordered pair (including x to itself) is joined by a path of length >= 1.
inline bool is_chain_transitive(const TransitionGraph& g) {
  if (g.size() == 0) return false;
  const Components c = strongly_connected_components(g);
  return c.count() == 1 && detail::has_internal_edge(g, c, 0);
}

/// gcd of all cycle lengths through the component, computed as the gcd of
/// |level(u) + 1 - level(v)| over internal edges u -> v; 0 without cycles.
inline std::size_t graph_period(const TransitionGraph& g, const Components& c, std::size_t comp) {
  detail::check_component(c, comp);
  const auto level = detail::component_levels(g, c, comp);
  std::size_t p = 0;
  bool any = false;
  for (Index v : c.members[comp])
    for (Index w : g.successors(v))
      if (c.id[w] == comp) {
        any = true;
        const long diff = level[v] + 1 - level[w];
        p = std::gcd(p, static_cast<std::size_t>(diff < 0 ? -diff : diff));
      }
  return any ? p : 0;
}

inline std::size_t graph_period(const TransitionGraph& g, std::size_t comp) {
  return graph_period(g, strongly_connected_components(g), comp);
}

/// The period-many classes C_0..C_{p-1} of a cyclic component: edges from
/// C_i land in C_{i+1 mod p}; C_0 holds the smallest vertex.
inline std::vector<std::vector<Index>> cyclic_classes(const TransitionGraph& g, const Components& c, std::size_t comp) {
  const std::size_t p = graph_period(g, c, comp);
  if (p == 0) throw error(errc::no_cycle, "component " + std::to_string(comp) + " has no cycle");
  const auto level = detail::component_levels(g, c, comp);
  std::vector<std::vector<Index>> classes(p);
  for (Index v : c.members[comp]) classes[static_cast<std::size_t>(level[v]) % p].push_back(v);
  return classes;
}

inline std::vector<std::vector<Index>> cyclic_classes(const TransitionGraph& g, std::size_t comp) {
  return cyclic_classes(g, strongly_connected_components(g), comp);
}

/// Chain transitive with period 1.
inline bool is_chain_mixing(const TransitionGraph& g) {
  if (!is_chain_transitive(g)) return false;
  return graph_period(g, 0) == 1;
}

/// Graph whose edges are the paths of length exactly k in g.
inline TransitionGraph path_power_graph(const TransitionGraph& g, std::size_t k) {
  if (k < 1) throw error(errc::invalid_parameter, "path power must be >= 1");
  const std::size_t n = g.size();
  std::vector<std::vector<Index>> rows(n);
  parallel_for(n, [&](std::size_t x) {
    std::vector<char> cur(n, 0), next(n, 0);
    cur[x] = 1;
    for (std::size_t step = 0; step < k; ++step) {
      std::fill(next.begin(), next.end(), 0);
      for (std::size_t v = 0; v < n; ++v)
        if (cur[v])
          for (Index w : g.successors(v)) next[w] = 1;
      cur.swap(next);
    }
    for (std::size_t v = 0; v < n; ++v)
      if (cur[v]) rows[x].push_back(static_cast<Index>(v));
  });
  return TransitionGraph(std::move(rows), g.source_system(), g.source_entourage());
}

/// Graph-level total chain transitivity: the length-k path graph is chain
/// transitive for every k <= n_max. Used for abstract digraphs that carry
/// no map to iterate.
inline bool is_totally_chain_transitive(const TransitionGraph& g, std::size_t n_max) {
  if (n_max < 1) throw error(errc::invalid_parameter, "n_max must be >= 1");
  for (std::size_t k = 1; k <= n_max; ++k)
    if (!is_chain_transitive(k == 1 ? g : path_power_graph(g, k))) return false;
  return true;
}

/// Finite certificate of total chain transitivity: the D-graph of f^k,
/// built from exact k-fold images, is chain transitive for k = 1..n_max.
inline bool is_totally_chain_transitive(const SystemSpec& system, const Entourage& d, std::size_t n_max) {
  if (n_max < 1) throw error(errc::invalid_parameter, "n_max must be >= 1");
  for (std::size_t k = 1; k <= n_max; ++k)
    if (!is_chain_transitive(build_transition_graph(system.power(static_cast<int>(k)), d))) return false;
  return true;
}

/// Shortest path lengths (>= 1) from x to every vertex; the entry for x is
/// its shortest cycle. Unreachable vertices get 0.
inline std::vector<std::size_t> chain_lengths_from(const TransitionGraph& g, std::size_t x) {
  const std::size_t n = g.size();
  std::vector<std::size_t> dist(n, 0);
  std::queue<Index> q;
  for (Index w : g.successors(x))
    if (dist[w] == 0) {
      dist[w] = 1;
      q.push(w);
    }
  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    for (Index w : g.successors(v))
      if (dist[w] == 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

/// M = max over ordered pairs of the shortest chain length.
inline std::size_t chain_diameter(const TransitionGraph& g) {
  if (!is_chain_transitive(g)) throw error(errc::undefined_diameter, "graph is not chain transitive");
  std::vector<std::size_t> per_source(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t x) {
    const auto d = chain_lengths_from(g, x);
    per_source[x] = *std::max_element(d.begin(), d.end());
  });
  return *std::max_element(per_source.begin(), per_source.end());
}

/// Two closed-chain lengths through x with gcd 1, the first such pair in
/// increasing order of the larger length.
inline std::pair<std::size_t, std::size_t> find_coprime_cycles(const TransitionGraph& g, std::size_t x) {
  if (x >= g.size()) throw error(errc::out_of_range, "vertex " + std::to_string(x) + " does not exist");
  const Components c = strongly_connected_components(g);
  const std::size_t p = graph_period(g, c, c.id[x]);
  if (p != 1)
    throw error(errc::no_coprime_cycles,
                "vertex " + std::to_string(x) + " lies in a component of period " + std::to_string(p));
  const std::size_t n = g.size();
  const std::size_t cap = 4 * n * n + 4;
  std::vector<char> cur(n, 0), next(n, 0);
  cur[x] = 1;
  std::vector<std::size_t> lengths;
  for (std::size_t len = 1; len <= cap; ++len) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t v = 0; v < n; ++v)
      if (cur[v])
        for (Index w : g.successors(v)) next[w] = 1;
    cur.swap(next);
    if (!cur[x]) continue;
    for (std::size_t l1 : lengths)
      if (std::gcd(l1, len) == 1) return {l1, len};
    lengths.push_back(len);
  }
  throw error(errc::no_coprime_cycles, "no coprime pair found below length " + std::to_string(cap));
}

/// Everything the chain module reports about one graph.
struct ChainAnalysis {
  Components components;
  bool is_strongly_connected = false;
  /// Period per component; 0 for components without an internal edge.
  std::vector<std::size_t> period;
  /// Cyclic classes per component (empty for period 0).
  std::vector<std::vector<std::vector<Index>>> classes;
  std::vector<Index> chain_recurrent;
  std::optional<std::size_t> diameter;
};

inline ChainAnalysis analyze_chains(const TransitionGraph& g) {
  ChainAnalysis a;
  a.components = strongly_connected_components(g);
  const std::size_t k = a.components.count();
  a.period.resize(k);
  a.classes.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    a.period[c] = graph_period(g, a.components, c);
    if (a.period[c] > 0) a.classes[c] = cyclic_classes(g, a.components, c);
  }
  a.is_strongly_connected = k == 1 && a.period[0] > 0;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (a.period[a.components.id[v]] > 0) a.chain_recurrent.push_back(static_cast<Index>(v));
  if (a.is_strongly_connected) a.diameter = chain_diameter(g);
  return a;
}

}  // namespace uchain
