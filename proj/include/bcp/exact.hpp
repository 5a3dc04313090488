#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "bcp/distribution.hpp"
#include "bcp/errors.hpp"
#include "bcp/graph.hpp"
#include "bcp/params.hpp"
#include "bcp/region.hpp"

namespace bcp {

// Enumeration budgets for the exact engine. Graph-level measures default to
// small instances; region-level enumeration is bounded by the total number
// of vertex-edge configurations it would visit. Callers that knowingly pay
// for a bigger sweep pass a widened budget.
struct EnumLimits {
  int graph_vertices = 6;
  int graph_edges = 8;
  int region_interior = 12;
  std::uint64_t theta_work = 1ull << 22;
  int rc_edges = 26;
};

// A vertex-edge configuration: bit i of psi = vertex i open, bit e of omega
// = edge e open. Compatibility (open edges need open endpoints) is an
// invariant of everything the engine emits. For region measures psi covers
// interior vertices only; the boundary state is carried by the measure.
struct ThetaKey {
  std::uint32_t psi = 0;
  std::uint32_t omega = 0;
  bool operator==(const ThetaKey&) const = default;
};

// Spin configuration packed in base q+1, vertex 0 in the most significant
// digit so that ascending codes enumerate configurations lexicographically.
struct SpinKey {
  std::uint32_t code = 0;
  bool operator==(const SpinKey&) const = default;
};

struct VertexKey {
  std::uint32_t psi = 0;
  bool operator==(const VertexKey&) const = default;
};

struct EdgeKey {
  std::uint32_t omega = 0;
  bool operator==(const EdgeKey&) const = default;
};

struct CoupledKey {
  std::uint32_t spin_code = 0;
  std::uint32_t psi = 0;
  std::uint32_t omega = 0;
  bool operator==(const CoupledKey&) const = default;
};

using ThetaDist = FiniteDistribution<ThetaKey>;
using SpinDist = FiniteDistribution<SpinKey>;
using VertexDist = FiniteDistribution<VertexKey>;
using EdgeDist = FiniteDistribution<EdgeKey>;
using CoupledDist = FiniteDistribution<CoupledKey>;

inline std::vector<int> decode_spins(std::uint32_t code, int n, int q) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    s[i] = static_cast<int>(code % static_cast<std::uint32_t>(q + 1));
    code /= static_cast<std::uint32_t>(q + 1);
  }
  return s;
}

inline std::uint32_t encode_spins(const std::vector<int>& s, int q) {
  std::uint32_t code = 0;
  for (int v : s) code = code * static_cast<std::uint32_t>(q + 1) + static_cast<std::uint32_t>(v);
  return code;
}

// Mask whose bit i is digit i of code read most-significant-first; ascending
// codes then walk bit tuples (b0, b1, ...) in lexicographic order.
inline std::uint32_t lex_mask(std::uint32_t code, int n) {
  std::uint32_t m = 0;
  for (int i = 0; i < n; ++i)
    if ((code >> (n - 1 - i)) & 1u) m |= 1u << i;
  return m;
}

namespace detail {

// Open-cluster count of the configuration: vertices flagged in open_mask,
// edges flagged in omega. If wired_root >= 0, every open vertex in
// wired_mask is pre-merged with that representative (external wiring).
// Vertices beyond 64 never occur in the exact engine.
inline int count_open_clusters(int n_vertices,
                               const std::pair<int, int>* edges, int n_edges,
                               std::uint64_t open_mask, std::uint32_t omega,
                               std::uint64_t wired_mask = 0) {
  int parent[64];
  int wired_root = -1;
  for (int i = 0; i < n_vertices; ++i) {
    if (!((open_mask >> i) & 1ull)) {
      parent[i] = -1;
      continue;
    }
    if ((wired_mask >> i) & 1ull) {
      if (wired_root < 0) wired_root = i;
      parent[i] = wired_root;
    } else {
      parent[i] = i;
    }
  }
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int e = 0; e < n_edges; ++e) {
    if (!((omega >> e) & 1u)) continue;
    int ru = find(edges[e].first);
    int rv = find(edges[e].second);
    if (ru != rv) parent[ru] = rv;
  }
  int k = 0;
  for (int i = 0; i < n_vertices; ++i)
    if (parent[i] >= 0 && find(i) == i) ++k;
  return k;
}

inline void check_graph_limits(const Graph& g, const EnumLimits& lim) {
  if (g.n > lim.graph_vertices || g.edge_count() > lim.graph_edges)
    throw capacity_error("exact engine: graph exceeds enumeration cap");
}

// Edges openable under the given open-vertex mask (both endpoints open).
inline std::uint32_t open_edge_mask(const std::vector<std::pair<int, int>>& edges,
                                    std::uint64_t open_vertices) {
  std::uint32_t m = 0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (((open_vertices >> edges[e].first) & 1ull) &&
        ((open_vertices >> edges[e].second) & 1ull))
      m |= 1u << e;
  return m;
}

}  // namespace detail

// Support of the vertex-edge measure on a graph: all (psi, omega) with open
// edges inside the open-vertex set, in lexicographic order.
inline std::vector<ThetaKey> enumerate_theta(const Graph& g, const EnumLimits& lim = {}) {
  detail::check_graph_limits(g, lim);
  const int n = g.n, m = g.edge_count();
  std::vector<ThetaKey> out;
  for (std::uint32_t pc = 0; pc < (1u << n); ++pc) {
    const std::uint32_t psi = lex_mask(pc, n);
    const std::uint32_t emask = detail::open_edge_mask(g.edges, psi);
    for (std::uint32_t wc = 0; wc < (1u << m); ++wc) {
      const std::uint32_t omega = lex_mask(wc, m);
      if (omega & ~emask) continue;
      out.push_back({psi, omega});
    }
  }
  return out;
}

// Exact vertex-edge (diluted random-cluster) measure on a finite graph:
//   weight(psi, omega) = r^{|E_psi|} q^{k} (a/(1-a))^{|psi|} (p/(1-p))^{|omega|}
// with r = sqrt(1-p) and k the number of open clusters. a = 1 forces every
// vertex open and drops the activity factor.
inline ThetaDist drc_measure(const Graph& g, const ModelParams& params,
                             const EnumLimits& lim = {}) {
  detail::check_graph_limits(g, lim);
  const int n = g.n, m = g.edge_count();
  const bool all_open = params.a == 1.0;
  const double log_r = 0.5 * std::log1p(-params.p);
  const double log_q = std::log(params.q);
  const double log_ra = all_open ? 0.0 : params.log_vertex_ratio();
  const double log_rp = params.log_edge_ratio();

  ThetaDist dist;
  for (std::uint32_t pc = 0; pc < (1u << n); ++pc) {
    const std::uint32_t psi = lex_mask(pc, n);
    if (all_open && psi != (n == 32 ? ~0u : (1u << n) - 1u)) continue;
    const std::uint32_t emask = detail::open_edge_mask(g.edges, psi);
    const int e_psi = __builtin_popcount(emask);
    const int v_psi = __builtin_popcount(psi);
    for (std::uint32_t wc = 0; wc < (1u << m); ++wc) {
      const std::uint32_t omega = lex_mask(wc, m);
      if (omega & ~emask) continue;
      const int eta = __builtin_popcount(omega);
      if (params.p == 0.0 && eta > 0) continue;
      const int k = detail::count_open_clusters(n, g.edges.data(), m, psi, omega);
      double lw = e_psi * log_r + k * log_q + v_psi * log_ra;
      if (eta > 0) lw += eta * log_rp;
      dist.add({psi, omega}, lw);
    }
  }
  dist.normalize();
  return dist;
}

// Exact spin measure on a finite graph with q nonzero spin values plus the
// dilution value 0:
//   weight(sigma) = exp(-K |E_sigma| + 2K sum_e [sigma_x = sigma_y != 0]
//                       + Delta #{x : sigma_x = 0})
// where E_sigma is the set of edges whose endpoints are both nonzero.
inline SpinDist bcp_measure(const Graph& g, double K, double Delta, int q,
                            const EnumLimits& lim = {}) {
  detail::check_graph_limits(g, lim);
  if (q < 1) throw validation_error("spin measure: need integer q >= 1");
  if (!(K >= 0.0)) throw validation_error("spin measure: need K >= 0");
  const int n = g.n, m = g.edge_count();
  std::uint64_t states = 1;
  for (int i = 0; i < n; ++i) {
    states *= static_cast<std::uint64_t>(q + 1);
    if (states > (1u << 22)) throw capacity_error("spin measure: state space too large");
  }
  SpinDist dist;
  dist.reserve(states);
  for (std::uint64_t code = 0; code < states; ++code) {
    const auto s = decode_spins(static_cast<std::uint32_t>(code), n, q);
    int both_nonzero = 0, equal_nonzero = 0, zeros = 0;
    for (int e = 0; e < m; ++e) {
      const int su = s[g.edges[e].first], sv = s[g.edges[e].second];
      if (su != 0 && sv != 0) {
        ++both_nonzero;
        if (su == sv) ++equal_nonzero;
      }
    }
    for (int v = 0; v < n; ++v) zeros += s[v] == 0;
    dist.add({static_cast<std::uint32_t>(code)},
             -K * both_nonzero + 2.0 * K * equal_nonzero + Delta * zeros);
  }
  dist.normalize();
  return dist;
}

// Exact joint measure of (sigma, psi, omega): the spin measure and the
// vertex-edge measure are its two marginals. Support: psi is the nonzero
// set of sigma, open edges require equal nonzero endpoint spins.
//   weight = r^{|E_psi|} (a/(1-a))^{|psi|} (p/(1-p))^{|omega|}
// expressed below through K and Delta (r = e^{-K}, a/(1-a) = e^{-Delta}).
inline CoupledDist coupling_measure(const Graph& g, double K, double Delta, int q,
                                    const EnumLimits& lim = {}) {
  detail::check_graph_limits(g, lim);
  if (q < 1) throw validation_error("coupling measure: need integer q >= 1");
  if (!(K >= 0.0)) throw validation_error("coupling measure: need K >= 0");
  const int n = g.n, m = g.edge_count();
  const double p = -std::expm1(-2.0 * K);
  const double log_rp = p == 0.0 ? 0.0 : std::log(std::expm1(2.0 * K));
  std::uint64_t states = 1;
  for (int i = 0; i < n; ++i) {
    states *= static_cast<std::uint64_t>(q + 1);
    if (states > (1u << 20)) throw capacity_error("coupling measure: state space too large");
  }
  CoupledDist dist;
  for (std::uint64_t code = 0; code < states; ++code) {
    const auto s = decode_spins(static_cast<std::uint32_t>(code), n, q);
    std::uint32_t psi = 0;
    for (int v = 0; v < n; ++v)
      if (s[v] != 0) psi |= 1u << v;
    std::uint32_t eligible = 0;  // edges with equal nonzero endpoint spins
    int e_psi = 0;
    for (int e = 0; e < m; ++e) {
      const int su = s[g.edges[e].first], sv = s[g.edges[e].second];
      if (su != 0 && sv != 0) {
        ++e_psi;
        if (su == sv) eligible |= 1u << e;
      }
    }
    const int v_psi = __builtin_popcount(psi);
    for (std::uint32_t wc = 0; wc < (1u << m); ++wc) {
      const std::uint32_t omega = lex_mask(wc, m);
      if (omega & ~eligible) continue;
      const int eta = __builtin_popcount(omega);
      if (p == 0.0 && eta > 0) continue;
      dist.add({static_cast<std::uint32_t>(code), psi, omega},
               -K * e_psi - Delta * v_psi + eta * log_rp);
    }
  }
  dist.normalize();
  return dist;
}

// Exact vertex-edge measure on a lattice region under a zero or one
// boundary. psi runs over interior vertices; with the one boundary every
// boundary vertex is open and externally wired, and the cluster count k
// counts the open clusters of the extended configuration that meet the
// closure (the external wiring contributes a single cluster through the
// boundary). Activity applies to interior vertices only; r and the edge
// ratio apply to all region edges.
inline ThetaDist drc_measure_with_boundary(const Region& region,
                                           const BoundaryCondition& bc,
                                           const ModelParams& params,
                                           const EnumLimits& lim = {}) {
  if (bc.kind == BoundaryCondition::Kind::periodic)
    throw validation_error("exact region measure: periodic boundary unsupported");
  if (region.interior_count > lim.region_interior || region.interior_count > 32)
    throw capacity_error("exact region measure: interior exceeds cap");
  if (region.edge_count() > 32)
    throw capacity_error("exact region measure: too many edges");
  const int nv = region.interior_count;
  const int nc = region.closure_count();
  const int m = region.edge_count();
  const bool boundary_open = bc.vertices_open();
  const bool all_open = params.a == 1.0;
  const std::uint64_t boundary_mask =
      boundary_open ? (((nc == 64 ? ~0ull : (1ull << nc) - 1)) ^ ((1ull << nv) - 1)) : 0ull;

  // Work estimate before enumerating anything.
  std::uint64_t work = 0;
  for (std::uint32_t psi = 0; psi < (1u << nv); ++psi) {
    if (all_open && psi != (1u << nv) - 1u) continue;
    const std::uint64_t open = static_cast<std::uint64_t>(psi) | boundary_mask;
    const std::uint32_t emask = detail::open_edge_mask(region.edges, open);
    work += 1ull << __builtin_popcount(emask);
    if (work > lim.theta_work)
      throw capacity_error("exact region measure: configuration count exceeds budget");
  }

  const double log_r = 0.5 * std::log1p(-params.p);
  const double log_q = std::log(params.q);
  const double log_ra = all_open ? 0.0 : params.log_vertex_ratio();
  const double log_rp = params.log_edge_ratio();

  ThetaDist dist;
  dist.reserve(work);
  for (std::uint32_t pc = 0; pc < (1u << nv); ++pc) {
    const std::uint32_t psi = lex_mask(pc, nv);
    if (all_open && psi != (1u << nv) - 1u) continue;
    const std::uint64_t open = static_cast<std::uint64_t>(psi) | boundary_mask;
    const std::uint32_t emask = detail::open_edge_mask(region.edges, open);
    const int e_psi = __builtin_popcount(emask);
    const int v_psi = __builtin_popcount(psi);
    const double base = e_psi * log_r + v_psi * log_ra;
    // Submask walk over openable edges (descending); export layers sort.
    std::uint32_t omega = emask;
    for (;;) {
      const int eta = __builtin_popcount(omega);
      if (!(params.p == 0.0 && eta > 0)) {
        const int k = detail::count_open_clusters(nc, region.edges.data(), m, open,
                                                  omega, boundary_mask);
        double lw = base + k * log_q;
        if (eta > 0) lw += eta * log_rp;
        dist.add({psi, omega}, lw);
      }
      if (omega == 0) break;
      omega = (omega - 1) & emask;
    }
  }
  dist.normalize();
  return dist;
}

// Marginal of the vertex component. Aggregation is done on raw weights in
// log space so the marginal's log_total matches the joint's.
inline VertexDist vertex_marginal(const ThetaDist& dist) {
  std::map<std::uint32_t, std::vector<double>> groups;
  for (std::size_t i = 0; i < dist.size(); ++i)
    groups[dist.config(i).psi].push_back(dist.log_weight(i));
  VertexDist out;
  for (auto& [psi, lws] : groups) {
    double m = lws[0];
    for (double lw : lws) m = std::max(m, lw);
    KahanSum s;
    for (double lw : lws) s.add(std::exp(lw - m));
    out.add({psi}, m + std::log(s.value()));
  }
  out.normalize();
  return out;
}

inline EdgeDist edge_marginal(const ThetaDist& dist) {
  std::map<std::uint32_t, std::vector<double>> groups;
  for (std::size_t i = 0; i < dist.size(); ++i)
    groups[dist.config(i).omega].push_back(dist.log_weight(i));
  EdgeDist out;
  for (auto& [omega, lws] : groups) {
    double m = lws[0];
    for (double lw : lws) m = std::max(m, lw);
    KahanSum s;
    for (double lw : lws) s.add(std::exp(lw - m));
    out.add({omega}, m + std::log(s.value()));
  }
  out.normalize();
  return out;
}

// Random-cluster partition function on an explicit vertex/edge list:
//   Z = sum_omega q^{k(omega)} (p/(1-p))^{|omega|}
// where k counts all components (isolated vertices included) after the
// wired classes are merged. Parallel edges are allowed; loops are not.
inline double rc_partition(int n_vertices,
                           const std::vector<std::pair<int, int>>& edges,
                           double p, double q,
                           const std::vector<std::vector<int>>& wired_classes = {},
                           const EnumLimits& lim = {}) {
  if (n_vertices < 0 || n_vertices > 64)
    throw capacity_error("rc partition: vertex count out of range");
  if (static_cast<int>(edges.size()) > lim.rc_edges || edges.size() > 26)
    throw capacity_error("rc partition: too many edges");
  if (!(p >= 0.0) || p >= 1.0) throw validation_error("rc partition: need p in [0, 1)");
  if (!(q > 0.0)) throw validation_error("rc partition: need q > 0");
  if (n_vertices == 0) return 1.0;  // empty product: single empty configuration

  const int m = static_cast<int>(edges.size());
  for (auto [u, v] : edges)
    if (u < 0 || v < 0 || u >= n_vertices || v >= n_vertices || u == v)
      throw validation_error("rc partition: bad edge");

  int base_parent[64];
  for (int i = 0; i < n_vertices; ++i) base_parent[i] = i;
  {
    // apply external wiring once; per-omega unions start from this state
    auto find0 = [&](int x) {
      while (base_parent[x] != x) x = base_parent[x] = base_parent[base_parent[x]];
      return x;
    };
    for (const auto& cls : wired_classes)
      for (std::size_t i = 1; i < cls.size(); ++i) {
        int a = find0(cls[0]), b = find0(cls[i]);
        if (a != b) base_parent[b] = a;
      }
    for (int i = 0; i < n_vertices; ++i) base_parent[i] = find0(i);
  }

  const double ratio = p == 0.0 ? 0.0 : p / (1.0 - p);
  double ratio_pow[27], q_pow[66];
  ratio_pow[0] = 1.0;
  for (int j = 1; j <= m; ++j) ratio_pow[j] = ratio_pow[j - 1] * ratio;
  q_pow[0] = 1.0;
  for (int k = 1; k <= n_vertices; ++k) q_pow[k] = q_pow[k - 1] * q;

  KahanSum z;
  int parent[64];
  const std::uint32_t full = m == 0 ? 0u : (m == 32 ? ~0u : (1u << m) - 1u);
  std::uint32_t omega = full;
  for (;;) {
    if (!(p == 0.0 && omega != 0)) {
      for (int i = 0; i < n_vertices; ++i) parent[i] = base_parent[i];
      auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
      };
      for (int e = 0; e < m; ++e) {
        if (!((omega >> e) & 1u)) continue;
        int a = find(edges[e].first), b = find(edges[e].second);
        if (a != b) parent[a] = b;
      }
      int k = 0;
      for (int i = 0; i < n_vertices; ++i) k += find(i) == i;
      z.add(q_pow[k] * ratio_pow[__builtin_popcount(omega)]);
    }
    if (omega == 0) break;
    omega = (omega - 1) & full;
  }
  return z.value();
}

// Log random-cluster partition function of the open subgraph of each interior
// configuration, indexed by psi mask. Depends on (p, q) and the boundary but
// not on a, so scans over a reuse one table.
struct RcTable {
  std::vector<double> log_z;  // indexed by interior psi mask
};

inline RcTable rc_table_region(const Region& region, const BoundaryCondition& bc,
                               double p, double q, const EnumLimits& lim = {}) {
  if (bc.kind == BoundaryCondition::Kind::periodic)
    throw validation_error("rc table: periodic boundary unsupported");
  if (region.interior_count > lim.region_interior || region.interior_count > 24)
    throw capacity_error("rc table: interior exceeds cap");
  const int nv = region.interior_count;
  RcTable table;
  table.log_z.resize(1u << nv);
  for (std::uint32_t psi = 0; psi < (1u << nv); ++psi) {
    InducedSubgraph sub = induced_open_subgraph(region, psi, bc);
    std::vector<std::vector<int>> wired;
    if (bc.vertices_open()) {
      std::vector<int> cls;
      for (int i = 0; i < sub.graph.n; ++i)
        if (!region.is_interior(sub.closure_index[i])) cls.push_back(i);
      if (cls.size() > 1) wired.push_back(std::move(cls));
    }
    table.log_z[psi] =
        std::log(rc_partition(sub.graph.n, sub.graph.edges, p, q, wired, lim));
  }
  return table;
}

// Vertex marginal on a region computed through the factorized form
//   weight(psi) = r^{|E_psi|} (a/(1-a))^{|psi|} Z_rc(open subgraph of psi),
// which avoids materializing the joint table. Cross-checked against the
// aggregation route on small regions by the test suite.
inline VertexDist vertex_marginal_region(const Region& region,
                                         const BoundaryCondition& bc,
                                         const ModelParams& params,
                                         const EnumLimits& lim = {},
                                         const RcTable* precomputed = nullptr) {
  if (params.a == 1.0)
    throw validation_error("vertex marginal: a = 1 is a point mass on the full set");
  RcTable local;
  if (!precomputed) {
    local = rc_table_region(region, bc, params.p, params.q, lim);
    precomputed = &local;
  }
  const int nv = region.interior_count;
  const int nc = region.closure_count();
  const bool boundary_open = bc.vertices_open();
  const std::uint64_t boundary_mask =
      boundary_open ? (((nc == 64 ? ~0ull : (1ull << nc) - 1)) ^ ((1ull << nv) - 1)) : 0ull;
  const double log_r = 0.5 * std::log1p(-params.p);
  const double log_ra = params.log_vertex_ratio();
  VertexDist out;
  for (std::uint32_t pc = 0; pc < (1u << nv); ++pc) {
    const std::uint32_t psi = lex_mask(pc, nv);
    const std::uint64_t open = static_cast<std::uint64_t>(psi) | boundary_mask;
    const int e_psi = __builtin_popcount(detail::open_edge_mask(region.edges, open));
    out.add({psi}, e_psi * log_r + __builtin_popcount(psi) * log_ra +
                       precomputed->log_z[psi]);
  }
  out.normalize();
  return out;
}

// Probability that x and y lie in a common open cluster (x == y reduces to
// "x open").
inline double drc_connectivity(const ThetaDist& dist, const Graph& g, int x, int y) {
  if (x < 0 || y < 0 || x >= g.n || y >= g.n)
    throw validation_error("connectivity: vertex out of range");
  KahanSum s;
  const int m = g.edge_count();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const ThetaKey& t = dist.config(i);
    if (!((t.psi >> x) & 1u) || !((t.psi >> y) & 1u)) continue;
    if (x == y) {
      s.add(dist.probability(i));
      continue;
    }
    int parent[64];
    for (int v = 0; v < g.n; ++v) parent[v] = v;
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (int e = 0; e < m; ++e)
      if ((t.omega >> e) & 1u) {
        int a = find(g.edges[e].first), b = find(g.edges[e].second);
        if (a != b) parent[a] = b;
      }
    if (find(x) == find(y)) s.add(dist.probability(i));
  }
  return s.value();
}

// Two-point correlation of the spin measure:
//   tau(x, y) = P(sigma_x = sigma_y != 0) - (1/q) P(sigma_x sigma_y != 0).
// Equals (1 - 1/q) times the open-cluster connectivity of x and y.
inline double two_point(const Graph& g, double K, double Delta, int q, int x, int y,
                        const EnumLimits& lim = {}) {
  if (x < 0 || y < 0 || x >= g.n || y >= g.n)
    throw validation_error("two_point: vertex out of range");
  const SpinDist spins = bcp_measure(g, K, Delta, q, lim);
  KahanSum eq, both;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    const auto s = decode_spins(spins.config(i).code, g.n, q);
    if (s[x] != 0 && s[y] != 0) {
      both.add(spins.probability(i));
      if (s[x] == s[y]) eq.add(spins.probability(i));
    }
  }
  return eq.value() - both.value() / static_cast<double>(q);
}

// Single-spin (q = 1) reduction: the spin measure is an Ising model in the
// +-1 variables eta = 2 sigma - 1 with uniform coupling J and per-vertex
// field h_x depending on the degree.
struct IsingParams {
  double J = 0.0;
  std::vector<double> h;
};

inline IsingParams ising_map(double K, double Delta, const std::vector<int>& degrees) {
  if (!(K >= 0.0)) throw validation_error("ising map: need K >= 0");
  IsingParams out;
  out.J = K / 4.0;
  out.h.reserve(degrees.size());
  for (int d : degrees) out.h.push_back((K * d - 2.0 * Delta) / 4.0);
  return out;
}

// Inverse of the q = 1 reduction on a regular graph of the given degree.
inline ModelParams ising_inverse(double J, double h, int degree) {
  if (!(J >= 0.0)) throw validation_error("ising inverse: need J >= 0");
  const double K = 4.0 * J;
  const double Delta = (K * degree - 4.0 * h) / 2.0;
  return ModelParams::from_coupling(K, Delta, 1.0);
}

// Derivatives of the log partition function of the region measure in the
// coupling chart: d/dDelta at fixed p, and d/dK at fixed a. The second
// Delta-derivative is the open-vertex count variance (hence nonnegative).
struct LogZDerivatives {
  double d_delta = 0.0;
  double d_k = 0.0;
  double var_open_vertices = 0.0;
};

namespace detail {

template <class GetEdgeCount>
LogZDerivatives logz_derivatives_impl(const ThetaDist& dist, double p,
                                      GetEdgeCount&& open_pair_edges) {
  if (p == 0.0)
    throw validation_error("log-partition derivatives: K-derivative undefined at p = 0");
  KahanSum ev, ev2, ee, eeta;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const ThetaKey& t = dist.config(i);
    const double pr = dist.probability(i);
    const double v = __builtin_popcount(t.psi);
    ev.add(pr * v);
    ev2.add(pr * v * v);
    ee.add(pr * open_pair_edges(t.psi));
    eeta.add(pr * __builtin_popcount(t.omega));
  }
  LogZDerivatives out;
  out.d_delta = -ev.value();
  out.d_k = -ee.value() + (2.0 / p) * eeta.value();
  out.var_open_vertices = ev2.value() - ev.value() * ev.value();
  return out;
}

}  // namespace detail

inline LogZDerivatives log_partition_derivatives(const Graph& g,
                                                 const ModelParams& params,
                                                 const EnumLimits& lim = {}) {
  const ThetaDist dist = drc_measure(g, params, lim);
  return detail::logz_derivatives_impl(dist, params.p, [&](std::uint32_t psi) {
    return __builtin_popcount(detail::open_edge_mask(g.edges, psi));
  });
}

inline LogZDerivatives log_partition_derivatives(const Region& region,
                                                 const BoundaryCondition& bc,
                                                 const ModelParams& params,
                                                 const EnumLimits& lim = {}) {
  const ThetaDist dist = drc_measure_with_boundary(region, bc, params, lim);
  const int nv = region.interior_count;
  const int nc = region.closure_count();
  const std::uint64_t boundary_mask =
      bc.vertices_open() ? (((nc == 64 ? ~0ull : (1ull << nc) - 1)) ^ ((1ull << nv) - 1))
                         : 0ull;
  return detail::logz_derivatives_impl(dist, params.p, [&](std::uint32_t psi) {
    return __builtin_popcount(
        detail::open_edge_mask(region.edges, static_cast<std::uint64_t>(psi) | boundary_mask));
  });
}

}  // namespace bcp
