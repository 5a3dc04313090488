#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/graph.hpp"
#include "bcp/params.hpp"
#include "bcp/region.hpp"
#include "bcp/rng.hpp"
#include "bcp/union_find.hpp"

namespace bcp {

// What the chain runs on: dynamic sites plus, optionally, a layer of
// fixed-spin neighbors. A lattice region with an s >= 1 boundary keeps its
// boundary vertices pinned at spin s; since they are also wired together
// externally, they are represented by a single pseudo-vertex on the cluster
// side. s = 0 drops the boundary edges entirely (free boundary).
struct System {
  int n_sites = 0;
  std::vector<std::pair<int, int>> bonds;           // dynamic-dynamic
  std::vector<int> boundary_bond_site;              // dynamic endpoint of each fixed bond
  std::vector<std::vector<int>> adj;                // dynamic neighbors per site
  std::vector<int> fixed_degree;                    // fixed-spin neighbors per site
  int fixed_spin = 0;                               // 0: none
  int origin_site = 0;
  int probe_site = 0;
  std::vector<int> surface_sites;                   // outermost interior shell

  bool wired() const { return fixed_spin >= 1; }
  int bond_count() const { return static_cast<int>(bonds.size()); }
  int boundary_bond_count() const { return static_cast<int>(boundary_bond_site.size()); }

  static System from_graph(const Graph& g) {
    System s;
    s.n_sites = g.n;
    s.bonds = g.edges;
    s.adj = g.adj;
    s.fixed_degree.assign(static_cast<std::size_t>(g.n), 0);
    s.origin_site = 0;
    s.probe_site = g.n - 1;
    return s;
  }

  static System from_region(const Region& region, int boundary_spin) {
    if (boundary_spin < 0) throw validation_error("system: boundary spin must be >= 0");
    System s;
    s.n_sites = region.interior_count;
    s.adj.assign(static_cast<std::size_t>(s.n_sites), {});
    s.fixed_degree.assign(static_cast<std::size_t>(s.n_sites), 0);
    s.fixed_spin = boundary_spin;
    for (auto [u, v] : region.edges) {
      const bool ui = region.is_interior(u), vi = region.is_interior(v);
      if (ui && vi) {
        s.bonds.emplace_back(u, v);
        s.adj[u].push_back(v);
        s.adj[v].push_back(u);
      } else if (boundary_spin >= 1) {
        const int site = ui ? u : v;
        s.boundary_bond_site.push_back(site);
        ++s.fixed_degree[site];
      }
    }
    s.origin_site = region.origin_index();
    if (s.origin_site < 0 || !region.is_interior(s.origin_site))
      s.origin_site = 0;
    // probe: the interior vertex with the largest first coordinate on the
    // axis through the origin, i.e. (hi_0, 0, ..., 0) for boxes
    {
      std::vector<int> c(static_cast<std::size_t>(region.dim), 0);
      c[0] = region.hi[0];
      const int idx = region.find_index(c);
      s.probe_site = (idx >= 0 && region.is_interior(idx)) ? idx : s.n_sites - 1;
    }
    for (int i = 0; i < region.interior_count; ++i) {
      bool on_surface = false;
      for (int axis = 0; axis < region.dim; ++axis)
        on_surface |= region.coords[i][axis] == region.lo[axis] ||
                      region.coords[i][axis] == region.hi[axis];
      if (on_surface) s.surface_sites.push_back(i);
    }
    return s;
  }

  static System torus(int d, int side) {
    System s = from_graph(torus_graph(d, side));
    std::vector<int> c(static_cast<std::size_t>(d), 0);
    c[0] = side / 2;
    long idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * side + c[i];
    s.probe_site = static_cast<int>(idx);
    return s;
  }
};

using SpinConfig = std::vector<std::uint8_t>;

struct BondState {
  std::vector<std::uint8_t> bond_open;           // per System::bonds
  std::vector<std::uint8_t> boundary_bond_open;  // per System::boundary_bond_site
};

// Bond refresh given the spins: an edge may open only between equal nonzero
// spins, and then opens independently with probability p. Fixed-spin bonds
// compare against the boundary spin.
inline BondState spin_to_bond(const System& sys, const SpinConfig& spins, double p,
                              SplitMix64& rng) {
  BondState out;
  out.bond_open.resize(sys.bonds.size());
  out.boundary_bond_open.resize(sys.boundary_bond_site.size());
  for (std::size_t e = 0; e < sys.bonds.size(); ++e) {
    const auto [u, v] = sys.bonds[e];
    const bool eligible = spins[u] != 0 && spins[u] == spins[v];
    out.bond_open[e] = eligible && uniform01(rng) < p;
  }
  for (std::size_t e = 0; e < sys.boundary_bond_site.size(); ++e) {
    const bool eligible = spins[sys.boundary_bond_site[e]] == sys.fixed_spin;
    out.boundary_bond_open[e] = eligible && uniform01(rng) < p;
  }
  return out;
}

// Cluster structure of a bond configuration. Site cluster ids are DSU roots
// over n_sites + 1 entries; the extra entry is the wired boundary
// pseudo-vertex (only meaningful when the system is wired).
struct ClusterLabels {
  UnionFind uf;
  int pseudo;  // index of the boundary pseudo-vertex
  int root(int site) { return uf.find(site); }
  bool touches_boundary(int site) { return uf.same(site, pseudo); }
};

inline ClusterLabels cluster_labels(const System& sys, const SpinConfig& spins,
                                    const BondState& bonds) {
  ClusterLabels labels{UnionFind(sys.n_sites + 1), sys.n_sites};
  for (std::size_t e = 0; e < sys.bonds.size(); ++e)
    if (bonds.bond_open[e]) labels.uf.unite(sys.bonds[e].first, sys.bonds[e].second);
  for (std::size_t e = 0; e < sys.boundary_bond_site.size(); ++e)
    if (bonds.boundary_bond_open[e])
      labels.uf.unite(sys.boundary_bond_site[e], labels.pseudo);
  (void)spins;
  return labels;
}

// Spin refresh given the bonds: closed sites stay 0, clusters wired to the
// boundary take the boundary spin, every other open cluster draws a uniform
// nonzero spin (deterministically spin 1 when q = 1). Cluster draws happen
// in ascending order of the smallest site index in the cluster.
inline SpinConfig bond_to_spin(const System& sys, const SpinConfig& old_spins,
                               const BondState& bonds, int q, SplitMix64& rng) {
  if (q < 1) throw validation_error("bond_to_spin: need q >= 1");
  ClusterLabels labels = cluster_labels(sys, old_spins, bonds);
  SpinConfig out(static_cast<std::size_t>(sys.n_sites), 0);
  std::vector<int> spin_of_root(static_cast<std::size_t>(sys.n_sites) + 1, -1);
  if (sys.wired()) spin_of_root[labels.root(labels.pseudo)] = sys.fixed_spin;
  for (int x = 0; x < sys.n_sites; ++x) {
    if (old_spins[x] == 0) continue;
    const int r = labels.root(x);
    if (spin_of_root[r] < 0)
      spin_of_root[r] =
          q == 1 ? 1 : static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(q))) + 1;
    out[x] = static_cast<std::uint8_t>(spin_of_root[r]);
  }
  return out;
}

// Single-site heat-bath update. Conditional weights given the neighbors:
//   weight(0) = e^Delta,  weight(s) = exp(-K m + 2K n_s) for s = 1..q,
// with m the number of nonzero neighbors and n_s the number of neighbors
// carrying spin s (fixed neighbors count toward the boundary spin).
inline void heat_bath_site(const System& sys, SpinConfig& spins, int x, double K,
                           double Delta, int q, SplitMix64& rng) {
  int m = sys.fixed_spin >= 1 ? sys.fixed_degree[x] : 0;
  int count[65] = {};
  for (int nb : sys.adj[x]) {
    if (spins[nb] == 0) continue;
    ++m;
    ++count[spins[nb]];
  }
  if (sys.fixed_spin >= 1) count[sys.fixed_spin] += sys.fixed_degree[x];
  double w[65];
  w[0] = std::exp(Delta);
  double total = w[0];
  for (int s = 1; s <= q; ++s) {
    w[s] = std::exp(K * (2.0 * count[s] - m));
    total += w[s];
  }
  double u = uniform01(rng) * total;
  int chosen = q;  // falls through to the last value on rounding
  for (int s = 0; s <= q; ++s) {
    if (u < w[s]) {
      chosen = s;
      break;
    }
    u -= w[s];
  }
  spins[x] = static_cast<std::uint8_t>(chosen);
}

struct ChainState {
  SpinConfig spins;
  std::uint64_t sweeps_done = 0;
  SplitMix64 rng;
};

// Scratch filled by a sweep so observables can reuse the cluster pass.
struct SweepScratch {
  BondState bonds;
  ClusterLabels labels{UnionFind(1), 0};
  SpinConfig pre_cluster_spins;
};

// One sweep: a full heat-bath pass (raster order, or a fresh random
// permutation when random_order) followed by one cluster refresh.
inline void sweep(const System& sys, ChainState& state, double K, double Delta,
                  int q, double p, bool random_order = false,
                  SweepScratch* scratch = nullptr) {
  if (q < 1 || q > 64) throw validation_error("sweep: need 1 <= q <= 64");
  if (sys.fixed_spin > q) throw validation_error("sweep: boundary spin exceeds q");
  if (random_order) {
    std::vector<int> order(static_cast<std::size_t>(sys.n_sites));
    std::iota(order.begin(), order.end(), 0);
    for (int i = sys.n_sites - 1; i > 0; --i) {
      const int j = static_cast<int>(uniform_below(state.rng, static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    for (int x : order) heat_bath_site(sys, state.spins, x, K, Delta, q, state.rng);
  } else {
    for (int x = 0; x < sys.n_sites; ++x)
      heat_bath_site(sys, state.spins, x, K, Delta, q, state.rng);
  }
  BondState bonds = spin_to_bond(sys, state.spins, p, state.rng);
  if (scratch) {
    scratch->labels = cluster_labels(sys, state.spins, bonds);
    scratch->pre_cluster_spins = state.spins;
  }
  state.spins = bond_to_spin(sys, state.spins, bonds, q, state.rng);
  if (scratch) scratch->bonds = std::move(bonds);
  state.sweeps_done += 1;
}

struct ChainConfig {
  std::uint64_t sweeps = 1000;
  std::uint64_t burn_in = 100;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // parallel chains pick distinct streams
  bool random_order = false;
  enum class Init { random, ones, zeros };
  Init init = Init::random;
};

struct Checkpoint {
  int version = 1;
  std::uint64_t sweeps_done = 0;
  std::uint64_t rng_state = 0;
  int n_sites = 0;
  int q = 0;
  SpinConfig spins;
};

struct ObservableSeries {
  std::vector<std::string> columns;
  std::vector<std::uint64_t> sweep_index;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::size_t j) const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[j]);
    return v;
  }

  int column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<int>(j);
    throw validation_error("series: no column named " + name);
  }
};

inline const std::vector<std::string>& observable_columns() {
  static const std::vector<std::string> cols = {
      "open_vertex_density", "open_edge_density",   "largest_cluster_frac",
      "closed_cluster_frac", "boundary_connect",    "spin_eq_nonzero",
      "spin_both_nonzero",   "conn_origin_probe"};
  return cols;
}

namespace detail {

inline std::vector<double> measure_observables(const System& sys,
                                               const SpinConfig& spins_pre,
                                               const SpinConfig& spins_post,
                                               const BondState& bonds,
                                               ClusterLabels& labels) {
  const double n = sys.n_sites;
  int open_sites = 0;
  for (int x = 0; x < sys.n_sites; ++x) open_sites += spins_post[x] != 0;

  int open_bonds = 0;
  for (auto b : bonds.bond_open) open_bonds += b;
  for (auto b : bonds.boundary_bond_open) open_bonds += b;
  const int total_bonds = sys.bond_count() + sys.boundary_bond_count();

  // largest open cluster, counting dynamic sites only
  std::vector<int> size_of_root(static_cast<std::size_t>(sys.n_sites) + 1, 0);
  int largest = 0;
  for (int x = 0; x < sys.n_sites; ++x) {
    if (spins_pre[x] == 0) continue;
    largest = std::max(largest, ++size_of_root[labels.root(x)]);
  }

  // largest closed-vertex cluster under the dynamic adjacency
  int closed_largest = 0;
  {
    UnionFind uf(sys.n_sites);
    for (auto [u, v] : sys.bonds)
      if (spins_post[u] == 0 && spins_post[v] == 0) uf.unite(u, v);
    std::vector<int> cnt(static_cast<std::size_t>(sys.n_sites), 0);
    for (int x = 0; x < sys.n_sites; ++x)
      if (spins_post[x] == 0) closed_largest = std::max(closed_largest, ++cnt[uf.find(x)]);
  }

  double boundary_connect = 0.0;
  if (spins_pre[sys.origin_site] != 0) {
    if (sys.wired()) {
      boundary_connect = labels.touches_boundary(sys.origin_site) ? 1.0 : 0.0;
    } else {
      for (int srf : sys.surface_sites)
        if (spins_pre[srf] != 0 &&
            labels.root(srf) == labels.root(sys.origin_site)) {
          boundary_connect = 1.0;
          break;
        }
    }
  }

  const int s0 = spins_post[sys.origin_site], sx = spins_post[sys.probe_site];
  const bool conn = spins_pre[sys.origin_site] != 0 && spins_pre[sys.probe_site] != 0 &&
                    labels.root(sys.origin_site) == labels.root(sys.probe_site);

  return {open_sites / n,
          total_bonds == 0 ? 0.0 : static_cast<double>(open_bonds) / total_bonds,
          largest / n,
          closed_largest / n,
          boundary_connect,
          (s0 != 0 && s0 == sx) ? 1.0 : 0.0,
          (s0 != 0 && sx != 0) ? 1.0 : 0.0,
          conn ? 1.0 : 0.0};
}

}  // namespace detail

// Runs the hybrid chain and records the observable series. Deterministic in
// (seed, stream): the chain consumes a single SplitMix64 stream. Sweeps are
// indexed from 1; sweep s is recorded when s > burn_in and s - burn_in - 1
// is a multiple of thin. Resuming from a checkpoint continues the sweep
// counter, so an already-burned-in chain records immediately.
inline ObservableSeries run_chain(const System& sys, const ModelParams& params,
                                  const ChainConfig& config,
                                  const Checkpoint* resume = nullptr,
                                  Checkpoint* final_state = nullptr) {
  if (std::floor(params.q) != params.q || params.q < 1.0 || params.q > 64.0)
    throw validation_error("run_chain: spin sampling needs integer q in [1, 64]");
  const int q = static_cast<int>(params.q);
  if (sys.fixed_spin > q) throw validation_error("run_chain: boundary spin exceeds q");
  if (config.thin == 0) throw validation_error("run_chain: thin must be >= 1");
  const double K = params.K();
  const double Delta = params.Delta();

  ChainState state;
  if (resume) {
    if (resume->n_sites != sys.n_sites || resume->q != q)
      throw validation_error("run_chain: checkpoint does not match system");
    state.spins = resume->spins;
    state.sweeps_done = resume->sweeps_done;
    state.rng.set_state(resume->rng_state);
  } else {
    if (config.burn_in >= config.sweeps)
      throw validation_error("run_chain: burn_in >= sweeps leaves no samples");
    state.rng = SplitMix64::for_stream(config.seed, config.stream);
    state.spins.assign(static_cast<std::size_t>(sys.n_sites), 0);
    switch (config.init) {
      case ChainConfig::Init::zeros:
        break;
      case ChainConfig::Init::ones:
        std::fill(state.spins.begin(), state.spins.end(), std::uint8_t{1});
        break;
      case ChainConfig::Init::random:
        for (auto& s : state.spins)
          s = static_cast<std::uint8_t>(uniform_below(state.rng, static_cast<std::uint64_t>(q) + 1));
        break;
    }
  }

  ObservableSeries series;
  series.columns = observable_columns();
  SweepScratch scratch;
  const std::uint64_t target = state.sweeps_done + config.sweeps;
  while (state.sweeps_done < target) {
    sweep(sys, state, K, Delta, q, params.p, config.random_order, &scratch);
    const std::uint64_t s = state.sweeps_done;
    if (s > config.burn_in && (s - config.burn_in - 1) % config.thin == 0) {
      series.sweep_index.push_back(s);
      series.rows.push_back(detail::measure_observables(
          sys, scratch.pre_cluster_spins, state.spins, scratch.bonds, scratch.labels));
    }
  }
  if (final_state) {
    final_state->version = 1;
    final_state->sweeps_done = state.sweeps_done;
    final_state->rng_state = state.rng.state();
    final_state->n_sites = sys.n_sites;
    final_state->q = q;
    final_state->spins = state.spins;
  }
  return series;
}

}  // namespace bcp
