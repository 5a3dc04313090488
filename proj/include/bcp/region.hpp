#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/graph.hpp"

namespace bcp {

// Boundary state for a lattice region. "zero" closes everything outside the
// region, "one" opens everything outside (all boundary vertices open and
// externally wired into a single cluster). "periodic" identifies opposite
// faces of a box; it exists only for the q=1 Ising cross-checks and is
// rejected by the exact measures.
struct BoundaryCondition {
  enum class Kind { zero, one, periodic };
  Kind kind = Kind::zero;

  static BoundaryCondition Zero() { return {Kind::zero}; }
  static BoundaryCondition One() { return {Kind::one}; }
  static BoundaryCondition Periodic() { return {Kind::periodic}; }

  bool vertices_open() const { return kind == Kind::one; }

  std::string name() const {
    switch (kind) {
      case Kind::zero: return "zero";
      case Kind::one: return "one";
      default: return "periodic";
    }
  }

  static BoundaryCondition parse(const std::string& s) {
    if (s == "zero" || s == "0") return Zero();
    if (s == "one" || s == "1") return One();
    if (s == "periodic") return Periodic();
    throw validation_error("unknown boundary condition: " + s);
  }
};

// A finite box region of the d-dimensional integer lattice.
//
// Vertices are indexed over the closure: interior vertices first, in
// row-major order over the box (axis 0 slowest), then exterior-boundary
// vertices in lexicographic coordinate order. edges holds the lattice edges
// with at least one interior endpoint; each appears once, enumerated from
// its interior endpoint (row-major, +axis direction first, the -axis
// direction only when that neighbor is not interior).
struct Region {
  int dim = 0;
  std::vector<int> lo, hi;                  // inclusive bounds per axis
  int interior_count = 0;                   // |V|
  std::vector<std::vector<int>> coords;     // closure coords, interior first
  std::vector<std::pair<int, int>> edges;   // closure indices
  std::vector<std::vector<int>> adj;        // over the closure, within edges
  std::map<std::vector<int>, int> index_of;

  int closure_count() const { return static_cast<int>(coords.size()); }
  int boundary_count() const { return closure_count() - interior_count; }
  int edge_count() const { return static_cast<int>(edges.size()); }
  bool is_interior(int idx) const { return idx < interior_count; }

  int find_index(const std::vector<int>& c) const {
    auto it = index_of.find(c);
    return it == index_of.end() ? -1 : it->second;
  }

  int origin_index() const { return find_index(std::vector<int>(dim, 0)); }
};

inline Region build_box_region(std::vector<int> lo, std::vector<int> hi,
                               std::size_t vertex_capacity = 4'000'000) {
  if (lo.empty() || lo.size() != hi.size())
    throw validation_error("box region: bad bounds");
  Region r;
  r.dim = static_cast<int>(lo.size());
  r.lo = lo;
  r.hi = hi;
  std::size_t count = 1;
  for (int i = 0; i < r.dim; ++i) {
    if (lo[i] > hi[i]) throw validation_error("box region: lo > hi");
    std::size_t side = static_cast<std::size_t>(hi[i] - lo[i] + 1);
    if (side != 0 && count > vertex_capacity / side)
      throw capacity_error("box region: interior exceeds vertex capacity");
    count *= side;
  }

  // Interior in row-major order (axis 0 slowest).
  std::vector<int> c = lo;
  for (;;) {
    r.coords.push_back(c);
    int axis = r.dim - 1;
    while (axis >= 0 && c[axis] == hi[axis]) {
      c[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
    ++c[axis];
  }
  r.interior_count = static_cast<int>(r.coords.size());

  auto inside = [&](const std::vector<int>& v) {
    for (int i = 0; i < r.dim; ++i)
      if (v[i] < lo[i] || v[i] > hi[i]) return false;
    return true;
  };

  // Exterior boundary: lattice neighbors of the interior, deduplicated and
  // sorted lexicographically.
  std::vector<std::vector<int>> boundary;
  for (int idx = 0; idx < r.interior_count; ++idx) {
    for (int axis = 0; axis < r.dim; ++axis) {
      for (int dir : {+1, -1}) {
        std::vector<int> nb = r.coords[idx];
        nb[axis] += dir;
        if (!inside(nb)) boundary.push_back(std::move(nb));
      }
    }
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  if (r.coords.size() + boundary.size() > vertex_capacity)
    throw capacity_error("box region: closure exceeds vertex capacity");
  for (auto& b : boundary) r.coords.push_back(b);

  for (int i = 0; i < r.closure_count(); ++i) r.index_of[r.coords[i]] = i;

  for (int idx = 0; idx < r.interior_count; ++idx) {
    for (int axis = 0; axis < r.dim; ++axis) {
      std::vector<int> up = r.coords[idx];
      ++up[axis];
      r.edges.emplace_back(idx, r.index_of.at(up));
      std::vector<int> down = r.coords[idx];
      --down[axis];
      int j = r.index_of.at(down);
      if (!r.is_interior(j)) r.edges.emplace_back(idx, j);
    }
  }
  r.adj.assign(static_cast<std::size_t>(r.closure_count()), {});
  for (auto [u, v] : r.edges) {
    r.adj[u].push_back(v);
    r.adj[v].push_back(u);
  }
  return r;
}

// The box [-n, n]^d.
inline Region build_box(int d, int n, std::size_t vertex_capacity = 4'000'000) {
  if (d < 1) throw validation_error("build_box: need d >= 1");
  if (n < 0) throw validation_error("build_box: need n >= 0");
  return build_box_region(std::vector<int>(static_cast<std::size_t>(d), -n),
                          std::vector<int>(static_cast<std::size_t>(d), n),
                          vertex_capacity);
}

// Torus graph on side^d vertices (row-major coordinates, wrap-around edges).
// side >= 3 keeps the graph simple.
inline Graph torus_graph(int d, int side) {
  if (d < 1 || side < 3) throw validation_error("torus_graph: need d >= 1 and side >= 3");
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    if (total > 4'000'000u / static_cast<std::size_t>(side))
      throw capacity_error("torus_graph: too many vertices");
    total *= static_cast<std::size_t>(side);
  }
  auto index = [&](const std::vector<int>& c) {
    long idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * side + c[i];
    return static_cast<int>(idx);
  };
  std::vector<std::pair<int, int>> e;
  std::vector<int> c(static_cast<std::size_t>(d), 0);
  for (;;) {
    for (int axis = 0; axis < d; ++axis) {
      std::vector<int> nb = c;
      nb[axis] = (nb[axis] + 1) % side;
      e.emplace_back(index(c), index(nb));
    }
    int axis = d - 1;
    while (axis >= 0 && c[axis] == side - 1) c[axis--] = 0;
    if (axis < 0) break;
    ++c[axis];
  }
  return Graph(static_cast<int>(total), std::move(e));
}

// Subgraph of the region closure induced by the open vertices: interior
// openness from the low bits of psi_interior (bit i = interior vertex i),
// boundary openness from the boundary condition. Returns the subgraph with
// its own 0-based vertex numbering plus the closure index of each vertex.
struct InducedSubgraph {
  Graph graph;
  std::vector<int> closure_index;  // graph vertex -> region closure index
};

inline InducedSubgraph induced_open_subgraph(const Region& region,
                                             std::uint32_t psi_interior,
                                             const BoundaryCondition& bc) {
  if (region.interior_count > 32)
    throw capacity_error("induced_open_subgraph: interior too large for mask");
  if (bc.kind == BoundaryCondition::Kind::periodic)
    throw validation_error("induced_open_subgraph: periodic boundary has no open/closed state");
  InducedSubgraph out;
  std::vector<int> to_sub(static_cast<std::size_t>(region.closure_count()), -1);
  for (int i = 0; i < region.closure_count(); ++i) {
    bool open = region.is_interior(i) ? ((psi_interior >> i) & 1u) != 0
                                      : bc.vertices_open();
    if (open) {
      to_sub[i] = static_cast<int>(out.closure_index.size());
      out.closure_index.push_back(i);
    }
  }
  std::vector<std::pair<int, int>> e;
  for (auto [u, v] : region.edges)
    if (to_sub[u] >= 0 && to_sub[v] >= 0) e.emplace_back(to_sub[u], to_sub[v]);
  out.graph = Graph(static_cast<int>(out.closure_index.size()), std::move(e));
  return out;
}

}  // namespace bcp
