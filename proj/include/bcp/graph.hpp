#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/union_find.hpp"

namespace bcp {

// Simple undirected graph on vertices 0..n-1. No loops, no multi-edges.
// Edge order is part of the public contract: edge index e refers to edges[e]
// everywhere (bond configurations, CSV columns, bit positions).
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // normalized u < v
  std::vector<std::vector<int>> adj;

  Graph() = default;

  Graph(int n_vertices, std::vector<std::pair<int, int>> edge_list)
      : n(n_vertices), edges(std::move(edge_list)) {
    if (n < 0) throw validation_error("graph: negative vertex count");
    std::set<std::pair<int, int>> seen;
    for (auto& [u, v] : edges) {
      if (u == v) throw validation_error("graph: loop edge not allowed");
      if (u > v) std::swap(u, v);
      if (u < 0 || v >= n) throw validation_error("graph: edge endpoint out of range");
      if (!seen.insert({u, v}).second) throw validation_error("graph: duplicate edge");
    }
    adj.assign(static_cast<std::size_t>(n), {});
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  }

  int edge_count() const { return static_cast<int>(edges.size()); }
  int degree(int v) const { return static_cast<int>(adj[v].size()); }

  int max_degree() const {
    int d = 0;
    for (int v = 0; v < n; ++v) d = std::max(d, degree(v));
    return d;
  }

  bool connected() const {
    if (n <= 1) return true;
    UnionFind uf(n);
    int comps = n;
    for (auto [u, v] : edges) comps -= uf.unite(u, v) ? 1 : 0;
    return comps == 1;
  }
};

// Text format: one edge per line as "u v". An optional first line holding a
// single integer fixes the vertex count (needed for isolated vertices);
// otherwise n = 1 + max vertex index. '#' starts a comment.
inline Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<int, int>> edges;
  long declared_n = -1;
  bool first_content_line = true;
  int max_index = -1;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long a = 0, b = 0;
    if (!(ls >> a)) continue;  // blank
    if (!(ls >> b)) {
      if (first_content_line) {
        declared_n = a;
        first_content_line = false;
        continue;
      }
      throw validation_error("graph file: expected 'u v' on line: " + line);
    }
    long extra;
    if (ls >> extra) throw validation_error("graph file: too many fields on line: " + line);
    if (a < 0 || b < 0) throw validation_error("graph file: negative vertex index");
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    max_index = std::max(max_index, static_cast<int>(std::max(a, b)));
    first_content_line = false;
  }
  long n = declared_n >= 0 ? declared_n : max_index + 1;
  if (declared_n >= 0 && max_index >= declared_n)
    throw validation_error("graph file: vertex index exceeds declared count");
  return Graph(static_cast<int>(n), std::move(edges));
}

inline std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.n << "\n";
  for (auto [u, v] : g.edges) out << u << " " << v << "\n";
  return out.str();
}

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, std::move(e));
}

inline Graph cycle_graph(int n) {
  if (n < 3) throw validation_error("cycle_graph: need n >= 3");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, std::move(e));
}

inline Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph(leaves + 1, std::move(e));
}

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph(n, std::move(e));
}

// All labeled connected graphs with exactly 1..max_vertices vertices and at
// most max_edges edges, enumerated as edge subsets of the complete graph.
// Used by the validation suites to sweep small instances exhaustively.
inline std::vector<Graph> connected_graphs(int max_vertices, int max_edges) {
  std::vector<Graph> out;
  for (int n = 1; n <= max_vertices; ++n) {
    Graph full = complete_graph(n);
    int m = full.edge_count();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (__builtin_popcount(mask) > max_edges) continue;
      std::vector<std::pair<int, int>> e;
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1) e.push_back(full.edges[i]);
      Graph g(n, std::move(e));
      if (g.connected()) out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace bcp
