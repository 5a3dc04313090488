#pragma once

#include <numeric>
#include <vector>

namespace bcp {

// Disjoint sets with path compression and union by rank. reset() reuses the
// allocated capacity, which matters in the enumeration hot loops where a
// fresh structure is needed per configuration.
class UnionFind {
 public:
  UnionFind() = default;
  explicit UnionFind(int n) { reset(n); }

  void reset(int n) {
    parent_.resize(static_cast<std::size_t>(n));
    rank_.assign(static_cast<std::size_t>(n), 0);
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];  // halving
      x = parent_[x];
    }
    return x;
  }

  // Returns true if x and y were in different sets.
  bool unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (rank_[x] < rank_[y]) std::swap(x, y);
    parent_[y] = x;
    if (rank_[x] == rank_[y]) ++rank_[x];
    return true;
  }

  bool same(int x, int y) { return find(x) == find(y); }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

}  // namespace bcp
