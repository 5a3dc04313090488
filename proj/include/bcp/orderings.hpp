#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/exact.hpp"
#include "bcp/graph.hpp"
#include "bcp/params.hpp"
#include "bcp/region.hpp"

namespace bcp {

// Strictly positive probability measure on {0,1}^n, indexed by bit masks
// (bit i = coordinate i). n is capped at 16 structurally; the dominance
// oracle tightens that to 5.
class BinaryMeasure {
 public:
  BinaryMeasure(int n, std::vector<double> weights) : n_(n), prob_(std::move(weights)) {
    if (n < 0 || n > 16) throw validation_error("binary measure: need 0 <= n <= 16");
    if (prob_.size() != (1u << n)) throw validation_error("binary measure: wrong weight count");
    KahanSum total;
    for (double w : prob_) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw validation_error("binary measure: weights must be finite and nonnegative");
      total.add(w);
    }
    if (!(total.value() > 0.0)) throw validation_error("binary measure: total weight is zero");
    for (double& w : prob_) w /= total.value();
  }

  static BinaryMeasure from_vertex_marginal(const VertexDist& dist, int n) {
    std::vector<double> w(1u << n, 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const std::uint32_t psi = dist.config(i).psi;
      if (psi >= w.size()) throw validation_error("binary measure: psi out of range");
      w[psi] += dist.probability(i);
    }
    return BinaryMeasure(n, std::move(w));
  }

  static BinaryMeasure from_edge_marginal(const EdgeDist& dist, int n) {
    std::vector<double> w(1u << n, 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const std::uint32_t omega = dist.config(i).omega;
      if (omega >= w.size()) throw validation_error("binary measure: omega out of range");
      w[omega] += dist.probability(i);
    }
    return BinaryMeasure(n, std::move(w));
  }

  int n() const { return n_; }
  double prob(std::uint32_t mask) const { return prob_[mask]; }

  bool strictly_positive() const {
    for (double w : prob_)
      if (!(w > 0.0)) return false;
    return true;
  }

  // Marginal on a subset of coordinates (bit i of coord_mask keeps
  // coordinate i); coordinates are renumbered in increasing order.
  BinaryMeasure marginal(std::uint32_t coord_mask) const {
    std::vector<int> keep;
    for (int i = 0; i < n_; ++i)
      if ((coord_mask >> i) & 1u) keep.push_back(i);
    const int k = static_cast<int>(keep.size());
    std::vector<double> w(1u << k, 0.0);
    for (std::uint32_t full = 0; full < (1u << n_); ++full) {
      std::uint32_t sub = 0;
      for (int i = 0; i < k; ++i)
        if ((full >> keep[i]) & 1u) sub |= 1u << i;
      w[sub] += prob_[full];
    }
    return BinaryMeasure(k, std::move(w));
  }

 private:
  int n_;
  std::vector<double> prob_;
};

// A failed lattice inequality: the two configurations and both sides.
struct OrderingViolation {
  std::uint32_t sigma1 = 0;
  std::uint32_t sigma2 = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct CheckResult {
  bool ok = true;
  std::optional<OrderingViolation> witness;
  explicit operator bool() const { return ok; }
};

// Pairwise lattice condition sufficient for stochastic domination of mu2
// over mu1:  mu2(s1 v s2) mu1(s1 ^ s2) >= mu1(s1) mu2(s2) for all pairs.
// For strictly positive measures it is enough to test pairs where s1 and s2
// differ from a common configuration in at most one coordinate each, which
// is what this does: pairs (sigma^i, sigma) and (sigma^i, sigma^j).
inline CheckResult holley_check(const BinaryMeasure& mu1, const BinaryMeasure& mu2,
                                double tol = 1e-12) {
  if (mu1.n() != mu2.n()) throw validation_error("holley: dimension mismatch");
  if (!mu1.strictly_positive() || !mu2.strictly_positive())
    throw validation_error("holley: measures must be strictly positive");
  const int n = mu1.n();
  for (std::uint32_t sigma = 0; sigma < (1u << n); ++sigma) {
    for (int i = 0; i < n; ++i) {
      if ((sigma >> i) & 1u) continue;
      const std::uint32_t si = sigma | (1u << i);
      // (sigma^i, sigma): join sigma^i, meet sigma
      if (mu2.prob(si) * mu1.prob(sigma) < mu1.prob(si) * mu2.prob(sigma) - tol)
        return {false, OrderingViolation{si, sigma, mu2.prob(si) * mu1.prob(sigma),
                                         mu1.prob(si) * mu2.prob(sigma)}};
      for (int j = 0; j < n; ++j) {
        if (j == i || ((sigma >> j) & 1u)) continue;
        const std::uint32_t sj = sigma | (1u << j);
        const std::uint32_t sij = si | (1u << j);
        // (sigma^i, sigma^j): join sigma^{ij}, meet sigma
        if (mu2.prob(sij) * mu1.prob(sigma) < mu1.prob(si) * mu2.prob(sj) - tol)
          return {false, OrderingViolation{si, sj, mu2.prob(sij) * mu1.prob(sigma),
                                           mu1.prob(si) * mu2.prob(sj)}};
      }
    }
  }
  return {};
}

// Same condition over every configuration pair. Exponentially more work;
// exists to validate the pair reduction on small n.
inline CheckResult holley_check_exhaustive(const BinaryMeasure& mu1,
                                           const BinaryMeasure& mu2,
                                           double tol = 1e-12) {
  if (mu1.n() != mu2.n()) throw validation_error("holley: dimension mismatch");
  const int n = mu1.n();
  for (std::uint32_t s1 = 0; s1 < (1u << n); ++s1)
    for (std::uint32_t s2 = 0; s2 < (1u << n); ++s2) {
      const double lhs = mu2.prob(s1 | s2) * mu1.prob(s1 & s2);
      const double rhs = mu1.prob(s1) * mu2.prob(s2);
      if (lhs < rhs - tol) return {false, OrderingViolation{s1, s2, lhs, rhs}};
    }
  return {};
}

// Positive-association (FKG) lattice condition: the pairwise condition of a
// measure against itself; pairs (sigma^i, sigma^j) with i != j suffice.
inline CheckResult fkg_check(const BinaryMeasure& mu, double tol = 1e-12) {
  if (!mu.strictly_positive())
    throw validation_error("fkg: measure must be strictly positive");
  const int n = mu.n();
  for (std::uint32_t sigma = 0; sigma < (1u << n); ++sigma)
    for (int i = 0; i < n; ++i) {
      if ((sigma >> i) & 1u) continue;
      for (int j = i + 1; j < n; ++j) {
        if ((sigma >> j) & 1u) continue;
        const std::uint32_t si = sigma | (1u << i);
        const std::uint32_t sj = sigma | (1u << j);
        const double lhs = mu.prob(si | sj) * mu.prob(sigma);
        const double rhs = mu.prob(si) * mu.prob(sj);
        if (lhs < rhs - tol) return {false, OrderingViolation{si, sj, lhs, rhs}};
      }
    }
  return {};
}

// All up-sets of {0,1}^n, each encoded as a bit set over the 2^n
// configurations (bit c = configuration c belongs to the up-set). Emitted by
// a DFS that admits a configuration only when every one-bit extension is
// already in, so exactly the monotone families appear: 3, 6, 20, 168, 7581
// of them for n = 1..5.
inline std::vector<std::uint32_t> enumerate_upsets(int n) {
  if (n < 0 || n > 5) throw capacity_error("up-set enumeration: need 0 <= n <= 5");
  const int nconf = 1 << n;
  std::vector<int> order(nconf);  // by descending popcount (tops first)
  for (int c = 0; c < nconf; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [](int a, int b) {
    return __builtin_popcount(a) > __builtin_popcount(b);
  });
  std::vector<std::uint32_t> out;
  std::uint32_t members = 0;
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == nconf) {
      out.push_back(members);
      return;
    }
    const int c = order[pos];
    self(self, pos + 1);  // exclude c
    bool can_include = true;
    for (int i = 0; i < n; ++i) {
      if ((c >> i) & 1) continue;
      if (!((members >> (c | (1 << i))) & 1u)) {
        can_include = false;
        break;
      }
    }
    if (can_include) {
      members |= 1u << c;
      self(self, pos + 1);
      members &= ~(1u << c);
    }
  };
  rec(rec, 0);
  return out;
}

inline double measure_of_set(const BinaryMeasure& mu, std::uint32_t config_set) {
  KahanSum s;
  for (std::uint32_t c = 0; c < (1u << mu.n()); ++c)
    if ((config_set >> c) & 1u) s.add(mu.prob(c));
  return s.value();
}

// Stochastic domination mu1 <= mu2, decided by checking mu1(U) <= mu2(U) on
// every up-set U. Exact but exponential; capped at 5 coordinates.
inline CheckResult dominance_exact(const BinaryMeasure& mu1, const BinaryMeasure& mu2,
                                   double tol = 1e-12) {
  if (mu1.n() != mu2.n()) throw validation_error("dominance: dimension mismatch");
  if (mu1.n() > 5) throw capacity_error("dominance: up-set oracle capped at 5 coordinates");
  for (std::uint32_t mask : enumerate_upsets(mu1.n())) {
    const double p1 = measure_of_set(mu1, mask);
    const double p2 = measure_of_set(mu2, mask);
    if (p1 > p2 + tol) return {false, OrderingViolation{mask, mask, p1, p2}};
  }
  return {};
}

// Sufficient parameter conditions for vertex-marginal domination
// Phi_1 <= Phi_2 on bounded-degree regions (delta = maximum degree).
// Variants: 1:  a1 <= a2, p1 <= p2, q1 = q2
//           2:  q2 a2/(1-a2) >= q1 a1/(1-a1) (1-p1)^{-delta/2}
//           3:  p1 <= p2, q1 >= q2, and the compatibility inequality
//               q2 a2/(1-a2) (1-p2)^{delta/2} >= q1 a1/(1-a1) (1-p1)^{delta/2}
//           4:  q1 <= q2, compatibility, p2/(q2(1-p2)) >= p1/(q1(1-p1))
inline bool vertex_comparison_condition(int variant, const ModelParams& m1,
                                        const ModelParams& m2, int delta) {
  for (const ModelParams& m : {m1, m2}) {
    if (!(m.a > 0.0 && m.a < 1.0))
      throw validation_error("vertex comparison: need a in (0, 1)");
    if (!(m.p >= 0.0 && m.p < 1.0))
      throw validation_error("vertex comparison: need p in [0, 1)");
    if (!(m.q >= 1.0 && m.q <= 2.0))
      throw validation_error("vertex comparison: need q in [1, 2]");
  }
  if (delta < 1) throw validation_error("vertex comparison: need delta >= 1");
  const double ra1 = m1.a / (1.0 - m1.a), ra2 = m2.a / (1.0 - m2.a);
  const double half = delta / 2.0;
  const double compat = m2.q * ra2 * std::pow(1.0 - m2.p, half) -
                        m1.q * ra1 * std::pow(1.0 - m1.p, half);
  switch (variant) {
    case 1:
      return m1.a <= m2.a && m1.p <= m2.p && m1.q == m2.q;
    case 2:
      return m2.q * ra2 >= m1.q * ra1 * std::pow(1.0 - m1.p, -half);
    case 3:
      return m1.p <= m2.p && m1.q >= m2.q && compat >= 0.0;
    case 4:
      return m1.q <= m2.q && compat >= 0.0 &&
             m2.p / (m2.q * (1.0 - m2.p)) >= m1.p / (m1.q * (1.0 - m1.p));
    default:
      throw validation_error("vertex comparison: variant must be 1..4");
  }
}

// Sufficient parameter conditions for edge-marginal comparison against the
// fully-open-vertex measure (a1 = 1), max degree delta:
//   'a': q2 <= q1 and (1-p2)/p2 (1 + 2 w_delta + w_delta w_{delta-1})
//        <= (1-p1)/p1, with w_j = (1-a2)/(a2 q2 r2^j)  =>  Ups_1 <= Ups_2
//   'b': p1 >= p2 and q1 <= q2                         =>  Ups_1 >= Ups_2
inline bool edge_comparison_condition(char variant, const ModelParams& m1,
                                      const ModelParams& m2, int delta) {
  if (m1.a != 1.0) throw validation_error("edge comparison: need a1 = 1");
  if (!(m2.a > 0.0 && m2.a <= 1.0))
    throw validation_error("edge comparison: need a2 in (0, 1]");
  for (const ModelParams& m : {m1, m2}) {
    if (!(m.p > 0.0 && m.p < 1.0))
      throw validation_error("edge comparison: need p in (0, 1)");
    if (!(m.q >= 1.0)) throw validation_error("edge comparison: need q >= 1");
  }
  if (delta < 1) throw validation_error("edge comparison: need delta >= 1");
  switch (variant) {
    case 'a': {
      if (!(m2.q <= m1.q)) return false;
      const double r2 = m2.r();
      auto w = [&](int j) {
        return (1.0 - m2.a) / (m2.a * m2.q * std::pow(r2, j));
      };
      const double wd = w(delta), wd1 = w(delta - 1);
      return (1.0 - m2.p) / m2.p * (1.0 + 2.0 * wd + wd * wd1) <=
             (1.0 - m1.p) / m1.p;
    }
    case 'b':
      return m1.p >= m2.p && m1.q <= m2.q;
    default:
      throw validation_error("edge comparison: variant must be 'a' or 'b'");
  }
}

// Monotone-coupling condition for edge marginals at common q in [1, 2]:
// componentwise parameter increase.
inline bool edge_monotone_condition(const ModelParams& m1, const ModelParams& m2) {
  for (const ModelParams& m : {m1, m2}) {
    if (!(m.a > 0.0 && m.a < 1.0))
      throw validation_error("edge monotone: need a in (0, 1)");
    if (!(m.p > 0.0 && m.p < 1.0))
      throw validation_error("edge monotone: need p in (0, 1)");
  }
  if (m1.q != m2.q || !(m1.q >= 1.0 && m1.q <= 2.0))
    throw validation_error("edge monotone: need common q in [1, 2]");
  return m1.a <= m2.a && m1.p <= m2.p;
}

// Single-site comparison inequality behind the vertex-marginal dominations.
// For an interior vertex x closed in psi, with b = number of region edges
// from x to an open vertex (boundary openness per bc), the claim compares
//   q_i a_i/(1-a_i) (1-p_i)^{b/2} / mu_i(x isolated in the open subgraph of psi^x)
// across the two parameter sets (side 2 >= side 1), where mu_i is the
// random-cluster measure on the open subgraph of psi^x with parameters
// (p_i, q_i) and the bc wiring. Evaluated exactly by enumeration.
inline bool single_site_comparison(const ModelParams& m1, const ModelParams& m2,
                                   const Region& region, const BoundaryCondition& bc,
                                   std::uint32_t psi, int x,
                                   const EnumLimits& lim = {}, double tol = 1e-12) {
  if (x < 0 || x >= region.interior_count)
    throw validation_error("single-site comparison: x must be interior");
  if ((psi >> x) & 1u)
    throw validation_error("single-site comparison: need psi_x = 0");
  for (const ModelParams& m : {m1, m2}) {
    if (!(m.a > 0.0 && m.a < 1.0))
      throw validation_error("single-site comparison: need a in (0, 1)");
    if (!(m.p >= 0.0 && m.p < 1.0))
      throw validation_error("single-site comparison: need p in [0, 1)");
  }
  if (!(m1.q >= 1.0)) throw validation_error("single-site comparison: need q1 >= 1");
  if (!(m2.q >= 1.0 && m2.q <= 2.0))
    throw validation_error("single-site comparison: need q2 in [1, 2]");

  const std::uint32_t psix = psi | (1u << x);
  InducedSubgraph sub = induced_open_subgraph(region, psix, bc);
  int b = 0;  // open neighbors of x among region edges
  int x_sub = -1;
  for (int i = 0; i < sub.graph.n; ++i)
    if (sub.closure_index[i] == x) x_sub = i;
  for (auto [u, v] : sub.graph.edges) b += (u == x_sub || v == x_sub) ? 1 : 0;

  std::vector<std::vector<int>> wired;
  if (bc.vertices_open()) {
    std::vector<int> cls;
    for (int i = 0; i < sub.graph.n; ++i)
      if (!region.is_interior(sub.closure_index[i])) cls.push_back(i);
    if (cls.size() > 1) wired.push_back(std::move(cls));
  }

  auto isolation_probability = [&](const ModelParams& m) {
    // Z restricted to configurations with every edge at x closed, over Z.
    std::vector<std::pair<int, int>> without;
    for (auto [u, v] : sub.graph.edges)
      if (u != x_sub && v != x_sub) without.emplace_back(u, v);
    const double z_all = rc_partition(sub.graph.n, sub.graph.edges, m.p, m.q, wired, lim);
    const double z_iso = rc_partition(sub.graph.n, without, m.p, m.q, wired, lim);
    return z_iso / z_all;
  };

  auto side = [&](const ModelParams& m) {
    return m.q * (m.a / (1.0 - m.a)) * std::pow(1.0 - m.p, b / 2.0) /
           isolation_probability(m);
  };
  return side(m2) >= side(m1) - tol;
}

// Conditional open-vertex probability bounds, uniform over the states of
// everything else: with delta the maximum degree,
//   qa/(1-a+qa) <= P(x open | rest) <= qa/(qa + (1-a) r^delta).
inline std::pair<double, double> finite_energy_bounds(const ModelParams& params,
                                                      int delta) {
  if (!(params.a > 0.0 && params.a < 1.0))
    throw validation_error("finite-energy bounds: need a in (0, 1)");
  if (delta < 0) throw validation_error("finite-energy bounds: need delta >= 0");
  const double qa = params.q * params.a;
  const double lower = qa / (1.0 - params.a + qa);
  const double upper = qa / (qa + (1.0 - params.a) * std::pow(params.r(), delta));
  return {lower, upper};
}

// The single-edge system's conditional open probabilities that defeat naive
// vertex monotonicity: conditioned on the edge being closed,
//   P(y open | x closed) = qa/(qa+1-a)  >  P(y open | x open) = qar/(qar+1-a).
// Both values are read off the exact two-vertex table, not the closed forms.
inline std::pair<double, double> nonmonotonicity_witness(double a, double p, double q,
                                                         const EnumLimits& lim = {}) {
  const Graph k2 = path_graph(2);
  const ThetaDist dist = drc_measure(k2, ModelParams::from_ap(a, p, q), lim);
  auto conditional = [&](bool x_open) {
    KahanSum num, den;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const ThetaKey& t = dist.config(i);
      if (t.omega != 0) continue;               // edge closed
      if (((t.psi >> 0) & 1u) != (x_open ? 1u : 0u)) continue;
      den.add(dist.probability(i));
      if ((t.psi >> 1) & 1u) num.add(dist.probability(i));
    }
    return num.value() / den.value();
  };
  return {conditional(false), conditional(true)};
}

}  // namespace bcp
