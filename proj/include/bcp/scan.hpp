#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/params.hpp"
#include "bcp/region.hpp"
#include "bcp/sampler.hpp"

namespace bcp {

// Reference constants for the square-lattice (d = 2) phase diagram. All are
// closed forms except the site-percolation threshold, which is the standard
// numerical estimate. display_value() rounds the way the values are usually
// quoted.
struct CriticalConstants {
  double pi_c;            // random-cluster q = 2 edge threshold, sqrt(2)/(1+sqrt(2))
  double K_c;             // coupling at pi_c: -2 log(1 - pi_c)
  double p_c_site;        // site-percolation threshold on the square lattice
  double a_bar;           // activity of the h = 0 crossing at p_bar
  double p_bar;           // 1 - (1+sqrt(2))^{-4}
  double icvc_abscissa;   // (1 - p_c_site)/(1 + p_c_site): closed-site critical activity at p = 0
  double iovc_abscissa;   // p_c_site/(2 - p_c_site): open-site critical activity at p = 0

  static CriticalConstants square_lattice() {
    CriticalConstants c{};
    const double s2 = std::sqrt(2.0);
    c.pi_c = s2 / (1.0 + s2);
    c.K_c = -2.0 * std::log(1.0 - c.pi_c);
    c.p_c_site = 0.592746;
    const double t4 = std::pow(1.0 + s2, 4.0);  // (1+sqrt 2)^4 = 17 + 12 sqrt 2
    c.a_bar = 1.0 / (1.0 + t4);
    c.p_bar = 1.0 - 1.0 / t4;
    c.icvc_abscissa = (1.0 - c.p_c_site) / (1.0 + c.p_c_site);
    c.iovc_abscissa = c.p_c_site / (2.0 - c.p_c_site);
    return c;
  }
};

inline double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

// The vanishing-field arc of the q = 1 reduction on the d-dimensional
// lattice: a/(1-a) = (1-p)^{d/2}.
inline double h_zero_arc(double p, int d) {
  if (!(p >= 0.0) || p >= 1.0) throw validation_error("h_zero_arc: need p in [0, 1)");
  if (d < 1) throw validation_error("h_zero_arc: need d >= 1");
  const double t = std::pow(1.0 - p, d / 2.0);
  return t / (1.0 + t);
}

// Fixed-ratio arc a/(1-a) = (1-p)^{rho/2}; rho = D/J traces the line of
// constant field-to-coupling ratio in the q = 1 chart.
inline double fixed_ratio_arc(double p, double rho) {
  if (!(p >= 0.0) || p >= 1.0) throw validation_error("fixed_ratio_arc: need p in [0, 1)");
  const double t = std::pow(1.0 - p, rho / 2.0);
  return t / (1.0 + t);
}

// Phase-diagram membership tests for (a, p) at q = 2, d = 2. Each flag is a
// sufficient condition for the labeled regime, derived from the comparison
// inequalities against product or fully-open reference measures.
struct RegionFlags {
  bool icvc_strip = false;       // infinite closed-vertex cluster (high-p strip)
  bool iovc_iec_strip = false;   // infinite open-vertex + open-edge cluster (high-p strip)
  bool no_iec_line = false;      // below the edge threshold: no infinite edge cluster
  bool icvc_arc = false;         // dominated by a subcritical-open product measure
  bool iovc_halfplane = false;   // dominates a supercritical-open product measure
};

inline RegionFlags region_predicates(double a, double p) {
  if (!(a > 0.0 && a < 1.0) || !(p >= 0.0 && p < 1.0))
    throw validation_error("region_predicates: need a in (0, 1), p in [0, 1)");
  const CriticalConstants c = CriticalConstants::square_lattice();
  const double ra = a / (1.0 - a);
  RegionFlags f;
  f.icvc_strip = 2.0 * ra < 1.0 - p && p > c.p_bar;
  f.iovc_iec_strip =
      2.0 * ra > 8.0 * (1.0 - p) / std::pow(2.0 - p, 3.0) && p > 2.0 * c.p_bar / (1.0 + c.p_bar);
  f.no_iec_line = p < c.pi_c;
  const double ra_ref = c.icvc_abscissa / (1.0 - c.icvc_abscissa);
  f.icvc_arc = ra < ra_ref * (1.0 - p) * (1.0 - p);
  f.iovc_halfplane = a > c.iovc_abscissa;
  return f;
}

// mean and batch-means standard error. With fewer than 2 samples (or a
// single batch) the error is NaN: a one-sample table has no error bar.
inline std::pair<double, double> batch_means(const std::vector<double>& series,
                                             int batches = 32) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (series.empty()) return {nan, nan};
  KahanSum total;
  for (double x : series) total.add(x);
  const double mean = total.value() / static_cast<double>(series.size());
  if (series.size() < 2) return {mean, nan};
  const int b = std::min<int>(batches, static_cast<int>(series.size()));
  const std::size_t per = series.size() / static_cast<std::size_t>(b);
  std::vector<double> bm;
  bm.reserve(static_cast<std::size_t>(b));
  // trailing remainder folds into the last batch
  for (int i = 0; i < b; ++i) {
    const std::size_t lo = static_cast<std::size_t>(i) * per;
    const std::size_t hi = (i == b - 1) ? series.size() : lo + per;
    KahanSum s;
    for (std::size_t j = lo; j < hi; ++j) s.add(series[j]);
    bm.push_back(s.value() / static_cast<double>(hi - lo));
  }
  KahanSum var;
  for (double x : bm) var.add((x - mean) * (x - mean));
  const double se = std::sqrt(var.value() / (b * (b - 1.0)));
  return {mean, se};
}

// Two-point estimates from a recorded series: the spin-statistics route
// P(equal nonzero) - P(both nonzero)/q and the connectivity route
// (1 - 1/q) P(common cluster). Errors by batch means of the per-sample
// statistic.
struct TauEstimate {
  double spin = 0.0, spin_se = 0.0;
  double conn = 0.0, conn_se = 0.0;
};

inline TauEstimate tau_estimate(const ObservableSeries& series, double q) {
  if (!(q >= 1.0)) throw validation_error("tau_estimate: need q >= 1");
  const int je = series.column_index("spin_eq_nonzero");
  const int jb = series.column_index("spin_both_nonzero");
  const int jc = series.column_index("conn_origin_probe");
  std::vector<double> spin_stat, conn_stat;
  spin_stat.reserve(series.rows.size());
  conn_stat.reserve(series.rows.size());
  for (const auto& r : series.rows) {
    spin_stat.push_back(r[je] - r[jb] / q);
    conn_stat.push_back((1.0 - 1.0 / q) * r[jc]);
  }
  TauEstimate t;
  std::tie(t.spin, t.spin_se) = batch_means(spin_stat);
  std::tie(t.conn, t.conn_se) = batch_means(conn_stat);
  return t;
}

struct ScanPoint {
  double a = 0.5, p = 0.5;
};

struct ScanGrid {
  std::vector<ScanPoint> points;
  double q = 2.0;
  int d = 2;
  int n = 16;                  // box half-width
  int boundary_spin = 1;       // 0 = free, >= 1 wired; -1 = periodic box
  std::uint64_t sweeps = 2048, burn_in = 512, thin = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  ChainConfig::Init init = ChainConfig::Init::random;
};

struct ScanRow {
  double a = 0.0, p = 0.0, q = 0.0;
  std::vector<double> mean;    // per observable column
  std::vector<double> stderr_; // per observable column
  TauEstimate tau;
};

// Runs an independent chain per grid point. Point i always uses rng stream i
// of the grid seed, so results are reproducible and independent of the job
// count. Rows come back in grid order.
inline std::vector<ScanRow> scan(const ScanGrid& grid) {
  if (grid.points.empty()) throw validation_error("scan: empty grid");
  if (grid.jobs < 1) throw validation_error("scan: need jobs >= 1");
  for (const auto& pt : grid.points) {
    if (!(pt.a > 0.0) || pt.a > 1.0 || !(pt.p >= 0.0) || pt.p >= 1.0)
      throw validation_error("scan: grid point outside a in (0,1], p in [0,1)");
  }

  System sys = grid.boundary_spin < 0
                   ? System::torus(grid.d, 2 * grid.n + 1)
                   : System::from_region(build_box(grid.d, grid.n), grid.boundary_spin);

  std::vector<ScanRow> rows(grid.points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.points.size()) return;
      const ScanPoint& pt = grid.points[i];
      ChainConfig cc;
      cc.sweeps = grid.sweeps;
      cc.burn_in = grid.burn_in;
      cc.thin = grid.thin;
      cc.seed = grid.seed;
      cc.stream = i;
      cc.init = grid.init;
      const ModelParams params = ModelParams::from_ap(pt.a, pt.p, grid.q);
      const ObservableSeries series = run_chain(sys, params, cc);
      ScanRow& row = rows[i];
      row.a = pt.a;
      row.p = pt.p;
      row.q = grid.q;
      const std::size_t ncol = series.columns.size();
      row.mean.resize(ncol);
      row.stderr_.resize(ncol);
      for (std::size_t j = 0; j < ncol; ++j)
        std::tie(row.mean[j], row.stderr_[j]) = batch_means(series.column(j));
      row.tau = tau_estimate(series, grid.q);
    }
  };
  if (grid.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < grid.jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace bcp
