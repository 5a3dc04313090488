#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "bcp/exact.hpp"
#include "bcp/sampler.hpp"
#include "bcp/union_find.hpp"

using namespace bcp;

TEST_CASE("splitmix64 stream and output contract is frozen") {
  SplitMix64 g = SplitMix64::for_stream(42, 7);
  CHECK(g.state() == 0xccf635ee9e9e2fa4ull);
  CHECK(g() == 0x001dcf1b277a0c18ull);
  CHECK(g() == 0xff6a03ddcc9b51e2ull);
  CHECK(g() == 0x2a9c423cf344298eull);
  CHECK(g() == 0x19807f83a2b4fd77ull);

  SplitMix64 h = SplitMix64::for_stream(42, 7);
  CHECK(uniform01(h) == 0.00045484936661222);
  CHECK(uniform01(h) == 0.9977114120962203);

  SplitMix64 seeded(5);
  CHECK(seeded() == 0x6aafef81a8f1ad0full);

  SplitMix64 k = SplitMix64::for_stream(1, 0);
  CHECK(uniform_below(k, 3) == 2);

  // distinct streams from one seed start at distinct states
  CHECK(SplitMix64::for_stream(9, 0).state() != SplitMix64::for_stream(9, 1).state());

  // set_state resumes the exact sequence
  SplitMix64 a = SplitMix64::for_stream(3, 3);
  (void)a();
  SplitMix64 b;
  b.set_state(a.state());
  CHECK(a() == b());
}

TEST_CASE("heat-bath weights equal the exact single-site conditional") {
  const Graph p3 = path_graph(3);
  const double K = 0.8, Delta = -0.4;
  const int q = 2;
  const SpinDist pi = bcp_measure(p3, K, Delta, q);
  std::map<std::uint32_t, double> prob;
  for (std::size_t i = 0; i < pi.size(); ++i) prob[pi.config(i).code] = pi.probability(i);

  for (int sl = 0; sl <= q; ++sl)
    for (int sr = 0; sr <= q; ++sr) {
      // conditional for the middle site from the exact table
      double z = 0.0;
      for (int s = 0; s <= q; ++s) z += prob.at(encode_spins({sl, s, sr}, q));
      // the sampler's weights: w(0) = e^Delta, w(s) = exp(K(2 n_s - m))
      const int m = (sl != 0) + (sr != 0);
      double w[3], wz = 0.0;
      w[0] = std::exp(Delta);
      for (int s = 1; s <= q; ++s) {
        const int ns = (sl == s) + (sr == s);
        w[s] = std::exp(K * (2.0 * ns - m));
      }
      for (int s = 0; s <= q; ++s) wz += w[s];
      for (int s = 0; s <= q; ++s) {
        INFO("neighbors " << sl << "," << sr << " spin " << s);
        CHECK(prob.at(encode_spins({sl, s, sr}, q)) / z ==
              Catch::Approx(w[s] / wz).epsilon(1e-12));
      }
    }
}

TEST_CASE("heat-bath site draws with the advertised frequencies") {
  const System sys = System::from_graph(complete_graph(2));
  const double K = 0.7, Delta = 0.3;
  const int q = 2;
  SpinConfig spins = {0, 2};
  SplitMix64 rng = SplitMix64::for_stream(11, 0);
  const int n_draws = 60000;
  std::array<int, 3> count = {};
  for (int i = 0; i < n_draws; ++i) {
    heat_bath_site(sys, spins, 0, K, Delta, q, rng);
    ++count[spins[0]];
  }
  const double w0 = std::exp(Delta), w1 = std::exp(-K), w2 = std::exp(K);
  const double z = w0 + w1 + w2;
  CHECK(count[0] / double(n_draws) == Catch::Approx(w0 / z).margin(0.012));
  CHECK(count[1] / double(n_draws) == Catch::Approx(w1 / z).margin(0.012));
  CHECK(count[2] / double(n_draws) == Catch::Approx(w2 / z).margin(0.012));
}

TEST_CASE("bond refresh opens only between equal nonzero spins") {
  const System sys = System::from_graph(path_graph(3));
  SplitMix64 rng = SplitMix64::for_stream(17, 0);
  const SpinConfig spins = {1, 1, 2};
  const BondState all = spin_to_bond(sys, spins, 1.0, rng);
  CHECK(all.bond_open[0] == 1);  // equal nonzero endpoints
  CHECK(all.bond_open[1] == 0);  // unequal spins stay closed even at p = 1
  const BondState none = spin_to_bond(sys, spins, 0.0, rng);
  CHECK(none.bond_open[0] == 0);

  System wired = System::from_region(build_box(1, 0), 1);
  REQUIRE(wired.boundary_bond_count() == 2);
  const BondState wb = spin_to_bond(wired, {1}, 1.0, rng);
  CHECK((wb.boundary_bond_open[0] == 1 && wb.boundary_bond_open[1] == 1));
  const BondState wrong_spin = spin_to_bond(wired, {0}, 1.0, rng);
  CHECK((wrong_spin.boundary_bond_open[0] == 0 && wrong_spin.boundary_bond_open[1] == 0));
}

TEST_CASE("bond refresh is bernoulli(p) per eligible edge, independently") {
  const System sys = System::from_graph(path_graph(3));
  const SpinConfig spins = {1, 1, 1};
  const double p = 0.37;
  SplitMix64 rng = SplitMix64::for_stream(23, 0);
  const int n_draws = 50000;
  int open0 = 0, open1 = 0, both = 0;
  for (int i = 0; i < n_draws; ++i) {
    const BondState b = spin_to_bond(sys, spins, p, rng);
    open0 += b.bond_open[0];
    open1 += b.bond_open[1];
    both += b.bond_open[0] && b.bond_open[1];
  }
  CHECK(open0 / double(n_draws) == Catch::Approx(p).margin(0.01));
  CHECK(open1 / double(n_draws) == Catch::Approx(p).margin(0.01));
  CHECK(both / double(n_draws) == Catch::Approx(p * p).margin(0.01));
}

TEST_CASE("cluster refresh draws uniform spins per cluster") {
  const System sys = System::from_graph(path_graph(3));
  SplitMix64 rng = SplitMix64::for_stream(29, 0);
  BondState bonds;
  bonds.bond_open = {1, 0};  // cluster {0,1} and singleton {2}
  const SpinConfig spins = {1, 1, 1};

  SECTION("q = 1 is deterministic") {
    for (int i = 0; i < 50; ++i) {
      const SpinConfig out = bond_to_spin(sys, spins, bonds, 1, rng);
      REQUIRE(out == SpinConfig{1, 1, 1});
    }
  }
  SECTION("closed sites stay closed") {
    BondState none;
    none.bond_open = {0, 0};
    const SpinConfig out = bond_to_spin(sys, {1, 0, 2}, none, 3, rng);
    CHECK(out[1] == 0);
    CHECK(out[0] >= 1);
    CHECK(out[2] >= 1);
  }
  SECTION("joint distribution is uniform over cluster assignments") {
    const int n_draws = 40000;
    std::map<std::pair<int, int>, int> count;
    for (int i = 0; i < n_draws; ++i) {
      const SpinConfig out = bond_to_spin(sys, spins, bonds, 2, rng);
      REQUIRE(out[0] == out[1]);  // bonded pair moves together
      ++count[{out[0], out[2]}];
    }
    for (int s = 1; s <= 2; ++s)
      for (int t = 1; t <= 2; ++t)
        CHECK(count[{s, t}] / double(n_draws) == Catch::Approx(0.25).margin(0.012));
  }
}

TEST_CASE("clusters wired to the boundary take the boundary spin") {
  System sys = System::from_region(build_box(1, 0), 2);
  SplitMix64 rng = SplitMix64::for_stream(37, 0);
  BondState bonds;
  bonds.bond_open = {};
  bonds.boundary_bond_open = {1, 0};
  for (int i = 0; i < 50; ++i) {
    const SpinConfig out = bond_to_spin(sys, {2}, bonds, 3, rng);
    REQUIRE(out[0] == 2);
  }
  bonds.boundary_bond_open = {0, 0};
  std::array<int, 4> count = {};
  const int n_draws = 30000;
  for (int i = 0; i < n_draws; ++i) ++count[bond_to_spin(sys, {2}, bonds, 3, rng)[0]];
  for (int s = 1; s <= 3; ++s)
    CHECK(count[s] / double(n_draws) == Catch::Approx(1.0 / 3.0).margin(0.012));
}

TEST_CASE("sweep occupancy converges to the exact spin measure") {
  const Graph k2 = complete_graph(2);
  const ModelParams m = ModelParams::from_ap(0.5, 0.5, 2.0);
  const SpinDist pi = bcp_measure(k2, m.K(), m.Delta(), 2);

  const System sys = System::from_graph(k2);
  for (bool random_order : {false, true}) {
    ChainState state;
    state.rng = SplitMix64::for_stream(101, random_order ? 1 : 0);
    state.spins = {0, 0};
    std::map<std::uint32_t, int> count;
    const int n_sweeps = 60000;
    for (int i = 0; i < n_sweeps; ++i) {
      sweep(sys, state, m.K(), m.Delta(), 2, m.p, random_order);
      ++count[encode_spins({state.spins[0], state.spins[1]}, 2)];
    }
    for (std::size_t i = 0; i < pi.size(); ++i) {
      INFO("random_order=" << random_order << " code " << pi.config(i).code);
      CHECK(count[pi.config(i).code] / double(n_sweeps) ==
            Catch::Approx(pi.probability(i)).margin(0.02));
    }
  }
}

TEST_CASE("wired chain reproduces exact open-vertex and connection rates") {
  const Region r = build_box(1, 1);
  const ModelParams m = ModelParams::from_ap(0.4, 0.6, 2.0);
  const ThetaDist exact = drc_measure_with_boundary(r, BoundaryCondition::One(), m);

  double exact_density = 0.0, exact_connect = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const ThetaKey& t = exact.config(i);
    exact_density +=
        exact.probability(i) * __builtin_popcountll(t.psi) / double(r.interior_count);
    // origin-to-boundary connectivity, boundary treated as one wired blob
    UnionFind uf(r.closure_count() + 1);
    const int blob = r.closure_count();
    for (int v = r.interior_count; v < r.closure_count(); ++v) uf.unite(v, blob);
    for (std::size_t e = 0; e < r.edges.size(); ++e)
      if ((t.omega >> e) & 1ull) uf.unite(r.edges[e].first, r.edges[e].second);
    if (((t.psi >> r.origin_index()) & 1ull) && uf.same(r.origin_index(), blob))
      exact_connect += exact.probability(i);
  }

  ChainConfig cfg;
  cfg.sweeps = 40000;
  cfg.burn_in = 2000;
  cfg.seed = 7;
  const ObservableSeries series = run_chain(System::from_region(r, 1), m, cfg);
  auto mean_of = [&](const char* name) {
    const auto col = series.column(series.column_index(name));
    double s = 0.0;
    for (double v : col) s += v;
    return s / col.size();
  };
  CHECK(mean_of("open_vertex_density") == Catch::Approx(exact_density).margin(0.02));
  CHECK(mean_of("boundary_connect") == Catch::Approx(exact_connect).margin(0.02));
}

TEST_CASE("free chain matches exact connectivity and per-row coupling bounds") {
  const Graph p3 = path_graph(3);
  const ModelParams m = ModelParams::from_ap(0.5, 0.5, 2.0);
  const ThetaDist exact = drc_measure(p3, m);
  const double exact_conn = drc_connectivity(exact, p3, 0, 2);

  ChainConfig cfg;
  cfg.sweeps = 40000;
  cfg.burn_in = 2000;
  cfg.seed = 13;
  const ObservableSeries series = run_chain(System::from_graph(p3), m, cfg);
  const int jc = series.column_index("conn_origin_probe");
  const int je = series.column_index("spin_eq_nonzero");
  const int jb = series.column_index("spin_both_nonzero");
  const int jl = series.column_index("largest_cluster_frac");
  const int jv = series.column_index("open_vertex_density");
  double conn_mean = 0.0;
  for (const auto& row : series.rows) {
    conn_mean += row[jc];
    // connection in the cluster pass forces equal nonzero spins afterwards
    REQUIRE(row[jc] <= row[je]);
    REQUIRE(row[je] <= row[jb]);
    REQUIRE(row[jl] <= row[jv] + 1e-12);
  }
  conn_mean /= series.rows.size();
  CHECK(conn_mean == Catch::Approx(exact_conn).margin(0.02));
}

TEST_CASE("recording pattern, determinism, and resume splicing") {
  const System sys = System::from_graph(path_graph(3));
  const ModelParams m = ModelParams::from_ap(0.4, 0.5, 2.0);

  ChainConfig cfg;
  cfg.sweeps = 10;
  cfg.burn_in = 3;
  cfg.thin = 2;
  cfg.seed = 5;
  const ObservableSeries s1 = run_chain(sys, m, cfg);
  CHECK(s1.sweep_index == std::vector<std::uint64_t>{4, 6, 8, 10});

  const ObservableSeries s2 = run_chain(sys, m, cfg);
  CHECK(s1.rows == s2.rows);  // bitwise reproducible

  ChainConfig whole = cfg;
  whole.sweeps = 300;
  whole.burn_in = 100;
  whole.thin = 3;
  const ObservableSeries full = run_chain(sys, m, whole);

  ChainConfig first_leg = whole;
  first_leg.sweeps = 150;
  Checkpoint mid;
  const ObservableSeries a = run_chain(sys, m, first_leg, nullptr, &mid);
  CHECK(mid.sweeps_done == 150);
  CHECK(mid.n_sites == 3);
  ChainConfig second_leg = whole;
  second_leg.sweeps = 150;
  const ObservableSeries b = run_chain(sys, m, second_leg, &mid);

  std::vector<std::vector<double>> spliced = a.rows;
  spliced.insert(spliced.end(), b.rows.begin(), b.rows.end());
  CHECK(spliced == full.rows);

  Checkpoint stale = mid;
  stale.n_sites = 4;
  CHECK_THROWS_AS(run_chain(sys, m, second_leg, &stale), validation_error);
  Checkpoint wrong_q = mid;
  wrong_q.q = 3;
  CHECK_THROWS_AS(run_chain(sys, m, second_leg, &wrong_q), validation_error);
}

TEST_CASE("chain configuration is validated") {
  const System sys = System::from_graph(path_graph(2));
  ChainConfig cfg;
  cfg.sweeps = 10;
  cfg.burn_in = 20;
  CHECK_THROWS_AS(run_chain(sys, ModelParams::from_ap(0.5, 0.5, 2.0), cfg),
                  validation_error);
  cfg.burn_in = 1;
  CHECK_THROWS_AS(run_chain(sys, ModelParams::from_ap(0.5, 0.5, 2.5), cfg),
                  validation_error);
  cfg.thin = 0;
  CHECK_THROWS_AS(run_chain(sys, ModelParams::from_ap(0.5, 0.5, 2.0), cfg),
                  validation_error);
  CHECK_THROWS_AS(run_chain(System::from_region(build_box(1, 0), 2),
                            ModelParams::from_ap(0.5, 0.5, 1.0), ChainConfig{}),
                  validation_error);
  CHECK_THROWS_AS(System::from_region(build_box(1, 0), -1), validation_error);
}

TEST_CASE("system construction from graphs, regions, and tori") {
  const System g = System::from_graph(path_graph(3));
  CHECK(g.n_sites == 3);
  CHECK(g.bond_count() == 2);
  CHECK(g.boundary_bond_count() == 0);
  CHECK_FALSE(g.wired());
  CHECK(g.probe_site == 2);

  const Region box = build_box_region({0, 0}, {1, 1});
  const System free_box = System::from_region(box, 0);
  CHECK(free_box.n_sites == 4);
  CHECK(free_box.bond_count() == 4);
  CHECK(free_box.boundary_bond_count() == 0);
  const System wired_box = System::from_region(box, 1);
  CHECK(wired_box.bond_count() == 4);
  CHECK(wired_box.boundary_bond_count() == 8);
  CHECK(wired_box.wired());
  CHECK(wired_box.fixed_degree == std::vector<int>{2, 2, 2, 2});
  CHECK(wired_box.surface_sites.size() == 4);

  const System t = System::torus(2, 3);
  CHECK(t.n_sites == 9);
  CHECK(t.bond_count() == 18);
  CHECK(t.probe_site == 3);  // site at coordinates (1, 0)
}

TEST_CASE("percolating start stays dense in the supercritical single-spin chain") {
  ChainConfig cfg;
  cfg.sweeps = 400;
  cfg.burn_in = 100;
  cfg.seed = 3;
  cfg.init = ChainConfig::Init::ones;
  const ObservableSeries series =
      run_chain(System::torus(2, 9), ModelParams::from_coupling(2.5, 5.0, 1.0), cfg);
  const auto col = series.column(series.column_index("open_vertex_density"));
  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= col.size();
  CHECK(mean > 0.75);

  CHECK_THROWS_AS(series.column_index("no_such_column"), validation_error);
}
