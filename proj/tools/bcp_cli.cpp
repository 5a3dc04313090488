// command-line front end: exact tables, ordering checks, Monte Carlo chains,
// phase-diagram scans, and the reference constants. Exit codes: 0 success,
// 1 invalid input, 2 problem too large for exact enumeration, 3 anything else.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcp/errors.hpp"
#include "bcp/exact.hpp"
#include "bcp/graph.hpp"
#include "bcp/io.hpp"
#include "bcp/orderings.hpp"
#include "bcp/params.hpp"
#include "bcp/region.hpp"
#include "bcp/sampler.hpp"
#include "bcp/scan.hpp"

namespace {

using namespace bcp;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write " + path.string());
  out << content;
}

// "path:4", "cycle:5", "star:4" (hub plus 3 leaves), "complete:3", or a file
// in edge-list format.
Graph graph_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return parse_edge_list(read_file(spec));
  const std::string family = spec.substr(0, colon);
  int n = 0;
  try {
    n = std::stoi(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw validation_error("graph spec " + spec + ": size is not an integer");
  }
  if (n < 1) throw validation_error("graph spec " + spec + ": size must be >= 1");
  if (family == "path") return path_graph(n);
  if (family == "cycle") return cycle_graph(n);
  if (family == "star") return star_graph(n - 1);
  if (family == "complete") return complete_graph(n);
  throw validation_error("graph spec " + spec + ": unknown family " + family);
}

ChainConfig::Init parse_init(const std::string& s) {
  if (s == "random") return ChainConfig::Init::random;
  if (s == "ones") return ChainConfig::Init::ones;
  if (s == "zeros") return ChainConfig::Init::zeros;
  throw validation_error("init must be random, ones, or zeros");
}

// Option values flow in with precedence: command-line flag, then BCP_*
// environment variable (CLI11 treats it as a fallback source), then the
// --config file, then the built-in default. Each option records an apply
// step that runs only when CLI11 actually received a value.
struct CliOptions {
  std::string config_path;
  double a = 0, p = 0, K = 0, Delta = 0, q = 2;
  std::string graph, boundary = "zero", init = "random";
  std::string out_dir = ".", format = "csv";
  int dim = 2, box_n = 4, jobs = 1;
  std::uint64_t sweeps = 1000, burn_in = 100, thin = 1, seed = 0, stream = 0;
  bool random_order = false;
  double a_min = 0.1, a_max = 0.9, p_min = 0.0, p_max = 0.9;
  int a_steps = 9, p_steps = 10;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> binds;

  void add_config(CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value run configuration file")
        ->envname("BCP_CONFIG")
        ->check(CLI::ExistingFile);
  }

  template <class T>
  CLI::Option* track(CLI::App* sub, const std::string& name, T& storage,
                     const std::string& help, std::function<void(RunConfig&)> apply,
                     const char* env = nullptr) {
    CLI::Option* o = sub->add_option(name, storage, help);
    if (env) o->envname(env);
    binds.emplace_back(o, std::move(apply));
    return o;
  }

  void add_model(CLI::App* sub) {
    track(sub, "--a", a, "open-vertex activity, in (0, 1]", [this](RunConfig& c) { c.a = a; });
    track(sub, "--p", p, "edge density parameter, in [0, 1)", [this](RunConfig& c) { c.p = p; });
    track(sub, "--K", K, "coupling, K >= 0", [this](RunConfig& c) { c.K = K; });
    track(sub, "--Delta", Delta, "zero-spin field", [this](RunConfig& c) { c.Delta = Delta; });
    track(sub, "--q", q, "number of spin colors (cluster weight)",
          [this](RunConfig& c) { c.q = q; });
  }

  void add_geometry(CLI::App* sub, bool with_graph) {
    if (with_graph)
      track(sub, "--graph", graph, "graph spec (family:n or edge-list file); overrides the box",
            [this](RunConfig& c) { c.graph = graph; });
    track(sub, "--dim", dim, "box dimension", [this](RunConfig& c) { c.dim = dim; });
    track(sub, "--box-n", box_n, "box half-width, sites in [-n, n]^dim",
          [this](RunConfig& c) { c.box_n = box_n; });
    track(sub, "--boundary", boundary, "zero, one, or periodic",
          [this](RunConfig& c) { c.boundary = boundary; });
  }

  void add_chain(CLI::App* sub) {
    track(sub, "--sweeps", sweeps, "recorded-phase sweeps", [this](RunConfig& c) { c.sweeps = sweeps; });
    track(sub, "--burn-in", burn_in, "discarded leading sweeps",
          [this](RunConfig& c) { c.burn_in = burn_in; });
    track(sub, "--thin", thin, "record every thin-th sweep", [this](RunConfig& c) { c.thin = thin; });
    track(sub, "--seed", seed, "rng seed", [this](RunConfig& c) { c.seed = seed; }, "BCP_SEED");
    track(sub, "--stream", stream, "rng stream index", [this](RunConfig& c) { c.stream = stream; });
    track(sub, "--random-order", random_order, "visit sites in random order each sweep",
          [this](RunConfig& c) { c.random_order = random_order; });
    track(sub, "--init", init, "initial spins: random, ones, or zeros",
          [this](RunConfig& c) { c.init = init; });
  }

  void add_grid(CLI::App* sub) {
    track(sub, "--a-min", a_min, "grid start in a", [this](RunConfig& c) { c.a_min = a_min; });
    track(sub, "--a-max", a_max, "grid end in a", [this](RunConfig& c) { c.a_max = a_max; });
    track(sub, "--a-steps", a_steps, "grid points in a", [this](RunConfig& c) { c.a_steps = a_steps; });
    track(sub, "--p-min", p_min, "grid start in p", [this](RunConfig& c) { c.p_min = p_min; });
    track(sub, "--p-max", p_max, "grid end in p", [this](RunConfig& c) { c.p_max = p_max; });
    track(sub, "--p-steps", p_steps, "grid points in p", [this](RunConfig& c) { c.p_steps = p_steps; });
    track(sub, "--jobs", jobs, "worker threads", [this](RunConfig& c) { c.jobs = jobs; }, "BCP_JOBS");
  }

  void add_output(CLI::App* sub) {
    track(sub, "--out-dir", out_dir, "output directory",
          [this](RunConfig& c) { c.out_dir = out_dir; }, "BCP_OUT_DIR");
    track(sub, "--format", format, "csv or json", [this](RunConfig& c) { c.format = format; },
          "BCP_FORMAT");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_run_config(read_file(config_path));
    for (const auto& [opt, apply] : binds)
      if (opt->count() > 0) apply(cfg);
    if (cfg.format != "csv" && cfg.format != "json")
      throw validation_error("format must be csv or json");
    return cfg;
  }
};

bool integer_q(double q) { return q >= 1.0 && std::floor(q) == q && q <= 64.0; }

void print_params(const ModelParams& m) {
  std::cout << "a = " << format_double(m.a) << "  p = " << format_double(m.p)
            << "  q = " << format_double(m.q) << "\n"
            << "K = " << format_double(m.K()) << "  Delta = " << format_double(m.Delta())
            << "  r = " << format_double(m.r()) << "\n";
}

int run_exact(const RunConfig& cfg, std::uint64_t work_cap, const std::vector<int>& pair) {
  EnumLimits lim;
  if (work_cap > 0) lim.theta_work = work_cap;
  ModelParams params = [&cfg] {
    RunConfig tmp = cfg;
    return resolve_chart(tmp);
  }();
  print_params(params);

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  const bool json = cfg.format == "json";
  auto emit = [&](const std::string& stem, const std::function<void(std::ostream&)>& csv,
                  const std::function<nlohmann::json()>& as_json) {
    const auto path = dir / (stem + (json ? ".json" : ".csv"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path.string());
    if (json)
      out << as_json().dump(2) << "\n";
    else
      csv(out);
    std::cout << "wrote " << path.string() << "\n";
  };

  const bool use_graph = !cfg.graph.empty() || cfg.boundary == "periodic";
  if (use_graph) {
    const Graph g = cfg.graph.empty() ? torus_graph(cfg.dim, 2 * cfg.box_n + 1)
                                      : graph_from_spec(cfg.graph);
    const ThetaDist theta = drc_measure(g, params, lim);
    const VertexDist vert = vertex_marginal(theta);
    const EdgeDist edge = edge_marginal(theta);
    const int nv = g.n, ne = static_cast<int>(g.edges.size());
    emit("theta", [&](std::ostream& os) { write_theta_csv(os, theta, nv, ne, params); },
         [&] { return theta_json(theta, nv, ne, params); });
    emit("vertex", [&](std::ostream& os) { write_vertex_csv(os, vert, nv, params); },
         [&] { return vertex_json(vert, nv, params); });
    emit("edge", [&](std::ostream& os) { write_edge_csv(os, edge, ne, params); },
         [&] { return edge_json(edge, ne, params); });
    std::cout << "log Z (cluster side) = " << format_double(theta.log_total()) << "\n";

    if (params.a == 1.0) {
      std::cout << "a = 1: purely random-cluster point (all vertices open), no spin table\n";
    } else if (!integer_q(params.q)) {
      std::cout << "q is not an integer: cluster tables only, no spin table\n";
    } else {
      const int iq = static_cast<int>(params.q);
      const SpinDist spins = bcp_measure(g, params.K(), params.Delta(), iq, lim);
      emit("spins", [&](std::ostream& os) { write_spin_csv(os, spins, nv, iq, params); },
           [&] { return spin_json(spins, nv, iq, params); });
      std::cout << "log Z (spin side)    = " << format_double(spins.log_total()) << "\n";
      std::cout << "identity check: log Z_spin - log Z_cluster - |V| Delta = "
                << format_double(spins.log_total() - theta.log_total() - g.n * params.Delta())
                << "\n";
      if (!pair.empty()) {
        if (pair.size() != 2 || pair[0] < 0 || pair[0] >= g.n || pair[1] < 0 || pair[1] >= g.n)
          throw validation_error("--pair needs two vertex indices inside the graph");
        const double tau = two_point(g, params.K(), params.Delta(), iq, pair[0], pair[1], lim);
        std::cout << "two-point tau(" << pair[0] << ", " << pair[1]
                  << ") = " << format_double(tau) << "\n";
      }
    }
    return 0;
  }

  const Region region = build_box(cfg.dim, cfg.box_n);
  const BoundaryCondition bc = BoundaryCondition::parse(cfg.boundary);
  const ThetaDist theta = drc_measure_with_boundary(region, bc, params, lim);
  const VertexDist vert = vertex_marginal(theta);
  const EdgeDist edge = edge_marginal(theta);
  const int nv = region.interior_count, ne = static_cast<int>(region.edges.size());
  emit("theta", [&](std::ostream& os) { write_theta_csv(os, theta, nv, ne, params); },
       [&] { return theta_json(theta, nv, ne, params); });
  emit("vertex", [&](std::ostream& os) { write_vertex_csv(os, vert, nv, params); },
       [&] { return vertex_json(vert, nv, params); });
  emit("edge", [&](std::ostream& os) { write_edge_csv(os, edge, ne, params); },
       [&] { return edge_json(edge, ne, params); });
  std::cout << "box [-" << cfg.box_n << ", " << cfg.box_n << "]^" << cfg.dim << " with "
            << bc.name() << " boundary: interior " << nv << ", edges " << ne << "\n";
  std::cout << "log Z (cluster side) = " << format_double(theta.log_total()) << "\n";
  std::cout << "spin tables are graph-mode only; rerun with --graph for the spin side\n";
  return 0;
}

int run_dominance(const RunConfig& cfg, double a1, double p1, double a2, double p2,
                  double tol, const std::string& out_path) {
  const Graph g = graph_from_spec(cfg.graph.empty() ? "path:2" : cfg.graph);
  if (g.n > 16) throw validation_error("dominance: graph too large, need at most 16 vertices");
  if (a1 >= 1.0 || a2 >= 1.0)
    throw validation_error("dominance: checks need strictly positive measures, so a < 1");
  const ModelParams m1 = ModelParams::from_ap(a1, p1, cfg.q);
  const ModelParams m2 = ModelParams::from_ap(a2, p2, cfg.q);
  const BinaryMeasure mu1 =
      BinaryMeasure::from_vertex_marginal(vertex_marginal(drc_measure(g, m1)), g.n);
  const BinaryMeasure mu2 =
      BinaryMeasure::from_vertex_marginal(vertex_marginal(drc_measure(g, m2)), g.n);

  nlohmann::json report;
  report["graph"] = cfg.graph.empty() ? "path:2" : cfg.graph;
  report["measure1"] = params_json(m1);
  report["measure2"] = params_json(m2);
  nlohmann::json checks = nlohmann::json::array();
  checks.push_back(check_report_json("fkg_measure1", fkg_check(mu1, tol), g.n));
  checks.push_back(check_report_json("fkg_measure2", fkg_check(mu2, tol), g.n));
  checks.push_back(check_report_json("holley", holley_check(mu1, mu2, tol), g.n));
  if (g.n <= 5)
    checks.push_back(check_report_json("dominance_upsets", dominance_exact(mu1, mu2, tol), g.n));
  report["checks"] = std::move(checks);

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else {
    write_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_sample(const RunConfig& cfg, const std::string& resume_path,
               const std::string& checkpoint_out) {
  ModelParams params = [&cfg] {
    RunConfig tmp = cfg;
    return resolve_chart(tmp);
  }();
  print_params(params);

  System sys;
  std::string geometry;
  if (!cfg.graph.empty()) {
    sys = System::from_graph(graph_from_spec(cfg.graph));
    geometry = "graph " + cfg.graph;
  } else if (cfg.boundary == "periodic") {
    if (cfg.box_n < 1) throw validation_error("periodic box needs box_n >= 1");
    sys = System::torus(cfg.dim, 2 * cfg.box_n + 1);
    geometry = "torus side " + std::to_string(2 * cfg.box_n + 1);
  } else {
    const int spin = cfg.boundary == "one" ? 1 : 0;
    BoundaryCondition::parse(cfg.boundary);
    sys = System::from_region(build_box(cfg.dim, cfg.box_n), spin);
    geometry = "box half-width " + std::to_string(cfg.box_n) + ", " + cfg.boundary + " boundary";
  }

  ChainConfig cc;
  cc.sweeps = cfg.sweeps;
  cc.burn_in = cfg.burn_in;
  cc.thin = cfg.thin;
  cc.seed = cfg.seed;
  cc.stream = cfg.stream;
  cc.random_order = cfg.random_order;
  cc.init = parse_init(cfg.init);

  Checkpoint resume_cp;
  const Checkpoint* resume = nullptr;
  if (!resume_path.empty()) {
    resume_cp = checkpoint_from_json(nlohmann::json::parse(read_file(resume_path)));
    resume = &resume_cp;
  }

  Checkpoint final_cp;
  const ObservableSeries series = run_chain(sys, params, cc, resume, &final_cp);

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "series.csv", std::ios::binary);
    if (!out) throw validation_error("cannot write series.csv");
    write_series_csv(out, series);
  }
  nlohmann::json meta;
  meta["params"] = params_json(params);
  meta["geometry"] = geometry;
  meta["n_sites"] = sys.n_sites;
  meta["bonds"] = sys.bond_count();
  meta["sweeps_done"] = final_cp.sweeps_done;
  meta["recorded"] = series.rows.size();
  meta["seed"] = cfg.seed;
  meta["stream"] = cfg.stream;
  write_file(dir / "metadata.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "series.csv").string() << " (" << series.rows.size()
            << " rows)\n";
  if (!checkpoint_out.empty()) {
    write_file(checkpoint_out, checkpoint_json(final_cp).dump(2) + "\n");
    std::cout << "wrote " << checkpoint_out << "\n";
  }
  for (std::size_t j = 0; j < series.columns.size(); ++j) {
    const auto [mean, se] = batch_means(series.column(j));
    std::cout << series.columns[j] << " = " << format_double(mean) << " +- " << format_double(se)
              << "\n";
  }
  return 0;
}

int run_scan(const RunConfig& cfg, const std::vector<std::string>& matrix_columns) {
  ScanGrid grid;
  if (cfg.a_steps < 1 || cfg.p_steps < 1) throw validation_error("scan: steps must be >= 1");
  for (int i = 0; i < cfg.a_steps; ++i) {
    const double a = cfg.a_steps == 1
                         ? cfg.a_min
                         : cfg.a_min + (cfg.a_max - cfg.a_min) * i / (cfg.a_steps - 1.0);
    for (int j = 0; j < cfg.p_steps; ++j) {
      const double p = cfg.p_steps == 1
                           ? cfg.p_min
                           : cfg.p_min + (cfg.p_max - cfg.p_min) * j / (cfg.p_steps - 1.0);
      grid.points.push_back({a, p});
    }
  }
  grid.q = cfg.q;
  grid.d = cfg.dim;
  grid.n = cfg.box_n;
  if (cfg.boundary == "periodic")
    grid.boundary_spin = -1;
  else
    grid.boundary_spin = cfg.boundary == "one" ? 1 : 0;
  BoundaryCondition::parse(cfg.boundary);
  grid.sweeps = cfg.sweeps;
  grid.burn_in = cfg.burn_in;
  grid.thin = cfg.thin;
  grid.seed = cfg.seed;
  grid.jobs = cfg.jobs;
  grid.init = parse_init(cfg.init);

  std::cout << grid.points.size() << " grid points, " << cfg.sweeps << " sweeps each, "
            << cfg.jobs << " jobs\n";
  const std::vector<ScanRow> rows = scan(grid);

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  const auto& cols = observable_columns();
  if (cfg.format == "json") {
    write_file(dir / "scan.json", scan_json(rows, cols).dump(2) + "\n");
    std::cout << "wrote " << (dir / "scan.json").string() << "\n";
  } else {
    std::ofstream out(dir / "scan.csv", std::ios::binary);
    if (!out) throw validation_error("cannot write scan.csv");
    write_scan_csv(out, rows, cols);
    std::cout << "wrote " << (dir / "scan.csv").string() << "\n";
  }
  for (const auto& name : matrix_columns) {
    std::size_t j = 0;
    while (j < cols.size() && cols[j] != name) ++j;
    if (j == cols.size()) throw validation_error("scan: no observable named " + name);
    const auto path = dir / ("matrix_" + name + ".dat");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path.string());
    write_scan_matrix(out, rows, j);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int run_constants(bool json, double a, double p, bool have_point) {
  const CriticalConstants c = CriticalConstants::square_lattice();
  if (json) {
    nlohmann::json j;
    j["pi_c"] = c.pi_c;
    j["K_c"] = c.K_c;
    j["p_c_site"] = c.p_c_site;
    j["a_bar"] = c.a_bar;
    j["p_bar"] = c.p_bar;
    j["icvc_abscissa"] = c.icvc_abscissa;
    j["iovc_abscissa"] = c.iovc_abscissa;
    if (have_point) {
      const RegionFlags f = region_predicates(a, p);
      nlohmann::json flags;
      flags["icvc_strip"] = f.icvc_strip;
      flags["iovc_iec_strip"] = f.iovc_iec_strip;
      flags["no_iec_line"] = f.no_iec_line;
      flags["icvc_arc"] = f.icvc_arc;
      flags["iovc_halfplane"] = f.iovc_halfplane;
      j["point"] = nlohmann::json{{"a", a}, {"p", p}, {"flags", flags}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  auto line = [](const char* name, double v, int dp) {
    std::cout << name << " = " << format_double(v) << "  (~" << round_to(v, dp) << ")\n";
  };
  std::cout << "square-lattice reference constants (d = 2, q = 2 where relevant)\n";
  line("pi_c          ", c.pi_c, 3);
  line("K_c           ", c.K_c, 3);
  line("p_c_site      ", c.p_c_site, 3);
  line("a_bar         ", c.a_bar, 3);
  line("p_bar         ", c.p_bar, 3);
  line("icvc_abscissa ", c.icvc_abscissa, 2);
  line("iovc_abscissa ", c.iovc_abscissa, 2);
  if (have_point) {
    const RegionFlags f = region_predicates(a, p);
    std::cout << "flags at (a, p) = (" << format_double(a) << ", " << format_double(p) << "):\n";
    std::cout << "  icvc_strip      = " << (f.icvc_strip ? "true" : "false") << "\n";
    std::cout << "  iovc_iec_strip  = " << (f.iovc_iec_strip ? "true" : "false") << "\n";
    std::cout << "  no_iec_line     = " << (f.no_iec_line ? "true" : "false") << "\n";
    std::cout << "  icvc_arc        = " << (f.icvc_arc ? "true" : "false") << "\n";
    std::cout << "  iovc_halfplane  = " << (f.iovc_halfplane ? "true" : "false") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blume-Capel-Potts spins and their diluted random-cluster representation"};
  app.require_subcommand(1);

  CliOptions opts;

  CLI::App* exact = app.add_subcommand("exact", "exact finite-volume tables");
  opts.add_config(exact);
  opts.add_model(exact);
  opts.add_geometry(exact, true);
  opts.add_output(exact);
  std::uint64_t work_cap = 0;
  exact->add_option("--work-cap", work_cap,
                    "enumeration budget, total open-edge subsets (0 = default cap)");
  std::vector<int> pair;
  exact->add_option("--pair", pair, "two vertex indices for the two-point function")
      ->expected(2);

  CLI::App* dom = app.add_subcommand("dominance", "stochastic-ordering checks between two points");
  opts.add_config(dom);
  double a1 = 0.3, p1 = 0.4, a2 = 0.5, p2 = 0.6, tol = 1e-12;
  dom->add_option("--a1", a1, "activity of the lower measure")->required();
  dom->add_option("--p1", p1, "edge parameter of the lower measure")->required();
  dom->add_option("--a2", a2, "activity of the upper measure")->required();
  dom->add_option("--p2", p2, "edge parameter of the upper measure")->required();
  dom->add_option("--q", opts.q, "cluster weight shared by both measures");
  opts.binds.emplace_back(dom->get_option("--q"),
                          [&opts](RunConfig& c) { c.q = opts.q; });
  dom->add_option("--graph", opts.graph, "graph spec, default path:2");
  opts.binds.emplace_back(dom->get_option("--graph"),
                          [&opts](RunConfig& c) { c.graph = opts.graph; });
  dom->add_option("--tol", tol, "comparison slack");
  std::string dom_out;
  dom->add_option("--out", dom_out, "write the report here instead of stdout");

  CLI::App* sample = app.add_subcommand("sample", "run one Monte Carlo chain");
  opts.add_config(sample);
  opts.add_model(sample);
  opts.add_geometry(sample, true);
  opts.add_chain(sample);
  opts.add_output(sample);
  std::string resume_path, checkpoint_out;
  sample->add_option("--resume", resume_path, "checkpoint json to continue from")
      ->check(CLI::ExistingFile);
  sample->add_option("--checkpoint-out", checkpoint_out, "write the final state here");

  CLI::App* scan_cmd = app.add_subcommand("scan", "chain per grid point over (a, p)");
  opts.add_config(scan_cmd);
  opts.add_model(scan_cmd);
  opts.add_geometry(scan_cmd, false);
  opts.add_chain(scan_cmd);
  opts.add_grid(scan_cmd);
  opts.add_output(scan_cmd);
  std::vector<std::string> matrix_columns;
  scan_cmd->add_option("--matrix", matrix_columns,
                       "also write a gnuplot matrix for this observable (repeatable)");

  CLI::App* consts = app.add_subcommand("constants", "reference constants and phase flags");
  bool consts_json = false;
  consts->add_flag("--json", consts_json, "emit json");
  double ca = 0, cp = 0;
  CLI::Option* oa = consts->add_option("--a", ca, "activity for the flag report");
  CLI::Option* op = consts->add_option("--p", cp, "edge parameter for the flag report");
  oa->needs(op);
  op->needs(oa);

  CLI11_PARSE(app, argc, argv);

  try {
    if (exact->parsed()) return run_exact(opts.resolve(), work_cap, pair);
    if (dom->parsed()) return run_dominance(opts.resolve(), a1, p1, a2, p2, tol, dom_out);
    if (sample->parsed()) return run_sample(opts.resolve(), resume_path, checkpoint_out);
    if (scan_cmd->parsed()) return run_scan(opts.resolve(), matrix_columns);
    if (consts->parsed()) return run_constants(consts_json, ca, cp, oa->count() > 0);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const capacity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
