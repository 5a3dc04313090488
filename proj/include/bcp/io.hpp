#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bcp/errors.hpp"
#include "bcp/exact.hpp"
#include "bcp/orderings.hpp"
#include "bcp/params.hpp"
#include "bcp/sampler.hpp"
#include "bcp/scan.hpp"

namespace bcp {

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) {
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
  }
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Subset masks print with vertex (or edge) 0 as the first character, so the
// label reads left to right in index order.
inline std::string bit_label(std::uint32_t mask, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i)
    if (mask >> i & 1u) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

inline std::string spin_label(const std::vector<int>& spins, int q) {
  std::string s;
  const char* sep = q + 1 > 10 ? "," : "";
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (i > 0) s += sep;
    s += std::to_string(spins[i]);
  }
  return s;
}

// nlohmann::json serializes non-finite numbers as null; keep them readable
// by falling back to the string form.
inline nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

// Parameter echo used by every export: both charts, so downstream tooling
// never has to re-derive one from the other.
inline nlohmann::json params_json(const ModelParams& m) {
  nlohmann::json j;
  j["a"] = json_number(m.a);
  j["p"] = json_number(m.p);
  j["q"] = json_number(m.q);
  j["K"] = json_number(m.K());
  j["Delta"] = json_number(m.Delta());
  j["r"] = json_number(m.r());
  return j;
}

inline void write_params_comments(std::ostream& os, const ModelParams& m) {
  os << "# a = " << format_double(m.a) << "\n";
  os << "# p = " << format_double(m.p) << "\n";
  os << "# q = " << format_double(m.q) << "\n";
  os << "# K = " << format_double(m.K()) << "\n";
  os << "# Delta = " << format_double(m.Delta()) << "\n";
  os << "# r = " << format_double(m.r()) << "\n";
}

namespace detail {

// Stable export order: sort rows by their printed labels. Labels are
// fixed-width over the same alphabet, so string comparison is the
// lexicographic order on the underlying tuples.
template <class Row>
void sort_rows(std::vector<Row>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const Row& x, const Row& y) { return x.labels < y.labels; });
}

struct ExportRow {
  std::vector<std::string> labels;
  double log_weight = 0.0;
  double probability = 0.0;
};

template <class Key, class LabelFn>
std::vector<ExportRow> export_rows(const FiniteDistribution<Key>& dist, LabelFn&& label) {
  std::vector<ExportRow> rows;
  rows.reserve(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    ExportRow r;
    r.labels = label(dist.config(i));
    r.log_weight = dist.log_weight(i);
    r.probability = dist.probability(i);
    rows.push_back(std::move(r));
  }
  sort_rows(rows);
  return rows;
}

inline void write_rows_csv(std::ostream& os, const ModelParams& params,
                           const std::vector<std::string>& label_names,
                           double log_total, const std::vector<ExportRow>& rows) {
  write_params_comments(os, params);
  os << "# log_total = " << format_double(log_total) << "\n";
  for (std::size_t j = 0; j < label_names.size(); ++j)
    os << (j ? "," : "") << label_names[j];
  os << ",log_weight,probability\n";
  for (const auto& r : rows) {
    for (const auto& l : r.labels) os << l << ",";
    os << format_double(r.log_weight) << "," << format_double(r.probability) << "\n";
  }
}

inline nlohmann::json rows_json(const ModelParams& params,
                                const std::vector<std::string>& label_names,
                                double log_total, const std::vector<ExportRow>& rows) {
  nlohmann::json j;
  j["params"] = params_json(params);
  j["log_total"] = json_number(log_total);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e;
    for (std::size_t k = 0; k < label_names.size(); ++k) e[label_names[k]] = r.labels[k];
    e["log_weight"] = json_number(r.log_weight);
    e["probability"] = json_number(r.probability);
    arr.push_back(std::move(e));
  }
  j["rows"] = std::move(arr);
  return j;
}

}  // namespace detail

inline void write_theta_csv(std::ostream& os, const ThetaDist& dist, int n_vertices,
                            int n_edges, const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const ThetaKey& k) {
    return std::vector<std::string>{bit_label(k.psi, n_vertices), bit_label(k.omega, n_edges)};
  });
  detail::write_rows_csv(os, params, {"psi", "omega"}, dist.log_total(), rows);
}

inline nlohmann::json theta_json(const ThetaDist& dist, int n_vertices, int n_edges,
                                 const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const ThetaKey& k) {
    return std::vector<std::string>{bit_label(k.psi, n_vertices), bit_label(k.omega, n_edges)};
  });
  return detail::rows_json(params, {"psi", "omega"}, dist.log_total(), rows);
}

inline void write_spin_csv(std::ostream& os, const SpinDist& dist, int n_vertices, int q,
                           const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const SpinKey& k) {
    return std::vector<std::string>{spin_label(decode_spins(k.code, n_vertices, q), q)};
  });
  detail::write_rows_csv(os, params, {"spins"}, dist.log_total(), rows);
}

inline nlohmann::json spin_json(const SpinDist& dist, int n_vertices, int q,
                                const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const SpinKey& k) {
    return std::vector<std::string>{spin_label(decode_spins(k.code, n_vertices, q), q)};
  });
  return detail::rows_json(params, {"spins"}, dist.log_total(), rows);
}

inline void write_vertex_csv(std::ostream& os, const VertexDist& dist, int n_vertices,
                             const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const VertexKey& k) {
    return std::vector<std::string>{bit_label(k.psi, n_vertices)};
  });
  detail::write_rows_csv(os, params, {"psi"}, dist.log_total(), rows);
}

inline nlohmann::json vertex_json(const VertexDist& dist, int n_vertices,
                                  const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const VertexKey& k) {
    return std::vector<std::string>{bit_label(k.psi, n_vertices)};
  });
  return detail::rows_json(params, {"psi"}, dist.log_total(), rows);
}

inline void write_edge_csv(std::ostream& os, const EdgeDist& dist, int n_edges,
                           const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const EdgeKey& k) {
    return std::vector<std::string>{bit_label(k.omega, n_edges)};
  });
  detail::write_rows_csv(os, params, {"omega"}, dist.log_total(), rows);
}

inline nlohmann::json edge_json(const EdgeDist& dist, int n_edges,
                                const ModelParams& params) {
  auto rows = detail::export_rows(dist, [&](const EdgeKey& k) {
    return std::vector<std::string>{bit_label(k.omega, n_edges)};
  });
  return detail::rows_json(params, {"omega"}, dist.log_total(), rows);
}

inline void write_series_csv(std::ostream& os, const ObservableSeries& series) {
  os << "sweep";
  for (const auto& c : series.columns) os << "," << c;
  os << "\n";
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    os << series.sweep_index[i];
    for (double x : series.rows[i]) os << "," << format_double(x);
    os << "\n";
  }
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows,
                           const std::vector<std::string>& columns) {
  os << "a,p,q";
  for (const auto& c : columns) os << "," << c << "_mean," << c << "_se";
  os << ",tau_spin,tau_spin_se,tau_conn,tau_conn_se\n";
  for (const auto& r : rows) {
    os << format_double(r.a) << "," << format_double(r.p) << "," << format_double(r.q);
    for (std::size_t j = 0; j < columns.size(); ++j)
      os << "," << format_double(r.mean[j]) << "," << format_double(r.stderr_[j]);
    os << "," << format_double(r.tau.spin) << "," << format_double(r.tau.spin_se) << ","
       << format_double(r.tau.conn) << "," << format_double(r.tau.conn_se) << "\n";
  }
}

inline nlohmann::json scan_json(const std::vector<ScanRow>& rows,
                                const std::vector<std::string>& columns) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e;
    e["a"] = json_number(r.a);
    e["p"] = json_number(r.p);
    e["q"] = json_number(r.q);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      e[columns[j] + "_mean"] = json_number(r.mean[j]);
      e[columns[j] + "_se"] = json_number(r.stderr_[j]);
    }
    e["tau_spin"] = json_number(r.tau.spin);
    e["tau_spin_se"] = json_number(r.tau.spin_se);
    e["tau_conn"] = json_number(r.tau.conn);
    e["tau_conn_se"] = json_number(r.tau.conn_se);
    arr.push_back(std::move(e));
  }
  return nlohmann::json{{"rows", std::move(arr)}};
}

// gnuplot "nonuniform matrix": first row lists the p grid, each later row is
// an a value followed by the observable at (a, p). Missing cells print nan.
inline void write_scan_matrix(std::ostream& os, const std::vector<ScanRow>& rows,
                              std::size_t column) {
  std::set<double> a_set, p_set;
  std::map<std::pair<double, double>, double> cell;
  for (const auto& r : rows) {
    if (column >= r.mean.size()) throw validation_error("scan matrix: column out of range");
    a_set.insert(r.a);
    p_set.insert(r.p);
    cell[{r.a, r.p}] = r.mean[column];
  }
  os << p_set.size();
  for (double p : p_set) os << " " << format_double(p);
  os << "\n";
  for (double a : a_set) {
    os << format_double(a);
    for (double p : p_set) {
      auto it = cell.find({a, p});
      os << " " << (it == cell.end() ? "nan" : format_double(it->second));
    }
    os << "\n";
  }
}

inline nlohmann::json checkpoint_json(const Checkpoint& cp) {
  nlohmann::json j;
  j["version"] = cp.version;
  j["sweeps_done"] = cp.sweeps_done;
  j["rng_state"] = cp.rng_state;
  j["n_sites"] = cp.n_sites;
  j["q"] = cp.q;
  j["spins"] = cp.spins;
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint cp;
  try {
    cp.version = j.at("version").get<int>();
    if (cp.version != 1) throw validation_error("checkpoint: unsupported version");
    cp.sweeps_done = j.at("sweeps_done").get<std::uint64_t>();
    cp.rng_state = j.at("rng_state").get<std::uint64_t>();
    cp.n_sites = j.at("n_sites").get<int>();
    cp.q = j.at("q").get<int>();
    cp.spins = j.at("spins").get<SpinConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("checkpoint: malformed json: ") + e.what());
  }
  if (cp.n_sites < 0 || static_cast<std::size_t>(cp.n_sites) != cp.spins.size())
    throw validation_error("checkpoint: spin count does not match n_sites");
  for (auto s : cp.spins)
    if (s > cp.q) throw validation_error("checkpoint: spin value exceeds q");
  return cp;
}

// Violation report for the ordering checks: machine-readable witness or an
// explicit all-clear.
inline nlohmann::json check_report_json(const std::string& check, const CheckResult& res,
                                        int n_bits) {
  nlohmann::json j;
  j["check"] = check;
  j["ok"] = res.ok;
  if (!res.ok && res.witness) {
    nlohmann::json w;
    w["sigma1"] = bit_label(res.witness->sigma1, n_bits);
    w["sigma2"] = bit_label(res.witness->sigma2, n_bits);
    w["lhs"] = json_number(res.witness->lhs);
    w["rhs"] = json_number(res.witness->rhs);
    j["witness"] = std::move(w);
  }
  return j;
}

// Key-value run configuration: one `key = value` per line, `#` comments,
// values are numbers, booleans, or double-quoted strings. serialize() emits
// the canonical form, and parse(serialize(c)) reproduces c exactly.
struct RunConfig {
  std::optional<double> a, p, K, Delta;
  double q = 2.0;
  std::string graph;  // family spec ("k2", "path:4", ...) or an edge-list file
  int dim = 2;
  int box_n = 4;
  std::string boundary = "zero";  // zero | one | periodic
  std::uint64_t sweeps = 1000, burn_in = 100, thin = 1;
  std::uint64_t seed = 0, stream = 0;
  bool random_order = false;
  std::string init = "random";  // random | ones | zeros
  double a_min = 0.1, a_max = 0.9;
  int a_steps = 9;
  double p_min = 0.0, p_max = 0.9;
  int p_steps = 10;
  int jobs = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct KvEntry {
  std::string key;
  enum class Kind { number, boolean, string } kind;
  double num = 0.0;
  bool flag = false;
  std::string str;
};

inline std::vector<KvEntry> parse_kv(const std::string& text) {
  std::vector<KvEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw validation_error("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    body = strip(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    KvEntry entry;
    entry.key = strip(body.substr(0, eq));
    const std::string value = strip(body.substr(eq + 1));
    if (entry.key.empty() || value.empty()) fail("empty key or value");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail("unterminated string");
      entry.kind = KvEntry::Kind::string;
      entry.str = value.substr(1, value.size() - 2);
    } else if (value == "true" || value == "false") {
      entry.kind = KvEntry::Kind::boolean;
      entry.flag = value == "true";
    } else {
      entry.kind = KvEntry::Kind::number;
      std::size_t used = 0;
      try {
        entry.num = std::stod(value, &used);
      } catch (const std::exception&) {
        fail("not a number, boolean, or quoted string: " + value);
      }
      if (used != value.size()) fail("trailing characters after number: " + value);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  for (const auto& e : detail::parse_kv(text)) {
    using Kind = detail::KvEntry::Kind;
    auto num = [&]() {
      if (e.kind != Kind::number) throw validation_error("config key " + e.key + ": expected a number");
      return e.num;
    };
    auto str = [&]() {
      if (e.kind != Kind::string) throw validation_error("config key " + e.key + ": expected a quoted string");
      return e.str;
    };
    auto flag = [&]() {
      if (e.kind != Kind::boolean) throw validation_error("config key " + e.key + ": expected true or false");
      return e.flag;
    };
    auto integer = [&](long long lo, long long hi) {
      const double x = num();
      if (x != std::floor(x) || x < static_cast<double>(lo) || x > static_cast<double>(hi))
        throw validation_error("config key " + e.key + ": expected an integer in range");
      return static_cast<long long>(x);
    };
    if (e.key == "a") c.a = num();
    else if (e.key == "p") c.p = num();
    else if (e.key == "K") c.K = num();
    else if (e.key == "Delta") c.Delta = num();
    else if (e.key == "q") c.q = num();
    else if (e.key == "graph") c.graph = str();
    else if (e.key == "dim") c.dim = static_cast<int>(integer(1, 8));
    else if (e.key == "box_n") c.box_n = static_cast<int>(integer(0, 1 << 20));
    else if (e.key == "boundary") c.boundary = str();
    else if (e.key == "sweeps") c.sweeps = static_cast<std::uint64_t>(integer(0, 1ll << 62));
    else if (e.key == "burn_in") c.burn_in = static_cast<std::uint64_t>(integer(0, 1ll << 62));
    else if (e.key == "thin") c.thin = static_cast<std::uint64_t>(integer(1, 1ll << 62));
    else if (e.key == "seed") c.seed = static_cast<std::uint64_t>(integer(0, 1ll << 62));
    else if (e.key == "stream") c.stream = static_cast<std::uint64_t>(integer(0, 1ll << 62));
    else if (e.key == "random_order") c.random_order = flag();
    else if (e.key == "init") c.init = str();
    else if (e.key == "a_min") c.a_min = num();
    else if (e.key == "a_max") c.a_max = num();
    else if (e.key == "a_steps") c.a_steps = static_cast<int>(integer(1, 1 << 20));
    else if (e.key == "p_min") c.p_min = num();
    else if (e.key == "p_max") c.p_max = num();
    else if (e.key == "p_steps") c.p_steps = static_cast<int>(integer(1, 1 << 20));
    else if (e.key == "jobs") c.jobs = static_cast<int>(integer(1, 4096));
    else if (e.key == "out_dir") c.out_dir = str();
    else if (e.key == "format") c.format = str();
    else throw validation_error("config: unknown key " + e.key);
  }
  if (c.format != "csv" && c.format != "json")
    throw validation_error("config: format must be csv or json");
  if (c.init != "random" && c.init != "ones" && c.init != "zeros")
    throw validation_error("config: init must be random, ones, or zeros");
  BoundaryCondition::parse(c.boundary);  // rejects anything but zero/one/periodic
  return c;
}

inline std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream os;
  auto put_num = [&](const char* key, double v) { os << key << " = " << format_double(v) << "\n"; };
  auto put_int = [&](const char* key, std::uint64_t v) { os << key << " = " << v << "\n"; };
  auto put_str = [&](const char* key, const std::string& v) { os << key << " = \"" << v << "\"\n"; };
  auto put_flag = [&](const char* key, bool v) { os << key << " = " << (v ? "true" : "false") << "\n"; };
  if (c.a) put_num("a", *c.a);
  if (c.p) put_num("p", *c.p);
  if (c.K) put_num("K", *c.K);
  if (c.Delta) put_num("Delta", *c.Delta);
  put_num("q", c.q);
  if (!c.graph.empty()) put_str("graph", c.graph);
  put_int("dim", static_cast<std::uint64_t>(c.dim));
  put_int("box_n", static_cast<std::uint64_t>(c.box_n));
  put_str("boundary", c.boundary);
  put_int("sweeps", c.sweeps);
  put_int("burn_in", c.burn_in);
  put_int("thin", c.thin);
  put_int("seed", c.seed);
  put_int("stream", c.stream);
  put_flag("random_order", c.random_order);
  put_str("init", c.init);
  put_num("a_min", c.a_min);
  put_num("a_max", c.a_max);
  put_int("a_steps", static_cast<std::uint64_t>(c.a_steps));
  put_num("p_min", c.p_min);
  put_num("p_max", c.p_max);
  put_int("p_steps", static_cast<std::uint64_t>(c.p_steps));
  put_int("jobs", static_cast<std::uint64_t>(c.jobs));
  put_str("out_dir", c.out_dir);
  put_str("format", c.format);
  return os.str();
}

// The model must be pinned in exactly one chart: (a, p) or (K, Delta).
// Resolution fills in the other pair so the echoed config shows both.
inline ModelParams resolve_chart(RunConfig& c) {
  const bool ap = c.a.has_value() || c.p.has_value();
  const bool kd = c.K.has_value() || c.Delta.has_value();
  if (ap && kd)
    throw validation_error("config: give either (a, p) or (K, Delta), not a mixture");
  ModelParams m{};
  if (ap) {
    if (!c.a || !c.p) throw validation_error("config: the (a, p) chart needs both a and p");
    m = ModelParams::from_ap(*c.a, *c.p, c.q);
  } else if (kd) {
    if (!c.K || !c.Delta) throw validation_error("config: the (K, Delta) chart needs both K and Delta");
    m = ModelParams::from_coupling(*c.K, *c.Delta, c.q);
  } else {
    throw validation_error("config: model parameters missing; set (a, p) or (K, Delta)");
  }
  c.a = m.a;
  c.p = m.p;
  c.K = m.K();
  c.Delta = m.Delta();
  return m;
}

}  // namespace bcp
