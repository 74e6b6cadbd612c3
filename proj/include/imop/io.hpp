/**
 * @file io.hpp
 * @brief File formats: instance/spec configuration, observation CSV,
 *        run outputs, and round-state JSON.
 *
 * The configuration format is line oriented: `key = value` assignments at
 * the top level, `[section]` headers introducing blocks of whitespace-
 * separated numeric rows (row-major matrices). `#` starts a comment.
 * Doubles are written in shortest round-trip form so re-reading a written
 * file reproduces the values exactly.
 */

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imop/errors.hpp"
#include "imop/model.hpp"
#include "imop/online.hpp"

namespace imop {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting.

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// General format limited to `sig` significant digits.
inline std::string format_double_sig(double v, int sig) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, sig);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("bad number '" + tok + "'", line);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Generic key/value + numeric-section configuration files.

struct ConfigFile {
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<std::vector<double>>> sections;

  bool has(const std::string& key) const { return scalars.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    const auto it = scalars.find(key);
    if (it == scalars.end()) throw ParseError("missing key '" + key + "'");
    return it->second;
  }

  const std::vector<std::vector<double>>& section(const std::string& name) const {
    const auto it = sections.find(name);
    if (it == sections.end()) {
      throw ParseError("missing section [" + name + "]");
    }
    return it->second;
  }
};

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline ConfigFile parse_config(std::istream& in) {
  ConfigFile cfg;
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section", lineno);
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ParseError("empty section name", lineno);
      cfg.sections[current];  // register, possibly empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq != std::string::npos && current.empty()) {
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError("empty key", lineno);
      cfg.scalars[key] = value;
      continue;
    }
    if (current.empty()) {
      throw ParseError("numeric row outside any section", lineno);
    }
    std::istringstream row(line);
    std::vector<double> values;
    std::string tok;
    while (row >> tok) values.push_back(parse_double(tok, lineno));
    cfg.sections[current].push_back(std::move(values));
  }
  return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_config(in);
}

namespace detail {

inline Matrix section_matrix(const ConfigFile& cfg, const std::string& name,
                             Index rows, Index cols) {
  const auto& data = cfg.section(name);
  if (static_cast<Index>(data.size()) != rows) {
    throw ParseError("section [" + name + "] expects " +
                     std::to_string(rows) + " rows");
  }
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = data[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != cols) {
      throw ParseError("section [" + name + "] expects " +
                       std::to_string(cols) + " columns per row");
    }
    for (Index j = 0; j < cols; ++j) M(i, j) = row[static_cast<std::size_t>(j)];
  }
  return M;
}

inline Vector section_vector(const ConfigFile& cfg, const std::string& name,
                             Index size) {
  return section_matrix(cfg, name, 1, size).row(0).transpose();
}

inline Vector parse_vector_value(const std::string& value, Index expect = -1) {
  std::istringstream in(value);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(parse_double(tok, -1));
  if (expect >= 0 && static_cast<Index>(vals.size()) != expect) {
    throw ParseError("expected " + std::to_string(expect) + " numbers");
  }
  Vector v(static_cast<Index>(vals.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = vals[static_cast<std::size_t>(i)];
  return v;
}

inline std::string vector_row(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance files.

inline MopInstance read_instance(const std::string& path) {
  const ConfigFile cfg = parse_config_file(path);
  MopRaw raw;
  raw.p = static_cast<int>(parse_double(cfg.get("p"), -1));
  raw.n = static_cast<int>(parse_double(cfg.get("n"), -1));
  raw.q = static_cast<int>(parse_double(cfg.get("q"), -1));
  raw.claim_strong_convexity =
      cfg.has("strong_convexity") && cfg.get("strong_convexity") == "true";
  for (int l = 1; l <= raw.p; ++l) {
    raw.Q.push_back(
        detail::section_matrix(cfg, "Q" + std::to_string(l), raw.n, raw.n));
    raw.c.push_back(
        detail::section_vector(cfg, "c" + std::to_string(l), raw.n));
  }
  raw.A = detail::section_matrix(cfg, "A", raw.q, raw.n);
  raw.b = detail::section_vector(cfg, "b", raw.q);
  return build_instance(raw);
}

inline void write_instance(const std::string& path, const MopInstance& inst) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "# imop instance\n";
  out << "p = " << inst.p << "\n";
  out << "n = " << inst.n << "\n";
  out << "q = " << inst.q << "\n";
  out << "strong_convexity = " << (inst.strongly_convex ? "true" : "false")
      << "\n";
  for (int l = 0; l < inst.p; ++l) {
    out << "\n[Q" << (l + 1) << "]\n";
    const Matrix& Q = inst.Q[static_cast<std::size_t>(l)];
    for (Index i = 0; i < Q.rows(); ++i) {
      out << detail::vector_row(Q.row(i).transpose()) << "\n";
    }
    out << "\n[c" << (l + 1) << "]\n";
    out << detail::vector_row(inst.c[static_cast<std::size_t>(l)]) << "\n";
  }
  out << "\n[A]\n";
  for (Index i = 0; i < inst.A.rows(); ++i) {
    out << detail::vector_row(inst.A.row(i).transpose()) << "\n";
  }
  out << "\n[b]\n" << detail::vector_row(inst.b) << "\n";
}

// ---------------------------------------------------------------------------
// Parameter-spec files.

inline MopInstance read_spec_and_attach(const std::string& path,
                                        const MopInstance& inst) {
  const ConfigFile cfg = parse_config_file(path);
  const std::string block_name = cfg.get("block");
  ParamBlock block;
  if (block_name == "objective_linear") {
    block = ParamBlock::ObjectiveLinear;
  } else if (block_name == "rhs") {
    block = ParamBlock::Rhs;
  } else {
    throw ParseError("unknown block '" + block_name + "'");
  }
  const Vector lower = detail::parse_vector_value(cfg.get("lower"));
  const Vector upper = detail::parse_vector_value(cfg.get("upper"));
  std::optional<Vector> base;
  std::optional<Matrix> map;
  const Index block_dim = block == ParamBlock::Rhs
                              ? static_cast<Index>(inst.q)
                              : static_cast<Index>(inst.n) * inst.p;
  if (cfg.sections.count("base") > 0) {
    base = detail::section_vector(cfg, "base", block_dim);
  }
  if (cfg.sections.count("map") > 0) {
    map = detail::section_matrix(cfg, "map", block_dim, lower.size());
  }
  return attach_param_spec(inst, block, lower, upper, base, map);
}

inline void write_spec(const std::string& path, const ParamSpec& spec) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "# imop parameter spec\n";
  out << "block = "
      << (spec.block == ParamBlock::Rhs ? "rhs" : "objective_linear") << "\n";
  out << "lower = " << detail::vector_row(spec.lower) << "\n";
  out << "upper = " << detail::vector_row(spec.upper) << "\n";
  out << "\n[base]\n" << detail::vector_row(spec.base) << "\n";
  out << "\n[map]\n";
  for (Index i = 0; i < spec.map.rows(); ++i) {
    out << detail::vector_row(spec.map.row(i).transpose()) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Observation CSV: header "t,y1,..,yn".

inline void write_observations(const std::string& path,
                               const std::vector<Observation>& obs) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  if (obs.empty()) throw InvalidInput("no observations to write");
  const Index n = obs.front().y.size();
  out << "t";
  for (Index i = 0; i < n; ++i) out << ",y" << (i + 1);
  out << "\n";
  for (const auto& o : obs) {
    out << o.t;
    for (Index i = 0; i < n; ++i) out << ',' << format_double(o.y[i]);
    out << "\n";
  }
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline std::vector<Observation> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  const auto header = split_csv_row(trim(line));
  if (header.size() < 2 || header[0] != "t") {
    throw ParseError("observation header must be t,y1,..,yn", lineno);
  }
  const std::size_t n = header.size() - 1;
  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto cells = split_csv_row(trimmed);
    if (cells.size() != n + 1) {
      throw ParseError("expected " + std::to_string(n + 1) + " cells, got " +
                       std::to_string(cells.size()), lineno);
    }
    Observation o;
    o.t = static_cast<int>(parse_double(cells[0], lineno));
    o.y.resize(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      o.y[static_cast<Index>(i)] = parse_double(cells[i + 1], lineno);
    }
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw ParseError("no observation rows", lineno);
  return obs;
}

// ---------------------------------------------------------------------------
// Run outputs. Per-round wall times are kept out of rounds.csv so that runs
// with the same flags and seed are byte identical; timings.csv carries them.

inline void write_rounds(const std::string& path,
                         const std::vector<RoundLog>& rounds) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  const Index d = rounds.empty() ? 0 : rounds.front().theta.size();
  out << "t,loss,k_used,err";
  for (Index i = 0; i < d; ++i) out << ",theta_" << i;
  out << "\n";
  for (const auto& r : rounds) {
    out << r.t << ',' << format_double(r.loss) << ',' << r.k_used << ','
        << format_double(r.est_error);
    for (Index i = 0; i < d; ++i) out << ',' << format_double(r.theta[i]);
    out << "\n";
  }
}

inline void write_timings(const std::string& path,
                          const std::vector<RoundLog>& rounds) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "t,wall_ms\n";
  for (const auto& r : rounds) {
    out << r.t << ',' << format_double(r.wall_ms) << "\n";
  }
}

inline void write_histogram(const std::string& path, const WeightGrid& grid,
                            const WeightHistogram& hist) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "bin,count,proportion\n";
  for (int k = 0; k < grid.size(); ++k) {
    out << format_double(grid[k][0]) << ','
        << hist.counts[static_cast<std::size_t>(k)] << ','
        << format_double(hist.proportions[static_cast<std::size_t>(k)]) << "\n";
  }
}

// ---------------------------------------------------------------------------
// JSON helpers.

inline json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    rows.push_back(vector_to_json(M.row(i).transpose()));
  }
  return rows;
}

inline Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const json& rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(rows[0].size());
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i) {
    M.row(i) = vector_from_json(rows[static_cast<std::size_t>(i)]).transpose();
  }
  return M;
}

inline json instance_to_json(const MopInstance& inst) {
  json j;
  j["p"] = inst.p;
  j["n"] = inst.n;
  j["q"] = inst.q;
  j["strong_convexity"] = inst.strongly_convex;
  j["Q"] = json::array();
  j["c"] = json::array();
  for (int l = 0; l < inst.p; ++l) {
    j["Q"].push_back(matrix_to_json(inst.Q[static_cast<std::size_t>(l)]));
    j["c"].push_back(vector_to_json(inst.c[static_cast<std::size_t>(l)]));
  }
  j["A"] = matrix_to_json(inst.A);
  j["b"] = vector_to_json(inst.b);
  if (inst.param.has_value()) {
    const ParamSpec& s = *inst.param;
    json sp;
    sp["block"] = s.block == ParamBlock::Rhs ? "rhs" : "objective_linear";
    sp["lower"] = vector_to_json(s.lower);
    sp["upper"] = vector_to_json(s.upper);
    sp["base"] = vector_to_json(s.base);
    sp["map"] = matrix_to_json(s.map);
    j["spec"] = sp;
  }
  return j;
}

inline MopInstance instance_from_json(const json& j) {
  MopRaw raw;
  raw.p = j.at("p").get<int>();
  raw.n = j.at("n").get<int>();
  raw.q = j.at("q").get<int>();
  raw.claim_strong_convexity = j.value("strong_convexity", false);
  for (int l = 0; l < raw.p; ++l) {
    raw.Q.push_back(matrix_from_json(j.at("Q")[static_cast<std::size_t>(l)]));
    raw.c.push_back(vector_from_json(j.at("c")[static_cast<std::size_t>(l)]));
  }
  raw.A = matrix_from_json(j.at("A"));
  raw.b = vector_from_json(j.at("b"));
  MopInstance inst = build_instance(raw);
  if (j.contains("spec")) {
    const json& sp = j.at("spec");
    const ParamBlock block = sp.at("block").get<std::string>() == "rhs"
                                 ? ParamBlock::Rhs
                                 : ParamBlock::ObjectiveLinear;
    inst = attach_param_spec(inst, block, vector_from_json(sp.at("lower")),
                             vector_from_json(sp.at("upper")),
                             vector_from_json(sp.at("base")),
                             matrix_from_json(sp.at("map")));
  }
  return inst;
}

/// Everything needed to reproduce one implicit-update subproblem.
struct RoundState {
  MopInstance instance;  // param spec attached
  Vector theta_t;
  Vector y;
  double eta = 1.0;
  std::vector<Vector> grid_weights;
};

inline void write_round_state(const std::string& path, const RoundState& st) {
  json j;
  j["instance"] = instance_to_json(st.instance);
  j["theta_t"] = vector_to_json(st.theta_t);
  j["y"] = vector_to_json(st.y);
  j["eta"] = st.eta;
  json weights = json::array();
  for (const auto& w : st.grid_weights) weights.push_back(vector_to_json(w));
  j["grid"] = weights;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline RoundState read_round_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad round-state JSON: ") + e.what());
  }
  RoundState st;
  st.instance = instance_from_json(j.at("instance"));
  st.theta_t = vector_from_json(j.at("theta_t"));
  st.y = vector_from_json(j.at("y"));
  st.eta = j.at("eta").get<double>();
  for (const auto& w : j.at("grid")) {
    st.grid_weights.push_back(vector_from_json(w));
  }
  return st;
}

}  // namespace imop
