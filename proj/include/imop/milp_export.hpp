/**
 * @file milp_export.hpp
 * @brief Single-level big-M reformulation of the implicit update, written
 *        to a line-oriented neutral model format, plus a reader for it.
 *
 * Model grammar (sections VARS / OBJ / CONS, terminated by END; numeric
 * literals carry 12 significant digits):
 *   var <name> dim <d> (cont|bin) [lower <num>]
 *   qterm <var> <var> <coef> | lterm <var> <coef> | const <num>
 *   eq <name> : <expr> = <num>
 *   le <name> : <expr> <= <num>
 *   range <name> : <num> <= <expr> <= <expr>
 *   box <name> : <nums> <= <var> <= <nums>
 * An <expr> is `[<const> + ] <coef> <var> + <coef> <var> + ...`; chunks are
 * joined with " + " and coefficients may be negative.
 *
 * Constraint count: one z-selector sum row and one theta box row, plus per
 * weight 2(q+n) complementarity rows, n stationarity rows, and 4n selection
 * rows — total 2 + K(2q + 2n + n + 4n).
 */

#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "imop/io.hpp"
#include "imop/scalarize.hpp"
#include "imop/update.hpp"

namespace imop {

// ---------------------------------------------------------------------------
// Document model.

struct LinExpr {
  double constant = 0.0;
  std::vector<std::pair<std::string, double>> terms;
};

struct VarDecl {
  std::string name;
  int dim = 1;
  bool binary = false;
  std::optional<double> lower;
};

struct QuadTerm {
  std::string a;
  std::string b;
  double coef = 0.0;
};

struct ConsRow {
  std::string kind;  // eq | le | range | box
  std::string name;
  LinExpr expr;      // eq/le: lhs; range: middle
  LinExpr upper;     // range only
  double rhs = 0.0;  // eq/le: rhs; range: lower constant
  std::string box_var;  // box only
  Vector box_lo;
  Vector box_up;
};

struct ModelDoc {
  std::vector<std::string> header;  // verbatim '#' lines
  std::vector<VarDecl> vars;
  std::vector<QuadTerm> qterms;
  std::vector<std::pair<std::string, double>> lterms;
  double obj_constant = 0.0;
  std::vector<ConsRow> cons;
};

// ---------------------------------------------------------------------------
// Serialization.

namespace detail {

inline std::string model_num(double v) { return format_double_sig(v, 12); }

inline std::string expr_to_string(const LinExpr& e) {
  std::string out;
  bool first = true;
  if (e.constant != 0.0 || e.terms.empty()) {
    out += model_num(e.constant);
    first = false;
  }
  for (const auto& [var, coef] : e.terms) {
    if (!first) out += " + ";
    out += model_num(coef) + " " + var;
    first = false;
  }
  return out;
}

inline std::string nums_to_string(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += model_num(v[i]);
  }
  return out;
}

inline LinExpr parse_expr(const std::string& text, int lineno) {
  LinExpr e;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(" + ", pos);
    const std::string chunk =
        trim(next == std::string::npos ? text.substr(pos)
                                       : text.substr(pos, next - pos));
    pos = next == std::string::npos ? text.size() : next + 3;
    if (chunk.empty()) continue;
    const auto space = chunk.find(' ');
    if (space == std::string::npos) {
      e.constant += parse_double(chunk, lineno);
    } else {
      const double coef = parse_double(chunk.substr(0, space), lineno);
      e.terms.emplace_back(trim(chunk.substr(space + 1)), coef);
    }
  }
  return e;
}

}  // namespace detail

inline std::string write_model(const ModelDoc& doc) {
  std::ostringstream out;
  for (const auto& line : doc.header) out << line << "\n";
  out << "VARS\n";
  for (const auto& v : doc.vars) {
    out << "var " << v.name << " dim " << v.dim << ' '
        << (v.binary ? "bin" : "cont");
    if (v.lower.has_value()) out << " lower " << detail::model_num(*v.lower);
    out << "\n";
  }
  out << "OBJ\n";
  for (const auto& qt : doc.qterms) {
    out << "qterm " << qt.a << ' ' << qt.b << ' ' << detail::model_num(qt.coef)
        << "\n";
  }
  for (const auto& [var, coef] : doc.lterms) {
    out << "lterm " << var << ' ' << detail::model_num(coef) << "\n";
  }
  out << "const " << detail::model_num(doc.obj_constant) << "\n";
  out << "CONS\n";
  for (const auto& row : doc.cons) {
    out << row.kind << ' ' << row.name << " : ";
    if (row.kind == "eq") {
      out << detail::expr_to_string(row.expr) << " = "
          << detail::model_num(row.rhs);
    } else if (row.kind == "le") {
      out << detail::expr_to_string(row.expr)
          << " <= " << detail::model_num(row.rhs);
    } else if (row.kind == "range") {
      out << detail::model_num(row.rhs) << " <= "
          << detail::expr_to_string(row.expr)
          << " <= " << detail::expr_to_string(row.upper);
    } else if (row.kind == "box") {
      out << detail::nums_to_string(row.box_lo) << " <= " << row.box_var
          << " <= " << detail::nums_to_string(row.box_up);
    }
    out << "\n";
  }
  out << "END\n";
  return out.str();
}

inline ModelDoc parse_model(const std::string& text) {
  ModelDoc doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  enum class Section { None, Vars, Obj, Cons, Done } section = Section::None;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      doc.header.push_back(t);
      continue;
    }
    if (t == "VARS") { section = Section::Vars; continue; }
    if (t == "OBJ") { section = Section::Obj; continue; }
    if (t == "CONS") { section = Section::Cons; continue; }
    if (t == "END") { section = Section::Done; continue; }

    std::istringstream row(t);
    std::string tok;
    row >> tok;
    if (section == Section::Vars && tok == "var") {
      VarDecl v;
      std::string dim_kw, kind;
      row >> v.name >> dim_kw >> v.dim >> kind;
      if (dim_kw != "dim" || (kind != "cont" && kind != "bin")) {
        throw ParseError("bad var declaration", lineno);
      }
      v.binary = kind == "bin";
      std::string lower_kw;
      if (row >> lower_kw) {
        if (lower_kw != "lower") throw ParseError("bad var suffix", lineno);
        std::string num;
        row >> num;
        v.lower = parse_double(num, lineno);
      }
      doc.vars.push_back(std::move(v));
    } else if (section == Section::Obj) {
      if (tok == "qterm") {
        QuadTerm qt;
        std::string num;
        row >> qt.a >> qt.b >> num;
        qt.coef = parse_double(num, lineno);
        doc.qterms.push_back(std::move(qt));
      } else if (tok == "lterm") {
        std::string var, num;
        row >> var >> num;
        doc.lterms.emplace_back(var, parse_double(num, lineno));
      } else if (tok == "const") {
        std::string num;
        row >> num;
        doc.obj_constant = parse_double(num, lineno);
      } else {
        throw ParseError("unknown objective term '" + tok + "'", lineno);
      }
    } else if (section == Section::Cons) {
      ConsRow cr;
      cr.kind = tok;
      row >> cr.name;
      std::string colon;
      row >> colon;
      if (colon != ":") throw ParseError("expected ':'", lineno);
      std::string rest;
      std::getline(row, rest);
      rest = trim(rest);
      if (cr.kind == "eq" || cr.kind == "le") {
        const std::string sep = cr.kind == "eq" ? " = " : " <= ";
        const auto at = rest.rfind(sep);
        if (at == std::string::npos) throw ParseError("missing relation", lineno);
        cr.expr = detail::parse_expr(rest.substr(0, at), lineno);
        cr.rhs = parse_double(trim(rest.substr(at + sep.size())), lineno);
      } else if (cr.kind == "range") {
        const auto first = rest.find(" <= ");
        const auto second = rest.rfind(" <= ");
        if (first == std::string::npos || second == first) {
          throw ParseError("range needs two relations", lineno);
        }
        cr.rhs = parse_double(trim(rest.substr(0, first)), lineno);
        cr.expr = detail::parse_expr(
            rest.substr(first + 4, second - first - 4), lineno);
        cr.upper = detail::parse_expr(rest.substr(second + 4), lineno);
      } else if (cr.kind == "box") {
        const auto first = rest.find(" <= ");
        const auto second = rest.rfind(" <= ");
        if (first == std::string::npos || second == first) {
          throw ParseError("box needs two relations", lineno);
        }
        const auto parse_nums = [&](const std::string& s) {
          std::istringstream ns(s);
          std::vector<double> vals;
          std::string v;
          while (ns >> v) vals.push_back(parse_double(v, lineno));
          Vector vec(static_cast<Index>(vals.size()));
          for (Index i = 0; i < vec.size(); ++i) {
            vec[i] = vals[static_cast<std::size_t>(i)];
          }
          return vec;
        };
        cr.box_lo = parse_nums(rest.substr(0, first));
        cr.box_var = trim(rest.substr(first + 4, second - first - 4));
        cr.box_up = parse_nums(rest.substr(second + 4));
      } else {
        throw ParseError("unknown constraint kind '" + cr.kind + "'", lineno);
      }
      doc.cons.push_back(std::move(cr));
    } else {
      throw ParseError("content outside any section", lineno);
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Big-M derivation and export.

/// Default big-M: 10 times the larger of the feasible-set bound (maximized
/// over hypothesis-box corners when the box moves the region) and the
/// scalarized gradient bound over box corners and feasible-range corners.
inline double derive_big_m(const MopInstance& inst,
                           const std::vector<Vector>& grid_weights) {
  const ParamSpec& spec = *inst.param;
  const Index d = spec.dim();
  if (d > 16) throw InvalidParameter("big-M derivation limited to dim <= 16");
  double bound_b = inst.bound_B;
  std::vector<Vector> corners;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    Vector corner(d);
    for (Index i = 0; i < d; ++i) {
      corner[i] = (mask >> i) & 1 ? spec.upper[i] : spec.lower[i];
    }
    corners.push_back(corner);
    if (spec.block == ParamBlock::Rhs) {
      bound_b = std::max(bound_b, substitute(inst, corner).bound_B);
    }
  }
  double grad_bound = 0.0;
  const int n = inst.n;
  for (const auto& w : grid_weights) {
    const Matrix Qw = scalarized_hessian(inst, w);
    for (const auto& corner : corners) {
      MopInstance at = spec.block == ParamBlock::Rhs
                           ? inst
                           : substitute(inst, corner);
      const Vector cw = scalarized_linear(at, w);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        Vector x(n);
        for (int i = 0; i < n; ++i) {
          x[i] = (mask >> i) & 1 ? inst.coord_hi[i] : inst.coord_lo[i];
        }
        grad_bound =
            std::max(grad_bound, (Qw * x + cw).cwiseAbs().maxCoeff());
      }
      if (spec.block == ParamBlock::Rhs) break;  // c does not depend on θ
    }
  }
  return 10.0 * std::max(bound_b, grad_bound);
}

/// Builds the single-level reformulation of the implicit update at state
/// (θ_t, y, η) for the given weights: lower-level KKT systems with big-M
/// complementarity, plus binary selection of the nearest efficient point.
inline ModelDoc build_single_level(const MopInstance& inst,
                                   const Vector& theta_t, const Vector& y,
                                   double eta,
                                   const std::vector<Vector>& grid_weights,
                                   std::optional<double> big_m = std::nullopt) {
  if (!inst.param.has_value()) {
    throw UnsupportedBlock("instance has no learnable block");
  }
  if (big_m.has_value() && !(*big_m > 0.0)) {
    throw InvalidParameter("big-M must be positive");
  }
  const ParamSpec& spec = *inst.param;
  const Index d = spec.dim();
  const int n = inst.n;
  const int q = inst.q;
  const int m = n + q;
  const int K = static_cast<int>(grid_weights.size());
  const double M = big_m.value_or(derive_big_m(inst, grid_weights));
  const Matrix G = inst.ineq_matrix();

  ModelDoc doc;
  doc.header.push_back("# imop-model v1");
  doc.header.push_back(
      std::string("# block ") +
      (spec.block == ParamBlock::Rhs ? "rhs" : "objective_linear"));
  doc.header.push_back("# eta " + detail::model_num(eta));
  doc.header.push_back("# bigM " + detail::model_num(M) +
                       (big_m.has_value() ? " source=flag" : " source=derived"));

  const auto idx = [](const std::string& base, int i) {
    return base + "[" + std::to_string(i) + "]";
  };
  const auto idx2 = [&](const std::string& base, int k, int i) {
    return idx(idx(base, k), i);
  };

  doc.vars.push_back({"theta", static_cast<int>(d), false, std::nullopt});
  for (int k = 0; k < K; ++k) {
    doc.vars.push_back({idx("x", k), n, false, std::nullopt});
    doc.vars.push_back({idx("u", k), m, false, 0.0});
    doc.vars.push_back({idx("t", k), m, true, std::nullopt});
    doc.vars.push_back({idx("phi", k), n, false, std::nullopt});
  }
  doc.vars.push_back({"z", K, true, std::nullopt});

  // Objective ½‖θ-θ_t‖² + η Σ_k ‖y - φ_k‖².
  double constant = 0.0;
  for (Index i = 0; i < d; ++i) {
    doc.qterms.push_back({idx("theta", static_cast<int>(i)),
                          idx("theta", static_cast<int>(i)), 0.5});
    doc.lterms.emplace_back(idx("theta", static_cast<int>(i)), -theta_t[i]);
    constant += 0.5 * theta_t[i] * theta_t[i];
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < n; ++j) {
      doc.qterms.push_back({idx2("phi", k, j), idx2("phi", k, j), eta});
      doc.lterms.emplace_back(idx2("phi", k, j), -2.0 * eta * y[j]);
      constant += eta * y[j] * y[j];
    }
  }
  doc.obj_constant = constant;

  // Globals: selector sum and the hypothesis box.
  {
    ConsRow sum;
    sum.kind = "eq";
    sum.name = "zsum";
    for (int k = 0; k < K; ++k) sum.expr.terms.emplace_back(idx("z", k), 1.0);
    sum.rhs = 1.0;
    doc.cons.push_back(std::move(sum));
    ConsRow box;
    box.kind = "box";
    box.name = "thetabox";
    box.box_var = "theta";
    box.box_lo = spec.lower;
    box.box_up = spec.upper;
    doc.cons.push_back(std::move(box));
  }

  for (int k = 0; k < K; ++k) {
    const auto low = detail::build_parametric_lower(inst, grid_weights[k]);
    const Matrix& Qw = low.P;

    // Stationarity: Q(w)x + Gᵀu + r(θ) = 0.
    for (int i = 0; i < n; ++i) {
      ConsRow row;
      row.kind = "eq";
      row.name = idx2("stat", k, i);
      for (int j = 0; j < n; ++j) {
        if (Qw(i, j) != 0.0) row.expr.terms.emplace_back(idx2("x", k, j), Qw(i, j));
      }
      for (int rIdx = 0; rIdx < m; ++rIdx) {
        if (G(rIdx, i) != 0.0) {
          row.expr.terms.emplace_back(idx2("u", k, rIdx), G(rIdx, i));
        }
      }
      for (Index j = 0; j < d; ++j) {
        if (low.r.lin(i, j) != 0.0) {
          row.expr.terms.emplace_back(idx("theta", static_cast<int>(j)),
                                      low.r.lin(i, j));
        }
      }
      row.rhs = -low.r.c0[i];
      doc.cons.push_back(std::move(row));
    }

    // Complementarity via big-M: u <= M t and 0 <= slack <= M(1 - t).
    for (int rIdx = 0; rIdx < m; ++rIdx) {
      ConsRow umax;
      umax.kind = "le";
      umax.name = idx2("umax", k, rIdx);
      umax.expr.terms.emplace_back(idx2("u", k, rIdx), 1.0);
      umax.expr.terms.emplace_back(idx2("t", k, rIdx), -M);
      umax.rhs = 0.0;
      doc.cons.push_back(std::move(umax));

      ConsRow slack;
      slack.kind = "range";
      slack.name = idx2("slack", k, rIdx);
      slack.rhs = 0.0;
      slack.expr.constant = low.h.c0[rIdx];
      for (Index j = 0; j < d; ++j) {
        if (low.h.lin(rIdx, j) != 0.0) {
          slack.expr.terms.emplace_back(idx("theta", static_cast<int>(j)),
                                        low.h.lin(rIdx, j));
        }
      }
      for (int j = 0; j < n; ++j) {
        if (G(rIdx, j) != 0.0) {
          slack.expr.terms.emplace_back(idx2("x", k, j), -G(rIdx, j));
        }
      }
      slack.upper.constant = M;
      slack.upper.terms.emplace_back(idx2("t", k, rIdx), -M);
      doc.cons.push_back(std::move(slack));
    }

    // Selection: 0 <= phi <= Mz and x - M(1-z) <= phi <= x.
    for (int j = 0; j < n; ++j) {
      ConsRow pos;
      pos.kind = "le";
      pos.name = idx2("selpos", k, j);
      pos.expr.terms.emplace_back(idx2("phi", k, j), -1.0);
      pos.rhs = 0.0;
      doc.cons.push_back(std::move(pos));

      ConsRow byz;
      byz.kind = "le";
      byz.name = idx2("selz", k, j);
      byz.expr.terms.emplace_back(idx2("phi", k, j), 1.0);
      byz.expr.terms.emplace_back(idx("z", k), -M);
      byz.rhs = 0.0;
      doc.cons.push_back(std::move(byz));

      ConsRow byx;
      byx.kind = "le";
      byx.name = idx2("selx", k, j);
      byx.expr.terms.emplace_back(idx2("phi", k, j), 1.0);
      byx.expr.terms.emplace_back(idx2("x", k, j), -1.0);
      byx.rhs = 0.0;
      doc.cons.push_back(std::move(byx));

      ConsRow big;
      big.kind = "le";
      big.name = idx2("selbig", k, j);
      big.expr.terms.emplace_back(idx2("x", k, j), 1.0);
      big.expr.terms.emplace_back(idx2("phi", k, j), -1.0);
      big.expr.terms.emplace_back(idx("z", k), M);
      big.rhs = M;
      doc.cons.push_back(std::move(big));
    }
  }
  return doc;
}

inline std::string export_single_level(const MopInstance& inst,
                                       const Vector& theta_t, const Vector& y,
                                       double eta,
                                       const std::vector<Vector>& grid_weights,
                                       std::optional<double> big_m = std::nullopt) {
  return write_model(build_single_level(inst, theta_t, y, eta, grid_weights, big_m));
}

}  // namespace imop
