#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "anyonforge/connection.hpp"
#include "anyonforge/graph.hpp"

namespace anyonforge {

using BigInt = boost::multiprecision::cpp_int;

inline nlohmann::json bigint_json(const BigInt &x) {
  if (x >= std::numeric_limits<std::int64_t>::min() &&
      x <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(x);
  return x.str();
}

/// Number of length-k paths from the distinguished vertex to each vertex.
inline std::vector<BigInt> path_counts(const Graph &g, int k) {
  if (k < 0)
    throw ParameterError("path length must be >= 0");
  std::vector<BigInt> x(g.size(), 0);
  x[g.star()] = 1;
  for (int s = 0; s < k; ++s) {
    std::vector<BigInt> y(g.size(), 0);
    for (int u = 0; u < g.size(); ++u)
      if (x[u] != 0)
        for (int v = 0; v < g.size(); ++v)
          if (g.multiplicity(u, v))
            y[v] += x[u] * g.multiplicity(u, v);
    x = std::move(y);
  }
  return x;
}

/// Nonzero (vertex, block size) pairs of the string algebra of length k.
inline std::vector<std::pair<int, BigInt>> string_algebra_dims(const Graph &g, int k) {
  std::vector<std::pair<int, BigInt>> out;
  const auto counts = path_counts(g, k);
  for (int v = 0; v < g.size(); ++v)
    if (counts[v] != 0)
      out.emplace_back(v, counts[v]);
  return out;
}

/// Dimension of the k-th higher relative commutant of a flat connection with
/// principal graph g: the sum of squared path counts.
inline BigInt higher_relative_commutant_dim(const Graph &g, int k) {
  BigInt s = 0;
  for (const auto &[v, n] : string_algebra_dims(g, k))
    s += n * n;
  return s;
}

/// As above, but for a connection: refuses unless c passes check_flatness on
/// rectangles up to rect x rect.
inline BigInt higher_relative_commutant_dim(const BiUnitaryConnection &c, int k,
                                            int rect = 4, double tol = 1e-9) {
  const auto report = check_flatness(c, rect, rect, tol);
  if (!report.flat)
    throw StructuralError("higher relative commutants need a flat connection "
                          "(flatness residual " + std::to_string(report.residual) + ")");
  return higher_relative_commutant_dim(c.vertical(), k);
}

// ---- Bratteli diagrams -------------------------------------------------

struct BratteliDiagram {
  std::vector<std::string> labels;
  /// levels[k] = nonzero (vertex, block dimension) pairs at level k.
  std::vector<std::vector<std::pair<int, BigInt>>> levels;
  /// inclusions[k](a, b) = edges from block b of level k to block a of level k+1.
  std::vector<Eigen::MatrixXi> inclusions;

  BigInt dimension(int k) const {
    BigInt s = 0;
    for (const auto &[v, n] : levels.at(k))
      s += n * n;
    return s;
  }

  /// True when every level is the inclusion matrix applied to the previous one
  /// and level 0 is a single block of size 1.
  bool consistent() const {
    if (levels.empty() || levels[0].size() != 1 || levels[0][0].second != 1)
      return false;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      const auto &m = inclusions[k];
      for (std::size_t a = 0; a < levels[k + 1].size(); ++a) {
        BigInt s = 0;
        for (std::size_t b = 0; b < levels[k].size(); ++b)
          s += levels[k][b].second * m(a, b);
        if (s != levels[k + 1][a].second)
          return false;
      }
    }
    return true;
  }
};

inline BratteliDiagram bratteli(const Graph &g, int kmax) {
  if (kmax < 0)
    throw ParameterError("kmax must be >= 0");
  BratteliDiagram d;
  d.labels = g.labels();
  for (int k = 0; k <= kmax; ++k)
    d.levels.push_back(string_algebra_dims(g, k));
  for (int k = 0; k < kmax; ++k) {
    const auto &lo = d.levels[k], &hi = d.levels[k + 1];
    Eigen::MatrixXi m(hi.size(), lo.size());
    for (std::size_t a = 0; a < hi.size(); ++a)
      for (std::size_t b = 0; b < lo.size(); ++b)
        m(a, b) = g.multiplicity(hi[a].first, lo[b].first);
    d.inclusions.push_back(std::move(m));
  }
  return d;
}

inline nlohmann::json to_json(const BratteliDiagram &d) {
  nlohmann::json j;
  auto levels = nlohmann::json::array();
  auto dims = nlohmann::json::array();
  for (std::size_t k = 0; k < d.levels.size(); ++k) {
    auto row = nlohmann::json::array();
    for (const auto &[v, n] : d.levels[k])
      row.push_back({{"vertex", d.labels[v]}, {"dim", bigint_json(n)}});
    levels.push_back(std::move(row));
    dims.push_back(bigint_json(d.dimension(static_cast<int>(k))));
  }
  auto inc = nlohmann::json::array();
  for (const auto &m : d.inclusions) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      auto r = nlohmann::json::array();
      for (Eigen::Index b = 0; b < m.cols(); ++b)
        r.push_back(m(a, b));
      rows.push_back(std::move(r));
    }
    inc.push_back(std::move(rows));
  }
  j["levels"] = std::move(levels);
  j["inclusions"] = std::move(inc);
  j["dimensions"] = std::move(dims);
  return j;
}

/// One line per level: level, vertices, block dimensions, algebra dimension.
inline std::string to_tsv(const BratteliDiagram &d) {
  std::ostringstream os;
  os << "level\tvertices\tblocks\tdim\n";
  for (std::size_t k = 0; k < d.levels.size(); ++k) {
    std::string vs, bs;
    for (const auto &[v, n] : d.levels[k]) {
      vs += (vs.empty() ? "" : " ") + d.labels[v];
      bs += (bs.empty() ? "" : " ") + n.str();
    }
    os << k << '\t' << vs << '\t' << bs << '\t' << d.dimension(static_cast<int>(k)).str()
       << '\n';
  }
  return os.str();
}

// ---- commuting squares -------------------------------------------------

/// A finite-dimensional *-algebra represented concretely on C^N by a spanning
/// set of N x N matrices.
struct ConcreteAlgebra {
  std::vector<MatrixXc> basis;
  Eigen::Index dim() const { return basis.empty() ? 0 : basis.front().rows(); }
};

namespace detail {

/// Orthonormal basis (columns) for span(alg) under <x, y> = Tr(rho x^* y),
/// with matrices flattened as sqrt(rho_p) x_{qp}.
inline MatrixXc trace_frame(const ConcreteAlgebra &alg, const VectorXd &rho) {
  const Eigen::Index n = rho.size();
  MatrixXc m(n * n, alg.basis.size());
  for (std::size_t i = 0; i < alg.basis.size(); ++i)
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        m(p * n + q, i) = std::sqrt(rho(p)) * alg.basis[i](q, p);
  Eigen::JacobiSVD<MatrixXc> svd(m, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  const auto &s = svd.singularValues();
  while (rank < s.size() && s(rank) > 1e-10 * std::max(1.0, s(0)))
    ++rank;
  return svd.matrixU().leftCols(rank);
}

inline MatrixXc flatten(const MatrixXc &x, const VectorXd &rho) {
  const Eigen::Index n = rho.size();
  MatrixXc v(n * n, 1);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      v(p * n + q, 0) = std::sqrt(rho(p)) * x(q, p);
  return v;
}

inline MatrixXc unflatten(const MatrixXc &v, const VectorXd &rho) {
  const Eigen::Index n = rho.size();
  MatrixXc x(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      x(q, p) = v(p * n + q, 0) / std::sqrt(rho(p));
  return x;
}

/// Largest distance of a basis element of `small` from span(big).
inline double containment_residual(const ConcreteAlgebra &small, const MatrixXc &big_frame,
                                   const VectorXd &rho) {
  double r = 0.0;
  for (const auto &x : small.basis) {
    const MatrixXc v = flatten(x, rho);
    r = std::max(r, linalg::max_abs(v - big_frame * (big_frame.adjoint() * v)));
  }
  return r;
}

} // namespace detail

/// Commuting-square test for
///
///     A ⊂ B
///     ∩   ∩
///     C ⊂ D
///
/// with trace tr(x) = Tr(diag(rho) x). E_A and E_B are the orthogonal
/// projections for the trace inner product; the residual is the largest
/// entry of E_B(x) - E_A(x) over the basis of C.
inline double commuting_square_check(const ConcreteAlgebra &a, const ConcreteAlgebra &b,
                                     const ConcreteAlgebra &c, const ConcreteAlgebra &d,
                                     const VectorXd &rho) {
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (!(rho(i) > 0))
      throw ParameterError("commuting square trace weights must be positive");
  for (const auto *alg : {&a, &b, &c, &d})
    if (alg->basis.empty() || alg->dim() != rho.size())
      throw ParameterError("algebra basis does not act on the trace space");
  const MatrixXc fa = detail::trace_frame(a, rho), fb = detail::trace_frame(b, rho);
  const MatrixXc fc = detail::trace_frame(c, rho), fd = detail::trace_frame(d, rho);
  const double inc = std::max({detail::containment_residual(a, fb, rho),
                               detail::containment_residual(a, fc, rho),
                               detail::containment_residual(b, fd, rho),
                               detail::containment_residual(c, fd, rho)});
  if (inc > 1e-8)
    throw StructuralError("commuting square inclusions are inconsistent");
  double res = 0.0;
  for (const auto &x : c.basis) {
    const MatrixXc v = detail::flatten(x, rho);
    const MatrixXc eb = detail::unflatten(fb * (fb.adjoint() * v), rho);
    const MatrixXc ea = detail::unflatten(fa * (fa.adjoint() * v), rho);
    res = std::max(res, linalg::max_abs(eb - ea));
  }
  return res;
}

/// The four string algebras A_{k,l} ⊂ A_{k,l+1}, A_{k+1,l} ⊂ A_{k+1,l+1} of a
/// connection, all represented on strings of k+1 horizontal then l+1 vertical
/// steps from the distinguished vertex, with the trace mu(end)/beta^(k+l+2).
struct StringSquare {
  ConcreteAlgebra a, b, c, d; ///< A_{k,l}, A_{k,l+1}, A_{k+1,l}, A_{k+1,l+1}
  VectorXd rho;
  std::vector<StepPath> paths;
};

namespace detail {

/// Matrix units of End(paths) grouped by endpoint, extended by identity on
/// the remaining steps, expressed on `full` (whose first prefix_len steps are
/// the prefix). Paths in `prefix` with equal endpoints give a block.
inline ConcreteAlgebra extended_units(const std::vector<StepPath> &full, std::size_t prefix_len,
                                      const std::vector<int> &prefix_end) {
  std::map<StepPath, int> prefix_id;
  std::vector<int> pid(full.size());
  std::vector<StepPath> suffix(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    StepPath pre(full[i].begin(), full[i].begin() + prefix_len);
    pid[i] = prefix_id.emplace(pre, static_cast<int>(prefix_id.size())).first->second;
    suffix[i] = StepPath(full[i].begin() + prefix_len, full[i].end());
  }
  std::vector<int> end_of(prefix_id.size());
  for (std::size_t i = 0; i < full.size(); ++i)
    end_of[pid[i]] = prefix_end[i];
  const int n = static_cast<int>(full.size());
  ConcreteAlgebra alg;
  for (int p = 0; p < int(prefix_id.size()); ++p)
    for (int q = 0; q < int(prefix_id.size()); ++q) {
      if (end_of[p] != end_of[q])
        continue;
      MatrixXc e = MatrixXc::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (pid[i] == p && pid[j] == q && suffix[i] == suffix[j])
            e(i, j) = 1.0;
      alg.basis.push_back(std::move(e));
    }
  return alg;
}

} // namespace detail

inline StringSquare string_square(const BiUnitaryConnection &conn, int k, int l) {
  if (k < 0 || l < 0)
    throw ParameterError("string_square needs k, l >= 0");
  const Graph &g = conn.vertical();
  const int star = g.star();
  const PFData pf = pf_data(g);

  // Target space: H^{k+1} V^{l+1}.
  std::vector<bool> pat_hv(k + 1, true);
  pat_hv.resize(k + l + 2, false);
  const auto full = mixed_paths(conn, pat_hv, star);
  const int n = static_cast<int>(full.size());
  std::map<StepPath, int> index;
  for (int i = 0; i < n; ++i)
    index[full[i]] = i;

  StringSquare sq;
  sq.paths = full;
  sq.rho.resize(n);
  const double scale = std::pow(pf.beta, k + l + 2);
  std::vector<int> ends(n);
  for (int i = 0; i < n; ++i) {
    ends[i] = step_end(conn, pat_hv, full[i], star);
    sq.rho(i) = pf.mu[ends[i]] / scale;
  }

  auto prefix_ends = [&](const std::vector<StepPath> &ps, const std::vector<bool> &pat,
                         std::size_t len) {
    std::vector<int> out;
    std::vector<bool> p(pat.begin(), pat.begin() + len);
    for (const auto &x : ps)
      out.push_back(step_end(conn, p, StepPath(x.begin(), x.begin() + len), star));
    return out;
  };

  // A_{k+1,l+1}: full blocks. A_{k+1,l}: drop the last vertical step.
  sq.d = detail::extended_units(full, full.empty() ? 0 : k + l + 2,
                                prefix_ends(full, pat_hv, k + l + 2));
  sq.c = detail::extended_units(full, k + l + 1, prefix_ends(full, pat_hv, k + l + 1));

  // The remaining two live naturally on H^k V^{l+1} H; move the last
  // horizontal step (index k of pat_hv) to the end through l+1 cells.
  std::vector<bool> pat_vh(k, true);
  pat_vh.resize(k + l + 1, false);
  pat_vh.push_back(true);
  const auto other = mixed_paths(conn, pat_vh, star);
  std::map<StepPath, int> other_index;
  for (int i = 0; i < int(other.size()); ++i)
    other_index[other[i]] = i;
  if (int(other.size()) != n)
    throw StructuralError("string_square: path spaces differ in size");
  MatrixXc u = MatrixXc::Zero(n, n); // rows: other basis, cols: full basis
  for (int i = 0; i < n; ++i) {
    std::map<StepPath, cplx> amp{{full[i], cplx(1.0)}};
    for (int pos = k; pos < k + l + 1; ++pos)
      amp = swap_hv(conn, amp, pos);
    for (const auto &[p, a] : amp)
      u(other_index.at(p), i) = a;
  }
  const ConcreteAlgebra b_other =
      detail::extended_units(other, k + l + 1, prefix_ends(other, pat_vh, k + l + 1));
  const ConcreteAlgebra a_other =
      detail::extended_units(other, k + l, prefix_ends(other, pat_vh, k + l));
  for (const auto &x : b_other.basis)
    sq.b.basis.push_back(u.adjoint() * x * u);
  for (const auto &x : a_other.basis)
    sq.a.basis.push_back(u.adjoint() * x * u);
  return sq;
}

} // namespace anyonforge
