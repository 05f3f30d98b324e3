#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anyonforge/fusion.hpp"
#include "anyonforge/number_field.hpp"

namespace anyonforge {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

struct InvariantCheck {
  bool nonnegative = false;
  bool unit = false;    ///< Z_00 == 1
  bool commutes_t = false;
  bool commutes_s = false;
  bool exact = false;   ///< S commutation decided in exact arithmetic
  double s_residual = 0.0;
  bool ok() const { return nonnegative && unit && commutes_t && commutes_s; }
};

/// The axioms: nonnegative integer entries, Z_00 = 1, ZT = TZ, ZS = SZ.
/// S commutation is exact when md carries an exact S, else residual < tol.
inline InvariantCheck check_invariant(const ModularData &md, const IntMatrix &z, double tol = 1e-10) {
  const int r = md.rank();
  if (z.rows() != r || z.cols() != r)
    throw ParameterError("invariant size does not match the modular data");
  InvariantCheck c;
  c.nonnegative = (z.array() >= 0).all();
  c.unit = z(0, 0) == 1;
  c.commutes_t = true;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (z(i, j) != 0 && md.t[i] != md.t[j])
        c.commutes_t = false;
  const MatrixXc zc = z.cast<double>().cast<cplx>();
  c.s_residual = linalg::max_abs(zc * md.S - md.S * zc);
  if (md.exact) {
    c.exact = true;
    const auto &f = md.exact->field;
    const auto &s = md.exact->s;
    c.commutes_s = true;
    for (int i = 0; i < r && c.commutes_s; ++i)
      for (int j = 0; j < r && c.commutes_s; ++j) {
        auto acc = f.zero();
        for (int k = 0; k < r; ++k) {
          if (z(i, k))
            acc = f.add(acc, f.scale(s(k, j), Rational(z(i, k))));
          if (z(k, j))
            acc = f.sub(acc, f.scale(s(i, k), Rational(z(k, j))));
        }
        c.commutes_s = f.is_zero(acc);
      }
  } else {
    c.commutes_s = c.s_residual < tol;
  }
  return c;
}

/// Default entry bound: ceil(max d_a d_b).
inline int default_cap(const ModularData &md) {
  const auto d = md.quantum_dims();
  double m = 0.0;
  for (double x : d)
    for (double y : d)
      m = std::max(m, std::abs(x * y));
  return std::max(1, static_cast<int>(std::ceil(m - 1e-9)));
}

struct EnumerationResult {
  std::vector<IntMatrix> invariants;
  int cap = 0;
  int free_variables = 0;
  bool exact = false;
};

namespace detail {

/// Pivot row: x_pivot = rhs - sum_f coef[f] x_free[f], over double or Rational.
template <class Scalar> struct PivotRow {
  int var;
  Scalar rhs;
  std::vector<Scalar> coef;
};

template <class Scalar>
void search_free(const std::vector<PivotRow<Scalar>> &rows, int nfree, int cap, int depth,
                 std::vector<int> &vals, const std::function<bool(const Scalar &)> &is_int,
                 const std::function<double(const Scalar &)> &to_d,
                 const std::function<void(const std::vector<int> &)> &emit) {
  // Interval bound on every pivot with the remaining free values in [0, cap].
  for (const auto &r : rows) {
    double lo = to_d(r.rhs), hi = lo;
    for (int f = 0; f < nfree; ++f) {
      const double c = to_d(r.coef[f]);
      if (f < depth) {
        lo -= c * vals[f];
        hi -= c * vals[f];
      } else if (c > 0) {
        lo -= c * cap;
      } else {
        hi -= c * cap;
      }
    }
    if (hi < -1e-9 || lo > cap + 1e-9)
      return;
  }
  if (depth == nfree) {
    for (const auto &r : rows) {
      Scalar v = r.rhs;
      for (int f = 0; f < nfree; ++f)
        v -= r.coef[f] * vals[f];
      if (!is_int(v))
        return;
    }
    emit(vals);
    return;
  }
  for (int x = 0; x <= cap; ++x) {
    vals[depth] = x;
    search_free(rows, nfree, cap, depth + 1, vals, is_int, to_d, emit);
  }
}

} // namespace detail

/// Every Z with entries in [0, cap] satisfying the axioms. Entries between
/// labels with different T vanish; the remaining unknowns solve the linear
/// system ZS = SZ (exactly over the field of S when available), and the free
/// variables of its echelon form are searched with interval pruning.
inline EnumerationResult enumerate_modular_invariants(const ModularData &md, int cap = 0) {
  const int r = md.rank();
  EnumerationResult out;
  out.cap = cap > 0 ? cap : default_cap(md);
  out.exact = md.exact.has_value();

  std::vector<std::pair<int, int>> vars;
  std::map<std::pair<int, int>, int> var_of;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (md.t[i] == md.t[j] && !(i == 0 && j == 0)) {
        var_of[{i, j}] = static_cast<int>(vars.size());
        vars.emplace_back(i, j);
      }
  const int nv = static_cast<int>(vars.size());
  // Unknown value of entry (i, k): Z_00 = 1 contributes to the right-hand side.
  auto contribute = [&](int i, int k, auto &&on_var, auto &&on_const) {
    if (i == 0 && k == 0)
      on_const();
    else if (auto it = var_of.find({i, k}); it != var_of.end())
      on_var(it->second);
  };

  std::vector<IntMatrix> found;
  auto build = [&](const std::vector<int> &pivot_vars, const std::vector<int> &free_vars,
                   auto pivot_value) {
    return [&, pivot_vars, free_vars, pivot_value](const std::vector<int> &vals) {
      IntMatrix z = IntMatrix::Zero(r, r);
      z(0, 0) = 1;
      for (std::size_t f = 0; f < free_vars.size(); ++f)
        z(vars[free_vars[f]].first, vars[free_vars[f]].second) = vals[f];
      for (std::size_t p = 0; p < pivot_vars.size(); ++p)
        z(vars[pivot_vars[p]].first, vars[pivot_vars[p]].second) = pivot_value(p, vals);
      found.push_back(std::move(z));
    };
  };

  if (md.exact) {
    const auto &f = md.exact->field;
    const auto &s = md.exact->s;
    const int deg = f.degree();
    // Row layout: nv coefficients then the right-hand side.
    std::vector<std::vector<Rational>> m;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        std::vector<NumberField::Elem> coef(nv, f.zero());
        NumberField::Elem rhs = f.zero();
        for (int k = 0; k < r; ++k) {
          // (ZS)_ij term: Z_ik S_kj ; (SZ)_ij term: S_ik Z_kj.
          contribute(i, k, [&](int v) { coef[v] = f.add(coef[v], s(k, j)); },
                     [&] { rhs = f.sub(rhs, s(k, j)); });
          contribute(k, j, [&](int v) { coef[v] = f.sub(coef[v], s(i, k)); },
                     [&] { rhs = f.add(rhs, s(i, k)); });
        }
        for (int t = 0; t < deg; ++t) {
          std::vector<Rational> row(nv + 1);
          bool any = rhs[t] != 0;
          for (int v = 0; v < nv; ++v) {
            row[v] = coef[v][t];
            any = any || row[v] != 0;
          }
          row[nv] = rhs[t];
          if (any)
            m.push_back(std::move(row));
        }
      }
    const auto pivots = rref(m, nv + 1);
    for (std::size_t p = 0; p < pivots.size(); ++p)
      if (pivots[p] == nv)
        return out; // inconsistent: no invariant at all
    std::vector<bool> is_pivot(nv, false);
    for (int p : pivots)
      is_pivot[p] = true;
    std::vector<int> free_vars;
    for (int v = 0; v < nv; ++v)
      if (!is_pivot[v])
        free_vars.push_back(v);
    std::vector<detail::PivotRow<Rational>> rows;
    for (std::size_t p = 0; p < pivots.size(); ++p) {
      detail::PivotRow<Rational> pr{pivots[p], m[p][nv], {}};
      for (int fv : free_vars)
        pr.coef.push_back(m[p][fv]);
      rows.push_back(std::move(pr));
    }
    out.free_variables = static_cast<int>(free_vars.size());
    auto pivot_value = [&rows](std::size_t p, const std::vector<int> &vals) {
      Rational v = rows[p].rhs;
      for (std::size_t f = 0; f < vals.size(); ++f)
        v -= rows[p].coef[f] * vals[f];
      return static_cast<long long>(numerator(v));
    };
    std::vector<int> pivot_vars;
    for (const auto &pr : rows)
      pivot_vars.push_back(pr.var);
    std::vector<int> vals(free_vars.size(), 0);
    detail::search_free<Rational>(
        rows, out.free_variables, out.cap, 0, vals,
        [](const Rational &x) { return denominator(x) == 1; },
        [](const Rational &x) { return static_cast<double>(x); },
        build(pivot_vars, free_vars, pivot_value));
  } else {
    // Floating S: real and imaginary parts of ZS - SZ, echelon form by
    // partial pivoting with a 1e-9 threshold.
    std::vector<std::vector<double>> m;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        std::vector<cplx> coef(nv, 0.0);
        cplx rhs = 0;
        for (int k = 0; k < r; ++k) {
          contribute(i, k, [&](int v) { coef[v] += md.S(k, j); }, [&] { rhs -= md.S(k, j); });
          contribute(k, j, [&](int v) { coef[v] -= md.S(i, k); }, [&] { rhs += md.S(i, k); });
        }
        std::vector<double> re(nv + 1), im(nv + 1);
        for (int v = 0; v < nv; ++v) {
          re[v] = coef[v].real();
          im[v] = coef[v].imag();
        }
        re[nv] = rhs.real();
        im[nv] = rhs.imag();
        m.push_back(std::move(re));
        m.push_back(std::move(im));
      }
    std::vector<int> pivots;
    int row = 0;
    for (int c = 0; c < nv && row < int(m.size()); ++c) {
      int sel = row;
      for (int q = row; q < int(m.size()); ++q)
        if (std::abs(m[q][c]) > std::abs(m[sel][c]))
          sel = q;
      if (std::abs(m[sel][c]) < 1e-9)
        continue;
      std::swap(m[row], m[sel]);
      const double inv = 1.0 / m[row][c];
      for (auto &x : m[row])
        x *= inv;
      for (int q = 0; q < int(m.size()); ++q)
        if (q != row && m[q][c] != 0.0) {
          const double fct = m[q][c];
          for (int k = 0; k <= nv; ++k)
            m[q][k] -= fct * m[row][k];
        }
      pivots.push_back(c);
      ++row;
    }
    for (int q = row; q < int(m.size()); ++q)
      if (std::abs(m[q][nv]) > 1e-9)
        return out;
    std::vector<bool> is_pivot(nv, false);
    for (int p : pivots)
      is_pivot[p] = true;
    std::vector<int> free_vars;
    for (int v = 0; v < nv; ++v)
      if (!is_pivot[v])
        free_vars.push_back(v);
    std::vector<detail::PivotRow<double>> rows;
    for (std::size_t p = 0; p < pivots.size(); ++p) {
      detail::PivotRow<double> pr{pivots[p], m[p][nv], {}};
      for (int fv : free_vars)
        pr.coef.push_back(m[p][fv]);
      rows.push_back(std::move(pr));
    }
    out.free_variables = static_cast<int>(free_vars.size());
    auto pivot_value = [&rows](std::size_t p, const std::vector<int> &vals) {
      double v = rows[p].rhs;
      for (std::size_t f = 0; f < vals.size(); ++f)
        v -= rows[p].coef[f] * vals[f];
      return static_cast<long long>(std::llround(v));
    };
    std::vector<int> pivot_vars;
    for (const auto &pr : rows)
      pivot_vars.push_back(pr.var);
    std::vector<int> vals(free_vars.size(), 0);
    detail::search_free<double>(
        rows, out.free_variables, out.cap, 0, vals,
        [](const double &x) { return std::abs(x - std::round(x)) < 1e-6; },
        [](const double &x) { return x; }, build(pivot_vars, free_vars, pivot_value));
  }

  for (auto &z : found)
    if (check_invariant(md, z).ok() && z.maxCoeff() <= out.cap)
      out.invariants.push_back(std::move(z));
  std::sort(out.invariants.begin(), out.invariants.end(), [](const IntMatrix &a, const IntMatrix &b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return out;
}

inline IntMatrix compose_invariants(const IntMatrix &z1, const IntMatrix &z2) {
  if (z1.cols() != z2.rows() || z1.rows() != z1.cols() || z2.rows() != z2.cols())
    throw ParameterError("invariants must be square and of equal size");
  return z1 * z2;
}

struct ProductDecomposition {
  std::vector<std::vector<int>> multisets; ///< indices into the pool, nondecreasing
  bool found() const { return !multisets.empty(); }
  std::string status() const { return found() ? "ok" : "pool insufficient"; }
};

/// All multisets of pool elements summing exactly to p.
inline ProductDecomposition decompose_product(const IntMatrix &p, const std::vector<IntMatrix> &pool,
                                              std::size_t limit = 10000) {
  ProductDecomposition out;
  std::vector<int> current;
  std::function<void(const IntMatrix &, std::size_t)> dfs = [&](const IntMatrix &rest, std::size_t start) {
    if (out.multisets.size() >= limit)
      return;
    if ((rest.array() == 0).all()) {
      out.multisets.push_back(current);
      return;
    }
    if (rest(0, 0) <= 0)
      return; // every pool element has Z_00 = 1
    for (std::size_t i = start; i < pool.size(); ++i) {
      const IntMatrix q = rest - pool[i];
      if ((q.array() < 0).any())
        continue;
      current.push_back(static_cast<int>(i));
      dfs(q, i);
      current.pop_back();
    }
  };
  if ((p.array() < 0).any())
    return out;
  dfs(p, 0);
  return out;
}

inline nlohmann::json int_matrix_json(const IntMatrix &z) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      row.push_back(z(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline IntMatrix int_matrix_from_json(const nlohmann::json &j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  IntMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != n)
      throw ParameterError("matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k)
      z(i, k) = j[i][k].get<long long>();
  }
  return z;
}

} // namespace anyonforge
