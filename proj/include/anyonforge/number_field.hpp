#pragma once

#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "anyonforge/error.hpp"
#include "anyonforge/linalg.hpp"

namespace anyonforge {

using Rational = boost::multiprecision::cpp_rational;

inline Rational parse_rational(const nlohmann::json &j) {
  if (j.is_number_integer())
    return Rational(j.get<long long>());
  if (!j.is_string())
    throw ParameterError("rationals are written as integers or \"p/q\" strings");
  const auto s = j.get<std::string>();
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos)
      return Rational(boost::multiprecision::cpp_int(s));
    const boost::multiprecision::cpp_int p(s.substr(0, slash)), q(s.substr(slash + 1));
    if (q == 0)
      throw ParameterError("zero denominator in '" + s + "'");
    return Rational(p, q);
  } catch (const std::runtime_error &) {
    throw ParameterError("bad rational '" + s + "'");
  }
}

inline std::string rational_str(const Rational &r) {
  if (denominator(r) == 1)
    return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Q(alpha) for a monic minimal polynomial with rational coefficients.
/// Elements are coefficient vectors in the power basis 1, alpha, ...
class NumberField {
public:
  using Elem = std::vector<Rational>;

  /// Q itself (alpha = 0, minimal polynomial x).
  static NumberField rationals() { return NumberField({Rational(0), Rational(1)}, 0.0, "rational", 0); }

  /// Q(sqrt(d)) for a positive non-square integer d.
  static NumberField quadratic(int d) {
    if (d <= 1)
      throw ParameterError("quadratic field needs d > 1");
    return NumberField({Rational(-d), Rational(0), Rational(1)}, std::sqrt(double(d)), "quadratic", d);
  }

  /// Q(zeta_n), zeta_n = exp(2 pi i / n).
  static NumberField cyclotomic(int n) {
    if (n < 1)
      throw ParameterError("cyclotomic field needs n >= 1");
    return NumberField(cyclotomic_polynomial(n), std::polar(1.0, 2.0 * std::numbers::pi / n),
                       "cyclotomic", n);
  }

  static NumberField from_json(const nlohmann::json &j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "rational")
      return rationals();
    if (type == "quadratic")
      return quadratic(j.at("d").get<int>());
    if (type == "cyclotomic")
      return cyclotomic(j.at("n").get<int>());
    throw ParameterError("unknown field type '" + type + "'");
  }

  nlohmann::json to_json() const {
    if (kind_ == "rational")
      return {{"type", kind_}};
    if (kind_ == "quadratic")
      return {{"type", kind_}, {"d", param_}};
    return {{"type", kind_}, {"n", param_}};
  }

  int degree() const { return static_cast<int>(minpoly_.size()) - 1; }
  const std::string &kind() const { return kind_; }
  int param() const { return param_; }

  Elem zero() const { return Elem(degree(), Rational(0)); }
  Elem from_rational(const Rational &r) const {
    Elem e = zero();
    e[0] = r;
    return e;
  }
  /// alpha^k reduced; negative k allowed for roots of unity.
  Elem alpha_power(int k) const {
    if (k < 0) {
      if (kind_ != "cyclotomic")
        throw ParameterError("negative powers need a cyclotomic field");
      k = ((k % param_) + param_) % param_;
    }
    Elem e = from_rational(1);
    Elem a = zero();
    if (degree() > 1)
      a[1] = 1;
    else
      a[0] = -minpoly_[0];
    for (int i = 0; i < k; ++i)
      e = mul(e, a);
    return e;
  }

  Elem add(const Elem &a, const Elem &b) const {
    Elem e = a;
    for (int i = 0; i < degree(); ++i)
      e[i] += b[i];
    return e;
  }
  Elem sub(const Elem &a, const Elem &b) const {
    Elem e = a;
    for (int i = 0; i < degree(); ++i)
      e[i] -= b[i];
    return e;
  }
  Elem scale(const Elem &a, const Rational &r) const {
    Elem e = a;
    for (auto &x : e)
      x *= r;
    return e;
  }
  Elem mul(const Elem &a, const Elem &b) const {
    const int n = degree();
    std::vector<Rational> prod(2 * n - 1, Rational(0));
    for (int i = 0; i < n; ++i)
      if (a[i] != 0)
        for (int j = 0; j < n; ++j)
          prod[i + j] += a[i] * b[j];
    for (int d = 2 * n - 2; d >= n; --d) {
      if (prod[d] == 0)
        continue;
      const Rational c = prod[d];
      for (int i = 0; i <= n; ++i)
        prod[d - n + i] -= c * minpoly_[i];
    }
    prod.resize(n);
    return prod;
  }
  bool is_zero(const Elem &a) const {
    for (const auto &x : a)
      if (x != 0)
        return false;
    return true;
  }
  cplx to_complex(const Elem &a) const {
    cplx s = 0, p = 1;
    for (int i = 0; i < degree(); ++i) {
      s += p * static_cast<double>(a[i]);
      p *= alpha_;
    }
    return s;
  }

  nlohmann::json elem_json(const Elem &a) const {
    auto j = nlohmann::json::array();
    for (const auto &x : a)
      j.push_back(rational_str(x));
    return j;
  }
  Elem elem_from_json(const nlohmann::json &j) const {
    if (!j.is_array() || static_cast<int>(j.size()) > degree())
      throw ParameterError("field element must list at most degree coefficients");
    Elem e = zero();
    for (std::size_t i = 0; i < j.size(); ++i)
      e[i] = parse_rational(j[i]);
    return e;
  }

  static std::vector<Rational> cyclotomic_polynomial(int n) {
    // x^n - 1 divided by Phi_d for every proper divisor d.
    std::vector<Rational> p(n + 1, Rational(0));
    p[0] = -1;
    p[n] = 1;
    for (int d = 1; d < n; ++d)
      if (n % d == 0)
        p = divide(p, cyclotomic_polynomial(d));
    return p;
  }

private:
  NumberField(std::vector<Rational> minpoly, cplx alpha, std::string kind, int param)
      : minpoly_(std::move(minpoly)), alpha_(alpha), kind_(std::move(kind)), param_(param) {}

  static std::vector<Rational> divide(std::vector<Rational> num, const std::vector<Rational> &den) {
    const int dn = static_cast<int>(den.size()) - 1;
    const int nn = static_cast<int>(num.size()) - 1;
    std::vector<Rational> q(nn - dn + 1, Rational(0));
    for (int d = nn; d >= dn; --d) {
      const Rational c = num[d] / den[dn];
      q[d - dn] = c;
      for (int i = 0; i <= dn; ++i)
        num[d - dn + i] -= c * den[i];
    }
    return q;
  }

  std::vector<Rational> minpoly_;
  cplx alpha_;
  std::string kind_;
  int param_;
};

/// Square matrix over a number field.
struct FieldMatrix {
  int n = 0;
  std::vector<NumberField::Elem> entries; // row-major
  const NumberField::Elem &operator()(int i, int j) const { return entries[i * n + j]; }
  NumberField::Elem &operator()(int i, int j) { return entries[i * n + j]; }
};

// ---- exact linear algebra ----------------------------------------------

/// Reduced row echelon form of a rational matrix (in place). Returns the
/// pivot column of each nonzero row.
inline std::vector<int> rref(std::vector<std::vector<Rational>> &m, int cols) {
  std::vector<int> pivots;
  int row = 0;
  for (int c = 0; c < cols && row < int(m.size()); ++c) {
    int sel = -1;
    for (int r = row; r < int(m.size()); ++r)
      if (m[r][c] != 0) {
        sel = r;
        break;
      }
    if (sel < 0)
      continue;
    std::swap(m[row], m[sel]);
    const Rational inv = 1 / m[row][c];
    for (auto &x : m[row])
      x *= inv;
    for (int r = 0; r < int(m.size()); ++r) {
      if (r == row || m[r][c] == 0)
        continue;
      const Rational f = m[r][c];
      for (std::size_t k = 0; k < m[r].size(); ++k)
        if (m[row][k] != 0)
          m[r][k] -= f * m[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  m.resize(row);
  return pivots;
}

} // namespace anyonforge
