#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "anyonforge/error.hpp"
#include "anyonforge/linalg.hpp"
#include "anyonforge/number_field.hpp"

namespace anyonforge {

/// Fusion ring with unit label 0: N(a, b, c) = N_{ab}^c.
class FusionRing {
public:
  FusionRing() = default;
  FusionRing(std::vector<std::string> labels, std::vector<int> n)
      : labels_(std::move(labels)), n_(std::move(n)) {
    const std::size_t r = labels_.size();
    if (r == 0 || n_.size() != r * r * r)
      throw ParameterError("fusion coefficients must be rank^3 long");
    dual_.assign(r, -1);
    for (int a = 0; a < rank(); ++a)
      for (int b = 0; b < rank(); ++b)
        if (N(a, b, 0) > 0) {
          if (dual_[a] >= 0 || N(a, b, 0) != 1)
            throw StructuralError("fusion ring: unit must appear once in a x dual(a)");
          dual_[a] = b;
        }
    for (int a = 0; a < rank(); ++a)
      if (dual_[a] < 0)
        throw StructuralError("fusion ring: label without dual");
  }

  int rank() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string> &labels() const { return labels_; }
  const std::string &label(int a) const { return labels_.at(a); }
  int N(int a, int b, int c) const { return n_[(a * rank() + b) * rank() + c]; }
  int dual(int a) const { return dual_.at(a); }
  const std::vector<int> &coefficients() const { return n_; }

  int index_of(const std::string &l) const {
    for (int a = 0; a < rank(); ++a)
      if (labels_[a] == l)
        return a;
    throw ParameterError("unknown label '" + l + "'");
  }

  bool multiplicity_free() const {
    for (int x : n_)
      if (x > 1)
        return false;
    return true;
  }

  /// Largest violation of unit, duality and associativity axioms (0 = valid).
  int axiom_violation() const {
    int bad = 0;
    for (int a = 0; a < rank(); ++a)
      for (int b = 0; b < rank(); ++b) {
        bad = std::max(bad, std::abs(N(0, a, b) - (a == b)));
        bad = std::max(bad, std::abs(N(a, 0, b) - (a == b)));
        bad = std::max(bad, std::abs(N(a, b, 0) - (b == dual(a))));
      }
    for (int a = 0; a < rank(); ++a)
      for (int b = 0; b < rank(); ++b)
        for (int c = 0; c < rank(); ++c)
          for (int d = 0; d < rank(); ++d) {
            int l = 0, r = 0;
            for (int e = 0; e < rank(); ++e) {
              l += N(a, b, e) * N(e, c, d);
              r += N(b, c, e) * N(a, e, d);
            }
            bad = std::max(bad, std::abs(l - r));
          }
    return bad;
  }

  /// Fusion matrix (N_a)_{bc} = N_{ab}^c.
  Eigen::MatrixXd fusion_matrix(int a) const {
    Eigen::MatrixXd m(rank(), rank());
    for (int b = 0; b < rank(); ++b)
      for (int c = 0; c < rank(); ++c)
        m(b, c) = N(a, b, c);
    return m;
  }

  friend bool operator==(const FusionRing &x, const FusionRing &y) {
    return x.labels_ == y.labels_ && x.n_ == y.n_;
  }

private:
  std::vector<std::string> labels_;
  std::vector<int> n_;
  std::vector<int> dual_;
};

/// Group ring of Z/n1 x Z/n2 x ..., labels listed in mixed-radix order.
inline FusionRing group_ring(const std::vector<int> &orders, std::vector<std::string> labels) {
  int r = 1;
  for (int o : orders)
    r *= o;
  auto digits = [&](int x) {
    std::vector<int> d(orders.size());
    for (int i = static_cast<int>(orders.size()) - 1; i >= 0; --i) {
      d[i] = x % orders[i];
      x /= orders[i];
    }
    return d;
  };
  std::vector<int> n(r * r * r, 0);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      const auto da = digits(a), db = digits(b);
      int c = 0;
      for (std::size_t i = 0; i < orders.size(); ++i)
        c = c * orders[i] + (da[i] + db[i]) % orders[i];
      n[(a * r + b) * r + c] = 1;
    }
  return FusionRing(std::move(labels), std::move(n));
}

inline FusionRing product_ring(const FusionRing &x, const FusionRing &y) {
  const int rx = x.rank(), ry = y.rank(), r = rx * ry;
  std::vector<std::string> labels;
  for (int a = 0; a < rx; ++a)
    for (int b = 0; b < ry; ++b)
      labels.push_back(x.label(a) + "x" + y.label(b));
  std::vector<int> n(r * r * r, 0);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        n[(a * r + b) * r + c] =
            x.N(a / ry, b / ry, c / ry) * y.N(a % ry, b % ry, c % ry);
  return FusionRing(std::move(labels), std::move(n));
}

/// Perron-Frobenius eigenvalue of each fusion matrix.
inline std::vector<double> quantum_dims(const FusionRing &r) {
  std::vector<double> d;
  for (int a = 0; a < r.rank(); ++a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(r.fusion_matrix(a), false);
    double best = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      best = std::max(best, std::abs(es.eigenvalues()(i)));
    d.push_back(best);
  }
  return d;
}

/// S, T of a modular category. T_a = exp(2 pi i t_a) with t_a rational in
/// [0, 1). When the exact form is present, S = scale * S_exact.
struct ModularData {
  std::string name;
  std::vector<std::string> labels;
  MatrixXc S;
  std::vector<Rational> t;
  struct Exact {
    NumberField field = NumberField::rationals();
    FieldMatrix s;
    double scale = 1.0;
  };
  std::optional<Exact> exact;

  int rank() const { return static_cast<int>(labels.size()); }

  cplx T(int a) const { return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(t[a])); }

  MatrixXc T_matrix() const {
    MatrixXc m = MatrixXc::Zero(rank(), rank());
    for (int a = 0; a < rank(); ++a)
      m(a, a) = T(a);
    return m;
  }

  /// d_a = S_{0a} / S_{00}.
  std::vector<double> quantum_dims() const {
    std::vector<double> d;
    for (int a = 0; a < rank(); ++a)
      d.push_back((S(0, a) / S(0, 0)).real());
    return d;
  }

  struct Checks {
    double unitarity = 0.0, symmetry = 0.0, permutation = 0.0, t_modulus = 0.0;
    double max() const { return std::max({unitarity, symmetry, permutation, t_modulus}); }
  };

  Checks check() const {
    Checks c;
    c.unitarity = linalg::unitarity_residual(S);
    c.symmetry = linalg::max_abs(S - S.transpose());
    const MatrixXc s2 = S * S;
    for (int i = 0; i < rank(); ++i)
      for (int j = 0; j < rank(); ++j) {
        const double v = std::abs(s2(i, j));
        c.permutation = std::max(c.permutation, std::min(v, std::abs(v - 1.0)));
      }
    for (const auto &x : t)
      if (x < 0 || x >= 1)
        c.t_modulus = 1.0;
    return c;
  }

  /// Charge conjugation C = S^2 rounded to a permutation matrix.
  Eigen::MatrixXi charge_conjugation() const {
    const MatrixXc s2 = S * S;
    Eigen::MatrixXi c = Eigen::MatrixXi::Zero(rank(), rank());
    for (int i = 0; i < rank(); ++i)
      for (int j = 0; j < rank(); ++j)
        c(i, j) = std::abs(s2(i, j) - 1.0) < 1e-6 ? 1 : 0;
    return c;
  }
};

namespace detail {

inline Rational frac(const Rational &x) {
  Rational r = x - Rational(boost::multiprecision::cpp_int(numerator(x) / denominator(x)));
  if (r < 0)
    r += 1;
  return r;
}

inline void fill_float(ModularData &md) {
  const auto &ex = *md.exact;
  md.S.resize(md.rank(), md.rank());
  for (int i = 0; i < md.rank(); ++i)
    for (int j = 0; j < md.rank(); ++j)
      md.S(i, j) = ex.scale * ex.field.to_complex(ex.s(i, j));
}

inline FieldMatrix field_matrix(const NumberField &f, int n) {
  FieldMatrix m;
  m.n = n;
  m.entries.assign(n * n, f.zero());
  return m;
}

} // namespace detail

struct Builtin {
  FusionRing ring;
  ModularData md;
};

/// Pointed Z/n: S_ac = zeta^{-ac}/sqrt(n), t_a = a^2/(2n) (n even) or
/// a^2 (n+1)/(2n) (n odd).
inline Builtin builtin_vec_zn(int n) {
  if (n < 1)
    throw ParameterError("vec_zn needs n >= 1");
  std::vector<std::string> labels;
  for (int a = 0; a < n; ++a)
    labels.push_back(std::to_string(a));
  Builtin b{group_ring({n}, labels), {}};
  auto &md = b.md;
  md.name = "vec_z" + std::to_string(n);
  md.labels = labels;
  ModularData::Exact ex;
  ex.field = n <= 2 ? NumberField::rationals() : NumberField::cyclotomic(n);
  ex.s = detail::field_matrix(ex.field, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      ex.s(a, c) = n <= 2 ? ex.field.from_rational((a * c) % 2 ? -1 : 1)
                          : ex.field.alpha_power(-(a * c));
  ex.scale = 1.0 / std::sqrt(double(n));
  md.exact = ex;
  for (int a = 0; a < n; ++a)
    md.t.push_back(detail::frac(n % 2 == 0 ? Rational(a * a, 2 * n) : Rational(a * a * (n + 1), 2 * n)));
  detail::fill_float(md);
  return b;
}

/// Quantum double of Z/n: labels (a, b) in order a*n + b,
/// S = zeta^{-(ad+bc)}/n, t = ab/n.
inline Builtin builtin_double_zn(int n, std::vector<std::string> labels = {}) {
  if (n < 2)
    throw ParameterError("double_zn needs n >= 2");
  if (labels.empty())
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        labels.push_back("(" + std::to_string(a) + "," + std::to_string(b) + ")");
  Builtin out{group_ring({n, n}, labels), {}};
  auto &md = out.md;
  md.name = "double_z" + std::to_string(n);
  md.labels = labels;
  const int r = n * n;
  ModularData::Exact ex;
  ex.field = n == 2 ? NumberField::rationals() : NumberField::cyclotomic(n);
  ex.s = detail::field_matrix(ex.field, r);
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y) {
      const int a = x / n, b = x % n, c = y / n, d = y % n;
      const int ph = a * d + b * c;
      ex.s(x, y) = n == 2 ? ex.field.from_rational(ph % 2 ? -1 : 1) : ex.field.alpha_power(-ph);
    }
  ex.scale = 1.0 / n;
  md.exact = ex;
  for (int x = 0; x < r; ++x)
    md.t.push_back(detail::frac(Rational((x / n) * (x % n), n)));
  detail::fill_float(md);
  return out;
}

/// Toric code: the double of Z/2 with labels 1, e, m, f.
inline Builtin builtin_toric_code() {
  auto b = builtin_double_zn(2, {"1", "e", "m", "f"});
  b.md.name = "toric_code";
  return b;
}

/// Fibonacci: tau x tau = 1 + tau, S = [[1, phi], [phi, -1]] / sqrt(2 + phi),
/// T = diag(1, exp(4 pi i / 5)).
inline Builtin builtin_fibonacci() {
  Builtin b{FusionRing({"1", "t"}, {1, 0, 0, 1, 0, 1, 1, 1}), {}};
  auto &md = b.md;
  md.name = "fibonacci";
  md.labels = {"1", "t"};
  ModularData::Exact ex;
  ex.field = NumberField::quadratic(5);
  const auto phi = NumberField::Elem{Rational(1, 2), Rational(1, 2)};
  ex.s = detail::field_matrix(ex.field, 2);
  ex.s(0, 0) = ex.field.from_rational(1);
  ex.s(0, 1) = phi;
  ex.s(1, 0) = phi;
  ex.s(1, 1) = ex.field.from_rational(-1);
  const double phid = (1.0 + std::sqrt(5.0)) / 2.0;
  ex.scale = 1.0 / std::sqrt(2.0 + phid);
  md.exact = ex;
  md.t = {Rational(0), Rational(2, 5)};
  detail::fill_float(md);
  return b;
}

/// Fibonacci x reversed Fibonacci: S = S_F (x) S_F, T = T_F (x) conj(T_F).
inline Builtin builtin_fibonacci_double() {
  const Builtin f = builtin_fibonacci();
  Builtin b{product_ring(f.ring, f.ring), {}};
  auto &md = b.md;
  md.name = "fibonacci_double";
  md.labels = b.ring.labels();
  ModularData::Exact ex;
  ex.field = f.md.exact->field;
  ex.s = detail::field_matrix(ex.field, 4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      ex.s(x, y) = ex.field.mul(f.md.exact->s(x / 2, y / 2), f.md.exact->s(x % 2, y % 2));
  ex.scale = f.md.exact->scale * f.md.exact->scale;
  md.exact = ex;
  for (int x = 0; x < 4; ++x)
    md.t.push_back(detail::frac(f.md.t[x / 2] - f.md.t[x % 2]));
  detail::fill_float(md);
  return b;
}

/// Names: toric_code, fibonacci, fibonacci_double, vec_z<n> (or vec_zn(<n>)),
/// double_z<n>.
inline Builtin builtin(const std::string &name) {
  auto trailing_int = [&](const std::string &prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0)
      return std::nullopt;
    std::string rest = name.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')')
      rest = rest.substr(1, rest.size() - 2);
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos || rest.size() > 4)
      throw ParameterError("bad built-in name '" + name + "'");
    return std::stoi(rest);
  };
  if (name == "toric_code")
    return builtin_toric_code();
  if (name == "fibonacci")
    return builtin_fibonacci();
  if (name == "fibonacci_double")
    return builtin_fibonacci_double();
  if (auto n = trailing_int("vec_zn"))
    return builtin_vec_zn(*n);
  if (auto n = trailing_int("vec_z"))
    return builtin_vec_zn(*n);
  if (auto n = trailing_int("double_z"))
    return builtin_double_zn(*n);
  throw ParameterError("unknown built-in '" + name + "'");
}

/// N_{ab}^c = sum_x S_ax S_bx conj(S_cx) / S_0x, rounded. Raises
/// NumericalError ("not modular") when a coefficient is more than 1e-6 from
/// an integer or negative.
inline FusionRing verlinde(const ModularData &md, double *max_deviation = nullptr) {
  const int r = md.rank();
  for (int x = 0; x < r; ++x)
    if (std::abs(md.S(0, x)) < 1e-12)
      throw NumericalError("verlinde: S_0x vanishes");
  std::vector<int> n(r * r * r);
  double dev = 0.0;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) {
        cplx s = 0;
        for (int x = 0; x < r; ++x)
          s += md.S(a, x) * md.S(b, x) * std::conj(md.S(c, x)) / md.S(0, x);
        const double rounded = std::round(s.real());
        const double d = std::abs(s - cplx(rounded, 0.0));
        dev = std::max(dev, d);
        if (d > 1e-6 || rounded < 0)
          throw NumericalError("verlinde: not modular (coefficient " + std::to_string(s.real()) + ")");
        n[(a * r + b) * r + c] = static_cast<int>(rounded);
      }
  if (max_deviation)
    *max_deviation = dev;
  return FusionRing(md.labels, std::move(n));
}

// ---- JSON --------------------------------------------------------------

inline nlohmann::json to_json(const FusionRing &r) {
  nlohmann::json j;
  j["labels"] = r.labels();
  auto rules = nlohmann::json::array();
  for (int a = 0; a < r.rank(); ++a)
    for (int b = 0; b < r.rank(); ++b)
      for (int c = 0; c < r.rank(); ++c)
        if (r.N(a, b, c))
          rules.push_back({r.label(a), r.label(b), r.label(c), r.N(a, b, c)});
  j["N"] = std::move(rules);
  return j;
}

inline FusionRing fusion_ring_from_json(const nlohmann::json &j) {
  const auto labels = j.at("labels").get<std::vector<std::string>>();
  const int r = static_cast<int>(labels.size());
  auto idx = [&](const nlohmann::json &l) {
    const auto s = l.get<std::string>();
    for (int a = 0; a < r; ++a)
      if (labels[a] == s)
        return a;
    throw ParameterError("unknown label '" + s + "' in fusion rules");
  };
  std::vector<int> n(r * r * r, 0);
  for (const auto &rule : j.at("N"))
    n[(idx(rule.at(0)) * r + idx(rule.at(1))) * r + idx(rule.at(2))] = rule.at(3).get<int>();
  return FusionRing(labels, std::move(n));
}

/// {"labels", "T": ["p/q", ...], "S": exact {"field", "scale", "entries"} or
/// a float matrix [[[re, im], ...], ...]}.
inline nlohmann::json to_json(const ModularData &md) {
  nlohmann::json j;
  if (!md.name.empty())
    j["name"] = md.name;
  j["labels"] = md.labels;
  auto t = nlohmann::json::array();
  for (const auto &x : md.t)
    t.push_back(rational_str(x));
  j["T"] = std::move(t);
  if (md.exact) {
    const auto &ex = *md.exact;
    nlohmann::json s;
    s["field"] = ex.field.to_json();
    s["scale"] = ex.scale;
    auto rows = nlohmann::json::array();
    for (int i = 0; i < md.rank(); ++i) {
      auto row = nlohmann::json::array();
      for (int k = 0; k < md.rank(); ++k)
        row.push_back(ex.field.elem_json(ex.s(i, k)));
      rows.push_back(std::move(row));
    }
    s["entries"] = std::move(rows);
    j["S"] = std::move(s);
  } else {
    auto rows = nlohmann::json::array();
    for (int i = 0; i < md.rank(); ++i) {
      auto row = nlohmann::json::array();
      for (int k = 0; k < md.rank(); ++k)
        row.push_back({md.S(i, k).real(), md.S(i, k).imag()});
      rows.push_back(std::move(row));
    }
    j["S"] = std::move(rows);
  }
  return j;
}

inline ModularData modular_data_from_json(const nlohmann::json &j) {
  ModularData md;
  md.name = j.value("name", "");
  md.labels = j.at("labels").get<std::vector<std::string>>();
  const int r = md.rank();
  if (r == 0)
    throw ParameterError("modular data needs labels");
  for (const auto &x : j.at("T"))
    md.t.push_back(detail::frac(parse_rational(x)));
  if (int(md.t.size()) != r)
    throw ParameterError("T must list one phase per label");
  const auto &s = j.at("S");
  if (s.is_object()) {
    ModularData::Exact ex;
    ex.field = NumberField::from_json(s.at("field"));
    ex.scale = s.at("scale").get<double>();
    ex.s = detail::field_matrix(ex.field, r);
    const auto &rows = s.at("entries");
    if (int(rows.size()) != r)
      throw ParameterError("S must be rank x rank");
    for (int i = 0; i < r; ++i) {
      if (int(rows[i].size()) != r)
        throw ParameterError("S must be rank x rank");
      for (int k = 0; k < r; ++k)
        ex.s(i, k) = ex.field.elem_from_json(rows[i][k]);
    }
    md.exact = ex;
    detail::fill_float(md);
  } else {
    if (int(s.size()) != r)
      throw ParameterError("S must be rank x rank");
    md.S.resize(r, r);
    for (int i = 0; i < r; ++i) {
      if (int(s[i].size()) != r)
        throw ParameterError("S must be rank x rank");
      for (int k = 0; k < r; ++k) {
        const auto &e = s[i][k];
        md.S(i, k) = e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>())
                                  : cplx(e.get<double>(), 0.0);
      }
    }
  }
  return md;
}

} // namespace anyonforge
