#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "anyonforge/modular_invariant.hpp"

using namespace anyonforge;

namespace {

using Flat = std::vector<long long>;

Flat flat(const IntMatrix &z) {
  Flat f;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      f.push_back(z(i, j));
  return f;
}

std::set<Flat> as_set(const std::vector<IntMatrix> &v) {
  std::set<Flat> s;
  for (const auto &z : v)
    s.insert(flat(z));
  return s;
}

// All r x r matrices with entries in 0..cap and Z_00 = 1 commuting with the
// given S (floating, tolerance 1e-9) and diagonal T.
std::set<Flat> brute_force(const MatrixXc &s, const std::vector<cplx> &t, int cap) {
  const int r = static_cast<int>(s.rows());
  const int cells = r * r - 1;
  long long total = 1;
  for (int i = 0; i < cells; ++i)
    total *= cap + 1;
  std::set<Flat> out;
  Flat z(r * r);
  for (long long code = 0; code < total; ++code) {
    z[0] = 1;
    long long x = code;
    bool t_ok = true;
    for (int i = 1; i < r * r; ++i) {
      z[i] = x % (cap + 1);
      x /= cap + 1;
      if (z[i] && std::abs(t[i / r] - t[i % r]) > 1e-9)
        t_ok = false;
    }
    if (!t_ok)
      continue;
    bool ok = true;
    for (int i = 0; i < r && ok; ++i)
      for (int j = 0; j < r && ok; ++j) {
        cplx d = 0;
        for (int k = 0; k < r; ++k)
          d += double(z[i * r + k]) * s(k, j) - s(i, k) * double(z[k * r + j]);
        ok = std::abs(d) < 1e-9;
      }
    if (ok)
      out.insert(z);
  }
  return out;
}

MatrixXc toric_s() {
  MatrixXc s(4, 4);
  s << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  return s / 2.0;
}

MatrixXc fib_s() {
  const double phi = (1 + std::sqrt(5.0)) / 2;
  MatrixXc s(2, 2);
  s << 1, phi, phi, -1;
  return s / std::sqrt(2 + phi);
}

} // namespace

// ---- fusion rings --------------------------------------------------------------

TEST(FusionRing, BuiltinsSatisfyAxioms) {
  for (const char *name : {"toric_code", "fibonacci", "fibonacci_double", "vec_z1", "vec_z2", "vec_z5", "double_z3"}) {
    const auto b = builtin(name);
    EXPECT_EQ(b.ring.axiom_violation(), 0) << name;
    for (int a = 0; a < b.ring.rank(); ++a)
      for (int c = 0; c < b.ring.rank(); ++c)
        EXPECT_EQ(b.ring.N(0, a, c), a == c ? 1 : 0);
  }
}

TEST(FusionRing, BadRingsRejected) {
  EXPECT_THROW(FusionRing({"1", "x"}, {1, 0, 0, 1, 0, 0, 0, 1}), StructuralError);
  EXPECT_THROW(FusionRing({"1"}, {1, 0}), ParameterError);
  // units and duals fine, but x y = y while y x = x + y
  const FusionRing bad({"1", "x", "y"}, {1, 0, 0, 0, 1, 0, 0, 0, 1,  //
                                         0, 1, 0, 1, 0, 0, 0, 0, 1,  //
                                         0, 0, 1, 0, 1, 1, 1, 0, 0});
  EXPECT_GT(bad.axiom_violation(), 0);
}

TEST(FusionRing, QuantumDimensions) {
  const double phi = (1 + std::sqrt(5.0)) / 2;
  const auto fib = quantum_dims(builtin("fibonacci").ring);
  EXPECT_NEAR(fib[0], 1.0, 1e-12);
  EXPECT_NEAR(fib[1], phi, 1e-12);
  for (double d : quantum_dims(builtin("toric_code").ring))
    EXPECT_NEAR(d, 1.0, 1e-12);
  // multiplicative on tensor products of rings
  const auto dd = quantum_dims(builtin("fibonacci_double").ring);
  EXPECT_NEAR(dd[3], phi * phi, 1e-12);
}

TEST(FusionRing, VecZ3IsCyclic) {
  const auto b = builtin("vec_zn(3)");
  ASSERT_EQ(b.ring.rank(), 3);
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d)
        EXPECT_EQ(b.ring.N(a, c, d), (a + c) % 3 == d ? 1 : 0);
  EXPECT_THROW(builtin("vec_zq"), ParameterError);
  EXPECT_THROW(builtin("ising"), ParameterError);
}

// ---- modular data --------------------------------------------------------------

TEST(ModularData, BuiltinChecks) {
  for (const char *name : {"toric_code", "fibonacci", "fibonacci_double", "vec_z2", "vec_z3", "vec_z4", "double_z3"}) {
    const auto md = builtin(name).md;
    const auto c = md.check();
    EXPECT_LT(c.unitarity, 1e-12) << name;
    EXPECT_LT(c.symmetry, 1e-12) << name;
    EXPECT_LT(c.permutation, 1e-12) << name;
    EXPECT_EQ(c.t_modulus, 0.0) << name;
  }
}

TEST(ModularData, ToricCodeValues) {
  const auto md = builtin("toric_code").md;
  ASSERT_EQ(md.rank(), 4);
  EXPECT_LT(linalg::max_abs(md.S - toric_s()), 1e-15);
  const cplx t[] = {1, 1, 1, -1};
  for (int a = 0; a < 4; ++a)
    EXPECT_LT(std::abs(md.T(a) - t[a]), 1e-15);
  for (double d : md.quantum_dims())
    EXPECT_NEAR(d, 1.0, 1e-12);
}

TEST(ModularData, FibonacciValues) {
  const auto md = builtin("fibonacci").md;
  EXPECT_LT(linalg::max_abs(md.S - fib_s()), 1e-15);
  EXPECT_LT(std::abs(md.T(1) - std::polar(1.0, 4 * std::numbers::pi / 5)), 1e-15);
  EXPECT_NEAR(md.quantum_dims()[1], (1 + std::sqrt(5.0)) / 2, 1e-12);
}

TEST(ModularData, VerlindeReproducesRings) {
  for (const char *name : {"toric_code", "fibonacci", "fibonacci_double", "vec_z2", "vec_z3", "vec_z4", "double_z3"}) {
    const auto b = builtin(name);
    double dev = 1.0;
    const FusionRing v = verlinde(b.md, &dev);
    EXPECT_TRUE(v == b.ring) << name;
    EXPECT_LT(dev, 1e-8);
    EXPECT_EQ(v.axiom_violation(), 0);
  }
  const FusionRing fib = verlinde(builtin("fibonacci").md);
  EXPECT_EQ(fib.N(1, 1, 1), 1);
  EXPECT_EQ(fib.N(1, 1, 0), 1);
}

TEST(ModularData, VerlindeRejectsNonModular) {
  ModularData md;
  md.labels = {"1", "x"};
  const double c = std::cos(0.3), s = std::sin(0.3);
  md.S = MatrixXc(2, 2);
  md.S << c, s, s, -c;
  md.t = {Rational(0), Rational(1, 2)};
  EXPECT_THROW(verlinde(md), NumericalError);
}

TEST(ModularData, JsonRoundTrip) {
  for (const char *name : {"toric_code", "fibonacci", "vec_z3"}) {
    const auto md = builtin(name).md;
    const auto back = modular_data_from_json(to_json(md));
    EXPECT_EQ(back.labels, md.labels);
    EXPECT_EQ(back.t, md.t);
    EXPECT_LT(linalg::max_abs(back.S - md.S), 1e-15);
    EXPECT_TRUE(back.exact.has_value());
  }
  const auto r = fusion_ring_from_json(to_json(builtin("fibonacci").ring));
  EXPECT_TRUE(r == builtin("fibonacci").ring);
}

// ---- exact fields -----------------------------------------------------------

TEST(NumberField, CyclotomicPolynomials) {
  const auto p5 = NumberField::cyclotomic_polynomial(5);
  ASSERT_EQ(p5.size(), 5u);
  for (const auto &c : p5)
    EXPECT_EQ(c, 1);
  const auto p4 = NumberField::cyclotomic_polynomial(4);
  EXPECT_EQ(p4, (std::vector<Rational>{1, 0, 1}));
  const auto p6 = NumberField::cyclotomic_polynomial(6);
  EXPECT_EQ(p6, (std::vector<Rational>{1, -1, 1}));
}

TEST(NumberField, Arithmetic) {
  const auto f = NumberField::cyclotomic(7);
  const auto z = f.alpha_power(1);
  EXPECT_EQ(f.alpha_power(7), f.from_rational(1));
  EXPECT_EQ(f.mul(z, f.alpha_power(-1)), f.from_rational(1));
  EXPECT_LT(std::abs(f.to_complex(f.alpha_power(3)) - std::polar(1.0, 6 * std::numbers::pi / 7)), 1e-14);
  const auto q = NumberField::quadratic(5);
  const NumberField::Elem phi{Rational(1, 2), Rational(1, 2)};
  // phi^2 = phi + 1
  EXPECT_EQ(q.mul(phi, phi), q.add(phi, q.from_rational(1)));
  EXPECT_THROW(q.alpha_power(-1), ParameterError);
  EXPECT_THROW(NumberField::quadratic(1), ParameterError);
}

TEST(NumberField, RationalParsing) {
  EXPECT_EQ(parse_rational(nlohmann::json("3/6")), Rational(1, 2));
  EXPECT_EQ(parse_rational(nlohmann::json(-4)), Rational(-4));
  EXPECT_EQ(rational_str(Rational(-2, 4)), "-1/2");
  EXPECT_THROW(parse_rational(nlohmann::json("1/0")), ParameterError);
  EXPECT_THROW(parse_rational(nlohmann::json("x")), ParameterError);
}

// ---- modular invariants -----------------------------------------------------

TEST(ModularInvariant, ToricCodeMatchesExhaustiveSearch) {
  const auto md = builtin("toric_code").md;
  const auto res = enumerate_modular_invariants(md, 2);
  EXPECT_EQ(res.cap, 2);
  EXPECT_TRUE(res.exact);
  const std::vector<cplx> t{1, 1, 1, -1};
  const auto oracle = brute_force(toric_s(), t, 2);
  EXPECT_EQ(as_set(res.invariants), oracle);
  EXPECT_EQ(oracle.size(), 6u);
}

TEST(ModularInvariant, FibonacciOnlyIdentity) {
  const auto md = builtin("fibonacci").md;
  const auto res = enumerate_modular_invariants(md, 3);
  ASSERT_EQ(res.invariants.size(), 1u);
  EXPECT_EQ(res.invariants[0], IntMatrix::Identity(2, 2));
  const std::vector<cplx> t{md.T(0), md.T(1)};
  EXPECT_EQ(brute_force(fib_s(), t, 3).size(), 1u);
}

TEST(ModularInvariant, VecZ3MatchesExhaustiveSearch) {
  const auto md = builtin("vec_z3").md;
  const std::vector<cplx> t{md.T(0), md.T(1), md.T(2)};
  MatrixXc s(3, 3);
  const cplx w = std::polar(1.0, -2 * std::numbers::pi / 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      s(a, b) = std::pow(w, a * b) / std::sqrt(3.0);
  EXPECT_EQ(as_set(enumerate_modular_invariants(md, 2).invariants), brute_force(s, t, 2));
}

TEST(ModularInvariant, StableUnderCapIncrease) {
  const auto md = builtin("toric_code").md;
  EXPECT_EQ(as_set(enumerate_modular_invariants(md, 2).invariants),
            as_set(enumerate_modular_invariants(md, 3).invariants));
  EXPECT_EQ(default_cap(md), 1);
  EXPECT_EQ(default_cap(builtin("fibonacci").md), 3);
}

TEST(ModularInvariant, IdentityAndConjugationPresentAndExact) {
  for (const char *name : {"toric_code", "fibonacci", "fibonacci_double", "vec_z2", "vec_z3", "vec_z4", "double_z3"}) {
    const auto md = builtin(name).md;
    const auto res = enumerate_modular_invariants(md);
    const auto set = as_set(res.invariants);
    EXPECT_TRUE(set.count(flat(IntMatrix::Identity(md.rank(), md.rank())))) << name;
    EXPECT_TRUE(set.count(flat(md.charge_conjugation().cast<long long>()))) << name;
    for (const auto &z : res.invariants) {
      const auto c = check_invariant(md, z);
      EXPECT_TRUE(c.exact && c.ok()) << name;
      EXPECT_LT(c.s_residual, 1e-10);
    }
  }
  // vec_z3 conjugation swaps 1 and 2
  const auto c3 = builtin("vec_z3").md.charge_conjugation();
  EXPECT_EQ(c3(1, 2), 1);
  EXPECT_EQ(c3(1, 1), 0);
}

TEST(ModularInvariant, CheckRejectsBadMatrices) {
  const auto md = builtin("toric_code").md;
  IntMatrix z = IntMatrix::Identity(4, 4);
  z(1, 3) = 1; // T-phases differ
  EXPECT_FALSE(check_invariant(md, z).commutes_t);
  IntMatrix w = IntMatrix::Identity(4, 4);
  w(0, 0) = 2;
  EXPECT_FALSE(check_invariant(md, w).ok());
  EXPECT_THROW(check_invariant(md, IntMatrix::Identity(3, 3)), ParameterError);
}

TEST(ModularInvariant, Composition) {
  const IntMatrix id = IntMatrix::Identity(4, 4);
  EXPECT_EQ(compose_invariants(id, id), id);
  const auto pool = enumerate_modular_invariants(builtin("toric_code").md, 2).invariants;
  for (const auto &z : pool) {
    const IntMatrix p = compose_invariants(z, z.transpose());
    EXPECT_TRUE((p.array() >= 0).all());
    EXPECT_GE(p(0, 0), 1);
    if ((z.rowwise().sum().array() == 1).all() && (z.colwise().sum().array() == 1).all())
      EXPECT_EQ(p, id); // permutation times its inverse
  }
  EXPECT_THROW(compose_invariants(id, IntMatrix::Identity(3, 3)), ParameterError);
}

TEST(ModularInvariant, DecomposeProducts) {
  const auto pool = enumerate_modular_invariants(builtin("toric_code").md, 2).invariants;
  const IntMatrix id = IntMatrix::Identity(4, 4);
  const auto di = decompose_product(id, pool);
  ASSERT_EQ(di.multisets.size(), 1u);
  EXPECT_EQ(pool[di.multisets[0][0]], id);

  bool saw_two = false;
  for (const auto &z1 : pool)
    for (const auto &z2 : pool) {
      const IntMatrix p = compose_invariants(z1, z2);
      const auto d = decompose_product(p, pool);
      ASSERT_TRUE(d.found());
      EXPECT_EQ(d.status(), "ok");
      for (const auto &m : d.multisets) {
        EXPECT_EQ(static_cast<long long>(m.size()), p(0, 0));
        IntMatrix sum = IntMatrix::Zero(4, 4);
        for (int i : m)
          sum += pool[i];
        EXPECT_EQ(sum, p);
      }
      if (p(0, 0) == 1)
        EXPECT_EQ(d.multisets.size(), 1u);
      saw_two = saw_two || p(0, 0) == 2;
    }
  EXPECT_TRUE(saw_two);
}

TEST(ModularInvariant, InsufficientPoolReported) {
  const IntMatrix id = IntMatrix::Identity(4, 4);
  IntMatrix p = id;
  p(1, 2) = 1;
  const auto d = decompose_product(p, {id});
  EXPECT_FALSE(d.found());
  EXPECT_EQ(d.status(), "pool insufficient");
}

TEST(ModularInvariant, MatrixJson) {
  IntMatrix z(2, 2);
  z << 1, 2, 0, 3;
  EXPECT_EQ(int_matrix_json(z).dump(), "[[1,2],[0,3]]");
  EXPECT_EQ(int_matrix_from_json(int_matrix_json(z)), z);
  EXPECT_THROW(int_matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), ParameterError);
}
