#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "anyonforge/connection.hpp"
#include "anyonforge/path_algebra.hpp"

using namespace anyonforge;

namespace {

double sine_ratio(int j, int n) {
  const double t = std::numbers::pi / (n + 1);
  return std::sin(j * t) / std::sin(t);
}

// Path counts by explicit walk enumeration, independent of adjacency powers.
std::vector<long long> walk_counts(const Graph &g, int k) {
  std::vector<long long> cur(g.size(), 0);
  cur[g.star()] = 1;
  for (int step = 0; step < k; ++step) {
    std::vector<long long> next(g.size(), 0);
    for (auto [u, v] : g.edges()) {
      next[v] += cur[u];
      next[u] += cur[v];
    }
    cur = next;
  }
  return cur;
}

long long a5_formula(int k) {
  long long p = 1;
  for (int i = 1; i < k; ++i)
    p *= 3;
  return (p + 1) / 2;
}

BiUnitaryConnection scaled_cell(const BiUnitaryConnection &c, int e, int f, double s) {
  MatrixXc w = c.amplitudes();
  w(e, f) *= s;
  return BiUnitaryConnection(c.vertical(), c.edges(), w);
}

} // namespace

// ---- graph ----------------------------------------------------------------

TEST(Graph, DynkinShapes) {
  const Graph a2 = dynkin('A', 2);
  EXPECT_EQ(a2.size(), 2);
  EXPECT_EQ(a2.edges().size(), 1u);
  const Graph a5 = dynkin("A5");
  EXPECT_EQ(a5.size(), 5);
  EXPECT_EQ(a5.edges().size(), 4u);
  EXPECT_EQ(a5.label(a5.star()), "1");
  const Graph d4 = dynkin('D', 4);
  EXPECT_EQ(d4.size(), 4);
  int center = 0;
  for (int v = 0; v < 4; ++v)
    if (d4.adjacency().row(v).sum() == 3)
      ++center;
  EXPECT_EQ(center, 1);
  EXPECT_EQ(dynkin('E', 8).size(), 8);
}

TEST(Graph, InvalidDynkinRejected) {
  EXPECT_THROW(dynkin('D', 3), ParameterError);
  EXPECT_THROW(dynkin('E', 9), ParameterError);
  EXPECT_THROW(dynkin('A', 0), ParameterError);
  EXPECT_THROW(dynkin('A', 1), Error);
  EXPECT_THROW(dynkin("Q4"), ParameterError);
}

TEST(Graph, DisconnectedRejected) {
  EXPECT_THROW(Graph({"a", "b", "c", "d"}, {{0, 1}, {2, 3}}, 0), StructuralError);
}

TEST(Graph, PerronFrobeniusMatchesSineRatios) {
  for (int n = 2; n <= 20; ++n) {
    const Graph g = dynkin('A', n);
    const PFData pf = pf_data(g);
    EXPECT_NEAR(pf.beta, 2 * std::cos(std::numbers::pi / (n + 1)), 1e-12) << n;
    EXPECT_LT(pf.residual, 1e-12);
    for (int j = 1; j <= n; ++j)
      EXPECT_NEAR(pf.mu[j - 1], sine_ratio(j, n), 1e-12) << "n=" << n << " j=" << j;
  }
  const PFData a3 = pf_data(dynkin('A', 3));
  EXPECT_NEAR(a3.beta, std::sqrt(2.0), 1e-12);
  const PFData a5 = pf_data(dynkin('A', 5));
  const double expect[] = {1, std::sqrt(3.0), 2, std::sqrt(3.0), 1};
  for (int j = 0; j < 5; ++j)
    EXPECT_NEAR(a5.mu[j], expect[j], 1e-12);
}

TEST(Graph, EigenEquationOnEveryBuiltin) {
  for (const char *name : {"A7", "D4", "D7", "E6", "E7", "E8"}) {
    const Graph g = dynkin(name);
    const PFData pf = pf_data(g);
    const MatrixXd a = g.adjacency().cast<double>();
    const VectorXd mu = Eigen::Map<const VectorXd>(pf.mu.data(), g.size());
    EXPECT_LT((a * mu - pf.beta * mu).cwiseAbs().maxCoeff(), 1e-12) << name;
    EXPECT_DOUBLE_EQ(pf.mu[g.star()], 1.0);
    EXPECT_GE(jones_index(g), 1.0);
  }
}

TEST(Graph, JonesIndex) {
  EXPECT_NEAR(jones_index(dynkin('A', 2)), 1.0, 1e-12);
  EXPECT_NEAR(jones_index(dynkin('A', 3)), 2.0, 1e-12);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(jones_index(dynkin('A', 4)), phi * phi, 1e-12);
}

TEST(Graph, JsonRoundTrip) {
  const Graph g = dynkin("E6");
  const Graph h = graph_from_json(to_json(g));
  EXPECT_EQ(h.labels(), g.labels());
  EXPECT_EQ(h.adjacency(), g.adjacency());
  EXPECT_EQ(h.star(), g.star());
  const auto j = nlohmann::json::parse(R"({"vertices":["a","b","c"],"edges":[["a","b"],["b","c"]],"star":"c"})");
  const Graph p = graph_from_json(j);
  EXPECT_EQ(p.label(p.star()), "c");
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"vertices":["a"],"edges":[["a","z"]]})")), ParameterError);
}

// ---- connection -------------------------------------------------------------

TEST(Connection, FlatCellValues) {
  const auto c = flat_connection_a_n(3);
  const cplx eps = cplx(0, 1) * std::polar(1.0, std::numbers::pi / 8);
  // vertices 1,2,3 live at indices 0,1,2
  EXPECT_LT(std::abs(c.cell(1, 0, 0, 1) - (eps + std::conj(eps) / std::sqrt(2.0))), 1e-12);
  EXPECT_LT(std::abs(c.cell(0, 1, 1, 0) - (eps + std::sqrt(2.0) * std::conj(eps))), 1e-12);
  EXPECT_LT(std::abs(c.cell(1, 0, 2, 1) - std::conj(eps) / std::sqrt(2.0)), 1e-12);
  EXPECT_THROW(flat_connection_a_n(1), ParameterError);
}

TEST(Connection, BiunitarityOfFlatFamily) {
  EXPECT_LT(check_biunitarity(flat_connection_a_n(3)).max(), 1e-12);
  EXPECT_LT(check_biunitarity(flat_connection_a_n(10)).max(), 1e-10);
  for (int n = 2; n <= 20; ++n)
    EXPECT_LT(check_biunitarity(flat_connection_a_n(n)).max(), 1e-10) << n;
}

TEST(Connection, DoubledCellFailsCheck) {
  const auto c = flat_connection_a_n(4);
  int e = -1, f = -1;
  for (int x = 0; x < c.num_edges() && e < 0; ++x)
    for (int y = 0; y < c.num_edges(); ++y)
      if (std::abs(c.amplitude(x, y)) > 0.3) {
        e = x;
        f = y;
        break;
      }
  ASSERT_GE(e, 0);
  const auto r = check_biunitarity(scaled_cell(c, e, f, 2.0));
  EXPECT_GT(r.max(), 0.1);
}

TEST(Connection, ReflectionIsInvolution) {
  const auto c = flat_connection_a_n(3);
  const auto rr = renormalized_reflection(renormalized_reflection(c));
  EXPECT_LT(linalg::max_abs(rr.amplitudes() - c.amplitudes()), 1e-12);
  EXPECT_LT(check_biunitarity(renormalized_reflection(c)).max(), 1e-12);
  const auto id = identity_connection(dynkin('A', 2));
  EXPECT_LT(linalg::max_abs(renormalized_reflection(id).amplitudes() - id.amplitudes()), 1e-15);
}

TEST(Connection, Flatness) {
  EXPECT_TRUE(check_flatness(flat_connection_a_n(5), 3, 3).flat);
  EXPECT_TRUE(check_flatness(flat_connection_a_n(3), 4, 4).flat);
  for (int n = 2; n <= 8; ++n) {
    const auto r = check_flatness(flat_connection_a_n(n), 4, 4);
    EXPECT_LT(r.residual, 1e-9) << n;
    EXPECT_EQ(r.rectangles, 16);
  }
}

TEST(Connection, GaugedConnectionIsBiunitaryButNotFlat) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto c = vertical_gauge(flat_connection_a_n(4), seed);
    EXPECT_LT(check_biunitarity(c).max(), 1e-10);
    const auto r = check_flatness(c, 4, 4);
    EXPECT_FALSE(r.flat);
    EXPECT_GT(r.residual, 1e-3);
  }
  EXPECT_THROW(check_flatness(flat_connection_a_n(3), 0, 2), ParameterError);
}

TEST(Connection, CompositionWithIdentity) {
  const auto w = flat_connection_a_n(4);
  const auto id = identity_connection(w.vertical());
  const auto c = compose_horizontal(id, w);
  // composite edges (loop at src(e), e) are in the order of w's edges
  ASSERT_EQ(c.num_edges(), w.num_edges());
  EXPECT_LT(linalg::max_abs(c.amplitudes() - w.amplitudes()), 1e-12);
  EXPECT_LT(check_biunitarity(compose_horizontal(w, w)).max(), 1e-9);
  EXPECT_NEAR(statistical_dimension(compose_horizontal(w, w)),
              statistical_dimension(w) * statistical_dimension(w), 1e-8);
  EXPECT_THROW(compose_horizontal(w, flat_connection_a_n(3)), StructuralError);
}

TEST(Connection, DecomposeSquares) {
  const auto id = identity_connection(dynkin('A', 3));
  const auto self = decompose(id);
  ASSERT_EQ(self.size(), 1u);
  EXPECT_EQ(self[0].multiplicity, 1);

  const auto w3 = flat_connection_a_n(3);
  const auto ww = compose_horizontal(w3, w3);
  const auto parts = decompose(ww);
  ASSERT_EQ(parts.size(), 2u);
  int identity_hits = 0;
  for (const auto &p : parts) {
    EXPECT_EQ(p.multiplicity, 1);
    EXPECT_EQ(intertwiners(p.irreducible, p.irreducible).size(), 1u);
    if (equivalent(p.irreducible, id))
      ++identity_hits;
  }
  EXPECT_EQ(identity_hits, 1);
  EXPECT_LT(linalg::max_abs(reassemble(parts, ww.num_edges()) - ww.amplitudes()), 1e-8);
}

TEST(Connection, FamilySizesAndFusion) {
  const int sizes[] = {0, 0, 2, 3, 4, 5};
  for (int n = 2; n <= 5; ++n) {
    const auto fam = connection_family(flat_connection_a_n(n), 10);
    EXPECT_TRUE(fam.closed);
    EXPECT_EQ(fam.size(), sizes[n]);
    // dimensions are the PF weights of A_n, one member per vertex
    std::vector<double> dims, mu = pf_data(dynkin('A', n)).mu;
    for (const auto &m : fam.members)
      dims.push_back(m.dimension);
    std::sort(dims.begin(), dims.end());
    std::sort(mu.begin(), mu.end());
    for (int i = 0; i < n; ++i)
      EXPECT_NEAR(dims[i], mu[i], 1e-8);
    // associativity of the multiplicity table
    const int r = fam.size();
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d) {
            int lhs = 0, rhs = 0;
            for (int e = 0; e < r; ++e) {
              lhs += fam.fusion[a][b][e] * fam.fusion[e][c][d];
              rhs += fam.fusion[b][c][e] * fam.fusion[a][e][d];
            }
            EXPECT_EQ(lhs, rhs);
          }
  }
  const auto a3 = connection_family(flat_connection_a_n(3), 10).even_part();
  EXPECT_EQ(a3.size(), 2);
  EXPECT_NEAR(a3.global_dimension(), 2.0, 1e-8);
}

TEST(Connection, FibonacciPatternInA4) {
  const auto fam = connection_family(flat_connection_a_n(4), 10).even_part();
  ASSERT_EQ(fam.size(), 2);
  const int t = 1;
  EXPECT_EQ(fam.fusion[t][t][0], 1);
  EXPECT_EQ(fam.fusion[t][t][t], 1);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(fam.members[t].dimension, phi, 1e-8);
}

TEST(Connection, UnclosedFamilyReported) {
  const auto fam = connection_family(flat_connection_a_n(6), 1);
  EXPECT_FALSE(fam.closed);
}

TEST(Connection, JsonRoundTrip) {
  const auto c = flat_connection_a_n(4);
  const auto d = connection_from_json(to_json(c));
  EXPECT_EQ(d.edges(), c.edges());
  EXPECT_LT(linalg::max_abs(d.amplitudes() - c.amplitudes()), 1e-15);
}

// ---- path algebra -----------------------------------------------------------

TEST(PathAlgebra, StringAlgebraDims) {
  const Graph a5 = dynkin('A', 5);
  const auto k0 = string_algebra_dims(a5, 0);
  ASSERT_EQ(k0.size(), 1u);
  EXPECT_EQ(k0[0].first, 0);
  EXPECT_EQ(k0[0].second, 1);
  const auto k6 = string_algebra_dims(a5, 6);
  ASSERT_EQ(k6.size(), 3u);
  EXPECT_EQ(k6[0], std::make_pair(0, BigInt(5)));
  EXPECT_EQ(k6[1], std::make_pair(2, BigInt(9)));
  EXPECT_EQ(k6[2], std::make_pair(4, BigInt(4)));
  const auto k3 = string_algebra_dims(a5, 3);
  ASSERT_EQ(k3.size(), 2u);
  EXPECT_EQ(k3[0], std::make_pair(1, BigInt(2)));
  EXPECT_EQ(k3[1], std::make_pair(3, BigInt(1)));
}

TEST(PathAlgebra, DimensionsAgainstWalkOracle) {
  for (const char *name : {"A5", "A8", "D5", "E7"}) {
    const Graph g = dynkin(name);
    EXPECT_EQ(higher_relative_commutant_dim(g, 0), 1);
    for (int k = 0; k <= 12; ++k) {
      long long s = 0;
      for (long long x : walk_counts(g, k))
        s += x * x;
      EXPECT_EQ(higher_relative_commutant_dim(g, k), BigInt(s)) << name << " k=" << k;
    }
  }
  const Graph a5 = dynkin('A', 5);
  EXPECT_EQ(higher_relative_commutant_dim(a5, 6), 122);
  for (int k = 1; k <= 10; ++k)
    EXPECT_EQ(higher_relative_commutant_dim(a5, k), BigInt(a5_formula(k))) << k;
}

TEST(PathAlgebra, LargeKIsExact) {
  // 3^99 overflows any machine integer
  BigInt p = 1;
  for (int i = 1; i < 100; ++i)
    p *= 3;
  EXPECT_EQ(higher_relative_commutant_dim(dynkin('A', 5), 100), (p + 1) / 2);
}

TEST(PathAlgebra, RefusesNonFlatConnection) {
  EXPECT_EQ(higher_relative_commutant_dim(flat_connection_a_n(5), 6), 122);
  EXPECT_THROW(higher_relative_commutant_dim(vertical_gauge(flat_connection_a_n(5), 7), 6), StructuralError);
}

TEST(PathAlgebra, Bratteli) {
  const auto d = bratteli(dynkin('A', 5), 6);
  const std::vector<std::vector<int>> rows = {{1}, {1}, {1, 1}, {2, 1}, {2, 3, 1}, {5, 4}, {5, 9, 4}};
  ASSERT_EQ(d.levels.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ASSERT_EQ(d.levels[k].size(), rows[k].size()) << k;
    for (std::size_t i = 0; i < rows[k].size(); ++i)
      EXPECT_EQ(d.levels[k][i].second, rows[k][i]);
  }
  EXPECT_TRUE(d.consistent());
  EXPECT_EQ(d.dimension(6), 122);
  const auto a2 = bratteli(dynkin('A', 2), 3);
  for (const auto &row : a2.levels) {
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0].second, 1);
  }
  for (const char *name : {"D6", "E6", "E8"})
    EXPECT_TRUE(bratteli(dynkin(name), 8).consistent()) << name;
  EXPECT_THROW(bratteli(dynkin('A', 3), -1), ParameterError);
}

TEST(PathAlgebra, BratteliTsv) {
  const auto tsv = to_tsv(bratteli(dynkin('A', 5), 6));
  EXPECT_NE(tsv.find("6\t1 3 5\t5 9 4\t122\n"), std::string::npos);
}

TEST(PathAlgebra, CommutingSquares) {
  const auto sq = string_square(flat_connection_a_n(3), 0, 0);
  EXPECT_LT(commuting_square_check(sq.a, sq.b, sq.c, sq.d, sq.rho), 1e-10);
  for (int n : {3, 4, 5}) {
    const auto s = string_square(flat_connection_a_n(n), 1, 1);
    EXPECT_LT(commuting_square_check(s.a, s.b, s.c, s.d, s.rho), 1e-10) << n;
  }
  // A = B = C = D
  EXPECT_EQ(commuting_square_check(sq.d, sq.d, sq.d, sq.d, sq.rho), 0.0);
}

TEST(PathAlgebra, PerturbedTraceBreaksCommutation) {
  const auto s = string_square(flat_connection_a_n(3), 1, 1);
  VectorXd rho = s.rho;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    rho(i) *= 1.0 + 0.5 * ((i * 7) % 5) / 5.0;
  EXPECT_GT(commuting_square_check(s.a, s.b, s.c, s.d, rho), 1e-3);
  VectorXd bad = s.rho;
  bad(0) = 0.0;
  EXPECT_THROW(commuting_square_check(s.a, s.b, s.c, s.d, bad), ParameterError);
}
