#include <random>

#include <gtest/gtest.h>

#include "anyonforge/acceptance.hpp"
#include "anyonforge/tensor_network.hpp"

using namespace anyonforge;

namespace {

// Dense matrix of one site: kron over sites is formed by the explicit bond sum
// in oracle::mpo_matrix; this helper builds random MPOs with fixed seeds.
MPO random_mpo(std::mt19937_64 &rng, const std::vector<int> &phys, const std::vector<int> &bonds) {
  const int k = static_cast<int>(phys.size());
  MPO m;
  for (int i = 0; i < k; ++i)
    m.sites.push_back(detail::random_tensor(rng, bonds[i], bonds[(i + 1) % k], phys[i], phys[i]));
  return m;
}

VectorXc random_vector(std::mt19937_64 &rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  VectorXc v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = cplx(g(rng), g(rng));
  return v;
}

double sparse_max(const SparseMatrixXc &m) {
  double r = 0.0;
  for (std::int64_t i = 0; i < m.outerSize(); ++i)
    for (SparseMatrixXc::InnerIterator it(m, i); it; ++it)
      r = std::max(r, std::abs(it.value()));
  return r;
}

long long path_count_a3(int k) {
  // closed walks of length 2k from the end vertex of A_3
  Eigen::Matrix3d a;
  a << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  Eigen::Matrix3d p = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 2 * k; ++i)
    p = p * a;
  return std::llround(p(0, 0));
}

} // namespace

TEST(Mps, IdentityMatricesGiveBondDimension) {
  MPS m;
  for (int i = 0; i < 3; ++i)
    m.sites.push_back({4, 4, 2, {MatrixXc::Identity(4, 4), MatrixXc::Identity(4, 4)}});
  EXPECT_EQ(mps_amplitude(m, {0, 1, 1}), cplx(4));
}

TEST(Mps, SingleDiagonalSite) {
  MPS m;
  VectorXc d(3);
  d << 1.0, cplx(0, 2), -0.5;
  m.sites.push_back({3, 3, 1, {MatrixXc(d.asDiagonal())}});
  EXPECT_LT(std::abs(mps_amplitude(m, {0}) - d.sum()), 1e-15);
}

TEST(Mps, RandomTwoSiteAgainstOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  MPS m;
  for (int i = 0; i < 2; ++i) {
    Tensor3 t{3, 3, 2, {}};
    for (int l = 0; l < 2; ++l) {
      MatrixXc a(3, 3);
      for (Eigen::Index x = 0; x < 9; ++x)
        a(x) = cplx(g(rng), g(rng));
      t.mats.push_back(a);
    }
    m.sites.push_back(t);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      EXPECT_LT(std::abs(mps_amplitude(m, {a, b}) - oracle::mps_amplitude(m, {a, b})), 1e-12);
  EXPECT_THROW(mps_amplitude(m, {0}), ParameterError);
  EXPECT_THROW(mps_amplitude(m, {0, 2}), ParameterError);
}

TEST(Mpo, IdentityApplyAndTrace) {
  std::mt19937_64 rng(3);
  const MPO id = MPO::identity(3, 4);
  const VectorXc v = random_vector(rng, 81);
  EXPECT_LT(linalg::max_abs(mpo_apply(id, v) - v), 1e-15);
  EXPECT_EQ(mpo_trace(id), cplx(81));
  EXPECT_THROW(mpo_apply(id, random_vector(rng, 80)), ParameterError);
}

TEST(Mpo, ApplyAgainstDenseOracle) {
  std::mt19937_64 rng(5);
  const MPO p = random_mpo(rng, {3, 4}, {2, 3});
  const MatrixXc m = oracle::mpo_matrix(p);
  const VectorXc v = random_vector(rng, 12), w = random_vector(rng, 12);
  EXPECT_LT(linalg::max_abs(mpo_apply(p, v) - m * v), 1e-12);
  const cplx alpha(0.3, -1.2);
  EXPECT_LT(linalg::max_abs(mpo_apply(p, alpha * v + w) - (alpha * mpo_apply(p, v) + mpo_apply(p, w))), 1e-12);
}

TEST(Mpo, TraceAgainstDenseOracle) {
  std::mt19937_64 rng(6);
  const MPO p = random_mpo(rng, {2, 3, 2}, {3, 2, 2});
  EXPECT_LT(std::abs(mpo_trace(p) - oracle::mpo_matrix(p).trace()), 1e-10);
  const MPO q = random_mpo(rng, {3, 2}, {2, 2});
  const MPO qq = mpo_multiply(q, q);
  const MatrixXc dq = oracle::mpo_matrix(q);
  EXPECT_LT(std::abs(mpo_trace(qq) - (dq * dq).trace()), 1e-10);
}

TEST(Mpo, MultiplyAgainstDenseOracle) {
  std::mt19937_64 rng(7);
  const std::vector<int> phys{3, 2};
  const MPO p = random_mpo(rng, phys, {2, 3}), q = random_mpo(rng, phys, {3, 1}),
            r = random_mpo(rng, phys, {2, 2});
  const MatrixXc dp = oracle::mpo_matrix(p), dq = oracle::mpo_matrix(q), dr = oracle::mpo_matrix(r);
  EXPECT_LT(linalg::max_abs(oracle::mpo_matrix(mpo_multiply(p, q)) - dp * dq), 1e-12);
  const MatrixXc left = oracle::mpo_matrix(mpo_multiply(mpo_multiply(p, q), r));
  const MatrixXc right = oracle::mpo_matrix(mpo_multiply(p, mpo_multiply(q, r)));
  EXPECT_LT(linalg::max_abs(left - right), 1e-10);
  EXPECT_THROW(mpo_multiply(p, random_mpo(rng, {3}, {1})), ParameterError);
}

TEST(Mpo, RealizationsAgree) {
  std::mt19937_64 rng(8);
  const MPO p = random_mpo(rng, {4, 4, 4}, {2, 2, 3});
  const MatrixXc m = oracle::mpo_matrix(p);
  EXPECT_LT(linalg::max_abs(dense_realization(p) - m), 1e-12);
  EXPECT_LT(linalg::max_abs(MatrixXc(sparse_realization(p)) - m), 1e-12);
  EXPECT_THROW(dense_realization(MPO::identity(4, 8)), SizeError);
}

TEST(Mpo, BondMismatchRejected) {
  MPO p;
  p.sites.push_back(Tensor4(2, 3, 2, 2));
  p.sites.push_back(Tensor4(2, 2, 2, 2));
  EXPECT_THROW(p.validate(), ParameterError);
  EXPECT_THROW(Tensor4(0, 1, 1, 1), ParameterError);
}

TEST(ConnectionTensor, TrivialWeightsOnA2) {
  const auto c = flat_connection_a_n(2);
  const PFData pf = pf_data(c.vertical());
  const Tensor4 t = connection_to_tensor(c, pf);
  for (int e = 0; e < c.num_edges(); ++e)
    for (int f = 0; f < c.num_edges(); ++f)
      if (c.geometric(e, f))
        EXPECT_LT(std::abs(t(e, f, 0, 0) - c.amplitude(e, f)), 1e-15);
}

TEST(ConnectionTensor, PullbackStaysBiunitary) {
  for (int n : {3, 5, 7}) {
    const auto c = flat_connection_a_n(n);
    const PFData pf = pf_data(c.vertical());
    const Tensor4 t = connection_to_tensor(c, pf);
    EXPECT_LT(check_biunitarity(tensor_to_connection(t, c, pf)).max(), 1e-10);
  }
  EXPECT_EQ(connection_to_tensor(flat_connection_a_n(5), pf_data(dynkin('A', 5))).ket(), 4);
}

TEST(ConnectionTensor, JsonRoundTrip) {
  const auto c = flat_connection_a_n(3);
  const Tensor4 t = connection_to_tensor(c, pf_data(c.vertical()));
  const Tensor4 u = tensor_from_json(to_json(t));
  ASSERT_EQ(u.nonzeros().size(), t.nonzeros().size());
  for (const auto &e : t.nonzeros())
    EXPECT_EQ(u(e.a, e.b, e.s, e.r), e.value);
}

TEST(Pmpo, AmbientDimensionOfA5) {
  const auto fam = connection_family(flat_connection_a_n(5), 10);
  for (int k = 1; k <= 8; ++k)
    EXPECT_EQ(pmpo(fam, k).ambient_dimension(), std::pow(4.0, 2 * k));
}

TEST(Pmpo, ProjectorOnDenseRealization) {
  for (int n : {3, 4, 5})
    for (int k = 1; k <= 3; ++k) {
      if (n == 5 && k == 3)
        continue; // 4096 x 4096: covered by the sparse check below
      const auto fam = connection_family(flat_connection_a_n(n), 10);
      const MatrixXc p = dense_realization(pmpo(fam, k));
      EXPECT_LT(linalg::max_abs(p * p - p), 1e-10) << n << " " << k;
      EXPECT_LT(linalg::max_abs(p - p.adjoint()), 1e-10) << n << " " << k;
    }
  const auto s = sparse_realization(pmpo(connection_family(flat_connection_a_n(5), 10), 3));
  EXPECT_LT(sparse_max(SparseMatrixXc(s * s) - s), 1e-10);
  EXPECT_LT(sparse_max(s - SparseMatrixXc(s.adjoint())), 1e-10);
}

TEST(Pmpo, RandomVectorsAreFixedAfterProjection) {
  std::mt19937_64 rng(13);
  for (int n : {3, 4, 5}) {
    const auto fam = connection_family(flat_connection_a_n(n), 10);
    for (int k = 1; k <= 3; ++k) {
      const MPO p = pmpo(fam, k);
      for (int i = 0; i < 100; ++i) {
        VectorXc v = random_vector(rng, static_cast<Eigen::Index>(p.ambient_dimension()));
        v.normalize();
        const VectorXc pv = mpo_apply(p, v);
        EXPECT_LT((mpo_apply(p, pv) - pv).norm(), 1e-8);
      }
    }
  }
}

TEST(Pmpo, RankMatchesPathCounts) {
  const auto a5 = connection_family(flat_connection_a_n(5), 10);
  EXPECT_EQ(pmpo_rank(a5, 6).nearest, 122);
  EXPECT_NEAR(pmpo_rank(a5, 2).value, 2.0, 1e-6);
  const auto a3 = connection_family(flat_connection_a_n(3), 10);
  for (int k = 1; k <= 5; ++k) {
    const auto r = pmpo_rank(a3, k);
    EXPECT_TRUE(r.integral());
    EXPECT_EQ(r.nearest, path_count_a3(k)) << k;
  }
  for (int k = 1; k <= 8; ++k)
    EXPECT_EQ(BigInt(pmpo_rank(a5, k).nearest), higher_relative_commutant_dim(dynkin('A', 5), k));
}

TEST(Pmpo, TrivialFamilyHasRankOne) {
  const auto fam = connection_family(flat_connection_a_n(2), 10);
  for (int k = 1; k <= 4; ++k)
    EXPECT_NEAR(pmpo_rank(fam, k).value, 1.0, 1e-12);
}

TEST(Pmpo, UnclosedFamilyRefused) {
  const auto fam = connection_family(flat_connection_a_n(6), 1);
  ASSERT_FALSE(fam.closed);
  EXPECT_THROW(pmpo(fam, 2), StructuralError);
  EXPECT_THROW(pmpo(connection_family(flat_connection_a_n(3), 10), 0), ParameterError);
}
