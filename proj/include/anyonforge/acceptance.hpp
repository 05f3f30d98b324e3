#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anyonforge/connection.hpp"
#include "anyonforge/modular_invariant.hpp"
#include "anyonforge/path_algebra.hpp"
#include "anyonforge/tensor_network.hpp"
#include "anyonforge/tube_algebra.hpp"

namespace anyonforge {

struct AcceptanceConfig {
  bool quick = false;
  std::uint64_t seed = 20240611;
  double tol_biunitary = 1e-10;
  double tol_flat = 1e-9;
  double tol_trace = 1e-6;
  double tol_projector = 1e-8;
  double tol_hermitian = 1e-10;
  double tol_dim = 1e-12;
  double tol_pentagon = 1e-12;
  double tol_oracle = 1e-10;
  int spot_checks = 100;
  int oracle_instances = 50;
  bool enforce_runtime = true;

  nlohmann::json to_json() const {
    return {{"quick", quick},
            {"seed", seed},
            {"tol_biunitary", tol_biunitary},
            {"tol_flat", tol_flat},
            {"tol_trace", tol_trace},
            {"tol_projector", tol_projector},
            {"tol_hermitian", tol_hermitian},
            {"tol_dim", tol_dim},
            {"tol_pentagon", tol_pentagon},
            {"tol_oracle", tol_oracle},
            {"spot_checks", spot_checks},
            {"oracle_instances", oracle_instances},
            {"enforce_runtime", enforce_runtime}};
  }
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double residual = 0.0;   ///< worst measured deviation (0 for exact checks)
  double tolerance = 0.0;
  double limit_ms = 0.0;   ///< 0 when the criterion has no runtime bound
  double elapsed_ms = 0.0;
  std::string detail;

  nlohmann::json to_json(bool timing) const {
    nlohmann::json j = {{"id", id},     {"name", name},         {"pass", pass},
                        {"residual", residual}, {"tolerance", tolerance}, {"detail", detail}};
    if (limit_ms > 0)
      j["limit_ms"] = limit_ms;
    if (timing)
      j["elapsed_ms"] = elapsed_ms;
    return j;
  }
};

// ---- oracles ------------------------------------------------------------

namespace oracle {

/// Dense matrix of an MPO by summing over every bond configuration.
inline MatrixXc mpo_matrix(const MPO &p) {
  const int k = p.length();
  long long rows = 1, cols = 1;
  for (const auto &t : p.sites) {
    rows *= t.ket();
    cols *= t.bra();
  }
  MatrixXc m = MatrixXc::Zero(rows, cols);
  std::vector<int> s(k), r(k), a(k);
  for (long long row = 0; row < rows; ++row)
    for (long long col = 0; col < cols; ++col) {
      long long x = row, y = col;
      for (int i = k - 1; i >= 0; --i) {
        s[i] = static_cast<int>(x % p.sites[i].ket());
        x /= p.sites[i].ket();
        r[i] = static_cast<int>(y % p.sites[i].bra());
        y /= p.sites[i].bra();
      }
      long long bonds = 1;
      for (const auto &t : p.sites)
        bonds *= t.top();
      cplx sum = 0;
      for (long long b = 0; b < bonds; ++b) {
        long long z = b;
        for (int i = k - 1; i >= 0; --i) {
          a[i] = static_cast<int>(z % p.sites[i].top());
          z /= p.sites[i].top();
        }
        cplx prod = 1;
        for (int i = 0; i < k && prod != cplx(0); ++i)
          prod *= p.sites[i](a[i], a[(i + 1) % k], s[i], r[i]);
        sum += prod;
      }
      m(row, col) = sum;
    }
  return m;
}

inline cplx mps_amplitude(const MPS &m, const std::vector<int> &labels) {
  const int k = m.length();
  long long bonds = 1;
  for (const auto &t : m.sites)
    bonds *= t.left;
  cplx sum = 0;
  std::vector<int> a(k);
  for (long long b = 0; b < bonds; ++b) {
    long long z = b;
    for (int i = k - 1; i >= 0; --i) {
      a[i] = static_cast<int>(z % m.sites[i].left);
      z /= m.sites[i].left;
    }
    cplx prod = 1;
    for (int i = 0; i < k; ++i)
      prod *= m.sites[i].mats[labels[i]](a[i], a[(i + 1) % k]);
    sum += prod;
  }
  return sum;
}

/// Every nonnegative 4x4 matrix with entries <= cap, Z_00 = 1, commuting with
/// T = diag(1,1,1,-1) and with 2S = [[1,1,1,1],[1,1,-1,-1],[1,-1,1,-1],[1,-1,-1,1]].
inline std::set<std::vector<long long>> toric_invariants(int cap) {
  const long long s2[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
  std::set<std::vector<long long>> out;
  std::vector<std::pair<int, int>> free;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i || j)
        free.emplace_back(i, j);
  free.emplace_back(3, 3);
  long long total = 1;
  for (std::size_t i = 0; i < free.size(); ++i)
    total *= cap + 1;
  for (long long code = 0; code < total; ++code) {
    long long z[4][4] = {};
    z[0][0] = 1;
    long long x = code;
    for (const auto &[i, j] : free) {
      z[i][j] = x % (cap + 1);
      x /= cap + 1;
    }
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i)
      for (int j = 0; j < 4 && ok; ++j) {
        long long lhs = 0, rhs = 0;
        for (int k = 0; k < 4; ++k) {
          lhs += z[i][k] * s2[k][j];
          rhs += s2[i][k] * z[k][j];
        }
        ok = lhs == rhs;
      }
    if (ok) {
      std::vector<long long> flat;
      for (auto &row : z)
        for (long long v : row)
          flat.push_back(v);
      out.insert(flat);
    }
  }
  return out;
}

} // namespace oracle

// ---- criteria -------------------------------------------------------------

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

inline BigInt a5_dim(int k) {
  BigInt p = 1;
  for (int i = 1; i < k; ++i)
    p *= 3;
  return (p + 1) / 2;
}

inline CriterionResult criterion_biunitarity(const AcceptanceConfig &cfg) {
  CriterionResult r{1, "bi-unitarity of flat A_n", false, 0.0, cfg.tol_biunitary, 5000.0};
  const int nmax = cfg.quick ? 12 : 20;
  for (int n = 2; n <= nmax; ++n)
    r.residual = std::max(r.residual, check_biunitarity(flat_connection_a_n(n)).max());
  r.pass = r.residual < cfg.tol_biunitary;
  r.detail = "n=2.." + std::to_string(nmax);
  return r;
}

inline CriterionResult criterion_flatness(const AcceptanceConfig &cfg) {
  CriterionResult r{2, "flatness of A_n on 4x4 rectangles", true, 0.0, cfg.tol_flat, 60000.0};
  const int nmax = cfg.quick ? 6 : 8;
  for (int n = 2; n <= nmax; ++n) {
    const auto f = check_flatness(flat_connection_a_n(n), 4, 4, cfg.tol_flat);
    r.residual = std::max({r.residual, f.residual, f.transport_unitarity});
    r.pass = r.pass && f.flat;
  }
  r.detail = "n=2.." + std::to_string(nmax);
  return r;
}

inline CriterionResult criterion_bratteli(const AcceptanceConfig &) {
  CriterionResult r{3, "Bratteli diagram and dimensions of A_5", true, 0.0, 0.0, 1000.0};
  const auto d = bratteli(dynkin("A5"), 10);
  std::vector<BigInt> row;
  for (const auto &[v, n] : d.levels[6])
    row.push_back(n);
  const bool row_ok = row == std::vector<BigInt>{5, 9, 4};
  const bool dim_ok = d.dimension(6) == 122;
  bool seq_ok = d.consistent();
  for (int k = 1; k <= 10; ++k)
    seq_ok = seq_ok && d.dimension(k) == a5_dim(k);
  r.pass = row_ok && dim_ok && seq_ok;
  r.detail = "row6 " + std::string(row_ok ? "5 9 4" : "wrong") + ", dim6 " + d.dimension(6).str() +
             ", k=1..10 " + (seq_ok ? "exact" : "mismatch");
  return r;
}

inline CriterionResult criterion_pmpo_rank(const AcceptanceConfig &cfg) {
  CriterionResult r{4, "PMPO rank identity for A_5", true, 0.0, cfg.tol_trace, 120000.0};
  const auto fam = connection_family(flat_connection_a_n(5), 10);
  for (int k = 1; k <= 8; ++k) {
    const auto p = pmpo(fam, k);
    const cplx tr = mpo_trace(p);
    const double target = static_cast<double>(a5_dim(k));
    r.residual = std::max(r.residual, std::abs(tr - target));
    r.pass = r.pass && std::pow(4.0, 2 * k) == p.ambient_dimension();
  }
  r.pass = r.pass && r.residual < cfg.tol_trace;
  r.detail = "k=1..8, ambient 4^{2k}";
  return r;
}

inline CriterionResult criterion_projector(const AcceptanceConfig &cfg) {
  CriterionResult r{5, "PMPO projector property", true, 0.0, cfg.tol_projector, 60000.0};
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  double idem = 0.0, herm = 0.0, spot = 0.0;
  for (int n : {3, 4, 5}) {
    const auto fam = connection_family(flat_connection_a_n(n), 10);
    for (int k = 1; k <= 3; ++k) {
      const auto s = sparse_realization(pmpo(fam, k));
      const SparseMatrixXc d = SparseMatrixXc(s * s) - s;
      const SparseMatrixXc h = s - SparseMatrixXc(s.adjoint());
      for (const SparseMatrixXc *m : {&d, &h})
        for (std::int64_t i = 0; i < m->outerSize(); ++i)
          for (SparseMatrixXc::InnerIterator it(*m, i); it; ++it)
            (m == &d ? idem : herm) = std::max(m == &d ? idem : herm, std::abs(it.value()));
    }
    const auto p4 = pmpo(fam, 4);
    const auto dim = static_cast<Eigen::Index>(p4.ambient_dimension());
    VectorXc prev_v, prev_pv;
    for (int i = 0; i < cfg.spot_checks; ++i) {
      VectorXc v(dim);
      for (Eigen::Index j = 0; j < dim; ++j)
        v(j) = cplx(gauss(rng), gauss(rng));
      v.normalize();
      const VectorXc pv = mpo_apply(p4, v);
      spot = std::max(spot, (mpo_apply(p4, pv) - pv).norm());
      if (prev_v.size())
        herm = std::max(herm, std::abs(prev_v.dot(pv) - prev_pv.dot(v)));
      prev_v = v;
      prev_pv = pv;
    }
  }
  r.residual = std::max(idem, spot);
  r.pass = idem < cfg.tol_projector && spot < cfg.tol_projector && herm < cfg.tol_hermitian;
  r.detail = "A_3,A_4,A_5 k<=3: |P^2-P| " + fmt(idem) + ", |P-P*| " + fmt(herm) + "; " +
             std::to_string(cfg.spot_checks) + " spot checks per family at k=4: " + fmt(spot);
  return r;
}

inline CriterionResult criterion_verlinde(const AcceptanceConfig &cfg) {
  CriterionResult r{6, "Verlinde fusion of toric code and Fibonacci", true, 0.0, cfg.tol_dim};
  const auto toric = verlinde(builtin("toric_code").md);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        r.pass = r.pass && toric.N(a, b, c) == ((a ^ b) == c ? 1 : 0);
  const auto fibmd = builtin("fibonacci").md;
  const auto fib = verlinde(fibmd);
  const int expect[2][2][2] = {{{1, 0}, {0, 1}}, {{0, 1}, {1, 1}}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        r.pass = r.pass && fib.N(a, b, c) == expect[a][b][c];
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  r.residual = std::max(std::abs(fibmd.quantum_dims()[1] - phi), std::abs(quantum_dims(fib)[1] - phi));
  r.pass = r.pass && r.residual < cfg.tol_dim;
  r.detail = "Z/2xZ/2 and t*t=1+t exact, d_t error " + fmt(r.residual);
  return r;
}

inline bool contains(const std::vector<IntMatrix> &v, const IntMatrix &z) {
  for (const auto &x : v)
    if (x == z)
      return true;
  return false;
}

inline CriterionResult criterion_modinv(const AcceptanceConfig &) {
  CriterionResult r{7, "modular invariant enumeration", true, 0.0, 0.0};
  const auto toric = builtin("toric_code").md;
  const auto found = enumerate_modular_invariants(toric, 2);
  std::set<std::vector<long long>> got;
  for (const auto &z : found.invariants)
    got.insert(std::vector<long long>(z.data(), z.data() + z.size()));
  // IntMatrix is column-major; the oracle flattens row-major, so compare transposes.
  std::set<std::vector<long long>> oracle;
  for (const auto &z : oracle::toric_invariants(2)) {
    std::vector<long long> t(16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        t[j * 4 + i] = z[i * 4 + j];
    oracle.insert(t);
  }
  const bool toric_ok = got == oracle;
  const auto fib = enumerate_modular_invariants(builtin("fibonacci").md);
  const bool fib_ok = fib.invariants.size() == 1 && fib.invariants[0] == IntMatrix::Identity(2, 2);
  bool always = true, exact = true;
  for (const std::string name : {"toric_code", "fibonacci", "vec_z3", "double_z3", "fibonacci_double"}) {
    const auto md = builtin(name).md;
    const auto res = enumerate_modular_invariants(md);
    always = always && contains(res.invariants, IntMatrix::Identity(md.rank(), md.rank())) &&
             contains(res.invariants, md.charge_conjugation().cast<long long>());
    for (const auto &z : res.invariants) {
      const auto c = check_invariant(md, z);
      exact = exact && c.exact && c.ok();
    }
  }
  r.pass = toric_ok && fib_ok && always && exact;
  r.detail = "toric cap 2: " + std::to_string(got.size()) + " vs oracle " + std::to_string(oracle.size()) +
             ", fibonacci " + std::to_string(fib.invariants.size()) + ", identity/C " +
             (always ? "present" : "missing") + ", exact commutation " + (exact ? "ok" : "fails");
  return r;
}

inline CriterionResult criterion_composition(const AcceptanceConfig &) {
  CriterionResult r{8, "composition and decomposition of toric invariants", true, 0.0, 0.0};
  const auto pool = enumerate_modular_invariants(builtin("toric_code").md, 2).invariants;
  int pairs = 0;
  for (const auto &z1 : pool)
    for (const auto &z2 : pool) {
      const IntMatrix p = compose_invariants(z1, z2);
      const auto d = decompose_product(p, pool);
      bool counted = false;
      for (const auto &m : d.multisets)
        counted = counted || static_cast<long long>(m.size()) == p(0, 0);
      r.pass = r.pass && d.found() && counted;
      ++pairs;
    }
  r.detail = std::to_string(pairs) + " products from a pool of " + std::to_string(pool.size());
  return r;
}

inline CriterionResult criterion_tube(const AcceptanceConfig &cfg) {
  CriterionResult r{9, "tube algebra anyons", true, 0.0, cfg.tol_pentagon, 30000.0};
  AnyonOptions aopt;
  aopt.seed = cfg.seed;
  std::ostringstream os;
  const std::pair<const char *, int> cases[] = {{"vec_z2", 4}, {"vec_z3", 9}, {"fibonacci", 4}};
  for (const auto &[name, expect] : cases) {
    const auto fs = f_symbols_builtin(name);
    const double pent = pentagon_residual(fs);
    r.residual = std::max(r.residual, pent);
    const auto t = tube_algebra(fs);
    const auto s = anyons(t, aopt);
    r.pass = r.pass && pent < cfg.tol_pentagon && s.count() == expect && s.dimension_sum() == t.dim();
    os << name << " " << s.count() << " anyons dim " << t.dim() << "; ";
  }
  const int a3 = anyon_count_from_connections(connection_family(flat_connection_a_n(3), 10), {}, aopt);
  r.pass = r.pass && a3 == 4;
  os << "A_3 family " << a3;
  r.detail = os.str();
  return r;
}

inline Tensor4 random_tensor(std::mt19937_64 &rng, int top, int bottom, int ket, int bra) {
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution keep(0.7);
  Tensor4 t(top, bottom, ket, bra);
  for (int a = 0; a < top; ++a)
    for (int b = 0; b < bottom; ++b)
      for (int s = 0; s < ket; ++s)
        for (int q = 0; q < bra; ++q)
          if (keep(rng))
            t(a, b, s, q) = cplx(gauss(rng), gauss(rng));
  return t;
}

inline CriterionResult criterion_oracle(const AcceptanceConfig &cfg) {
  CriterionResult r{10, "tensor network ops against brute-force contraction", true, 0.0, cfg.tol_oracle};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> klen(1, 3), phys(1, 4), bond(1, 3);
  std::normal_distribution<double> gauss;
  for (int inst = 0; inst < cfg.oracle_instances; ++inst) {
    const int k = klen(rng);
    std::vector<int> d(k), bp(k), bq(k);
    for (int i = 0; i < k; ++i) {
      d[i] = phys(rng);
      bp[i] = bond(rng);
      bq[i] = bond(rng);
    }
    MPO p, q;
    for (int i = 0; i < k; ++i) {
      p.sites.push_back(random_tensor(rng, bp[i], bp[(i + 1) % k], d[i], d[i]));
      q.sites.push_back(random_tensor(rng, bq[i], bq[(i + 1) % k], d[i], d[i]));
    }
    const MatrixXc mp = oracle::mpo_matrix(p), mq = oracle::mpo_matrix(q);
    VectorXc v(mp.cols());
    for (Eigen::Index j = 0; j < v.size(); ++j)
      v(j) = cplx(gauss(rng), gauss(rng));
    const double scale = std::max(1.0, mp.cwiseAbs().maxCoeff() * mq.cwiseAbs().maxCoeff());
    double dev = linalg::max_abs(mpo_apply(p, v) - mp * v) / std::max(1.0, v.cwiseAbs().maxCoeff());
    dev = std::max(dev, std::abs(mpo_trace(p) - mp.trace()));
    dev = std::max(dev, linalg::max_abs(dense_realization(p) - mp));
    dev = std::max(dev, linalg::max_abs(oracle::mpo_matrix(mpo_multiply(p, q)) - mp * mq) / scale);
    dev = std::max(dev, linalg::max_abs(dense_realization(mpo_multiply(p, q)) - mp * mq) / scale);
    MPS m;
    std::vector<int> labels(k);
    for (int i = 0; i < k; ++i) {
      Tensor3 t{bp[i], bp[(i + 1) % k], d[i], {}};
      for (int l = 0; l < d[i]; ++l) {
        MatrixXc a(t.left, t.right);
        for (Eigen::Index x = 0; x < a.size(); ++x)
          a(x) = cplx(gauss(rng), gauss(rng));
        t.mats.push_back(a);
      }
      labels[i] = std::uniform_int_distribution<int>(0, d[i] - 1)(rng);
      m.sites.push_back(std::move(t));
    }
    dev = std::max(dev, std::abs(mps_amplitude(m, labels) - oracle::mps_amplitude(m, labels)));
    r.residual = std::max(r.residual, dev);
  }
  r.pass = r.residual < cfg.tol_oracle;
  r.detail = std::to_string(cfg.oracle_instances) + " instances: apply, trace, multiply, realization, amplitude";
  return r;
}

} // namespace detail

/// Runs criteria 1..10 in order. A criterion that throws is reported as a
/// failure carrying the message; runtime bounds count when enforced.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceConfig &cfg,
                                                   const std::function<void(const CriterionResult &)> &on_done = {}) {
  using Fn = CriterionResult (*)(const AcceptanceConfig &);
  const std::pair<const char *, Fn> all[] = {
      {"bi-unitarity of flat A_n", detail::criterion_biunitarity},
      {"flatness of A_n on 4x4 rectangles", detail::criterion_flatness},
      {"Bratteli diagram and dimensions of A_5", detail::criterion_bratteli},
      {"PMPO rank identity for A_5", detail::criterion_pmpo_rank},
      {"PMPO projector property", detail::criterion_projector},
      {"Verlinde fusion of toric code and Fibonacci", detail::criterion_verlinde},
      {"modular invariant enumeration", detail::criterion_modinv},
      {"composition and decomposition of toric invariants", detail::criterion_composition},
      {"tube algebra anyons", detail::criterion_tube},
      {"tensor network ops against brute-force contraction", detail::criterion_oracle},
  };
  std::vector<CriterionResult> out;
  int id = 0;
  for (const auto &[name, fn] : all) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(cfg);
    } catch (const std::exception &e) {
      r.id = id;
      r.name = name;
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.enforce_runtime && r.limit_ms > 0 && r.elapsed_ms > r.limit_ms) {
      r.pass = false;
      r.detail += "; over the runtime bound";
    }
    if (on_done)
      on_done(r);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace anyonforge
