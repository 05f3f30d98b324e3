#pragma once

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "anyonforge/connection.hpp"
#include "anyonforge/fusion.hpp"

namespace anyonforge {

/// F-symbols of a multiplicity-free fusion category:
///   ((a b)_e c)_d = sum_f F^{abc}_d[e, f] (a (b c)_f)_d.
/// Missing admissible entries read as zero.
struct FSymbolData {
  FusionRing ring;
  std::map<std::array<int, 6>, cplx> F; ///< key (a, b, c, d, e, f)
  std::string name;

  cplx operator()(int a, int b, int c, int d, int e, int f) const {
    auto it = F.find({a, b, c, d, e, f});
    return it == F.end() ? cplx(0) : it->second;
  }

  bool admissible(int a, int b, int c, int d, int e, int f) const {
    return ring.N(a, b, e) && ring.N(e, c, d) && ring.N(b, c, f) && ring.N(a, f, d);
  }
};

/// max |F^{fcd}_e[g,l] F^{abl}_e[f,k] - sum_h F^{abc}_g[f,h] F^{ahd}_e[g,k] F^{bcd}_k[h,l]|.
inline double pentagon_residual(const FSymbolData &fs) {
  const int r = fs.ring.rank();
  const auto &N = fs.ring;
  double res = 0.0;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d)
          for (int e = 0; e < r; ++e)
            for (int f = 0; f < r; ++f) {
              if (!N.N(a, b, f))
                continue;
              for (int g = 0; g < r; ++g) {
                if (!N.N(f, c, g) || !N.N(g, d, e))
                  continue;
                for (int k = 0; k < r; ++k)
                  for (int l = 0; l < r; ++l) {
                    const cplx lhs = fs(f, c, d, e, g, l) * fs(a, b, l, e, f, k);
                    cplx rhs = 0;
                    for (int h = 0; h < r; ++h)
                      rhs += fs(a, b, c, g, f, h) * fs(a, h, d, e, g, k) * fs(b, c, d, k, h, l);
                    res = std::max(res, std::abs(lhs - rhs));
                  }
              }
            }
  return res;
}

/// Largest unitarity defect over the blocks F^{abc}_d.
inline double f_unitarity_residual(const FSymbolData &fs) {
  const int r = fs.ring.rank();
  double res = 0.0;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) {
          std::vector<int> es, fs_;
          for (int x = 0; x < r; ++x) {
            if (fs.ring.N(a, b, x) && fs.ring.N(x, c, d))
              es.push_back(x);
            if (fs.ring.N(b, c, x) && fs.ring.N(a, x, d))
              fs_.push_back(x);
          }
          if (es.empty() && fs_.empty())
            continue;
          if (es.size() != fs_.size())
            return std::numeric_limits<double>::infinity();
          MatrixXc m(es.size(), fs_.size());
          for (std::size_t i = 0; i < es.size(); ++i)
            for (std::size_t j = 0; j < fs_.size(); ++j)
              m(i, j) = fs(a, b, c, d, es[i], fs_[j]);
          res = std::max(res, linalg::unitarity_residual(m));
        }
  return res;
}

/// vec_zn(n): trivial associator. fibonacci: the (t,t,t;t) block is
/// [[1/phi, phi^{-1/2}], [phi^{-1/2}, -1/phi]], every other admissible entry 1.
inline FSymbolData f_symbols_builtin(const std::string &name) {
  FSymbolData fs;
  fs.name = name;
  if (name == "fibonacci") {
    fs.ring = builtin_fibonacci().ring;
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d)
            for (int e = 0; e < 2; ++e)
              for (int f = 0; f < 2; ++f)
                if (fs.admissible(a, b, c, d, e, f))
                  fs.F[{a, b, c, d, e, f}] = 1.0;
    const double m[2][2] = {{1.0 / phi, 1.0 / std::sqrt(phi)}, {1.0 / std::sqrt(phi), -1.0 / phi}};
    for (int e = 0; e < 2; ++e)
      for (int f = 0; f < 2; ++f)
        fs.F[{1, 1, 1, 1, e, f}] = m[e][f];
    return fs;
  }
  const Builtin b = builtin(name);
  if (b.md.name.rfind("vec_z", 0) != 0)
    throw ParameterError("no built-in F-symbols for '" + name + "'");
  fs.ring = b.ring;
  const int n = fs.ring.rank();
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb)
      for (int c = 0; c < n; ++c)
        fs.F[{a, bb, c, (a + bb + c) % n, (a + bb) % n, (bb + c) % n}] = 1.0;
  return fs;
}

// ---- tube algebra ------------------------------------------------------

struct TubeBasis {
  int x, g, y, c; ///< tube g x -> c -> y g through the channel c
};

/// Tube algebra of a multiplicity-free fusion category. Basis element
/// (x, g, y, c) is nonzero when N_{gx}^c N_{yg}^c; the product
///   (x1,s,y1,c1)(x2,t,y2,c2) = delta_{x1,y2} sum_{r,c}
///       F^{s t x2}_c[r,c2] conj(F^{s x1 t}_c[c1,c2]) F^{y1 s t}_c[c1,r] (x2,r,y1,c)
/// has unit sum_x (x,0,x,x). The *-structure is fixed by the faithful trace
/// tau(x,0,x,x) = d_x and the inner product <e,e> = d_c/d_g.
class TubeAlgebra {
public:
  TubeAlgebra() = default;

  explicit TubeAlgebra(const FSymbolData &fs, double pentagon_tol = 1e-10) : fs_(fs) {
    if (!fs.ring.multiplicity_free())
      throw StructuralError("tube algebra: only multiplicity-free fusion rings are supported");
    pentagon_ = pentagon_residual(fs);
    if (pentagon_ > pentagon_tol)
      throw NumericalError("tube algebra refused: pentagon residual " + std::to_string(pentagon_));
    const auto &N = fs.ring;
    const int r = N.rank();
    dims_ = quantum_dims(N);
    for (int x = 0; x < r; ++x)
      for (int g = 0; g < r; ++g)
        for (int y = 0; y < r; ++y)
          for (int c = 0; c < r; ++c)
            if (N.N(g, x, c) && N.N(y, g, c)) {
              index_[{x, g, y, c}] = static_cast<int>(basis_.size());
              basis_.push_back({x, g, y, c});
            }
    const int D = dim();
    m_.assign(static_cast<std::size_t>(D) * D * D, cplx(0));
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        const auto [x1, s, y1, c1] = basis_[i];
        const auto [x2, t, y2, c2] = basis_[j];
        if (x1 != y2)
          continue;
        for (int rr = 0; rr < r; ++rr)
          for (int c = 0; c < r; ++c) {
            auto it = index_.find({x2, rr, y1, c});
            if (it == index_.end())
              continue;
            const cplx v = fs(s, t, x2, c, rr, c2) * std::conj(fs(s, x1, t, c, c1, c2)) *
                           fs(y1, s, t, c, c1, rr);
            at(i, j, it->second) += v;
          }
      }
    unit_ = VectorXc::Zero(D);
    for (int x = 0; x < r; ++x)
      unit_(index_.at({x, 0, x, x})) = 1.0;
    build_star();
  }

  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<TubeBasis> &basis() const { return basis_; }
  const FSymbolData &f_symbols() const { return fs_; }
  double pentagon() const { return pentagon_; }
  const VectorXc &unit() const { return unit_; }

  cplx structure(int i, int j, int k) const {
    return m_[(static_cast<std::size_t>(i) * dim() + j) * dim() + k];
  }

  VectorXc multiply(const VectorXc &a, const VectorXc &b) const {
    const int D = dim();
    VectorXc out = VectorXc::Zero(D);
    for (int i = 0; i < D; ++i) {
      if (a(i) == cplx(0))
        continue;
      for (int j = 0; j < D; ++j) {
        if (b(j) == cplx(0))
          continue;
        const cplx ab = a(i) * b(j);
        for (int k = 0; k < D; ++k)
          out(k) += ab * structure(i, j, k);
      }
    }
    return out;
  }

  /// (x*)_k = sum_i conj(x_i) C(i, k).
  VectorXc star(const VectorXc &x) const { return star_.transpose() * x.conjugate(); }

  /// Left multiplication by a as a D x D matrix acting on coefficient vectors.
  MatrixXc left_matrix(const VectorXc &a) const {
    const int D = dim();
    MatrixXc l = MatrixXc::Zero(D, D);
    for (int i = 0; i < D; ++i)
      if (a(i) != cplx(0))
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k)
            l(k, j) += a(i) * structure(i, j, k);
    return l;
  }

  /// Right multiplication by a.
  MatrixXc right_matrix(const VectorXc &a) const {
    const int D = dim();
    MatrixXc r = MatrixXc::Zero(D, D);
    for (int l = 0; l < D; ++l)
      if (a(l) != cplx(0))
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k)
            r(k, j) += a(l) * structure(j, l, k);
    return r;
  }

  /// Coefficient vector of the unit of the x-th summand, (x,0,x,x).
  VectorXc vacuum_tube(int x) const { return VectorXc::Unit(dim(), index_.at({x, 0, x, x})); }

  const std::vector<double> &dims() const { return dims_; }

  /// max |(e_i e_j) e_k - e_i (e_j e_k)| over all basis triples.
  double associativity_residual() const {
    const int D = dim();
    double res = 0.0;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        for (int k = 0; k < D; ++k)
          for (int m = 0; m < D; ++m) {
            cplx lhs = 0, rhs = 0;
            for (int p = 0; p < D; ++p) {
              lhs += structure(i, j, p) * structure(p, k, m);
              rhs += structure(j, k, p) * structure(i, p, m);
            }
            res = std::max(res, std::abs(lhs - rhs));
          }
    return res;
  }

  double unit_residual() const {
    double res = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const VectorXc e = VectorXc::Unit(dim(), i);
      res = std::max(res, linalg::max_abs(multiply(unit_, e) - e));
      res = std::max(res, linalg::max_abs(multiply(e, unit_) - e));
    }
    return res;
  }

  /// Anti-multiplicativity and involutivity of * on basis pairs.
  double star_residual() const {
    double res = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const VectorXc a = VectorXc::Unit(dim(), i);
      res = std::max(res, linalg::max_abs(star(star(a)) - a));
      for (int j = 0; j < dim(); ++j) {
        const VectorXc b = VectorXc::Unit(dim(), j);
        res = std::max(res, linalg::max_abs(star(multiply(a, b)) - multiply(star(b), star(a))));
      }
    }
    return res;
  }

  /// Basis of the center (columns), from the null space of x -> [x, e_j].
  std::vector<VectorXc> center(double cutoff = 1e-8) const {
    const int D = dim();
    MatrixXc c(static_cast<Eigen::Index>(D) * D, D);
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k)
        for (int i = 0; i < D; ++i)
          c(static_cast<Eigen::Index>(j) * D + k, i) = structure(i, j, k) - structure(j, i, k);
    return linalg::null_space(c, cutoff);
  }

private:
  cplx &at(int i, int j, int k) { return m_[(static_cast<std::size_t>(i) * dim() + j) * dim() + k]; }

  void build_star() {
    const int D = dim();
    VectorXc tau = VectorXc::Zero(D);
    for (int i = 0; i < D; ++i) {
      const auto &b = basis_[i];
      if (b.g == 0 && b.x == b.y)
        tau(i) = dims_[b.x];
    }
    MatrixXc t(D, D); // tau(e_i e_j)
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        cplx s = 0;
        for (int k = 0; k < D; ++k)
          s += structure(i, j, k) * tau(k);
        t(i, j) = s;
      }
    MatrixXc g = MatrixXc::Zero(D, D);
    for (int i = 0; i < D; ++i)
      g(i, i) = dims_[basis_[i].c] / dims_[basis_[i].g];
    Eigen::FullPivLU<MatrixXc> lu(t);
    if (!lu.isInvertible())
      throw NumericalError("tube algebra: trace form is degenerate");
    star_ = g * lu.inverse();
  }

  FSymbolData fs_;
  std::vector<double> dims_;
  std::vector<TubeBasis> basis_;
  std::map<std::array<int, 4>, int> index_;
  std::vector<cplx> m_;
  VectorXc unit_;
  MatrixXc star_;
  double pentagon_ = 0.0;
};

inline TubeAlgebra tube_algebra(const FSymbolData &fs, double pentagon_tol = 1e-10) {
  return TubeAlgebra(fs, pentagon_tol);
}

struct AnyonSpectrum {
  std::vector<VectorXc> idempotents;
  std::vector<int> block_dims;
  std::vector<double> eigenvalues;
  /// d(Z_i) = sum_x m_x d_x, m_x the multiplicity of x in the restriction of Z_i.
  std::vector<double> quantum_dims;
  int center_dim = 0;
  int attempts = 0;
  double idempotent_residual = 0.0; ///< e_i e_j = delta_ij e_i and sum e_i = 1
  int count() const { return static_cast<int>(block_dims.size()); }
  int dimension_sum() const {
    int s = 0;
    for (int n : block_dims)
      s += n * n;
    return s;
  }
};

struct AnyonOptions {
  std::uint64_t seed = 20240611;
  int retries = 5;
  double merge = 1e-6;    ///< eigenvalues closer than this coincide
  double separate = 1e-3; ///< distinct eigenvalues must be at least this far apart
};

/// Central decomposition: the eigenspaces of left multiplication by a random
/// self-adjoint central element. Each distinct eigenvalue is one anyon; its
/// multiplicity is the square of the block dimension.
inline AnyonSpectrum anyons(const TubeAlgebra &t, const AnyonOptions &opt = {}) {
  const auto basis = t.center();
  const int D = t.dim();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  for (int attempt = 1; attempt <= opt.retries + 1; ++attempt) {
    VectorXc z = VectorXc::Zero(D);
    for (const auto &b : basis)
      z += cplx(gauss(rng), gauss(rng)) * b;
    z = z + t.star(z);
    Eigen::ComplexEigenSolver<MatrixXc> es(t.left_matrix(z), false);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      ev.push_back(es.eigenvalues()(i).real());
    std::sort(ev.begin(), ev.end());
    std::vector<std::pair<double, int>> clusters;
    bool ambiguous = false;
    for (double x : ev) {
      if (!clusters.empty() && x - clusters.back().first < opt.merge) {
        ++clusters.back().second;
        continue;
      }
      if (!clusters.empty() && x - clusters.back().first < opt.separate)
        ambiguous = true;
      clusters.emplace_back(x, 1);
    }
    if (ambiguous || static_cast<int>(clusters.size()) != static_cast<int>(basis.size()))
      continue;
    AnyonSpectrum out;
    out.center_dim = static_cast<int>(basis.size());
    out.attempts = attempt;
    bool square = true;
    for (const auto &[x, m] : clusters) {
      const int n = static_cast<int>(std::lround(std::sqrt(double(m))));
      square = square && n * n == m;
      out.block_dims.push_back(n);
      out.eigenvalues.push_back(x);
    }
    if (!square)
      throw NumericalError("anyons: eigenvalue multiplicity is not a square");
    // z restricted to the center has one simple eigenvalue per anyon; its
    // eigenvectors are the minimal central idempotents up to scale
    const int dc = static_cast<int>(basis.size());
    MatrixXc b(D, dc);
    for (int i = 0; i < dc; ++i)
      b.col(i) = basis[i];
    const MatrixXc zc = b.colPivHouseholderQr().solve(t.left_matrix(z) * b);
    Eigen::ComplexEigenSolver<MatrixXc> ces(zc);
    std::vector<VectorXc> found(clusters.size());
    for (int i = 0; i < dc; ++i) {
      const double l = ces.eigenvalues()(i).real();
      std::size_t best = 0;
      for (std::size_t c = 1; c < clusters.size(); ++c)
        if (std::abs(clusters[c].first - l) < std::abs(clusters[best].first - l))
          best = c;
      if (found[best].size() != 0)
        throw NumericalError("anyons: central eigenvalues do not match the spectrum");
      VectorXc v = b * ces.eigenvectors().col(i);
      const VectorXc vv = t.multiply(v, v);
      Eigen::Index k = 0;
      v.cwiseAbs().maxCoeff(&k);
      found[best] = v * (v(k) / vv(k));
    }
    VectorXc total = VectorXc::Zero(D);
    for (auto &e : found) {
      total += e;
      out.idempotents.push_back(std::move(e));
    }
    double res = linalg::max_abs(total - t.unit());
    for (std::size_t i = 0; i < out.idempotents.size(); ++i)
      for (std::size_t j = 0; j < out.idempotents.size(); ++j) {
        const VectorXc p = t.multiply(out.idempotents[i], out.idempotents[j]);
        res = std::max(res, linalg::max_abs(i == j ? VectorXc(p - out.idempotents[i]) : p));
      }
    out.idempotent_residual = res;
    const int r = t.f_symbols().ring.rank();
    for (std::size_t i = 0; i < out.idempotents.size(); ++i) {
      double d = 0.0;
      for (int x = 0; x < r; ++x) {
        const VectorXc q = t.multiply(t.vacuum_tube(x), out.idempotents[i]);
        Eigen::JacobiSVD<MatrixXc> svd(t.right_matrix(q));
        const auto &sv = svd.singularValues();
        const int rank = static_cast<int>((sv.array() > 1e-8 * std::max(1.0, sv(0))).count());
        d += double(rank) / out.block_dims[i] * t.dims()[x];
      }
      out.quantum_dims.push_back(d);
    }
    return out;
  }
  throw NumericalError("anyons: central spectrum stayed degenerate after retries");
}

struct DoubleCrossCheck {
  bool count = false;       ///< anyon count equals the label count of md
  bool block_sum = false;   ///< sum of squared block dims equals the tube dimension
  bool quantum_dims = false; ///< sorted anyon dimensions agree with md's within 1e-6
  bool verlinde = false;    ///< md's Verlinde ring satisfies the fusion axioms
  int anyons = 0;
  int labels = 0;
  double dim_deviation = 0.0;
  bool pass() const { return count && block_sum && quantum_dims && verlinde; }
};

inline DoubleCrossCheck cross_check_double(const TubeAlgebra &t, const ModularData &md,
                                           const AnyonOptions &opt = {}) {
  DoubleCrossCheck r;
  const auto sp = anyons(t, opt);
  r.anyons = sp.count();
  r.labels = md.rank();
  r.count = r.anyons == r.labels;
  r.block_sum = sp.dimension_sum() == t.dim();
  if (r.count) {
    auto a = sp.quantum_dims;
    auto b = md.quantum_dims();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i)
      r.dim_deviation = std::max(r.dim_deviation, std::abs(a[i] - b[i]));
    r.quantum_dims = r.dim_deviation < 1e-6;
  }
  try {
    r.verlinde = verlinde(md).axiom_violation() == 0;
  } catch (const Error &) {
    r.verlinde = false;
  }
  return r;
}

// ---- F-symbols from a connection family --------------------------------

namespace detail {

/// Isometry E_c -> pairs(E_a, E_b) intertwining member c into the composite,
/// or an empty matrix when c does not occur. Unit factors use the canonical
/// embedding.
inline MatrixXc member_isometry(const ConnectionFamily &fam, int a, int b, int c,
                                const ConnectionOptions &opt) {
  const auto &ca = fam.members[a].connection, &cb = fam.members[b].connection,
             &cc = fam.members[c].connection;
  const auto pairs = composite_edges(ca, cb);
  if (a == 0 || b == 0) {
    if (c != (a == 0 ? b : a))
      return {};
    MatrixXc v = MatrixXc::Zero(pairs.size(), cc.num_edges());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      v(i, a == 0 ? pairs[i].second : pairs[i].first) = 1.0;
    return v;
  }
  MatrixXc found;
  for (const auto &part : decompose(compose_horizontal(ca, cb), opt)) {
    auto u = unitary_intertwiner(cc, part.irreducible, opt);
    if (!u)
      continue;
    if (part.multiplicity != 1 || found.size() != 0)
      throw StructuralError("F-symbols from connections need multiplicity-free fusion");
    found = part.isometries.front() * *u;
  }
  return found;
}

} // namespace detail

/// F-symbols of the even part of a closed family, read off from the two ways
/// of embedding W_d into W_a W_b W_c.
inline FSymbolData f_symbols_from_family(const ConnectionFamily &family,
                                         const ConnectionOptions &opt = {}) {
  if (!family.closed)
    throw StructuralError("connection family is not closed");
  const ConnectionFamily fam = family.even_part();
  const int r = fam.size();
  std::vector<std::string> labels;
  std::vector<int> n(r * r * r);
  for (int a = 0; a < r; ++a) {
    labels.push_back(fam.members[a].label);
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        n[(a * r + b) * r + c] = fam.fusion[a][b][c];
  }
  FSymbolData fs;
  fs.name = "connections";
  fs.ring = FusionRing(labels, n);
  if (!fs.ring.multiplicity_free())
    throw StructuralError("F-symbols from connections need multiplicity-free fusion");

  std::map<std::array<int, 3>, MatrixXc> iso;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        if (fs.ring.N(a, b, c))
          iso[{a, b, c}] = detail::member_isometry(fam, a, b, c, opt);

  const auto &m = fam.members;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) {
        // Triples (x, y, z) of consecutive edges in W_a, W_b, W_c.
        std::map<std::array<int, 3>, int> trip;
        const auto &ea = m[a].connection, &eb = m[b].connection, &ec = m[c].connection;
        for (int x = 0; x < ea.num_edges(); ++x)
          for (int y = 0; y < eb.num_edges(); ++y)
            if (ea.edge(x).dst == eb.edge(y).src)
              for (int z = 0; z < ec.num_edges(); ++z)
                if (eb.edge(y).dst == ec.edge(z).src)
                  trip.emplace(std::array<int, 3>{x, y, z}, static_cast<int>(trip.size()));
        const auto pab = composite_edges(ea, eb), pbc = composite_edges(eb, ec);
        for (int d = 0; d < r; ++d)
          for (int e = 0; e < r; ++e)
            for (int f = 0; f < r; ++f) {
              if (!fs.admissible(a, b, c, d, e, f))
                continue;
              const auto &vab = iso.at({a, b, e}), &vec = iso.at({e, c, d});
              const auto &vbc = iso.at({b, c, f}), &vaf = iso.at({a, f, d});
              const auto pec = composite_edges(m[e].connection, ec);
              const auto paf = composite_edges(ea, m[f].connection);
              MatrixXc L = MatrixXc::Zero(trip.size(), pec.size());
              for (std::size_t i = 0; i < pec.size(); ++i) {
                const auto [u, z] = pec[i];
                for (std::size_t q = 0; q < pab.size(); ++q) {
                  auto it = trip.find({pab[q].first, pab[q].second, z});
                  if (it != trip.end())
                    L(it->second, i) += vab(q, u);
                }
              }
              MatrixXc R = MatrixXc::Zero(trip.size(), paf.size());
              for (std::size_t i = 0; i < paf.size(); ++i) {
                const auto [x, u] = paf[i];
                for (std::size_t q = 0; q < pbc.size(); ++q) {
                  auto it = trip.find({x, pbc[q].first, pbc[q].second});
                  if (it != trip.end())
                    R(it->second, i) += vbc(q, u);
                }
              }
              const MatrixXc s = (R * vaf).adjoint() * (L * vec);
              const cplx val = s.trace() / double(s.rows());
              if (linalg::max_abs(s - val * MatrixXc::Identity(s.rows(), s.cols())) > 1e-8)
                throw NumericalError("F-symbol overlap is not scalar");
              fs.F[{a, b, c, d, e, f}] = val;
            }
      }
  return fs;
}

/// Number of anyons of the tube algebra built from the family's own
/// F-symbols.
inline int anyon_count_from_connections(const ConnectionFamily &family,
                                        const ConnectionOptions &copt = {},
                                        const AnyonOptions &aopt = {}) {
  if (!family.closed)
    throw StructuralError("anyon count refused: connection family is not closed");
  return anyons(tube_algebra(f_symbols_from_family(family, copt)), aopt).count();
}

// ---- JSON --------------------------------------------------------------

inline nlohmann::json to_json(const FSymbolData &fs) {
  nlohmann::json j;
  if (!fs.name.empty())
    j["name"] = fs.name;
  j["ring"] = to_json(fs.ring);
  auto f = nlohmann::json::array();
  for (const auto &[k, v] : fs.F) {
    nlohmann::json row = nlohmann::json::array();
    for (int x : k)
      row.push_back(fs.ring.label(x));
    row.push_back(v.real());
    row.push_back(v.imag());
    f.push_back(std::move(row));
  }
  j["F"] = std::move(f);
  return j;
}

inline FSymbolData f_symbols_from_json(const nlohmann::json &j) {
  FSymbolData fs;
  fs.name = j.value("name", "");
  fs.ring = fusion_ring_from_json(j.at("ring"));
  for (const auto &row : j.at("F")) {
    if (!row.is_array() || row.size() < 7)
      throw ParameterError("F entries are [a,b,c,d,e,f,re(,im)]");
    std::array<int, 6> k{};
    for (int i = 0; i < 6; ++i)
      k[i] = fs.ring.index_of(row[i].get<std::string>());
    fs.F[k] = cplx(row[6].get<double>(), row.size() > 7 ? row[7].get<double>() : 0.0);
  }
  return fs;
}

} // namespace anyonforge
