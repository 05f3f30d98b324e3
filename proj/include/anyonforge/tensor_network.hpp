#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "anyonforge/connection.hpp"
#include "anyonforge/graph.hpp"

namespace anyonforge {

/// Four-leg tensor b(a, b, s, r): a = top virtual, b = bottom virtual,
/// s = ket (output) physical, r = bra (input) physical.
class Tensor4 {
public:
  struct Entry {
    int a, b, s, r;
    cplx value;
  };

  Tensor4() = default;
  Tensor4(int top, int bottom, int ket, int bra)
      : top_(top), bottom_(bottom), ket_(ket), bra_(bra),
        data_(static_cast<std::size_t>(top) * bottom * ket * bra, cplx(0)) {
    if (top < 1 || bottom < 1 || ket < 1 || bra < 1)
      throw ParameterError("tensor index sets must be nonempty");
  }

  int top() const { return top_; }
  int bottom() const { return bottom_; }
  int ket() const { return ket_; }
  int bra() const { return bra_; }

  cplx &operator()(int a, int b, int s, int r) { return data_[offset(a, b, s, r)]; }
  cplx operator()(int a, int b, int s, int r) const { return data_[offset(a, b, s, r)]; }

  std::vector<Entry> nonzeros() const {
    std::vector<Entry> out;
    for (int a = 0; a < top_; ++a)
      for (int b = 0; b < bottom_; ++b)
        for (int s = 0; s < ket_; ++s)
          for (int r = 0; r < bra_; ++r) {
            const cplx v = (*this)(a, b, s, r);
            if (v != cplx(0))
              out.push_back({a, b, s, r, v});
          }
    return out;
  }

  /// Bond dimension 1, b(0,0,s,r) = delta_{sr}.
  static Tensor4 identity(int d) {
    Tensor4 t(1, 1, d, d);
    for (int s = 0; s < d; ++s)
      t(0, 0, s, s) = 1.0;
    return t;
  }

private:
  std::size_t offset(int a, int b, int s, int r) const {
    return ((static_cast<std::size_t>(a) * bottom_ + b) * ket_ + s) * bra_ + r;
  }

  int top_ = 0, bottom_ = 0, ket_ = 0, bra_ = 0;
  std::vector<cplx> data_;
};

/// Periodic chain of four-leg tensors; site i's bottom bond meets site
/// (i+1)'s top bond and the last bottom bond closes onto the first top bond.
struct MPO {
  std::vector<Tensor4> sites;

  int length() const { return static_cast<int>(sites.size()); }

  void validate() const {
    if (sites.empty())
      throw ParameterError("MPO needs at least one site");
    for (int i = 0; i < length(); ++i)
      if (sites[i].bottom() != sites[(i + 1) % length()].top())
        throw ParameterError("MPO bond dimensions do not match");
  }

  /// Product of ket dimensions, as a double (may exceed 2^64).
  double ambient_dimension() const {
    double d = 1.0;
    for (const auto &t : sites)
      d *= t.ket();
    return d;
  }

  static MPO identity(int d, int k) {
    MPO m;
    for (int i = 0; i < k; ++i)
      m.sites.push_back(Tensor4::identity(d));
    return m;
  }
};

/// Three-leg MPS site a^l(a, b).
struct Tensor3 {
  int left = 0, right = 0, phys = 0;
  std::vector<MatrixXc> mats; ///< one left x right matrix per physical label
};

struct MPS {
  std::vector<Tensor3> sites;
  int length() const { return static_cast<int>(sites.size()); }
};

/// Tr(a^{l_1} ... a^{l_n}).
inline cplx mps_amplitude(const MPS &m, const std::vector<int> &labels) {
  if (static_cast<int>(labels.size()) != m.length() || labels.empty())
    throw ParameterError("label list length must equal the chain length");
  MatrixXc prod;
  for (int i = 0; i < m.length(); ++i) {
    const auto &site = m.sites[i];
    if (labels[i] < 0 || labels[i] >= site.phys)
      throw ParameterError("physical label out of range");
    const MatrixXc &a = site.mats.at(labels[i]);
    if (i == 0)
      prod = a;
    else if (prod.cols() != a.rows())
      throw ParameterError("MPS bond dimensions do not match");
    else
      prod = prod * a;
  }
  if (prod.rows() != prod.cols())
    throw ParameterError("MPS does not close periodically");
  return prod.trace();
}

namespace detail {

inline std::vector<std::size_t> strides(const std::vector<int> &dims) {
  std::vector<std::size_t> st(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    st[i] = st[i + 1] * dims[i + 1];
  return st;
}

} // namespace detail

/// (P v)_s = sum_r Tr(prod_i b_i(s_i, r_i)) v_r, site 0 the most significant
/// digit. Works site by site on a (bond x vector) buffer, one closing bond
/// value at a time; the dense matrix is never formed.
inline VectorXc mpo_apply(const MPO &p, const VectorXc &v) {
  p.validate();
  const int k = p.length();
  std::vector<int> bra_dims, ket_dims;
  double in_size = 1.0;
  for (const auto &t : p.sites) {
    bra_dims.push_back(t.bra());
    ket_dims.push_back(t.ket());
    in_size *= t.bra();
  }
  if (in_size != static_cast<double>(v.size()))
    throw ParameterError("vector dimension does not match the MPO");
  std::vector<std::vector<Tensor4::Entry>> nz;
  for (const auto &t : p.sites)
    nz.push_back(t.nonzeros());

  double out_size = 1.0;
  for (int d : ket_dims)
    out_size *= d;
  VectorXc out = VectorXc::Zero(static_cast<Eigen::Index>(out_size));

  const int d0 = p.sites[0].top();
  for (int a0 = 0; a0 < d0; ++a0) {
    // Digits 0..i-1 are ket indices, i..k-1 bra indices.
    std::vector<int> dims = bra_dims;
    // Bond values never reached from a0 stay empty and are skipped.
    std::vector<VectorXc> x(d0);
    x[a0] = v;
    for (int i = 0; i < k; ++i) {
      const auto st_old = detail::strides(dims);
      std::vector<int> new_dims = dims;
      new_dims[i] = ket_dims[i];
      const auto st_new = detail::strides(new_dims);
      std::size_t total_new = 1;
      for (int d : new_dims)
        total_new *= d;
      // Decompose flat index as (hi, digit_i, lo).
      const std::size_t lo = st_old[i];
      std::size_t hi = 1;
      for (int j = 0; j < i; ++j)
        hi *= dims[j];
      std::vector<VectorXc> y(p.sites[i].bottom());
      for (const auto &e : nz[i]) {
        const VectorXc &src = x[e.a];
        if (src.size() == 0)
          continue;
        VectorXc &dst = y[e.b];
        if (dst.size() == 0)
          dst = VectorXc::Zero(total_new);
        for (std::size_t h = 0; h < hi; ++h) {
          const std::size_t so = h * st_old[i] * dims[i] + e.r * lo;
          const std::size_t dn = h * st_new[i] * new_dims[i] + e.s * lo;
          for (std::size_t l = 0; l < lo; ++l)
            dst[dn + l] += e.value * src[so + l];
        }
      }
      x = std::move(y);
      dims = std::move(new_dims);
    }
    if (x[a0].size() != 0)
      out += x[a0];
  }
  return out;
}

/// Tr of the dense realization through transfer matrices T_i = sum_l b_i(., ., l, l).
inline cplx mpo_trace(const MPO &p) {
  p.validate();
  MatrixXc prod;
  for (int i = 0; i < p.length(); ++i) {
    const auto &t = p.sites[i];
    if (t.ket() != t.bra())
      throw ParameterError("trace needs square physical legs");
    MatrixXc m = MatrixXc::Zero(t.top(), t.bottom());
    for (int a = 0; a < t.top(); ++a)
      for (int b = 0; b < t.bottom(); ++b)
        for (int l = 0; l < t.ket(); ++l)
          m(a, b) += t(a, b, l, l);
    prod = i == 0 ? m : MatrixXc(prod * m);
  }
  return prod.trace();
}

/// Sitewise product (p q)_i(s, r) = sum_t p_i(s, t) q_i(t, r); bonds are
/// paired as a * q_dim + a'.
inline MPO mpo_multiply(const MPO &p, const MPO &q) {
  p.validate();
  q.validate();
  if (p.length() != q.length())
    throw ParameterError("MPO lengths differ");
  MPO out;
  for (int i = 0; i < p.length(); ++i) {
    const auto &x = p.sites[i], &y = q.sites[i];
    if (x.bra() != y.ket())
      throw ParameterError("MPO physical dimensions differ");
    Tensor4 t(x.top() * y.top(), x.bottom() * y.bottom(), x.ket(), y.bra());
    const auto ny = y.nonzeros();
    for (const auto &ex : x.nonzeros())
      for (const auto &ey : ny)
        if (ex.r == ey.s)
          t(ex.a * y.top() + ey.a, ex.b * y.bottom() + ey.b, ex.s, ey.r) += ex.value * ey.value;
    out.sites.push_back(std::move(t));
  }
  return out;
}

using SparseMatrixXc = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::int64_t>;

/// Exact operator as a sparse matrix, found by walking only nonzero site
/// entries. Refuses operators wider than 2^26.
inline SparseMatrixXc sparse_realization(const MPO &p) {
  p.validate();
  const int k = p.length();
  double rows = 1.0, cols = 1.0;
  for (const auto &t : p.sites) {
    rows *= t.ket();
    cols *= t.bra();
  }
  if (rows > double(1 << 26) || cols > double(1 << 26))
    throw SizeError("sparse realization refused: operator too large");
  std::vector<std::vector<Tensor4::Entry>> nz;
  for (const auto &t : p.sites)
    nz.push_back(t.nonzeros());
  std::map<std::pair<std::int64_t, std::int64_t>, cplx> acc;
  const int d0 = p.sites[0].top();

  // Depth-first over sites carrying the row vector (a0 fixed) of the partial product.
  for (int a0 = 0; a0 < d0; ++a0) {
    VectorXc start = VectorXc::Zero(d0);
    start(a0) = 1.0;
    std::function<void(int, std::int64_t, std::int64_t, const VectorXc &)> walk =
        [&](int i, std::int64_t s, std::int64_t r, const VectorXc &row) {
          if (i == k) {
            if (row(a0) != cplx(0))
              acc[{s, r}] += row(a0);
            return;
          }
          const auto &t = p.sites[i];
          std::map<std::pair<int, int>, VectorXc> next;
          for (const auto &e : nz[i]) {
            if (row(e.a) == cplx(0))
              continue;
            auto it = next.find({e.s, e.r});
            if (it == next.end())
              it = next.emplace(std::make_pair(e.s, e.r), VectorXc::Zero(t.bottom())).first;
            it->second(e.b) += row(e.a) * e.value;
          }
          for (const auto &[sr, nrow] : next)
            walk(i + 1, s * t.ket() + sr.first, r * t.bra() + sr.second, nrow);
        };
    walk(0, 0, 0, start);
  }
  std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
  for (const auto &[rc, v] : acc)
    if (v != cplx(0))
      trips.emplace_back(rc.first, rc.second, v);
  SparseMatrixXc m(static_cast<std::int64_t>(rows), static_cast<std::int64_t>(cols));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

constexpr double kDenseLimit = 16384.0; // 2^14

/// Dense matrix of the MPO; only for physical dimension^k <= 2^14.
inline MatrixXc dense_realization(const MPO &p) {
  if (p.ambient_dimension() > kDenseLimit)
    throw SizeError("dense realization refused above 2^14");
  return MatrixXc(sparse_realization(p));
}

// ---- connections as tensors ---------------------------------------------

/// Cell tensor b(e, f, s, r) with e the top horizontal edge, f the bottom one,
/// s the left vertical edge and r the right vertical edge (indices into
/// Graph::edges()). Values carry the weight
/// mu(j)^{1/4} mu(m)^{1/4} / (mu(k)^{1/4} mu(l)^{1/4}).
inline Tensor4 connection_to_tensor(const BiUnitaryConnection &c, const PFData &pf) {
  const Graph &g = c.vertical();
  const int ne = c.num_edges(), nv = static_cast<int>(g.edges().size());
  Tensor4 t(ne, ne, nv, nv);
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < ne; ++f) {
      if (!c.geometric(e, f) || c.amplitude(e, f) == cplx(0))
        continue;
      const int j = c.edge(e).src, k = c.edge(e).dst, l = c.edge(f).src, m = c.edge(f).dst;
      const double w = std::pow(pf.mu[j] * pf.mu[m] / (pf.mu[k] * pf.mu[l]), 0.25);
      t(e, f, g.edge_index(j, l), g.edge_index(k, m)) = w * c.amplitude(e, f);
    }
  return t;
}

/// Undoes the fourth-root weight of connection_to_tensor on the cells of c.
inline BiUnitaryConnection tensor_to_connection(const Tensor4 &t, const BiUnitaryConnection &c,
                                                const PFData &pf) {
  const Graph &g = c.vertical();
  MatrixXc w = MatrixXc::Zero(c.num_edges(), c.num_edges());
  for (int e = 0; e < c.num_edges(); ++e)
    for (int f = 0; f < c.num_edges(); ++f) {
      if (!c.geometric(e, f))
        continue;
      const int j = c.edge(e).src, k = c.edge(e).dst, l = c.edge(f).src, m = c.edge(f).dst;
      const double wt = std::pow(pf.mu[j] * pf.mu[m] / (pf.mu[k] * pf.mu[l]), 0.25);
      w(e, f) = t(e, f, g.edge_index(j, l), g.edge_index(k, m)) / wt;
    }
  return BiUnitaryConnection(g, c.edges(), std::move(w));
}

/// One PMPO site: an even row of cells over an odd row. Bonds are the
/// horizontal edges leaving even vertices; the ket and bra legs are the pairs
/// (upper, lower) of left and right vertical edges, flattened as upper*E+lower.
inline Tensor4 pmpo_site(const BiUnitaryConnection &c, const PFData &pf) {
  const Graph &g = c.vertical();
  if (!g.bipartite())
    throw StructuralError("PMPO sites need a bipartite vertical graph");
  const auto &par = g.parity();
  std::vector<int> bond;
  for (int e = 0; e < c.num_edges(); ++e)
    if (par[c.edge(e).src] == 0)
      bond.push_back(e);
  if (bond.empty())
    throw StructuralError("PMPO site has an empty bond");
  const Tensor4 cell = connection_to_tensor(c, pf);
  const int ne = static_cast<int>(g.edges().size());
  std::vector<int> bond_pos(c.num_edges(), -1);
  for (std::size_t i = 0; i < bond.size(); ++i)
    bond_pos[bond[i]] = static_cast<int>(i);
  const int nb = static_cast<int>(bond.size());
  Tensor4 t(nb, nb, ne * ne, ne * ne);
  const auto nz = cell.nonzeros();
  for (const auto &up : nz) {
    if (bond_pos[up.a] < 0)
      continue;
    for (const auto &lo : nz) {
      if (lo.a != up.b || bond_pos[lo.b] < 0)
        continue;
      t(bond_pos[up.a], bond_pos[lo.b], up.s * ne + lo.s, up.r * ne + lo.r) += up.value * lo.value;
    }
  }
  return t;
}

/// P = sum over the even members of d_a / (sum_b d_b^2) O_a, with O_a the
/// length-k chain of pmpo_site(W_a). Members are stacked as a direct sum of
/// bonds; the weight sits on site 0.
inline MPO pmpo(const ConnectionFamily &family, int k) {
  if (!family.closed)
    throw StructuralError("pmpo refused: connection family is not closed");
  if (k < 1)
    throw ParameterError("pmpo length must be >= 1");
  const ConnectionFamily even = family.even_part();
  const PFData pf = pf_data(even.members.front().connection.vertical());
  const double total = even.global_dimension();
  std::vector<Tensor4> blocks;
  std::vector<double> weights;
  int bond = 0;
  for (const auto &m : even.members) {
    blocks.push_back(pmpo_site(m.connection, pf));
    weights.push_back(m.dimension / total);
    bond += blocks.back().top();
  }
  const int phys = blocks.front().ket();
  MPO out;
  for (int i = 0; i < k; ++i) {
    Tensor4 t(bond, bond, phys, phys);
    int off = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double w = i == 0 ? weights[b] : 1.0;
      for (const auto &e : blocks[b].nonzeros())
        t(off + e.a, off + e.b, e.s, e.r) = w * e.value;
      off += blocks[b].top();
    }
    out.sites.push_back(std::move(t));
  }
  return out;
}

struct RankReport {
  double value = 0.0;
  double imag = 0.0;
  long long nearest = 0;
  double distance = 0.0;
  bool integral(double tol = 1e-4) const { return distance <= tol; }
};

/// Trace of the PMPO, i.e. its rank when it is a projector.
inline RankReport pmpo_rank(const ConnectionFamily &family, int k) {
  const cplx tr = mpo_trace(pmpo(family, k));
  RankReport r;
  r.value = tr.real();
  r.imag = tr.imag();
  r.nearest = std::llround(tr.real());
  r.distance = std::abs(tr - cplx(double(r.nearest), 0.0));
  return r;
}

// ---- JSON --------------------------------------------------------------

inline nlohmann::json to_json(const Tensor4 &t) {
  nlohmann::json j;
  j["shape"] = {t.top(), t.bottom(), t.ket(), t.bra()};
  auto entries = nlohmann::json::array();
  for (const auto &e : t.nonzeros())
    entries.push_back({e.a, e.b, e.s, e.r, e.value.real(), e.value.imag()});
  j["entries"] = std::move(entries);
  return j;
}

inline Tensor4 tensor_from_json(const nlohmann::json &j) {
  const auto &sh = j.at("shape");
  Tensor4 t(sh.at(0), sh.at(1), sh.at(2), sh.at(3));
  for (const auto &e : j.at("entries")) {
    const int a = e.at(0), b = e.at(1), s = e.at(2), r = e.at(3);
    if (a < 0 || a >= t.top() || b < 0 || b >= t.bottom() || s < 0 || s >= t.ket() || r < 0 ||
        r >= t.bra())
      throw ParameterError("tensor entry out of range");
    t(a, b, s, r) = cplx(e.at(4).get<double>(), e.at(5).get<double>());
  }
  return t;
}

inline nlohmann::json to_json(const MPO &p) {
  auto sites = nlohmann::json::array();
  for (const auto &t : p.sites)
    sites.push_back(to_json(t));
  return {{"sites", std::move(sites)}};
}

} // namespace anyonforge
