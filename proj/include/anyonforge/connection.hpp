#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anyonforge/graph.hpp"
#include "anyonforge/linalg.hpp"

namespace anyonforge {

/// Directed horizontal edge from a left-corner vertex to a right-corner vertex
/// of the vertical graph. Parallel edges are distinct entries.
struct HorizontalEdge {
  int src = 0;
  int dst = 0;
  friend bool operator==(const HorizontalEdge &, const HorizontalEdge &) = default;
};

/// A connection in translation-invariant form: one vertical graph (left and
/// right sides of every cell) and one list of horizontal edges (top and
/// bottom). The amplitude of the cell
///
///        j --e--> k
///        |        |
///        l --f--> m
///
/// is `amplitude(e, f)`; it vanishes unless j-l and k-m are vertical edges.
class BiUnitaryConnection {
public:
  BiUnitaryConnection() = default;

  BiUnitaryConnection(Graph vertical, std::vector<HorizontalEdge> edges,
                      MatrixXc w)
      : vertical_(std::move(vertical)), edges_(std::move(edges)),
        w_(std::move(w)) {
    if (!vertical_.simple())
      throw StructuralError("connections need a simple vertical graph");
    const int ne = num_edges();
    if (w_.rows() != ne || w_.cols() != ne)
      throw ParameterError("amplitude matrix must be |H| x |H|");
    for (const auto &e : edges_)
      if (e.src < 0 || e.dst < 0 || e.src >= vertical_.size() ||
          e.dst >= vertical_.size())
        throw ParameterError("horizontal edge endpoint out of range");
    for (int e = 0; e < ne; ++e)
      for (int f = 0; f < ne; ++f)
        if (!geometric(e, f) && std::abs(w_(e, f)) > 0)
          throw StructuralError("nonzero amplitude on a cell whose vertical "
                                "sides are not edges");
  }

  const Graph &vertical() const { return vertical_; }
  const std::vector<HorizontalEdge> &edges() const { return edges_; }
  const HorizontalEdge &edge(int e) const { return edges_.at(e); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const MatrixXc &amplitudes() const { return w_; }
  cplx amplitude(int e, int f) const { return w_(e, f); }

  /// True when top edge e and bottom edge f close up into a cell.
  bool geometric(int e, int f) const {
    return vertical_.adjacent(edges_[e].src, edges_[f].src) &&
           vertical_.adjacent(edges_[e].dst, edges_[f].dst);
  }

  /// First horizontal edge src -> dst, or -1.
  int find_edge(int src, int dst) const {
    for (int e = 0; e < num_edges(); ++e)
      if (edges_[e].src == src && edges_[e].dst == dst)
        return e;
    return -1;
  }

  /// Cell value by corner vertices (first parallel edge on top and bottom).
  cplx cell(int j, int k, int l, int m) const {
    const int e = find_edge(j, k), f = find_edge(l, m);
    if (e < 0 || f < 0)
      throw ParameterError("cell corners do not match horizontal edges");
    if (!vertical_.adjacent(j, l) || !vertical_.adjacent(k, m))
      throw ParameterError("cell corners do not match vertical edges");
    return w_(e, f);
  }

  /// Number of horizontal edges src -> dst, as a |V| x |V| matrix.
  MatrixXd edge_counts() const {
    MatrixXd m = MatrixXd::Zero(vertical_.size(), vertical_.size());
    for (const auto &e : edges_)
      m(e.src, e.dst) += 1.0;
    return m;
  }

  std::string label;

private:
  Graph vertical_;
  std::vector<HorizontalEdge> edges_;
  MatrixXc w_;
};

inline bool same_vertical(const BiUnitaryConnection &a,
                          const BiUnitaryConnection &b) {
  return a.vertical().labels() == b.vertical().labels() &&
         a.vertical().adjacency() == b.vertical().adjacency();
}

/// The unit connection: one horizontal loop j -> j per vertex, amplitude 1 on
/// every geometric cell.
inline BiUnitaryConnection identity_connection(const Graph &g) {
  std::vector<HorizontalEdge> edges;
  for (int v = 0; v < g.size(); ++v)
    edges.push_back({v, v});
  MatrixXc w = MatrixXc::Zero(g.size(), g.size());
  for (int j = 0; j < g.size(); ++j)
    for (int l = 0; l < g.size(); ++l)
      if (g.adjacent(j, l))
        w(j, l) = 1.0;
  BiUnitaryConnection c(g, std::move(edges), std::move(w));
  c.label = "id";
  return c;
}

/// Horizontal edges of a connection whose horizontal graph is the vertical
/// graph itself, both orientations, ordered by (src, dst).
inline std::vector<HorizontalEdge> doubled_edges(const Graph &g) {
  std::vector<HorizontalEdge> edges;
  for (int j = 0; j < g.size(); ++j)
    for (int k = 0; k < g.size(); ++k)
      if (g.adjacent(j, k))
        edges.push_back({j, k});
  return edges;
}

/// The flat connection on A_n:
///   W(j,k,l,m) = delta_{kl} eps + sqrt(mu(k)mu(l)/(mu(j)mu(m))) delta_{jm} conj(eps)
/// with eps = i exp(i pi / (2(n+1))) and mu the Perron-Frobenius weight.
inline BiUnitaryConnection flat_connection_a_n(int n) {
  if (n < 2)
    throw ParameterError("flat_connection_a_n needs n >= 2");
  Graph g = dynkin('A', n);
  const PFData pf = pf_data(g);
  const cplx eps = cplx(0, 1) * std::polar(1.0, std::numbers::pi / (2.0 * (n + 1)));
  auto edges = doubled_edges(g);
  const int ne = static_cast<int>(edges.size());
  MatrixXc w = MatrixXc::Zero(ne, ne);
  for (int e = 0; e < ne; ++e) {
    const auto [j, k] = edges[e];
    for (int f = 0; f < ne; ++f) {
      const auto [l, m] = edges[f];
      if (!g.adjacent(j, l) || !g.adjacent(k, m))
        continue;
      cplx v = 0;
      if (k == l)
        v += eps;
      if (j == m)
        v += std::sqrt(pf.mu[k] * pf.mu[l] / (pf.mu[j] * pf.mu[m])) * std::conj(eps);
      w(e, f) = v;
    }
  }
  BiUnitaryConnection c(std::move(g), std::move(edges), std::move(w));
  c.label = "W";
  return c;
}

// ---- bi-unitarity ------------------------------------------------------

struct BiunitarityReport {
  double unitarity = 0.0;  ///< max residual of the (j,m) blocks
  double reflection = 0.0; ///< max residual of the renormalized (k,l) blocks
  double max() const { return std::max(unitarity, reflection); }
  bool ok(double tol) const { return max() < tol; }
};

/// Unitarity of the (j,m) block: rows are top edges e = j->k with k-m vertical,
/// columns bottom edges f = l->m with j-l vertical.
inline double block_unitarity(const BiUnitaryConnection &c) {
  const Graph &g = c.vertical();
  double res = 0.0;
  for (int j = 0; j < g.size(); ++j)
    for (int m = 0; m < g.size(); ++m) {
      std::vector<int> rows, cols;
      for (int e = 0; e < c.num_edges(); ++e) {
        if (c.edge(e).src == j && g.adjacent(c.edge(e).dst, m))
          rows.push_back(e);
        if (c.edge(e).dst == m && g.adjacent(j, c.edge(e).src))
          cols.push_back(e);
      }
      if (rows.empty() && cols.empty())
        continue;
      if (rows.size() != cols.size())
        return std::numeric_limits<double>::infinity();
      MatrixXc u(rows.size(), cols.size());
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
          u(a, b) = c.amplitude(rows[a], cols[b]);
      res = std::max(res, linalg::unitarity_residual(u));
    }
  return res;
}

/// Mirror image across the vertical axis with the Perron-Frobenius
/// renormalization: the reflected cell (k,j,m,l) carries
/// sqrt(mu(j)mu(m)/(mu(k)mu(l))) * conj(W(j,k,l,m)). Horizontal edge e keeps its
/// index and has its orientation reversed. Involutive.
inline BiUnitaryConnection renormalized_reflection(const BiUnitaryConnection &c,
                                                   const PFData &pf) {
  std::vector<HorizontalEdge> edges;
  for (const auto &e : c.edges())
    edges.push_back({e.dst, e.src});
  MatrixXc w = MatrixXc::Zero(c.num_edges(), c.num_edges());
  for (int e = 0; e < c.num_edges(); ++e)
    for (int f = 0; f < c.num_edges(); ++f) {
      if (!c.geometric(e, f))
        continue;
      const double j = pf.mu[c.edge(e).src], k = pf.mu[c.edge(e).dst];
      const double l = pf.mu[c.edge(f).src], m = pf.mu[c.edge(f).dst];
      w(e, f) = std::sqrt(j * m / (k * l)) * std::conj(c.amplitude(e, f));
    }
  BiUnitaryConnection out(c.vertical(), std::move(edges), std::move(w));
  out.label = c.label.empty() ? "" : c.label + "~";
  return out;
}

inline BiUnitaryConnection renormalized_reflection(const BiUnitaryConnection &c) {
  return renormalized_reflection(c, pf_data(c.vertical()));
}

/// Both unitarity axioms. Never throws on a bad connection; the residuals say
/// how far it is from bi-unitary.
inline BiunitarityReport check_biunitarity(const BiUnitaryConnection &c) {
  BiunitarityReport r;
  r.unitarity = block_unitarity(c);
  r.reflection = block_unitarity(renormalized_reflection(c));
  return r;
}

/// Multiplies each cell by u(j,l) conj(v(k,m)) for random symmetric phase
/// fields u, v on the vertical edges, drawn independently for the left and
/// right sides. Bi-unitarity survives; flatness generically does not.
inline BiUnitaryConnection vertical_gauge(const BiUnitaryConnection &c,
                                          std::uint64_t seed) {
  const int n = c.vertical().size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  auto field = [&] {
    MatrixXc f(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b)
        f(a, b) = f(b, a) = std::polar(1.0, angle(rng));
    return f;
  };
  const MatrixXc u = field(), v = field();
  MatrixXc w = c.amplitudes();
  for (int e = 0; e < c.num_edges(); ++e)
    for (int f = 0; f < c.num_edges(); ++f)
      w(e, f) *= u(c.edge(e).src, c.edge(f).src) * std::conj(v(c.edge(e).dst, c.edge(f).dst));
  BiUnitaryConnection out(c.vertical(), c.edges(), std::move(w));
  out.label = c.label + "'";
  return out;
}

// ---- horizontal composition -------------------------------------------

/// Pairs (e1, e2) with e1 in c1, e2 in c2 and dst(e1) == src(e2), in the
/// order used for the edges of compose_horizontal(c1, c2).
inline std::vector<std::pair<int, int>>
composite_edges(const BiUnitaryConnection &c1, const BiUnitaryConnection &c2) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < c1.num_edges(); ++a)
    for (int b = 0; b < c2.num_edges(); ++b)
      if (c1.edge(a).dst == c2.edge(b).src)
        out.emplace_back(a, b);
  return out;
}

/// Cells placed side by side, sharing the middle vertical edge. Composite
/// horizontal edges are the pairs returned by composite_edges().
inline BiUnitaryConnection compose_horizontal(const BiUnitaryConnection &c1,
                                              const BiUnitaryConnection &c2) {
  if (!same_vertical(c1, c2))
    throw StructuralError("compose_horizontal: vertical graphs differ");
  const auto pairs = composite_edges(c1, c2);
  std::vector<HorizontalEdge> edges;
  for (auto [a, b] : pairs)
    edges.push_back({c1.edge(a).src, c2.edge(b).dst});
  const int n = static_cast<int>(pairs.size());
  MatrixXc w = MatrixXc::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      const auto [a, b] = pairs[x];
      const auto [c, d] = pairs[y];
      w(x, y) = c1.amplitude(a, c) * c2.amplitude(b, d);
    }
  BiUnitaryConnection out(c1.vertical(), std::move(edges), std::move(w));
  out.label = c1.label + "." + c2.label;
  return out;
}

/// Statistical dimension: spectral radius of the horizontal edge-count matrix.
inline double statistical_dimension(const BiUnitaryConnection &c) {
  Eigen::EigenSolver<MatrixXd> es(c.edge_counts(), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---- intertwiners and decomposition -----------------------------------

struct ConnectionOptions {
  double svd_cutoff = 1e-8;     ///< intertwiner null-space cutoff
  double eigen_merge = 1e-9;    ///< eigenvalues closer than this coincide
  double eigen_separate = 1e-5; ///< ... and farther than this are distinct
  int retries = 5;
  std::uint64_t seed = 20240611;
};

/// Basis of Hom(c1, c2): maps T (|E2| x |E1|), nonzero only between edges with
/// equal endpoints, such that amplitude(c2) (T x 1) = (1 x T) amplitude(c1) on
/// every cell.
inline std::vector<MatrixXc> intertwiners(const BiUnitaryConnection &c1,
                                          const BiUnitaryConnection &c2,
                                          const ConnectionOptions &opt = {}) {
  if (!same_vertical(c1, c2))
    throw StructuralError("intertwiners: vertical graphs differ");
  const Graph &g = c1.vertical();
  std::map<std::pair<int, int>, int> var; // (e2, e1) -> unknown index
  for (int e1 = 0; e1 < c1.num_edges(); ++e1)
    for (int e2 = 0; e2 < c2.num_edges(); ++e2)
      if (c1.edge(e1) == c2.edge(e2))
        var.emplace(std::make_pair(e2, e1), static_cast<int>(var.size()));
  if (var.empty())
    return {};
  std::vector<VectorXc> rows;
  for (int e1 = 0; e1 < c1.num_edges(); ++e1)
    for (int f2 = 0; f2 < c2.num_edges(); ++f2) {
      const auto [j, k] = c1.edge(e1);
      const auto [l, m] = c2.edge(f2);
      if (!g.adjacent(j, l) || !g.adjacent(k, m))
        continue;
      VectorXc r = VectorXc::Zero(var.size());
      for (int e2 = 0; e2 < c2.num_edges(); ++e2)
        if (c2.edge(e2) == c1.edge(e1))
          r(var.at({e2, e1})) += c2.amplitude(e2, f2);
      for (int f1 = 0; f1 < c1.num_edges(); ++f1)
        if (c1.edge(f1) == c2.edge(f2))
          r(var.at({f2, f1})) -= c1.amplitude(e1, f1);
      rows.push_back(std::move(r));
    }
  MatrixXc m(rows.size(), var.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(i) = rows[i].transpose();
  std::vector<MatrixXc> out;
  for (const auto &v : linalg::null_space(m, opt.svd_cutoff)) {
    MatrixXc t = MatrixXc::Zero(c2.num_edges(), c1.num_edges());
    for (const auto &[key, idx] : var)
      t(key.first, key.second) = v(idx);
    out.push_back(std::move(t));
  }
  return out;
}

/// Sub-connection on the range of the isometry v (columns block-pure by
/// endpoints): W_sub = v^T W conj(v).
inline BiUnitaryConnection restrict_connection(const BiUnitaryConnection &c,
                                               const MatrixXc &v,
                                               std::vector<HorizontalEdge> edges) {
  MatrixXc w = v.transpose() * c.amplitudes() * v.conjugate();
  // Exact zeros off the geometric cells keep the constructor's check strict.
  for (int e = 0; e < w.rows(); ++e)
    for (int f = 0; f < w.cols(); ++f) {
      const bool geo = c.vertical().adjacent(edges[e].src, edges[f].src) &&
                       c.vertical().adjacent(edges[e].dst, edges[f].dst);
      if (!geo)
        w(e, f) = 0;
    }
  return BiUnitaryConnection(c.vertical(), std::move(edges), std::move(w));
}

/// One irreducible isotypic component of a connection.
struct DecompositionPart {
  BiUnitaryConnection irreducible;
  int multiplicity = 0;
  /// One isometry per copy, E_irreducible -> E_parent, intertwining exactly.
  std::vector<MatrixXc> isometries;
};

namespace detail {

struct Summand {
  BiUnitaryConnection conn;
  MatrixXc iso; // E_sub -> E_parent
};

inline std::vector<Summand> split_once(const BiUnitaryConnection &c,
                                       const std::vector<MatrixXc> &endo,
                                       std::mt19937_64 &rng,
                                       const ConnectionOptions &opt,
                                       bool &ambiguous) {
  std::normal_distribution<double> gauss;
  const int ne = c.num_edges();
  MatrixXc x = MatrixXc::Zero(ne, ne);
  for (const auto &t : endo)
    x += cplx(gauss(rng), gauss(rng)) * t;
  const MatrixXc h = x + x.adjoint();

  std::map<std::pair<int, int>, std::vector<int>> blocks;
  for (int e = 0; e < ne; ++e)
    blocks[{c.edge(e).src, c.edge(e).dst}].push_back(e);

  struct Eig {
    double value;
    int src, dst;
    VectorXc vec;
  };
  std::vector<Eig> eigs;
  for (const auto &[key, ids] : blocks) {
    MatrixXc sub(ids.size(), ids.size());
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = 0; b < ids.size(); ++b)
        sub(a, b) = h(ids[a], ids[b]);
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(sub);
    for (Eigen::Index t = 0; t < es.eigenvalues().size(); ++t) {
      VectorXc full = VectorXc::Zero(ne);
      for (std::size_t a = 0; a < ids.size(); ++a)
        full(ids[a]) = es.eigenvectors()(a, t);
      eigs.push_back({es.eigenvalues()(t), key.first, key.second, std::move(full)});
    }
  }
  std::stable_sort(eigs.begin(), eigs.end(),
                   [](const Eig &a, const Eig &b) { return a.value < b.value; });
  ambiguous = false;
  std::vector<std::vector<const Eig *>> groups;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (i > 0) {
      const double gap = eigs[i].value - eigs[i - 1].value;
      if (gap >= opt.eigen_merge && gap < opt.eigen_separate)
        ambiguous = true;
    }
    if (i == 0 || eigs[i].value - eigs[i - 1].value >= opt.eigen_merge)
      groups.emplace_back();
    groups.back().push_back(&eigs[i]);
  }
  std::vector<Summand> out;
  for (const auto &grp : groups) {
    MatrixXc v(ne, grp.size());
    std::vector<HorizontalEdge> edges;
    for (std::size_t i = 0; i < grp.size(); ++i) {
      v.col(i) = grp[i]->vec;
      edges.push_back({grp[i]->src, grp[i]->dst});
    }
    out.push_back({restrict_connection(c, v, std::move(edges)), std::move(v)});
  }
  return out;
}

inline bool structurally_equal(const BiUnitaryConnection &a,
                               const BiUnitaryConnection &b) {
  return a.num_edges() == b.num_edges() &&
         (a.edge_counts() - b.edge_counts()).cwiseAbs().maxCoeff() == 0;
}

} // namespace detail

/// True when a and b are unitarily equivalent (nonzero intertwiner).
inline bool equivalent(const BiUnitaryConnection &a, const BiUnitaryConnection &b,
                       const ConnectionOptions &opt = {}) {
  if (!detail::structurally_equal(a, b))
    return false;
  return !intertwiners(a, b, opt).empty();
}

/// Unitary intertwiner a -> b between equivalent irreducible connections.
inline std::optional<MatrixXc> unitary_intertwiner(const BiUnitaryConnection &a,
                                                   const BiUnitaryConnection &b,
                                                   const ConnectionOptions &opt = {}) {
  if (!detail::structurally_equal(a, b))
    return std::nullopt;
  auto ts = intertwiners(a, b, opt);
  if (ts.empty())
    return std::nullopt;
  MatrixXc t = ts.front();
  const double scale = (t.adjoint() * t).trace().real() / a.num_edges();
  return t / std::sqrt(scale);
}

/// Splits c into irreducible summands. A random self-adjoint element of the
/// endomorphism algebra is diagonalised; its eigenspaces are minimal invariant
/// subspaces. Clustered eigenvalues trigger a retry with fresh randomness; if
/// the spectrum stays ambiguous NumericalError ("indeterminate") is raised.
inline std::vector<DecompositionPart> decompose(const BiUnitaryConnection &c,
                                                const ConnectionOptions &opt = {}) {
  const auto endo = intertwiners(c, c, opt);
  if (endo.size() == 1) {
    DecompositionPart p{c, 1, {MatrixXc::Identity(c.num_edges(), c.num_edges())}};
    return {p};
  }
  std::mt19937_64 rng(opt.seed);
  std::vector<detail::Summand> parts;
  for (int attempt = 0; attempt <= opt.retries; ++attempt) {
    bool ambiguous = false;
    parts = detail::split_once(c, endo, rng, opt, ambiguous);
    if (!ambiguous)
      break;
    if (attempt == opt.retries)
      throw NumericalError("decompose: indeterminate eigenvalue clustering");
  }
  std::vector<DecompositionPart> out;
  for (auto &s : parts) {
    bool placed = false;
    for (auto &p : out) {
      if (auto u = unitary_intertwiner(p.irreducible, s.conn, opt)) {
        // Re-express the copy on the representative's edge basis.
        p.isometries.push_back(s.iso * *u);
        ++p.multiplicity;
        placed = true;
        break;
      }
    }
    if (!placed)
      out.push_back({s.conn, 1, {s.iso}});
  }
  return out;
}

/// Inverse of decompose: sum over copies of conj(V) W_irr V^T.
inline MatrixXc reassemble(const std::vector<DecompositionPart> &parts, int n) {
  MatrixXc w = MatrixXc::Zero(n, n);
  for (const auto &p : parts)
    for (const auto &v : p.isometries)
      w += v.conjugate() * p.irreducible.amplitudes() * v.transpose();
  return w;
}

// ---- mixed strings -----------------------------------------------------

/// A string of horizontal and vertical steps. Horizontal steps hold edge ids,
/// vertical steps hold the vertex they arrive at; the step kinds live in a
/// separate pattern (true = horizontal).
using StepPath = std::vector<int>;

inline int step_end(const BiUnitaryConnection &c, const std::vector<bool> &pattern,
                    const StepPath &p, int from) {
  int v = from;
  for (std::size_t i = 0; i < p.size(); ++i)
    v = pattern[i] ? c.edge(p[i]).dst : p[i];
  return v;
}

/// All strings following `pattern` from vertex `from`, in lexicographic order.
inline std::vector<StepPath> mixed_paths(const BiUnitaryConnection &c,
                                         const std::vector<bool> &pattern, int from) {
  const Graph &g = c.vertical();
  std::vector<std::pair<StepPath, int>> ps{{{}, from}};
  for (bool hor : pattern) {
    std::vector<std::pair<StepPath, int>> next;
    for (const auto &[p, end] : ps) {
      if (hor) {
        for (int e = 0; e < c.num_edges(); ++e)
          if (c.edge(e).src == end) {
            StepPath q = p;
            q.push_back(e);
            next.emplace_back(std::move(q), c.edge(e).dst);
          }
      } else {
        for (int w = 0; w < g.size(); ++w)
          if (g.adjacent(end, w)) {
            StepPath q = p;
            q.push_back(w);
            next.emplace_back(std::move(q), w);
          }
      }
    }
    ps = std::move(next);
  }
  std::vector<StepPath> out;
  for (auto &pe : ps)
    out.push_back(std::move(pe.first));
  std::sort(out.begin(), out.end());
  return out;
}

/// Pushes the horizontal step at `pos` past the vertical step at `pos + 1`
/// through one cell: e followed by (k -> m) becomes (j -> l) followed by f,
/// with amplitude W(e, f).
inline std::map<StepPath, cplx> swap_hv(const BiUnitaryConnection &c,
                                        const std::map<StepPath, cplx> &amp, int pos) {
  const Graph &g = c.vertical();
  std::map<StepPath, cplx> next;
  for (const auto &[p, a] : amp) {
    const int e = p[pos];
    const int m = p[pos + 1];
    const int j = c.edge(e).src;
    for (int f = 0; f < c.num_edges(); ++f) {
      if (c.edge(f).dst != m || !g.adjacent(j, c.edge(f).src))
        continue;
      const cplx w = c.amplitude(e, f);
      if (w == cplx(0))
        continue;
      StepPath q = p;
      q[pos] = c.edge(f).src;
      q[pos + 1] = f;
      next[q] += a * w;
    }
  }
  return next;
}

// ---- flatness ----------------------------------------------------------

struct FlatnessReport {
  bool flat = false;
  double residual = 0.0;           ///< max deviation from the commutant form
  double transport_unitarity = 0.0;
  int rectangles = 0;
};

namespace detail {

/// Transport through an h x v rectangle: maps paths (h horizontal steps from
/// star, then v vertical steps) to paths (v vertical, then h horizontal) with
/// the same endpoint. Horizontal steps are stored as edge ids, vertical steps
/// as target vertices. Returns the residual of the commutation test.
inline std::pair<double, double> rectangle_residual(const BiUnitaryConnection &c,
                                                    int h, int v) {
  const Graph &g = c.vertical();
  using Path = std::vector<int>;

  // Horizontal paths from star.
  std::vector<std::pair<Path, int>> hor{{{}, g.star()}};
  for (int s = 0; s < h; ++s) {
    std::vector<std::pair<Path, int>> next;
    for (const auto &[p, end] : hor)
      for (int e = 0; e < c.num_edges(); ++e)
        if (c.edge(e).src == end) {
          Path q = p;
          q.push_back(e);
          next.emplace_back(std::move(q), c.edge(e).dst);
        }
    hor = std::move(next);
  }
  auto vertical_paths = [&](int from) {
    std::vector<std::pair<Path, int>> ps{{{}, from}};
    for (int s = 0; s < v; ++s) {
      std::vector<std::pair<Path, int>> next;
      for (const auto &[p, end] : ps)
        for (int w = 0; w < g.size(); ++w)
          if (g.adjacent(end, w)) {
            Path q = p;
            q.push_back(w);
            next.emplace_back(std::move(q), w);
          }
      ps = std::move(next);
    }
    return ps;
  };

  std::vector<Path> start;
  std::vector<int> start_hor; // index into hor
  std::vector<std::map<Path, cplx>> state;
  for (std::size_t i = 0; i < hor.size(); ++i)
    for (const auto &[vp, end] : vertical_paths(hor[i].second)) {
      Path p = hor[i].first;
      p.insert(p.end(), vp.begin(), vp.end());
      start.push_back(p);
      start_hor.push_back(static_cast<int>(i));
      state.push_back({{p, cplx(1.0)}});
    }

  for (int col = h - 1; col >= 0; --col)
    for (int row = 0; row < v; ++row) {
      const int pos = col + row;
      for (auto &amp : state)
        amp = swap_hv(c, amp, pos);
    }

  std::map<Path, int> end_index;
  for (const auto &amp : state)
    for (const auto &[p, a] : amp)
      end_index.emplace(p, 0);
  std::vector<Path> ends;
  for (auto &[p, idx] : end_index) {
    idx = static_cast<int>(ends.size());
    ends.push_back(p);
  }
  const int ns = static_cast<int>(start.size()), nend = static_cast<int>(ends.size());
  MatrixXc u = MatrixXc::Zero(nend, ns);
  for (int i = 0; i < ns; ++i)
    for (const auto &[p, a] : state[i])
      u(end_index.at(p), i) = a;
  const double unit = ns == nend ? linalg::max_abs(u.adjoint() * u - MatrixXc::Identity(ns, ns))
                                 : std::numeric_limits<double>::infinity();

  // Commutant form: delta(prefix, prefix') * Z_w(suffix, suffix') where w is
  // the endpoint of the vertical prefix.
  std::map<Path, int> prefix_ids, suffix_ids;
  std::vector<int> pre(nend), suf(nend), wend(nend);
  for (int q = 0; q < nend; ++q) {
    const Path &p = ends[q];
    pre[q] = prefix_ids.emplace(Path(p.begin(), p.begin() + v), int(prefix_ids.size())).first->second;
    suf[q] = suffix_ids.emplace(Path(p.begin() + v, p.end()), int(suffix_ids.size())).first->second;
    wend[q] = v == 0 ? g.star() : p[v - 1];
  }
  const int nsuf = static_cast<int>(suffix_ids.size());
  std::vector<int> prefixes_at(g.size(), 0);
  {
    std::vector<bool> seen(prefix_ids.size(), false);
    for (int q = 0; q < nend; ++q)
      if (!seen[pre[q]]) {
        seen[pre[q]] = true;
        ++prefixes_at[wend[q]];
      }
  }

  std::vector<std::vector<int>> cols(hor.size());
  for (int i = 0; i < ns; ++i)
    cols[start_hor[i]].push_back(i);
  auto block = [&](int s) {
    MatrixXc b(nend, cols[s].size());
    for (std::size_t i = 0; i < cols[s].size(); ++i)
      b.col(i) = u.col(cols[s][i]);
    return b;
  };
  std::vector<MatrixXc> blocks;
  for (std::size_t s = 0; s < hor.size(); ++s)
    blocks.push_back(block(int(s)));

  double res = 0.0;
  for (std::size_t s1 = 0; s1 < hor.size(); ++s1)
    for (std::size_t s2 = 0; s2 < hor.size(); ++s2) {
      if (hor[s1].second != hor[s2].second)
        continue;
      // Start columns for s1 and s2 pair up through the same vertical tail.
      const MatrixXc t = blocks[s1] * blocks[s2].adjoint();
      std::vector<MatrixXc> z(g.size(), MatrixXc::Zero(nsuf, nsuf));
      for (int a = 0; a < nend; ++a)
        for (int b = 0; b < nend; ++b)
          if (pre[a] == pre[b])
            z[wend[a]](suf[a], suf[b]) += t(a, b) / double(prefixes_at[wend[a]]);
      for (int a = 0; a < nend; ++a)
        for (int b = 0; b < nend; ++b) {
          const cplx expect = pre[a] == pre[b] ? z[wend[a]](suf[a], suf[b]) : cplx(0);
          res = std::max(res, std::abs(t(a, b) - expect));
        }
    }
  return {res, unit};
}

} // namespace detail

/// Flatness on all rectangles of h x v cells, 1 <= h <= kmax, 1 <= v <= lmax,
/// with strings starting at the distinguished vertex: the transported
/// horizontal string algebra must commute with the vertical one.
inline FlatnessReport check_flatness(const BiUnitaryConnection &c, int kmax,
                                     int lmax, double tol = 1e-9) {
  if (kmax < 1 || lmax < 1)
    throw ParameterError("check_flatness: rectangle caps must be >= 1");
  FlatnessReport r;
  for (int h = 1; h <= kmax; ++h)
    for (int v = 1; v <= lmax; ++v) {
      auto [res, unit] = detail::rectangle_residual(c, h, v);
      r.residual = std::max(r.residual, res);
      r.transport_unitarity = std::max(r.transport_unitarity, unit);
      ++r.rectangles;
    }
  r.flat = r.residual < tol && r.transport_unitarity < tol;
  return r;
}

// ---- connection families ----------------------------------------------

struct FamilyMember {
  std::string label;
  BiUnitaryConnection connection;
  double dimension = 0.0;
  bool even = true; ///< horizontal edges join vertices of equal parity
};

/// Irreducible connections generated from {id, W} by horizontal composition
/// and decomposition, with the multiplicities N[a][b][c] of member c in
/// member a composed with member b.
struct ConnectionFamily {
  std::vector<FamilyMember> members;
  std::vector<std::vector<std::vector<int>>> fusion;
  bool closed = false;
  int rounds = 0;

  int size() const { return static_cast<int>(members.size()); }

  double global_dimension() const {
    double s = 0.0;
    for (const auto &m : members)
      s += m.dimension * m.dimension;
    return s;
  }

  /// Sub-family of members whose horizontal edges preserve the bipartite
  /// class (the bimodules over the even algebra). Fusion is restricted.
  ConnectionFamily even_part() const {
    ConnectionFamily out;
    out.closed = closed;
    out.rounds = rounds;
    std::vector<int> keep;
    for (int a = 0; a < size(); ++a)
      if (members[a].even)
        keep.push_back(a);
    for (int a : keep)
      out.members.push_back(members[a]);
    const int n = static_cast<int>(keep.size());
    out.fusion.assign(n, std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          out.fusion[a][b][c] = fusion[keep[a]][keep[b]][keep[c]];
    return out;
  }
};

inline bool preserves_parity(const BiUnitaryConnection &c) {
  const auto &par = c.vertical().parity();
  if (par.empty())
    return true;
  return std::all_of(c.edges().begin(), c.edges().end(),
                     [&](const HorizontalEdge &e) { return par[e.src] == par[e.dst]; });
}

/// Label for a family member: the vertex reached from the distinguished
/// vertex when exactly one horizontal edge leaves it, else "W<index>".
inline std::string member_label(const BiUnitaryConnection &c, int index) {
  const int star = c.vertical().star();
  int count = 0, target = -1;
  for (const auto &e : c.edges())
    if (e.src == star) {
      ++count;
      target = e.dst;
    }
  if (count == 1)
    return "W[" + c.vertical().label(target) + "]";
  return "W" + std::to_string(index);
}

/// Closes {id, c} under compose_horizontal + decompose. Each round composes
/// every ordered pair not yet composed. `closed` is false when depth_cap
/// rounds did not reach a fixed point.
inline ConnectionFamily connection_family(const BiUnitaryConnection &c, int depth_cap,
                                          const ConnectionOptions &opt = {}) {
  ConnectionFamily fam;
  std::vector<BiUnitaryConnection> conns{identity_connection(c.vertical())};
  for (auto &part : decompose(c, opt))
    if (std::none_of(conns.begin(), conns.end(), [&](const auto &m) {
          return equivalent(m, part.irreducible, opt);
        }))
      conns.push_back(part.irreducible);

  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> products;
  for (fam.rounds = 1; fam.rounds <= depth_cap; ++fam.rounds) {
    bool grew = false;
    const int n = static_cast<int>(conns.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (products.count({a, b}))
          continue;
        auto &prod = products[{a, b}];
        for (auto &part : decompose(compose_horizontal(conns[a], conns[b]), opt)) {
          int found = -1;
          for (int m = 0; m < int(conns.size()); ++m)
            if (equivalent(conns[m], part.irreducible, opt)) {
              found = m;
              break;
            }
          if (found < 0) {
            found = static_cast<int>(conns.size());
            conns.push_back(part.irreducible);
            grew = true;
          }
          prod.emplace_back(found, part.multiplicity);
        }
      }
    if (!grew) {
      fam.closed = true;
      break;
    }
  }
  if (!fam.closed)
    fam.rounds = depth_cap;

  const int n = static_cast<int>(conns.size());
  fam.fusion.assign(n, std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
  for (const auto &[ab, prod] : products)
    for (auto [m, mult] : prod)
      fam.fusion[ab.first][ab.second][m] += mult;
  for (int i = 0; i < n; ++i) {
    FamilyMember m;
    m.connection = conns[i];
    m.label = i == 0 ? "id" : member_label(conns[i], i);
    m.connection.label = m.label;
    m.dimension = statistical_dimension(conns[i]);
    m.even = preserves_parity(conns[i]);
    fam.members.push_back(std::move(m));
  }
  return fam;
}

// ---- JSON --------------------------------------------------------------

inline nlohmann::json to_json(const BiUnitaryConnection &c) {
  nlohmann::json j;
  j["graphs"]["vertical"] = to_json(c.vertical());
  auto hor = nlohmann::json::array();
  for (const auto &e : c.edges())
    hor.push_back({c.vertical().label(e.src), c.vertical().label(e.dst)});
  j["graphs"]["horizontal"] = std::move(hor);
  auto cells = nlohmann::json::array();
  for (int e = 0; e < c.num_edges(); ++e)
    for (int f = 0; f < c.num_edges(); ++f) {
      if (!c.geometric(e, f) || c.amplitude(e, f) == cplx(0))
        continue;
      const auto &g = c.vertical();
      cells.push_back({{"j", g.label(c.edge(e).src)},
                       {"k", g.label(c.edge(e).dst)},
                       {"l", g.label(c.edge(f).src)},
                       {"m", g.label(c.edge(f).dst)},
                       {"top", e},
                       {"bottom", f},
                       {"re", c.amplitude(e, f).real()},
                       {"im", c.amplitude(e, f).imag()}});
    }
  j["cells"] = std::move(cells);
  if (!c.label.empty())
    j["label"] = c.label;
  return j;
}

/// Reads the connection format. "graphs.horizontal" defaults to the vertical
/// edges in both orientations; cell "top"/"bottom" edge indices are optional
/// when the corner vertices pick a unique horizontal edge.
inline BiUnitaryConnection connection_from_json(const nlohmann::json &j) {
  const auto &graphs = j.at("graphs");
  Graph g = graph_from_json(graphs.at("vertical"));
  std::vector<HorizontalEdge> edges;
  if (graphs.contains("horizontal")) {
    for (const auto &e : graphs["horizontal"])
      edges.push_back({g.index_of(json_label(e.at(0))), g.index_of(json_label(e.at(1)))});
  } else {
    edges = doubled_edges(g);
  }
  const int ne = static_cast<int>(edges.size());
  auto unique_edge = [&](int s, int d) {
    int found = -1;
    for (int e = 0; e < ne; ++e)
      if (edges[e].src == s && edges[e].dst == d) {
        if (found >= 0)
          throw ParameterError("cell needs explicit top/bottom: parallel edges");
        found = e;
      }
    if (found < 0)
      throw ParameterError("cell corners do not match a horizontal edge");
    return found;
  };
  MatrixXc w = MatrixXc::Zero(ne, ne);
  for (const auto &cell : j.at("cells")) {
    const int jv = g.index_of(json_label(cell.at("j")));
    const int kv = g.index_of(json_label(cell.at("k")));
    const int lv = g.index_of(json_label(cell.at("l")));
    const int mv = g.index_of(json_label(cell.at("m")));
    const int e = cell.contains("top") ? cell["top"].get<int>() : unique_edge(jv, kv);
    const int f = cell.contains("bottom") ? cell["bottom"].get<int>() : unique_edge(lv, mv);
    if (e < 0 || e >= ne || f < 0 || f >= ne || edges[e] != HorizontalEdge{jv, kv} ||
        edges[f] != HorizontalEdge{lv, mv})
      throw ParameterError("cell edge indices disagree with corners");
    w(e, f) = cplx(cell.at("re").get<double>(), cell.value("im", 0.0));
  }
  BiUnitaryConnection c(std::move(g), std::move(edges), std::move(w));
  c.label = j.value("label", "");
  return c;
}

} // namespace anyonforge
