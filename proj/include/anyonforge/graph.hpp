#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anyonforge/error.hpp"
#include "anyonforge/linalg.hpp"

namespace anyonforge {

/// Finite undirected multigraph with a distinguished vertex "*".
///
/// Vertices are addressed by index; labels are kept for I/O. Construction
/// validates connectivity and rejects graphs without edges, since every
/// downstream formula needs beta > 0 and divides by Perron-Frobenius weights.
class Graph {
public:
  Graph() = default;

  Graph(std::vector<std::string> labels,
        std::vector<std::pair<int, int>> edges, int star = 0)
      : labels_(std::move(labels)), edges_(std::move(edges)), star_(star) {
    const int n = static_cast<int>(labels_.size());
    if (n < 2 || edges_.empty())
      throw StructuralError("graph needs at least two vertices and one edge");
    if (star_ < 0 || star_ >= n)
      throw ParameterError("distinguished vertex out of range");
    adj_ = Eigen::MatrixXi::Zero(n, n);
    for (auto &[u, v] : edges_) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw ParameterError("edge endpoint out of range");
      if (u == v)
        throw StructuralError("self-loops are not supported");
      if (u > v)
        std::swap(u, v);
      adj_(u, v) += 1;
      adj_(v, u) += 1;
    }
    if (!connected())
      throw StructuralError("graph is disconnected");
    compute_parity();
  }

  int size() const { return static_cast<int>(labels_.size()); }
  int star() const { return star_; }
  const std::vector<std::string> &labels() const { return labels_; }
  const std::string &label(int v) const { return labels_.at(v); }
  const std::vector<std::pair<int, int>> &edges() const { return edges_; }
  const Eigen::MatrixXi &adjacency() const { return adj_; }
  int multiplicity(int u, int v) const { return adj_(u, v); }
  bool adjacent(int u, int v) const { return adj_(u, v) > 0; }
  bool simple() const { return adj_.maxCoeff() <= 1; }

  /// Bipartite class of each vertex relative to star (0 = even distance), or
  /// an empty vector when the graph has an odd cycle.
  const std::vector<int> &parity() const { return parity_; }
  bool bipartite() const { return !parity_.empty(); }

  /// Index of the undirected edge {u, v} (first copy for multi-edges), or -1.
  int edge_index(int u, int v) const {
    if (u > v)
      std::swap(u, v);
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (edges_[i].first == u && edges_[i].second == v)
        return static_cast<int>(i);
    return -1;
  }

  int index_of(const std::string &label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
      throw ParameterError("unknown vertex label '" + label + "'");
    return static_cast<int>(it - labels_.begin());
  }

  Graph with_star(int star) const {
    return Graph(labels_, edges_, star);
  }

  std::string name; ///< informational ("A5", "E6", ...); empty for user graphs

private:
  bool connected() const {
    std::vector<bool> seen(size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < size(); ++v)
        if (adj_(u, v) && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  }

  void compute_parity() {
    std::vector<int> par(size(), -1);
    std::queue<int> q;
    par[star_] = 0;
    q.push(star_);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < size(); ++v) {
        if (!adj_(u, v))
          continue;
        if (par[v] < 0) {
          par[v] = 1 - par[u];
          q.push(v);
        } else if (par[v] == par[u]) {
          parity_.clear();
          return;
        }
      }
    }
    parity_ = std::move(par);
  }

  std::vector<std::string> labels_;
  std::vector<std::pair<int, int>> edges_;
  int star_ = 0;
  Eigen::MatrixXi adj_;
  std::vector<int> parity_;
};

/// Perron-Frobenius eigendata: beta is the spectral radius of the adjacency
/// matrix and mu the positive eigenvector with mu(star) = 1.
struct PFData {
  double beta = 0.0;
  std::vector<double> mu;
  int iterations = 0;
  double residual = 0.0; ///< max |A mu - beta mu|
};

/// Standard Dynkin diagram. Vertices are numbered 1..n: for A_n a path, for
/// D_n the path 1..n-1 with n attached to n-2, for E_n the path 1..n-1 with
/// n attached to 3. Vertex 1 is the distinguished vertex.
inline Graph dynkin(char series, int n) {
  std::vector<std::pair<int, int>> e;
  switch (series) {
  case 'A':
    if (n < 1)
      throw ParameterError("A_n needs n >= 1");
    if (n == 1)
      throw StructuralError("A_1 has no edge; single-vertex graphs are refused");
    for (int i = 0; i + 1 < n; ++i)
      e.emplace_back(i, i + 1);
    break;
  case 'D':
    if (n < 4)
      throw ParameterError("D_n needs n >= 4");
    for (int i = 0; i + 2 < n; ++i)
      e.emplace_back(i, i + 1);
    e.emplace_back(n - 3, n - 1);
    break;
  case 'E':
    if (n < 6 || n > 8)
      throw ParameterError("E_n needs n in {6,7,8}");
    for (int i = 0; i + 2 < n; ++i)
      e.emplace_back(i, i + 1);
    e.emplace_back(2, n - 1);
    break;
  default:
    throw ParameterError(std::string("unknown Dynkin series '") + series + "'");
  }
  std::vector<std::string> labels;
  for (int i = 1; i <= n; ++i)
    labels.push_back(std::to_string(i));
  Graph g(std::move(labels), std::move(e), 0);
  g.name = std::string(1, series) + std::to_string(n);
  return g;
}

/// Parses "A5", "D4", "E8".
inline Graph dynkin(const std::string &name) {
  if (name.size() < 2)
    throw ParameterError("bad Dynkin name '" + name + "'");
  int n = 0;
  try {
    std::size_t pos = 0;
    n = std::stoi(name.substr(1), &pos);
    if (pos != name.size() - 1)
      throw ParameterError("bad Dynkin name '" + name + "'");
  } catch (const std::logic_error &) {
    throw ParameterError("bad Dynkin name '" + name + "'");
  }
  return dynkin(static_cast<char>(std::toupper(name[0])), n);
}

struct PFOptions {
  double tolerance = 1e-14;
  int max_iterations = 1'000'000;
};

/// Power iteration on A + I (the shift removes the -beta eigenvalue of
/// bipartite graphs from the dominant spectrum).
inline PFData pf_data(const Graph &g, PFOptions opt = {}) {
  const int n = g.size();
  const MatrixXd a = g.adjacency().cast<double>();
  const MatrixXd shifted = a + MatrixXd::Identity(n, n);
  VectorXd x = VectorXd::Ones(n) / std::sqrt(double(n));
  PFData out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    VectorXd y = shifted * x;
    y /= y.norm();
    const double change = (y - x).cwiseAbs().maxCoeff();
    x = y;
    out.iterations = it;
    if (change < opt.tolerance)
      break;
  }
  out.beta = x.dot(a * x) / x.dot(x);
  // power iteration stalls near tolerance / gap; two shifted inverse steps
  // bring the vector to working precision
  const Eigen::PartialPivLU<MatrixXd> lu(a - (out.beta + 1e-9) * MatrixXd::Identity(n, n));
  for (int polish = 0; polish < 2; ++polish) {
    x = lu.solve(x);
    x /= x.norm();
  }
  if (x.sum() < 0)
    x = -x;
  out.beta = x.dot(a * x);
  x /= x(g.star());
  out.mu.assign(x.data(), x.data() + n);
  out.residual = (a * x - out.beta * x).cwiseAbs().maxCoeff();
  for (double m : out.mu)
    if (!(m > 0))
      throw NumericalError("Perron-Frobenius vector not positive");
  return out;
}

/// beta^2, the index of the subfactor whose principal graph is g.
inline double jones_index(const Graph &g) {
  const double b = pf_data(g).beta;
  return b * b;
}

// ---- JSON --------------------------------------------------------------

inline std::string json_label(const nlohmann::json &j) {
  if (j.is_string())
    return j.get<std::string>();
  if (j.is_number_integer())
    return std::to_string(j.get<long long>());
  throw ParameterError("vertex labels must be strings or integers");
}

inline Graph graph_from_json(const nlohmann::json &j) {
  std::vector<std::string> labels;
  for (const auto &v : j.at("vertices"))
    labels.push_back(json_label(v));
  std::map<std::string, int> index;
  for (int i = 0; i < int(labels.size()); ++i)
    if (!index.emplace(labels[i], i).second)
      throw ParameterError("duplicate vertex label '" + labels[i] + "'");
  auto lookup = [&](const nlohmann::json &v) {
    auto it = index.find(json_label(v));
    if (it == index.end())
      throw ParameterError("edge references unknown vertex");
    return it->second;
  };
  std::vector<std::pair<int, int>> edges;
  for (const auto &e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw ParameterError("edges must be [u, v] pairs");
    edges.emplace_back(lookup(e[0]), lookup(e[1]));
  }
  int star = j.contains("star") ? lookup(j["star"]) : 0;
  return Graph(std::move(labels), std::move(edges), star);
}

inline nlohmann::json to_json(const Graph &g) {
  nlohmann::json j;
  j["vertices"] = g.labels();
  auto edges = nlohmann::json::array();
  for (auto [u, v] : g.edges())
    edges.push_back({g.label(u), g.label(v)});
  j["edges"] = std::move(edges);
  j["star"] = g.label(g.star());
  return j;
}

} // namespace anyonforge
