// anyonforge command-line driver. Every subcommand builds a RunReport and
// prints it as JSON (default) or TSV; the exit code is 0 when all verdicts
// pass, 1 on a numerical failure and 2 on a usage or input error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "anyonforge.hpp"

using namespace anyonforge;
using nlohmann::json;

namespace {

struct RunReport {
  json command = json::array();
  json inputs = json::object();
  json results = json::object();
  json residuals = json::object();
  json verdicts = json::object();
  std::string table; ///< TSV body for commands with a natural table
  double elapsed_ms = 0.0;

  void residual(const std::string &name, double value, double tol) {
    residuals[name] = value;
    verdicts[name] = value < tol;
  }
  bool pass() const {
    for (const auto &[k, v] : verdicts.items())
      if (!v.get<bool>())
        return false;
    return true;
  }
  std::string first_failure() const {
    for (const auto &[k, v] : verdicts.items())
      if (!v.get<bool>())
        return k;
    return {};
  }
};

struct UsageError : Error {
  using Error::Error;
};

std::string scalar_text(const json &v) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto &x : v) {
      if (!s.empty())
        s += ' ';
      s += x.is_structured() ? x.dump() : scalar_text(x);
    }
    return s;
  }
  return v.dump();
}

void flatten(const std::string &prefix, const json &v, std::ostream &os) {
  if (v.is_object()) {
    for (const auto &[k, x] : v.items())
      flatten(prefix.empty() ? k : prefix + "." + k, x, os);
    return;
  }
  os << prefix << '\t' << scalar_text(v) << '\n';
}

void print(const RunReport &r, const std::string &format, bool timing) {
  if (format == "tsv") {
    std::ostringstream os;
    if (!r.table.empty())
      os << r.table;
    else
      flatten("", r.results, os);
    flatten("residual", r.residuals, os);
    flatten("verdict", r.verdicts, os);
    os << "pass\t" << (r.pass() ? "true" : "false") << '\n';
    if (timing)
      os << "elapsed_ms\t" << r.elapsed_ms << '\n';
    std::cout << os.str();
    return;
  }
  json j = {{"command", r.command}, {"inputs", r.inputs},     {"results", r.results},
            {"residuals", r.residuals}, {"verdicts", r.verdicts}, {"pass", r.pass()}};
  if (timing)
    j["elapsed_ms"] = r.elapsed_ms;
  std::cout << j.dump(2) << '\n';
}

json read_json(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

int a_rank(const std::string &dynkin_name) {
  const Graph g = dynkin(dynkin_name);
  if (dynkin_name.empty() || (dynkin_name[0] != 'A' && dynkin_name[0] != 'a'))
    throw ParameterError("flat connections are built for the A series only");
  return g.size();
}

std::pair<int, int> parse_rect(const std::string &s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos)
      throw std::invalid_argument(s);
    const int h = std::stoi(s.substr(0, x)), v = std::stoi(s.substr(x + 1));
    if (h < 1 || v < 1)
      throw std::invalid_argument(s);
    return {h, v};
  } catch (const std::logic_error &) {
    throw UsageError("--rect expects HxV, e.g. 4x4");
  }
}

json doubles(const std::vector<double> &v) { return json(v); }

/// Settings resolved from defaults, then the config file, then flags.
struct Settings {
  json file = json::object();
  std::string config_path;

  template <class T> T pick(const CLI::Option *opt, const T &flag, const std::string &key, const T &def) const {
    if (opt && opt->count() > 0)
      return flag;
    if (file.contains(key))
      return file.at(key).get<T>();
    return def;
  }
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"anyonforge: flat connections, PMPOs, modular data and tube algebras"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format_flag = "json", config_flag;
  std::uint64_t seed_flag = 0;
  bool timing = false;
  AcceptanceConfig tol_flags;
  auto *o_format = app.add_option("--format", format_flag, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
  auto *o_seed = app.add_option("--seed", seed_flag, "seed for every randomized step");
  app.add_option("--config", config_flag, "JSON config file (default: $ANYONFORGE_CONFIG)");
  app.add_flag("--timing", timing, "include elapsed milliseconds in the report");
  auto *o_tbi = app.add_option("--tol-biunitary", tol_flags.tol_biunitary);
  auto *o_tfl = app.add_option("--tol-flat", tol_flags.tol_flat);
  auto *o_ttr = app.add_option("--tol-trace", tol_flags.tol_trace);
  auto *o_tpr = app.add_option("--tol-projector", tol_flags.tol_projector);
  auto *o_the = app.add_option("--tol-hermitian", tol_flags.tol_hermitian);
  auto *o_tdi = app.add_option("--tol-dim", tol_flags.tol_dim);
  auto *o_tpe = app.add_option("--tol-pentagon", tol_flags.tol_pentagon);
  auto *o_tor = app.add_option("--tol-oracle", tol_flags.tol_oracle);

  // graph
  auto *graph = app.add_subcommand("graph", "Perron-Frobenius data of a graph");
  graph->require_subcommand(1);
  std::string g_dynkin, g_file;
  auto *graph_pf = graph->add_subcommand("pf", "beta, index and mu");
  auto *graph_dump = graph->add_subcommand("dump", "graph as JSON");
  for (auto *sc : {graph_pf, graph_dump}) {
    sc->add_option("--dynkin", g_dynkin, "Dynkin diagram, e.g. A5, D6, E8");
    sc->add_option("--graph", g_file, "graph JSON file");
  }

  // conn
  auto *conn = app.add_subcommand("conn", "bi-unitary connections");
  conn->require_subcommand(1);
  std::string c_dynkin, c_file, c_rect_flag = "4x4";
  bool c_flat = false;
  std::uint64_t c_gauge = 0;
  int c_depth = 10;
  auto *conn_make = conn->add_subcommand("make", "flat connection on A_n as JSON");
  conn_make->add_option("--dynkin", c_dynkin)->required();
  auto *o_gauge = conn_make->add_option("--gauge", c_gauge, "apply a random vertical gauge with this seed");
  auto *conn_check = conn->add_subcommand("check", "bi-unitarity and optional flatness");
  conn_check->add_option("--dynkin", c_dynkin);
  conn_check->add_option("file", c_file, "connection JSON");
  conn_check->add_flag("--flat", c_flat, "also check flatness");
  auto *o_rect = conn_check->add_option("--rect", c_rect_flag, "rectangle cap HxV");
  auto *conn_family = conn->add_subcommand("family", "irreducible family generated by W");
  conn_family->add_option("--dynkin", c_dynkin)->required();
  conn_family->add_option("--depth", c_depth, "closure round cap");

  // bratteli
  auto *brat = app.add_subcommand("bratteli", "string algebra Bratteli diagram");
  std::string b_dynkin, b_file;
  int b_kmax_flag = 6;
  brat->add_option("--dynkin", b_dynkin);
  brat->add_option("--graph", b_file);
  auto *o_kmax = brat->add_option("--kmax", b_kmax_flag);

  // pmpo
  auto *pm = app.add_subcommand("pmpo", "projector MPO from the A_n connection family");
  std::string p_dynkin, p_report = "trace";
  int p_k_flag = 2, p_spot_flag = 10;
  pm->add_option("--dynkin", p_dynkin)->required();
  auto *o_k = pm->add_option("--k", p_k_flag, "number of sites");
  pm->add_option("--report", p_report, "comma list of trace, projector");
  auto *o_spot = pm->add_option("--spot-checks", p_spot_flag, "random vectors when too large for a sparse check");

  // modinv
  auto *mi = app.add_subcommand("modinv", "modular invariants");
  mi->require_subcommand(1);
  std::string m_builtin, m_md_file;
  int m_cap_flag = 0;
  auto *mi_enum = mi->add_subcommand("enumerate", "all invariants with entries up to the cap");
  mi_enum->add_option("--builtin", m_builtin);
  mi_enum->add_option("--md", m_md_file, "modular data JSON");
  auto *o_cap = mi_enum->add_option("--cap", m_cap_flag);
  auto *mi_comp = mi->add_subcommand("compose", "product of two invariants and its decomposition");
  std::string m_a, m_b;
  mi_comp->add_option("a", m_a)->required();
  mi_comp->add_option("b", m_b)->required();
  mi_comp->add_option("--builtin", m_builtin, "decompose against this model's invariants");
  auto *o_cap2 = mi_comp->add_option("--cap", m_cap_flag);

  // tube
  auto *tube = app.add_subcommand("tube", "tube algebra and anyons");
  tube->require_subcommand(1);
  std::string t_builtin, t_file, t_dynkin, t_md;
  auto *tube_any = tube->add_subcommand("anyons", "central decomposition");
  auto *tube_cc = tube->add_subcommand("crosscheck", "compare against center modular data");
  for (auto *sc : {tube_any, tube_cc}) {
    sc->add_option("--builtin", t_builtin, "vec_zN or fibonacci");
    sc->add_option("--fsymbols", t_file, "F-symbol JSON");
    sc->add_option("--dynkin", t_dynkin, "F-symbols from the A_n connection family");
  }
  tube_cc->add_option("--md", t_md, "built-in modular data name")->required();

  // verify-all
  auto *va = app.add_subcommand("verify-all", "acceptance criteria 1-10");
  bool v_quick = false;
  va->add_flag("--quick", v_quick, "smaller ranges and fewer spot checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  for (int i = 1; i < argc; ++i)
    rep.command.push_back(argv[i]);
  std::string format = format_flag;

  try {
    Settings st;
    st.config_path = config_flag;
    if (st.config_path.empty())
      if (const char *env = std::getenv("ANYONFORGE_CONFIG"))
        st.config_path = env;
    if (!st.config_path.empty()) {
      st.file = read_json(st.config_path);
      if (!st.file.is_object())
        throw UsageError("config file must hold a JSON object");
      rep.inputs["config"] = st.config_path;
    }
    format = st.pick<std::string>(o_format, format_flag, "format", "json");
    if (format != "json" && format != "tsv")
      throw UsageError("format must be json or tsv");

    AcceptanceConfig cfg;
    cfg.seed = st.pick<std::uint64_t>(o_seed, seed_flag, "seed", cfg.seed);
    cfg.tol_biunitary = st.pick(o_tbi, tol_flags.tol_biunitary, "tol_biunitary", cfg.tol_biunitary);
    cfg.tol_flat = st.pick(o_tfl, tol_flags.tol_flat, "tol_flat", cfg.tol_flat);
    cfg.tol_trace = st.pick(o_ttr, tol_flags.tol_trace, "tol_trace", cfg.tol_trace);
    cfg.tol_projector = st.pick(o_tpr, tol_flags.tol_projector, "tol_projector", cfg.tol_projector);
    cfg.tol_hermitian = st.pick(o_the, tol_flags.tol_hermitian, "tol_hermitian", cfg.tol_hermitian);
    cfg.tol_dim = st.pick(o_tdi, tol_flags.tol_dim, "tol_dim", cfg.tol_dim);
    cfg.tol_pentagon = st.pick(o_tpe, tol_flags.tol_pentagon, "tol_pentagon", cfg.tol_pentagon);
    cfg.tol_oracle = st.pick(o_tor, tol_flags.tol_oracle, "tol_oracle", cfg.tol_oracle);
    rep.inputs["seed"] = cfg.seed;

    auto load_graph = [&](const std::string &name, const std::string &file) {
      if (!name.empty() == !file.empty())
        throw UsageError("give exactly one of --dynkin or --graph");
      if (!name.empty()) {
        rep.inputs["dynkin"] = name;
        return dynkin(name);
      }
      rep.inputs["graph"] = file;
      return graph_from_json(read_json(file));
    };

    if (*graph) {
      const Graph g = load_graph(g_dynkin, g_file);
      if (*graph_dump) {
        rep.results["graph"] = to_json(g);
      } else {
        const PFData pf = pf_data(g);
        rep.results["beta"] = pf.beta;
        rep.results["index"] = pf.beta * pf.beta;
        rep.results["mu"] = doubles(pf.mu);
        rep.results["labels"] = g.labels();
        rep.residual("perron_frobenius", pf.residual, 1e-10);
        std::ostringstream os;
        os << std::setprecision(12) << "beta\t" << pf.beta << "\nindex\t" << pf.beta * pf.beta << "\nvertex\tmu\n";
        for (int v = 0; v < g.size(); ++v)
          os << g.label(v) << '\t' << pf.mu[v] << '\n';
        rep.table = os.str();
      }
    } else if (*conn) {
      if (*conn_make) {
        auto c = flat_connection_a_n(a_rank(c_dynkin));
        rep.inputs["dynkin"] = c_dynkin;
        if (o_gauge->count()) {
          c = vertical_gauge(c, c_gauge);
          rep.inputs["gauge"] = c_gauge;
        }
        rep.results["connection"] = to_json(c);
      } else if (*conn_check) {
        if (c_dynkin.empty() == c_file.empty())
          throw UsageError("give exactly one of --dynkin or a connection file");
        BiUnitaryConnection c = c_file.empty() ? flat_connection_a_n(a_rank(c_dynkin))
                                               : connection_from_json(read_json(c_file));
        rep.inputs[c_file.empty() ? "dynkin" : "file"] = c_file.empty() ? c_dynkin : c_file;
        const auto b = check_biunitarity(c);
        rep.results["unitarity"] = b.unitarity;
        rep.results["reflection"] = b.reflection;
        rep.residual("biunitarity", b.max(), cfg.tol_biunitary);
        if (c_flat) {
          const std::string rect = st.pick<std::string>(o_rect, c_rect_flag, "rect", "4x4");
          const auto [h, v] = parse_rect(rect);
          rep.inputs["rect"] = rect;
          const auto f = check_flatness(c, h, v, cfg.tol_flat);
          rep.results["rectangles"] = f.rectangles;
          rep.results["transport_unitarity"] = f.transport_unitarity;
          rep.residual("flatness", std::max(f.residual, f.transport_unitarity), cfg.tol_flat);
        }
      } else {
        rep.inputs["dynkin"] = c_dynkin;
        const auto fam = connection_family(flat_connection_a_n(a_rank(c_dynkin)), c_depth);
        json members = json::array();
        for (const auto &m : fam.members)
          members.push_back({{"label", m.label}, {"dimension", m.dimension}, {"even", m.even},
                             {"edges", m.connection.num_edges()}});
        rep.results["members"] = members;
        rep.results["fusion"] = fam.fusion;
        rep.results["global_dimension"] = fam.global_dimension();
        rep.results["even_size"] = fam.even_part().size();
        rep.verdicts["closed"] = fam.closed;
      }
    } else if (*brat) {
      const Graph g = load_graph(b_dynkin, b_file);
      const int kmax = st.pick(o_kmax, b_kmax_flag, "kmax", 6);
      rep.inputs["kmax"] = kmax;
      const auto d = bratteli(g, kmax);
      rep.results = to_json(d);
      rep.verdicts["consistent"] = d.consistent();
      rep.table = to_tsv(d);
    } else if (*pm) {
      const int k = st.pick(o_k, p_k_flag, "k", 2);
      const int spots = st.pick(o_spot, p_spot_flag, "spot_checks", 10);
      rep.inputs["dynkin"] = p_dynkin;
      rep.inputs["k"] = k;
      rep.inputs["report"] = p_report;
      const auto fam = connection_family(flat_connection_a_n(a_rank(p_dynkin)), 10);
      const MPO p = pmpo(fam, k);
      rep.results["ambient_dimension"] = p.ambient_dimension();
      rep.results["bond_dimension"] = p.sites.back().bottom();
      std::stringstream items(p_report);
      std::string item;
      std::ostringstream tsv;
      while (std::getline(items, item, ',')) {
        if (item == "trace") {
          const cplx tr = mpo_trace(p);
          std::ostringstream v;
          v << std::fixed << std::setprecision(6) << tr.real();
          rep.results["trace"] = v.str();
          rep.results["rank"] = std::llround(tr.real());
          rep.residual("trace_integrality", std::abs(tr - cplx(double(std::llround(tr.real())), 0.0)),
                       cfg.tol_trace);
          tsv << "trace\t" << v.str() << '\n';
        } else if (item == "projector") {
          double idem = 0.0, herm = 0.0;
          if (p.ambient_dimension() <= 65536.0) {
            const auto s = sparse_realization(p);
            const SparseMatrixXc d = SparseMatrixXc(s * s) - s;
            const SparseMatrixXc h = s - SparseMatrixXc(s.adjoint());
            for (std::int64_t i = 0; i < d.outerSize(); ++i)
              for (SparseMatrixXc::InnerIterator it(d, i); it; ++it)
                idem = std::max(idem, std::abs(it.value()));
            for (std::int64_t i = 0; i < h.outerSize(); ++i)
              for (SparseMatrixXc::InnerIterator it(h, i); it; ++it)
                herm = std::max(herm, std::abs(it.value()));
            rep.results["projector_method"] = "exact";
          } else {
            if (p.ambient_dimension() > double(1 << 26))
              throw SizeError("projector check refused above 2^26");
            std::mt19937_64 rng(cfg.seed);
            std::normal_distribution<double> gauss;
            const auto n = static_cast<Eigen::Index>(p.ambient_dimension());
            VectorXc pu, u;
            for (int i = 0; i < spots; ++i) {
              VectorXc v(n);
              for (Eigen::Index j = 0; j < n; ++j)
                v(j) = cplx(gauss(rng), gauss(rng));
              v.normalize();
              const VectorXc pv = mpo_apply(p, v);
              idem = std::max(idem, (mpo_apply(p, pv) - pv).norm());
              if (u.size())
                herm = std::max(herm, std::abs(u.dot(pv) - pu.dot(v)));
              u = v;
              pu = pv;
            }
            rep.results["projector_method"] = "spot checks";
            rep.inputs["spot_checks"] = spots;
          }
          rep.residual("idempotence", idem, cfg.tol_projector);
          rep.residual("hermiticity", herm, cfg.tol_hermitian);
        } else {
          throw UsageError("unknown --report item '" + item + "'");
        }
      }
    } else if (*mi) {
      if (*mi_enum) {
        if (m_builtin.empty() == m_md_file.empty())
          throw UsageError("give exactly one of --builtin or --md");
        const ModularData md = m_builtin.empty() ? modular_data_from_json(read_json(m_md_file)) : builtin(m_builtin).md;
        const int cap = st.pick(o_cap, m_cap_flag, "cap", 0);
        rep.inputs["model"] = m_builtin.empty() ? m_md_file : m_builtin;
        rep.inputs["cap"] = cap > 0 ? cap : default_cap(md);
        const auto res = enumerate_modular_invariants(md, cap);
        json list = json::array();
        bool all_ok = true;
        for (const auto &z : res.invariants) {
          list.push_back(int_matrix_json(z));
          all_ok = all_ok && check_invariant(md, z).ok();
        }
        rep.results["labels"] = md.labels;
        rep.results["count"] = res.invariants.size();
        rep.results["free_variables"] = res.free_variables;
        rep.results["exact"] = res.exact;
        rep.results["invariants"] = list;
        rep.verdicts["axioms"] = all_ok;
        std::ostringstream os;
        os << "index\tmatrix\n";
        for (std::size_t i = 0; i < res.invariants.size(); ++i)
          os << i << '\t' << int_matrix_json(res.invariants[i]).dump() << '\n';
        rep.table = os.str();
      } else {
        const IntMatrix z1 = int_matrix_from_json(read_json(m_a)), z2 = int_matrix_from_json(read_json(m_b));
        rep.inputs["a"] = m_a;
        rep.inputs["b"] = m_b;
        const IntMatrix p = compose_invariants(z1, z2);
        rep.results["product"] = int_matrix_json(p);
        if (!m_builtin.empty()) {
          const auto md = builtin(m_builtin).md;
          const int cap = st.pick(o_cap2, m_cap_flag, "cap", 0);
          const auto pool = enumerate_modular_invariants(md, cap).invariants;
          const auto d = decompose_product(p, pool);
          rep.inputs["pool"] = m_builtin;
          json ms = json::array();
          for (const auto &m : d.multisets) {
            json one = json::array();
            for (int i : m)
              one.push_back(int_matrix_json(pool[i]));
            ms.push_back(one);
          }
          rep.results["status"] = d.status();
          rep.results["decompositions"] = ms;
          rep.verdicts["decomposes"] = d.found();
        }
      }
    } else if (*tube) {
      if (int(!t_builtin.empty()) + int(!t_file.empty()) + int(!t_dynkin.empty()) != 1)
        throw UsageError("give exactly one of --builtin, --fsymbols or --dynkin");
      FSymbolData fs;
      if (!t_builtin.empty()) {
        fs = f_symbols_builtin(t_builtin);
        rep.inputs["builtin"] = t_builtin;
      } else if (!t_file.empty()) {
        fs = f_symbols_from_json(read_json(t_file));
        rep.inputs["fsymbols"] = t_file;
      } else {
        fs = f_symbols_from_family(connection_family(flat_connection_a_n(a_rank(t_dynkin)), 10));
        rep.inputs["dynkin"] = t_dynkin;
      }
      const double pent = pentagon_residual(fs);
      rep.residual("pentagon", pent, 1e-10);
      rep.residual("f_unitarity", f_unitarity_residual(fs), 1e-10);
      if (pent >= 1e-10)
        throw NumericalError("pentagon residual " + std::to_string(pent) + " above 1e-10");
      const auto t = tube_algebra(fs);
      AnyonOptions aopt;
      aopt.seed = cfg.seed;
      rep.results["labels"] = fs.ring.labels();
      rep.results["dimension"] = t.dim();
      if (*tube_any) {
        const auto s = anyons(t, aopt);
        rep.results["anyons"] = s.count();
        rep.results["block_dims"] = s.block_dims;
        rep.results["quantum_dims"] = doubles(s.quantum_dims);
        rep.residual("associativity", t.associativity_residual(), 1e-9);
        rep.residual("star", t.star_residual(), 1e-9);
        rep.residual("idempotents", s.idempotent_residual, 1e-8);
        rep.verdicts["block_sum"] = s.dimension_sum() == t.dim();
      } else {
        const auto md = builtin(t_md).md;
        rep.inputs["md"] = t_md;
        const auto c = cross_check_double(t, md, aopt);
        rep.results["anyons"] = c.anyons;
        rep.results["md_labels"] = c.labels;
        rep.residuals["quantum_dims"] = c.dim_deviation;
        rep.verdicts["count"] = c.count;
        rep.verdicts["block_sum"] = c.block_sum;
        rep.verdicts["quantum_dims"] = c.quantum_dims;
        rep.verdicts["verlinde"] = c.verlinde;
      }
    } else if (*va) {
      cfg.quick = st.pick(nullptr, v_quick, "quick", false) || v_quick;
      if (cfg.quick)
        cfg.spot_checks = 10;
      cfg.spot_checks = st.pick<int>(nullptr, 0, "spot_checks", cfg.spot_checks);
      cfg.enforce_runtime = st.pick<bool>(nullptr, false, "enforce_runtime", true);
      rep.inputs["acceptance"] = cfg.to_json();
      json list = json::array();
      std::ostringstream os;
      os << "id\tcriterion\tverdict\tresidual\tdetail\n";
      for (const auto &r : run_acceptance(cfg)) {
        list.push_back(r.to_json(timing));
        rep.verdicts["criterion_" + std::string(r.id < 10 ? "0" : "") + std::to_string(r.id)] = r.pass;
        os << r.id << '\t' << r.name << '\t' << (r.pass ? "PASS" : "FAIL") << '\t' << r.residual << '\t'
           << r.detail << '\n';
      }
      rep.results["criteria"] = list;
      rep.table = os.str();
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const SizeError &e) {
    std::cerr << "size error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError &e) {
    rep.verdicts["numerical"] = false;
    rep.results["error"] = e.what();
    print(rep, format, false);
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  print(rep, format, timing);
  if (!rep.pass()) {
    std::cerr << "check failed: " << rep.first_failure() << "\n";
    return 1;
  }
  return 0;
}
