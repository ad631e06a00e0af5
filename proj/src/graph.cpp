#include "gsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gsync/lanczos.hpp"
#include "gsync/rng.hpp"

namespace gsync {

std::string to_string(Field f) { return f == Field::real ? "real" : "complex"; }

Field parse_field(const std::string& s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  throw ParameterError("unknown field '" + s + "'");
}

Graph::Graph(Index n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 1) throw ParameterError("graph needs n >= 1");
  std::set<std::pair<Index, Index>> seen;
  for (auto& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= n) throw ParameterError("edge endpoint out of range");
    if (e.i == e.j) throw ParameterError("self-loop at vertex " + std::to_string(e.i));
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw ParameterError("edge weight must be positive and finite");
    if (!seen.insert({e.i, e.j}).second)
      throw ParameterError("duplicate edge (" + std::to_string(e.i) + ", " +
                           std::to_string(e.j) + ")");
  }
  adj_.assign(static_cast<std::size_t>(n), {});
  for (const auto& e : edges_) {
    adj_[e.i].emplace_back(e.j, e.w);
    adj_[e.j].emplace_back(e.i, e.w);
  }
}

double Graph::degree(Index i) const {
  double d = 0.0;
  for (const auto& [j, w] : adj_[i]) d += w;
  return d;
}

double Graph::max_degree() const {
  double m = 0.0;
  for (Index i = 0; i < n_; ++i) m = std::max(m, degree(i));
  return m;
}

GraphKind parse_graph_kind(const std::string& s) {
  if (s == "complete") return GraphKind::complete;
  if (s == "cycle") return GraphKind::cycle;
  if (s == "circulant") return GraphKind::circulant;
  if (s == "erdos_renyi" || s == "er") return GraphKind::erdos_renyi;
  if (s == "edge_list") return GraphKind::edge_list;
  throw ParameterError("unknown graph kind '" + s + "'");
}

std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::complete: return "complete";
    case GraphKind::cycle: return "cycle";
    case GraphKind::circulant: return "circulant";
    case GraphKind::erdos_renyi: return "erdos_renyi";
    case GraphKind::edge_list: return "edge_list";
  }
  return "?";
}

Graph complete_graph(Index n) {
  if (n < 1) throw ParameterError("complete graph needs n >= 1");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return Graph(n, std::move(edges));
}

Graph cycle_graph(Index n) {
  if (n < 3) throw ParameterError("cycle graph needs n >= 3");
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  edges.push_back({0, n - 1, 1.0});
  return Graph(n, std::move(edges));
}

Graph circulant_graph(Index n, Index degree) {
  if (n < 1) throw ParameterError("circulant graph needs n >= 1");
  if (degree < 0 || degree % 2 != 0 || degree >= n)
    throw ParameterError("circulant degree must be even and < n");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index k = 1; k <= degree / 2; ++k) {
      const Index j = (i + k) % n;
      edges.push_back({std::min(i, j), std::max(i, j), 1.0});
    }
  return Graph(n, std::move(edges));
}

Graph erdos_renyi_graph(Index n, double q, std::uint64_t seed) {
  if (n < 1) throw ParameterError("ER graph needs n >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("ER probability must lie in (0, 1]");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < q) edges.push_back({i, j, 1.0});
  return Graph(n, std::move(edges));
}

Graph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  Index max_vertex = -1;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::pair<Index, Index>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'i j [w]'", lineno);
    Edge e{};
    try {
      std::size_t pos = 0;
      e.i = std::stoll(tok[0], &pos);
      if (pos != tok[0].size()) throw std::invalid_argument("i");
      e.j = std::stoll(tok[1], &pos);
      if (pos != tok[1].size()) throw std::invalid_argument("j");
      e.w = tok.size() == 3 ? std::stod(tok[2], &pos) : 1.0;
      if (tok.size() == 3 && pos != tok[2].size()) throw std::invalid_argument("w");
    } catch (const std::exception&) {
      throw ParseError("malformed edge row '" + line + "'", lineno);
    }
    if (e.i < 0 || e.j < 0) throw ParseError("negative vertex index", lineno);
    if (e.i == e.j) throw ParseError("self-loop", lineno);
    if (!(e.w > 0.0)) throw ParseError("non-positive weight", lineno);
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.insert({e.i, e.j}).second) throw ParseError("duplicate edge", lineno);
    max_vertex = std::max(max_vertex, e.j);
    edges.push_back(e);
  }
  return Graph(std::max<Index>(max_vertex + 1, 1), std::move(edges));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << std::setprecision(17);
  for (const auto& e : g.edges()) out << e.i << ' ' << e.j << ' ' << e.w << '\n';
}

Graph build_graph(const GraphParams& p) {
  switch (p.kind) {
    case GraphKind::complete: return complete_graph(p.n);
    case GraphKind::cycle: return cycle_graph(p.n);
    case GraphKind::circulant: return circulant_graph(p.n, p.degree);
    case GraphKind::erdos_renyi: return erdos_renyi_graph(p.n, p.probability, p.seed);
    case GraphKind::edge_list: return read_edge_list_file(p.path);
  }
  throw ParameterError("unknown graph kind");
}

Eigen::MatrixXd laplacian(const Graph& g) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) {
    L(e.i, e.j) -= e.w;
    L(e.j, e.i) -= e.w;
    L(e.i, e.i) += e.w;
    L(e.j, e.j) += e.w;
  }
  return L;
}

Eigen::SparseMatrix<double> sparse_laplacian(const Graph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.edge_count());
  for (const auto& e : g.edges()) {
    t.emplace_back(e.i, e.j, -e.w);
    t.emplace_back(e.j, e.i, -e.w);
    t.emplace_back(e.i, e.i, e.w);
    t.emplace_back(e.j, e.j, e.w);
  }
  Eigen::SparseMatrix<double> L(g.n(), g.n());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

bool connectivity(const Graph& g) {
  std::vector<char> seen(static_cast<std::size_t>(g.n()), 0);
  std::queue<Index> q;
  q.push(0);
  seen[0] = 1;
  Index count = 1;
  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    for (const auto& [u, w] : g.adjacency()[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        q.push(u);
      }
  }
  return count == g.n();
}

LaplacianSummary laplacian_summary(const Graph& g, Index dense_limit) {
  LaplacianSummary s;
  s.connected = connectivity(g);
  const Index n = g.n();
  if (n == 1) return s;
  if (n <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian(g), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("laplacian eigensolve failed");
    s.lambda2 = std::max(0.0, es.eigenvalues()(1));
    s.lambda_max = es.eigenvalues()(n - 1);
    return s;
  }
  const Eigen::SparseMatrix<double> L = sparse_laplacian(g);
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> op =
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return L * x; };
  std::function<void(Eigen::VectorXd&)> deflate = [](Eigen::VectorXd& x) {
    x.array() -= x.mean();
  };
  Rng rng(0x5eed);
  LanczosOptions opt;
  const double scale = 2.0 * g.max_degree();
  opt.tol = 1e-10 * scale;
  opt.max_restarts = 400;
  auto top = lanczos_extremal<double>(op, gaussian_matrix<double>(n, 1, rng), Spectrum::largest, opt);
  auto low = lanczos_extremal<double>(op, gaussian_matrix<double>(n, 1, rng), Spectrum::smallest,
                                      opt, deflate);
  s.lambda_max = top.value;
  s.lambda2 = std::max(0.0, low.value);
  return s;
}

}  // namespace gsync
