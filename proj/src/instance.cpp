#include "gsync/instance.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <Eigen/QR>

namespace gsync {

template <typename S>
Mat<S> Measurements<S>::at(Index i, Index j) const {
  const bool flip = i > j;
  const Index a = flip ? j : i;
  const Index b = flip ? i : j;
  const auto& edges = graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (edges[k].i == a && edges[k].j == b)
      return flip ? Mat<S>(blocks[k].adjoint()) : blocks[k];
  throw ParameterError("no measurement on (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

template <typename S>
Mat<S> haar_unitary(Index r, Rng& rng) {
  const Mat<S> g = gaussian_matrix<S>(r, r, rng);
  Eigen::HouseholderQR<Mat<S>> qr(g);
  Mat<S> q = qr.householderQ() * Mat<S>::Identity(r, r);
  const Mat<S> R = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index k = 0; k < r; ++k) {
    const S d = R(k, k);
    const double mag = std::abs(d);
    q.col(k) *= mag > 0.0 ? S(d / mag) : S(1.0);
  }
  return q;
}

template <typename S>
Mat<S> sample_ground_truth(Index n, Index r, std::uint64_t seed) {
  if (n < 1 || r < 1) throw ParameterError("ground truth needs n, r >= 1");
  Rng rng(seed);
  Mat<S> z(n * r, r);
  for (Index i = 0; i < n; ++i) z.middleRows(i * r, r) = haar_unitary<S>(r, rng);
  return z;
}

Mat<double> sample_rotation_truth(Index n, Index r, std::uint64_t seed) {
  Mat<double> z = sample_ground_truth<double>(n, r, seed);
  for (Index i = 0; i < n; ++i)
    if (z.middleRows(i * r, r).determinant() < 0.0) z.block(i * r, 0, r, 1) *= -1.0;
  return z;
}

template <typename S>
SyncInstance<S> make_instance(const Graph& g, Mat<S> truth, const NoiseModel& noise,
                              std::uint64_t seed) {
  const Index n = g.n();
  if (truth.cols() < 1 || truth.rows() != n * truth.cols())
    throw ParameterError("ground truth shape does not match graph");
  const Index r = truth.cols();
  if (noise.kind == NoiseKind::gaussian && !(noise.sigma >= 0.0))
    throw ParameterError("noise sigma must be >= 0");

  Rng rng(seed);
  std::vector<Mat<S>> blocks;
  std::vector<typename BlockSymmetricMatrix<S>::UpperBlock> noise_blocks;
  blocks.reserve(g.edge_count());
  for (const auto& e : g.edges()) {
    Mat<S> d = Mat<S>::Zero(r, r);
    if (noise.kind == NoiseKind::gaussian) d = noise.sigma * gaussian_matrix<S>(r, r, rng);
    blocks.push_back(truth.middleRows(e.i * r, r) * truth.middleRows(e.j * r, r).adjoint() + d);
    noise_blocks.push_back({e.i, e.j, std::move(d)});
  }
  SyncInstance<S> inst;
  inst.measurements = Measurements<S>{g, r, std::move(blocks)};
  inst.truth = std::move(truth);
  inst.delta = BlockSymmetricMatrix<S>(
      n, r, std::vector<Mat<S>>(static_cast<std::size_t>(n), Mat<S>::Zero(r, r)),
      std::move(noise_blocks));
  return inst;
}

template <typename S>
BlockSymmetricMatrix<S> connection_laplacian(const Measurements<S>& m) {
  const Graph& g = m.graph;
  const Index r = m.r;
  std::vector<Mat<S>> diag;
  diag.reserve(static_cast<std::size_t>(g.n()));
  for (Index i = 0; i < g.n(); ++i) diag.push_back(g.degree(i) * Mat<S>::Identity(r, r));
  std::vector<typename BlockSymmetricMatrix<S>::UpperBlock> upper;
  upper.reserve(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const auto& e = g.edges()[k];
    upper.push_back({e.i, e.j, -e.w * m.blocks[k]});
  }
  return BlockSymmetricMatrix<S>(g.n(), r, std::move(diag), std::move(upper));
}

template <typename S>
BlockSymmetricMatrix<S> connection_laplacian_from_truth(const SyncInstance<S>& inst) {
  // D (L kron I) D^*: block (i, j) = L_ij Z_i Z_j^*; then subtract Delta.
  const Graph& g = inst.graph();
  const Index r = inst.r();
  const auto& z = inst.truth;
  std::vector<Mat<S>> diag;
  for (Index i = 0; i < g.n(); ++i)
    diag.push_back(g.degree(i) * z.middleRows(i * r, r) * z.middleRows(i * r, r).adjoint() -
                   inst.delta.diagonal()[i]);
  std::vector<typename BlockSymmetricMatrix<S>::UpperBlock> upper;
  for (const auto& u : inst.delta.upper()) {
    double w = 0.0;
    for (const auto& [j, wj] : g.adjacency()[u.i])
      if (j == u.j) w = wj;
    upper.push_back({u.i, u.j,
                     -w * z.middleRows(u.i * r, r) * z.middleRows(u.j * r, r).adjoint() - u.block});
  }
  return BlockSymmetricMatrix<S>(g.n(), r, std::move(diag), std::move(upper));
}

template <typename S>
double noise_operator_norm(const BlockSymmetricMatrix<S>& delta, double rel_tol) {
  return operator_norm(delta, rel_tol);
}

// ---- file formats -------------------------------------------------------

InstanceFormat parse_instance_format(const std::string& s) {
  if (s == "edge_measurements") return InstanceFormat::edge_measurements;
  if (s == "g2o_2d" || s == "g2o") return InstanceFormat::g2o_2d;
  throw ParameterError("unknown instance format '" + s + "'");
}

namespace {

std::vector<std::string> tokenize(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::istringstream ss(line);
  std::vector<std::string> tok;
  for (std::string t; ss >> t;) tok.push_back(t);
  return tok;
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

Index to_index(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw ParseError("bad vertex index '" + s + "'", line);
  }
}

template <typename S>
struct RawEdge {
  Index i, j;
  Mat<S> block;
};

template <typename S>
Measurements<S> assemble(Index n, Index r, std::vector<RawEdge<S>> raw) {
  std::vector<Edge> edges;
  std::vector<Mat<S>> blocks;
  for (auto& e : raw) {
    edges.push_back({e.i, e.j, 1.0});
    blocks.push_back(std::move(e.block));
  }
  return Measurements<S>{Graph(n, std::move(edges)), r, std::move(blocks)};
}

template <typename S>
ParsedInstance parse_edge_rows(std::istream& in, Index r, Index n_header, std::size_t& lineno) {
  ParsedInstance out;
  std::vector<RawEdge<S>> raw;
  std::map<std::pair<Index, Index>, std::size_t> seen;
  Index max_vertex = -1;
  std::size_t off_orthogonal = 0;
  std::size_t first_off = 0;
  constexpr bool cplx = is_complex<S>::value;
  const std::size_t want = 2 + static_cast<std::size_t>(r * r) * (cplx ? 2 : 1);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != want)
      throw ParseError("expected " + std::to_string(want) + " fields, got " +
                           std::to_string(tok.size()),
                       lineno);
    Index i = to_index(tok[0], lineno);
    Index j = to_index(tok[1], lineno);
    if (i == j) throw ParseError("self-loop", lineno);
    Mat<S> m(r, r);
    std::size_t t = 2;
    for (Index a = 0; a < r; ++a)
      for (Index b = 0; b < r; ++b) {
        if constexpr (cplx) {
          const double re = to_double(tok[t], lineno);
          const double im = to_double(tok[t + 1], lineno);
          m(a, b) = S(re, im);
          t += 2;
        } else {
          m(a, b) = to_double(tok[t++], lineno);
        }
      }
    if (i > j) {
      std::swap(i, j);
      m = m.adjoint().eval();
    }
    if (!seen.emplace(std::make_pair(i, j), raw.size()).second)
      throw ParseError("duplicate edge (" + std::to_string(i) + ", " + std::to_string(j) + ")",
                       lineno);
    if ((m * m.adjoint() - Mat<S>::Identity(r, r)).norm() > 1e-6 && off_orthogonal++ == 0)
      first_off = lineno;
    max_vertex = std::max({max_vertex, i, j});
    raw.push_back({i, j, std::move(m)});
  }
  if (off_orthogonal > 0)
    out.warnings.push_back(std::to_string(off_orthogonal) +
                           " measurement block(s) are not orthogonal within 1e-6 (first at line " +
                           std::to_string(first_off) + ")");
  const Index n = std::max(n_header, max_vertex + 1);
  if (n_header > 0 && max_vertex >= n_header) throw ParseError("vertex index exceeds header n", lineno);
  out.measurements = assemble<S>(std::max<Index>(n, 1), r, std::move(raw));
  return out;
}

ParsedInstance parse_edge_measurements(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    Index r = 0;
    Index n = 0;
    std::string field;
    for (std::size_t k = 0; k + 1 < tok.size(); k += 2) {
      if (tok[k] == "r")
        r = to_index(tok[k + 1], lineno);
      else if (tok[k] == "field")
        field = tok[k + 1];
      else if (tok[k] == "n")
        n = to_index(tok[k + 1], lineno);
      else
        throw ParseError("unknown header key '" + tok[k] + "'", lineno);
    }
    if (tok.size() % 2 != 0 || r < 1 || field.empty())
      throw ParseError("expected header 'r <r> field <real|complex> [n <n>]'", lineno);
    if (field == "real") return parse_edge_rows<double>(in, r, n, lineno);
    if (field == "complex") return parse_edge_rows<cdouble>(in, r, n, lineno);
    throw ParseError("unknown field '" + field + "'", lineno);
  }
  throw ParseError("missing header", lineno);
}

ParsedInstance parse_g2o(std::istream& in) {
  ParsedInstance out;
  std::vector<RawEdge<double>> raw;
  std::map<std::pair<Index, Index>, std::size_t> seen;
  Index max_vertex = -1;
  std::size_t duplicates = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "VERTEX_SE2") {
      if (tok.size() >= 2) max_vertex = std::max(max_vertex, to_index(tok[1], lineno));
      continue;
    }
    if (tok[0] != "EDGE_SE2") throw ParseError("unknown record tag '" + tok[0] + "'", lineno);
    if (tok.size() < 6) throw ParseError("EDGE_SE2 needs i j dx dy dtheta", lineno);
    Index i = to_index(tok[1], lineno);
    Index j = to_index(tok[2], lineno);
    if (i == j) throw ParseError("self-loop", lineno);
    const double theta = to_double(tok[5], lineno);
    for (std::size_t k = 3; k < tok.size(); ++k) to_double(tok[k], lineno);
    Eigen::MatrixXd rot(2, 2);
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    if (i > j) {
      std::swap(i, j);
      rot.transposeInPlace();
    }
    if (!seen.emplace(std::make_pair(i, j), raw.size()).second) {
      if (duplicates++ == 0)
        out.warnings.push_back("duplicate edge (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") at line " + std::to_string(lineno) +
                               " ignored; keeping first");
      continue;
    }
    max_vertex = std::max({max_vertex, i, j});
    raw.push_back({i, j, std::move(rot)});
  }
  if (duplicates > 1)
    out.warnings.push_back(std::to_string(duplicates) + " duplicate edges ignored in total");
  out.measurements = assemble<double>(std::max<Index>(max_vertex + 1, 1), 2, std::move(raw));
  return out;
}

}  // namespace

ParsedInstance parse_instance(std::istream& in, InstanceFormat format) {
  return format == InstanceFormat::g2o_2d ? parse_g2o(in) : parse_edge_measurements(in);
}

ParsedInstance parse_instance_file(const std::string& path, InstanceFormat format) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open instance file '" + path + "'");
  return parse_instance(in, format);
}

template <typename S>
void write_edge_measurements(std::ostream& out, const Measurements<S>& m) {
  out << std::setprecision(17);
  out << "r " << m.r << " field " << to_string(field_of<S>) << " n " << m.graph.n() << '\n';
  for (std::size_t k = 0; k < m.blocks.size(); ++k) {
    const auto& e = m.graph.edges()[k];
    out << e.i << ' ' << e.j;
    for (Index a = 0; a < m.r; ++a)
      for (Index b = 0; b < m.r; ++b) {
        if constexpr (is_complex<S>::value)
          out << ' ' << m.blocks[k](a, b).real() << ' ' << m.blocks[k](a, b).imag();
        else
          out << ' ' << m.blocks[k](a, b);
      }
    out << '\n';
  }
}

namespace {

// Angle of the rotation nearest a 2 x 2 block. When the block is exactly
// [cos t, -sin t; sin t, cos t] for a double t within a few ulps of atan2's
// answer, that t is returned so parse(write(m)) reproduces m bit for bit.
double rotation_angle(const Mat<double>& m) {
  const double t0 = std::atan2(m(1, 0) - m(0, 1), m(0, 0) + m(1, 1));
  auto exact = [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return c == m(0, 0) && c == m(1, 1) && s == m(1, 0) && -s == m(0, 1);
  };
  double up = t0, down = t0;
  for (int k = 0; k <= 16; ++k) {
    if (exact(up)) return up;
    if (exact(down)) return down;
    up = std::nextafter(up, HUGE_VAL);
    down = std::nextafter(down, -HUGE_VAL);
  }
  return t0;
}

}  // namespace

void write_g2o_2d(std::ostream& out, const Measurements<double>& m) {
  if (m.r != 2) throw ParameterError("g2o_2d output requires r = 2");
  for (std::size_t k = 0; k < m.blocks.size(); ++k)
    if (m.blocks[k].determinant() < 0.0)
      throw ParameterError("g2o cannot encode a reflection (edge " + std::to_string(m.graph.edges()[k].i) +
                           ", " + std::to_string(m.graph.edges()[k].j) + ")");
  out << std::setprecision(17);
  for (Index i = 0; i < m.graph.n(); ++i) out << "VERTEX_SE2 " << i << " 0 0 0\n";
  for (std::size_t k = 0; k < m.blocks.size(); ++k) {
    const auto& e = m.graph.edges()[k];
    out << "EDGE_SE2 " << e.i << ' ' << e.j << " 0 0 " << rotation_angle(m.blocks[k])
        << " 1 0 0 1 0 1\n";
  }
}

template <typename S>
void write_point(std::ostream& out, const Mat<S>& y, Index r) {
  out << std::setprecision(17);
  out << y.rows() / r << ' ' << r << ' ' << y.cols() << ' ' << to_string(field_of<S>) << '\n';
  for (Index a = 0; a < y.rows(); ++a) {
    for (Index b = 0; b < y.cols(); ++b) {
      if (b) out << ' ';
      if constexpr (is_complex<S>::value)
        out << y(a, b).real() << ' ' << y(a, b).imag();
      else
        out << y(a, b);
    }
    out << '\n';
  }
}

ParsedPoint read_point(std::istream& in) {
  ParsedPoint pt;
  Index n = 0, p = 0;
  std::string field;
  if (!(in >> n >> pt.r >> p >> field) || n < 1 || pt.r < 1 || p < 1)
    throw ParseError("expected point header 'n r p field'", 1);
  pt.field = parse_field(field);
  const Index rows = n * pt.r;
  if (pt.field == Field::real) {
    pt.real.resize(rows, p);
    for (Index a = 0; a < rows; ++a)
      for (Index b = 0; b < p; ++b)
        if (!(in >> pt.real(a, b))) throw ParseError("truncated point data", 2 + a);
  } else {
    pt.complex.resize(rows, p);
    for (Index a = 0; a < rows; ++a)
      for (Index b = 0; b < p; ++b) {
        double re = 0, im = 0;
        if (!(in >> re >> im)) throw ParseError("truncated point data", 2 + a);
        pt.complex(a, b) = cdouble(re, im);
      }
  }
  return pt;
}

#define GSYNC_INSTANTIATE(S)                                                               \
  template struct Measurements<S>;                                                         \
  template Mat<S> haar_unitary<S>(Index, Rng&);                                            \
  template Mat<S> sample_ground_truth<S>(Index, Index, std::uint64_t);                     \
  template SyncInstance<S> make_instance<S>(const Graph&, Mat<S>, const NoiseModel&,       \
                                            std::uint64_t);                                \
  template BlockSymmetricMatrix<S> connection_laplacian<S>(const Measurements<S>&);        \
  template BlockSymmetricMatrix<S> connection_laplacian_from_truth<S>(                     \
      const SyncInstance<S>&);                                                             \
  template double noise_operator_norm<S>(const BlockSymmetricMatrix<S>&, double);          \
  template void write_edge_measurements<S>(std::ostream&, const Measurements<S>&);         \
  template void write_point<S>(std::ostream&, const Mat<S>&, Index);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync
