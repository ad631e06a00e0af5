#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "gsync/block_matrix.hpp"
#include "gsync/graph.hpp"
#include "gsync/rng.hpp"

namespace gsync {

/// Relative measurements on a graph: blocks[k] is R_ij for graph.edges()[k]
/// (i < j). R_ji = R_ij^* is implied.
template <typename S>
struct Measurements {
  Graph graph;
  Index r = 1;
  std::vector<Mat<S>> blocks;

  Mat<S> at(Index i, Index j) const;
};

/// Ground truth plus noisy measurements. Z is stacked rn x r; delta holds the
/// noise blocks Delta_ij on edges (zero diagonal).
template <typename S>
struct SyncInstance {
  Measurements<S> measurements;
  Mat<S> truth;
  BlockSymmetricMatrix<S> delta;

  const Graph& graph() const { return measurements.graph; }
  Index n() const { return measurements.graph.n(); }
  Index r() const { return measurements.r; }
};

enum class NoiseKind { none, gaussian };

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;
  static NoiseModel gaussian(double s) { return {NoiseKind::gaussian, s}; }
};

/// Haar-distributed blocks on O(r) / U(r), stacked rn x r.
template <typename S>
Mat<S> sample_ground_truth(Index n, Index r, std::uint64_t seed);

/// Haar-distributed blocks on SO(r): an O(r) sample with its first column
/// negated when the determinant is negative.
Mat<double> sample_rotation_truth(Index n, Index r, std::uint64_t seed);

/// Haar sample on O(r) / U(r) from QR with the sign/phase fix of diag(R).
template <typename S>
Mat<S> haar_unitary(Index r, Rng& rng);

/// R_ij = Z_i Z_j^* + Delta_ij on every edge.
template <typename S>
SyncInstance<S> make_instance(const Graph& g, Mat<S> truth, const NoiseModel& noise,
                              std::uint64_t seed);

/// Lhat: deg(i) I_r on the diagonal, -R_ij on edges.
template <typename S>
BlockSymmetricMatrix<S> connection_laplacian(const Measurements<S>& m);

/// The same matrix assembled as D (L kron I_r) D^* - Delta from the truth.
template <typename S>
BlockSymmetricMatrix<S> connection_laplacian_from_truth(const SyncInstance<S>& inst);

/// ||Delta||_op. Zero matrix gives 0.
template <typename S>
double noise_operator_norm(const BlockSymmetricMatrix<S>& delta, double rel_tol = 1e-8);

// ---- file formats -------------------------------------------------------

enum class InstanceFormat { edge_measurements, g2o_2d };

InstanceFormat parse_instance_format(const std::string& s);

struct ParsedInstance {
  std::variant<Measurements<double>, Measurements<cdouble>> measurements;
  std::vector<std::string> warnings;

  Field field() const { return measurements.index() == 0 ? Field::real : Field::complex; }
};

ParsedInstance parse_instance(std::istream& in, InstanceFormat format);
ParsedInstance parse_instance_file(const std::string& path, InstanceFormat format);

/// Header `r <r> field <real|complex>`, then `i j` and the r*r entries of R_ij
/// row-major (complex: re im interleaved). 17 significant digits.
template <typename S>
void write_edge_measurements(std::ostream& out, const Measurements<S>& m);

/// VERTEX_SE2 for every vertex, then EDGE_SE2 records with zero translation and
/// identity information (r = 2, real). The angle is that of the rotation
/// nearest each block; blocks that are exact cos/sin pairs of a double (as
/// parsed from g2o) get that double back. Throws on reflections (det < 0).
void write_g2o_2d(std::ostream& out, const Measurements<double>& m);

/// Stiefel point text format: header `n r p field`, then rn rows of p entries.
template <typename S>
void write_point(std::ostream& out, const Mat<S>& y, Index r);
struct ParsedPoint {
  Field field = Field::real;
  Index r = 1;
  Mat<double> real;
  Mat<cdouble> complex;
};
ParsedPoint read_point(std::istream& in);

}  // namespace gsync
