#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "gsync/types.hpp"

namespace gsync {

struct Edge {
  Index i;
  Index j;
  double w;
};

/// Weighted undirected graph on vertices 0..n-1. Edges are stored with i < j,
/// no duplicates, strictly positive weights. Immutable after construction.
class Graph {
 public:
  Graph() = default;
  /// Validates and normalizes edge orientation; throws ParameterError.
  Graph(Index n, std::vector<Edge> edges);

  Index n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Neighbor lists (j, w) per vertex, both orientations.
  const std::vector<std::vector<std::pair<Index, double>>>& adjacency() const { return adj_; }
  double degree(Index i) const;
  double max_degree() const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<Index, double>>> adj_;
};

enum class GraphKind { complete, cycle, circulant, erdos_renyi, edge_list };

GraphKind parse_graph_kind(const std::string& s);
std::string to_string(GraphKind k);

struct GraphParams {
  GraphKind kind = GraphKind::complete;
  Index n = 1;
  Index degree = 2;         // circulant
  double probability = 0.5; // erdos_renyi
  std::string path;         // edge_list
  std::uint64_t seed = 0;
};

Graph build_graph(const GraphParams& params);

Graph complete_graph(Index n);
Graph cycle_graph(Index n);
/// Vertex i joined to i +- 1..degree/2 (mod n). Degree must be even and < n.
Graph circulant_graph(Index n, Index degree);
Graph erdos_renyi_graph(Index n, double q, std::uint64_t seed);

/// Edge-list text: `i j [w]` per line, `#` comments, blank lines ignored.
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);

/// L = diag(A 1) - A.
Eigen::MatrixXd laplacian(const Graph& g);
Eigen::SparseMatrix<double> sparse_laplacian(const Graph& g);

bool connectivity(const Graph& g);

struct LaplacianSummary {
  double lambda2 = 0.0;
  double lambda_max = 0.0;
  bool connected = false;
};

/// Dense eigensolve up to `dense_limit` vertices, Lanczos on the operator
/// deflated against the all-ones vector above that.
LaplacianSummary laplacian_summary(const Graph& g, Index dense_limit = 2000);

}  // namespace gsync
