#pragma once

// Bi-dimensional graphs: finite lattice boxes with an outer boundary layer,
// graph/sup distances, spheres and balls.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qrotor {

using VertexId = std::int32_t;
using Coord = std::array<int, 2>;

/// Returned by distance queries for pairs in different components.
inline constexpr int kUnreachable = -1;

enum class Metric { graph, sup };
enum class LatticeKind { square, triangular, square_box, ring, tree };

LatticeKind parse_lattice_kind(std::string_view name);
Metric parse_metric(std::string_view name);
std::string to_string(LatticeKind kind);
std::string to_string(Metric metric);

struct LatticeSpec {
  LatticeKind kind = LatticeKind::square_box;
  int extent = 1;  // box radius n, ring length, or tree depth
  Metric metric = Metric::graph;
  int branching = 3;  // tree only: degree of every internal vertex
};

/// Immutable undirected simple graph. Vertices carry integer coordinates when
/// the graph comes from a lattice; the sup metric needs them.
///
/// Lattice graphs hold the box Lambda(o, extent) plus the sphere
/// Sigma(o, extent + 1) as an outer boundary layer. Per-source BFS results are
/// memoised behind a mutex, so a shared Graph is safe for concurrent readers.
class Graph {
 public:
  Graph(std::vector<Coord> coords, std::vector<std::vector<VertexId>> adjacency,
        Metric metric, VertexId origin, int extent, bool lattice_coords);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept;
  Graph& operator=(Graph&&) noexcept;
  ~Graph();

  std::size_t size() const { return adjacency_.size(); }
  std::span<const VertexId> neighbors(VertexId v) const;
  std::size_t edge_count() const;
  int degree(VertexId v) const { return static_cast<int>(adjacency_.at(v).size()); }
  int max_degree() const;

  const Coord& coord(VertexId v) const { return coords_.at(v); }
  std::optional<VertexId> find(const Coord& c) const;
  bool has_lattice_coords() const { return lattice_coords_; }

  VertexId origin() const { return origin_; }
  Metric metric() const { return metric_; }
  int extent() const { return extent_; }

  /// Distance in the configured metric; kUnreachable for disconnected pairs.
  int distance(VertexId a, VertexId b) const;
  /// Shortest-path length along edges, regardless of the configured metric.
  int hop_distance(VertexId a, VertexId b) const;
  /// All distances from `source` in the configured metric.
  std::shared_ptr<const std::vector<int>> distances_from(VertexId source) const;

  std::vector<VertexId> ball(VertexId center, int radius) const;
  std::vector<VertexId> sphere(VertexId center, int radius) const;

  /// Lambda(o, extent): the simulation box.
  std::vector<VertexId> box() const;
  /// Sigma(o, extent + 1): the outer boundary layer (empty for rings/trees).
  std::vector<VertexId> boundary_layer() const;

  /// Edge list as CSV with header "src,dst", one row per directed edge.
  void write_edge_csv(std::ostream& out) const;

 private:
  void check_vertex(VertexId v) const;
  std::shared_ptr<const std::vector<int>> bfs(VertexId source) const;

  std::vector<Coord> coords_;
  std::vector<std::vector<VertexId>> adjacency_;
  std::unordered_map<std::uint64_t, VertexId> index_;
  Metric metric_;
  VertexId origin_;
  int extent_;
  bool lattice_coords_;

  struct Cache;
  std::unique_ptr<Cache> cache_;
};

Graph build_lattice(const LatticeSpec& spec);
std::shared_ptr<const Graph> make_lattice(const LatticeSpec& spec);
/// Path 0 - 1 - ... - (n-1) with lattice coordinates (i, 0); small test models
/// pick their region and boundary vertices from it explicitly.
Graph build_chain(int n);
/// Tree whose internal vertices all have degree `degree` (root included).
Graph build_regular_tree(int degree, int depth);

struct BidimOptions {
  std::vector<VertexId> centers;  // empty: the origin only
  int degree_bound = 12;
  double ratio_ceiling = 8.0;
};

struct BidimReport {
  int max_degree = 0;
  double sphere_ratio_sup = 0.0;  // sup over centers, 1 <= n <= n_max of #Sigma(j,n)/n
  double ball_ratio_sup = 0.0;    // sup of #Lambda(j,n)/n^2
  int n_tested = 0;
  bool pass = false;
};

BidimReport verify_bidimensional(const Graph& g, int n_max, const BidimOptions& options = {});

}  // namespace qrotor
