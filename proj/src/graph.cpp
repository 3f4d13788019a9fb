#include "qrotor/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace qrotor {

namespace {

// Above this many vertices BFS results are not memoised.
constexpr std::size_t kCacheVertexLimit = 4096;

std::uint64_t pack(const Coord& c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[0])) << 32) |
         static_cast<std::uint32_t>(c[1]);
}

int chebyshev(const Coord& a, const Coord& b) {
  return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

int manhattan(const Coord& a, const Coord& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
}

int hex_distance(const Coord& a, const Coord& b) {
  const int dq = a[0] - b[0];
  const int dr = a[1] - b[1];
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

// Builds the subgraph of a translation-invariant lattice induced on the
// coordinates accepted by `inside`.
template <class Inside>
Graph lattice_region(int reach, std::span<const Coord> steps, Inside inside, Metric metric,
                     int extent) {
  std::vector<Coord> coords;
  for (int x = -reach; x <= reach; ++x)
    for (int y = -reach; y <= reach; ++y)
      if (inside(Coord{x, y})) coords.push_back({x, y});

  std::unordered_map<std::uint64_t, VertexId> index;
  index.reserve(coords.size() * 2);
  for (std::size_t i = 0; i < coords.size(); ++i)
    index.emplace(pack(coords[i]), static_cast<VertexId>(i));

  std::vector<std::vector<VertexId>> adjacency(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (const Coord& s : steps) {
      const Coord n{coords[i][0] + s[0], coords[i][1] + s[1]};
      if (auto it = index.find(pack(n)); it != index.end())
        adjacency[i].push_back(it->second);
    }
  }
  const VertexId origin = index.at(pack({0, 0}));
  return Graph(std::move(coords), std::move(adjacency), metric, origin, extent, true);
}

}  // namespace

struct Graph::Cache {
  std::mutex mutex;
  std::unordered_map<VertexId, std::shared_ptr<const std::vector<int>>> bfs;
};

LatticeKind parse_lattice_kind(std::string_view name) {
  if (name == "square") return LatticeKind::square;
  if (name == "triangular") return LatticeKind::triangular;
  if (name == "square_box") return LatticeKind::square_box;
  if (name == "ring") return LatticeKind::ring;
  if (name == "tree") return LatticeKind::tree;
  throw std::invalid_argument("unknown lattice kind '" + std::string(name) + "'");
}

Metric parse_metric(std::string_view name) {
  if (name == "graph") return Metric::graph;
  if (name == "sup") return Metric::sup;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::square_box: return "square_box";
    case LatticeKind::ring: return "ring";
    case LatticeKind::tree: return "tree";
  }
  return "?";
}

std::string to_string(Metric metric) { return metric == Metric::graph ? "graph" : "sup"; }

Graph::Graph(std::vector<Coord> coords, std::vector<std::vector<VertexId>> adjacency,
             Metric metric, VertexId origin, int extent, bool lattice_coords)
    : coords_(std::move(coords)),
      adjacency_(std::move(adjacency)),
      metric_(metric),
      origin_(origin),
      extent_(extent),
      lattice_coords_(lattice_coords),
      cache_(std::make_unique<Cache>()) {
  if (coords_.size() != adjacency_.size())
    throw std::invalid_argument("graph: coordinate and adjacency sizes differ");
  if (adjacency_.empty()) throw std::invalid_argument("graph: no vertices");
  if (origin_ < 0 || static_cast<std::size_t>(origin_) >= adjacency_.size())
    throw std::invalid_argument("graph: origin out of range");
  if (metric_ == Metric::sup && !lattice_coords_)
    throw std::invalid_argument("graph: sup metric needs lattice coordinates");

  const auto n = static_cast<VertexId>(adjacency_.size());
  for (VertexId v = 0; v < n; ++v) {
    auto& nb = adjacency_[v];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw std::invalid_argument("graph: parallel edge at vertex " + std::to_string(v));
    for (VertexId w : nb) {
      if (w < 0 || w >= n) throw std::invalid_argument("graph: edge endpoint out of range");
      if (w == v) throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(v));
    }
  }
  for (VertexId v = 0; v < n; ++v)
    for (VertexId w : adjacency_[v])
      if (!std::binary_search(adjacency_[w].begin(), adjacency_[w].end(), v))
        throw std::invalid_argument("graph: adjacency is not symmetric");

  if (lattice_coords_) {
    index_.reserve(coords_.size() * 2);
    for (std::size_t i = 0; i < coords_.size(); ++i)
      index_.emplace(pack(coords_[i]), static_cast<VertexId>(i));
  }
}

Graph::Graph(Graph&&) noexcept = default;
Graph& Graph::operator=(Graph&&) noexcept = default;
Graph::~Graph() = default;

void Graph::check_vertex(VertexId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= adjacency_.size())
    throw std::out_of_range("graph: vertex " + std::to_string(v) + " not in graph");
}

std::span<const VertexId> Graph::neighbors(VertexId v) const {
  check_vertex(v);
  return adjacency_[v];
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : adjacency_) total += nb.size();
  return total / 2;
}

int Graph::max_degree() const {
  std::size_t best = 0;
  for (const auto& nb : adjacency_) best = std::max(best, nb.size());
  return static_cast<int>(best);
}

std::optional<VertexId> Graph::find(const Coord& c) const {
  if (!lattice_coords_) return std::nullopt;
  if (auto it = index_.find(pack(c)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::shared_ptr<const std::vector<int>> Graph::bfs(VertexId source) const {
  const bool cacheable = size() <= kCacheVertexLimit;
  if (cacheable) {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->bfs.find(source); it != cache_->bfs.end()) return it->second;
  }
  auto dist = std::make_shared<std::vector<int>>(size(), kUnreachable);
  std::deque<VertexId> queue{source};
  (*dist)[source] = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId w : adjacency_[v]) {
      if ((*dist)[w] == kUnreachable) {
        (*dist)[w] = (*dist)[v] + 1;
        queue.push_back(w);
      }
    }
  }
  if (cacheable) {
    std::lock_guard lock(cache_->mutex);
    cache_->bfs.emplace(source, dist);
  }
  return dist;
}

int Graph::hop_distance(VertexId a, VertexId b) const {
  check_vertex(a);
  check_vertex(b);
  if (a == b) return 0;
  return (*bfs(a))[b];
}

int Graph::distance(VertexId a, VertexId b) const {
  check_vertex(a);
  check_vertex(b);
  if (metric_ == Metric::sup) return chebyshev(coords_[a], coords_[b]);
  if (a == b) return 0;
  return (*bfs(a))[b];
}

std::shared_ptr<const std::vector<int>> Graph::distances_from(VertexId source) const {
  check_vertex(source);
  if (metric_ == Metric::graph) return bfs(source);
  auto dist = std::make_shared<std::vector<int>>(size());
  for (std::size_t v = 0; v < size(); ++v) (*dist)[v] = chebyshev(coords_[source], coords_[v]);
  return dist;
}

std::vector<VertexId> Graph::ball(VertexId center, int radius) const {
  if (radius < 0) throw std::invalid_argument("ball: negative radius");
  const auto dist = distances_from(center);
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < size(); ++v)
    if ((*dist)[v] != kUnreachable && (*dist)[v] <= radius) out.push_back(static_cast<VertexId>(v));
  return out;
}

std::vector<VertexId> Graph::sphere(VertexId center, int radius) const {
  if (radius < 0) throw std::invalid_argument("sphere: negative radius");
  const auto dist = distances_from(center);
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < size(); ++v)
    if ((*dist)[v] == radius) out.push_back(static_cast<VertexId>(v));
  return out;
}

std::vector<VertexId> Graph::box() const { return ball(origin_, extent_); }

std::vector<VertexId> Graph::boundary_layer() const { return sphere(origin_, extent_ + 1); }

void Graph::write_edge_csv(std::ostream& out) const {
  out << "src,dst\n";
  for (std::size_t v = 0; v < size(); ++v)
    for (VertexId w : adjacency_[v]) out << v << ',' << w << '\n';
}

Graph build_lattice(const LatticeSpec& spec) {
  static constexpr std::array<Coord, 4> square_steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  static constexpr std::array<Coord, 6> hex_steps{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}};

  switch (spec.kind) {
    case LatticeKind::square:
    case LatticeKind::square_box: {
      if (spec.extent < 1) throw std::invalid_argument("square lattice: extent must be >= 1");
      const int reach = spec.extent + 1;
      if (spec.metric == Metric::sup)
        return lattice_region(
            reach, square_steps,
            [reach](const Coord& c) { return chebyshev(c, {0, 0}) <= reach; }, spec.metric,
            spec.extent);
      return lattice_region(
          reach, square_steps, [reach](const Coord& c) { return manhattan(c, {0, 0}) <= reach; },
          spec.metric, spec.extent);
    }
    case LatticeKind::triangular: {
      if (spec.extent < 1) throw std::invalid_argument("triangular lattice: extent must be >= 1");
      if (spec.metric == Metric::sup)
        throw std::invalid_argument("triangular lattice: sup metric is not defined");
      const int reach = spec.extent + 1;
      return lattice_region(
          reach, hex_steps, [reach](const Coord& c) { return hex_distance(c, {0, 0}) <= reach; },
          spec.metric, spec.extent);
    }
    case LatticeKind::ring: {
      if (spec.extent < 1) throw std::invalid_argument("ring: length must be >= 1");
      if (spec.metric == Metric::sup) throw std::invalid_argument("ring: sup metric is not defined");
      const int n = spec.extent;
      std::vector<Coord> coords;
      std::vector<std::vector<VertexId>> adjacency(n);
      for (int i = 0; i < n; ++i) coords.push_back({i, 0});
      for (int i = 0; i < n; ++i) {
        const int next = (i + 1) % n;
        if (next == i) continue;
        if (std::find(adjacency[i].begin(), adjacency[i].end(), next) == adjacency[i].end()) {
          adjacency[i].push_back(next);
          adjacency[next].push_back(i);
        }
      }
      return Graph(std::move(coords), std::move(adjacency), Metric::graph, 0, n, false);
    }
    case LatticeKind::tree:
      return build_regular_tree(spec.branching, spec.extent);
  }
  throw std::invalid_argument("unknown lattice kind");
}

std::shared_ptr<const Graph> make_lattice(const LatticeSpec& spec) {
  return std::make_shared<const Graph>(build_lattice(spec));
}

Graph build_chain(int n) {
  if (n < 1) throw std::invalid_argument("chain: length must be >= 1");
  std::vector<Coord> coords;
  std::vector<std::vector<VertexId>> adjacency(n);
  for (int i = 0; i < n; ++i) coords.push_back({i, 0});
  for (int i = 0; i + 1 < n; ++i) {
    adjacency[i].push_back(i + 1);
    adjacency[i + 1].push_back(i);
  }
  return Graph(std::move(coords), std::move(adjacency), Metric::graph, 0, n, true);
}

Graph build_regular_tree(int degree, int depth) {
  if (degree < 2) throw std::invalid_argument("tree: degree must be >= 2");
  if (depth < 1) throw std::invalid_argument("tree: depth must be >= 1");
  std::vector<std::vector<VertexId>> adjacency(1);
  std::vector<VertexId> frontier{0};
  for (int level = 1; level <= depth; ++level) {
    std::vector<VertexId> next;
    for (VertexId parent : frontier) {
      const int children = (parent == 0) ? degree : degree - 1;
      for (int c = 0; c < children; ++c) {
        const auto child = static_cast<VertexId>(adjacency.size());
        adjacency.emplace_back();
        adjacency[parent].push_back(child);
        adjacency[child].push_back(parent);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  std::vector<Coord> coords(adjacency.size(), Coord{0, 0});
  return Graph(std::move(coords), std::move(adjacency), Metric::graph, 0, depth, false);
}

BidimReport verify_bidimensional(const Graph& g, int n_max, const BidimOptions& options) {
  if (n_max < 1) throw std::invalid_argument("verify_bidimensional: n_max must be >= 1");
  std::vector<VertexId> centers = options.centers;
  if (centers.empty()) centers.push_back(g.origin());

  BidimReport report;
  report.max_degree = g.max_degree();
  for (VertexId c : centers) {
    const auto dist = g.distances_from(c);
    std::vector<int> counts(n_max + 1, 0);
    for (int d : *dist)
      if (d != kUnreachable && d <= n_max) ++counts[d];
    int cumulative = counts[0];
    for (int n = 1; n <= n_max; ++n) {
      cumulative += counts[n];
      report.sphere_ratio_sup =
          std::max(report.sphere_ratio_sup, static_cast<double>(counts[n]) / n);
      report.ball_ratio_sup =
          std::max(report.ball_ratio_sup, static_cast<double>(cumulative) / (double(n) * n));
      ++report.n_tested;
    }
  }
  report.pass = report.max_degree <= options.degree_bound && report.sphere_ratio_sup > 0.0 &&
                report.sphere_ratio_sup < options.ratio_ceiling;
  return report;
}

}  // namespace qrotor
