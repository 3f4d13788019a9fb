#pragma once

// Time-discretised Brownian bridges and loops on the torus, and path
// configurations over vertex sets.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qrotor/graph.hpp"
#include "qrotor/rng.hpp"
#include "qrotor/torus.hpp"

namespace qrotor {

/// Path sampled at L+1 equally spaced times 0, beta/L, ..., beta. Points are
/// stored reduced mod 1; `jump` records the integer part of each lifted
/// increment so windings survive the reduction.
class LoopPath {
 public:
  LoopPath() = default;
  LoopPath(int dim, int slices, double beta);

  /// Constant path at x (a "cooled" loop).
  static LoopPath constant(const TorusPoint& x, int slices, double beta);
  /// Reduced points ((L+1)*dim) and lifted-increment jumps (L*dim) as stored.
  static LoopPath from_raw(int dim, int slices, double beta, std::vector<double> pts,
                           std::vector<int> jumps);

  int dim() const { return dim_; }
  int slices() const { return slices_; }
  double beta() const { return beta_; }
  double dt() const { return beta_ / slices_; }

  double at(int k, int i) const { return pts_[std::size_t(k) * dim_ + i]; }
  TorusPoint point(int k) const;
  TorusPoint start() const { return point(0); }
  TorusPoint end() const { return point(slices_); }
  bool is_loop() const;

  /// Net winding per coordinate: the lifted displacement from start to end
  /// minus the reduced displacement in [-1/2, 1/2).
  std::vector<int> winding() const;
  /// Lifted increment from slice k to k+1 in coordinate i.
  double increment(int k, int i) const;

  std::span<const double> raw_points() const { return pts_; }
  std::span<const int> raw_jumps() const { return jumps_; }

  /// Lifted coordinates, (L+1)*dim values starting at the stored point 0.
  std::vector<double> lifted() const;
  /// Rebuild from lifted coordinates. Slice 0 and slice L are pinned to
  /// `start` and `end`, which must agree with the lifted values mod 1.
  void assign_lifted(std::span<const double> lifted, const TorusPoint& start,
                     const TorusPoint& end);

  bool operator==(const LoopPath& other) const;

 private:
  int dim_ = 1;
  int slices_ = 0;
  double beta_ = 0.0;
  std::vector<double> pts_;
  std::vector<int> jumps_;
};

/// Winding vector n drawn with weight exp(-|delta + n|^2 / 2 beta), |n_i| <= N.
int sample_winding(double delta, double beta, RngStream& rng);

/// Brownian bridge from x to y in time beta, exact at the slice times.
LoopPath sample_bridge(const TorusPoint& x, const TorusPoint& y, double beta, int slices,
                       RngStream& rng);
LoopPath sample_loop(const TorusPoint& x, double beta, int slices, RngStream& rng);

/// Euclidean bridge 0 -> target over `steps` steps of length dt; returns
/// steps+1 positions with exact endpoints.
std::vector<double> euclidean_bridge(double target, int steps, double dt, RngStream& rng);

/// Redraw the slices strictly between a and a+len (indices cyclic mod L) of a
/// loop from the free bridge law with the two ends held fixed. The base point
/// moves when slice 0 lies inside the segment.
LoopPath redraw_loop_segment(const LoopPath& loop, int a, int len, RngStream& rng);

LoopPath shift_path(const GroupElement& g, const LoopPath& p);
LoopPath shift_path(std::span<const double> shift, const LoopPath& p);

/// Paths over a finite vertex set, kept sorted by vertex id.
class PathConfiguration {
 public:
  PathConfiguration() = default;

  void set(VertexId v, LoopPath path);
  bool contains(VertexId v) const;
  const LoopPath& at(VertexId v) const;
  LoopPath& at(VertexId v);
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const std::vector<VertexId>& vertices() const { return vertices_; }
  const std::vector<LoopPath>& paths() const { return paths_; }

  /// Concatenation over disjoint vertex sets.
  PathConfiguration concat(const PathConfiguration& other) const;
  PathConfiguration restrict_to(std::span<const VertexId> region) const;

  bool operator==(const PathConfiguration& other) const;

 private:
  std::vector<VertexId> vertices_;
  std::vector<LoopPath> paths_;
};

PathConfiguration shift_configuration(const GroupElement& g, const PathConfiguration& cfg);

// Versioned binary dump of configurations for replay.
//
//   "QRCF" | u32 version | u64 header length | header bytes (JSON text)
//   repeated records: u8 tag=1 | u64 sweep | u32 n | n x path
//   path: i32 vertex | i32 L | i32 d | f64 beta | (L+1)d f64 | Ld i32 jumps
//   trailer: u8 tag=0 | u64 FNV-1a of every preceding byte
inline constexpr std::uint32_t kDumpVersion = 1;

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s);

class ConfigDumpWriter {
 public:
  ConfigDumpWriter(const std::string& path, const std::string& header);
  ~ConfigDumpWriter();
  void write(std::uint64_t sweep, const PathConfiguration& cfg);
  void close();

 private:
  void put(const void* data, std::size_t n);
  std::ofstream* out_;
  std::uint64_t hash_;
  bool closed_ = false;
};

struct ConfigDump {
  std::string header;
  std::vector<std::uint64_t> sweeps;
  std::vector<PathConfiguration> configs;
};

/// Throws on bad magic, version mismatch, truncation or checksum failure.
ConfigDump read_config_dump(const std::string& path);

}  // namespace qrotor
