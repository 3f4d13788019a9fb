#include "qrotor/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qrotor {

LoopPath::LoopPath(int dim, int slices, double beta) : dim_(dim), slices_(slices), beta_(beta) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("loop path: bad dimension");
  if (slices < 1) throw std::invalid_argument("loop path: need at least one time slice");
  if (!(beta > 0.0)) throw std::invalid_argument("loop path: beta must be positive");
  pts_.assign(std::size_t(slices + 1) * dim, 0.0);
  jumps_.assign(std::size_t(slices) * dim, 0);
}

LoopPath LoopPath::constant(const TorusPoint& x, int slices, double beta) {
  LoopPath p(x.dim(), slices, beta);
  for (int k = 0; k <= slices; ++k)
    for (int i = 0; i < x.dim(); ++i) p.pts_[std::size_t(k) * p.dim_ + i] = x[i];
  return p;
}

TorusPoint LoopPath::point(int k) const {
  if (k < 0 || k > slices_) throw std::out_of_range("loop path: slice index");
  return TorusPoint(std::span<const double>(pts_.data() + std::size_t(k) * dim_, std::size_t(dim_)));
}

LoopPath LoopPath::from_raw(int dim, int slices, double beta, std::vector<double> pts,
                            std::vector<int> jumps) {
  LoopPath p(dim, slices, beta);
  if (pts.size() != p.pts_.size() || jumps.size() != p.jumps_.size())
    throw std::invalid_argument("loop path: raw data size mismatch");
  for (double v : pts)
    if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument("loop path: raw point not reduced");
  p.pts_ = std::move(pts);
  p.jumps_ = std::move(jumps);
  return p;
}

bool LoopPath::is_loop() const {
  for (int i = 0; i < dim_; ++i)
    if (at(0, i) != at(slices_, i)) return false;
  return true;
}

double LoopPath::increment(int k, int i) const {
  return at(k + 1, i) - at(k, i) + jumps_[std::size_t(k) * dim_ + i];
}

std::vector<int> LoopPath::winding() const {
  std::vector<int> n(std::size_t(dim_), 0);
  for (int i = 0; i < dim_; ++i) {
    double total = 0.0;
    for (int k = 0; k < slices_; ++k) total += increment(k, i);
    n[i] = static_cast<int>(std::lround(total - wrap_centered(at(slices_, i) - at(0, i))));
  }
  return n;
}

std::vector<double> LoopPath::lifted() const {
  std::vector<double> u(pts_.size());
  for (int i = 0; i < dim_; ++i) {
    u[i] = at(0, i);
    for (int k = 0; k < slices_; ++k)
      u[std::size_t(k + 1) * dim_ + i] = u[std::size_t(k) * dim_ + i] + increment(k, i);
  }
  return u;
}

void LoopPath::assign_lifted(std::span<const double> lifted, const TorusPoint& start,
                             const TorusPoint& end) {
  if (lifted.size() != pts_.size()) throw std::invalid_argument("loop path: lifted size mismatch");
  if (start.dim() != dim_ || end.dim() != dim_)
    throw std::invalid_argument("loop path: endpoint dimension mismatch");
  for (int k = 0; k <= slices_; ++k)
    for (int i = 0; i < dim_; ++i) pts_[std::size_t(k) * dim_ + i] = wrap01(lifted[std::size_t(k) * dim_ + i]);
  for (int i = 0; i < dim_; ++i) {
    pts_[i] = start[i];
    pts_[std::size_t(slices_) * dim_ + i] = end[i];
  }
  for (int k = 0; k < slices_; ++k)
    for (int i = 0; i < dim_; ++i) {
      const double inc = lifted[std::size_t(k + 1) * dim_ + i] - lifted[std::size_t(k) * dim_ + i];
      jumps_[std::size_t(k) * dim_ + i] =
          static_cast<int>(std::lround(inc - (at(k + 1, i) - at(k, i))));
    }
}

bool LoopPath::operator==(const LoopPath& other) const {
  return dim_ == other.dim_ && slices_ == other.slices_ && beta_ == other.beta_ &&
         pts_ == other.pts_ && jumps_ == other.jumps_;
}

int sample_winding(double delta, double beta, RngStream& rng) {
  const auto p = HeatKernelParams::for_beta(beta);
  const double r = wrap_centered(delta);
  std::vector<double> w(std::size_t(2 * p.trunc + 1));
  for (int n = -p.trunc; n <= p.trunc; ++n) {
    const double u = r + n;
    w[std::size_t(n + p.trunc)] = std::exp(-u * u / (2.0 * beta));
  }
  // discrete_distribution would do, but its sampling algorithm is
  // implementation-defined; a plain inverse CDF keeps streams portable.
  double total = 0.0;
  for (double v : w) total += v;
  double target = rng.uniform() * total;
  for (std::size_t j = 0; j < w.size(); ++j) {
    target -= w[j];
    if (target < 0.0) return static_cast<int>(j) - p.trunc;
  }
  return p.trunc;
}

std::vector<double> euclidean_bridge(double target, int steps, double dt, RngStream& rng) {
  std::vector<double> u(std::size_t(steps + 1));
  u[0] = 0.0;
  const double total = steps * dt;
  for (int k = 0; k + 1 < steps; ++k) {
    const double remaining = total - k * dt;
    const double mean = u[k] + (target - u[k]) * dt / remaining;
    const double var = dt * (remaining - dt) / remaining;
    u[k + 1] = mean + std::sqrt(var) * rng.normal();
  }
  u[steps] = target;
  return u;
}

LoopPath sample_bridge(const TorusPoint& x, const TorusPoint& y, double beta, int slices,
                       RngStream& rng) {
  if (slices < 1) throw std::invalid_argument("sample_bridge: L must be at least 1");
  if (!(beta > 0.0)) throw std::invalid_argument("sample_bridge: beta must be positive");
  if (x.dim() != y.dim()) throw std::invalid_argument("sample_bridge: dimension mismatch");
  const int d = x.dim();
  LoopPath path(d, slices, beta);
  std::vector<double> lifted(std::size_t(slices + 1) * d);
  const double dt = beta / slices;
  for (int i = 0; i < d; ++i) {
    const double delta = wrap_centered(y[i] - x[i]);
    const int n = sample_winding(delta, beta, rng);
    const auto u = euclidean_bridge(delta + n, slices, dt, rng);
    for (int k = 0; k <= slices; ++k) lifted[std::size_t(k) * d + i] = x[i] + u[k];
  }
  path.assign_lifted(lifted, x, y);
  return path;
}

LoopPath sample_loop(const TorusPoint& x, double beta, int slices, RngStream& rng) {
  return sample_bridge(x, x, beta, slices, rng);
}

LoopPath redraw_loop_segment(const LoopPath& loop, int a, int len, RngStream& rng) {
  const int L = loop.slices();
  const int d = loop.dim();
  if (!loop.is_loop()) throw std::invalid_argument("redraw_loop_segment: path is not a loop");
  if (len < 2 || len > L) throw std::invalid_argument("redraw_loop_segment: bad segment length");
  a = ((a % L) + L) % L;
  const double dt = loop.dt();

  // Cyclic increments; the segment replaces steps a, ..., a+len-1 (mod L).
  // Slices outside the segment keep their stored values bit for bit.
  std::vector<double> inc(std::size_t(L) * d);
  for (int k = 0; k < L; ++k)
    for (int i = 0; i < d; ++i) inc[std::size_t(k) * d + i] = loop.increment(k, i);
  auto raw = loop.raw_points();
  std::vector<double> pts(raw.begin(), raw.end());
  for (int i = 0; i < d; ++i) {
    double lifted_gap = 0.0;
    for (int s = 0; s < len; ++s) lifted_gap += inc[std::size_t((a + s) % L) * d + i];
    const double delta = wrap_centered(lifted_gap);
    const int n = sample_winding(delta, len * dt, rng);
    const auto u = euclidean_bridge(delta + n, len, dt, rng);
    const double anchor = loop.at(a, i);
    for (int s = 0; s < len; ++s) inc[std::size_t((a + s) % L) * d + i] = u[s + 1] - u[s];
    for (int s = 1; s < len; ++s) pts[std::size_t((a + s) % L) * d + i] = wrap01(anchor + u[s]);
  }
  for (int i = 0; i < d; ++i) pts[std::size_t(L) * d + i] = pts[i];
  std::vector<int> jumps(std::size_t(L) * d);
  for (int k = 0; k < L; ++k)
    for (int i = 0; i < d; ++i)
      jumps[std::size_t(k) * d + i] = static_cast<int>(std::lround(
          inc[std::size_t(k) * d + i] - (pts[std::size_t(k + 1) * d + i] - pts[std::size_t(k) * d + i])));
  return LoopPath::from_raw(d, L, loop.beta(), std::move(pts), std::move(jumps));
}

LoopPath shift_path(std::span<const double> shift, const LoopPath& p) {
  const int d = p.dim();
  if (static_cast<int>(shift.size()) < d) throw std::invalid_argument("shift_path: dimension mismatch");
  auto u = p.lifted();
  for (std::size_t k = 0; k < u.size(); ++k) u[k] += shift[k % d];
  LoopPath out(d, p.slices(), p.beta());
  const TorusPoint a = translate(p.start(), shift);
  const TorusPoint b = p.is_loop() ? a : translate(p.end(), shift);
  out.assign_lifted(u, a, b);
  return out;
}

LoopPath shift_path(const GroupElement& g, const LoopPath& p) {
  if (g.dim() != p.dim()) throw std::invalid_argument("shift_path: dimension mismatch");
  return shift_path(std::span<const double>(g.shift().data(), std::size_t(g.dim())), p);
}

void PathConfiguration::set(VertexId v, LoopPath path) {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  const auto idx = std::size_t(it - vertices_.begin());
  if (it != vertices_.end() && *it == v) {
    paths_[idx] = std::move(path);
    return;
  }
  vertices_.insert(it, v);
  paths_.insert(paths_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(path));
}

bool PathConfiguration::contains(VertexId v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

const LoopPath& PathConfiguration::at(VertexId v) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v)
    throw std::out_of_range("path configuration: missing vertex " + std::to_string(v));
  return paths_[std::size_t(it - vertices_.begin())];
}

LoopPath& PathConfiguration::at(VertexId v) {
  return const_cast<LoopPath&>(static_cast<const PathConfiguration&>(*this).at(v));
}

PathConfiguration PathConfiguration::concat(const PathConfiguration& other) const {
  PathConfiguration out = *this;
  for (std::size_t k = 0; k < other.vertices_.size(); ++k) {
    if (contains(other.vertices_[k]))
      throw std::invalid_argument("concat: vertex sets overlap at " +
                                  std::to_string(other.vertices_[k]));
    out.set(other.vertices_[k], other.paths_[k]);
  }
  return out;
}

PathConfiguration PathConfiguration::restrict_to(std::span<const VertexId> region) const {
  PathConfiguration out;
  for (VertexId v : region) out.set(v, at(v));
  return out;
}

bool PathConfiguration::operator==(const PathConfiguration& other) const {
  return vertices_ == other.vertices_ && paths_ == other.paths_;
}

PathConfiguration shift_configuration(const GroupElement& g, const PathConfiguration& cfg) {
  PathConfiguration out;
  for (std::size_t k = 0; k < cfg.size(); ++k)
    out.set(cfg.vertices()[k], shift_path(g, cfg.paths()[k]));
  return out;
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

ConfigDumpWriter::ConfigDumpWriter(const std::string& path, const std::string& header)
    : out_(new std::ofstream(path, std::ios::binary)), hash_(0xcbf29ce484222325ULL) {
  if (!*out_) {
    delete out_;
    throw std::runtime_error("cannot open dump file " + path);
  }
  put("QRCF", 4);
  put(&kDumpVersion, sizeof kDumpVersion);
  const std::uint64_t n = header.size();
  put(&n, sizeof n);
  put(header.data(), header.size());
}

ConfigDumpWriter::~ConfigDumpWriter() {
  try {
    close();
  } catch (...) {
  }
  delete out_;
}

void ConfigDumpWriter::put(const void* data, std::size_t n) {
  hash_ = fnv1a(std::span<const unsigned char>(static_cast<const unsigned char*>(data), n), hash_);
  out_->write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void ConfigDumpWriter::write(std::uint64_t sweep, const PathConfiguration& cfg) {
  if (closed_) throw std::logic_error("dump already closed");
  const std::uint8_t tag = 1;
  put(&tag, 1);
  put(&sweep, sizeof sweep);
  const std::uint32_t n = static_cast<std::uint32_t>(cfg.size());
  put(&n, sizeof n);
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const auto& p = cfg.paths()[k];
    const std::int32_t v = cfg.vertices()[k], L = p.slices(), d = p.dim();
    const double beta = p.beta();
    put(&v, 4);
    put(&L, 4);
    put(&d, 4);
    put(&beta, 8);
    put(p.raw_points().data(), p.raw_points().size() * sizeof(double));
    put(p.raw_jumps().data(), p.raw_jumps().size() * sizeof(int));
  }
}

void ConfigDumpWriter::close() {
  if (closed_) return;
  closed_ = true;
  const std::uint8_t tag = 0;
  put(&tag, 1);
  const std::uint64_t h = hash_;
  out_->write(reinterpret_cast<const char*>(&h), sizeof h);
  out_->flush();
  if (!*out_) throw std::runtime_error("dump write failed");
}

namespace {

class DumpReader {
 public:
  explicit DumpReader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dump file " + path);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  void get(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("dump truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T get() {
    T v;
    get(&v, sizeof v);
    return v;
  }
  std::uint64_t hash_so_far() const {
    return fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(bytes_.data()), pos_));
  }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ConfigDump read_config_dump(const std::string& path) {
  DumpReader r(path);
  char magic[4];
  r.get(magic, 4);
  if (std::memcmp(magic, "QRCF", 4) != 0) throw std::runtime_error("not a configuration dump");
  const auto version = r.get<std::uint32_t>();
  if (version != kDumpVersion)
    throw std::runtime_error("dump version " + std::to_string(version) + " not supported (expected " +
                             std::to_string(kDumpVersion) + ")");
  ConfigDump dump;
  const auto hlen = r.get<std::uint64_t>();
  if (hlen > (1u << 30)) throw std::runtime_error("dump header corrupt");
  dump.header.resize(hlen);
  r.get(dump.header.data(), hlen);
  for (;;) {
    const auto tag = r.get<std::uint8_t>();
    if (tag == 0) break;
    if (tag != 1) throw std::runtime_error("dump record corrupt");
    dump.sweeps.push_back(r.get<std::uint64_t>());
    const auto n = r.get<std::uint32_t>();
    PathConfiguration cfg;
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto v = r.get<std::int32_t>();
      const auto L = r.get<std::int32_t>();
      const auto d = r.get<std::int32_t>();
      const auto beta = r.get<double>();
      if (L < 1 || L > (1 << 20) || d < 1 || d > kMaxDim || !(beta > 0.0))
        throw std::runtime_error("dump path header corrupt");
      std::vector<double> pts(std::size_t(L + 1) * d);
      std::vector<int> jumps(std::size_t(L) * d);
      r.get(pts.data(), pts.size() * sizeof(double));
      r.get(jumps.data(), jumps.size() * sizeof(int));
      auto p = LoopPath::from_raw(d, L, beta, std::move(pts), std::move(jumps));
      cfg.set(v, std::move(p));
    }
    dump.configs.push_back(std::move(cfg));
  }
  const auto expected = r.hash_so_far();
  const auto stored = r.get<std::uint64_t>();
  if (stored != expected) throw std::runtime_error("dump checksum mismatch");
  return dump;
}

}  // namespace qrotor
