#include "qrotor/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace qrotor {

PotentialKind parse_potential_kind(std::string_view name) {
  if (name == "zero" || name == "none") return PotentialKind::zero;
  if (name == "cosine") return PotentialKind::cosine;
  if (name == "singular_cosine") return PotentialKind::singular_cosine;
  if (name == "tabulated") return PotentialKind::tabulated;
  throw std::invalid_argument("unknown potential kind '" + std::string(name) + "'");
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::cosine: return "cosine";
    case PotentialKind::singular_cosine: return "singular_cosine";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "?";
}

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("potential: bad dimension");
}
}  // namespace

Potential Potential::zero(int dim) {
  check_dim(dim);
  Potential p;
  p.dim_ = dim;
  return p;
}

Potential Potential::cosine(int dim) {
  check_dim(dim);
  Potential p;
  p.kind_ = PotentialKind::cosine;
  p.dim_ = dim;
  p.vbar_ = dim * std::max({1.0, kTwoPi, kTwoPi * kTwoPi});
  return p;
}

Potential Potential::singular_cosine(double theta_hc, int dim) {
  if (!(theta_hc > 0.0 && theta_hc < 0.5))
    throw std::invalid_argument("singular potential: theta_hc must lie in (0, 1/2)");
  Potential p = cosine(dim);
  p.kind_ = PotentialKind::singular_cosine;
  p.theta_hc_ = theta_hc;
  return p;
}

Potential Potential::tabulated(std::vector<double> table, int dim) {
  check_dim(dim);
  if (table.size() < 2) throw std::invalid_argument("tabulated potential: need at least 2 values");
  Potential p;
  p.kind_ = PotentialKind::tabulated;
  p.dim_ = dim;
  const double m = double(table.size());
  double v0 = 0, v1 = 0, v2 = 0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double a = table[k];
    const double b = table[(k + 1) % table.size()];
    const double c = table[(k + table.size() - 1) % table.size()];
    v0 = std::max(v0, std::fabs(a));
    v1 = std::max(v1, std::fabs(b - a) * m);
    v2 = std::max(v2, std::fabs(b - 2 * a + c) * m * m);
  }
  p.vbar_ = dim * std::max({v0, v1, v2});
  p.table_ = std::move(table);
  return p;
}

bool Potential::feasible(const double* x, const double* y) const {
  if (kind_ != PotentialKind::singular_cosine) return true;
  for (int i = 0; i < dim_; ++i)
    if (circle_distance(x[i], y[i]) > theta_hc_ + kHardCoreSlack) return false;
  return true;
}

double Potential::eval(const double* x, const double* y) const {
  switch (kind_) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::singular_cosine:
      if (!feasible(x, y)) return kInf;
      [[fallthrough]];
    case PotentialKind::cosine: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s -= std::cos(kTwoPi * (x[i] - y[i]));
      return s;
    }
    case PotentialKind::tabulated: {
      const double m = double(table_.size());
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        const double u = wrap01(x[i] - y[i]) * m;
        const auto k = std::min(static_cast<std::size_t>(u), table_.size() - 1);
        const double f = u - double(k);
        s += (1.0 - f) * table_[k] + f * table_[(k + 1) % table_.size()];
      }
      return s;
    }
  }
  return 0.0;
}

double Potential::operator()(const TorusPoint& x, const TorusPoint& y) const {
  if (x.dim() != dim_ || y.dim() != dim_) throw std::invalid_argument("potential: dimension mismatch");
  return eval(x.coords().data(), y.coords().data());
}

CouplingMetric parse_coupling_metric(std::string_view name) {
  if (name == "graph_metric" || name == "metric") return CouplingMetric::graph_metric;
  if (name == "adjacency") return CouplingMetric::adjacency;
  throw std::invalid_argument("unknown coupling metric '" + std::string(name) + "'");
}

std::string to_string(CouplingMetric m) {
  return m == CouplingMetric::graph_metric ? "graph_metric" : "adjacency";
}

InteractionProfile::InteractionProfile(std::vector<double> j, CouplingMetric metric)
    : j_(std::move(j)), metric_(metric) {
  if (j_.empty()) j_.push_back(0.0);
  j_[0] = 0.0;
  for (std::size_t r = 1; r < j_.size(); ++r) {
    if (!(j_[r] >= 0.0) || !std::isfinite(j_[r]))
      throw std::invalid_argument("interaction profile: J(r) must be finite and nonnegative");
    if (r >= 2 && j_[r] > j_[r - 1])
      throw std::invalid_argument("interaction profile: J(r) must be non-increasing in r");
  }
  while (j_.size() > 1 && j_.back() == 0.0) j_.pop_back();
}

InteractionProfile InteractionProfile::nearest_neighbor(double j, CouplingMetric metric) {
  return InteractionProfile({0.0, j}, metric);
}

double InteractionProfile::operator()(int r) const {
  if (r <= 0 || r >= static_cast<int>(j_.size())) return 0.0;
  return j_[r];
}

bool InteractionProfile::is_zero() const { return range() == 0; }

int InteractionProfile::distance(const Graph& g, VertexId a, VertexId b) const {
  return metric_ == CouplingMetric::graph_metric ? g.distance(a, b) : g.hop_distance(a, b);
}

std::vector<std::pair<VertexId, double>> InteractionProfile::partners(const Graph& g, VertexId v) const {
  std::vector<std::pair<VertexId, double>> out;
  if (is_zero()) return out;
  if (metric_ == CouplingMetric::graph_metric && g.metric() == Metric::sup && g.has_lattice_coords()) {
    const Coord c = g.coord(v);
    const int r = range();
    for (int dx = -r; dx <= r; ++dx)
      for (int dy = -r; dy <= r; ++dy) {
        if (dx == 0 && dy == 0) continue;
        if (auto w = g.find({c[0] + dx, c[1] + dy})) out.emplace_back(*w, (*this)(std::max(std::abs(dx), std::abs(dy))));
      }
    std::sort(out.begin(), out.end());
  } else if (metric_ == CouplingMetric::graph_metric && g.metric() == Metric::sup) {
    for (VertexId w : g.ball(v, range()))
      if (w != v) out.emplace_back(w, (*this)(g.distance(v, w)));
  } else {
    // Hop balls via BFS along edges.
    std::unordered_set<VertexId> seen{v};
    std::vector<VertexId> frontier{v};
    for (int r = 1; r <= range(); ++r) {
      std::vector<VertexId> next;
      for (VertexId a : frontier)
        for (VertexId b : g.neighbors(a))
          if (seen.insert(b).second) {
            next.push_back(b);
            out.emplace_back(b, (*this)(r));
          }
      frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
  }
  std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
  return out;
}

double InteractionProfile::jbar(const Graph& g, const std::vector<VertexId>& centers) const {
  double best = 0.0;
  for (VertexId c : centers) {
    double s = 0.0;
    for (const auto& [w, j] : partners(g, c)) s += j;
    best = std::max(best, s);
  }
  return best;
}

double InteractionProfile::jstar(const Graph& g, const std::vector<VertexId>& centers) const {
  double best = 0.0;
  for (VertexId c : centers) {
    double s = 0.0;
    for (const auto& [w, j] : partners(g, c)) {
      const double r = distance(g, c, w);
      s += j * r * r;
    }
    best = std::max(best, s);
  }
  return best;
}

double pair_integral(const Potential& v, const LoopPath& a, const LoopPath& b) {
  if (a.slices() != b.slices() || a.beta() != b.beta() || a.dim() != b.dim())
    throw std::invalid_argument("pair energy: paths on different slice grids");
  if (v.dim() != a.dim()) throw std::invalid_argument("pair energy: potential dimension mismatch");
  if (v.is_zero()) return 0.0;
  const int L = a.slices();
  const auto pa = a.raw_points();
  const auto pb = b.raw_points();
  const int d = a.dim();
  double s = 0.0;
  for (int k = 0; k <= L; ++k) {
    const double e = v.eval(pa.data() + std::size_t(k) * d, pb.data() + std::size_t(k) * d);
    if (e == kInf) return kInf;
    s += (k == 0 || k == L) ? 0.5 * e : e;
  }
  return s * a.dt();
}

double pair_energy(const InteractionProfile& profile, const Potential& v, int dist,
                   const LoopPath& a, const LoopPath& b) {
  const double j = profile(dist);
  if (j == 0.0) {
    if (a.slices() != b.slices()) throw std::invalid_argument("pair energy: slice mismatch");
    return 0.0;
  }
  const double i = pair_integral(v, a, b);
  return i == kInf ? kInf : j * i;
}

double config_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                     const PathConfiguration& cfg) {
  double total = 0.0;
  const auto& vs = cfg.vertices();
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (const auto& [w, j] : profile.partners(g, vs[a])) {
      if (w <= vs[a] || !cfg.contains(w)) continue;
      const double i = pair_integral(v, cfg.paths()[a], cfg.at(w));
      if (i == kInf) return kInf;
      total += 2.0 * j * i;
    }
  return total;
}

double boundary_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                       const PathConfiguration& inner, const PathConfiguration& outer) {
  for (VertexId w : outer.vertices())
    if (inner.contains(w))
      throw std::invalid_argument("boundary energy: regions overlap at " + std::to_string(w));
  double total = 0.0;
  const auto& vs = inner.vertices();
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (const auto& [w, j] : profile.partners(g, vs[a])) {
      if (!outer.contains(w)) continue;
      const double i = pair_integral(v, inner.paths()[a], outer.at(w));
      if (i == kInf) return kInf;
      total += j * i;
    }
  return total;
}

double conditioned_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                          const PathConfiguration& inner, const PathConfiguration& outer) {
  const double a = config_energy(g, profile, v, inner);
  if (a == kInf) return kInf;
  const double b = boundary_energy(g, profile, v, inner, outer);
  return b == kInf ? kInf : a + b;
}

}  // namespace qrotor
