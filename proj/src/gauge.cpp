#include "qrotor/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <stdexcept>

namespace qrotor {

namespace {
const double kLnLn2 = std::log(std::log(2.0));
constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;
}  // namespace

double gauge_z(double u) { return u <= 2.0 ? 1.0 : 1.0 / (u * std::log(u)); }

double gauge_z_primitive(double u) { return u <= 2.0 ? u : 2.0 + std::log(std::log(u)) - kLnLn2; }

double gauge_q(double b) {
  if (!(b > 0.0)) throw std::domain_error("Q(b): b must be positive");
  return gauge_z_primitive(b);
}

double gauge_vartheta(double a, double b) {
  if (a <= 0.0) return 1.0;
  if (a >= b) return 0.0;
  return (gauge_z_primitive(b) - gauge_z_primitive(a)) / gauge_q(b);
}

double GaugeProfile::theta_norm() const {
  double s = 0.0;
  for (double t : theta) s += t * t;
  return std::sqrt(s);
}

bool GaugeProfile::covers(const std::vector<VertexId>& sites) const {
  const auto d = graph->distances_from(graph->origin());
  return std::all_of(sites.begin(), sites.end(), [&](VertexId v) {
    const int r = (*d).at(std::size_t(v));
    return r != kUnreachable && r <= rbar;
  });
}

namespace {
std::vector<double> upsilon_values(const Graph& g, int n, int rbar) {
  const auto d = g.distances_from(g.origin());
  std::vector<double> u(g.size(), 0.0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const int r = (*d)[v];
    if (r == kUnreachable) continue;
    u[v] = r <= rbar ? 1.0 : gauge_vartheta(r - rbar, n - rbar);
  }
  return u;
}
}  // namespace

GaugeProfile gauge_profile(std::shared_ptr<const Graph> graph, int n, int rbar, std::vector<double> theta) {
  if (!graph) throw std::invalid_argument("gauge_profile: null graph");
  if (rbar < 0) throw std::invalid_argument("gauge_profile: rbar must be nonnegative");
  if (rbar >= n) throw std::invalid_argument("gauge_profile: rbar must be smaller than n");
  if (theta.empty() || theta.size() > std::size_t(kMaxDim))
    throw std::invalid_argument("gauge_profile: bad theta dimension");
  GaugeProfile p;
  p.values = upsilon_values(*graph, n, rbar);
  p.graph = std::move(graph);
  p.n = n;
  p.rbar = rbar;
  p.theta = std::move(theta);
  return p;
}

PathConfiguration apply_gauge(const GaugeProfile& profile, const PathConfiguration& cfg, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("apply_gauge: sign must be +1 or -1");
  PathConfiguration out;
  const std::size_t d = profile.theta.size();
  std::vector<double> shift(d);
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const VertexId v = cfg.vertices()[k];
    const LoopPath& p = cfg.paths()[k];
    if (std::size_t(p.dim()) != d) throw std::invalid_argument("apply_gauge: dimension mismatch");
    const double u = profile.upsilon(v);
    if (u == 0.0) {
      out.set(v, p);
      continue;
    }
    for (std::size_t i = 0; i < d; ++i) shift[i] = sign * u * profile.theta[i];
    out.set(v, shift_path(shift, p));
  }
  return out;
}

double psi(const Graph& graph, const InteractionProfile& profile, int n, int rbar, double theta_norm) {
  if (rbar >= n) throw std::invalid_argument("psi: rbar must be smaller than n");
  if (profile.is_zero()) return 0.0;
  if (graph.extent() + 1 < n + profile.range())
    throw std::invalid_argument("psi: graph does not contain Lambda(n + range(J))");
  const auto d = graph.distances_from(graph.origin());
  const auto u = upsilon_values(graph, n, rbar);
  double total = 0.0;
  for (std::size_t j = 0; j < graph.size(); ++j) {
    const int r = (*d)[j];
    if (r == kUnreachable || r > n) continue;
    for (const auto& [w, jw] : profile.partners(graph, VertexId(j))) {
      const double diff = u[j] - u[std::size_t(w)];
      total += jw * diff * diff;
    }
  }
  return theta_norm * theta_norm * total;
}

std::vector<PsiRow> psi_sweep(const std::vector<int>& ns, int rbar, double j) {
  if (ns.empty()) return {};
  const int n_max = *std::max_element(ns.begin(), ns.end());
  const Graph g = build_lattice({LatticeKind::square_box, n_max, Metric::graph, 3});
  const auto profile = InteractionProfile::nearest_neighbor(j);
  std::vector<PsiRow> rows;
  for (int n : ns) {
    PsiRow row;
    row.n = n;
    row.q = gauge_q(n - rbar);
    row.psi = psi(g, profile, n, rbar, 1.0);
    row.psi_q = row.psi * row.q;
    rows.push_back(row);
  }
  return rows;
}

LipschitzReport lipschitz_check(const Graph& graph, int rbar, int n_max) {
  if (graph.extent() < n_max) throw std::invalid_argument("lipschitz_check: graph smaller than Lambda(n_max)");
  LipschitzReport rep;
  rep.n_max = n_max;
  rep.worst_slack = -kInf;
  const auto d0 = graph.distances_from(graph.origin());
  std::vector<VertexId> ball;
  for (std::size_t v = 0; v < graph.size(); ++v)
    if ((*d0)[v] != kUnreachable && (*d0)[v] <= n_max) ball.push_back(VertexId(v));
  std::vector<std::shared_ptr<const std::vector<int>>> dist(ball.size());
  for (std::size_t a = 0; a < ball.size(); ++a) dist[a] = graph.distances_from(ball[a]);

  for (int n = rbar + 1; n <= n_max; ++n) {
    const double qn = gauge_q(n - rbar);
    for (std::size_t a = 0; a < ball.size(); ++a) {
      const int ra = (*d0)[ball[a]];
      if (ra > n) continue;
      const double ta = gauge_vartheta(ra - rbar, n - rbar);
      const double za = gauge_z(ra - rbar);
      for (std::size_t b = 0; b < ball.size(); ++b) {
        const int rb = (*d0)[ball[b]];
        if (rb > n || rb < ra || a == b) continue;
        const double diff = ta - gauge_vartheta(rb - rbar, n - rbar);
        const double bound = (*dist[a])[ball[b]] * za / qn;
        const double tol = 1e-12 * (1.0 + bound);
        ++rep.pairs;
        rep.worst_slack = std::max(rep.worst_slack, diff - bound);
        if (diff < -tol || diff > bound + tol) ++rep.violations;
      }
    }
  }
  rep.pass = rep.violations == 0 && rep.pairs > 0;
  return rep;
}

std::vector<SphereSumRow> sphere_sum_sweep(const Graph& graph, const std::vector<int>& ns, int rbar, int r0) {
  const auto d0 = graph.distances_from(graph.origin());
  std::vector<SphereSumRow> rows;
  for (int n : ns) {
    if (n + r0 <= rbar) throw std::invalid_argument("sphere_sum_sweep: need n + r0 > rbar");
    if (graph.extent() + 1 < n + r0) throw std::invalid_argument("sphere_sum_sweep: graph too small");
    SphereSumRow row;
    row.n = n;
    for (std::size_t v = 0; v < graph.size(); ++v) {
      const int r = (*d0)[v];
      if (r == kUnreachable || r > n + r0) continue;
      const double z = gauge_z(r - rbar);
      row.sum += z * z;
    }
    row.q = gauge_q(n + r0 - rbar);
    row.ratio = row.sum / row.q;
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> taylor_constant(const Potential& v) {
  if (v.kind() == PotentialKind::cosine) return kFourPi2;
  if (v.kind() == PotentialKind::zero) return 0.0;
  return std::nullopt;
}

TaylorWitness taylor_tuple(const Potential& v, const std::vector<double>& x, const std::vector<double>& xp,
                           const std::vector<double>& theta, double u, double up, double constant) {
  const int d = v.dim();
  if (int(x.size()) != d || int(xp.size()) != d || int(theta.size()) != d)
    throw std::invalid_argument("taylor_tuple: dimension mismatch");
  Vec a1{}, b1{}, a2{}, b2{}, c0{}, c1{};
  double tn2 = 0.0;
  for (int i = 0; i < d; ++i) {
    a1[i] = x[i] + theta[i] * u;
    b1[i] = xp[i] + theta[i] * up;
    a2[i] = x[i] - theta[i] * u;
    b2[i] = xp[i] - theta[i] * up;
    c0[i] = x[i];
    c1[i] = xp[i];
    tn2 += theta[i] * theta[i];
  }
  TaylorWitness w{x, xp, theta, u, up, 0.0, 0.0};
  w.lhs = std::fabs(v.eval(a1.data(), b1.data()) + v.eval(a2.data(), b2.data()) - 2.0 * v.eval(c0.data(), c1.data()));
  w.rhs = constant * tn2 * (u - up) * (u - up);
  return w;
}

TaylorReport taylor_bound_check(const Potential& v, std::uint64_t trials, RngStream rng, double constant) {
  if (!v.smooth()) throw std::invalid_argument("taylor_bound_check: potential must be smooth");
  if (constant < 0.0) {
    const auto c = taylor_constant(v);
    if (!c) throw std::invalid_argument("taylor_bound_check: no explicit constant for this potential; pass one");
    constant = *c;
  }
  const int d = v.dim();
  TaylorReport rep;
  rep.trials = trials;
  rep.constant = constant;
  std::vector<double> x(d), xp(d), th(d);
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (int i = 0; i < d; ++i) {
      x[i] = rng.uniform();
      xp[i] = rng.uniform();
      th[i] = rng.uniform() - 0.5;
    }
    const double u = rng.uniform(), up = rng.uniform();
    TaylorWitness w = taylor_tuple(v, x, xp, th, u, up, constant);
    double scale = (u - up) * (u - up);
    scale *= std::inner_product(th.begin(), th.end(), th.begin(), 0.0);
    if (scale > 0.0) rep.max_ratio = std::max(rep.max_ratio, w.lhs / scale);
    if (w.lhs > w.rhs * (1.0 + 1e-12) + 1e-13) {
      ++rep.violations;
      if (!rep.witness) rep.witness = std::move(w);
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

ConvexityReport convexity_chain_check(const ModelSpec& model, const GaugeProfile& profile,
                                      const std::vector<PathConfiguration>& configurations, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("convexity_chain_check: a must exceed 1");
  if (!model.potential.smooth()) throw std::invalid_argument("convexity_chain_check: potential must be smooth");
  if (!model.internal_boundary.empty())
    throw std::invalid_argument("convexity_chain_check: internal boundaries are not supported");
  if (model.graph.get() != profile.graph.get())
    throw std::invalid_argument("convexity_chain_check: profile built on a different graph");
  if (model.region != model.graph->ball(model.graph->origin(), profile.n))
    throw std::invalid_argument("convexity_chain_check: region must be Lambda(n)");
  if (int(profile.theta.size()) != model.dim) throw std::invalid_argument("convexity_chain_check: theta dimension");
  const auto c = taylor_constant(model.potential);
  if (!c) throw std::invalid_argument("convexity_chain_check: no explicit constant for this potential");

  ConvexityReport rep;
  rep.a = a;
  rep.configurations = configurations.size();
  // Each bond contributes at most J * beta * C_V |theta|^2 |du|^2, and Psi
  // counts bonds with the same multiplicity as h.
  rep.constant = *c * model.beta;
  rep.psi = psi(*model.graph, model.profile, profile.n, profile.rbar, profile.theta_norm());
  const double c_psi = rep.constant * rep.psi;
  rep.threshold_met = std::log(a) - 0.5 * c_psi >= 0.0;
  const PathConfiguration bpaths = resolve_boundary(model);

  for (const auto& cfg : configurations) {
    const double h0 = model_energy(model, cfg, bpaths);
    const double hp = model_energy(model, apply_gauge(profile, cfg, +1), bpaths);
    const double hm = model_energy(model, apply_gauge(profile, cfg, -1), bpaths);
    if (!std::isfinite(h0) || !std::isfinite(hp) || !std::isfinite(hm))
      throw std::invalid_argument("convexity_chain_check: infinite energy");
    const double hi = std::max(-hp, -hm), lo = std::min(-hp, -hm);
    const double log_mid = hi + std::log1p(std::exp(lo - hi)) - std::log(2.0);
    const double rhs = -0.5 * (hp + hm);
    if (log_mid < rhs - 1e-12 * (1.0 + std::fabs(rhs))) ++rep.midpoint_failures;

    const double second = std::fabs(hp + hm - 2.0 * h0);
    rep.max_second_difference = std::max(rep.max_second_difference, second);
    if (c_psi > 0.0) rep.max_bound_ratio = std::max(rep.max_bound_ratio, second / c_psi);
    if (second > c_psi * (1.0 + 1e-9) + 1e-10 * (1.0 + std::fabs(h0))) ++rep.energy_bound_failures;

    if (rep.threshold_met && std::log(a) + log_mid < -h0 - 1e-12 * (1.0 + std::fabs(h0))) ++rep.full_failures;
  }
  rep.pass = rep.midpoint_failures == 0 && rep.energy_bound_failures == 0 && rep.full_failures == 0;
  return rep;
}

ThresholdReport threshold_scan(double theta_norm, double beta, double j, int rbar, int n_max, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("threshold_scan: a must exceed 1");
  if (n_max <= rbar) throw std::invalid_argument("threshold_scan: n_max must exceed rbar");
  const Graph g = build_lattice({LatticeKind::square_box, n_max, Metric::graph, 3});
  const auto profile = InteractionProfile::nearest_neighbor(j);
  const double c = kFourPi2 * beta;
  ThresholdReport rep;
  for (int n = rbar + 1; n <= n_max; ++n) {
    ThresholdRow row;
    row.n = n;
    row.psi = psi(g, profile, n, rbar, theta_norm);
    row.factor = a * std::exp(-0.5 * c * row.psi);
    rep.rows.push_back(row);
    if (!rep.n_star && row.factor >= 1.0) rep.n_star = n;
  }
  return rep;
}

}  // namespace qrotor
