#include "qrotor/symbreak.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrotor/stats.hpp"

namespace qrotor {

namespace {
void check_spec(const SymbreakSpec& s) {
  if (s.n < 1) throw std::invalid_argument("symbreak: n must be positive");
  if (!(s.theta_hc > 0.0 && s.theta_hc < 0.25)) throw std::invalid_argument("symbreak: theta_hc must lie in (0, 1/4)");
  if (s.boundary != BoundaryKind::cooled && s.boundary != BoundaryKind::tilted)
    throw std::invalid_argument("symbreak: boundary must be cooled or tilted");
  if (s.boundary == BoundaryKind::tilted && !(s.eta >= 0.0 && s.eta <= 1.0))
    throw std::invalid_argument("symbreak: eta must lie in [0, 1]");
}

Boundary make_boundary(const SymbreakSpec& s) {
  const TorusPoint x{s.x_star};
  return s.boundary == BoundaryKind::cooled ? Boundary::cooled(x) : Boundary::tilted(x, s.eta, s.theta_hc);
}
}  // namespace

ModelSpec symbreak_model(const SymbreakSpec& spec) {
  check_spec(spec);
  auto g = make_lattice({LatticeKind::square_box, spec.n, Metric::sup, 3});
  const auto profile = spec.interaction ? InteractionProfile::nearest_neighbor(1.0, CouplingMetric::adjacency)
                                        : InteractionProfile({0.0}, CouplingMetric::adjacency);
  return box_model(std::move(g), 1, spec.beta, spec.slices, Potential::singular_cosine(spec.theta_hc, 1), profile,
                   make_boundary(spec));
}

PathConfiguration build_boundary(const SymbreakSpec& spec, const Graph& graph) {
  check_spec(spec);
  PathConfiguration cfg;
  const TorusPoint x{spec.x_star};
  for (VertexId v : graph.boundary_layer()) {
    const TorusPoint p =
        spec.boundary == BoundaryKind::cooled ? x : tilted_point(graph, v, x, spec.eta, spec.theta_hc);
    cfg.set(v, LoopPath::constant(p, spec.slices, spec.beta));
  }
  return cfg;
}

namespace {
// sqrt(2 tau var / n); hard-core chains can have tau comparable to a batch.
double tau_error(const std::vector<double>& xs, double tau) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= double(xs.size() - 1);
  return std::sqrt(2.0 * tau * var / double(xs.size()));
}
}  // namespace

bool in_arc(double x, double center, double half_width) { return circle_distance(x, center) < half_width; }

ChainOptions symbreak_chain_options(const SymbreakSpec& spec) {
  ChainOptions o;
  o.moves = MoveMix::defaults_for(Potential::singular_cosine(spec.theta_hc, 1));
  o.moves_set = true;
  if (spec.boundary == BoundaryKind::tilted) {
    const double slack = spec.theta_hc * (1.0 - spec.eta);
    o.moves.shift_width = std::clamp(slack, 1e-3, 0.05);
    // The eta = 1 ladder is the only admissible state; nothing can move.
    if (spec.eta >= 1.0) o.stall_check = false;
  }
  return o;
}

ArcReport arc_probability(const ModelSpec& model, const std::vector<double>& centers, double half_width,
                          const ArcRunOptions& options, RngStream rng) {
  if (centers.empty()) throw std::invalid_argument("arc_probability: no arc centers");
  if (!(half_width > 0.0 && half_width <= 0.5)) throw std::invalid_argument("arc_probability: bad half-width");
  if (model.dim != 1) throw std::invalid_argument("arc_probability: circle models only");
  const VertexId o = model.graph->origin();
  const auto it = std::lower_bound(model.region.begin(), model.region.end(), o);
  if (it == model.region.end() || *it != o) throw std::invalid_argument("arc_probability: origin outside the region");
  const auto idx = std::size_t(it - model.region.begin());

  ChainOptions co = options.chain;
  if (!options.chain_set) {
    co.moves = MoveMix::defaults_for(model.potential);
    co.moves_set = true;
    if (model.boundary.kind == BoundaryKind::tilted) {
      const double slack = model.boundary.theta_hc * (1.0 - model.boundary.eta);
      co.moves.shift_width = std::clamp(slack, 1e-3, 0.05);
      if (model.boundary.eta >= 1.0) co.stall_check = false;
    }
  }
  GibbsChain chain(model, rng, co);
  RunOptions ro;
  ro.sweeps = options.sweeps;
  ro.burn_in = options.burn_in;
  ro.track_energy = false;
  ro.chain = co;

  ArcReport rep;
  std::vector<std::vector<double>> series(centers.size());
  std::uint64_t recorded = 0;
  mcmc_run(chain, ro, [&](std::uint64_t, const GibbsChain& c) {
    const double x = c.path(idx).at(0, 0);
    for (std::size_t k = 0; k < centers.size(); ++k) series[k].push_back(in_arc(x, centers[k], half_width) ? 1.0 : 0.0);
    if (++recorded % 100 == 0 && !c.feasible()) rep.feasible_throughout = false;
  });
  if (!chain.feasible()) rep.feasible_throughout = false;
  rep.acceptance = chain.acceptance_by_move();

  for (std::size_t k = 0; k < centers.size(); ++k) {
    const MeanError m = batch_mean(series[k], options.batches);
    ArcObservable a;
    a.center = centers[k];
    a.half_width = half_width;
    a.p = m.mean;
    a.tau = integrated_autocorr(series[k]);
    a.stderr_ = std::max(m.stderr_, tau_error(series[k], a.tau));
    a.samples = series[k].size();
    rep.arcs.push_back(a);
    std::vector<double> d(series[0].size());
    for (std::size_t t = 0; t < d.size(); ++t) d[t] = series[0][t] - series[k][t];
    const MeanError md = batch_mean(d, options.batches);
    rep.diff.push_back(md.mean);
    rep.diff_err.push_back(std::max(md.stderr_, tau_error(d, integrated_autocorr(d))));
  }
  return rep;
}

EtaScanResult eta_scan(SymbreakSpec spec, double target, double tolerance, const EtaScanOptions& options,
                       RngStream rng) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("eta_scan: target must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("eta_scan: tolerance must be positive");
  spec.boundary = BoundaryKind::tilted;
  EtaScanResult res;
  res.n = spec.n;
  res.target = target;
  res.tolerance = tolerance;

  std::uint64_t call = 0;
  auto measure = [&](double eta) {
    spec.eta = eta;
    ArcRunOptions ro = options.run;
    if (!ro.chain_set) {
      ro.chain = symbreak_chain_options(spec);
      ro.chain_set = true;
    }
    const ArcReport r = arc_probability(symbreak_model(spec), {spec.x_star}, options.half_width, ro,
                                        rng.substream(++call));
    EtaStep s{eta, r.arcs[0].p, r.arcs[0].stderr_};
    res.steps.push_back(s);
    return s;
  };

  const EtaStep lo = measure(0.0);
  const EtaStep hi = measure(1.0);
  res.bracketed = lo.p + 3.0 * lo.err < target && hi.p - 3.0 * hi.err > target;
  if (!res.bracketed) {
    res.eta_lo = 0.0;
    res.eta_hi = 1.0;
    return res;
  }
  double a = 0.0, b = 1.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double mid = 0.5 * (a + b);
    const EtaStep s = measure(mid);
    res.eta = mid;
    res.p = s.p;
    res.p_err = s.err;
    if (s.err <= tolerance && std::fabs(s.p - target) <= tolerance + 2.0 * s.err) {
      res.converged = true;
      break;
    }
    (s.p < target ? a : b) = mid;
  }
  res.eta_lo = a;
  res.eta_hi = b;
  if (!res.converged) res.eta = 0.5 * (a + b);

  auto sorted = res.steps;
  std::sort(sorted.begin(), sorted.end(), [](const EtaStep& x, const EtaStep& y) { return x.eta < y.eta; });
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k].p < sorted[k - 1].p - 3.0 * std::hypot(sorted[k].err, sorted[k - 1].err)) res.monotone = false;
  return res;
}

}  // namespace qrotor
