#include "qrotor/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace qrotor {

BoundaryKind parse_boundary_kind(std::string_view name) {
  if (name == "free") return BoundaryKind::free;
  if (name == "loops") return BoundaryKind::loops;
  if (name == "cooled") return BoundaryKind::cooled;
  if (name == "tilted") return BoundaryKind::tilted;
  throw std::invalid_argument("unknown boundary kind '" + std::string(name) + "'");
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::free: return "free";
    case BoundaryKind::loops: return "loops";
    case BoundaryKind::cooled: return "cooled";
    case BoundaryKind::tilted: return "tilted";
  }
  return "?";
}

Boundary Boundary::free() { return Boundary{}; }

Boundary Boundary::from_loops(PathConfiguration cfg) {
  Boundary b;
  b.kind = BoundaryKind::loops;
  b.loops = std::move(cfg);
  return b;
}

Boundary Boundary::cooled(const TorusPoint& x_star) {
  Boundary b;
  b.kind = BoundaryKind::cooled;
  b.x_star = x_star;
  return b;
}

Boundary Boundary::tilted(const TorusPoint& x_star, double eta, double theta_hc) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("tilted boundary: eta must lie in [0, 1]");
  if (!(theta_hc > 0.0)) throw std::invalid_argument("tilted boundary: theta_hc must be positive");
  Boundary b;
  b.kind = BoundaryKind::tilted;
  b.x_star = x_star;
  b.eta = eta;
  b.theta_hc = theta_hc;
  return b;
}

TorusPoint tilted_point(const Graph& g, VertexId v, const TorusPoint& x_star, double eta,
                        double theta_hc) {
  if (!g.has_lattice_coords()) throw std::invalid_argument("tilted boundary needs lattice coordinates");
  const int j1 = g.coord(v)[0] - g.coord(g.origin())[0];
  Vec c{};
  for (int i = 0; i < x_star.dim(); ++i) c[i] = x_star[i];
  c[0] += j1 * eta * theta_hc;
  return TorusPoint(std::span<const double>(c.data(), std::size_t(x_star.dim())));
}

bool ModelSpec::in_region(VertexId v) const {
  return std::binary_search(region.begin(), region.end(), v);
}

void ModelSpec::validate() const {
  if (!graph) throw std::invalid_argument("model: no graph");
  if (region.empty()) throw std::invalid_argument("model: empty region");
  if (!std::is_sorted(region.begin(), region.end()) ||
      std::adjacent_find(region.begin(), region.end()) != region.end())
    throw std::invalid_argument("model: region must be sorted and duplicate-free");
  for (VertexId v : region)
    if (v < 0 || std::size_t(v) >= graph->size()) throw std::invalid_argument("model: region vertex out of range");
  if (dim != potential.dim()) throw std::invalid_argument("model: potential dimension differs from torus dimension");
  if (!(beta > 0.0)) throw std::invalid_argument("model: beta must be positive");
  if (slices < 1) throw std::invalid_argument("model: L must be at least 1");
  switch (boundary.kind) {
    case BoundaryKind::free: break;
    case BoundaryKind::loops:
      for (std::size_t k = 0; k < boundary.loops.size(); ++k) {
        const VertexId v = boundary.loops.vertices()[k];
        const auto& p = boundary.loops.paths()[k];
        if (in_region(v)) throw std::invalid_argument("model: boundary loop inside the region");
        if (p.slices() != slices || p.beta() != beta || p.dim() != dim)
          throw std::invalid_argument("model: boundary loop on a different slice grid");
      }
      break;
    case BoundaryKind::tilted:
      if (!graph->has_lattice_coords()) throw std::invalid_argument("model: tilted boundary needs a lattice");
      [[fallthrough]];
    case BoundaryKind::cooled:
      if (boundary.x_star.dim() != dim) throw std::invalid_argument("model: x* dimension mismatch");
      break;
  }
  for (VertexId v : internal_boundary)
    if (in_region(v)) throw std::invalid_argument("model: internal boundary vertex inside the region");
}

std::vector<VertexId> ModelSpec::coupled_outside() const {
  std::vector<VertexId> out;
  for (VertexId v : region)
    for (const auto& [w, j] : profile.partners(*graph, v))
      if (!in_region(w)) out.push_back(w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ModelSpec box_model(std::shared_ptr<const Graph> graph, int dim, double beta, int slices,
                    Potential potential, InteractionProfile profile, Boundary boundary) {
  ModelSpec m;
  m.region = graph->box();
  std::sort(m.region.begin(), m.region.end());
  m.graph = std::move(graph);
  m.dim = dim;
  m.beta = beta;
  m.slices = slices;
  m.potential = std::move(potential);
  m.profile = std::move(profile);
  m.boundary = std::move(boundary);
  m.validate();
  return m;
}

PathConfiguration resolve_boundary(const ModelSpec& model) {
  PathConfiguration out;
  const auto& b = model.boundary;
  switch (b.kind) {
    case BoundaryKind::free: break;
    case BoundaryKind::loops:
      for (VertexId v : model.coupled_outside())
        if (b.loops.contains(v)) out.set(v, b.loops.at(v));
      break;
    case BoundaryKind::cooled:
      for (VertexId v : model.coupled_outside())
        out.set(v, LoopPath::constant(b.x_star, model.slices, model.beta));
      break;
    case BoundaryKind::tilted:
      for (VertexId v : model.coupled_outside())
        out.set(v, LoopPath::constant(tilted_point(*model.graph, v, b.x_star, b.eta, b.theta_hc),
                                      model.slices, model.beta));
      break;
  }
  return out;
}

double model_energy(const ModelSpec& model, const PathConfiguration& cfg, const PathConfiguration& bnd) {
  PathConfiguration ordinary, internal;
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    const VertexId v = bnd.vertices()[k];
    const bool is_internal = std::find(model.internal_boundary.begin(), model.internal_boundary.end(), v) !=
                             model.internal_boundary.end();
    (is_internal ? internal : ordinary).set(v, bnd.paths()[k]);
  }
  const auto& g = *model.graph;
  const double a = config_energy(g, model.profile, model.potential, cfg);
  if (a == kInf) return kInf;
  const double b = boundary_energy(g, model.profile, model.potential, cfg, ordinary);
  if (b == kInf) return kInf;
  const double c = boundary_energy(g, model.profile, model.potential, cfg, internal);
  if (c == kInf) return kInf;
  return a + b + 2.0 * c;
}

BondTable BondTable::build(const ModelSpec& model) {
  model.validate();
  BondTable t;
  t.boundary = resolve_boundary(model);
  const auto& g = *model.graph;
  for (std::size_t a = 0; a < model.region.size(); ++a)
    for (const auto& [w, j] : model.profile.partners(g, model.region[a])) {
      auto it = std::lower_bound(model.region.begin(), model.region.end(), w);
      if (it != model.region.end() && *it == w) {
        const auto b = std::size_t(it - model.region.begin());
        if (b > a) t.inner.push_back({a, b, 2.0 * j});
      } else if (t.boundary.contains(w)) {
        const auto& bv = t.boundary.vertices();
        const auto b = std::size_t(std::lower_bound(bv.begin(), bv.end(), w) - bv.begin());
        const bool internal = std::find(model.internal_boundary.begin(), model.internal_boundary.end(), w) !=
                              model.internal_boundary.end();
        t.outer.push_back({a, b, internal ? 2.0 * j : j});
      }
    }
  return t;
}

double BondTable::energy(const Potential& v, const std::vector<const LoopPath*>& paths) const {
  double e = 0.0;
  for (const auto& bd : inner) {
    const double i = pair_integral(v, *paths[bd.a], *paths[bd.b]);
    if (i == kInf) return kInf;
    e += bd.weight * i;
  }
  for (const auto& bd : outer) {
    const double i = pair_integral(v, *paths[bd.a], boundary.paths()[bd.b]);
    if (i == kInf) return kInf;
    e += bd.weight * i;
  }
  return e;
}

double BondTable::energy_touching(const Potential& v, const std::vector<const LoopPath*>& paths,
                                  const std::vector<bool>& touch) const {
  double e = 0.0;
  for (const auto& bd : inner) {
    if (!touch[bd.a] && !touch[bd.b]) continue;
    const double i = pair_integral(v, *paths[bd.a], *paths[bd.b]);
    if (i == kInf) return kInf;
    e += bd.weight * i;
  }
  for (const auto& bd : outer) {
    if (!touch[bd.a]) continue;
    const double i = pair_integral(v, *paths[bd.a], boundary.paths()[bd.b]);
    if (i == kInf) return kInf;
    e += bd.weight * i;
  }
  return e;
}

double log_unnormalized_density(const ModelSpec& model, const PathConfiguration& cfg) {
  model.validate();
  if (cfg.vertices() != model.region)
    throw std::invalid_argument("log density: configuration does not cover exactly the region");
  const double h = model_energy(model, cfg, resolve_boundary(model));
  return h == kInf ? -kInf : -h;
}

MoveMix MoveMix::defaults_for(const Potential& v) {
  MoveMix m;
  if (!v.smooth()) {
    m.free = 0.0;
    m.shift = 1.0;
    m.segment = 1.0;
    m.shift_width = 0.05;
  }
  return m;
}

GibbsChain::GibbsChain(ModelSpec model, RngStream rng, ChainOptions options)
    : model_(std::move(model)), rng_(rng), options_(options) {
  model_.validate();
  if (!options_.moves_set) options_.moves = MoveMix::defaults_for(model_.potential);
  const auto& mv = options_.moves;
  if (mv.free < 0 || mv.shift < 0 || mv.segment < 0 || mv.free + mv.shift + mv.segment <= 0)
    throw std::invalid_argument("chain: move weights must be nonnegative with a positive sum");
  boundary_ = resolve_boundary(model_);
  boundary_list_ = boundary_.paths();
  build_tables();
  proposed_.assign(model_.region.size(), 0);
  accepted_.assign(model_.region.size(), 0);
  initial_state();
}

void GibbsChain::build_tables() {
  const auto& g = *model_.graph;
  std::unordered_map<VertexId, std::size_t> region_index, boundary_index;
  for (std::size_t k = 0; k < model_.region.size(); ++k) region_index[model_.region[k]] = k;
  for (std::size_t k = 0; k < boundary_.size(); ++k) boundary_index[boundary_.vertices()[k]] = k;
  partners_.assign(model_.region.size(), {});
  for (std::size_t k = 0; k < model_.region.size(); ++k)
    for (const auto& [w, j] : model_.profile.partners(g, model_.region[k])) {
      if (auto it = region_index.find(w); it != region_index.end()) {
        partners_[k].push_back({true, it->second, 2.0 * j});
      } else if (auto jt = boundary_index.find(w); jt != boundary_index.end()) {
        const bool internal = std::find(model_.internal_boundary.begin(), model_.internal_boundary.end(), w) !=
                              model_.internal_boundary.end();
        partners_[k].push_back({false, jt->second, internal ? 2.0 * j : j});
      }
    }
}

void GibbsChain::initial_state() {
  const int L = model_.slices;
  paths_.clear();
  paths_.reserve(model_.region.size());
  const auto& b = model_.boundary;
  for (VertexId v : model_.region) {
    if (b.kind == BoundaryKind::tilted) {
      paths_.push_back(LoopPath::constant(tilted_point(*model_.graph, v, b.x_star, b.eta, b.theta_hc), L, model_.beta));
    } else if (b.kind == BoundaryKind::cooled || !model_.potential.smooth() || !options_.random_start) {
      const TorusPoint x = b.kind == BoundaryKind::cooled ? b.x_star : TorusPoint(model_.dim);
      paths_.push_back(LoopPath::constant(x, L, model_.beta));
    } else {
      Vec x{};
      for (int i = 0; i < model_.dim; ++i) x[i] = rng_.uniform();
      paths_.push_back(sample_loop(TorusPoint(std::span<const double>(x.data(), std::size_t(model_.dim))),
                                   model_.beta, L, rng_));
    }
  }
  if (energy() == kInf) throw std::runtime_error("chain: infeasible initial configuration");
}

void GibbsChain::set_state(const PathConfiguration& cfg) {
  if (cfg.vertices() != model_.region) throw std::invalid_argument("chain: state does not match the region");
  for (const auto& p : cfg.paths())
    if (p.slices() != model_.slices || p.beta() != model_.beta || p.dim() != model_.dim || !p.is_loop())
      throw std::invalid_argument("chain: state paths must be loops on the model's slice grid");
  paths_ = cfg.paths();
  if (energy() == kInf) throw std::runtime_error("chain: infeasible configuration");
}

PathConfiguration GibbsChain::state() const {
  PathConfiguration cfg;
  for (std::size_t k = 0; k < paths_.size(); ++k) cfg.set(model_.region[k], paths_[k]);
  return cfg;
}

double GibbsChain::energy() const { return model_energy(model_, state(), boundary_); }

bool GibbsChain::feasible() const { return energy() != kInf; }

double GibbsChain::local_energy(std::size_t idx, const LoopPath& p) const {
  double e = 0.0;
  for (const auto& q : partners_[idx]) {
    const LoopPath& other = q.inner ? paths_[q.index] : boundary_list_[q.index];
    const double i = pair_integral(model_.potential, p, other);
    if (i == kInf) return kInf;
    e += q.weight * i;
  }
  return e;
}

bool GibbsChain::try_move(std::size_t idx) {
  const auto& mv = options_.moves;
  const int L = model_.slices;
  const LoopPath& old = paths_[idx];
  const double total = mv.free + mv.shift + mv.segment;
  double u = rng_.uniform() * total;
  int kind = u < mv.free ? 0 : (u < mv.free + mv.shift ? 1 : 2);
  if (kind == 2 && L < 2) kind = 1;

  LoopPath cand;
  if (kind == 0) {
    Vec x{};
    for (int i = 0; i < model_.dim; ++i) x[i] = rng_.uniform();
    cand = sample_loop(TorusPoint(std::span<const double>(x.data(), std::size_t(model_.dim))), model_.beta, L, rng_);
  } else if (kind == 1) {
    Vec s{};
    for (int i = 0; i < model_.dim; ++i) s[i] = (2.0 * rng_.uniform() - 1.0) * mv.shift_width;
    cand = shift_path(std::span<const double>(s.data(), std::size_t(model_.dim)), old);
  } else {
    const int max_len = std::clamp(mv.segment_max > 0 ? mv.segment_max : L / 2, 2, L);
    const int a = static_cast<int>(rng_.below(std::uint64_t(L)));
    const int len = 2 + static_cast<int>(rng_.below(std::uint64_t(max_len - 1)));
    cand = redraw_loop_segment(old, a, len, rng_);
  }

  ++proposed_[idx];
  ++move_proposed_[kind];
  const double e_new = local_energy(idx, cand);
  bool accept;
  if (e_new == kInf) {
    accept = false;
  } else {
    const double delta = e_new - local_energy(idx, old);
    accept = delta <= 0.0 || rng_.uniform() < std::exp(-delta);
  }
  if (accept) {
    paths_[idx] = std::move(cand);
    ++accepted_[idx];
    ++move_accepted_[kind];
  }
  return accept;
}

void GibbsChain::sweep() {
  bool any = false;
  for (std::size_t k = 0; k < paths_.size(); ++k) any = try_move(k) || any;
  ++sweeps_;
  if (any) last_accept_sweep_ = sweeps_;
  if (options_.stall_check && sweeps_ - last_accept_sweep_ >= std::uint64_t(options_.stall_window))
    throw std::runtime_error("chain stalled: no move accepted in " + std::to_string(options_.stall_window) +
                             " sweeps");
}

std::vector<double> GibbsChain::acceptance() const {
  std::vector<double> a(proposed_.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k)
    a[k] = proposed_[k] ? double(accepted_[k]) / double(proposed_[k]) : 0.0;
  return a;
}

std::map<std::string, double> GibbsChain::acceptance_by_move() const {
  static const char* names[3] = {"free", "shift", "segment"};
  std::map<std::string, double> out;
  for (int k = 0; k < 3; ++k)
    if (move_proposed_[k]) out[names[k]] = double(move_accepted_[k]) / double(move_proposed_[k]);
  return out;
}

std::uint64_t resolve_burn_in(const RunOptions& options) {
  const std::uint64_t b = options.burn_in < 0 ? options.sweeps / 5 : std::uint64_t(options.burn_in);
  if (b >= options.sweeps) throw std::invalid_argument("run: burn-in must be shorter than the run");
  return b;
}

RunResult mcmc_run(GibbsChain& chain, const RunOptions& options, const Observer& observer) {
  const std::uint64_t burn = resolve_burn_in(options);
  const std::uint64_t thin = std::max<std::uint64_t>(1, options.thin);
  RunResult r;
  for (std::uint64_t s = 0; s < options.sweeps; ++s) {
    chain.sweep();
    if (s < burn || (s - burn) % thin != 0) continue;
    if (options.track_energy) r.energy_trace.push_back(chain.energy());
    if (observer) observer(s, chain);
  }
  r.stats.sweeps = options.sweeps;
  r.stats.burn_in = burn;
  r.stats.acceptance = chain.acceptance();
  r.stats.acceptance_by_move = chain.acceptance_by_move();
  if (options.track_energy) r.stats.autocorr["energy"] = integrated_autocorr(r.energy_trace);
  return r;
}

RunResult mcmc_run(const ModelSpec& model, const RunOptions& options, RngStream rng, const Observer& observer) {
  GibbsChain chain(model, rng, options.chain);
  return mcmc_run(chain, options, observer);
}

int bin_of(double x, int bins) {
  const int b = static_cast<int>(wrap01(x) * bins);
  return std::min(b, bins - 1);
}

DlrReport dlr_check(const ModelSpec& model, const std::vector<VertexId>& inner, const std::vector<VertexId>& mid,
                    const DlrOptions& options, RngStream rng) {
  model.validate();
  if (inner.empty()) throw std::invalid_argument("dlr_check: empty inner set");
  std::vector<VertexId> mid_sorted = mid;
  std::sort(mid_sorted.begin(), mid_sorted.end());
  for (VertexId v : inner)
    if (!std::binary_search(mid_sorted.begin(), mid_sorted.end(), v))
      throw std::invalid_argument("dlr_check: inner set must lie inside the middle set");
  for (VertexId v : mid_sorted)
    if (!model.in_region(v)) throw std::invalid_argument("dlr_check: middle set must lie inside the region");
  if (options.sweeps < 10 * options.resample_every)
    throw std::invalid_argument("dlr_check: insufficient samples");

  int cells = 1;
  for (std::size_t k = 0; k < inner.size(); ++k) cells *= options.bins;
  auto cell_of = [&](const GibbsChain& c, const std::vector<std::size_t>& idx) {
    int cell = 0;
    for (std::size_t k = idx.size(); k-- > 0;) cell = cell * options.bins + bin_of(c.path(idx[k]).at(0, 0), options.bins);
    return cell;
  };
  auto indices_in = [](const std::vector<VertexId>& region, const std::vector<VertexId>& vs) {
    std::vector<std::size_t> idx;
    for (VertexId v : vs)
      idx.push_back(std::size_t(std::lower_bound(region.begin(), region.end(), v) - region.begin()));
    return idx;
  };

  GibbsChain full(model, rng.substream(0), options.chain);
  const auto full_idx = indices_in(model.region, inner);
  const auto mid_idx_inner = indices_in(mid_sorted, inner);
  const PathConfiguration outer_bnd = resolve_boundary(model);

  ModelSpec cond = model;
  cond.region = mid_sorted;
  for (VertexId v : model.region)
    if (!std::binary_search(mid_sorted.begin(), mid_sorted.end(), v)) cond.internal_boundary.push_back(v);

  std::vector<int> direct, staged;
  RunOptions ro;
  ro.sweeps = options.sweeps;
  ro.track_energy = false;
  ro.chain = options.chain;
  std::uint64_t draw = 0;
  mcmc_run(full, ro, [&](std::uint64_t s, const GibbsChain& c) {
    direct.push_back(cell_of(c, full_idx));
    if (s % options.resample_every != 0) return;
    PathConfiguration outside = outer_bnd;
    for (std::size_t k = 0; k < c.region().size(); ++k)
      if (!std::binary_search(mid_sorted.begin(), mid_sorted.end(), c.region()[k]))
        outside.set(c.region()[k], c.path(k));
    ModelSpec m = cond;
    m.boundary = Boundary::from_loops(std::move(outside));
    ChainOptions co = options.chain;
    co.stall_check = false;
    GibbsChain sub(std::move(m), rng.substream({1, draw++}), co);
    for (std::uint64_t t = 0; t < options.conditional_sweeps; ++t) sub.sweep();
    staged.push_back(cell_of(sub, mid_idx_inner));
  });

  DlrReport r;
  r.direct = binned_marginal(direct, cells, options.batches);
  r.two_stage = binned_marginal(staged, cells, options.batches);
  r.two_stage_samples = staged.size();
  r.tv = tv_distance(r.direct.p, r.two_stage.p);
  r.null = tv_null(r.direct.err, r.two_stage.err);
  r.z = r.null.sd > 0 ? (r.tv - r.null.mean) / r.null.sd : 0.0;
  r.pass = r.tv <= r.null.mean + 3.0 * r.null.sd;
  return r;
}

}  // namespace qrotor
