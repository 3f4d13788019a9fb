#include "qrotor/rdm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace qrotor {

RdmMethod parse_rdm_method(std::string_view name) {
  if (name == "reference") return RdmMethod::reference;
  if (name == "chain") return RdmMethod::chain;
  throw std::invalid_argument("unknown rdm method '" + std::string(name) + "'");
}

std::string to_string(RdmMethod m) { return m == RdmMethod::reference ? "reference" : "chain"; }

double free_kernel(const KernelPair& pair, double beta) {
  const auto hk = HeatKernelParams::for_beta(beta);
  double f = 1.0;
  for (std::size_t k = 0; k < pair.x.size(); ++k) {
    const TorusPoint& x = pair.x[k];
    f *= heat_kernel(x, pair.y[k], hk) / heat_kernel(x, x, hk);
  }
  return f;
}

namespace {

// Per-batch accumulators for ratio or plain-mean estimators.
struct Batches {
  int count;
  std::uint64_t total;
  std::vector<std::vector<double>> num;  // [pair][batch]
  std::vector<double> den;               // [batch]
  std::vector<std::uint64_t> size;       // [batch]

  Batches(std::size_t pairs, int batches, std::uint64_t samples)
      : count(std::max(2, std::min<int>(batches, static_cast<int>(std::max<std::uint64_t>(samples, 2))))),
        total(samples),
        num(pairs, std::vector<double>(std::size_t(count), 0.0)),
        den(std::size_t(count), 0.0),
        size(std::size_t(count), 0) {}

  int batch_of(std::uint64_t t) const { return static_cast<int>(t * std::uint64_t(count) / total); }

  // sum(num) / sum(den) with a batch-means delta-method error.
  void ratio(std::size_t p, double& mean, double& err) const {
    double sn = 0, sd = 0;
    for (int b = 0; b < count; ++b) {
      sn += num[p][b];
      sd += den[b];
    }
    if (sd == 0.0) throw std::runtime_error("rdm: every normalising sample vanished");
    mean = sn / sd;
    const double dbar = sd / count;
    std::vector<double> res(static_cast<std::size_t>(count));
    double m = 0;
    for (int b = 0; b < count; ++b) {
      res[b] = (num[p][b] - mean * den[b]) / dbar;
      m += res[b];
    }
    m /= count;
    double v = 0;
    for (double r : res) v += (r - m) * (r - m);
    v /= (count - 1);
    err = std::sqrt(v / count);
  }

  // Per-batch residuals whose spread gives the error of ratio() or plain().
  std::vector<double> residuals(std::size_t p, bool as_ratio) const {
    std::vector<double> r(static_cast<std::size_t>(count));
    double sn = 0, sd = 0;
    for (int b = 0; b < count; ++b) {
      sn += num[p][b];
      sd += den[b];
    }
    for (int b = 0; b < count; ++b) {
      if (as_ratio)
        r[b] = (num[p][b] - sn / sd * den[b]) / (sd / count);
      else
        r[b] = size[b] ? num[p][b] / double(size[b]) : 0.0;
    }
    return r;
  }

  // sum(num) / total with batch-means error.
  void plain(std::size_t p, double& mean, double& err) const {
    double s = 0;
    std::vector<double> bm(static_cast<std::size_t>(count));
    for (int b = 0; b < count; ++b) {
      s += num[p][b];
      bm[b] = size[b] ? num[p][b] / double(size[b]) : 0.0;
    }
    mean = s / double(total);
    double m = 0;
    for (double x : bm) m += x;
    m /= count;
    double v = 0;
    for (double x : bm) v += (x - m) * (x - m);
    v /= (count - 1);
    err = std::sqrt(v / count);
  }
};

double paired_error(const std::vector<double>& a, const std::vector<double>& b, double wa, double wb) {
  const std::size_t n = a.size();
  std::vector<double> d(n);
  double m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    d[k] = wa * a[k] - wb * b[k];
    m += d[k];
  }
  m /= double(n);
  double v = 0;
  for (double x : d) v += (x - m) * (x - m);
  v /= double(n - 1);
  return std::sqrt(v / double(n));
}

struct Layout {
  std::vector<std::size_t> window;  // region indices of the window vertices
  std::vector<std::size_t> rest;
  std::vector<bool> in_window;
};

Layout make_layout(const ModelSpec& model, const std::vector<VertexId>& sites) {
  Layout l;
  l.in_window.assign(model.region.size(), false);
  for (VertexId v : sites) {
    auto it = std::lower_bound(model.region.begin(), model.region.end(), v);
    if (it == model.region.end() || *it != v) throw std::invalid_argument("rdm: window vertex outside the region");
    const auto idx = std::size_t(it - model.region.begin());
    if (l.in_window[idx]) throw std::invalid_argument("rdm: repeated window vertex");
    l.in_window[idx] = true;
    l.window.push_back(idx);
  }
  for (std::size_t k = 0; k < model.region.size(); ++k)
    if (!l.in_window[k]) l.rest.push_back(k);
  return l;
}

void check_pairs(const std::vector<KernelPair>& pairs, std::size_t sites, int dim) {
  for (const auto& p : pairs) {
    if (p.x.size() != sites || p.y.size() != sites)
      throw std::invalid_argument("rdm: each pair needs one point per window vertex");
    for (std::size_t k = 0; k < sites; ++k)
      if (p.x[k].dim() != dim || p.y[k].dim() != dim) throw std::invalid_argument("rdm: pair dimension mismatch");
  }
}

TorusPoint uniform_point(int dim, RngStream& rng) {
  Vec x{};
  for (int i = 0; i < dim; ++i) x[i] = rng.uniform();
  return TorusPoint(std::span<const double>(x.data(), std::size_t(dim)));
}

KernelPair shifted_pair(const KernelPair& p, const GroupElement& g) {
  KernelPair q;
  for (const auto& x : p.x) q.x.push_back(act(g, x));
  for (const auto& y : p.y) q.y.push_back(act(g, y));
  return q;
}

double prefactor(const KernelPair& p, double beta) { return free_kernel(p, beta); }

RdmkEstimate blank(const ModelSpec& model, const std::vector<VertexId>& sites, std::vector<KernelPair> pairs,
                   const RdmOptions& o) {
  RdmkEstimate e;
  e.sites = sites;
  e.dim = model.dim;
  e.pairs = std::move(pairs);
  e.samples = o.samples;
  e.slices = model.slices;
  e.beta = model.beta;
  e.method = o.method;
  e.mean.assign(e.pairs.size(), 0.0);
  e.stderr_.assign(e.pairs.size(), 0.0);
  e.zero_flag.assign(e.pairs.size(), false);
  return e;
}

// Reference estimator. With `g`, also estimates the shifted pairs from the
// shifted samples.
void run_reference(const ModelSpec& model, const std::vector<VertexId>& sites, const std::vector<KernelPair>& pairs,
                   const GroupElement* g, const RdmOptions& o, RngStream rng, RdmkEstimate& base,
                   RdmkEstimate* shifted, std::vector<double>* diff_err) {
  const Layout lay = make_layout(model, sites);
  const BondTable bonds = BondTable::build(model);
  const int L = model.slices, d = model.dim;
  const double beta = model.beta;
  const std::size_t P = pairs.size(), W = lay.window.size();
  Batches acc(P, o.batches, o.samples), acc_g(P, o.batches, o.samples);
  std::vector<double> nonzero(P, 0.0);

  std::vector<LoopPath> region_paths(model.region.size()), region_g(model.region.size());
  std::vector<const LoopPath*> ptr(model.region.size()), ptr_g(model.region.size());
  std::vector<LoopPath> bridge_g(W);
  for (std::uint64_t t = 0; t < o.samples; ++t) {
    const RngStream s = rng.substream(t);
    for (std::size_t r : lay.rest) {
      RngStream rs = s.substream({1, r});
      region_paths[r] = sample_loop(uniform_point(d, rs), beta, L, rs);
      if (g) region_g[r] = shift_path(*g, region_paths[r]);
    }
    for (std::size_t k = 0; k < region_paths.size(); ++k) {
      ptr[k] = &region_paths[k];
      ptr_g[k] = &region_g[k];
    }
    // Normaliser: free loops on the window too.
    for (std::size_t k = 0; k < W; ++k) {
      RngStream rs = s.substream({2, k});
      region_paths[lay.window[k]] = sample_loop(uniform_point(d, rs), beta, L, rs);
      if (g) region_g[lay.window[k]] = shift_path(*g, region_paths[lay.window[k]]);
    }
    const int b = acc.batch_of(t);
    const double e_den = bonds.energy(model.potential, ptr);
    acc.den[b] += std::exp(-e_den);
    ++acc.size[b];
    if (g) {
      acc_g.den[b] += std::exp(-bonds.energy(model.potential, ptr_g));
      ++acc_g.size[b];
    }
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t k = 0; k < W; ++k) {
        // Same stream for every pair: common random numbers across pairs.
        RngStream rs = s.substream({3, k});
        region_paths[lay.window[k]] = sample_bridge(pairs[p].x[k], pairs[p].y[k], beta, L, rs);
        if (g) region_g[lay.window[k]] = shift_path(*g, region_paths[lay.window[k]]);
      }
      const double w = std::exp(-bonds.energy(model.potential, ptr));
      acc.num[p][b] += w;
      if (w > 0.0) nonzero[p] = 1.0;
      if (g) acc_g.num[p][b] += std::exp(-bonds.energy(model.potential, ptr_g));
    }
  }
  for (std::size_t p = 0; p < P; ++p) {
    double m, e;
    acc.ratio(p, m, e);
    const double pref = prefactor(pairs[p], beta);
    base.mean[p] = pref * m;
    base.stderr_[p] = pref * e;
    base.zero_flag[p] = nonzero[p] == 0.0;
    if (g) {
      acc_g.ratio(p, m, e);
      const double pg = prefactor(shifted->pairs[p], beta);
      diff_err->push_back(paired_error(acc.residuals(p, true), acc_g.residuals(p, true), pref, pg));
      shifted->mean[p] = pg * m;
      shifted->stderr_[p] = pg * e;
      shifted->zero_flag[p] = base.zero_flag[p];
    }
  }
}

// Chain estimator: the complement of the window follows the Gibbs measure;
// shifted pairs reuse the same states with shifted window bridges.
void run_chain(const ModelSpec& model, const std::vector<VertexId>& sites, const std::vector<KernelPair>& pairs,
               const GroupElement* g, const RdmOptions& o, RngStream rng, RdmkEstimate& base, RdmkEstimate* shifted,
               std::vector<double>* diff_err) {
  const Layout lay = make_layout(model, sites);
  const BondTable bonds = BondTable::build(model);
  const int L = model.slices, d = model.dim;
  const double beta = model.beta;
  const std::size_t P = pairs.size(), W = lay.window.size();
  if (o.inner_bridges < 1 || o.inner_loops < 1) throw std::invalid_argument("rdm: inner sample counts must be positive");
  Batches acc(P, o.batches, o.samples), acc_g(P, o.batches, o.samples);
  std::vector<double> nonzero(P, 0.0);

  GibbsChain chain(model, rng.substream(0), o.chain);
  RunOptions ro;
  ro.sweeps = o.samples * std::max<std::uint64_t>(1, o.thin);
  ro.burn_in = o.burn_in < 0 ? std::int64_t(ro.sweeps / 4) : o.burn_in;
  const std::uint64_t burn = std::uint64_t(ro.burn_in);
  for (std::uint64_t s = 0; s < burn; ++s) chain.sweep();

  std::vector<LoopPath> local(model.region.size());
  std::vector<const LoopPath*> ptr(model.region.size());
  std::vector<std::vector<LoopPath>> bridges(W);
  for (std::uint64_t t = 0; t < o.samples; ++t) {
    for (std::uint64_t k = 0; k < std::max<std::uint64_t>(1, o.thin); ++k) chain.sweep();
    for (std::size_t k = 0; k < model.region.size(); ++k) ptr[k] = &chain.path(k);
    const double h_ref = bonds.energy_touching(model.potential, ptr, lay.in_window);
    const RngStream s = rng.substream({1, t});

    double norm = 0.0;
    for (int q = 0; q < o.inner_loops; ++q) {
      for (std::size_t k = 0; k < W; ++k) {
        RngStream rs = s.substream({2, std::uint64_t(q), k});
        local[lay.window[k]] = sample_loop(uniform_point(d, rs), beta, L, rs);
        ptr[lay.window[k]] = &local[lay.window[k]];
      }
      norm += std::exp(-(bonds.energy_touching(model.potential, ptr, lay.in_window) - h_ref));
    }
    norm /= o.inner_loops;
    if (norm == 0.0) throw std::runtime_error("rdm: window normaliser vanished; raise inner_loops");

    const int b = acc.batch_of(t);
    ++acc.size[b];
    ++acc_g.size[b];
    for (std::size_t p = 0; p < P; ++p) {
      double a = 0.0, a_g = 0.0;
      for (int q = 0; q < o.inner_bridges; ++q) {
        for (std::size_t k = 0; k < W; ++k) {
          RngStream rs = s.substream({3, std::uint64_t(q), k});
          local[lay.window[k]] = sample_bridge(pairs[p].x[k], pairs[p].y[k], beta, L, rs);
          ptr[lay.window[k]] = &local[lay.window[k]];
        }
        a += std::exp(-(bonds.energy_touching(model.potential, ptr, lay.in_window) - h_ref));
        if (g) {
          for (std::size_t k = 0; k < W; ++k) {
            local[lay.window[k]] = shift_path(*g, local[lay.window[k]]);
          }
          a_g += std::exp(-(bonds.energy_touching(model.potential, ptr, lay.in_window) - h_ref));
        }
      }
      a /= o.inner_bridges;
      a_g /= o.inner_bridges;
      if (a > 0.0) nonzero[p] = 1.0;
      acc.num[p][b] += a / norm;
      acc_g.num[p][b] += a_g / norm;
    }
  }
  for (std::size_t p = 0; p < P; ++p) {
    double m, e;
    acc.plain(p, m, e);
    const double pref = prefactor(pairs[p], beta);
    base.mean[p] = pref * m;
    base.stderr_[p] = pref * e;
    base.zero_flag[p] = nonzero[p] == 0.0;
    if (g) {
      acc_g.plain(p, m, e);
      const double pg = prefactor(shifted->pairs[p], beta);
      diff_err->push_back(paired_error(acc.residuals(p, false), acc_g.residuals(p, false), pref, pg));
      shifted->mean[p] = pg * m;
      shifted->stderr_[p] = pg * e;
      shifted->zero_flag[p] = base.zero_flag[p];
    }
  }
}

void validate_request(const ModelSpec& model, const std::vector<VertexId>& sites, const std::vector<KernelPair>& pairs,
                      const RdmOptions& o) {
  model.validate();
  if (sites.empty()) throw std::invalid_argument("rdm: empty window");
  check_pairs(pairs, sites.size(), model.dim);
  if (o.samples < std::uint64_t(std::max(2, o.batches)) * 2)
    throw std::invalid_argument("rdm: insufficient samples for the requested batches");
}

}  // namespace

RdmkEstimate estimate_rdmk(const ModelSpec& model, const std::vector<VertexId>& sites,
                           const std::vector<KernelPair>& pairs, const RdmOptions& options, RngStream rng) {
  validate_request(model, sites, pairs, options);
  RdmkEstimate est = blank(model, sites, pairs, options);
  if (options.method == RdmMethod::reference)
    run_reference(model, sites, pairs, nullptr, options, rng, est, nullptr, nullptr);
  else
    run_chain(model, sites, pairs, nullptr, options, rng, est, nullptr, nullptr);
  return est;
}

InvarianceReport check_invariance(const ModelSpec& model, const std::vector<VertexId>& sites,
                                  const std::vector<KernelPair>& pairs, const GroupElement& g,
                                  const RdmOptions& options, RngStream rng) {
  validate_request(model, sites, pairs, options);
  if (g.dim() != model.dim) throw std::invalid_argument("check_invariance: group dimension mismatch");
  InvarianceReport r;
  std::vector<KernelPair> gp;
  for (const auto& p : pairs) gp.push_back(shifted_pair(p, g));
  r.base = blank(model, sites, pairs, options);
  r.shifted = blank(model, sites, gp, options);
  if (options.method == RdmMethod::reference)
    run_reference(model, sites, pairs, &g, options, rng, r.base, &r.shifted, &r.diff_err);
  else
    run_chain(model, sites, pairs, &g, options, rng, r.base, &r.shifted, &r.diff_err);
  const bool free_like = model.boundary.kind == BoundaryKind::free || model.potential.is_zero() ||
                         model.profile.is_zero();
  r.exact_claim = options.method == RdmMethod::reference && free_like && model.potential.smooth() &&
                  model.internal_boundary.empty();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double diff = r.base.mean[p] - r.shifted.mean[p];
    const double err = r.diff_err[p];
    r.diff.push_back(diff);
    if (std::fabs(diff) >= r.max_abs_diff) {
      r.max_abs_diff = std::fabs(diff);
      r.max_diff_err = err;
    }
  }
  return r;
}

std::vector<TorusPoint> grid_point(std::size_t idx, int m, int sites, int dim) {
  std::vector<TorusPoint> pts;
  for (int k = 0; k < sites; ++k) {
    Vec c{};
    for (int i = 0; i < dim; ++i) {
      c[i] = (double(idx % std::size_t(m)) + 0.5) / m;
      idx /= std::size_t(m);
    }
    pts.emplace_back(std::span<const double>(c.data(), std::size_t(dim)));
  }
  return pts;
}

namespace {
std::size_t grid_size(int m, int sites, int dim) {
  std::size_t n = 1;
  for (int k = 0; k < sites * dim; ++k) n *= std::size_t(m);
  return n;
}
}  // namespace

std::vector<KernelPair> grid_pairs(int m, int sites, int dim) {
  const std::size_t n = grid_size(m, sites, dim);
  std::vector<KernelPair> out;
  out.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out.push_back({grid_point(a, m, sites, dim), grid_point(b, m, sites, dim)});
  return out;
}

std::vector<KernelPair> diagonal_pairs(int m, int sites, int dim) {
  const std::size_t n = grid_size(m, sites, dim);
  std::vector<KernelPair> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back({grid_point(a, m, sites, dim), grid_point(a, m, sites, dim)});
  return out;
}

KernelMatrix kernel_matrix(const RdmkEstimate& est, int m) {
  const int sites = static_cast<int>(est.sites.size());
  const std::size_t n = grid_size(m, sites, est.dim);
  if (est.pairs.size() != n * n) throw std::invalid_argument("kernel_matrix: estimate does not cover the full grid");
  KernelMatrix k;
  k.m = m;
  k.dim = est.dim;
  k.sites = sites;
  k.weight = 1.0 / double(n);
  k.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      k.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = est.mean[a * n + b];
  return k;
}

KernelMatrix free_kernel_matrix(double beta, int m, int trunc) {
  const HeatKernelParams p{beta, trunc, 1e-12};
  KernelMatrix k;
  k.m = m;
  k.weight = 1.0 / m;
  k.values.resize(m, m);
  const double z0 = heat_kernel_1d(0.0, HeatKernelParams::for_beta(beta));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) k.values(a, b) = heat_kernel_1d(double(a - b) / m, p) / z0;
  return k;
}

double grid_trace(const KernelMatrix& k) { return k.weight * k.values.trace(); }

KernelMatrix normalized(KernelMatrix k) {
  const double t = grid_trace(k);
  if (!(t > 0.0)) throw std::domain_error("normalized: non-positive trace");
  k.values /= t;
  return k;
}

double trace_norm(const Eigen::MatrixXd& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().sum();
}

double trace_norm_distance(const KernelMatrix& a, const KernelMatrix& b) {
  if (a.m != b.m || a.dim != b.dim || a.sites != b.sites || a.values.rows() != b.values.rows() ||
      a.values.cols() != b.values.cols())
    throw std::invalid_argument("trace_norm_distance: grid mismatch");
  return trace_norm(a.weight * (a.values - b.values));
}

PsdReport psd_check(const KernelMatrix& k, double tolerance) {
  const Eigen::MatrixXd s = 0.5 * k.weight * (k.values + k.values.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  PsdReport r;
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.psd = r.min_eigenvalue >= -tolerance;
  return r;
}

std::vector<double> lemma11_sweep(double beta, int m, int n_max) {
  const KernelMatrix ref = normalized(free_kernel_matrix(beta, m, default_truncation(beta) + 4));
  std::vector<double> out;
  for (int n = 0; n <= n_max; ++n) out.push_back(trace_norm_distance(normalized(free_kernel_matrix(beta, m, n)), ref));
  return out;
}

std::vector<KernelPair> extend_pairs_for_trace(const std::vector<KernelPair>& base, int m, int dim) {
  std::vector<KernelPair> out;
  for (const auto& p : base)
    for (std::size_t c = 0; c < grid_size(m, 1, dim); ++c) {
      KernelPair q = p;
      const auto z = grid_point(c, m, 1, dim);
      q.x.push_back(z[0]);
      q.y.push_back(z[0]);
      out.push_back(std::move(q));
    }
  return out;
}

void partial_trace(const RdmkEstimate& extended, std::size_t base_count, int m, std::vector<double>& mean,
                   std::vector<double>& err) {
  const std::size_t per = grid_size(m, 1, extended.dim);
  if (extended.pairs.size() != base_count * per) throw std::invalid_argument("partial_trace: pair count mismatch");
  mean.assign(base_count, 0.0);
  err.assign(base_count, 0.0);
  for (std::size_t p = 0; p < base_count; ++p) {
    for (std::size_t c = 0; c < per; ++c) {
      mean[p] += extended.mean[p * per + c];
      err[p] += extended.stderr_[p * per + c];
    }
    mean[p] /= double(per);
    err[p] /= double(per);
  }
}

void write_rdmk_csv(std::ostream& out, const RdmkEstimate& est) {
  const std::size_t s = est.sites.size();
  for (std::size_t k = 0; k < s; ++k)
    for (int i = 0; i < est.dim; ++i) out << "x" << k << "_" << i << ",";
  for (std::size_t k = 0; k < s; ++k)
    for (int i = 0; i < est.dim; ++i) out << "y" << k << "_" << i << ",";
  out << "mean,stderr\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t p = 0; p < est.pairs.size(); ++p) {
    for (const auto& x : est.pairs[p].x)
      for (int i = 0; i < est.dim; ++i) out << num(x[i]) << ",";
    for (const auto& y : est.pairs[p].y)
      for (int i = 0; i < est.dim; ++i) out << num(y[i]) << ",";
    out << num(est.mean[p]) << "," << num(est.stderr_[p]) << "\n";
  }
}

void write_kernel_binary(const std::string& path, const KernelMatrix& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const std::uint32_t version = 1;
  const std::int32_t hdr[3] = {k.m, k.dim, k.sites};
  out.write("QRKM", 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  out.write(reinterpret_cast<const char*>(&k.weight), sizeof k.weight);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = k.values;
  out.write(reinterpret_cast<const char*>(rm.data()), std::streamsize(sizeof(double) * std::size_t(rm.size())));
  if (!out) throw std::runtime_error("kernel write failed: " + path);
}

KernelMatrix read_kernel_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::int32_t hdr[3];
  KernelMatrix k;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  in.read(reinterpret_cast<char*>(&k.weight), sizeof k.weight);
  if (!in || std::memcmp(magic, "QRKM", 4) != 0) throw std::runtime_error("not a kernel matrix file: " + path);
  if (version != 1) throw std::runtime_error("kernel matrix version mismatch");
  k.m = hdr[0];
  k.dim = hdr[1];
  k.sites = hdr[2];
  if (k.m < 1 || k.dim < 1 || k.dim > kMaxDim || k.sites < 1) throw std::runtime_error("kernel matrix header corrupt");
  const std::size_t n = grid_size(k.m, k.sites, k.dim);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(n),
                                                                            static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(rm.data()), std::streamsize(sizeof(double) * n * n));
  if (!in) throw std::runtime_error("kernel matrix truncated");
  k.values = rm;
  return k;
}

}  // namespace qrotor
