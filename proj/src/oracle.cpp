#include "qrotor/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qrotor {

namespace {

// Slice potential U_k(s) for every grid state s.
Eigen::VectorXd slice_potential(const ModelSpec& model, const std::vector<std::vector<std::pair<int, double>>>& inner,
                                const std::vector<std::vector<std::pair<const LoopPath*, double>>>& outer,
                                int m, int k) {
  const int n = static_cast<int>(model.region.size());
  std::size_t N = 1;
  for (int i = 0; i < n; ++i) N *= std::size_t(m);
  Eigen::VectorXd u(static_cast<Eigen::Index>(N));
  std::vector<double> x(n);
  for (std::size_t s = 0; s < N; ++s) {
    std::size_t r = s;
    for (int i = 0; i < n; ++i) {
      x[i] = double(r % m) / m;
      r /= m;
    }
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      for (const auto& [j, w] : inner[i]) e += w * model.potential.eval(&x[i], &x[j]);
      for (const auto& [p, w] : outer[i]) e += w * model.potential.eval(&x[i], &p->raw_points()[k]);
    }
    u[static_cast<Eigen::Index>(s)] = e;
  }
  return u;
}

}  // namespace

OracleResult transfer_matrix_oracle(const ModelSpec& model, const OracleOptions& options) {
  model.validate();
  if (model.dim != 1) throw std::invalid_argument("oracle: only d = 1 is supported");
  const int n = static_cast<int>(model.region.size());
  if (n > 3) throw std::invalid_argument("oracle: at most 3 region vertices");
  if (!model.potential.smooth()) throw std::invalid_argument("oracle: smooth potentials only");
  const int m = options.m;
  if (m < 2 || m > 256) throw std::invalid_argument("oracle: m must lie in [2, 256]");
  std::size_t N = 1;
  for (int i = 0; i < n; ++i) N *= std::size_t(m);
  if (N > options.max_states)
    throw std::length_error("oracle: " + std::to_string(N) + " grid states exceed the limit " +
                            std::to_string(options.max_states));

  const int L = model.slices;
  const double dt = model.beta / L;
  const auto& g = *model.graph;
  const PathConfiguration bnd = resolve_boundary(model);
  std::vector<std::vector<std::pair<int, double>>> inner(n);
  std::vector<std::vector<std::pair<const LoopPath*, double>>> outer(n);
  bool constant_boundary = true;
  for (int i = 0; i < n; ++i)
    for (const auto& [w, j] : model.profile.partners(g, model.region[i])) {
      auto it = std::lower_bound(model.region.begin(), model.region.end(), w);
      if (it != model.region.end() && *it == w) {
        // both orientations are visited, so each ordered pair carries J
        inner[i].emplace_back(static_cast<int>(it - model.region.begin()), j);
      } else if (bnd.contains(w)) {
        const bool internal = std::find(model.internal_boundary.begin(), model.internal_boundary.end(), w) !=
                              model.internal_boundary.end();
        const LoopPath& p = bnd.at(w);
        outer[i].emplace_back(&p, internal ? 2.0 * j : j);
        for (int k = 1; k <= L; ++k)
          if (p.at(k, 0) != p.at(0, 0)) constant_boundary = false;
      }
    }

  // Kinetic factor: product over sites of p^dt((a - b)/m) / m.
  const HeatKernelParams hk = HeatKernelParams::for_beta(dt);
  Eigen::MatrixXd k1(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) k1(a, b) = heat_kernel_1d(double(a - b) / m, hk) / m;
  const auto Ni = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd K(Ni, Ni);
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t t = 0; t < N; ++t) {
      double v = 1.0;
      std::size_t rs = s, rt = t;
      for (int i = 0; i < n; ++i) {
        v *= k1(static_cast<Eigen::Index>(rs % m), static_cast<Eigen::Index>(rt % m));
        rs /= m;
        rt /= m;
      }
      K(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
    }

  // Symmetric splitting: A_k = diag(e^{-dt U_k / 2}) K diag(e^{-dt U_{k+1} / 2}).
  auto half = [&](int k) -> Eigen::VectorXd {
    return (-0.5 * dt * slice_potential(model, inner, outer, m, k)).array().exp().matrix();
  };
  Eigen::MatrixXd P;
  if (constant_boundary) {
    const Eigen::VectorXd h = half(0);
    Eigen::MatrixXd A = h.asDiagonal() * K * h.asDiagonal();
    // A^L by binary powering.
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(Ni, Ni);
    bool first = true;
    int e = L;
    while (e > 0) {
      if (e & 1) {
        result = first ? A : Eigen::MatrixXd(result * A);
        first = false;
      }
      e >>= 1;
      if (e) A = A * A;
    }
    P = std::move(result);
  } else {
    P = Eigen::MatrixXd::Identity(Ni, Ni);
    Eigen::VectorXd h0 = half(0);
    for (int k = 0; k < L; ++k) {
      const Eigen::VectorXd h1 = half(k + 1);
      P = P * (h0.asDiagonal() * K * h1.asDiagonal());
      h0 = h1;
    }
  }

  OracleResult r;
  r.m = m;
  r.slices = L;
  r.xi = P.trace();
  r.marginal.assign(std::size_t(n), std::vector<double>(std::size_t(m), 0.0));
  for (std::size_t s = 0; s < N; ++s) {
    std::size_t rs = s;
    for (int i = 0; i < n; ++i) {
      r.marginal[i][rs % m] += P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) * m / r.xi;
      rs /= m;
    }
  }

  if (!options.kernel_sites.empty()) {
    std::vector<int> which;
    for (VertexId v : options.kernel_sites) {
      auto it = std::lower_bound(model.region.begin(), model.region.end(), v);
      if (it == model.region.end() || *it != v) throw std::invalid_argument("oracle: kernel site outside region");
      which.push_back(static_cast<int>(it - model.region.begin()));
    }
    std::vector<bool> open(std::size_t(n), false);
    for (int i : which) open[i] = true;
    std::size_t M = 1;
    for (std::size_t k = 0; k < which.size(); ++k) M *= std::size_t(m);
    r.kernel = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    const double scale = std::pow(double(m), double(which.size())) / r.xi;
    std::vector<std::size_t> ds(static_cast<std::size_t>(n)), dt2(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t t = 0; t < N; ++t) {
        std::size_t rs = s, rt = t, ka = 0, kb = 0, mult = 1;
        bool traced_equal = true;
        for (int i = 0; i < n; ++i) {
          ds[i] = rs % m;
          dt2[i] = rt % m;
          rs /= m;
          rt /= m;
          if (!open[i] && ds[i] != dt2[i]) traced_equal = false;
        }
        if (!traced_equal) continue;
        for (int i : which) {
          ka += ds[i] * mult;
          kb += dt2[i] * mult;
          mult *= std::size_t(m);
        }
        r.kernel(static_cast<Eigen::Index>(ka), static_cast<Eigen::Index>(kb)) +=
            P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) * scale;
      }
  }
  return r;
}

double periodic_integral(const std::vector<double>& samples, double lo, double hi) {
  const int m = static_cast<int>(samples.size());
  if (m < 1) throw std::invalid_argument("periodic_integral: no samples");
  double total = 0.0;
  // Real DFT coefficients; the Nyquist mode (even m) is split symmetrically.
  for (int q = 0; q <= m / 2; ++q) {
    double c = 0.0, s = 0.0;
    for (int a = 0; a < m; ++a) {
      const double ph = 2.0 * std::numbers::pi * q * a / m;
      c += samples[a] * std::cos(ph);
      s += samples[a] * std::sin(ph);
    }
    c /= m;
    s /= m;
    if (q == 0) {
      total += c * (hi - lo);
      continue;
    }
    const double w = (2 * q == m) ? 1.0 : 2.0;
    const double k = 2.0 * std::numbers::pi * q;
    // integral of c cos(kx) + s sin(kx)
    total += w * (c * (std::sin(k * hi) - std::sin(k * lo)) / k - s * (std::cos(k * hi) - std::cos(k * lo)) / k);
  }
  return total;
}

std::vector<double> bin_probabilities(const std::vector<double>& density, int bins) {
  std::vector<double> p(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) p[b] = periodic_integral(density, double(b) / bins, double(b + 1) / bins);
  return p;
}

}  // namespace qrotor
