#include "crownflow/bochner.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "crownflow/flatgeom.hpp"

namespace crownflow::bochner {

Grid Grid::disk(double R, int N) {
  if (N < 64) throw ConfigError("Grid: resolution must be at least 64");
  Grid g;
  g.geometry = Geometry::Disk;
  g.R = R;
  g.N = N;
  return g;
}

Grid Grid::annulus(double r0, int N, int M) {
  if (N < 64) throw ConfigError("Grid: resolution must be at least 64");
  if (!(r0 > 0 && r0 < 1)) throw ConfigError("Grid: annulus needs 0 < r0 < 1");
  Grid g;
  g.geometry = Geometry::Annulus;
  g.r0 = r0;
  g.N = N;
  g.M = M;
  return g;
}

double Grid::hx() const {
  return geometry == Geometry::Disk ? 2 * R / (N - 1)
                                    : -2 * std::log(r0) / (N - 1);
}

double Grid::hy() const {
  return geometry == Geometry::Disk ? 2 * R / (N - 1) : 2 * kPi / ny();
}

cxd Grid::z_of(int i, int j) const {
  cxd c = chart(i, j);
  return geometry == Geometry::Disk ? c : std::exp(c);
}

namespace {

// chart component of q at a chart point: q itself on the disk,
// q(e^zeta) e^{2 zeta} in log-polar coordinates
cxd q_chart(const AnyQD& q, const Grid& g, cxd zeta) {
  if (g.geometry == Grid::Geometry::Disk) return q(zeta);
  cxd z = std::exp(zeta);
  return q(z) * z * z;
}

// chart positions of the zeros of q (all log branches inside the strip)
std::vector<cxd> chart_zeros(const AnyQD& q, const Grid& g) {
  std::vector<cxd> zs = flatgeom::zeros(q);
  if (g.geometry == Grid::Geometry::Disk) return zs;
  std::vector<cxd> out;
  for (cxd z : zs) {
    if (std::abs(z) <= 0) continue;  // a zero at the origin is outside the annulus
    double s = std::log(std::abs(z));
    if (s < std::log(g.r0) - 1 || s > -std::log(g.r0) + 1) continue;
    out.push_back(cxd(s, wrap_angle(std::arg(z))));
  }
  return out;
}

double chart_distance(const Grid& g, cxd a, cxd b) {
  double dx = a.real() - b.real();
  double dy = a.imag() - b.imag();
  if (g.periodic_y()) dy = std::remainder(dy, 2 * kPi);
  return std::hypot(dx, dy);
}

struct Workspace {
  const Grid& g;
  std::vector<double> lnq;     // (1/2) ln|q_chart| at nodes
  std::vector<double> q2;      // |q_chart|^2 at nodes
  std::vector<uint8_t> nearz;  // within 2.5h of a chart zero
  std::vector<double> tau;     // well-balanced correction at interior nodes

  explicit Workspace(const AnyQD& q, const Grid& grid) : g(grid) {
    const int nx = g.nx(), ny = g.ny();
    lnq.resize(g.count());
    q2.resize(g.count());
    nearz.assign(g.count(), 0);
    std::vector<cxd> zc = chart_zeros(q, g);
    double h = std::max(g.hx(), g.hy());
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        cxd zeta = g.chart(i, j);
        cxd value = q_chart(q, g, zeta);
        double aq = std::abs(value);
        q2[g.idx(i, j)] = aq * aq;
        lnq[g.idx(i, j)] = aq > 0 ? 0.5 * std::log(aq)
                                  : -std::numeric_limits<double>::infinity();
        for (cxd z0 : zc)
          if (chart_distance(g, zeta, z0) < 2.5 * h) {
            nearz[g.idx(i, j)] = 1;
            break;
          }
      }

    // discrete defect of the harmonic singular part, applied away from zeros
    tau.assign(g.count(), 0.0);
    double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        if (!g.periodic_y() && (j == 0 || j + 1 == ny)) continue;
        int jm = j == 0 ? ny - 1 : j - 1;
        int jp = j + 1 == ny ? 0 : j + 1;
        if (nearz[g.idx(i, j)] || nearz[g.idx(i - 1, j)] || nearz[g.idx(i + 1, j)] ||
            nearz[g.idx(i, jm)] || nearz[g.idx(i, jp)])
          continue;
        tau[g.idx(i, j)] =
            ax * (lnq[g.idx(i - 1, j)] + lnq[g.idx(i + 1, j)]) +
            ay * (lnq[g.idx(i, jm)] + lnq[g.idx(i, jp)]) -
            2 * (ax + ay) * lnq[g.idx(i, j)];
      }
  }

  bool boundary(int i, int j) const {
    if (i == 0 || i + 1 == g.nx()) return true;
    if (!g.periodic_y() && (j == 0 || j + 1 == g.ny())) return true;
    return false;
  }
};

}  // namespace

ScalarField solve_bochner(const AnyQD& q, const Grid& grid, double tol,
                          SolveReport* report) {
  if (!(tol >= 1e-12)) throw ConfigError("solve_bochner: tolerance must be >= 1e-12");
  const int nx = grid.nx(), ny = grid.ny();
  Workspace ws(q, grid);

  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (ws.boundary(i, j) && !(ws.q2[grid.idx(i, j)] > 1e-24))
        throw ConfigError("solve_bochner: zero of q on the grid boundary");

  // unknown numbering over interior nodes
  std::vector<int> unknown(grid.count(), -1);
  int n_unknown = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (!ws.boundary(i, j)) unknown[grid.idx(i, j)] = n_unknown++;

  std::vector<double> w(grid.count());
  // supersolution start
  for (size_t k = 0; k < grid.count(); ++k)
    w[k] = 0.5 * std::log(std::sqrt(ws.q2[k]) + 1.0);

  auto F = [&](size_t k, double wk) {
    return std::exp(2 * wk) - ws.q2[k] * std::exp(-2 * wk);
  };
  auto dF = [&](size_t k, double wk) {
    return 2 * std::exp(2 * wk) + 2 * ws.q2[k] * std::exp(-2 * wk);
  };

  const double ax = 1.0 / (grid.hx() * grid.hx());
  const double ay = 1.0 / (grid.hy() * grid.hy());
  auto neighbors = [&](int i, int j, size_t out[4], double coeff[4]) {
    out[0] = grid.idx(i - 1, j);
    out[1] = grid.idx(i + 1, j);
    coeff[0] = coeff[1] = ax;
    int jm = j == 0 ? ny - 1 : j - 1;
    int jp = j + 1 == ny ? 0 : j + 1;
    out[2] = grid.idx(i, jm);
    out[3] = grid.idx(i, jp);
    coeff[2] = coeff[3] = ay;
  };

  auto residual_at = [&](int i, int j) {
    size_t k = grid.idx(i, j);
    size_t nb[4];
    double cf[4];
    neighbors(i, j, nb, cf);
    double lap = -2 * (ax + ay) * w[k];
    for (int t = 0; t < 4; ++t) lap += cf[t] * w[nb[t]];
    return lap - F(k, w[k]) - ws.tau[k];
  };

  // lift the start to a discrete supersolution: G(w0 + c) <= 0 everywhere
  double m0 = 1.0;
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (ws.boundary(i, j)) continue;
      size_t k = grid.idx(i, j);
      size_t nb[4];
      double cf[4];
      neighbors(i, j, nb, cf);
      double lap = -2 * (ax + ay) * w[k];
      for (int t = 0; t < 4; ++t) lap += cf[t] * w[nb[t]];
      m0 = std::max(m0, lap - ws.tau[k]);
    }
  double lift = 0.5 * std::log(m0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (!ws.boundary(i, j)) w[grid.idx(i, j)] += lift;

  // impose Dirichlet data
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (ws.boundary(i, j)) w[grid.idx(i, j)] = ws.lnq[grid.idx(i, j)];

  auto max_residual = [&]() {
    double r = 0;
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 0; j < ny; ++j)
        if (!ws.boundary(i, j)) r = std::max(r, std::abs(residual_at(i, j)));
    return r;
  };

  Eigen::SparseMatrix<double> A(n_unknown, n_unknown);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  Eigen::VectorXd rhs(n_unknown), delta(n_unknown);
  std::vector<Eigen::Triplet<double>> trips;

  SolveReport rep;
  rep.supersolution_lift = lift;
  double res = max_residual();
  bool converged = res < tol;

  for (int iter = 0; iter < 50 && !converged; ++iter) {
    trips.clear();
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        if (ws.boundary(i, j)) continue;
        size_t k = grid.idx(i, j);
        int row = unknown[k];
        size_t nb[4];
        double cf[4];
        neighbors(i, j, nb, cf);
        // assemble -J (positive definite): 2(ax+ay) + F' on the diagonal
        trips.emplace_back(row, row, 2 * (ax + ay) + dF(k, w[k]));
        double b = residual_at(i, j);
        for (int t = 0; t < 4; ++t) {
          int col = unknown[nb[t]];
          if (col >= 0)
            trips.emplace_back(row, col, -cf[t]);
        }
        rhs[row] = b;
      }
    A.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      solver.analyzePattern(A);
      analyzed = true;
    }
    solver.factorize(A);
    if (solver.info() != Eigen::Success)
      throw NumericalError("solve_bochner: linear solve failed");
    delta = solver.solve(rhs);  // delta = (-J)^{-1} G, step is -J^{-1} G = +delta...

    // Newton step: w += J^{-1}(-G) = (-J)^{-1} G = delta
    double scale = 1.0;
    double base = res;
    for (int halve = 0; halve < 30; ++halve) {
      for (size_t k = 0; k < grid.count(); ++k)
        if (unknown[k] >= 0) w[k] += scale * delta[unknown[k]];
      double rnew = max_residual();
      if (rnew < base || rnew < tol) {
        res = rnew;
        double up = 0;
        for (int t = 0; t < n_unknown; ++t) up = std::max(up, scale * delta[t]);
        if (up > 1e-10) rep.monotone = false;
        break;
      }
      for (size_t k = 0; k < grid.count(); ++k)
        if (unknown[k] >= 0) w[k] -= scale * delta[unknown[k]];
      scale *= 0.5;
      if (halve == 29)
        throw NumericalError("solve_bochner: Newton damping failed, residual " +
                             std::to_string(base));
    }
    rep.newton_iterations = iter + 1;
    converged = res < tol;
  }
  rep.residual = res;
  if (!converged)
    throw NumericalError("solve_bochner: no convergence within 50 iterations, "
                         "residual " + std::to_string(res));
  if (report) *report = rep;

  ScalarField out{grid, q, std::move(w), {}};
  return out;
}

namespace {

std::vector<uint8_t> zero_mask(const ScalarField& w) {
  const Grid& g = w.grid;
  std::vector<cxd> zc = chart_zeros(w.q, g);
  std::vector<uint8_t> mask(g.count(), 0);
  double h = std::max(g.hx(), g.hy());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (cxd z0 : zc)
        if (chart_distance(g, g.chart(i, j), z0) < 2 * h) {
          mask[g.idx(i, j)] = 1;
          break;
        }
  return mask;
}

}  // namespace

ScalarField w1_field(const ScalarField& w) {
  const Grid& g = w.grid;
  ScalarField out{g, w.q, std::vector<double>(g.count(), 0.0), zero_mask(w)};
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      size_t k = g.idx(i, j);
      if (out.mask[k]) continue;
      cxd value = q_chart(w.q, g, g.chart(i, j));
      out.values[k] = w.values[k] - 0.5 * std::log(std::abs(value));
    }
  return out;
}

ScalarField energy_density(const ScalarField& w) {
  ScalarField w1 = w1_field(w);
  ScalarField out{w.grid, w.q, std::vector<double>(w.grid.count(), 0.0), w1.mask};
  for (size_t k = 0; k < w.grid.count(); ++k)
    if (!out.mask[k]) out.values[k] = 2 * std::cosh(2 * w1.values[k]);
  return out;
}

namespace {

DecayFit shell_fit(const ScalarField& field, const std::vector<double>& magnitude,
                   const std::vector<uint8_t>& usable) {
  const Grid& g = field.grid;
  DecayFit fit;
  std::vector<cxd> zs = flatgeom::zeros(field.q);
  double peak = 0;
  for (size_t k = 0; k < magnitude.size(); ++k)
    if (usable[k]) peak = std::max(peak, std::abs(magnitude[k]));
  if (zs.empty() || peak < 1e-12) {
    fit.degenerate = true;
    return fit;
  }

  // shell suprema over q-distance bands of width 1
  std::vector<double> sup;
  std::vector<int> count;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      size_t k = g.idx(i, j);
      if (!usable[k]) continue;
      double r = flatgeom::q_distance_to_zeros(field.q, zs, g.z_of(i, j));
      int shell = int(std::floor(r));
      if (shell < 0) continue;
      if (shell >= int(sup.size())) {
        sup.resize(size_t(shell + 1), 0.0);
        count.resize(size_t(shell + 1), 0);
      }
      sup[size_t(shell)] = std::max(sup[size_t(shell)], magnitude[k]);
      count[size_t(shell)] += 1;
    }

  std::vector<double> xs, ys;
  for (size_t s = 0; s < sup.size(); ++s)
    if (count[s] >= 5 && sup[s] > 1e-13) {
      xs.push_back(double(s) + 0.5);
      ys.push_back(std::log(sup[s]));
    }
  fit.shells = int(xs.size());
  if (fit.shells < 3)
    throw NumericalError("decay_fit: insufficient dynamic range, grid too small");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double n = double(xs.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  fit.alpha_fit = -slope;
  fit.c_fit = std::exp(intercept);
  return fit;
}

}  // namespace

DecayFit decay_fit(const ScalarField& w1) {
  std::vector<uint8_t> usable(w1.grid.count(), 0);
  for (size_t k = 0; k < w1.grid.count(); ++k)
    usable[k] = w1.mask.empty() || w1.mask[k] == 0;
  std::vector<double> mag(w1.values.begin(), w1.values.end());
  double violation = 0;
  for (size_t k = 0; k < mag.size(); ++k) {
    if (!usable[k]) continue;
    violation = std::min(violation, mag[k]);
    mag[k] = std::max(mag[k], 0.0);
  }
  DecayFit fit = shell_fit(w1, mag, usable);
  fit.max_violation = violation;
  return fit;
}

DecayFit gradient_decay_fit(const ScalarField& w1) {
  const Grid& g = w1.grid;
  std::vector<double> mag(g.count(), 0.0);
  std::vector<uint8_t> usable(g.count(), 0);
  for (int i = 1; i + 1 < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      if (!g.periodic_y() && (j == 0 || j + 1 == g.ny())) continue;
      int jm = j == 0 ? g.ny() - 1 : j - 1;
      int jp = j + 1 == g.ny() ? 0 : j + 1;
      size_t k = g.idx(i, j);
      size_t ks[5] = {k, g.idx(i - 1, j), g.idx(i + 1, j), g.idx(i, jm),
                      g.idx(i, jp)};
      bool ok = true;
      for (size_t kk : ks)
        if (!w1.mask.empty() && w1.mask[kk]) ok = false;
      if (!ok) continue;
      double gx = (w1.values[ks[2]] - w1.values[ks[1]]) / (2 * g.hx());
      double gy = (w1.values[ks[4]] - w1.values[ks[3]]) / (2 * g.hy());
      cxd value = q_chart(w1.q, g, g.chart(i, j));
      mag[k] = std::hypot(gx, gy) / std::sqrt(std::abs(value));
      usable[k] = 1;
    }
  return shell_fit(w1, mag, usable);
}

namespace {

double bilinear_w1(const ScalarField& w, cxd zeta) {
  const Grid& g = w.grid;
  double fx = (zeta.real() - g.x0()) / g.hx();
  double fy = (zeta.imag() - g.y0()) / g.hy();
  int i = int(std::floor(fx));
  int j = int(std::floor(fy));
  if (i < 0 || i + 1 >= g.nx())
    throw NumericalError("interpolate: point outside the solved grid");
  int ny = g.ny();
  int j1;
  if (g.periodic_y()) {
    j = ((j % ny) + ny) % ny;
    j1 = (j + 1) % ny;
  } else {
    if (j < 0 || j + 1 >= ny)
      throw NumericalError("interpolate: point outside the solved grid");
    j1 = j + 1;
  }
  double tx = fx - std::floor(fx);
  double ty = fy - std::floor(fy);
  auto node_w1 = [&](int ii, int jj) {
    cxd value = q_chart(w.q, g, g.chart(ii, jj));
    double aq = std::abs(value);
    if (!(aq > 0)) throw NumericalError("interpolate: node on a zero of q");
    return w.values[g.idx(ii, jj)] - 0.5 * std::log(aq);
  };
  return (1 - tx) * (1 - ty) * node_w1(i, j) + tx * (1 - ty) * node_w1(i + 1, j) +
         (1 - tx) * ty * node_w1(i, j1) + tx * ty * node_w1(i + 1, j1);
}

}  // namespace

double interpolate_w1(const ScalarField& w, cxd z) {
  cxd zeta = w.grid.geometry == Grid::Geometry::Disk
                 ? z
                 : cxd(std::log(std::abs(z)), wrap_angle(std::arg(z)));
  return bilinear_w1(w, zeta);
}

double interpolate_e(const ScalarField& w, cxd z) {
  return 2 * std::cosh(2 * interpolate_w1(w, z));
}

}  // namespace crownflow::bochner
