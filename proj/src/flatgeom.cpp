#include "crownflow/flatgeom.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace crownflow::flatgeom {

namespace {

constexpr double kZeroGuard = 1e-24;           // |q| below this counts as a hit
constexpr double kBranchRate = 0.003;          // max relative sqrt change per step

cxd matched_sqrt(cxd value, std::optional<cxd> prev) {
  cxd s = std::sqrt(value);
  if (prev && std::abs(s - *prev) > std::abs(s + *prev)) s = -s;
  return s;
}

// dz/dt at unit q-speed; u = +-1 (horizontal) or +-i (vertical)
cxd velocity(const AnyQD& q, cxd z, cxd u, std::optional<cxd>& branch) {
  cxd value = q(z);
  if (std::abs(value) < kZeroGuard)
    throw NumericalError("trajectory hit a singularity near z = (" +
                         std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ")");
  cxd s = matched_sqrt(value, branch);
  branch = s;
  return u * std::conj(s) / std::abs(value);
}

struct TraceResult {
  TrajectorySegment seg;
  cxd final_branch;
};

TraceResult trace_impl(const AnyQD& q, cxd z0, Kind kind, cxd u, double length,
                       double step, std::optional<cxd> s_hint) {
  if (!(length > 0)) throw ConfigError("trace_trajectory: length must be positive");
  if (!(step > 0)) throw ConfigError("trace_trajectory: step must be positive");

  TrajectorySegment seg;
  seg.kind = kind;
  std::optional<cxd> branch = s_hint;
  // pin the branch at the start point
  cxd s0 = matched_sqrt(q(z0), branch);
  branch = s0;

  seg.points.push_back(z0);
  seg.arclength.push_back(0);
  seg.sqrt_q.push_back(s0);

  const double step_cap = std::min(step, length / 4);
  const double tail_tol = 1e-12 * std::max(1.0, length);
  cxd z = z0;
  double done = 0;
  const auto* lq = q.laurent();
  while (done < length - tail_tol) {
    double aq = std::abs(q(z));
    double mu = std::abs(q.derivative(z)) / (2 * std::pow(aq, 1.5));
    double h = std::min(step_cap, kBranchRate / std::max(mu, 1e-300));
    h = std::min(h, length - done);
    if (h < 1e-13 * std::max(1.0, length))
      throw NumericalError("trajectory step underflow near a singularity");

    std::optional<cxd> stage = *branch;
    cxd k1 = velocity(q, z, u, stage);
    stage = *branch;
    cxd k2 = velocity(q, z + 0.5 * h * k1, u, stage);
    stage = *branch;
    cxd k3 = velocity(q, z + 0.5 * h * k2, u, stage);
    stage = *branch;
    cxd k4 = velocity(q, z + h * k3, u, stage);
    cxd znew = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (lq && lq->domain == qdiff::Domain::PuncturedDisk &&
        std::abs(znew) > 1.0 + 1e-9)
      throw NumericalError("trajectory left the punctured disk");

    cxd snew = matched_sqrt(q(znew), branch);
    branch = snew;
    z = znew;
    done += h;
    seg.points.push_back(z);
    seg.arclength.push_back(done);
    seg.sqrt_q.push_back(snew);
  }
  seg.q_length = done;
  return {std::move(seg), *branch};
}

// Gauss-Legendre 4-point rule on [0,1]
constexpr double kGx[4] = {0.0694318442029737, 0.3300094782075719,
                           0.6699905217924281, 0.9305681557970263};
constexpr double kGw[4] = {0.1739274225687269, 0.3260725774312731,
                           0.3260725774312731, 0.1739274225687269};

// integral of sqrt(q) dz along the chord z0 -> z1 with continued branch
cxd sqrt_chord_integral(const AnyQD& q, cxd z0, cxd z1, std::optional<cxd>& branch) {
  cxd dz = z1 - z0;
  cxd acc = 0;
  for (int g = 0; g < 4; ++g) {
    cxd s = matched_sqrt(q(z0 + kGx[g] * dz), branch);
    branch = s;
    acc += kGw[g] * s;
  }
  return acc * dz;
}

cxd sqrt_polyline_integral(const AnyQD& q, std::span<const cxd> pts,
                           std::optional<cxd>& branch) {
  cxd acc = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    acc += sqrt_chord_integral(q, pts[i], pts[i + 1], branch);
  return acc;
}

std::vector<cxd> arc_samples(cxd a, cxd b, int min_samples) {
  // short circular arc about the origin from a to b (same modulus), walking
  // the smaller angular difference
  double r = std::abs(a);
  double t0 = std::arg(a);
  double dt = std::remainder(std::arg(b) - t0, 2 * kPi);
  int n = std::max(min_samples, int(std::ceil(std::abs(dt) / 0.002)));
  std::vector<cxd> out;
  out.reserve(size_t(n + 1));
  for (int i = 0; i <= n; ++i)
    out.push_back(std::polar(r, t0 + dt * double(i) / double(n)));
  return out;
}

}  // namespace

std::vector<double> PolygonalLoop::horizontal_lengths() const {
  std::vector<double> out;
  for (const auto& s : sides)
    if (s.kind == Kind::Horizontal) out.push_back(s.q_length);
  return out;
}

std::vector<cxd> PolygonalLoop::polyline() const {
  std::vector<cxd> out;
  for (const auto& s : sides)
    out.insert(out.end(), s.points.begin(), s.points.end());
  return out;
}

std::vector<cxd> zeros(const AnyQD& q) { return qdiff::numerator_roots(q); }

TrajectorySegment trace_trajectory(const AnyQD& q, cxd z0, Kind kind,
                                   double length, double step, int direction) {
  cxd u = kind == Kind::Horizontal ? cxd(1, 0) : cxd(0, 1);
  u *= double(direction >= 0 ? 1 : -1);
  return trace_impl(q, z0, kind, u, length, step, std::nullopt).seg;
}

std::vector<double> horizontal_rays_at_pole(const AnyQD& q) {
  std::vector<double> out;
  if (auto* l = q.laurent()) {
    int m = l->pole_order - 2;
    double base = std::arg(l->a(l->pole_order));
    for (int j = 0; j < m; ++j)
      out.push_back(wrap_angle((base + 2 * kPi * j) / double(m)));
  } else {
    const auto& p = *q.polynomial();
    int m = p.degree() + 2;
    double base = -std::arg(p.coeffs.back());
    for (int j = 0; j < m; ++j)
      out.push_back(wrap_angle((base + 2 * kPi * j) / double(m)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

PathLengths q_lengths(std::span<const cxd> path, const AnyQD& q) {
  if (path.size() < 2) throw ConfigError("q_lengths: need at least two points");
  PathLengths out;
  std::optional<cxd> branch;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    cxd dz = path[i + 1] - path[i];
    for (int g = 0; g < 4; ++g) {
      cxd z = path[i] + kGx[g] * dz;
      cxd value = q(z);
      if (std::abs(value) < kZeroGuard) out.touched_zero = true;
      cxd s = matched_sqrt(value, branch);
      branch = s;
      cxd form = s * dz;
      out.total += kGw[g] * std::abs(form);
      out.horizontal += kGw[g] * std::abs(form.real());
      out.vertical += kGw[g] * std::abs(form.imag());
    }
  }
  return out;
}

double q_distance_to_zeros(const AnyQD& q, std::span<const cxd> zero_set, cxd z) {
  double best = std::numeric_limits<double>::infinity();
  for (cxd z0 : zero_set) {
    cxd dz = z - z0;
    // substitute t = u^2 to tame the sqrt vanishing at the zero endpoint
    double acc = 0;
    const int panels = 12;
    for (int p = 0; p < panels; ++p) {
      for (int g = 0; g < 4; ++g) {
        double u = (p + kGx[g]) / panels;
        acc += kGw[g] / panels * 2 * u * std::abs(std::sqrt(q(z0 + u * u * dz)));
      }
    }
    best = std::min(best, acc * std::abs(dz));
  }
  return best;
}

double q_distance_to_zeros(const AnyQD& q, cxd z) {
  return q_distance_to_zeros(q, zeros(q), z);
}

double kind_residual(const TrajectorySegment& seg, const AnyQD& q) {
  double worst = 0;
  for (size_t i = 0; i + 1 < seg.points.size(); ++i) {
    cxd mid = 0.5 * (seg.points[i] + seg.points[i + 1]);
    std::optional<cxd> branch = seg.sqrt_q[i];
    cxd s = matched_sqrt(q(mid), branch);
    cxd form = s * (seg.points[i + 1] - seg.points[i]);
    double defect =
        seg.kind == Kind::Horizontal ? std::abs(form.imag()) : std::abs(form.real());
    double h = seg.arclength[i + 1] - seg.arclength[i];
    worst = std::max(worst, defect / std::max(h, 1e-300));
  }
  return worst;
}

int winding_number(std::span<const cxd> polyline, cxd z) {
  double total = 0;
  for (size_t i = 0; i + 1 < polyline.size(); ++i)
    total += std::arg((polyline[i + 1] - z) / (polyline[i] - z));
  total += std::arg((polyline.front() - z) / (polyline.back() - z));
  return int(std::lround(total / (2 * kPi)));
}

namespace {

double auto_anchor_radius(const AnyQD& q, const std::vector<cxd>& zs) {
  if (q.pole_at_origin()) {
    double rmin = std::numeric_limits<double>::infinity();
    for (cxd z : zs) rmin = std::min(rmin, std::abs(z));
    return std::isfinite(rmin) ? 0.5 * rmin : 0.5;
  }
  double rmax = 0;
  for (cxd z : zs) rmax = std::max(rmax, std::abs(z));
  return 2.0 * (1.0 + rmax);
}

}  // namespace

Exhaustion build_exhaustion(const AnyQD& q, int levels,
                            std::span<const double> level_schedule,
                            const ExhaustionOptions& opts) {
  if (q.pole_at_origin() && q.pole_order() < 4)
    throw ConfigError("build_exhaustion: need a pole of order >= 4");
  if (levels != int(level_schedule.size()))
    throw ConfigError("build_exhaustion: schedule size must match level count");
  for (int i = 0; i + 1 < levels; ++i)
    if (!(level_schedule[size_t(i)] < level_schedule[size_t(i + 1)]))
      throw ConfigError("build_exhaustion: level schedule must increase");

  const bool at_origin = q.pole_at_origin();
  std::vector<double> rays = horizontal_rays_at_pole(q);
  // rotate so the first ray is the one nearest angle 0
  int k0 = 0;
  for (int k = 1; k < int(rays.size()); ++k) {
    double dk = std::abs(std::remainder(rays[size_t(k)], 2 * kPi));
    double d0 = std::abs(std::remainder(rays[size_t(k0)], 2 * kPi));
    if (dk < d0) k0 = k;
  }
  std::rotate(rays.begin(), rays.begin() + k0, rays.end());
  const int m = int(rays.size());

  std::vector<cxd> zs = zeros(q);
  double r_anchor = opts.anchor_radius > 0 ? opts.anchor_radius
                                           : auto_anchor_radius(q, zs);

  Exhaustion out;
  for (int lev = 0; lev < levels; ++lev) {
    const double L = level_schedule[size_t(lev)];
    if (!(L > 0)) throw ConfigError("build_exhaustion: levels must be positive");
    const double depth = opts.depth_factor * L;

    std::vector<TrajectorySegment> radial(static_cast<size_t>(m));  // anchor -> p_k
    for (int k = 0; k < m; ++k) {
      cxd a = std::polar(r_anchor, rays[size_t(k)]);
      // pick the horizontal direction that moves toward the pole
      std::optional<cxd> br;
      cxd v = velocity(q, a, cxd(1, 0), br);
      double radial_rate = (std::conj(a) * v).real();
      int dir = (radial_rate < 0) == at_origin ? +1 : -1;
      radial[size_t(k)] = trace_impl(q, a, Kind::Horizontal, cxd(double(dir), 0),
                                     depth, opts.step, std::nullopt)
                              .seg;
    }

    // one consistent branch of W = int sqrt(q) along the scaffold:
    // p_0 -> A_0 -> A_1 -> p_1 -> ... accumulating W at each p_k, plus the
    // vertical legs p_k -> E_k.
    std::vector<cxd> w_p(static_cast<size_t>(m + 1));
    std::vector<cxd> w_e(static_cast<size_t>(m));
    std::vector<cxd> e_pts(static_cast<size_t>(m));
    std::vector<cxd> e_branch(static_cast<size_t>(m));

    std::optional<cxd> branch;  // continued along the whole scaffold walk
    cxd w = 0;
    w_p[0] = 0;
    // seed branch at p_0
    branch = matched_sqrt(q(radial[0].end()), std::nullopt);
    const cxd branch_at_p0 = *branch;

    for (int k = 0; k < m; ++k) {
      // vertical leg p_k -> E_k, counterclockwise into sector k
      cxd pk = radial[size_t(k)].end();
      std::optional<cxd> probe = branch;
      cxd vplus = velocity(q, pk, cxd(0, 1), probe);
      double ccw = (std::conj(pk) * vplus).imag();
      cxd u = ccw > 0 ? cxd(0, 1) : cxd(0, -1);
      auto res = trace_impl(q, pk, Kind::Vertical, u, L, opts.step, branch);
      e_pts[size_t(k)] = res.seg.end();
      std::optional<cxd> leg_branch = branch;
      cxd dw = sqrt_polyline_integral(q, res.seg.points, leg_branch);
      w_e[size_t(k)] = w + dw;
      e_branch[size_t(k)] = res.final_branch;

      // walk p_k -> A_k (reverse radial), arc A_k -> A_{k+1}, A_{k+1} -> p_{k+1}
      std::vector<cxd> back(radial[size_t(k)].points.rbegin(),
                            radial[size_t(k)].points.rend());
      w += sqrt_polyline_integral(q, back, branch);
      cxd a_next = std::polar(r_anchor, rays[size_t((k + 1) % m)]);
      std::vector<cxd> arc = arc_samples(back.back(), a_next, 64);
      w += sqrt_polyline_integral(q, arc, branch);
      const auto& fwd = radial[size_t((k + 1) % m)].points;
      w += sqrt_polyline_integral(q, fwd, branch);
      w_p[size_t(k + 1)] = w;
    }

    // branch monodromy after one full scaffold loop (-1 for odd pole order)
    double flip =
        std::abs(*branch - branch_at_p0) > std::abs(*branch + branch_at_p0) ? -1.0
                                                                            : 1.0;
    // W at E_0 in the chart continued once around the pole
    cxd w_e_wrap = w_p[size_t(m)] + flip * (w_e[0] - w_p[0]);

    // assemble the loop: E_0 -> (H side) -> F_1 -> (V connector) -> E_1 -> ...
    PolygonalLoop loop;
    loop.level_index = lev;
    loop.level = L;
    cxd cursor = e_pts[0];
    std::optional<cxd> loop_branch = e_branch[0];
    double gap = 0;
    for (int j = 0; j < m; ++j) {
      bool last = j == m - 1;
      cxd w_here = w_e[size_t(j)];
      cxd w_ray = w_p[size_t(j + 1)];
      cxd w_next = last ? w_e_wrap : w_e[size_t(j + 1)];

      // horizontal side across sector j; with the continued branch,
      // sqrt(q) dz/dt = u exactly, so u's sign follows the Re W target
      double lj = w_ray.real() - w_here.real();
      if (std::abs(lj) < 1e-9)
        throw NumericalError("build_exhaustion: degenerate horizontal side");
      cxd u = lj > 0 ? cxd(1, 0) : cxd(-1, 0);
      auto hres = trace_impl(q, cursor, Kind::Horizontal, u, std::abs(lj),
                             opts.step, loop_branch);
      loop.sides.push_back(hres.seg);
      cursor = hres.seg.end();
      loop_branch = hres.final_branch;

      // vertical connector across ray j+1 down/up to E_{j+1}
      if ((w_here.imag() - w_ray.imag()) * (w_next.imag() - w_ray.imag()) >= 0)
        throw NumericalError(
            "build_exhaustion: level too small, connector does not cross its ray");
      double len = std::abs(w_next.imag() - w_here.imag());
      cxd uv = w_next.imag() > w_here.imag() ? cxd(0, 1) : cxd(0, -1);
      auto vres =
          trace_impl(q, cursor, Kind::Vertical, uv, len, opts.step, loop_branch);
      loop.sides.push_back(vres.seg);
      cursor = vres.seg.end();
      loop_branch = vres.final_branch;
      cxd target = last ? e_pts[0] : e_pts[size_t(j + 1)];
      gap = std::max(gap, std::abs(cursor - target));
      cursor = target;
      loop_branch = last ? std::optional<cxd>(e_branch[0])
                         : std::optional<cxd>(e_branch[size_t(j + 1)]);
    }
    loop.closure_gap = gap;
    if (gap > 1e-4 * std::max(1.0, r_anchor))
      throw NumericalError("build_exhaustion: loop failed to close, gap = " +
                           std::to_string(gap));
    out.loops.push_back(std::move(loop));
  }
  return out;
}

double alternating_sum(const PolygonalLoop& loop) {
  std::vector<double> ls = loop.horizontal_lengths();
  if (ls.size() % 2 != 0)
    throw ConfigError("alternating_sum: odd number of horizontal sides");
  double acc = 0;
  double sign = 1;
  for (double l : ls) {
    acc += sign * l;
    sign = -sign;
  }
  return std::abs(acc);
}

}  // namespace crownflow::flatgeom
