#include "crownflow/hypgeom.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace crownflow::hypgeom {

double hyp_distance(cxd p, cxd q) {
  double np = 1.0 - std::norm(p);
  double nq = 1.0 - std::norm(q);
  if (np <= 0 || nq <= 0) throw ConfigError("hyp_distance: points must lie in the open disk");
  double x = 1.0 + 2.0 * std::norm(p - q) / (np * nq);
  return std::acosh(std::max(1.0, x));
}

Mobius Mobius::rotation(double theta) {
  return {std::polar(1.0, theta / 2), cxd(0, 0)};
}

Mobius Mobius::translation_to_origin(cxd p) {
  double s = std::sqrt(1.0 - std::norm(p));
  if (!(s > 0)) throw ConfigError("Mobius: center must lie in the open disk");
  return {cxd(1, 0) / s, -p / s};
}

Mobius Mobius::axis_translation(double length) {
  double t = std::tanh(length / 2);
  double s = std::sqrt(1.0 - t * t);
  return {cxd(1, 0) / s, cxd(t, 0) / s};
}

cxd Mobius::operator()(cxd z) const {
  return (a * z + b) / (std::conj(b) * z + std::conj(a));
}

Mobius Mobius::compose(const Mobius& inner) const {
  cxd na = a * inner.a + b * std::conj(inner.b);
  cxd nb = a * inner.b + b * std::conj(inner.a);
  double det = std::sqrt(std::abs(std::norm(na) - std::norm(nb)));
  return {na / det, nb / det};
}

Mobius random_mobius(Rng& rng, double max_center) {
  cxd w;
  do {
    w = rng.complex_in(max_center);
  } while (std::abs(w) > max_center);
  return Mobius::rotation(rng.uniform(0, 2 * kPi))
      .compose(Mobius::translation_to_origin(w));
}

namespace {

// Cayley map disk -> upper half-plane, e^{i phi} -> tan(phi/2), angle pi -> inf.
double boundary_to_real(double phi) { return std::tan(phi / 2); }

// Rotate angles so that none lands near the chart cut at pi.
std::vector<double> rotate_away_from_cut(std::span<const double> angles) {
  std::vector<double> sorted(angles.begin(), angles.end());
  for (double& a : sorted) a = wrap_angle(a);
  std::sort(sorted.begin(), sorted.end());
  double best_gap = 0, gap_mid = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    double next = i + 1 < sorted.size() ? sorted[i + 1] : sorted[0] + 2 * kPi;
    if (next - sorted[i] > best_gap) {
      best_gap = next - sorted[i];
      gap_mid = 0.5 * (next + sorted[i]);
    }
  }
  double delta = kPi - gap_mid;
  std::vector<double> out(angles.begin(), angles.end());
  for (double& a : out) a = wrap_angle(a + delta);
  return out;
}

double geodesic_tangency(double p, double a, double b) {
  // Euclidean diameter of the largest horocycle at p (on the real axis of the
  // half-plane) tangent to the geodesic over (a, b).
  double c = 0.5 * (a + b);
  double rho = 0.5 * std::abs(b - a);
  return std::abs((p - c) * (p - c) - rho * rho) / rho;
}

double horocycle_side_length(double p, double q, double tp, double tq) {
  return 2.0 * std::log(std::abs(p - q) / std::sqrt(tp * tq));
}

constexpr double kCalibrationMargin = 0.1;

// Shrink the reference horocycles uniformly until the zero-height truncation
// is strictly disjoint (adjacent maximal horoballs may touch, e.g. on the
// ideal triangle).  A uniform factor keeps every tested property: residues
// are truncation-independent and height shifts act the same way.
void calibrate_references(const std::vector<double>& p, std::vector<double>& t,
                          const std::vector<std::pair<int, int>>& sides) {
  double worst = std::numeric_limits<double>::infinity();
  for (auto [i, j] : sides)
    worst = std::min(worst, horocycle_side_length(p[size_t(i)], p[size_t(j)],
                                                  t[size_t(i)], t[size_t(j)]));
  if (worst < kCalibrationMargin) {
    double f = std::exp(0.5 * (worst - kCalibrationMargin));
    for (double& x : t) x *= f;
  }
}

}  // namespace

IdealPolygon::IdealPolygon(std::vector<double> vertex_angles)
    : angles(std::move(vertex_angles)) {
  if (m() < 3) throw ConfigError("IdealPolygon: need at least 3 vertices");
  for (double& a : angles) a = wrap_angle(a);
  // strict cyclic order: exactly one descent when walking the list
  int descents = 0;
  for (int i = 0; i < m(); ++i) {
    double cur = angles[size_t(i)];
    double nxt = angles[size_t((i + 1) % m())];
    if (cur == nxt) throw ConfigError("IdealPolygon: repeated vertex");
    if (nxt < cur) ++descents;
  }
  if (descents != 1) throw ConfigError("IdealPolygon: vertices must be in cyclic order");
}

std::vector<double> truncate_and_sides(const IdealPolygon& poly,
                                       std::span<const double> heights) {
  const int m = poly.m();
  if (int(heights.size()) != m)
    throw ConfigError("truncate_and_sides: need one height per cusp");
  std::vector<double> rotated = rotate_away_from_cut(poly.angles);
  std::vector<double> p(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) p[size_t(i)] = boundary_to_real(rotated[size_t(i)]);

  std::vector<double> t(static_cast<size_t>(m));
  std::vector<std::pair<int, int>> side_pairs;
  for (int i = 0; i < m; ++i) {
    double tref = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (j == i || (j + 1) % m == i) continue;  // sides adjacent to vertex i
      tref = std::min(tref, geodesic_tangency(p[size_t(i)], p[size_t(j)],
                                              p[size_t((j + 1) % m)]));
    }
    t[size_t(i)] = tref;
    side_pairs.push_back({i, (i + 1) % m});
  }
  calibrate_references(p, t, side_pairs);
  for (int i = 0; i < m; ++i) t[size_t(i)] *= std::exp(-heights[size_t(i)]);

  std::vector<double> sides(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    int j = (i + 1) % m;
    sides[size_t(i)] =
        horocycle_side_length(p[size_t(i)], p[size_t(j)], t[size_t(i)], t[size_t(j)]);
  }
  for (double l : sides)
    if (!(l > 0))
      throw ConfigError("truncate_and_sides: truncation neighborhoods overlap");
  return sides;
}

double metric_residue(const IdealPolygon& poly) {
  std::vector<double> zero(size_t(poly.m()), 0.0);
  return metric_residue(poly, zero);
}

double metric_residue(const IdealPolygon& poly, std::span<const double> heights) {
  if (poly.m() % 2 == 1) return 0.0;
  std::vector<double> sides = truncate_and_sides(poly, heights);
  double acc = 0;
  double sign = 1;
  for (double l : sides) {
    acc += sign * l;
    sign = -sign;
  }
  return std::abs(acc);
}

TruncationCuts truncation_cut_points(const IdealPolygon& poly,
                                     std::span<const double> heights) {
  const int m = poly.m();
  if (int(heights.size()) != m)
    throw ConfigError("truncation_cut_points: need one height per cusp");

  // same chart as truncate_and_sides (rotation delta recovered from angles)
  std::vector<double> rotated = rotate_away_from_cut(poly.angles);
  double delta = wrap_angle(rotated[0] - wrap_angle(poly.angles[0]));
  std::vector<double> p(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) p[size_t(i)] = boundary_to_real(rotated[size_t(i)]);

  std::vector<double> t(static_cast<size_t>(m));
  std::vector<std::pair<int, int>> side_pairs;
  for (int i = 0; i < m; ++i) {
    double tref = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (j == i || (j + 1) % m == i) continue;
      tref = std::min(tref, geodesic_tangency(p[size_t(i)], p[size_t(j)],
                                              p[size_t((j + 1) % m)]));
    }
    t[size_t(i)] = tref;
    side_pairs.push_back({i, (i + 1) % m});
  }
  calibrate_references(p, t, side_pairs);
  for (int i = 0; i < m; ++i) t[size_t(i)] *= std::exp(-heights[size_t(i)]);

  // cut point on the geodesic over (a, b) at the horocycle of diameter th
  // based at endpoint pe
  auto cut = [](double a, double b, double pe, double th) {
    double c = 0.5 * (a + b);
    double rho = 0.5 * std::abs(b - a);
    bool right_end = std::abs(pe - (c + rho)) < std::abs(pe - (c - rho));
    double phi = right_end ? 2 * std::atan(th / (2 * rho))
                           : 2 * std::atan(2 * rho / th);
    return cxd(c + rho * std::cos(phi), rho * std::sin(phi));
  };
  auto to_disk = [&](cxd w) {
    cxd z = (cxd(0, 1) - w) / (cxd(0, 1) + w);  // inverse Cayley
    return z * std::polar(1.0, -delta);         // undo the chart rotation
  };

  TruncationCuts cuts;
  cuts.before.resize(size_t(m));
  cuts.after.resize(size_t(m));
  for (int i = 0; i < m; ++i) {
    int prev = (i + m - 1) % m;
    int next = (i + 1) % m;
    cuts.before[size_t(i)] =
        to_disk(cut(p[size_t(prev)], p[size_t(i)], p[size_t(i)], t[size_t(i)]));
    cuts.after[size_t(i)] =
        to_disk(cut(p[size_t(i)], p[size_t(next)], p[size_t(i)], t[size_t(i)]));
  }
  return cuts;
}

Crown crown_from_parameters(int m, std::span<const double> vertex_angles,
                            double translation_length, double twist) {
  if (m < 1) throw ConfigError("crown: need at least one boundary cusp");
  if (int(vertex_angles.size()) != m)
    throw ConfigError("crown: expected one vertex angle per cusp");
  if (!(translation_length > 0))
    throw ConfigError("crown: translation length must be positive");
  for (double a : vertex_angles)
    if (!(a > 0 && a < kPi))
      throw ConfigError("crown: vertex angles must lie in the open upper semicircle");
  for (int i = 0; i + 1 < m; ++i)
    if (!(vertex_angles[size_t(i)] > vertex_angles[size_t(i + 1)]))
      throw ConfigError("crown: vertex angles must strictly decrease along the chain");
  // translates stay ordered over one period
  double p_first = boundary_to_real(vertex_angles[0]);
  double p_last = boundary_to_real(vertex_angles[size_t(m - 1)]);
  if (!(p_first * std::exp(-translation_length) < p_last))
    throw ConfigError("crown: translated chain overlaps the fundamental vertices");
  Crown c;
  c.cusp_count = m;
  c.vertex_angles.assign(vertex_angles.begin(), vertex_angles.end());
  c.translation_length = translation_length;
  c.boundary_twist = twist;
  return c;
}

CrownParameters crown_parameters(const Crown& crown) {
  return {crown.cusp_count, crown.vertex_angles, crown.translation_length,
          crown.boundary_twist};
}

std::vector<double> crown_truncated_sides(const Crown& crown,
                                          std::span<const double> heights) {
  const int m = crown.cusp_count;
  if (int(heights.size()) != m)
    throw ConfigError("crown_truncated_sides: need one height per cusp");
  const double shrink = std::exp(-crown.translation_length);

  // chain ideal points over three periods (index offset by m)
  std::vector<double> p(static_cast<size_t>(3 * m));
  for (int i = 0; i < m; ++i) {
    double base = boundary_to_real(crown.vertex_angles[size_t(i)]);
    p[size_t(i)] = base / shrink;
    p[size_t(m + i)] = base;
    p[size_t(2 * m + i)] = base * shrink;
  }

  auto reference = [&](int idx) {
    double tref = 2.0 * p[size_t(idx)];  // tangency with the axis x = 0
    for (int j = 0; j + 1 < 3 * m; ++j) {
      if (j == idx || j + 1 == idx) continue;
      tref = std::min(tref, geodesic_tangency(p[size_t(idx)], p[size_t(j)],
                                              p[size_t(j + 1)]));
    }
    return tref;
  };

  std::vector<double> t(static_cast<size_t>(m + 1));
  for (int i = 0; i < m; ++i) t[size_t(i)] = reference(m + i);
  t[size_t(m)] = t[0] * shrink;  // horocycle transported by the translation
  {
    std::vector<double> pp(p.begin() + m, p.begin() + 2 * m + 1);
    std::vector<std::pair<int, int>> side_pairs;
    for (int i = 0; i < m; ++i) side_pairs.push_back({i, i + 1});
    calibrate_references(pp, t, side_pairs);
  }
  for (int i = 0; i < m; ++i) t[size_t(i)] *= std::exp(-heights[size_t(i)]);
  t[size_t(m)] = t[0] * shrink;

  std::vector<double> sides(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    double pi = p[size_t(m + i)];
    double pj = i + 1 < m ? p[size_t(m + i + 1)] : p[size_t(2 * m)];
    sides[size_t(i)] = horocycle_side_length(pi, pj, t[size_t(i)], t[size_t(i + 1)]);
  }
  for (double l : sides)
    if (!(l > 0))
      throw ConfigError("crown_truncated_sides: truncation neighborhoods overlap");
  return sides;
}

double metric_residue(const Crown& crown) {
  std::vector<double> zero(size_t(crown.cusp_count), 0.0);
  return metric_residue(crown, zero);
}

double metric_residue(const Crown& crown, std::span<const double> heights) {
  if (crown.cusp_count % 2 == 1) return 0.0;
  std::vector<double> sides = crown_truncated_sides(crown, heights);
  double acc = 0;
  double sign = 1;  // start at the side following cusp "1"
  for (double l : sides) {
    acc += sign * l;
    sign = -sign;
  }
  return std::abs(acc);
}

namespace {

Mobius from_params(const double* x) {
  cxd w(x[1], x[2]);
  if (std::abs(w) > 0.999999) w *= 0.999999 / std::abs(w);
  return Mobius::rotation(x[0]).compose(Mobius::translation_to_origin(w));
}

// log map at q applied to p, as a Euclidean 2-vector scaled by hyperbolic length
cxd log_residual(cxd q, cxd p) {
  cxd u = Mobius::translation_to_origin(q)(p);
  double r = std::abs(u);
  if (r < 1e-300) return {0, 0};
  double d = 2.0 * std::atanh(std::min(r, 1.0 - 1e-16));
  return u / r * d;
}

}  // namespace

IsometryFit fit_isometry(std::span<const std::pair<cxd, cxd>> pairs) {
  const int n = int(pairs.size());
  if (n < 3) throw ConfigError("fit_isometry: need at least 3 pairs");
  double spread = 0;
  for (int i = 1; i < n; ++i)
    spread = std::max(spread, hyp_distance(pairs[0].first, pairs[size_t(i)].first));
  if (spread < 1e-8)
    throw ConfigError("fit_isometry: degenerate source configuration");

  // initial guess from the base pair and the farthest partner
  int far = 1;
  for (int i = 1; i < n; ++i)
    if (hyp_distance(pairs[0].first, pairs[size_t(i)].first) >
        hyp_distance(pairs[0].first, pairs[size_t(far)].first))
      far = i;
  Mobius m1 = Mobius::translation_to_origin(pairs[0].first);
  Mobius m2 = Mobius::translation_to_origin(pairs[0].second);
  double theta =
      std::arg(m2(pairs[size_t(far)].second)) - std::arg(m1(pairs[size_t(far)].first));
  Mobius a0 = m2.inverse().compose(Mobius::rotation(theta).compose(m1));

  double x[3];
  cxd w = a0.inverse()(cxd(0, 0));
  x[1] = w.real();
  x[2] = w.imag();
  cxd z0 = std::abs(w) > 0.1 ? cxd(0, 0) : cxd(0.5, 0);
  cxd phase = a0(z0) * (1.0 - std::conj(w) * z0) / (z0 - w);
  x[0] = std::arg(phase);

  auto residuals = [&](const double* params, Eigen::VectorXd& r) {
    Mobius A = from_params(params);
    r.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      cxd v = log_residual(pairs[size_t(i)].second, A(pairs[size_t(i)].first));
      r[2 * i] = v.real();
      r[2 * i + 1] = v.imag();
    }
  };

  Eigen::VectorXd r;
  residuals(x, r);
  double lambda = 1e-12;
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::MatrixXd J(2 * n, 3);
    for (int k = 0; k < 3; ++k) {
      double h = 1e-6;
      double xs[3] = {x[0], x[1], x[2]};
      Eigen::VectorXd rp, rm;
      xs[k] = x[k] + h;
      residuals(xs, rp);
      xs[k] = x[k] - h;
      residuals(xs, rm);
      J.col(k) = (rp - rm) / (2 * h);
    }
    Eigen::Matrix3d H = J.transpose() * J;
    Eigen::Vector3d g = J.transpose() * r;
    Eigen::Vector3d step =
        (H + lambda * Eigen::Matrix3d::Identity()).ldlt().solve(-g);
    double xs[3] = {x[0] + step[0], x[1] + step[1], x[2] + step[2]};
    Eigen::VectorXd rn;
    residuals(xs, rn);
    if (rn.squaredNorm() <= r.squaredNorm()) {
      std::copy(xs, xs + 3, x);
      r = rn;
      lambda = std::max(lambda / 4, 1e-14);
      if (step.norm() < 1e-14) break;
    } else {
      lambda *= 10;
      if (lambda > 1e6) break;
    }
  }

  Mobius best = from_params(x);
  double ss = 0;
  for (const auto& [p, q] : pairs) {
    double d = hyp_distance(best(p), q);
    ss += d * d;
  }
  return {best, std::sqrt(ss / n)};
}

}  // namespace crownflow::hypgeom
