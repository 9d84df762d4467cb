#include "crownflow/qdiff.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "crownflow/hypgeom.hpp"

namespace crownflow::qdiff {

namespace {

// principal branch with arg in (-pi/2, pi/2]
cxd principal_sqrt(cxd w) {
  cxd s = std::sqrt(w);
  if (s.real() < 0 || (s.real() == 0 && s.imag() < 0)) s = -s;
  return s;
}

cxd horner_ascending(std::span<const cxd> c, cxd z) {
  cxd acc = 0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
  return acc;
}

}  // namespace

LaurentQD::LaurentQD(int n, std::vector<cxd> laurent_coeffs,
                     std::vector<cxd> tail_coeffs, Domain dom)
    : pole_order(n),
      laurent(std::move(laurent_coeffs)),
      tail(std::move(tail_coeffs)),
      domain(dom) {
  if (n < 3) throw ConfigError("LaurentQD: pole order must be >= 3");
  if (int(laurent.size()) != n - 1)
    throw ConfigError("LaurentQD: expected coefficients a_n..a_2");
  if (laurent[0] == cxd(0, 0))
    throw ConfigError("LaurentQD: leading coefficient a_n must be nonzero");
  if (domain != Domain::PuncturedPlane && !tail.empty() && tail[0] != cxd(0, 0))
    throw ConfigError("LaurentQD: z^-1 tail term only allowed on the punctured plane");
}

cxd LaurentQD::a(int k) const {
  if (k < 2 || k > pole_order) throw std::out_of_range("LaurentQD::a");
  return laurent[size_t(pole_order - k)];
}

cxd LaurentQD::b(int i) const {
  size_t idx = size_t(i + 1);
  return idx < tail.size() ? tail[idx] : cxd(0, 0);
}

cxd LaurentQD::operator()(cxd z) const {
  cxd zi = 1.0 / z;
  // a_2 + a_3/z + ... + a_n/z^{n-2}, then times z^-2
  cxd acc = 0;
  for (const cxd& c : laurent) acc = acc * zi + c;
  acc *= zi * zi;
  for (size_t i = tail.size(); i-- > 0;)
    acc += tail[i] * std::pow(z, int(i) - 1);
  return acc;
}

cxd LaurentQD::derivative(cxd z) const {
  cxd zi = 1.0 / z;
  cxd acc = 0;
  for (int k = pole_order; k >= 2; --k)
    acc = acc * zi + (-double(k)) * laurent[size_t(pole_order - k)];
  acc *= std::pow(zi, 3);
  for (size_t i = tail.size(); i-- > 0;) {
    int p = int(i) - 1;
    if (p != 0) acc += tail[i] * double(p) * std::pow(z, p - 1);
  }
  return acc;
}

std::vector<cxd> LaurentQD::numerator() const {
  // q = z^-n (a_n + a_{n-1} z + ... + a_2 z^{n-2} + b_{-1} z^{n-1} + ...);
  // the stored order a_n .. a_2 is already ascending in z
  std::vector<cxd> c(laurent.begin(), laurent.end());
  c.insert(c.end(), tail.begin(), tail.end());
  while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
  return c;
}

PolynomialQD::PolynomialQD(std::vector<cxd> c) : coeffs(std::move(c)) {
  if (coeffs.empty()) throw ConfigError("PolynomialQD: empty coefficient list");
  if (coeffs.back() == cxd(0, 0))
    throw ConfigError("PolynomialQD: leading coefficient must be nonzero");
}

bool PolynomialQD::normalized() const {
  if (coeffs.back() != cxd(1, 0)) return false;
  return degree() == 0 || coeffs[size_t(degree() - 1)] == cxd(0, 0);
}

cxd PolynomialQD::operator()(cxd z) const { return horner_ascending(coeffs, z); }

cxd PolynomialQD::derivative(cxd z) const {
  cxd acc = 0;
  for (size_t i = coeffs.size(); i-- > 1;)
    acc = acc * z + coeffs[i] * double(i);
  return acc;
}

PrincipalPart::PrincipalPart(int eps, std::vector<cxd> as)
    : parity(eps), alphas(std::move(as)) {
  if (parity != 0 && parity != 1) throw ConfigError("PrincipalPart: parity must be 0 or 1");
  if (alphas.empty() || alphas[0] == cxd(0, 0))
    throw ConfigError("PrincipalPart: alpha_r must be nonzero");
}

cxd AnyQD::operator()(cxd z) const {
  return std::visit([&](const auto& q) { return q(z); }, v_);
}

cxd AnyQD::derivative(cxd z) const {
  return std::visit([&](const auto& q) { return q.derivative(z); }, v_);
}

int AnyQD::pole_order() const {
  if (auto* l = laurent()) return l->pole_order;
  return polynomial()->pole_order_at_infinity();
}

PrincipalPart extract_principal_part(const LaurentQD& q) {
  const int n = q.pole_order;
  const int r = n / 2;
  const int eps = n % 2;
  std::vector<cxd> alpha(static_cast<size_t>(r));  // alpha[i] = alpha_{r-i}
  alpha[0] = principal_sqrt(q.a(n));
  for (int i = 1; i < r; ++i) {
    // a_{n-i} = 2 alpha_r alpha_{r-i} + sum of alpha_j alpha_{2r-i-j} over
    // r-i < j < r (already determined)
    cxd quad = 0;
    for (int j = r - i + 1; j <= r - 1; ++j) {
      int k = 2 * r - i - j;
      if (k < r - i + 1 || k > r - 1) continue;
      quad += alpha[size_t(r - j)] * alpha[size_t(r - k)];
    }
    alpha[size_t(i)] = (q.a(n - i) - quad) / (2.0 * alpha[0]);
  }
  return PrincipalPart(eps, std::move(alpha));
}

PrincipalPart extract_principal_part(const PolynomialQD& q) {
  return extract_principal_part(pullback_to_origin(q));
}

std::vector<cxd> rebuild_leading(const PrincipalPart& p) {
  const int r = p.r();
  std::vector<cxd> out(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    // coefficient of z^{-(n-i)}: sum over j+k = 2r-i with 1 <= j,k <= r
    int m = 2 * r - i;
    cxd acc = 0;
    for (int j = std::max(1, m - r); j <= std::min(r, m - 1); ++j)
      acc += p.alpha(j) * p.alpha(m - j);
    out[size_t(i)] = acc;
  }
  return out;
}

QuadResidue residue(const PrincipalPart& p) {
  cxd value = p.parity == 1 ? cxd(0, 0) : p.alpha(1);
  return {value, QuadResidue::Norm::LaurentCoefficient, p.parity == 1};
}

QuadResidue residue_contour_of_principal(const PrincipalPart& p) {
  QuadResidue lc = residue(p);
  return {cxd(0, 2 * kPi) * lc.value, QuadResidue::Norm::Contour, lc.two_sheeted};
}

QuadResidue residue_contour(const AnyQD& q, double radius, int samples) {
  if (samples < 256) throw ConfigError("residue_contour: need at least 256 samples");
  if (radius <= 0) throw ConfigError("residue_contour: radius must be positive");

  // periodic trapezoid rule on sqrt(q(R e^{it})) i R e^{it}; spectrally
  // accurate since the integrand is analytic on the contour
  cxd integral = 0;
  cxd s_prev, s_first;
  const double dt = 2 * kPi / double(samples);
  for (int j = 0; j <= samples; ++j) {
    double t = dt * double(j);
    cxd z = radius * cxd(std::cos(t), std::sin(t));
    cxd s = std::sqrt(q(z));
    if (j == 0) {
      s_first = s;
    } else {
      if (std::abs(s - s_prev) > std::abs(s + s_prev)) s = -s;
      double jump = std::abs(s - s_prev);
      double scale = std::max(std::abs(s), std::abs(s_prev));
      if (scale > 0 && jump > 0.5 * scale)
        throw NumericalError(
            "residue_contour: branch tracking failed near z = (" +
            std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
            "); a zero of q lies on or too close to the contour");
    }
    if (j < samples) integral += s * cxd(0, 1) * z * dt;
    s_prev = s;
  }

  bool closed = std::abs(s_prev - s_first) <= std::abs(s_prev + s_first);
  if (!closed) {
    // sqrt(q) changes sheet after one loop; the double-loop integral cancels
    // exactly, consistent with the zero-residue convention for odd order.
    return {cxd(0, 0), QuadResidue::Norm::Contour, true};
  }
  return {integral, QuadResidue::Norm::Contour, false};
}

std::vector<cxd> numerator_roots(const AnyQD& q) {
  std::vector<cxd> c;
  if (auto* l = q.laurent())
    c = l->numerator();
  else
    c = q.polynomial()->coeffs;

  std::vector<cxd> roots;
  size_t lead = 0;  // deflate exact roots at the origin
  while (lead + 1 < c.size() && c[lead] == cxd(0, 0)) {
    roots.push_back(cxd(0, 0));
    ++lead;
  }
  c.erase(c.begin(), c.begin() + long(lead));
  int d = int(c.size()) - 1;
  if (d <= 0) return roots;

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[size_t(i)] / c[size_t(d)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);

  auto poly = [&](cxd z) {
    cxd acc = 0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
  };
  auto dpoly = [&](cxd z) {
    cxd acc = 0;
    for (size_t i = c.size(); i-- > 1;) acc = acc * z + double(i) * c[i];
    return acc;
  };
  for (int i = 0; i < d; ++i) {
    cxd z = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      cxd dp = dpoly(z);
      if (std::abs(dp) < 1e-300) break;
      cxd stepv = poly(z) / dp;
      z -= stepv;
      if (std::abs(stepv) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    roots.push_back(z);
  }
  return roots;
}

double suggest_contour_radius(const AnyQD& q) {
  std::vector<cxd> roots = numerator_roots(q);
  if (q.pole_at_origin()) {
    double rmin = std::numeric_limits<double>::infinity();
    for (cxd z : roots) rmin = std::min(rmin, std::abs(z));
    return std::isfinite(rmin) ? 0.5 * rmin : 0.5;
  }
  double rmax = 0;
  for (cxd z : roots) rmax = std::max(rmax, std::abs(z));
  return 2.0 * (1.0 + rmax);
}

LaurentQD symmetrize(const LaurentQD& q) {
  if (q.domain != Domain::PuncturedDisk)
    throw ConfigError("symmetrize: expected a differential on the punctured disk");
  const int n = q.pole_order;
  std::vector<cxd> tail(static_cast<size_t>(n - 2));  // b_{-1} .. b_{n-4}
  for (int i = -1; i <= n - 4; ++i) tail[size_t(i + 1)] = q.a(i + 4);
  return LaurentQD(n, q.laurent, std::move(tail), Domain::PuncturedPlane);
}

LaurentQD pullback_to_origin(const PolynomialQD& q) {
  // z -> 1/u sends (sum c_j z^j) dz^2 to (sum c_j u^{-j-4}) du^2
  const int d = q.degree();
  const int n = d + 4;
  std::vector<cxd> laurent(size_t(n - 1), cxd(0, 0));  // a_n .. a_2
  for (int j = 0; j <= d; ++j) laurent[size_t(n - (j + 4))] = q.coeffs[size_t(j)];
  return LaurentQD(n, std::move(laurent), {}, Domain::Plane);
}

cxd evaluate(const AnyQD& q, cxd z) {
  if (q.pole_at_origin() && std::abs(z) < 1e-13)
    throw NumericalError("evaluate: point coincides with the pole");
  return q(z);
}

std::vector<cxd> sqrt_along_path(const AnyQD& q, std::span<const cxd> path) {
  std::vector<cxd> out;
  out.reserve(path.size());
  cxd prev;
  for (size_t i = 0; i < path.size(); ++i) {
    cxd value = q(path[i]);
    if (std::abs(value) == 0.0)
      throw NumericalError("sqrt_along_path: path passes through a zero of q");
    cxd s = std::sqrt(value);
    if (i > 0 && std::abs(s - prev) > std::abs(s + prev)) s = -s;
    out.push_back(s);
    prev = s;
  }
  return out;
}

bool compatible(const PrincipalPart& p, const hypgeom::Crown& crown, double tol) {
  if (crown.cusp_count != p.order() - 2)
    throw ConfigError("compatible: crown must have n-2 cusps for pole order n");
  double analytic = residue_contour_of_principal(p).value.real();
  double metric = hypgeom::metric_residue(crown);
  return std::abs(std::abs(analytic) - 0.5 * std::abs(metric)) <= tol;
}

int free_coefficient_count(int n) {
  if (n < 3) throw ConfigError("free_coefficient_count: pole order must be >= 3");
  return n % 2 == 1 ? n - 1 : n - 2;
}

}  // namespace crownflow::qdiff
