#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "crownflow/common.hpp"

namespace crownflow::hypgeom {
struct Crown;
}

namespace crownflow::qdiff {

enum class Domain { PuncturedDisk, Plane, PuncturedPlane };

// Meromorphic quadratic differential with a single pole of order n >= 3 at
// the origin, stored as the coefficient list of
//   (a_n z^-n + ... + a_2 z^-2 + b_-1 z^-1 + b_0 + b_1 z + ...) dz^2.
// The z^-1 tail term is only admitted on the punctured plane, where it arises
// from symmetrization.
struct LaurentQD {
  int pole_order = 0;          // n
  std::vector<cxd> laurent;    // a_n .. a_2, laurent[i] = a_{n-i}
  std::vector<cxd> tail;       // b_-1, b_0, b_1, ...
  Domain domain = Domain::PuncturedDisk;

  LaurentQD(int n, std::vector<cxd> laurent_coeffs, std::vector<cxd> tail_coeffs,
            Domain dom);

  cxd a(int k) const;          // coefficient of z^-k, 2 <= k <= n
  cxd b(int i) const;          // tail coefficient of z^i, i >= -1
  cxd operator()(cxd z) const;
  cxd derivative(cxd z) const;

  // numerator polynomial N with q = N(z) z^-n dz^2, ascending powers
  std::vector<cxd> numerator() const;
};

// Polynomial quadratic differential on the plane; pole of order d+4 at
// infinity.
struct PolynomialQD {
  std::vector<cxd> coeffs;     // c_0 .. c_d

  explicit PolynomialQD(std::vector<cxd> c);

  int degree() const { return int(coeffs.size()) - 1; }
  int pole_order_at_infinity() const { return degree() + 4; }
  bool normalized() const;     // monic and centered
  cxd operator()(cxd z) const;
  cxd derivative(cxd z) const;
};

// The (eps; alpha_r,...,alpha_1) data of a principal differential
//   z^-eps (alpha_r z^-r + ... + alpha_1 z^-1)^2 dz^2.
struct PrincipalPart {
  int parity = 0;              // eps
  std::vector<cxd> alphas;     // alpha_r .. alpha_1

  PrincipalPart(int eps, std::vector<cxd> as);

  int r() const { return int(alphas.size()); }
  int order() const { return 2 * r() + parity; }
  cxd alpha(int j) const { return alphas.at(size_t(r() - j)); }  // alpha_j, 1<=j<=r
};

struct QuadResidue {
  enum class Norm { Contour, LaurentCoefficient };
  cxd value;                   // defined up to a global sign
  Norm norm = Norm::LaurentCoefficient;
  bool two_sheeted = false;    // sqrt(q) closed only after two loops (odd order)

  bool agrees(const QuadResidue& other, double rtol, double floor_scale = 1.0) const {
    return equal_up_to_sign(value, other.value, rtol, floor_scale);
  }
};

// Lightweight evaluation wrapper over the two differential kinds.
class AnyQD {
public:
  AnyQD(LaurentQD q) : v_(std::move(q)) {}
  AnyQD(PolynomialQD q) : v_(std::move(q)) {}

  cxd operator()(cxd z) const;
  cxd derivative(cxd z) const;
  bool is_polynomial() const { return std::holds_alternative<PolynomialQD>(v_); }
  const LaurentQD* laurent() const { return std::get_if<LaurentQD>(&v_); }
  const PolynomialQD* polynomial() const { return std::get_if<PolynomialQD>(&v_); }

  // pole order: n at the origin for Laurent data, d+4 at infinity otherwise
  int pole_order() const;
  bool pole_at_origin() const { return !is_polynomial(); }

private:
  std::variant<LaurentQD, PolynomialQD> v_;
};

PrincipalPart extract_principal_part(const LaurentQD& q);
PrincipalPart extract_principal_part(const PolynomialQD& q);  // at infinity, via z -> 1/z

// Leading r Laurent coefficients a_n .. a_{n-r+1} of the expanded square.
std::vector<cxd> rebuild_leading(const PrincipalPart& p);

// Residue in the Laurent-coefficient normalization: the z^-1 coefficient of
// a square root.  Zero by convention for odd pole order.
QuadResidue residue(const PrincipalPart& p);

// Contour normalization of the same residue, 2*pi*i times the coefficient.
QuadResidue residue_contour_of_principal(const PrincipalPart& p);

// Raw contour integral of sqrt(q) around the pole with continuous branch
// tracking; the independent oracle for residue() via
// contour = 2*pi*i * laurent-coefficient.
QuadResidue residue_contour(const AnyQD& q, double radius, int samples);

double suggest_contour_radius(const AnyQD& q);

// Roots of the numerator polynomial (companion-matrix eigenvalues with a
// Newton polish); shared plumbing behind flatgeom::zeros and the radius
// heuristics.
std::vector<cxd> numerator_roots(const AnyQD& q);

LaurentQD symmetrize(const LaurentQD& q);

// Pullback of a polynomial differential under z -> 1/z: a Laurent pole of
// order d+4 at the origin.
LaurentQD pullback_to_origin(const PolynomialQD& q);

cxd evaluate(const AnyQD& q, cxd z);

// sqrt(q) along a sampled path with continuous branch continuation from the
// principal branch at the first sample.
std::vector<cxd> sqrt_along_path(const AnyQD& q, std::span<const cxd> path);

// Residue compatibility with a hyperbolic crown: Re of the contour residue
// equals half the crown's metric residue, up to sign.
bool compatible(const PrincipalPart& p, const hypgeom::Crown& crown,
                double tol = 1e-9);

// Real dimension of the space Q(P, n) of differentials with a fixed
// principal part: n-1 for odd n, n-2 for even n.
int free_coefficient_count(int n);

}  // namespace crownflow::qdiff
