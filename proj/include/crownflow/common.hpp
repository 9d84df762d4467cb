#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace crownflow {

using cxd = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

// Error categories map to CLI exit codes (config = 2, numerical = 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. The double conversion is done from raw bits so streams
// are reproducible across platforms and standard libraries.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  cxd complex_in(double scale) {
    return {uniform(-scale, scale), uniform(-scale, scale)};
  }
  int integer(int lo, int hi) {  // inclusive range
    return lo + int(eng_() % uint64_t(hi - lo + 1));
  }

private:
  std::mt19937_64 eng_;
};

inline double wrap_angle(double t) {  // into [0, 2*pi)
  t = std::fmod(t, 2 * kPi);
  return t < 0 ? t + 2 * kPi : t;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// agreement up to a global sign, with |reference|-relative tolerance guarded
// against tiny references
inline bool equal_up_to_sign(cxd a, cxd b, double rtol, double floor_scale = 1.0) {
  double scale = std::max(floor_scale, std::abs(b));
  return std::min(std::abs(a - b), std::abs(a + b)) <= rtol * scale;
}

}  // namespace crownflow
