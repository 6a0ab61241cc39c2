#include "i2lt/losses.hpp"

#include <cmath>

namespace i2lt::losses {

double hinge(double tau) noexcept { return tau < 1.0 ? 1.0 - tau : 0.0; }

double hinge_subgrad(double tau) noexcept { return tau < 1.0 ? -1.0 : 0.0; }

double misalign(double a) noexcept {
  if (a >= 0.0) return std::log1p(std::exp(-2.0 * a));
  return -2.0 * a + std::log1p(std::exp(2.0 * a));
}

double misalign_deriv(double a) noexcept {
  // exp(2a) overflows to inf for large a, giving -0, the correct limit.
  return -2.0 / (std::exp(2.0 * a) + 1.0);
}

}  // namespace i2lt::losses
