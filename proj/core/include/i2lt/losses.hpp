#pragma once

namespace i2lt::losses {

/// (1 - tau)_+
double hinge(double tau) noexcept;

/// Element of the hinge subdifferential: -1 below the margin, 0 at and above it.
double hinge_subgrad(double tau) noexcept;

/// Logistic misalignment loss log(1 + exp(-2a)), evaluated as a split softplus
/// so that neither tail overflows.
double misalign(double a) noexcept;

/// d/da misalign(a) = tanh(a) - 1 = -2 / (exp(2a) + 1).
double misalign_deriv(double a) noexcept;

}  // namespace i2lt::losses
