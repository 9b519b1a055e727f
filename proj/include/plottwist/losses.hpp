#pragma once

#include <span>

namespace plottwist::losses {

/// Huber loss: r^2/2 for |r| <= delta, delta * (|r| - delta/2) beyond.
/// Throws DomainError for delta <= 0.
double huber_loss(double residual, double delta = 1.0);

/// d/dr of huber_loss: r inside the knee, +-delta outside.
double huber_derivative(double residual, double delta = 1.0);

/// Negative mean log-likelihood of the target tokens, -(1/T) sum log p_t.
/// Every probability must lie in (0, 1].
double ce_token_loss(std::span<const double> target_token_probs);

/// Regression-aware SFT objective: ce + huber_weight * huber.
double combined_sft_loss(double ce, double huber, double huber_weight = 1.0);

}  // namespace plottwist::losses
