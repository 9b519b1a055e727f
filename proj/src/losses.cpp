#include "plottwist/losses.hpp"

#include <cmath>
#include <string>

#include "plottwist/errors.hpp"

namespace plottwist::losses {

double huber_loss(double residual, double delta) {
  if (!(delta > 0.0)) throw DomainError("huber_loss: delta must be > 0");
  const double a = std::abs(residual);
  if (a <= delta) return 0.5 * residual * residual;
  return delta * (a - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
  if (!(delta > 0.0)) throw DomainError("huber_derivative: delta must be > 0");
  if (std::abs(residual) <= delta) return residual;
  return residual > 0.0 ? delta : -delta;
}

double ce_token_loss(std::span<const double> target_token_probs) {
  if (target_token_probs.empty()) throw DomainError("ce_token_loss: empty token sequence");
  double sum = 0.0;
  for (double p : target_token_probs) {
    if (!(p > 0.0) || p > 1.0)
      throw DomainError("ce_token_loss: probability " + std::to_string(p) + " outside (0, 1]");
    sum += std::log(p);
  }
  return -sum / static_cast<double>(target_token_probs.size());
}

double combined_sft_loss(double ce, double huber, double huber_weight) {
  if (!std::isfinite(ce) || !std::isfinite(huber) || !std::isfinite(huber_weight))
    throw DomainError("combined_sft_loss: inputs must be finite");
  if (huber_weight < 0.0) throw DomainError("combined_sft_loss: huber_weight must be >= 0");
  return ce + huber_weight * huber;
}

}  // namespace plottwist::losses
