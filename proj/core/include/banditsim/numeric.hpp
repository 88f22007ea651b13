#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "banditsim/errors.hpp"

namespace banditsim {

/// Logistic sigmoid 1/(1+exp(-z)), evaluated without overflow for any finite z.
inline double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double log1p_exp(double z) noexcept {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

/// Probit moderation factor (1 + pi*s/8)^(-1/2) for a latent variance s.
inline double kappa(double variance) noexcept {
  return 1.0 / std::sqrt(1.0 + std::numbers::pi * variance / 8.0);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace banditsim
