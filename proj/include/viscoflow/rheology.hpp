#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace viscoflow {

/// Viscosity law of the regularized model.
enum class Law { HerschelBulkley, CarreauYield, Casson };

std::string_view law_name(Law law);
Law parse_law(std::string_view name);

/// Lower cutoff for strain-rate magnitudes inside the singular viscosity laws.
inline constexpr double kMagnitudeFloor = 1e-10;

/// Rheology and regularization parameters.
///
/// `p` is the flow index (ignored by the Casson law, which is fixed at p = 2),
/// `mu` the model constant, `tau_s` the yield stress and `gamma` the Huber
/// regularization parameter.
template <typename Scalar = double>
struct ModelParams {
  Law law = Law::HerschelBulkley;
  Scalar p = Scalar(2);
  Scalar mu = Scalar(1);
  Scalar tau_s = Scalar(0);
  Scalar gamma = Scalar(1e3);

  void validate() const {
    if (!(p > Scalar(1))) throw std::invalid_argument("flow index p must exceed 1");
    if (!(mu > Scalar(0))) throw std::invalid_argument("mu must be positive");
    if (!(tau_s >= Scalar(0))) throw std::invalid_argument("tau_s must be non-negative");
    if (!(gamma > Scalar(0))) throw std::invalid_argument("gamma must be positive");
  }
};

using Params = ModelParams<double>;

namespace detail {
template <typename Scalar>
void require_nonnegative(Scalar t) {
  if (!(t >= Scalar(0))) throw std::invalid_argument("strain-rate magnitude must be non-negative");
}
}  // namespace detail

/// Viscosity factor nu(t), so that the viscous stress is nu(|T|) T.
template <typename Scalar>
Scalar nu(const ModelParams<Scalar>& params, Scalar t) {
  using std::max;
  using std::pow;
  using std::sqrt;
  detail::require_nonnegative(t);
  const Scalar floored = max(t, Scalar(kMagnitudeFloor));
  switch (params.law) {
    case Law::HerschelBulkley:
      return params.mu * pow(floored, params.p - Scalar(2));
    case Law::CarreauYield:
      return params.mu * pow(Scalar(1) + t * t, (params.p - Scalar(2)) / Scalar(2));
    case Law::Casson:
      return params.mu + Scalar(2) * sqrt(params.tau_s / floored);
  }
  return Scalar(0);
}

/// Derivative of nu with respect to the magnitude, same floor as nu.
template <typename Scalar>
Scalar nu_prime(const ModelParams<Scalar>& params, Scalar t) {
  using std::max;
  using std::pow;
  using std::sqrt;
  detail::require_nonnegative(t);
  const Scalar floored = max(t, Scalar(kMagnitudeFloor));
  switch (params.law) {
    case Law::HerschelBulkley:
      return params.mu * (params.p - Scalar(2)) * pow(floored, params.p - Scalar(3));
    case Law::CarreauYield:
      return params.mu * (params.p - Scalar(2)) * t *
             pow(Scalar(1) + t * t, (params.p - Scalar(4)) / Scalar(2));
    case Law::Casson:
      return -sqrt(params.tau_s) * pow(floored, Scalar(-1.5));
  }
  return Scalar(0);
}

/// Huber-regularized magnitude max(tau_s, gamma t).
template <typename Scalar>
Scalar huber_abs(const ModelParams<Scalar>& params, Scalar t) {
  using std::max;
  detail::require_nonnegative(t);
  return max(params.tau_s, params.gamma * t);
}

/// Active-set indicator: 1 where gamma t >= tau_s (ties count as active).
template <typename Scalar>
int chi_active(const ModelParams<Scalar>& params, Scalar t) {
  return params.gamma * t >= params.tau_s ? 1 : 0;
}

/// Radial projection of a tensor onto the ball of radius tau_s.
///
/// Magnitudes within a few ulps of tau_s are left untouched, which makes the
/// projection idempotent in floating point.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 2> project_q(
    const ModelParams<typename Derived::Scalar>& params, const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  const Scalar magnitude = q.norm();
  const Scalar slack = Scalar(8) * Eigen::NumTraits<Scalar>::epsilon();
  if (magnitude <= params.tau_s * (Scalar(1) + slack)) return q;
  return (params.tau_s / magnitude) * q;
}

}  // namespace viscoflow
