#include "rs/fields.hpp"

#include <cmath>

#include "rs/model.hpp"

namespace rs {

void AnteFieldParams::validate() const {
  if (v_imp.norm() <= 0.0)
    throw std::invalid_argument("AnteFieldParams: v_imp must be nonzero");
  if (!(r_max_a > r_min_a && r_min_a > 0.0))
    throw std::invalid_argument("AnteFieldParams: need r_max_a > r_min_a > 0");
}

void PostFieldParams::validate() const {
  if (!(r_min_p < r_max_p))
    throw std::invalid_argument("PostFieldParams: need r_min_p < r_max_p");
  if (r_max_p > (p_o_plus - p_of).norm() + 1e-12)
    throw std::invalid_argument(
        "PostFieldParams: need r_max_p <= |p_o_plus - p_of|");
}

double smoothstep(double r, double r_min, double r_max) {
  if (r_min >= r_max)
    throw std::invalid_argument("smoothstep: r_min must be < r_max");
  if (r <= r_min) return 0.0;
  if (r >= r_max) return 1.0;
  const double w = (r - r_min) / (r_max - r_min);
  return 3.0 * w * w - 2.0 * w * w * w;
}

Eigen::Vector2d intermediate_target(const Eigen::Vector2d& p,
                                    const AnteFieldParams& params) {
  return params.p_imp -
         params.v_imp * (params.p_imp - p).norm() / params.v_imp.norm();
}

Eigen::Vector2d ante_velocity_raw(const Eigen::Vector2d& p,
                                  const AnteFieldParams& params) {
  const Eigen::Vector2d p_t = intermediate_target(p, params);
  const Eigen::Vector2d u = params.v_imp + params.alpha * (p_t - p);
  const double nu = u.norm();
  // degenerate only on the antipodal ray; v_imp keeps the speed contract
  if (nu < 1e-12) return params.v_imp;
  return u / nu * params.v_imp.norm();
}

Eigen::Vector2d ante_velocity(const Eigen::Vector2d& p,
                              const AnteFieldParams& params) {
  const double beta =
      smoothstep((p - params.p_o_est).norm(), params.r_min_a, params.r_max_a);
  if (beta == 0.0) return params.v_imp;
  return beta * ante_velocity_raw(p, params) + (1.0 - beta) * params.v_imp;
}

namespace {

// (dv/dp) v by central differences, one code path for all blend regions.
template <typename Field>
Eigen::Vector2d pathwise_acceleration(const Eigen::Vector2d& p, Field&& field) {
  constexpr double h = 1e-6;
  Eigen::Matrix2d jac;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d dp = Eigen::Vector2d::Zero();
    dp[k] = h;
    jac.col(k) = (field(p + dp) - field(p - dp)) / (2.0 * h);
  }
  return jac * field(p);
}

}  // namespace

Eigen::Vector2d ante_acceleration(const Eigen::Vector2d& p,
                                  const AnteFieldParams& params) {
  return pathwise_acceleration(
      p, [&](const Eigen::Vector2d& x) { return ante_velocity(x, params); });
}

std::pair<double, double> angular_refs(double theta, double theta_d,
                                       double kappa) {
  const double err = wrap_angle(theta - theta_d);
  const double omega = -kappa * err;
  const double alpha = kappa * kappa * err;  // d(omega)/dt along the reference
  return {omega, alpha};
}

Eigen::Vector2d post_attractor(const Eigen::Vector2d& p_o,
                               const PostFieldParams& params) {
  return params.kappa_p * (params.p_of - p_o);
}

Eigen::Vector2d post_velocity(const Eigen::Vector2d& p_o,
                              const PostFieldParams& params) {
  const double beta = smoothstep((params.p_o_plus - p_o).norm(),
                                 params.r_min_p, params.r_max_p);
  return beta * post_attractor(p_o, params) +
         (1.0 - beta) * params.v_o_est_plus;
}

Eigen::Vector2d post_acceleration(const Eigen::Vector2d& p_o,
                                  const PostFieldParams& params) {
  return pathwise_acceleration(
      p_o, [&](const Eigen::Vector2d& x) { return post_velocity(x, params); });
}

}  // namespace rs
