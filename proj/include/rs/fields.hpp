#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace rs {

// Parameters of the ante-impact velocity field for one robot.
struct AnteFieldParams {
  Eigen::Vector2d p_imp;    // desired impact location
  Eigen::Vector2d v_imp;    // desired impact velocity
  double alpha = 5.0;       // 1/s, field shaping
  double r_min_a = 0.1;     // m, inner blend radius
  double r_max_a = 0.2;     // m, outer blend radius
  Eigen::Vector2d p_o_est;  // estimated object center
  double theta_d = 0.0;     // constant desired end-effector orientation
  double kappa_r_a = 30.0;  // 1/s, orientation gain
  double xi_d = 0.0;        // desired first-joint position

  void validate() const;
};

// Parameters of the post-impact object velocity field.
struct PostFieldParams {
  Eigen::Vector2d p_of;          // desired final object position
  double kappa_p = 2.0;          // 1/s, attractor gain
  double r_min_p = 0.1;          // m
  double r_max_p = 0.3;          // m
  Eigen::Vector2d v_o_est_plus;  // predicted post-impact object velocity
  Eigen::Vector2d p_o_plus;      // object position at impact detection
  double kappa_r_p = 30.0;       // 1/s
  double theta_d = 0.0;

  void validate() const;
};

struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// C1 blend: 0 below r_min, 1 above r_max, 3w^2 - 2w^3 in between.
double smoothstep(double r, double r_min, double r_max);

// Intermediate target on the approach ray through p_imp.
Eigen::Vector2d intermediate_target(const Eigen::Vector2d& p,
                                    const AnteFieldParams& params);

// Unblended field: direction toward the intermediate target, speed |v_imp|.
Eigen::Vector2d ante_velocity_raw(const Eigen::Vector2d& p,
                                  const AnteFieldParams& params);

// Blended ante-impact field; equals v_imp inside r_min_a of the object.
Eigen::Vector2d ante_velocity(const Eigen::Vector2d& p,
                              const AnteFieldParams& params);

// Pathwise acceleration (dv/dp) v of the blended field.
Eigen::Vector2d ante_acceleration(const Eigen::Vector2d& p,
                                  const AnteFieldParams& params);

// First-order orientation reference: omega = -kappa wrap(theta - theta_d),
// alpha follows the same pathwise construction.
std::pair<double, double> angular_refs(double theta, double theta_d,
                                       double kappa);

Eigen::Vector2d post_attractor(const Eigen::Vector2d& p_o,
                               const PostFieldParams& params);

Eigen::Vector2d post_velocity(const Eigen::Vector2d& p_o,
                              const PostFieldParams& params);

Eigen::Vector2d post_acceleration(const Eigen::Vector2d& p_o,
                                  const PostFieldParams& params);

}  // namespace rs
