#include "rs/model.hpp"

#include <cmath>

namespace rs {

static void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void RobotModel::validate() const {
  require(n_links > 0, "RobotModel: n_links must be positive");
  const int n = n_links;
  require(link_lengths.size() == n && link_masses.size() == n &&
              link_inertias.size() == n && com_offsets.size() == n &&
              motor_inertia.size() == n,
          "RobotModel: inconsistent per-link vector sizes");
  require((link_lengths.array() > 0).all(), "RobotModel: lengths must be > 0");
  require((link_masses.array() > 0).all(), "RobotModel: masses must be > 0");
  require((link_inertias.array() > 0).all(), "RobotModel: inertias must be > 0");
  require((motor_inertia.array() >= 0).all(),
          "RobotModel: motor inertia must be >= 0");
  require(q_min.size() == n && q_max.size() == n && dq_min.size() == n &&
              dq_max.size() == n && tau_min.size() == n && tau_max.size() == n,
          "RobotModel: inconsistent bound vector sizes");
  require((q_min.array() < q_max.array()).all(), "RobotModel: q bounds inverted");
  require((dq_min.array() < dq_max.array()).all(),
          "RobotModel: dq bounds inverted");
  require((tau_min.array() < tau_max.array()).all(),
          "RobotModel: tau bounds inverted");
  require(ee_radius > 0, "RobotModel: ee_radius must be > 0");
}

void ObjectModel::validate() const {
  require(mass > 0, "ObjectModel: mass must be > 0");
  require(inertia > 0, "ObjectModel: inertia must be > 0");
  require(half_extents.x() > 0 && half_extents.y() > 0,
          "ObjectModel: half extents must be > 0");
  require(surface_friction_mu >= 0 && contact_friction_mu >= 0,
          "ObjectModel: friction coefficients must be >= 0");
  require(restitution == 0.0, "ObjectModel: restitution must be exactly 0");
}

double wrap_angle(double x) {
  double w = std::remainder(x, 2.0 * M_PI);
  if (w <= -M_PI) w = M_PI;  // convention: (-pi, pi]
  return w;
}

}  // namespace rs
