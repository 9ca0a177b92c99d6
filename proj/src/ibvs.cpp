// Copyright 2026 The Servoland Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "servoland/ibvs.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace servoland {

bool CommandVelocity::is_finite() const {
    return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(vz) && std::isfinite(omega);
}

void ServoGoal::validate() const {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("servo gain lambda must be positive");
    }
    if (!(gimbal_gain > 0.0)) {
        throw std::invalid_argument("gimbal gain must be positive");
    }
    if (!(z_star > 0.0)) {
        throw std::invalid_argument("goal depth must be positive");
    }
}

InteractionBlock interaction_block(double x, double y, double z) {
    if (!(z > 0.0)) {
        throw std::invalid_argument("interaction_block: depth must be positive");
    }
    InteractionBlock l;
    l << -1.0 / z, 0.0, x / z, x * y, -(1.0 + x * x), y,
         0.0, -1.0 / z, y / z, 1.0 + y * y, -x * y, -x;
    return l;
}

InteractionMatrix build_goal_interaction(const FeatureVector& s_star, double z_star) {
    InteractionMatrix l;
    for (int i = 0; i < FeatureVector::kPoints; ++i) {
        l.block<2, 6>(2 * i, 0) = interaction_block(s_star[i].x, s_star[i].y, z_star);
    }
    return l;
}

RobotJacobian robot_jacobian() {
    RobotJacobian j = RobotJacobian::Zero();
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    j(2, 2) = 1.0;
    j(5, 3) = 1.0;
    return j;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_cutoff, int* rank) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double cutoff = rel_cutoff * sigma_max;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
    int kept = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff && sigma(i) > 0.0) {
            inv(i) = 1.0 / sigma(i);
            ++kept;
        }
    }
    if (rank != nullptr) {
        *rank = kept;
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

ServoResult servo_command(const FeatureVector& s, const ServoGoal& goal, const InteractionMatrix& l,
                          const VelocityTwistMatrix& c_v_b, const CommandVelocity& v_ff) {
    const FeatureVector::Stacked error = s.stacked() - goal.s_star.stacked();
    const ServoMatrix m = l * c_v_b * robot_jacobian();
    ServoResult out;
    const Eigen::MatrixXd m_pinv = pseudo_inverse(m, 1e-8, &out.rank);
    const Eigen::Vector4d v = -goal.lambda * (m_pinv * error);
    out.command = CommandVelocity::from_vector(v) + v_ff;
    out.error_norm = error.norm();
    out.rank_deficient = out.rank < 4;
    return out;
}

double gimbal_command(const NormalizedPoint& s_c, const ServoGoal& goal) {
    return goal.gimbal_gain * (goal.gimbal_center_offset.y - s_c.y);
}

CommandVelocity feed_forward(const Vec3& truck_velocity_world, double uav_yaw) {
    const Vec3 body = rot_z(uav_yaw).transpose() * truck_velocity_world;
    return {body.x(), body.y(), body.z(), 0.0};
}

}  // namespace servoland
