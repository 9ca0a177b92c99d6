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

#pragma once

#include <Eigen/Dense>

#include "servoland/camera.hpp"
#include "servoland/se3.hpp"

namespace servoland {

using InteractionBlock = Eigen::Matrix<double, 2, 6>;
using InteractionMatrix = Eigen::Matrix<double, FeatureVector::kSize, 6>;
using RobotJacobian = Eigen::Matrix<double, 6, 4>;
using ServoMatrix = Eigen::Matrix<double, FeatureVector::kSize, 4>;

/// Velocity command for the vehicle: body-frame linear velocity (FRD, m/s)
/// and yaw rate about body z (rad/s).
struct CommandVelocity {
    double vx = 0.0;
    double vy = 0.0;
    double vz = 0.0;
    double omega = 0.0;

    Eigen::Vector4d as_vector() const { return {vx, vy, vz, omega}; }
    static CommandVelocity from_vector(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
    bool is_finite() const;

    friend CommandVelocity operator+(const CommandVelocity& a, const CommandVelocity& b) {
        return {a.vx + b.vx, a.vy + b.vy, a.vz + b.vz, a.omega + b.omega};
    }
    friend bool operator==(const CommandVelocity&, const CommandVelocity&) = default;
};

/// Servo set-point and gains. The interaction matrix built from s_star and
/// z_star stays constant for the whole mission.
struct ServoGoal {
    FeatureVector s_star;
    double z_star = 0.45;        // camera-to-deck distance at the goal (m)
    double lambda = 0.8;         // servo gain (1/s)
    double gimbal_gain = 0.5;    // rad per unit of normalized image error
    NormalizedPoint gimbal_center_offset;  // desired image position of the deck center

    void validate() const;
};

/// Point-feature interaction matrix for normalized image point (x, y) at
/// depth z. Throws std::invalid_argument for z <= 0.
InteractionBlock interaction_block(double x, double y, double z);

/// Five stacked point blocks, all evaluated at depth z_star.
InteractionMatrix build_goal_interaction(const FeatureVector& s_star, double z_star);

/// Selects (vx, vy, vz, wz) out of a 6-D body twist.
RobotJacobian robot_jacobian();

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rel_cutoff * sigma_max are treated as zero. `rank`, when given, receives
/// the number of retained singular values.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_cutoff = 1e-8, int* rank = nullptr);

struct ServoResult {
    CommandVelocity command;
    double error_norm = 0.0;
    int rank = 0;
    bool rank_deficient = false;
};

/// Visual servo law with feed-forward:
///   e = s - s_star,  M = L * cVb * bJb,  v = -lambda * pinv(M) * e + v_ff.
/// cVb carries body twists into the camera frame.
ServoResult servo_command(const FeatureVector& s, const ServoGoal& goal, const InteractionMatrix& l,
                          const VelocityTwistMatrix& c_v_b, const CommandVelocity& v_ff);

/// Proportional gimbal pitch correction (rad) from the vertical image error
/// of the deck center. Positive values pitch the camera up; a target that
/// sits below the desired image position yields a negative (downward) step.
double gimbal_command(const NormalizedPoint& s_c, const ServoGoal& goal);

/// Rotates a world-frame (NED) truck velocity into the body frame of a
/// vehicle with the given yaw. The yaw-rate component is zero.
CommandVelocity feed_forward(const Vec3& truck_velocity_world, double uav_yaw);

}  // namespace servoland
