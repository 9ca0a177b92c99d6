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

#include "servoland/ibvs.hpp"
#include "servoland/rng.hpp"
#include "servoland/se3.hpp"

namespace servoland {

/// Fixed-step kinematic model parameters. The quadrotor response is a
/// first-order lag on the saturated velocity command; this is a stand-in for
/// the real autopilot, not an identified model.
struct SimParams {
    double dt = 1.0 / 150.0;
    double uav_lag_tau = 0.5;           // s; <= dt means the command is tracked instantly
    double max_horiz_speed = 8.33;      // m/s
    double max_vert_speed = 4.0;        // m/s
    double max_yaw_rate = 1.5;          // rad/s
    double gimbal_rate_limit = 2.0;     // rad/s
    double truck_speed_noise_sigma = 0.0;  // m/s, white, per physics step
    double camera_rate = 30.0;          // Hz; controller runs at the same rate

    void validate() const;
    /// Physics steps per camera/controller tick.
    int steps_per_tick() const;
};

struct UAVState {
    Vec3 position = Vec3::Zero();  // world NED (m); altitude is -z
    double yaw = 0.0;
    CommandVelocity body_velocity;  // actual velocity, body frame
    double gimbal_pitch = 0.0;      // rad, relative to body
    double gimbal_yaw = 0.0;        // rad, relative to body

    double altitude() const { return -position.z(); }
    RigidTransform world_from_body() const;
    Vec3 world_velocity() const;
    bool is_finite() const;
};

inline constexpr double kDeckSize = 1.5;  // deck footprint side and box height (m)

/// Ground vehicle on a straight path. The deck top is a kDeckSize square
/// centred deck_height above the path point.
struct TruckState {
    Vec3 path_origin = Vec3::Zero();        // on the ground plane
    Vec3 path_direction = Vec3::UnitX();    // unit, horizontal
    double distance_along = 0.0;            // m
    double speed = 0.0;                     // m/s
    double deck_height = kDeckSize;         // m

    Vec3 deck_center() const;
    double heading() const;
    Vec3 velocity() const { return path_direction * speed; }
    /// Deck frame: x along the path, y to the right, z down, origin at the
    /// centre of the deck top.
    RigidTransform world_from_deck() const;
};

/// Saturates a command to the vehicle limits (horizontal norm, vertical,
/// yaw rate).
CommandVelocity saturate(const CommandVelocity& cmd, const SimParams& params);

UAVState step_uav(const UAVState& state, const CommandVelocity& cmd, const SimParams& params);
TruckState step_truck(const TruckState& state, const SimParams& params, RngStream& rng);

/// Rate-limited gimbal update towards the commanded pitch and yaw.
UAVState step_gimbal(const UAVState& state, double pitch_cmd, double yaw_cmd, const SimParams& params);

/// World pose of the camera: body pose, then the gimbal mount offset
/// (body_from_mount), then the gimbal rotation.
RigidTransform camera_pose(const UAVState& state, const RigidTransform& body_from_mount);

/// Transform from body coordinates into camera coordinates for the current
/// gimbal angles (the input to velocity_twist).
RigidTransform camera_from_body(const UAVState& state, const RigidTransform& body_from_mount);

}  // namespace servoland
