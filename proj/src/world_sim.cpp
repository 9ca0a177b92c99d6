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

#include "servoland/world_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace servoland {

namespace {

double move_towards(double current, double target, double max_step) {
    const double delta = std::clamp(target - current, -max_step, max_step);
    return current + delta;
}

}  // namespace

void SimParams::validate() const {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("dt must be positive");
    }
    if (!(uav_lag_tau >= 0.0)) {
        throw std::invalid_argument("uav_lag_tau must be non-negative");
    }
    if (!(max_horiz_speed > 0.0) || !(max_vert_speed > 0.0) || !(max_yaw_rate > 0.0) ||
        !(gimbal_rate_limit > 0.0)) {
        throw std::invalid_argument("speed and rate limits must be positive");
    }
    if (!(truck_speed_noise_sigma >= 0.0)) {
        throw std::invalid_argument("truck_speed_noise_sigma must be non-negative");
    }
    if (!(camera_rate > 0.0)) {
        throw std::invalid_argument("camera_rate must be positive");
    }
    const double ratio = 1.0 / (camera_rate * dt);
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-6) {
        throw std::invalid_argument("camera period must be an integer multiple of dt");
    }
}

int SimParams::steps_per_tick() const {
    return static_cast<int>(std::lround(1.0 / (camera_rate * dt)));
}

RigidTransform UAVState::world_from_body() const {
    return {rot_z(yaw), position};
}

Vec3 UAVState::world_velocity() const {
    return rot_z(yaw) * Vec3(body_velocity.vx, body_velocity.vy, body_velocity.vz);
}

bool UAVState::is_finite() const {
    return position.allFinite() && std::isfinite(yaw) && body_velocity.is_finite() && std::isfinite(gimbal_pitch) &&
           std::isfinite(gimbal_yaw);
}

Vec3 TruckState::deck_center() const {
    return path_origin + path_direction * distance_along - Vec3(0.0, 0.0, deck_height);
}

double TruckState::heading() const {
    return std::atan2(path_direction.y(), path_direction.x());
}

RigidTransform TruckState::world_from_deck() const {
    return {rot_z(heading()), deck_center()};
}

CommandVelocity saturate(const CommandVelocity& cmd, const SimParams& params) {
    CommandVelocity out = cmd;
    const double horiz = std::hypot(cmd.vx, cmd.vy);
    if (horiz > params.max_horiz_speed) {
        const double k = params.max_horiz_speed / horiz;
        out.vx *= k;
        out.vy *= k;
    }
    out.vz = std::clamp(cmd.vz, -params.max_vert_speed, params.max_vert_speed);
    out.omega = std::clamp(cmd.omega, -params.max_yaw_rate, params.max_yaw_rate);
    return out;
}

UAVState step_uav(const UAVState& state, const CommandVelocity& cmd, const SimParams& params) {
    const CommandVelocity target = saturate(cmd, params);
    UAVState next = state;
    if (params.uav_lag_tau <= params.dt) {
        next.body_velocity = target;
    } else {
        const double k = params.dt / params.uav_lag_tau;
        const CommandVelocity& v = state.body_velocity;
        next.body_velocity = {v.vx + k * (target.vx - v.vx), v.vy + k * (target.vy - v.vy),
                              v.vz + k * (target.vz - v.vz), v.omega + k * (target.omega - v.omega)};
    }
    next.position += next.world_velocity() * params.dt;
    next.yaw = wrap_angle(state.yaw + next.body_velocity.omega * params.dt);
    if (next.position.z() > 0.0) {
        // resting on the ground
        next.position.z() = 0.0;
        next.body_velocity.vz = std::min(next.body_velocity.vz, 0.0);
    }
    return next;
}

TruckState step_truck(const TruckState& state, const SimParams& params, RngStream& rng) {
    TruckState next = state;
    double speed = state.speed;
    if (params.truck_speed_noise_sigma > 0.0) {
        speed += rng.normal(0.0, params.truck_speed_noise_sigma);
    }
    next.distance_along += speed * params.dt;
    return next;
}

UAVState step_gimbal(const UAVState& state, double pitch_cmd, double yaw_cmd, const SimParams& params) {
    UAVState next = state;
    const double max_step = params.gimbal_rate_limit * params.dt;
    next.gimbal_pitch = move_towards(state.gimbal_pitch, pitch_cmd, max_step);
    next.gimbal_yaw = move_towards(state.gimbal_yaw, yaw_cmd, max_step);
    return next;
}

RigidTransform camera_pose(const UAVState& state, const RigidTransform& body_from_mount) {
    const RigidTransform gimbal = RigidTransform::from_rotation(rotation_from_gimbal(0.0, state.gimbal_pitch, state.gimbal_yaw));
    return state.world_from_body() * body_from_mount * gimbal;
}

RigidTransform camera_from_body(const UAVState& state, const RigidTransform& body_from_mount) {
    const RigidTransform gimbal = RigidTransform::from_rotation(rotation_from_gimbal(0.0, state.gimbal_pitch, state.gimbal_yaw));
    return (body_from_mount * gimbal).inverse();
}

}  // namespace servoland
