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

#include "servoland/mission.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace servoland {

namespace {

constexpr std::array<std::pair<MissionPhase, std::string_view>, 8> kPhaseNames{{
    {MissionPhase::kFlyToHover, "fly_to_hover"},
    {MissionPhase::kHover, "hover"},
    {MissionPhase::kCatchUp, "catch_up"},
    {MissionPhase::kVisualServo, "visual_servo"},
    {MissionPhase::kBlindFinal, "blind_final"},
    {MissionPhase::kTouchdown, "touchdown"},
    {MissionPhase::kMotorsOff, "motors_off"},
    {MissionPhase::kAborted, "aborted"},
}};

std::string transition_message(MissionPhase from, MissionPhase to) {
    return "invalid mission transition " + std::string(to_string(from)) + " -> " + std::string(to_string(to));
}

}  // namespace

std::string_view to_string(MissionPhase phase) {
    for (const auto& [p, name] : kPhaseNames) {
        if (p == phase) {
            return name;
        }
    }
    return "unknown";
}

std::optional<MissionPhase> phase_from_string(std::string_view name) {
    for (const auto& [p, n] : kPhaseNames) {
        if (n == name) {
            return p;
        }
    }
    return std::nullopt;
}

bool is_terminal(MissionPhase phase) {
    return phase == MissionPhase::kMotorsOff || phase == MissionPhase::kAborted;
}

bool is_allowed_transition(MissionPhase from, MissionPhase to) {
    using P = MissionPhase;
    switch (from) {
        case P::kFlyToHover:
            return to == P::kHover;
        case P::kHover:
            return to == P::kCatchUp;
        case P::kCatchUp:
            return to == P::kVisualServo || to == P::kAborted;
        case P::kVisualServo:
            return to == P::kTouchdown || to == P::kBlindFinal || to == P::kAborted;
        case P::kBlindFinal:
            return to == P::kTouchdown || to == P::kAborted;
        case P::kTouchdown:
            return to == P::kMotorsOff || to == P::kAborted;
        case P::kMotorsOff:
        case P::kAborted:
            return false;
    }
    return false;
}

InvalidTransition::InvalidTransition(MissionPhase from, MissionPhase to)
    : std::logic_error(transition_message(from, to)) {}

CommandVelocity path_track(const UAVState& current, const Vec3& goal_point, double goal_yaw,
                           const PathTrackerGains& gains) {
    Vec3 v = gains.position_gain * (goal_point - current.position);
    const double horiz = std::hypot(v.x(), v.y());
    if (horiz > gains.max_horiz_speed) {
        v.x() *= gains.max_horiz_speed / horiz;
        v.y() *= gains.max_horiz_speed / horiz;
    }
    v.z() = std::clamp(v.z(), -gains.max_vert_speed, gains.max_vert_speed);
    const Vec3 body = rot_z(current.yaw).transpose() * v;
    return {body.x(), body.y(), body.z(), gains.yaw_gain * wrap_angle(goal_yaw - current.yaw)};
}

void MissionConfig::validate() const {
    if (!hover_point.allFinite() || !(hover_height > deck_height)) {
        throw std::invalid_argument("hover_height must be above the deck");
    }
    if (!(hover_tolerance > 0.0)) {
        throw std::invalid_argument("hover_tolerance must be positive");
    }
    if (!(hover_gimbal_pitch >= -std::numbers::pi / 2.0 - 1e-12 && hover_gimbal_pitch <= 0.0)) {
        throw std::invalid_argument("hover_gimbal_pitch must lie in [-pi/2, 0]");
    }
    if (!(catch_up_delta > 0.0) || !(truck_speed_assumed >= 0.0)) {
        throw std::invalid_argument("catch_up_delta must be positive and truck_speed_assumed non-negative");
    }
    if (!std::isfinite(t_a) || !(catch_up_timeout > 0.0) || !(abort_timeout > 0.0)) {
        throw std::invalid_argument("t_a must be finite and timeouts positive");
    }
    if (blind_final_periods < 1 || !(blind_final_height > 0.0) || !(blind_range > 0.0)) {
        throw std::invalid_argument("blind final parameters must be positive");
    }
    if (!truck_direction_assumed.allFinite() || std::abs(truck_direction_assumed.z()) > 1e-9 ||
        truck_direction_assumed.norm() < 1e-9) {
        throw std::invalid_argument("truck_direction_assumed must be a horizontal non-zero vector");
    }
    if (!(touchdown_descent_speed > 0.0) || !(deck_height >= 0.0)) {
        throw std::invalid_argument("touchdown_descent_speed must be positive");
    }
    if (initial_phase != MissionPhase::kFlyToHover && initial_phase != MissionPhase::kVisualServo) {
        throw std::invalid_argument("initial_phase must be fly_to_hover or visual_servo");
    }
    if (!(tracker.position_gain > 0.0) || !(tracker.yaw_gain >= 0.0) || !(tracker.max_horiz_speed > 0.0) ||
        !(tracker.max_vert_speed > 0.0)) {
        throw std::invalid_argument("path tracker gains and limits must be positive");
    }
}

double MissionConfig::road_heading() const {
    return std::atan2(truck_direction_assumed.y(), truck_direction_assumed.x());
}

double catch_up_time_from_lag(double tau, double truck_speed, double delta) {
    if (!(tau >= 0.0) || !(truck_speed >= 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("catch_up_time_from_lag: invalid arguments");
    }
    return tau * std::log((truck_speed + delta) / delta);
}

ContactResult touchdown_check(const UAVState& uav, const TruckState& truck, const ContactTolerance& tol) {
    const double above_deck = uav.altitude() - truck.deck_height;
    if (uav.altitude() <= tol.height) {
        return ContactResult::kMissedDeck;
    }
    if (above_deck > tol.height) {
        return ContactResult::kNone;
    }
    const RigidTransform deck = truck.world_from_deck();
    const Vec3 local = deck.rotation().transpose() * (uav.position - deck.translation());
    const double half = kDeckSize / 2.0;
    if (std::abs(local.x()) > half || std::abs(local.y()) > half) {
        return ContactResult::kMissedDeck;
    }
    const Vec3 rel = uav.world_velocity() - truck.velocity();
    if (std::hypot(rel.x(), rel.y()) > tol.max_rel_speed) {
        return ContactResult::kMissedDeck;
    }
    return ContactResult::kLanded;
}

MissionController::MissionController(MissionConfig config, ServoGoal goal, RigidTransform body_from_mount,
                                     double uav_lag_tau)
    : config_(std::move(config)),
      goal_(std::move(goal)),
      body_from_mount_(body_from_mount),
      phase_(config_.initial_phase),
      gimbal_pitch_cmd_(config_.hover_gimbal_pitch) {
    config_.validate();
    goal_.validate();
    interaction_ = build_goal_interaction(goal_.s_star, goal_.z_star);
    t_a_ = config_.t_a >= 0.0
               ? config_.t_a
               : catch_up_time_from_lag(uav_lag_tau, config_.truck_speed_assumed, config_.catch_up_delta);
}

void MissionController::transition(MissionPhase next, double t, std::string_view event, MissionOutput& out) {
    if (!is_allowed_transition(phase_, next)) {
        throw InvalidTransition(phase_, next);
    }
    phase_ = next;
    phase_start_ = t;
    out.event = std::string(event);
    if (next == MissionPhase::kAborted) {
        abort_event_ = out.event;
    }
    if (next == MissionPhase::kBlindFinal) {
        blind_ticks_ = 0;
    }
}

double MissionController::height_reading(const MissionInputs& in) const {
    if (in.height_ray >= in.laser_ranges.size()) {
        return std::numeric_limits<double>::infinity();
    }
    return in.laser_ranges[in.height_ray];
}

void MissionController::track_gimbal(const MissionInputs& in, MissionOutput& out) {
    if (in.detection) {
        const double step = gimbal_command(in.detection->features.center(), goal_);
        gimbal_pitch_cmd_ = std::clamp(in.uav.gimbal_pitch + step, -std::numbers::pi / 2.0, 0.0);
    }
    out.gimbal_pitch_cmd = gimbal_pitch_cmd_;
}

CommandVelocity MissionController::truck_feed_forward(const UAVState& uav) const {
    return feed_forward(config_.truck_velocity_assumed(), uav.yaw);
}

MissionOutput MissionController::step(const MissionInputs& in) {
    using P = MissionPhase;
    MissionOutput out;
    if (in.detection) {
        out.feature_error = (in.detection->features.stacked() - goal_.s_star.stacked()).norm();
        distance_estimate_ = goal_.z_star * goal_.s_star.corner_spread() / in.detection->features.corner_spread();
    }

    // phase transitions, at most one per tick
    switch (phase_) {
        case P::kFlyToHover: {
            const Vec3 err = config_.hover_position() - in.uav.position;
            const Vec3 vel = in.uav.world_velocity();
            if (err.norm() < config_.hover_tolerance && vel.norm() < config_.hover_tolerance) {
                transition(P::kHover, in.t, "hover_reached", out);
            }
            break;
        }
        case P::kHover:
            if (in.triggered) {
                trigger_time_ = in.t;
                transition(P::kCatchUp, in.t, "truck_detected", out);
            }
            break;
        case P::kCatchUp:
            if (config_.switch_criterion == SwitchCriterion::kVisionBased && in.detection) {
                transition(P::kVisualServo, in.t, "deck_detected", out);
            } else if (config_.switch_criterion == SwitchCriterion::kTimingBased && in.t - trigger_time_ >= t_a_) {
                transition(P::kVisualServo, in.t, "catch_up_elapsed", out);
            } else if (in.t - trigger_time_ > config_.catch_up_timeout) {
                transition(P::kAborted, in.t, "catch_up_timeout", out);
            }
            if (phase_ == P::kVisualServo) {
                last_detection_time_ = in.t;
            }
            break;
        case P::kVisualServo:
            if (in.contact == ContactResult::kMissedDeck) {
                transition(P::kAborted, in.t, "missed_deck", out);
            } else if (height_reading(in) <= config_.blind_final_height) {
                transition(P::kTouchdown, in.t, "landing_height", out);
            } else if (in.detection) {
                last_detection_time_ = in.t;
            } else if (distance_estimate_ && *distance_estimate_ < config_.blind_range) {
                transition(P::kBlindFinal, in.t, "detection_lost_close", out);
            } else if (in.t - last_detection_time_ > config_.abort_timeout) {
                transition(P::kAborted, in.t, "lost_target", out);
            }
            break;
        case P::kBlindFinal:
            if (in.contact == ContactResult::kMissedDeck) {
                transition(P::kAborted, in.t, "missed_deck", out);
            } else if (blind_ticks_ >= config_.blind_final_periods) {
                if (height_reading(in) <= config_.blind_final_height) {
                    transition(P::kTouchdown, in.t, "blind_final_done", out);
                } else {
                    transition(P::kAborted, in.t, "blind_final_too_high", out);
                }
            }
            break;
        case P::kTouchdown:
            if (in.contact == ContactResult::kLanded) {
                transition(P::kMotorsOff, in.t, "contact", out);
            } else if (in.contact == ContactResult::kMissedDeck) {
                transition(P::kAborted, in.t, "missed_deck", out);
            }
            break;
        case P::kMotorsOff:
        case P::kAborted:
            break;
    }

    // command for the (possibly new) phase
    out.phase = phase_;
    out.gimbal_pitch_cmd = gimbal_pitch_cmd_;
    out.gimbal_yaw_cmd = 0.0;
    switch (phase_) {
        case P::kFlyToHover:
        case P::kHover:
            out.command = path_track(in.uav, config_.hover_position(), config_.road_heading(), config_.tracker);
            gimbal_pitch_cmd_ = config_.hover_gimbal_pitch;
            out.gimbal_pitch_cmd = gimbal_pitch_cmd_;
            break;
        case P::kCatchUp: {
            const Vec3 dir = rot_z(in.uav.yaw).transpose() * config_.truck_direction_assumed.normalized();
            const double speed = config_.truck_speed_assumed + config_.catch_up_delta;
            out.command = {dir.x() * speed, dir.y() * speed, 0.0, 0.0};
            track_gimbal(in, out);
            break;
        }
        case P::kVisualServo: {
            const CommandVelocity v_ff = truck_feed_forward(in.uav);
            if (in.detection) {
                const VelocityTwistMatrix c_v_b = velocity_twist(camera_from_body(in.uav, body_from_mount_));
                out.command = servo_command(in.detection->features, goal_, interaction_, c_v_b, v_ff).command;
            } else {
                out.command = v_ff;
            }
            track_gimbal(in, out);
            break;
        }
        case P::kBlindFinal:
            ++blind_ticks_;
            out.command = truck_feed_forward(in.uav);
            break;
        case P::kTouchdown:
            out.command = truck_feed_forward(in.uav) + CommandVelocity{0.0, 0.0, config_.touchdown_descent_speed, 0.0};
            break;
        case P::kMotorsOff:
            out.motors_on = false;
            break;
        case P::kAborted:
            break;
    }
    return out;
}

}  // namespace servoland
