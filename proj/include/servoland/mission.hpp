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

#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "servoland/camera.hpp"
#include "servoland/ibvs.hpp"
#include "servoland/world_sim.hpp"

namespace servoland {

enum class MissionPhase { kFlyToHover, kHover, kCatchUp, kVisualServo, kBlindFinal, kTouchdown, kMotorsOff, kAborted };

std::string_view to_string(MissionPhase phase);
std::optional<MissionPhase> phase_from_string(std::string_view name);
bool is_terminal(MissionPhase phase);

/// Edges of the landing state machine:
///
///   FlyToHover -> Hover -> CatchUp -> VisualServo -> Touchdown -> MotorsOff
///                                  \            \-> BlindFinal -> Touchdown
///                                   \-> Aborted  \-> Aborted      \-> Aborted
///   Touchdown -> Aborted (missed deck)
bool is_allowed_transition(MissionPhase from, MissionPhase to);

class InvalidTransition : public std::logic_error {
public:
    InvalidTransition(MissionPhase from, MissionPhase to);
};

enum class SwitchCriterion { kVisionBased, kTimingBased };

struct PathTrackerGains {
    double position_gain = 1.0;  // 1/s
    double yaw_gain = 1.0;       // 1/s
    double max_horiz_speed = 8.33;
    double max_vert_speed = 4.0;
};

/// Saturated proportional tracker towards a world point and heading.
CommandVelocity path_track(const UAVState& current, const Vec3& goal_point, double goal_yaw,
                           const PathTrackerGains& gains = {});

struct MissionConfig {
    Eigen::Vector2d hover_point = Eigen::Vector2d::Zero();  // world north/east (m)
    double hover_height = 4.0;                  // m above ground
    double hover_tolerance = 0.3;               // m, and m/s for the settle check
    double hover_gimbal_pitch = -std::numbers::pi / 2.0;
    double catch_up_delta = 1.39;               // m/s above the assumed truck speed
    SwitchCriterion switch_criterion = SwitchCriterion::kTimingBased;
    double t_a = -1.0;                          // s; negative selects catch_up_time_from_lag()
    double catch_up_timeout = 5.0;              // s without a switch before aborting
    int blind_final_periods = 15;               // controller ticks
    double blind_final_height = 0.8;            // m above the deck, read by the height laser
    double blind_range = 1.5;                   // m, estimated camera-deck distance
    double abort_timeout = 2.0;                 // s of lost detection outside blind range
    double truck_speed_assumed = 4.17;          // m/s
    Vec3 truck_direction_assumed = Vec3::UnitX();
    double touchdown_descent_speed = 1.0;       // m/s, added downwards during touchdown
    double deck_height = kDeckSize;             // m
    MissionPhase initial_phase = MissionPhase::kFlyToHover;
    PathTrackerGains tracker;

    void validate() const;
    Vec3 hover_position() const { return {hover_point.x(), hover_point.y(), -hover_height}; }
    Vec3 truck_velocity_assumed() const { return truck_direction_assumed.normalized() * truck_speed_assumed; }
    double road_heading() const;
};

/// Time for a first-order lagged vehicle commanded to v_truck + delta to
/// reach the truck speed: tau * ln((v_truck + delta) / delta). After this
/// instant the gap to the truck stops growing.
double catch_up_time_from_lag(double tau, double truck_speed, double delta);

enum class ContactResult { kNone, kLanded, kMissedDeck };

struct ContactTolerance {
    double height = 0.05;         // m above the deck top
    double max_rel_speed = 1.0;   // m/s, horizontal, the magnets' hold limit
};

/// Contact classification. Landed needs the vehicle within the deck
/// footprint, at most `height` above the deck top and slow relative to the
/// truck. Reaching that height anywhere else, or too fast, is MissedDeck.
ContactResult touchdown_check(const UAVState& uav, const TruckState& truck, const ContactTolerance& tol = {});

struct MissionInputs {
    double t = 0.0;
    UAVState uav;                     // odometry
    std::vector<double> laser_ranges;
    std::size_t height_ray = 0;
    bool triggered = false;
    std::optional<Detection> detection;
    ContactResult contact = ContactResult::kNone;
};

struct MissionOutput {
    MissionPhase phase = MissionPhase::kFlyToHover;  // phase after this step
    CommandVelocity command;
    double gimbal_pitch_cmd = 0.0;
    double gimbal_yaw_cmd = 0.0;
    bool motors_on = true;
    std::string event;                  // set on the step that changed phase
    std::optional<double> feature_error;  // ||s - s_star|| when the deck is detected
};

/// The landing state machine. Call step() once per controller tick.
class MissionController {
public:
    MissionController(MissionConfig config, ServoGoal goal, RigidTransform body_from_mount, double uav_lag_tau);

    MissionOutput step(const MissionInputs& in);

    MissionPhase phase() const { return phase_; }
    const ServoGoal& goal() const { return goal_; }
    const InteractionMatrix& interaction() const { return interaction_; }
    double catch_up_time() const { return t_a_; }
    std::optional<double> distance_estimate() const { return distance_estimate_; }
    /// Event that moved the machine into Aborted, empty otherwise.
    const std::string& abort_event() const { return abort_event_; }

private:
    void transition(MissionPhase next, double t, std::string_view event, MissionOutput& out);
    double height_reading(const MissionInputs& in) const;
    void track_gimbal(const MissionInputs& in, MissionOutput& out);
    CommandVelocity truck_feed_forward(const UAVState& uav) const;

    MissionConfig config_;
    ServoGoal goal_;
    RigidTransform body_from_mount_;
    InteractionMatrix interaction_;
    double t_a_;

    MissionPhase phase_;
    double phase_start_ = 0.0;
    double trigger_time_ = 0.0;
    double last_detection_time_ = 0.0;
    int blind_ticks_ = 0;
    double gimbal_pitch_cmd_;
    std::optional<double> distance_estimate_;
    std::string abort_event_;
};

}  // namespace servoland
