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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "servoland/config.hpp"
#include "servoland/mission.hpp"

namespace servoland {

/// Raised when the simulation state becomes non-finite or otherwise breaks
/// a physical invariant.
class SimulationInvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RunResult { kLanded, kLostTarget, kTimedOut, kMissedDeck };
std::string_view to_string(RunResult result);

struct MissionOutcome {
    RunResult result = RunResult::kTimedOut;
    std::optional<double> detection_to_touchdown;  // s, present iff Landed
    std::optional<double> touchdown_offset;        // m, horizontal, deck centre to body
    std::optional<double> touchdown_rel_speed;     // m/s, horizontal
    std::string final_event;
};

/// One controller tick: the state at time t and the command issued at t.
struct TraceRow {
    double t = 0.0;
    MissionPhase phase = MissionPhase::kFlyToHover;  // after the mission step
    std::string event;
    Vec3 uav_position = Vec3::Zero();
    double uav_yaw = 0.0;
    CommandVelocity velocity;  // actual, body frame
    CommandVelocity command;
    double gimbal_pitch = 0.0;
    double gimbal_pitch_cmd = 0.0;
    Vec3 deck_center = Vec3::Zero();
    Vec3 deck_velocity = Vec3::Zero();  // nominal truck velocity
    std::optional<double> feature_error;
    bool detected = false;
    std::vector<double> lasers;
    bool triggered = false;
};

struct RunSummary {
    std::uint64_t seed = 0;
    MissionOutcome outcome;
    double duration = 0.0;                     // s, time of the last row
    std::optional<double> trigger_time;        // s, entry into CatchUp
    std::optional<double> first_detection;     // s, first detection after the trigger
    double min_deck_distance = 0.0;            // m, body to deck-top centre over all rows
    bool approached = false;                   // min_deck_distance < kApproachDistance
};

inline constexpr double kApproachDistance = 1.0;  // m

struct RunRecord {
    std::vector<TraceRow> rows;
    RunSummary summary;
};

/// Goal features for a body goal_height above the deck centre with the
/// camera looking straight down.
ServoGoal make_servo_goal(const ExperimentConfig& config);

/// Deterministic single run. The same (config, seed) gives the same record.
RunRecord run_scenario(const ExperimentConfig& config, std::uint64_t seed);

struct MonteCarloReport {
    int n_runs = 0;
    int landed = 0;
    int approached = 0;
    double landing_rate = 0.0;
    double approach_rate = 0.0;
    std::optional<double> mean_detection_to_touchdown;
    std::optional<double> min_detection_to_touchdown;
    std::optional<double> max_detection_to_touchdown;
    std::vector<RunSummary> runs;  // in seed order
};

/// Seed of run i in a batch.
std::uint64_t run_seed(const ExperimentConfig& config, int index);

MonteCarloReport summarize(const std::vector<RunSummary>& runs);

/// Runs config.n_runs scenarios across worker threads. Results are reduced
/// in seed order, so the report does not depend on the thread count. When
/// `records` is given it receives every run's full record.
MonteCarloReport run_monte_carlo(const ExperimentConfig& config, std::vector<RunRecord>* records = nullptr);

}  // namespace servoland
