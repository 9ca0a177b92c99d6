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
#include <filesystem>
#include <stdexcept>
#include <string>

#include "servoland/camera.hpp"
#include "servoland/mission.hpp"
#include "servoland/sensors.hpp"
#include "servoland/world_sim.hpp"

namespace servoland {

/// Raised for malformed or invalid configuration. `path()` names the
/// offending field, e.g. "servo.lambda".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct ServoSettings {
    double lambda = 1.5;
    double gimbal_gain = 0.5;
    double goal_height = 0.5;                  // body above the deck top at the goal (m)
    Vec3 mount_offset = Vec3(0.1, 0.0, 0.05);  // camera position in the body frame (m)
};

/// Initial conditions, relative to the mission hover point.
struct ScenarioSettings {
    Vec3 uav_start_offset = Vec3::Zero();  // from the hover position, world NED (m)
    double uav_start_yaw = 0.0;             // rad
    double truck_start_distance = 15.0;     // m before the hover point along the road
    double truck_lateral_offset = 0.0;      // m to the right of the hover point
    double truck_speed = 4.17;              // m/s
};

/// Half-widths of uniform perturbations drawn per run.
struct RandomizationSettings {
    double uav_start_xy = 0.0;          // m, each horizontal axis
    double uav_start_yaw = 0.0;         // rad
    double truck_start_distance = 0.0;  // m
    double truck_lateral_offset = 0.0;  // m
    double truck_speed = 0.0;           // m/s
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int n_runs = 1;
    double max_duration = 40.0;  // s
    int threads = 0;             // 0 selects the hardware concurrency

    SimParams sim;
    CameraIntrinsics camera;
    double deck_radius = 0.75;  // m, radius of the circle painted on the deck
    int contour_samples = 64;
    DetectionModel detection;
    LaserConfig lasers;
    TriggerConfig trigger;
    ServoSettings servo;
    MissionConfig mission;
    ContactTolerance contact;
    ScenarioSettings scenario;
    RandomizationSettings randomization;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Parses YAML text. Missing keys keep their defaults; unknown keys are
/// rejected. The result is validated.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full configuration as YAML, readable by parse_config.
std::string dump_config(const ExperimentConfig& config);

}  // namespace servoland
