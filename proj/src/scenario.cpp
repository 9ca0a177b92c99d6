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

#include "servoland/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "servoland/camera.hpp"
#include "servoland/rng.hpp"
#include "servoland/sensors.hpp"

namespace servoland {

namespace {

enum StreamId : std::uint64_t { kInitStream = 0, kDetectionStream = 1, kTruckStream = 2, kLaserStream = 3 };

bool after_trigger(MissionPhase p) {
    return p != MissionPhase::kFlyToHover && p != MissionPhase::kHover;
}

void check_invariants(const UAVState& uav, const CommandVelocity& cmd, double t) {
    if (!uav.is_finite() || !cmd.is_finite()) {
        throw SimulationInvariantError("non-finite vehicle state or command at t = " + std::to_string(t));
    }
    if (uav.position.z() > 1e-9) {
        throw SimulationInvariantError("vehicle below the ground plane at t = " + std::to_string(t));
    }
}

RunResult result_for(MissionPhase phase, const std::string& abort_event) {
    if (phase == MissionPhase::kMotorsOff) {
        return RunResult::kLanded;
    }
    if (phase == MissionPhase::kAborted) {
        return abort_event == "missed_deck" ? RunResult::kMissedDeck : RunResult::kLostTarget;
    }
    return RunResult::kTimedOut;
}

}  // namespace

std::string_view to_string(RunResult result) {
    switch (result) {
        case RunResult::kLanded:
            return "landed";
        case RunResult::kLostTarget:
            return "lost_target";
        case RunResult::kTimedOut:
            return "timed_out";
        case RunResult::kMissedDeck:
            return "missed_deck";
    }
    return "unknown";
}

ServoGoal make_servo_goal(const ExperimentConfig& config) {
    UAVState at_goal;
    at_goal.position = Vec3(0.0, 0.0, -config.servo.goal_height);
    at_goal.gimbal_pitch = -std::numbers::pi / 2.0;
    const RigidTransform body_from_mount = RigidTransform::from_translation(config.servo.mount_offset);
    const RigidTransform camera = camera_pose(at_goal, body_from_mount);

    ServoGoal goal;
    goal.s_star = ideal_features(RigidTransform::identity(), config.deck_radius, camera, config.camera,
                                 config.contour_samples);
    goal.z_star = config.servo.goal_height - config.servo.mount_offset.z();
    goal.lambda = config.servo.lambda;
    goal.gimbal_gain = config.servo.gimbal_gain;
    goal.gimbal_center_offset = goal.s_star.center();
    return goal;
}

RunRecord run_scenario(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();

    RngStream init_rng(RngStream::derive(seed, kInitStream));
    RngStream detection_rng(RngStream::derive(seed, kDetectionStream));
    RngStream truck_rng(RngStream::derive(seed, kTruckStream));
    RngStream laser_rng(RngStream::derive(seed, kLaserStream));

    // Fixed draw order so every seed consumes the same numbers.
    const auto& rnd = config.randomization;
    const double dx = init_rng.uniform(-1.0, 1.0) * rnd.uav_start_xy;
    const double dy = init_rng.uniform(-1.0, 1.0) * rnd.uav_start_xy;
    const double dyaw = init_rng.uniform(-1.0, 1.0) * rnd.uav_start_yaw;
    const double dstart = init_rng.uniform(-1.0, 1.0) * rnd.truck_start_distance;
    const double dlateral = init_rng.uniform(-1.0, 1.0) * rnd.truck_lateral_offset;
    const double dspeed = init_rng.uniform(-1.0, 1.0) * rnd.truck_speed;

    const MissionConfig& mission_cfg = config.mission;
    const Vec3 road = mission_cfg.truck_direction_assumed.normalized();
    const Vec3 right(-road.y(), road.x(), 0.0);
    const Vec3 hover_ground(mission_cfg.hover_point.x(), mission_cfg.hover_point.y(), 0.0);

    TruckState truck;
    truck.path_direction = road;
    truck.path_origin = hover_ground - road * (config.scenario.truck_start_distance + dstart) +
                        right * (config.scenario.truck_lateral_offset + dlateral);
    truck.speed = std::max(0.0, config.scenario.truck_speed + dspeed);
    truck.deck_height = mission_cfg.deck_height;

    UAVState uav;
    uav.position = mission_cfg.hover_position() + config.scenario.uav_start_offset + Vec3(dx, dy, 0.0);
    uav.yaw = wrap_angle(config.scenario.uav_start_yaw + dyaw);
    uav.gimbal_pitch = mission_cfg.hover_gimbal_pitch;
    if (uav.position.z() > 0.0) {
        throw SimulationInvariantError("initial vehicle position is below the ground");
    }

    const RigidTransform body_from_mount = RigidTransform::from_translation(config.servo.mount_offset);
    MissionController mission(mission_cfg, make_servo_goal(config), body_from_mount, config.sim.uav_lag_tau);
    DeckDetector detector(config.detection, config.camera, config.deck_radius, config.contour_samples);
    DropTrigger trigger(config.trigger);
    const std::size_t height_ray = config.lasers.height_ray();

    const int steps = config.sim.steps_per_tick();
    const auto last_tick = static_cast<long>(std::floor(config.max_duration * config.sim.camera_rate + 1e-9));

    RunRecord record;
    RunSummary& summary = record.summary;
    summary.seed = seed;
    summary.min_deck_distance = std::numeric_limits<double>::infinity();
    MissionOutput out;

    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) / config.sim.camera_rate;
        const RigidTransform deck = truck.world_from_deck();

        MissionInputs in;
        in.t = t;
        in.uav = uav;
        in.detection = detector.detect(deck, camera_pose(uav, body_from_mount), t, detection_rng);
        in.laser_ranges = laser_measure(uav, truck, config.lasers, laser_rng);
        in.height_ray = height_ray;
        in.triggered = trigger.update(in.laser_ranges, t);
        in.contact = touchdown_check(uav, truck, config.contact);

        out = mission.step(in);
        check_invariants(uav, out.command, t);

        TraceRow row;
        row.t = t;
        row.phase = out.phase;
        row.event = out.event;
        row.uav_position = uav.position;
        row.uav_yaw = uav.yaw;
        row.velocity = uav.body_velocity;
        row.command = out.command;
        row.gimbal_pitch = uav.gimbal_pitch;
        row.gimbal_pitch_cmd = out.gimbal_pitch_cmd;
        row.deck_center = deck.translation();
        row.deck_velocity = truck.velocity();
        row.feature_error = out.feature_error;
        row.detected = in.detection.has_value();
        row.lasers = in.laser_ranges;
        row.triggered = in.triggered;

        summary.min_deck_distance = std::min(summary.min_deck_distance, (uav.position - row.deck_center).norm());
        if (out.phase == MissionPhase::kCatchUp && !out.event.empty()) {
            summary.trigger_time = t;
        }
        if (row.detected && after_trigger(out.phase) && !summary.first_detection) {
            summary.first_detection = t;
        }
        if (out.phase == MissionPhase::kMotorsOff && !out.event.empty()) {
            const Vec3 local = deck.rotation().transpose() * (uav.position - deck.translation());
            const Vec3 rel = uav.world_velocity() - truck.velocity();
            summary.outcome.touchdown_offset = std::hypot(local.x(), local.y());
            summary.outcome.touchdown_rel_speed = std::hypot(rel.x(), rel.y());
            if (summary.first_detection) {
                summary.outcome.detection_to_touchdown = t - *summary.first_detection;
            }
        }
        record.rows.push_back(std::move(row));

        if (is_terminal(out.phase) || k >= last_tick) {
            summary.duration = t;
            break;
        }

        for (int s = 0; s < steps; ++s) {
            truck = step_truck(truck, config.sim, truck_rng);
            uav = step_uav(uav, out.command, config.sim);
            uav = step_gimbal(uav, out.gimbal_pitch_cmd, out.gimbal_yaw_cmd, config.sim);
        }
    }

    summary.outcome.result = result_for(out.phase, mission.abort_event());
    summary.outcome.final_event = out.phase == MissionPhase::kAborted ? mission.abort_event() : std::string();
    if (summary.outcome.result == RunResult::kLanded && !summary.outcome.detection_to_touchdown) {
        // landed without any detection after the trigger; count from the trigger
        summary.outcome.detection_to_touchdown = summary.duration - summary.trigger_time.value_or(0.0);
    }
    summary.approached = summary.min_deck_distance < kApproachDistance;
    return record;
}

std::uint64_t run_seed(const ExperimentConfig& config, int index) {
    return config.seed + static_cast<std::uint64_t>(index);
}

MonteCarloReport summarize(const std::vector<RunSummary>& runs) {
    MonteCarloReport report;
    report.n_runs = static_cast<int>(runs.size());
    report.runs = runs;
    double sum = 0.0;
    for (const auto& r : runs) {
        if (r.approached) {
            ++report.approached;
        }
        if (r.outcome.result != RunResult::kLanded) {
            continue;
        }
        ++report.landed;
        const double d = *r.outcome.detection_to_touchdown;
        sum += d;
        report.min_detection_to_touchdown = std::min(report.min_detection_to_touchdown.value_or(d), d);
        report.max_detection_to_touchdown = std::max(report.max_detection_to_touchdown.value_or(d), d);
    }
    if (report.n_runs > 0) {
        report.landing_rate = static_cast<double>(report.landed) / report.n_runs;
        report.approach_rate = static_cast<double>(report.approached) / report.n_runs;
    }
    if (report.landed > 0) {
        report.mean_detection_to_touchdown = sum / report.landed;
    }
    return report;
}

MonteCarloReport run_monte_carlo(const ExperimentConfig& config, std::vector<RunRecord>* records) {
    config.validate();
    const auto n = static_cast<std::size_t>(config.n_runs);
    std::vector<RunRecord> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = run_scenario(config, run_seed(config, static_cast<int>(i)));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    std::vector<RunSummary> summaries;
    summaries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        summaries.push_back(results[i].summary);
    }
    if (records) {
        *records = std::move(results);
    }
    return summarize(summaries);
}

}  // namespace servoland
