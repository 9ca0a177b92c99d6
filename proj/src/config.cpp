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

#include "servoland/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

namespace servoland {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

struct Degrees {
    double& radians;
};

std::string_view to_string(SwitchCriterion c) {
    return c == SwitchCriterion::kVisionBased ? "vision" : "timing";
}

// Walks the schema once for reading and once for writing, so both stay in
// sync with a single field list.
template <class V>
void describe(ExperimentConfig& c, V& v) {
    v.section("experiment", [&] {
        v.field("seed", c.seed);
        v.field("n_runs", c.n_runs);
        v.field("max_duration", c.max_duration);
        v.field("threads", c.threads);
    });
    v.section("sim", [&] {
        v.field("dt", c.sim.dt);
        v.field("uav_lag_tau", c.sim.uav_lag_tau);
        v.field("max_horiz_speed", c.sim.max_horiz_speed);
        v.field("max_vert_speed", c.sim.max_vert_speed);
        v.field("max_yaw_rate", c.sim.max_yaw_rate);
        v.field("gimbal_rate_limit", c.sim.gimbal_rate_limit);
        v.field("truck_speed_noise_sigma", c.sim.truck_speed_noise_sigma);
        v.field("camera_rate", c.sim.camera_rate);
    });
    v.section("camera", [&] {
        v.field("fx", c.camera.fx);
        v.field("fy", c.camera.fy);
        v.field("cx", c.camera.cx);
        v.field("cy", c.camera.cy);
        v.field("width", c.camera.width);
        v.field("height", c.camera.height);
        v.field("deck_radius", c.deck_radius);
        v.field("contour_samples", c.contour_samples);
    });
    v.section("detection", [&] {
        v.field("max_range", c.detection.max_range);
        v.field("min_range", c.detection.min_range);
        v.field("min_visible_fraction", c.detection.min_visible_fraction);
        v.field("dropout_burst_rate", c.detection.dropout_burst_rate);
        v.field("dropout_burst_len", c.detection.dropout_burst_len);
        v.field("pixel_noise_sigma", c.detection.pixel_noise_sigma);
    });
    v.section("lasers", [&] {
        v.field("rays", c.lasers.rays);
        v.field("max_range", c.lasers.max_range);
        v.field("noise_sigma", c.lasers.noise_sigma);
    });
    v.section("trigger", [&] {
        v.field("drop_threshold", c.trigger.drop_threshold);
        v.field("window", c.trigger.window);
    });
    v.section("servo", [&] {
        v.field("lambda", c.servo.lambda);
        v.field("gimbal_gain", c.servo.gimbal_gain);
        v.field("goal_height", c.servo.goal_height);
        v.field("mount_offset", c.servo.mount_offset);
    });
    v.section("mission", [&] {
        v.field("initial_phase", c.mission.initial_phase);
        v.field("hover_point", c.mission.hover_point);
        v.field("hover_height", c.mission.hover_height);
        v.field("hover_tolerance", c.mission.hover_tolerance);
        v.field("hover_gimbal_pitch_deg", Degrees{c.mission.hover_gimbal_pitch});
        v.field("catch_up_delta", c.mission.catch_up_delta);
        v.field("switch_criterion", c.mission.switch_criterion);
        v.field("t_a", c.mission.t_a);
        v.field("catch_up_timeout", c.mission.catch_up_timeout);
        v.field("blind_final_periods", c.mission.blind_final_periods);
        v.field("blind_final_height", c.mission.blind_final_height);
        v.field("blind_range", c.mission.blind_range);
        v.field("abort_timeout", c.mission.abort_timeout);
        v.field("truck_speed_assumed", c.mission.truck_speed_assumed);
        v.field("truck_direction_assumed", c.mission.truck_direction_assumed);
        v.field("touchdown_descent_speed", c.mission.touchdown_descent_speed);
        v.field("deck_height", c.mission.deck_height);
        v.field("tracker_position_gain", c.mission.tracker.position_gain);
        v.field("tracker_yaw_gain", c.mission.tracker.yaw_gain);
    });
    v.section("contact", [&] {
        v.field("height", c.contact.height);
        v.field("max_rel_speed", c.contact.max_rel_speed);
    });
    v.section("scenario", [&] {
        v.field("uav_start_offset", c.scenario.uav_start_offset);
        v.field("uav_start_yaw_deg", Degrees{c.scenario.uav_start_yaw});
        v.field("truck_start_distance", c.scenario.truck_start_distance);
        v.field("truck_lateral_offset", c.scenario.truck_lateral_offset);
        v.field("truck_speed", c.scenario.truck_speed);
    });
    v.section("randomization", [&] {
        v.field("uav_start_xy", c.randomization.uav_start_xy);
        v.field("uav_start_yaw_deg", Degrees{c.randomization.uav_start_yaw});
        v.field("truck_start_distance", c.randomization.truck_start_distance);
        v.field("truck_lateral_offset", c.randomization.truck_lateral_offset);
        v.field("truck_speed", c.randomization.truck_speed);
    });
}

class Reader {
public:
    explicit Reader(const YAML::Node& root) : root_(root) {
        if (!root_.IsNull() && !root_.IsMap()) {
            throw ConfigError("", "top level must be a mapping");
        }
    }

    void section(const std::string& name, const std::function<void()>& body) {
        sections_.insert(name);
        const YAML::Node& root = root_;
        const YAML::Node node = root.IsMap() ? root[name] : YAML::Node();
        if (!node.IsDefined() || node.IsNull()) {
            return;
        }
        if (!node.IsMap()) {
            throw ConfigError(name, "section must be a mapping");
        }
        current_.reset(node);
        prefix_ = name;
        known_.clear();
        body();
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!known_.contains(key)) {
                throw ConfigError(prefix_ + "." + key, "unknown key");
            }
        }
    }

    void finish() const {
        if (!root_.IsMap()) {
            return;
        }
        for (const auto& kv : root_) {
            const auto key = kv.first.as<std::string>();
            if (!sections_.contains(key)) {
                throw ConfigError(key, "unknown section");
            }
        }
    }

    template <class T>
    void field(const std::string& key, T& value) {
        known_.insert(key);
        const YAML::Node& section = current_;
        const YAML::Node node = section[key];
        if (!node.IsDefined() || node.IsNull()) {
            return;
        }
        try {
            convert(node, value);
        } catch (const YAML::Exception& e) {
            throw ConfigError(prefix_ + "." + key, "bad value: " + std::string(e.what()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(prefix_ + "." + key, e.what());
        }
    }

    void field(const std::string& key, Degrees value) {
        double deg = value.radians / kDegree;
        field(key, deg);
        value.radians = deg * kDegree;
    }

private:
    static void convert(const YAML::Node& n, double& v) { v = n.as<double>(); }
    static void convert(const YAML::Node& n, int& v) { v = n.as<int>(); }
    static void convert(const YAML::Node& n, std::uint64_t& v) { v = n.as<std::uint64_t>(); }

    static std::vector<double> numbers(const YAML::Node& n, std::size_t size) {
        if (!n.IsSequence() || n.size() != size) {
            throw std::invalid_argument("expected a list of " + std::to_string(size) + " numbers");
        }
        std::vector<double> out;
        for (const auto& x : n) {
            out.push_back(x.as<double>());
        }
        return out;
    }

    static void convert(const YAML::Node& n, Vec3& v) {
        const auto x = numbers(n, 3);
        v = Vec3(x[0], x[1], x[2]);
    }

    static void convert(const YAML::Node& n, Eigen::Vector2d& v) {
        const auto x = numbers(n, 2);
        v = Eigen::Vector2d(x[0], x[1]);
    }

    static void convert(const YAML::Node& n, std::vector<LaserRay>& rays) {
        if (!n.IsSequence()) {
            throw std::invalid_argument("expected a list of [tilt_deg, azimuth_deg] pairs");
        }
        rays.clear();
        for (const auto& item : n) {
            const auto x = numbers(item, 2);
            rays.push_back({x[0] * kDegree, x[1] * kDegree});
        }
    }

    static void convert(const YAML::Node& n, SwitchCriterion& v) {
        const auto s = n.as<std::string>();
        if (s == "vision") {
            v = SwitchCriterion::kVisionBased;
        } else if (s == "timing") {
            v = SwitchCriterion::kTimingBased;
        } else {
            throw std::invalid_argument("expected 'vision' or 'timing'");
        }
    }

    static void convert(const YAML::Node& n, MissionPhase& v) {
        const auto p = phase_from_string(n.as<std::string>());
        if (!p) {
            throw std::invalid_argument("unknown phase name");
        }
        v = *p;
    }

    YAML::Node root_;
    YAML::Node current_;
    std::string prefix_;
    std::set<std::string> known_;
    std::set<std::string> sections_;
};

class Writer {
public:
    Writer() {
        out_.SetDoublePrecision(17);
        out_ << YAML::BeginMap;
    }

    void section(const std::string& name, const std::function<void()>& body) {
        out_ << YAML::Key << name << YAML::Value << YAML::BeginMap;
        body();
        out_ << YAML::EndMap;
    }

    template <class T>
    void field(const std::string& key, T& value) {
        out_ << YAML::Key << key << YAML::Value;
        emit(value);
    }

    void field(const std::string& key, Degrees value) {
        out_ << YAML::Key << key << YAML::Value << value.radians / kDegree;
    }

    std::string finish() {
        out_ << YAML::EndMap;
        return std::string(out_.c_str()) + "\n";
    }

private:
    void emit(double v) { out_ << v; }
    void emit(int v) { out_ << v; }
    void emit(std::uint64_t v) { out_ << v; }
    void emit(const Vec3& v) { out_ << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z() << YAML::EndSeq; }
    void emit(const Eigen::Vector2d& v) { out_ << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << YAML::EndSeq; }
    void emit(const std::vector<LaserRay>& rays) {
        out_ << YAML::BeginSeq;
        for (const auto& r : rays) {
            out_ << YAML::Flow << YAML::BeginSeq << r.tilt / kDegree << r.azimuth / kDegree << YAML::EndSeq;
        }
        out_ << YAML::EndSeq;
    }
    void emit(SwitchCriterion v) { out_ << std::string(to_string(v)); }
    void emit(MissionPhase v) { out_ << std::string(servoland::to_string(v)); }

    YAML::Emitter out_;
};

template <class F>
void check_section(const std::string& path, F&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) {
        throw ConfigError(path, message);
    }
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

void ExperimentConfig::validate() const {
    require(n_runs >= 1, "experiment.n_runs", "must be at least 1");
    require(max_duration > 0.0 && std::isfinite(max_duration), "experiment.max_duration", "must be positive");
    require(threads >= 0, "experiment.threads", "must be non-negative");
    check_section("sim", [&] { sim.validate(); });
    check_section("camera", [&] { camera.validate(); });
    require(deck_radius > 0.0 && deck_radius <= kDeckSize / 2.0, "camera.deck_radius",
            "must be positive and fit on the deck");
    require(contour_samples >= 8, "camera.contour_samples", "must be at least 8");
    check_section("detection", [&] { detection.validate(); });
    check_section("lasers", [&] { lasers.validate(); });
    check_section("trigger", [&] { trigger.validate(); });
    require(servo.lambda > 0.0, "servo.lambda", "must be positive");
    require(servo.gimbal_gain > 0.0, "servo.gimbal_gain", "must be positive");
    require(servo.mount_offset.allFinite(), "servo.mount_offset", "must be finite");
    require(servo.goal_height - servo.mount_offset.z() > 0.0, "servo.goal_height",
            "camera must sit above the deck at the goal");
    check_section("mission", [&] { mission.validate(); });
    require(contact.height > 0.0 && contact.max_rel_speed > 0.0, "contact", "tolerances must be positive");
    require(scenario.uav_start_offset.allFinite(), "scenario.uav_start_offset", "must be finite");
    require(scenario.truck_speed >= 0.0, "scenario.truck_speed", "must be non-negative");
    require(std::isfinite(scenario.truck_start_distance) && std::isfinite(scenario.truck_lateral_offset),
            "scenario", "truck placement must be finite");
    require(randomization.uav_start_xy >= 0.0 && randomization.uav_start_yaw >= 0.0 &&
                randomization.truck_start_distance >= 0.0 && randomization.truck_lateral_offset >= 0.0 &&
                randomization.truck_speed >= 0.0,
            "randomization", "half-widths must be non-negative");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", "YAML syntax error: " + std::string(e.what()));
    }
    ExperimentConfig config;
    Reader reader(root);
    describe(config, reader);
    reader.finish();
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& config) {
    ExperimentConfig copy = config;
    Writer writer;
    describe(copy, writer);
    return writer.finish();
}

}  // namespace servoland
