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

#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "servoland/rng.hpp"
#include "servoland/world_sim.hpp"

namespace servoland {

/// One point laser. The beam is tilted by `tilt` from body +z (straight
/// down) towards the horizontal direction `azimuth` (measured in the body x-y
/// plane from +x towards +y). azimuth = pi/2 puts the beam in the lateral
/// plane; positive tilt then points to the right.
struct LaserRay {
    double tilt = 0.0;
    double azimuth = 0.0;
};

struct LaserConfig {
    std::vector<LaserRay> rays = default_rays();
    double max_range = 40.0;   // m, reported when nothing is hit
    double noise_sigma = 0.0;  // m

    static std::vector<LaserRay> default_rays();
    void validate() const;
    /// Index of the ray closest to straight down; it doubles as the height sensor.
    std::size_t height_ray() const;
};

struct TriggerConfig {
    double drop_threshold = 1.0;  // m
    double window = 0.2;          // s

    void validate() const;
};

/// Distance along the ray to the first hit against the ground plane or the
/// deck box, or nullopt when nothing is hit.
std::optional<double> cast_ray(const Vec3& origin, const Vec3& direction_world, const TruckState& truck);

/// Range per configured ray, with Gaussian noise on real hits. Rays that hit
/// nothing within max_range report max_range.
std::vector<double> laser_measure(const UAVState& uav, const TruckState& truck, const LaserConfig& cfg,
                                  RngStream& rng);

/// Lateral offset of a tilted ray at the height of the deck top.
double lateral_coverage(double altitude, double deck_top_height, double tilt);

/// Lateral offset where a tilted ray meets the ground.
double ground_offset(double altitude, double tilt);

/// Sudden-drop detector over a sliding time window, one history per ray.
class DropTrigger {
public:
    explicit DropTrigger(TriggerConfig cfg = {});

    /// Feeds one sample per ray at time t (strictly increasing). Returns true
    /// when some ray dropped by more than the threshold within the window.
    bool update(std::span<const double> ranges, double t);

    bool ever_fired() const { return ever_fired_; }
    /// Ray that fired on the last update, if any.
    std::optional<std::size_t> fired_ray() const { return fired_ray_; }
    void reset();

private:
    TriggerConfig cfg_;
    std::vector<std::deque<std::pair<double, double>>> history_;
    std::optional<double> last_t_;
    std::optional<std::size_t> fired_ray_;
    bool ever_fired_ = false;
};

}  // namespace servoland
