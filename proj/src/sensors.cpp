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

#include "servoland/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace servoland {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

Vec3 ray_direction_body(const LaserRay& ray) {
    return {std::sin(ray.tilt) * std::cos(ray.azimuth), std::sin(ray.tilt) * std::sin(ray.azimuth),
            std::cos(ray.tilt)};
}

// Slab test against an axis-aligned box; returns the entry distance.
std::optional<double> intersect_box(const Vec3& origin, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(dir(i)) < 1e-12) {
            if (origin(i) < lo(i) || origin(i) > hi(i)) {
                return std::nullopt;
            }
            continue;
        }
        double t0 = (lo(i) - origin(i)) / dir(i);
        double t1 = (hi(i) - origin(i)) / dir(i);
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
        if (t_near > t_far) {
            return std::nullopt;
        }
    }
    if (t_far < 0.0) {
        return std::nullopt;
    }
    return std::max(t_near, 0.0);
}

}  // namespace

std::vector<LaserRay> LaserConfig::default_rays() {
    const double lateral = std::numbers::pi / 2.0;
    return {{0.0, lateral}, {30.0 * kDegree, lateral}, {-30.0 * kDegree, lateral}};
}

void LaserConfig::validate() const {
    if (rays.empty() || rays.size() > 8) {
        throw std::invalid_argument("laser configuration needs between 1 and 8 rays");
    }
    for (const auto& r : rays) {
        if (!std::isfinite(r.tilt) || !std::isfinite(r.azimuth) || std::abs(r.tilt) >= std::numbers::pi / 2.0) {
            throw std::invalid_argument("laser tilt must be finite and below 90 degrees");
        }
    }
    if (!(max_range > 0.0) || !(noise_sigma >= 0.0)) {
        throw std::invalid_argument("laser max_range must be positive and noise_sigma non-negative");
    }
}

std::size_t LaserConfig::height_ray() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rays.size(); ++i) {
        if (std::abs(rays[i].tilt) < std::abs(rays[best].tilt)) {
            best = i;
        }
    }
    return best;
}

void TriggerConfig::validate() const {
    if (!(drop_threshold > 0.0) || !(window > 0.0)) {
        throw std::invalid_argument("trigger threshold and window must be positive");
    }
}

std::optional<double> cast_ray(const Vec3& origin, const Vec3& direction_world, const TruckState& truck) {
    std::optional<double> best;
    if (direction_world.z() > 1e-12 && origin.z() <= 0.0) {
        best = -origin.z() / direction_world.z();
    }
    // deck box: footprint kDeckSize x kDeckSize, from the deck top down to the ground
    const RigidTransform deck = truck.world_from_deck();
    const Vec3 o = deck.rotation().transpose() * (origin - deck.translation());
    const Vec3 d = deck.rotation().transpose() * direction_world;
    const double half = kDeckSize / 2.0;
    const auto box = intersect_box(o, d, Vec3(-half, -half, 0.0), Vec3(half, half, truck.deck_height));
    if (box && (!best || *box < *best)) {
        best = box;
    }
    return best;
}

std::vector<double> laser_measure(const UAVState& uav, const TruckState& truck, const LaserConfig& cfg,
                                  RngStream& rng) {
    std::vector<double> out;
    out.reserve(cfg.rays.size());
    const RotationMatrix r = rot_z(uav.yaw);
    for (const auto& ray : cfg.rays) {
        const auto hit = cast_ray(uav.position, r * ray_direction_body(ray), truck);
        if (!hit || *hit > cfg.max_range) {
            out.push_back(cfg.max_range);
            continue;
        }
        double range = *hit;
        if (cfg.noise_sigma > 0.0) {
            range = std::max(0.0, range + rng.normal(0.0, cfg.noise_sigma));
        }
        out.push_back(range);
    }
    return out;
}

double lateral_coverage(double altitude, double deck_top_height, double tilt) {
    if (!(altitude > deck_top_height)) {
        throw std::invalid_argument("lateral_coverage: altitude must be above the deck top");
    }
    return (altitude - deck_top_height) * std::tan(tilt);
}

double ground_offset(double altitude, double tilt) {
    return altitude * std::tan(tilt);
}

DropTrigger::DropTrigger(TriggerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

bool DropTrigger::update(std::span<const double> ranges, double t) {
    if (last_t_ && !(t > *last_t_)) {
        throw std::invalid_argument("DropTrigger::update: time must be strictly increasing");
    }
    last_t_ = t;
    if (history_.size() != ranges.size()) {
        history_.assign(ranges.size(), {});
    }
    fired_ray_.reset();
    constexpr double kSlack = 1e-9;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        auto& h = history_[i];
        h.emplace_back(t, ranges[i]);
        while (!h.empty() && t - h.front().first > cfg_.window + kSlack) {
            h.pop_front();
        }
        double peak = ranges[i];
        for (const auto& sample : h) {
            peak = std::max(peak, sample.second);
        }
        if (peak - ranges[i] > cfg_.drop_threshold && !fired_ray_) {
            fired_ray_ = i;
        }
    }
    if (fired_ray_) {
        ever_fired_ = true;
    }
    return fired_ray_.has_value();
}

void DropTrigger::reset() {
    history_.clear();
    last_t_.reset();
    fired_ray_.reset();
    ever_fired_ = false;
}

}  // namespace servoland
