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

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "servoland/rng.hpp"
#include "servoland/se3.hpp"

namespace servoland {

struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

struct NormalizedPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Pinhole intrinsics. Defaults describe a 640x360 frame with a ~90 degree
/// horizontal field of view.
struct CameraIntrinsics {
    double fx = 320.0;
    double fy = 320.0;
    double cx = 320.0;
    double cy = 180.0;
    int width = 640;
    int height = 360;

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;
    bool in_frame(const PixelPoint& p) const;
    NormalizedPoint normalize(const PixelPoint& p) const { return {(p.u - cx) / fx, (p.v - cy) / fy}; }
    PixelPoint denormalize(const NormalizedPoint& p) const { return {fx * p.x + cx, fy * p.y + cy}; }
};

/// Ellipse in the image. orientation is the angle of the major axis from the
/// image u axis, in (-pi/2, pi/2].
struct EllipseParams {
    PixelPoint center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double orientation = 0.0;

    PixelPoint point_at(double angle) const;
    /// x'^2/a^2 + y'^2/b^2 - 1 in the ellipse's own axes; zero on the curve.
    double algebraic_residual(const PixelPoint& p) const;
};

/// The five servo features in normalized coordinates: the ellipse center,
/// then the corners of the ellipse's axis-aligned bounding box in the order
/// top-left, top-right, bottom-right, bottom-left (image y grows downwards).
class FeatureVector {
public:
    static constexpr int kPoints = 5;
    static constexpr int kSize = 2 * kPoints;
    using Stacked = Eigen::Matrix<double, kSize, 1>;

    enum Index { kCenter = 0, kTopLeft = 1, kTopRight = 2, kBottomRight = 3, kBottomLeft = 4 };

    FeatureVector() = default;
    explicit FeatureVector(const std::array<NormalizedPoint, kPoints>& points) : points_(points) {}

    const NormalizedPoint& operator[](int i) const { return points_[static_cast<std::size_t>(i)]; }
    NormalizedPoint& operator[](int i) { return points_[static_cast<std::size_t>(i)]; }
    const NormalizedPoint& center() const { return points_[kCenter]; }
    const std::array<NormalizedPoint, kPoints>& points() const { return points_; }

    /// [x0, y0, x1, y1, ...]
    Stacked stacked() const;
    static FeatureVector from_stacked(const Stacked& s);

    /// Mean distance from the four corners to the center.
    double corner_spread() const;

private:
    std::array<NormalizedPoint, kPoints> points_{};
};

/// Stochastic availability model for the deck detector.
struct DetectionModel {
    double max_range = 15.0;             // m
    double min_range = 0.5;              // m
    double min_visible_fraction = 0.35;  // of the sampled contour
    double dropout_burst_rate = 0.0;     // bursts per second
    double dropout_burst_len = 0.0;      // s
    double pixel_noise_sigma = 0.0;      // px

    void validate() const;
};

/// Camera pose is camera-to-world (world_from_camera). Returns nullopt when the
/// point lies behind the camera (depth <= 1e-6 m).
std::optional<PixelPoint> project_point(const Vec3& world_point, const RigidTransform& world_from_camera,
                                        const CameraIntrinsics& intr);

enum class FrameClipping { kClipToFrame, kNone };

struct ProjectedContour {
    std::vector<PixelPoint> points;
    double visible_fraction = 0.0;
};

/// Samples the deck circle (radius in metres, in the deck's x-y plane) at
/// n_samples equally spaced angles and projects each sample. Samples behind
/// the camera are always dropped; out-of-frame samples are dropped unless
/// clipping is disabled.
ProjectedContour project_deck_circle(const RigidTransform& world_from_deck, double radius,
                                     const RigidTransform& world_from_camera, const CameraIntrinsics& intr,
                                     int n_samples, FrameClipping clipping = FrameClipping::kClipToFrame);

class EllipseFitError : public std::runtime_error {
public:
    enum class Kind { kDegenerateInput, kNotAnEllipse };
    EllipseFitError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Direct least-squares ellipse fit with the 4AC - B^2 = 1 constraint, in the
/// numerically stable partitioned form. Requires at least 6 non-collinear
/// points.
EllipseParams fit_ellipse(std::span<const PixelPoint> points);

FeatureVector extract_features(const EllipseParams& ellipse, const CameraIntrinsics& intr);

/// Features of the ideal (noise-free, unclipped) view of the deck circle.
/// Throws EllipseFitError when the circle is not in front of the camera.
FeatureVector ideal_features(const RigidTransform& world_from_deck, double radius,
                             const RigidTransform& world_from_camera, const CameraIntrinsics& intr,
                             int n_samples = 64);

struct Detection {
    FeatureVector features;
    EllipseParams ellipse;
    double visible_fraction = 0.0;
};

/// Deck detector: contour projection, pixel noise, ellipse fit and feature
/// extraction, gated by range, visibility and random dropout bursts.
///
/// Holds the dropout-burst state, so one instance belongs to one simulation.
/// Calls must be made with non-decreasing t.
class DeckDetector {
public:
    DeckDetector(DetectionModel model, CameraIntrinsics intr, double deck_radius, int contour_samples = 64);

    std::optional<Detection> detect(const RigidTransform& world_from_deck, const RigidTransform& world_from_camera,
                                    double t, RngStream& rng);

    bool in_dropout(double t) const { return t < burst_end_; }
    const DetectionModel& model() const { return model_; }

private:
    DetectionModel model_;
    CameraIntrinsics intr_;
    double deck_radius_;
    int contour_samples_;
    double last_t_ = 0.0;
    bool started_ = false;
    double burst_end_ = -1.0;
};

}  // namespace servoland
