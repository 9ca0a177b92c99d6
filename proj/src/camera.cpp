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

#include "servoland/camera.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace servoland {

namespace {

constexpr double kMinDepth = 1e-6;

double wrap_half_turn(double angle) {
    // (-pi/2, pi/2]
    while (angle > std::numbers::pi / 2) {
        angle -= std::numbers::pi;
    }
    while (angle <= -std::numbers::pi / 2) {
        angle += std::numbers::pi;
    }
    return angle;
}

}  // namespace

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw std::invalid_argument("focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("image size must be positive");
    }
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        throw std::invalid_argument("principal point must lie inside the image");
    }
}

bool CameraIntrinsics::in_frame(const PixelPoint& p) const {
    return p.u >= 0.0 && p.u <= static_cast<double>(width) && p.v >= 0.0 && p.v <= static_cast<double>(height);
}

PixelPoint EllipseParams::point_at(double angle) const {
    const double c = std::cos(orientation);
    const double s = std::sin(orientation);
    const double x = semi_major * std::cos(angle);
    const double y = semi_minor * std::sin(angle);
    return {center.u + c * x - s * y, center.v + s * x + c * y};
}

double EllipseParams::algebraic_residual(const PixelPoint& p) const {
    const double c = std::cos(orientation);
    const double s = std::sin(orientation);
    const double du = p.u - center.u;
    const double dv = p.v - center.v;
    const double x = c * du + s * dv;
    const double y = -s * du + c * dv;
    return x * x / (semi_major * semi_major) + y * y / (semi_minor * semi_minor) - 1.0;
}

FeatureVector::Stacked FeatureVector::stacked() const {
    Stacked s;
    for (int i = 0; i < kPoints; ++i) {
        s(2 * i) = points_[static_cast<std::size_t>(i)].x;
        s(2 * i + 1) = points_[static_cast<std::size_t>(i)].y;
    }
    return s;
}

FeatureVector FeatureVector::from_stacked(const Stacked& s) {
    FeatureVector f;
    for (int i = 0; i < kPoints; ++i) {
        f[i] = {s(2 * i), s(2 * i + 1)};
    }
    return f;
}

double FeatureVector::corner_spread() const {
    double sum = 0.0;
    for (int i = kTopLeft; i <= kBottomLeft; ++i) {
        sum += std::hypot((*this)[i].x - center().x, (*this)[i].y - center().y);
    }
    return sum / 4.0;
}

void DetectionModel::validate() const {
    if (!(min_range >= 0.0) || !(min_range < max_range)) {
        throw std::invalid_argument("detection range must satisfy 0 <= min_range < max_range");
    }
    if (!(min_visible_fraction >= 0.0 && min_visible_fraction <= 1.0)) {
        throw std::invalid_argument("min_visible_fraction must lie in [0, 1]");
    }
    if (!(dropout_burst_rate >= 0.0) || !(dropout_burst_len >= 0.0) || !(pixel_noise_sigma >= 0.0)) {
        throw std::invalid_argument("dropout and noise parameters must be non-negative");
    }
}

std::optional<PixelPoint> project_point(const Vec3& world_point, const RigidTransform& world_from_camera,
                                        const CameraIntrinsics& intr) {
    const Vec3 p = world_from_camera.rotation().transpose() * (world_point - world_from_camera.translation());
    if (p.z() <= kMinDepth) {
        return std::nullopt;
    }
    return PixelPoint{intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

ProjectedContour project_deck_circle(const RigidTransform& world_from_deck, double radius,
                                     const RigidTransform& world_from_camera, const CameraIntrinsics& intr,
                                     int n_samples, FrameClipping clipping) {
    if (n_samples < 8) {
        throw std::invalid_argument("project_deck_circle needs at least 8 samples");
    }
    ProjectedContour out;
    out.points.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / n_samples;
        const Vec3 world = world_from_deck.apply(Vec3(radius * std::cos(theta), radius * std::sin(theta), 0.0));
        const auto pixel = project_point(world, world_from_camera, intr);
        if (!pixel) {
            continue;
        }
        if (clipping == FrameClipping::kClipToFrame && !intr.in_frame(*pixel)) {
            continue;
        }
        out.points.push_back(*pixel);
    }
    out.visible_fraction = static_cast<double>(out.points.size()) / n_samples;
    return out;
}

EllipseParams fit_ellipse(std::span<const PixelPoint> points) {
    using Kind = EllipseFitError::Kind;
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n < 6) {
        throw EllipseFitError(Kind::kDegenerateInput, "ellipse fit needs at least 6 points, got " + std::to_string(n));
    }

    // Center and scale the data so the scatter matrices are well conditioned.
    double mu = 0.0;
    double mv = 0.0;
    for (const auto& p : points) {
        mu += p.u;
        mv += p.v;
    }
    mu /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : points) {
        const Eigen::Vector2d d(p.u - mu, p.v - mv);
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(n);
    const double scale = std::sqrt(cov.trace() / 2.0);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw EllipseFitError(Kind::kDegenerateInput, "ellipse fit input points are coincident");
    }
    const Eigen::Vector2d spread = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
    if (spread(0) <= 1e-12 * spread(1)) {
        throw EllipseFitError(Kind::kDegenerateInput, "ellipse fit input points are collinear");
    }

    Eigen::MatrixXd quad(n, 3);
    Eigen::MatrixXd lin(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (points[static_cast<std::size_t>(i)].u - mu) / scale;
        const double y = (points[static_cast<std::size_t>(i)].v - mv) / scale;
        quad.row(i) << x * x, x * y, y * y;
        lin.row(i) << x, y, 1.0;
    }
    // The constrained solve below always yields an ellipse; reject data whose
    // best free conic is a hyperbola or parabola.
    Eigen::MatrixXd design(n, 6);
    design << quad, lin;
    const Eigen::JacobiSVD<Eigen::MatrixXd> free_fit(design, Eigen::ComputeThinV);
    const Eigen::Matrix<double, 6, 1> conic = free_fit.matrixV().col(5);
    const double discriminant = conic(1) * conic(1) - 4.0 * conic(0) * conic(2);
    if (discriminant > -1e-9 * conic.head<3>().squaredNorm()) {
        throw EllipseFitError(Kind::kNotAnEllipse, "points do not lie on an ellipse");
    }

    const Mat3 s1 = quad.transpose() * quad;
    const Mat3 s2 = quad.transpose() * lin;
    const Mat3 s3 = lin.transpose() * lin;
    const Eigen::FullPivLU<Mat3> s3_lu(s3);
    if (!s3_lu.isInvertible()) {
        throw EllipseFitError(Kind::kDegenerateInput, "ellipse fit linear scatter matrix is singular");
    }
    const Mat3 t = -s3_lu.solve(s2.transpose());
    const Mat3 m = s1 + s2 * t;
    // Premultiply by the inverse of the 3x3 constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    Mat3 reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;

    const Eigen::EigenSolver<Mat3> eig(reduced);
    if (eig.info() != Eigen::Success) {
        throw EllipseFitError(Kind::kNotAnEllipse, "ellipse fit eigen decomposition failed");
    }
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::Vector3d quad_coeffs = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
        const auto lambda = eig.eigenvalues()(k);
        const Eigen::Vector3cd vc = eig.eigenvectors().col(k);
        if (std::abs(lambda.imag()) > 1e-9 * (1.0 + std::abs(lambda.real()))) {
            continue;
        }
        const Eigen::Vector3d v = vc.real();
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (cond <= 0.0) {
            continue;
        }
        if (std::abs(lambda.real()) < best_value) {
            best_value = std::abs(lambda.real());
            best = k;
            quad_coeffs = v;
        }
    }
    if (best < 0) {
        throw EllipseFitError(Kind::kNotAnEllipse, "fitted conic is not an ellipse");
    }
    if (quad_coeffs(0) + quad_coeffs(2) < 0.0) {
        quad_coeffs = -quad_coeffs;  // positive-definite quadratic part
    }
    const Eigen::Vector3d lin_coeffs = t * quad_coeffs;

    const double a = quad_coeffs(0);
    const double b = quad_coeffs(1);
    const double c = quad_coeffs(2);
    const double d = lin_coeffs(0);
    const double e = lin_coeffs(1);
    const double f = lin_coeffs(2);

    Eigen::Matrix2d q;
    q << a, b / 2.0, b / 2.0, c;
    const Eigen::Vector2d center = q.ldlt().solve(Eigen::Vector2d(-d / 2.0, -e / 2.0));
    const double f0 = f + (d * center(0) + e * center(1)) / 2.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(q);
    const double l_small = qe.eigenvalues()(0);
    const double l_large = qe.eigenvalues()(1);
    const double major_sq = -f0 / l_small;
    const double minor_sq = -f0 / l_large;
    if (!(major_sq > 0.0) || !(minor_sq > 0.0) || !std::isfinite(major_sq) || !std::isfinite(minor_sq)) {
        throw EllipseFitError(Kind::kNotAnEllipse, "fitted conic is an imaginary or degenerate ellipse");
    }
    const Eigen::Vector2d major_dir = qe.eigenvectors().col(0);

    EllipseParams out;
    out.center = {mu + scale * center(0), mv + scale * center(1)};
    out.semi_major = scale * std::sqrt(major_sq);
    out.semi_minor = scale * std::sqrt(minor_sq);
    out.orientation = wrap_half_turn(std::atan2(major_dir(1), major_dir(0)));
    return out;
}

FeatureVector extract_features(const EllipseParams& ellipse, const CameraIntrinsics& intr) {
    const double c = std::cos(ellipse.orientation);
    const double s = std::sin(ellipse.orientation);
    const double a = ellipse.semi_major;
    const double b = ellipse.semi_minor;
    const double half_w = std::sqrt(a * a * c * c + b * b * s * s);
    const double half_h = std::sqrt(a * a * s * s + b * b * c * c);
    const PixelPoint& o = ellipse.center;
    return FeatureVector({
        intr.normalize(o),
        intr.normalize({o.u - half_w, o.v - half_h}),
        intr.normalize({o.u + half_w, o.v - half_h}),
        intr.normalize({o.u + half_w, o.v + half_h}),
        intr.normalize({o.u - half_w, o.v + half_h}),
    });
}

FeatureVector ideal_features(const RigidTransform& world_from_deck, double radius,
                             const RigidTransform& world_from_camera, const CameraIntrinsics& intr, int n_samples) {
    const auto contour =
        project_deck_circle(world_from_deck, radius, world_from_camera, intr, n_samples, FrameClipping::kNone);
    if (contour.visible_fraction < 1.0) {
        throw EllipseFitError(EllipseFitError::Kind::kDegenerateInput, "deck circle is not fully in front of the camera");
    }
    return extract_features(fit_ellipse(contour.points), intr);
}

DeckDetector::DeckDetector(DetectionModel model, CameraIntrinsics intr, double deck_radius, int contour_samples)
    : model_(model), intr_(intr), deck_radius_(deck_radius), contour_samples_(contour_samples) {
    model_.validate();
    intr_.validate();
    if (!(deck_radius_ > 0.0)) {
        throw std::invalid_argument("deck radius must be positive");
    }
}

std::optional<Detection> DeckDetector::detect(const RigidTransform& world_from_deck,
                                              const RigidTransform& world_from_camera, double t, RngStream& rng) {
    const double elapsed = started_ ? t - last_t_ : 0.0;
    started_ = true;
    last_t_ = t;
    if (model_.dropout_burst_rate > 0.0 && model_.dropout_burst_len > 0.0) {
        const double start_probability = 1.0 - std::exp(-model_.dropout_burst_rate * elapsed);
        const double draw = rng.uniform();
        if (!in_dropout(t) && draw < start_probability) {
            burst_end_ = t + model_.dropout_burst_len;
        }
    }

    const double distance = (world_from_camera.translation() - world_from_deck.translation()).norm();
    if (distance < model_.min_range || distance > model_.max_range || in_dropout(t)) {
        return std::nullopt;
    }
    ProjectedContour contour =
        project_deck_circle(world_from_deck, deck_radius_, world_from_camera, intr_, contour_samples_);
    if (contour.visible_fraction < model_.min_visible_fraction || contour.points.size() < 6) {
        return std::nullopt;
    }
    if (model_.pixel_noise_sigma > 0.0) {
        for (auto& p : contour.points) {
            p.u += rng.normal(0.0, model_.pixel_noise_sigma);
            p.v += rng.normal(0.0, model_.pixel_noise_sigma);
        }
    }
    try {
        const EllipseParams ellipse = fit_ellipse(contour.points);
        return Detection{extract_features(ellipse, intr_), ellipse, contour.visible_fraction};
    } catch (const EllipseFitError&) {
        return std::nullopt;
    }
}

}  // namespace servoland
