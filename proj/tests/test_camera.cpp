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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "servoland/camera.hpp"
#include "servoland/rng.hpp"

namespace {

using namespace servoland;
constexpr double kPi = std::numbers::pi;

// Camera looking straight down (world +z) with image right = east.
RotationMatrix nadir_rotation() {
    RotationMatrix r;
    r.col(0) = Vec3::UnitY();
    r.col(1) = -Vec3::UnitX();
    r.col(2) = Vec3::UnitZ();
    return r;
}

RigidTransform nadir_camera(const Vec3& position) { return {nadir_rotation(), position}; }

RigidTransform deck_at(const Vec3& center) { return RigidTransform::from_translation(center); }

std::vector<PixelPoint> sample_ellipse(const EllipseParams& e, int n, double phase = 0.0) {
    std::vector<PixelPoint> pts;
    for (int i = 0; i < n; ++i) {
        pts.push_back(e.point_at(phase + 2.0 * kPi * i / n));
    }
    return pts;
}

double orientation_gap(double a, double b) {
    const double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

TEST(CameraIntrinsics, NormalizeRoundTrip) {
    const CameraIntrinsics intr;
    const PixelPoint p{100.5, 33.25};
    const PixelPoint back = intr.denormalize(intr.normalize(p));
    EXPECT_DOUBLE_EQ(back.u, p.u);
    EXPECT_DOUBLE_EQ(back.v, p.v);
    EXPECT_DOUBLE_EQ(intr.normalize({intr.cx, intr.cy}).x, 0.0);
    EXPECT_TRUE(intr.in_frame({0.0, 0.0}));
    EXPECT_FALSE(intr.in_frame({-1.0, 10.0}));
    EXPECT_FALSE(intr.in_frame({10.0, 361.0}));
}

TEST(CameraIntrinsics, ValidateRejectsBadValues) {
    CameraIntrinsics intr;
    intr.fx = 0.0;
    EXPECT_THROW(intr.validate(), std::invalid_argument);
    intr = CameraIntrinsics{};
    intr.cx = 700.0;
    EXPECT_THROW(intr.validate(), std::invalid_argument);
    EXPECT_NO_THROW(CameraIntrinsics{}.validate());
}

TEST(ProjectPoint, PinholeGeometry) {
    const CameraIntrinsics intr;
    const RigidTransform cam = nadir_camera(Vec3(0, 0, -4));
    // Straight below: principal point.
    auto p = project_point(Vec3(0, 0, 0), cam, intr);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->u, intr.cx, 1e-12);
    EXPECT_NEAR(p->v, intr.cy, 1e-12);
    // 1 m east at 4 m depth: u offset fx / 4.
    p = project_point(Vec3(0, 1, 0), cam, intr);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->u, intr.cx + intr.fx / 4.0, 1e-9);
    // 1 m north is up in the image.
    p = project_point(Vec3(1, 0, 0), cam, intr);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->v, intr.cy - intr.fy / 4.0, 1e-9);
    // Above the camera: behind the image plane.
    EXPECT_FALSE(project_point(Vec3(0, 0, -5), cam, intr));
}

TEST(ProjectDeckCircle, CentredNadirViewIsACircle) {
    const CameraIntrinsics intr;
    const double h = 3.0;
    const auto c = project_deck_circle(deck_at(Vec3(0, 0, -1.5)), 0.75, nadir_camera(Vec3(0, 0, -1.5 - h)), intr, 64);
    ASSERT_EQ(c.points.size(), 64u);
    EXPECT_DOUBLE_EQ(c.visible_fraction, 1.0);
    const double expected_radius = intr.fx * 0.75 / h;
    for (const auto& p : c.points) {
        EXPECT_NEAR(std::hypot(p.u - intr.cx, p.v - intr.cy), expected_radius, 1e-9);
    }
}

TEST(ProjectDeckCircle, DeckBehindCameraGivesEmptyContour) {
    const auto c = project_deck_circle(deck_at(Vec3(0, 0, -1.5)), 0.75, nadir_camera(Vec3(0, 0, 0.5)),
                                       CameraIntrinsics{}, 64);
    EXPECT_TRUE(c.points.empty());
    EXPECT_DOUBLE_EQ(c.visible_fraction, 0.0);
}

TEST(ProjectDeckCircle, ClippingCountsOnlyInFramePoints) {
    const CameraIntrinsics intr;
    // Deck centre at the right image border: roughly half the contour is visible.
    const double h = 3.0;
    const double east = (intr.width - intr.cx) / intr.fx * h;
    const RigidTransform deck = deck_at(Vec3(0, east, -1.5));
    const RigidTransform cam = nadir_camera(Vec3(0, 0, -1.5 - h));
    const auto clipped = project_deck_circle(deck, 0.75, cam, intr, 64);
    const auto full = project_deck_circle(deck, 0.75, cam, intr, 64, FrameClipping::kNone);
    EXPECT_NEAR(clipped.visible_fraction, 0.5, 0.05);
    EXPECT_DOUBLE_EQ(full.visible_fraction, 1.0);
}

TEST(ProjectDeckCircle, RejectsTooFewSamples) {
    EXPECT_THROW(project_deck_circle(deck_at(Vec3::Zero()), 0.75, nadir_camera(Vec3(0, 0, -3)), CameraIntrinsics{}, 7),
                 std::invalid_argument);
}

TEST(FitEllipse, RecoversKnownParameters) {
    RngStream rng(21);
    for (int i = 0; i < 100; ++i) {
        EllipseParams truth;
        truth.center = {rng.uniform(50, 600), rng.uniform(50, 300)};
        truth.semi_minor = rng.uniform(10, 100);
        truth.semi_major = truth.semi_minor * rng.uniform(1.2, 3.0);
        truth.orientation = rng.uniform(-kPi / 2, kPi / 2);
        const auto pts = sample_ellipse(truth, 64, rng.uniform(0, 1));
        const EllipseParams fit = fit_ellipse(pts);
        EXPECT_NEAR(fit.center.u, truth.center.u, 1e-6);
        EXPECT_NEAR(fit.center.v, truth.center.v, 1e-6);
        EXPECT_NEAR(fit.semi_major, truth.semi_major, 1e-6);
        EXPECT_NEAR(fit.semi_minor, truth.semi_minor, 1e-6);
        EXPECT_LT(orientation_gap(fit.orientation, truth.orientation), 1e-6);
        for (const auto& p : pts) {
            EXPECT_NEAR(fit.algebraic_residual(p), 0.0, 1e-9);
        }
    }
}

TEST(FitEllipse, PartialArcStillRecoversEllipse) {
    EllipseParams truth{{300, 200}, 80, 40, 0.3};
    std::vector<PixelPoint> pts;
    for (int i = 0; i < 30; ++i) {
        pts.push_back(truth.point_at(-1.0 + 2.5 * i / 29.0));
    }
    const EllipseParams fit = fit_ellipse(pts);
    EXPECT_NEAR(fit.center.u, 300, 1e-6);
    EXPECT_NEAR(fit.center.v, 200, 1e-6);
    EXPECT_NEAR(fit.semi_major, 80, 1e-6);
}

TEST(FitEllipse, TooFewPointsIsDegenerate) {
    const auto pts = sample_ellipse({{100, 100}, 30, 20, 0}, 5);
    try {
        fit_ellipse(pts);
        FAIL() << "expected EllipseFitError";
    } catch (const EllipseFitError& e) {
        EXPECT_EQ(e.kind(), EllipseFitError::Kind::kDegenerateInput);
    }
}

TEST(FitEllipse, CollinearPointsAreDegenerate) {
    std::vector<PixelPoint> pts;
    for (int i = 0; i < 20; ++i) {
        pts.push_back({10.0 + i, 20.0 + 2.0 * i});
    }
    try {
        fit_ellipse(pts);
        FAIL() << "expected EllipseFitError";
    } catch (const EllipseFitError& e) {
        EXPECT_EQ(e.kind(), EllipseFitError::Kind::kDegenerateInput);
    }
}

TEST(FitEllipse, HyperbolaIsNotAnEllipse) {
    // Points on both branches of x^2 - y^2 = 1.
    std::vector<PixelPoint> pts;
    for (int i = -6; i <= 6; ++i) {
        const double s = 0.3 * i;
        pts.push_back({100 + 20 * std::cosh(s), 100 + 20 * std::sinh(s)});
        pts.push_back({100 - 20 * std::cosh(s), 100 + 20 * std::sinh(s)});
    }
    try {
        fit_ellipse(pts);
        FAIL() << "expected EllipseFitError";
    } catch (const EllipseFitError& e) {
        EXPECT_EQ(e.kind(), EllipseFitError::Kind::kNotAnEllipse);
    }
}

TEST(ExtractFeatures, CentreAndBoundingBoxOfRotatedEllipse) {
    const CameraIntrinsics intr;
    const EllipseParams e{{350, 150}, 90, 35, 0.7};
    // Oracle: bounding box from a dense contour sample.
    double u_min = 1e9, u_max = -1e9, v_min = 1e9, v_max = -1e9;
    for (int i = 0; i < 200000; ++i) {
        const PixelPoint p = e.point_at(2.0 * kPi * i / 200000);
        u_min = std::min(u_min, p.u);
        u_max = std::max(u_max, p.u);
        v_min = std::min(v_min, p.v);
        v_max = std::max(v_max, p.v);
    }
    const FeatureVector f = extract_features(e, intr);
    const auto px = [&](int i) { return intr.denormalize(f[i]); };
    EXPECT_NEAR(px(FeatureVector::kCenter).u, 350, 1e-9);
    EXPECT_NEAR(px(FeatureVector::kCenter).v, 150, 1e-9);
    EXPECT_NEAR(px(FeatureVector::kTopLeft).u, u_min, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kTopLeft).v, v_min, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kTopRight).u, u_max, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kTopRight).v, v_min, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kBottomRight).u, u_max, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kBottomRight).v, v_max, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kBottomLeft).u, u_min, 1e-6);
    EXPECT_NEAR(px(FeatureVector::kBottomLeft).v, v_max, 1e-6);
}

TEST(FeatureVector, StackingAndSpread) {
    const FeatureVector f({NormalizedPoint{0.1, 0.2}, {-0.9, -0.8}, {1.1, -0.8}, {1.1, 1.2}, {-0.9, 1.2}});
    const auto s = f.stacked();
    EXPECT_DOUBLE_EQ(s(0), 0.1);
    EXPECT_DOUBLE_EQ(s(1), 0.2);
    EXPECT_DOUBLE_EQ(s(9), 1.2);
    const FeatureVector back = FeatureVector::from_stacked(s);
    EXPECT_EQ(back.stacked(), s);
    EXPECT_NEAR(f.corner_spread(), std::sqrt(2.0), 1e-12);
}

TEST(IdealFeatures, NadirViewAtKnownDepth) {
    const CameraIntrinsics intr;
    const double h = 3.0;
    const FeatureVector f = ideal_features(deck_at(Vec3(0, 0, -1.5)), 0.75, nadir_camera(Vec3(0, 0, -1.5 - h)), intr);
    const double r = 0.75 / h;
    EXPECT_NEAR(f.center().x, 0.0, 1e-9);
    EXPECT_NEAR(f.center().y, 0.0, 1e-9);
    EXPECT_NEAR(f[FeatureVector::kTopLeft].x, -r, 1e-9);
    EXPECT_NEAR(f[FeatureVector::kTopLeft].y, -r, 1e-9);
    EXPECT_NEAR(f[FeatureVector::kBottomRight].x, r, 1e-9);
    EXPECT_NEAR(f[FeatureVector::kBottomRight].y, r, 1e-9);
}

TEST(IdealFeatures, ThrowsWhenDeckIsBehind) {
    EXPECT_THROW(ideal_features(deck_at(Vec3(0, 0, -1.5)), 0.75, nadir_camera(Vec3(0, 0, 0)), CameraIntrinsics{}),
                 EllipseFitError);
}

class DeckDetectorTest : public ::testing::Test {
protected:
    CameraIntrinsics intr;
    RigidTransform deck = deck_at(Vec3(0, 0, -1.5));
    RngStream rng{5};
};

TEST_F(DeckDetectorTest, DetectsCentredDeck) {
    DeckDetector det(DetectionModel{}, intr, 0.75);
    const auto d = det.detect(deck, nadir_camera(Vec3(0, 0, -4.5)), 0.0, rng);
    ASSERT_TRUE(d);
    EXPECT_NEAR(d->features.center().x, 0.0, 1e-9);
    EXPECT_NEAR(d->features.center().y, 0.0, 1e-9);
    EXPECT_DOUBLE_EQ(d->visible_fraction, 1.0);
}

TEST_F(DeckDetectorTest, RangeGating) {
    DetectionModel model;
    model.min_range = 0.8;
    model.max_range = 10.0;
    DeckDetector det(model, intr, 0.75);
    EXPECT_FALSE(det.detect(deck, nadir_camera(Vec3(0, 0, -1.5 - 0.6)), 0.0, rng));
    EXPECT_FALSE(det.detect(deck, nadir_camera(Vec3(0, 0, -1.5 - 12.0)), 0.1, rng));
    EXPECT_TRUE(det.detect(deck, nadir_camera(Vec3(0, 0, -1.5 - 3.0)), 0.2, rng));
}

TEST_F(DeckDetectorTest, VisibleFractionGating) {
    DetectionModel model;
    model.min_visible_fraction = 0.6;
    DeckDetector det(model, intr, 0.75);
    const double h = 3.0;
    const double east = (intr.width - intr.cx) / intr.fx * h;  // half the circle out of frame
    EXPECT_FALSE(det.detect(deck_at(Vec3(0, east, -1.5)), nadir_camera(Vec3(0, 0, -1.5 - h)), 0.0, rng));
    EXPECT_FALSE(det.detect(deck_at(Vec3(0, 0, -1.5)), nadir_camera(Vec3(0, 0, 2.0)), 0.1, rng));
}

TEST_F(DeckDetectorTest, DropoutBurstHidesTheDeck) {
    DetectionModel model;
    model.dropout_burst_rate = 1e6;
    model.dropout_burst_len = 1.0;
    DeckDetector det(model, intr, 0.75);
    const RigidTransform cam = nadir_camera(Vec3(0, 0, -4.5));
    EXPECT_TRUE(det.detect(deck, cam, 0.0, rng));
    EXPECT_FALSE(det.detect(deck, cam, 1.0 / 30.0, rng));
    EXPECT_TRUE(det.in_dropout(0.5));
    EXPECT_FALSE(det.in_dropout(1.0 / 30.0 + 1.0));
}

TEST_F(DeckDetectorTest, PixelNoisePerturbsTheCentreSlightly) {
    DetectionModel model;
    model.pixel_noise_sigma = 0.5;
    DeckDetector det(model, intr, 0.75);
    const auto d = det.detect(deck, nadir_camera(Vec3(0, 0, -4.5)), 0.0, rng);
    ASSERT_TRUE(d);
    const PixelPoint c = intr.denormalize(d->features.center());
    const double err = std::hypot(c.u - intr.cx, c.v - intr.cy);
    EXPECT_GT(err, 0.0);
    EXPECT_LT(err, 2.0);
}

TEST(DetectionModel, ValidateRejectsBadValues) {
    DetectionModel m;
    m.min_range = 20.0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = DetectionModel{};
    m.min_visible_fraction = 1.5;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = DetectionModel{};
    m.pixel_noise_sigma = -1.0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ProjectPoint, HandEvaluatedPinhole) {
    const auto p = project_point(Vec3(0.5, 0.0, 2.0), RigidTransform::identity(), CameraIntrinsics{});
    ASSERT_TRUE(p);
    EXPECT_DOUBLE_EQ(p->u, 400.0);
    EXPECT_DOUBLE_EQ(p->v, 180.0);
    const auto axis = project_point(Vec3(0.0, 0.0, 2.0), RigidTransform::identity(), CameraIntrinsics{});
    EXPECT_DOUBLE_EQ(axis->u, 320.0);
    EXPECT_DOUBLE_EQ(axis->v, 180.0);
    EXPECT_FALSE(project_point(Vec3(0.0, 0.0, -1.0), RigidTransform::identity(), CameraIntrinsics{}));
}

TEST(ProjectDeckCircle, TiltedViewForeshortensByCosine) {
    // Optical axis 45 degrees from the deck normal, far away so the
    // projection is close to affine.
    const CameraIntrinsics intr;
    const double range = 60.0;
    const double tilt = kPi / 4;
    const Vec3 deck_center(0, 0, -1.5);
    const Vec3 cam_pos = deck_center + range * Vec3(-std::sin(tilt), 0.0, -std::cos(tilt));
    RotationMatrix r;
    r.col(2) = (deck_center - cam_pos).normalized();
    r.col(0) = Vec3::UnitY();
    r.col(1) = r.col(2).cross(r.col(0));
    const auto c = project_deck_circle(deck_at(deck_center), 0.75, {r, cam_pos}, intr, 64);
    ASSERT_DOUBLE_EQ(c.visible_fraction, 1.0);
    const EllipseParams e = fit_ellipse(c.points);
    EXPECT_NEAR(e.semi_minor / e.semi_major, std::cos(tilt), 0.02 * std::cos(tilt));
}

TEST(FitEllipse, TwentySamplesOfKnownEllipse) {
    const EllipseParams truth{{100, 50}, 40, 20, 0.3};
    const EllipseParams fit = fit_ellipse(sample_ellipse(truth, 20));
    EXPECT_NEAR(fit.center.u, 100, 1e-6);
    EXPECT_NEAR(fit.center.v, 50, 1e-6);
    EXPECT_NEAR(fit.semi_major, 40, 1e-6);
    EXPECT_NEAR(fit.semi_minor, 20, 1e-6);
    EXPECT_NEAR(fit.orientation, 0.3, 1e-6);
}

TEST(FitEllipse, Circle) {
    const EllipseParams fit = fit_ellipse(sample_ellipse({{320, 180}, 80, 80, 0.0}, 32));
    EXPECT_NEAR(fit.semi_major, 80, 1e-6);
    EXPECT_NEAR(fit.semi_minor, 80, 1e-6);
    EXPECT_NEAR(fit.center.u, 320, 1e-6);
}

TEST(FitEllipse, ReproducesProjectedConic) {
    RngStream rng(31);
    const CameraIntrinsics intr;
    const RigidTransform deck = deck_at(Vec3(0, 0, -1.5));
    for (int i = 0; i < 50; ++i) {
        const double h = rng.uniform(1.5, 8.0);
        const RigidTransform cam{nadir_rotation() * rot_x(rng.uniform(-0.2, 0.2)) * rot_y(rng.uniform(-0.2, 0.2)),
                                 Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), -1.5 - h)};
        const auto c = project_deck_circle(deck, 0.75, cam, intr, 64);
        if (c.visible_fraction < 1.0) {
            continue;
        }
        const EllipseParams e = fit_ellipse(c.points);
        for (const auto& p : c.points) {
            EXPECT_LT(std::abs(e.algebraic_residual(p)), 1e-8);
        }
    }
}

TEST(ExtractFeatures, HandEvaluatedCorners) {
    const CameraIntrinsics intr;
    FeatureVector f = extract_features({{320, 180}, 80, 80, 0.0}, intr);
    EXPECT_NEAR(f.center().x, 0.0, 1e-12);
    EXPECT_NEAR(f[FeatureVector::kTopLeft].x, -0.25, 1e-12);
    EXPECT_NEAR(f[FeatureVector::kBottomRight].y, 0.25, 1e-12);
    f = extract_features({{320, 180}, 80, 40, 0.0}, intr);
    EXPECT_NEAR(f[FeatureVector::kTopRight].x, 0.25, 1e-12);
    EXPECT_NEAR(f[FeatureVector::kTopRight].y, -0.125, 1e-12);
    EXPECT_NEAR(f[FeatureVector::kBottomLeft].x, -0.25, 1e-12);
    EXPECT_NEAR(f[FeatureVector::kBottomLeft].y, 0.125, 1e-12);
}

TEST(ExtractFeatures, CornersAverageToCentre) {
    RngStream rng(41);
    const CameraIntrinsics intr;
    for (int i = 0; i < 50; ++i) {
        const EllipseParams e{{rng.uniform(0, 640), rng.uniform(0, 360)}, rng.uniform(20, 100), rng.uniform(5, 20),
                              rng.uniform(-1.5, 1.5)};
        const FeatureVector f = extract_features(e, intr);
        double mx = 0.0;
        double my = 0.0;
        for (int k = FeatureVector::kTopLeft; k <= FeatureVector::kBottomLeft; ++k) {
            mx += f[k].x / 4.0;
            my += f[k].y / 4.0;
        }
        EXPECT_NEAR(mx, f.center().x, 1e-12);
        EXPECT_NEAR(my, f.center().y, 1e-12);
    }
}

TEST_F(DeckDetectorTest, NoiselessDetectionMatchesExactProjection) {
    DeckDetector det(DetectionModel{}, intr, 0.75);
    const RigidTransform cam{nadir_rotation() * rot_x(0.1), Vec3(0.2, -0.1, -5.0)};
    const auto d = det.detect(deck, cam, 0.0, rng);
    ASSERT_TRUE(d);
    const auto exact = fit_ellipse(project_deck_circle(deck, 0.75, cam, intr, 64).points);
    const FeatureVector expected = extract_features(exact, intr);
    EXPECT_LT((d->features.stacked() - expected.stacked()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(DeckDetectorTest, NoisyCentreWithinTwoPixelsAtThreeMetres) {
    DetectionModel model;
    model.pixel_noise_sigma = 0.5;
    DeckDetector det(model, intr, 0.75);
    const RigidTransform cam = nadir_camera(Vec3(0, 0, -4.5));
    int good = 0;
    for (int i = 0; i < 200; ++i) {
        const auto d = det.detect(deck, cam, i / 30.0, rng);
        if (d) {
            const PixelPoint c = intr.denormalize(d->features.center());
            good += std::hypot(c.u - intr.cx, c.v - intr.cy) < 2.0 ? 1 : 0;
        }
    }
    EXPECT_GE(good, 190);
}

}  // namespace
