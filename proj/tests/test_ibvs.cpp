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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "servoland/camera.hpp"
#include "servoland/ibvs.hpp"
#include "servoland/rng.hpp"

namespace {

using namespace servoland;

// Image-point velocity by finite differences of the moving point
// P' = -v - w x P seen from a camera with twist (v, w).
Eigen::Vector2d numeric_point_rate(const Vec3& p, const Vec6& twist) {
    const double h = 1e-6;
    const Vec3 rate = -twist.head<3>() - twist.tail<3>().cross(p);
    const Vec3 fwd = p + h * rate;
    const Vec3 bwd = p - h * rate;
    return {(fwd.x() / fwd.z() - bwd.x() / bwd.z()) / (2 * h), (fwd.y() / fwd.z() - bwd.y() / bwd.z()) / (2 * h)};
}

FeatureVector square_features(double cx, double cy, double half) {
    return FeatureVector({NormalizedPoint{cx, cy}, {cx - half, cy - half}, {cx + half, cy - half},
                          {cx + half, cy + half}, {cx - half, cy + half}});
}

ServoGoal test_goal() {
    ServoGoal g;
    g.s_star = square_features(0.0, 0.2, 1.6);
    g.z_star = 0.45;
    g.lambda = 0.8;
    g.gimbal_center_offset = g.s_star.center();
    return g;
}

TEST(InteractionBlock, MatchesFiniteDifferences) {
    RngStream rng(1);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.3, 10));
        Vec6 twist;
        for (int k = 0; k < 6; ++k) {
            twist(k) = rng.uniform(-1, 1);
        }
        const Eigen::Vector2d analytic = interaction_block(p.x() / p.z(), p.y() / p.z(), p.z()) * twist;
        const Eigen::Vector2d numeric = numeric_point_rate(p, twist);
        EXPECT_NEAR(analytic(0), numeric(0), 1e-6 * (1 + numeric.norm()));
        EXPECT_NEAR(analytic(1), numeric(1), 1e-6 * (1 + numeric.norm()));
    }
}

TEST(InteractionBlock, KnownEntries) {
    const InteractionBlock l = interaction_block(0.5, -0.25, 2.0);
    EXPECT_DOUBLE_EQ(l(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(l(0, 2), 0.25);
    EXPECT_DOUBLE_EQ(l(0, 3), -0.125);
    EXPECT_DOUBLE_EQ(l(0, 4), -1.25);
    EXPECT_DOUBLE_EQ(l(0, 5), -0.25);
    EXPECT_DOUBLE_EQ(l(1, 1), -0.5);
    EXPECT_DOUBLE_EQ(l(1, 3), 1.0 + 0.0625);
    EXPECT_DOUBLE_EQ(l(1, 5), -0.5);
}

TEST(InteractionBlock, RejectsNonPositiveDepth) {
    EXPECT_THROW(interaction_block(0, 0, 0.0), std::invalid_argument);
    EXPECT_THROW(interaction_block(0, 0, -1.0), std::invalid_argument);
}

TEST(GoalInteraction, StacksOneBlockPerPoint) {
    const FeatureVector s = square_features(0.1, 0.2, 0.5);
    const InteractionMatrix l = build_goal_interaction(s, 0.45);
    for (int i = 0; i < FeatureVector::kPoints; ++i) {
        EXPECT_TRUE((l.block<2, 6>(2 * i, 0).isApprox(interaction_block(s[i].x, s[i].y, 0.45))));
    }
}

TEST(RobotJacobian, SelectsControlledAxes) {
    const RobotJacobian j = robot_jacobian();
    Eigen::Vector4d q(1, 2, 3, 4);
    Vec6 expected;
    expected << 1, 2, 3, 0, 0, 4;
    EXPECT_EQ(j * q, expected);
}

void expect_moore_penrose(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p) {
    EXPECT_TRUE((a * p * a).isApprox(a, 1e-9));
    EXPECT_TRUE((p * a * p).isApprox(p, 1e-9));
    EXPECT_TRUE((a * p).transpose().isApprox(a * p, 1e-9));
    EXPECT_TRUE((p * a).transpose().isApprox(p * a, 1e-9));
}

TEST(PseudoInverse, MoorePenroseConditionsFullRank) {
    RngStream rng(4);
    Eigen::MatrixXd a(10, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a.data()[i] = rng.normal();
    }
    int rank = 0;
    const Eigen::MatrixXd p = pseudo_inverse(a, 1e-8, &rank);
    EXPECT_EQ(rank, 4);
    EXPECT_EQ(p.rows(), 4);
    EXPECT_EQ(p.cols(), 10);
    expect_moore_penrose(a, p);
    EXPECT_TRUE((p * a).isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-9));
}

TEST(PseudoInverse, MoorePenroseConditionsRankDeficient) {
    RngStream rng(5);
    Eigen::MatrixXd u(10, 2);
    Eigen::MatrixXd v(2, 4);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        u.data()[i] = rng.normal();
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v.data()[i] = rng.normal();
    }
    const Eigen::MatrixXd a = u * v;
    int rank = 0;
    const Eigen::MatrixXd p = pseudo_inverse(a, 1e-8, &rank);
    EXPECT_EQ(rank, 2);
    expect_moore_penrose(a, p);
}

TEST(ServoCommand, ZeroErrorReturnsFeedForward) {
    const ServoGoal goal = test_goal();
    const InteractionMatrix l = build_goal_interaction(goal.s_star, goal.z_star);
    const CommandVelocity v_ff{4.17, -0.2, 0.0, 0.0};
    const ServoResult r = servo_command(goal.s_star, goal, l, VelocityTwistMatrix::Identity(), v_ff);
    EXPECT_EQ(r.command, v_ff);
    EXPECT_DOUBLE_EQ(r.error_norm, 0.0);
    EXPECT_EQ(r.rank, 4);
    EXPECT_FALSE(r.rank_deficient);
}

TEST(ServoCommand, CommandReducesTheError) {
    const ServoGoal goal = test_goal();
    const InteractionMatrix l = build_goal_interaction(goal.s_star, goal.z_star);
    const ServoMatrix m = l * robot_jacobian();
    RngStream rng(8);
    for (int i = 0; i < 50; ++i) {
        FeatureVector::Stacked s = goal.s_star.stacked();
        for (int k = 0; k < FeatureVector::kSize; ++k) {
            s(k) += rng.uniform(-0.05, 0.05);
        }
        const FeatureVector f = FeatureVector::from_stacked(s);
        const ServoResult r = servo_command(f, goal, l, VelocityTwistMatrix::Identity(), {});
        const FeatureVector::Stacked e = s - goal.s_star.stacked();
        const FeatureVector::Stacked e_dot = m * r.command.as_vector();
        EXPECT_LT(e.dot(e_dot), 0.0);
        EXPECT_NEAR(r.error_norm, e.norm(), 1e-12);
    }
}

TEST(ServoCommand, PureScaleErrorCommandsDescent) {
    // Deck appears smaller than at the goal: the camera is too far away and
    // must move along its optical axis.
    ServoGoal goal = test_goal();
    goal.s_star = square_features(0.0, 0.0, 1.6);
    const InteractionMatrix l = build_goal_interaction(goal.s_star, goal.z_star);
    const ServoResult r = servo_command(square_features(0.0, 0.0, 1.2), goal, l, VelocityTwistMatrix::Identity(), {});
    EXPECT_GT(r.command.vz, 0.0);
    EXPECT_NEAR(r.command.vx, 0.0, 1e-12);
    EXPECT_NEAR(r.command.vy, 0.0, 1e-12);
    EXPECT_NEAR(r.command.omega, 0.0, 1e-12);
}

TEST(ServoCommand, FlagsRankDeficiency) {
    ServoGoal goal = test_goal();
    goal.s_star = square_features(0.0, 0.0, 0.0);
    const InteractionMatrix l = build_goal_interaction(goal.s_star, goal.z_star);
    const ServoResult r = servo_command(square_features(0.1, 0.0, 0.0), goal, l, VelocityTwistMatrix::Identity(), {});
    EXPECT_TRUE(r.rank_deficient);
    EXPECT_LT(r.rank, 4);
    EXPECT_TRUE(r.command.is_finite());
}

TEST(GimbalCommand, PitchesTowardTheDeck) {
    const ServoGoal goal = test_goal();
    NormalizedPoint below = goal.gimbal_center_offset;
    below.y += 0.1;
    EXPECT_NEAR(gimbal_command(below, goal), -goal.gimbal_gain * 0.1, 1e-12);
    NormalizedPoint above = goal.gimbal_center_offset;
    above.y -= 0.2;
    EXPECT_NEAR(gimbal_command(above, goal), goal.gimbal_gain * 0.2, 1e-12);
    EXPECT_DOUBLE_EQ(gimbal_command(goal.gimbal_center_offset, goal), 0.0);
}

TEST(FeedForward, RotatesWorldVelocityIntoBody) {
    const CommandVelocity a = feed_forward(Vec3(4.17, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(a.vx, 4.17);
    EXPECT_DOUBLE_EQ(a.omega, 0.0);
    const CommandVelocity b = feed_forward(Vec3(4.17, 0, 0), std::numbers::pi / 2);
    EXPECT_NEAR(b.vx, 0.0, 1e-12);
    EXPECT_NEAR(b.vy, -4.17, 1e-12);
}

TEST(ServoGoal, ValidateRejectsNonPositiveGains) {
    ServoGoal g = test_goal();
    EXPECT_NO_THROW(g.validate());
    g.lambda = 0.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = test_goal();
    g.gimbal_gain = -1.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = test_goal();
    g.z_star = 0.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(InteractionBlock, HandEvaluatedExamples) {
    InteractionBlock expected;
    expected << -2, 0, 0, 0, -1, 0, 0, -2, 0, 1, 0, 0;
    EXPECT_TRUE(interaction_block(0, 0, 0.5).isApprox(expected, 1e-15));
    expected << -2, 0, 0.2, -0.02, -1.01, -0.2, 0, -2, -0.4, 1.04, 0.02, -0.1;
    EXPECT_TRUE(interaction_block(0.1, -0.2, 0.5).isApprox(expected, 1e-12));
}

TEST(InteractionBlock, DepthScalesTranslationalColumnsOnly) {
    const InteractionBlock a = interaction_block(0.3, -0.1, 0.8);
    const InteractionBlock b = interaction_block(0.3, -0.1, 1.6);
    EXPECT_TRUE(b.leftCols<3>().isApprox(a.leftCols<3>() / 2.0, 1e-15));
    EXPECT_TRUE(b.rightCols<3>().isApprox(a.rightCols<3>(), 1e-15));
}

TEST(GoalInteraction, FeaturesAtOriginRepeatTheBlock) {
    const InteractionMatrix l = build_goal_interaction(square_features(0, 0, 0), 0.5);
    for (int i = 0; i < FeatureVector::kPoints; ++i) {
        EXPECT_TRUE((l.block<2, 6>(2 * i, 0).isApprox(interaction_block(0, 0, 0.5))));
    }
}

TEST(PseudoInverse, IdentityAndKnownSingularValues) {
    EXPECT_TRUE(pseudo_inverse(Eigen::MatrixXd::Identity(4, 4)).isApprox(Eigen::MatrixXd::Identity(4, 4)));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(10, 4);
    m(0, 0) = 2.0;
    m(3, 1) = 4.0;
    m(5, 2) = 0.5;
    m(9, 3) = 10.0;
    const Eigen::MatrixXd p = pseudo_inverse(m);
    EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p(1, 3), 0.25);
    EXPECT_DOUBLE_EQ(p(2, 5), 2.0);
    EXPECT_DOUBLE_EQ(p(3, 9), 0.1);
    EXPECT_NEAR(p.cwiseAbs().sum(), 0.5 + 0.25 + 2.0 + 0.1, 1e-15);
}

TEST(ServoCommand, LinearInLambda) {
    ServoGoal goal = test_goal();
    const InteractionMatrix l = build_goal_interaction(goal.s_star, goal.z_star);
    const FeatureVector s = square_features(0.05, 0.1, 1.3);
    const CommandVelocity a = servo_command(s, goal, l, VelocityTwistMatrix::Identity(), {}).command;
    goal.lambda *= 2.0;
    const CommandVelocity b = servo_command(s, goal, l, VelocityTwistMatrix::Identity(), {}).command;
    EXPECT_TRUE(b.as_vector().isApprox(2.0 * a.as_vector(), 1e-12));
}

TEST(GimbalCommand, LinearInGain) {
    ServoGoal goal = test_goal();
    const NormalizedPoint s{0.0, goal.gimbal_center_offset.y + 0.1};
    const double a = gimbal_command(s, goal);
    EXPECT_NEAR(a, -0.05, 1e-12);
    goal.gimbal_gain *= 2.0;
    EXPECT_NEAR(gimbal_command(s, goal), 2.0 * a, 1e-12);
}

TEST(FeedForward, ZeroTruckVelocity) {
    EXPECT_EQ(feed_forward(Vec3::Zero(), 1.0), CommandVelocity{});
}

}  // namespace
