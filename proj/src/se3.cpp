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

#include "servoland/se3.hpp"

#include <cmath>
#include <numbers>

namespace servoland {

Mat3 skew(const Vec3& t) {
    Mat3 s;
    s << 0.0, -t.z(), t.y(),
         t.z(), 0.0, -t.x(),
         -t.y(), t.x(), 0.0;
    return s;
}

RotationMatrix rot_x(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RotationMatrix r;
    r << 1.0, 0.0, 0.0,
         0.0, c, -s,
         0.0, s, c;
    return r;
}

RotationMatrix rot_y(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RotationMatrix r;
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

RotationMatrix rot_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RotationMatrix r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

bool is_rotation(const Mat3& r, double tol) {
    if (!r.allFinite()) {
        return false;
    }
    const double ortho = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

double wrap_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle + std::numbers::pi, two_pi);
    if (a <= 0.0) {
        a += two_pi;
    }
    return a - std::numbers::pi;
}

RigidTransform::RigidTransform()
    : rotation_(RotationMatrix::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const RotationMatrix& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

RigidTransform RigidTransform::inverse() const {
    const RotationMatrix rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

bool RigidTransform::is_approx(const RigidTransform& other, double tol) const {
    return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
           (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Vec6 Twist::stacked() const {
    Vec6 v;
    v << linear, angular;
    return v;
}

Twist Twist::from_stacked(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
}

VelocityTwistMatrix velocity_twist(const RigidTransform& c_from_b) {
    const RotationMatrix& r = c_from_b.rotation();
    VelocityTwistMatrix v = VelocityTwistMatrix::Zero();
    v.topLeftCorner<3, 3>() = r;
    v.topRightCorner<3, 3>() = skew(c_from_b.translation()) * r;
    v.bottomRightCorner<3, 3>() = r;
    return v;
}

RotationMatrix camera_mount_base() {
    RotationMatrix b;
    // columns: camera x, y, z axes in body coordinates
    b << 0.0, 0.0, 1.0,
         1.0, 0.0, 0.0,
         0.0, 1.0, 0.0;
    return b;
}

RotationMatrix rotation_from_gimbal(double roll, double pitch, double yaw) {
    return rot_z(yaw) * rot_y(pitch) * rot_x(roll) * camera_mount_base();
}

}  // namespace servoland
