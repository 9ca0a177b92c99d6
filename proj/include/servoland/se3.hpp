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

#include <Eigen/Dense>

/// Rigid-body geometry used by the servo loop.
///
/// Frame conventions (used everywhere in the library):
///   world  - NED: x north, y east, z down. Ground is the plane z = 0.
///   body   - FRD: x forward, y right, z down. Yaw-only attitude.
///   camera - z along the optical axis, x right and y down in the image.
namespace servoland {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RotationMatrix = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VelocityTwistMatrix = Eigen::Matrix<double, 6, 6>;

/// Cross-product matrix: skew(t) * v == t.cross(v).
///
///            [  0  -tz   ty ]
/// [t]x   =   [  tz   0  -tx ]
///            [ -ty   tx   0 ]
Mat3 skew(const Vec3& t);

/// Elementary rotations (active, right-handed).
RotationMatrix rot_x(double angle);
RotationMatrix rot_y(double angle);
RotationMatrix rot_z(double angle);

/// True when R is orthonormal with det(R) = +1 within tol.
bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Proper rigid transform p' = R p + t.
///
/// A transform named `a_from_b` maps coordinates expressed in frame b into
/// frame a. Composition follows the usual convention:
/// (a_from_b * b_from_c).apply(p) == a_from_b.apply(b_from_c.apply(p)).
class RigidTransform {
public:
    RigidTransform();
    RigidTransform(const RotationMatrix& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {RotationMatrix::Identity(), t}; }
    static RigidTransform from_rotation(const RotationMatrix& r) { return {r, Vec3::Zero()}; }

    const RotationMatrix& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    RigidTransform inverse() const;
    RigidTransform operator*(const RigidTransform& rhs) const;

    bool is_approx(const RigidTransform& other, double tol = 1e-9) const;

private:
    RotationMatrix rotation_;
    Vec3 translation_;
};

/// Spatial velocity: linear velocity of the frame origin and angular velocity,
/// both expressed in the same frame.
struct Twist {
    Vec3 linear = Vec3::Zero();
    Vec3 angular = Vec3::Zero();

    Vec6 stacked() const;
    static Twist from_stacked(const Vec6& v);
};

/// 6x6 matrix that carries a twist expressed in frame b (at b's origin) into
/// frame c (at c's origin), given the transform c_from_b:
///
///   cVb = [ cRb   [ctb]x cRb ]
///         [  0        cRb    ]
///
/// velocity_twist(A * B) == velocity_twist(A) * velocity_twist(B).
VelocityTwistMatrix velocity_twist(const RigidTransform& c_from_b);

/// Camera axes expressed in the body frame when all gimbal angles are zero:
/// the optical axis looks along body +x, image x along body +y, image y along
/// body +z.
RotationMatrix camera_mount_base();

/// Orientation of the camera frame in the body frame (body_R_camera) for the
/// given gimbal angles. The gimbal rotation is Rz(yaw) * Ry(pitch) * Rx(roll)
/// about body axes, applied to camera_mount_base(). Pitch of -pi/2 points the
/// optical axis straight down.
RotationMatrix rotation_from_gimbal(double roll, double pitch, double yaw);

}  // namespace servoland
