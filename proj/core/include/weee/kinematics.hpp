#pragma once

#include <array>
#include <stdexcept>

#include "weee/geometry.hpp"

namespace weee::kin {

/// Geometric model of a three-arm delta parallel robot.
/// All lengths in mm, all angles in rad. The arm offset angles around the
/// base are fixed at {0, 2pi/3, 4pi/3}.
struct DeltaParams {
    double base_radius_R = 150.0;
    double eef_radius_r = 54.0;
    double arm_length_l = 260.0;
    double forearm_length_L = 820.0;
    double reduction_ratio = 25.0;  // carried for completeness, unused here

    void validate() const;
};

/// Actuated arm angles, measured from the base plane, positive downward.
struct JointAngles {
    std::array<double, 3> theta{0.0, 0.0, 0.0};

    double operator[](int i) const { return theta[static_cast<size_t>(i)]; }
    double& operator[](int i) { return theta[static_cast<size_t>(i)]; }
};

/// End-effector position in the robot base frame (z negative below base).
struct EefPose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

struct JointLimits {
    double min_rad = -0.6;
    double max_rad = 1.5;

    bool contains(const JointAngles& j, double tol = 1e-12) const {
        for (double t : j.theta)
            if (t < min_rad - tol || t > max_rad + tol) return false;
        return true;
    }
};

struct KinematicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// The three forearm spheres have no common point.
struct NoIntersection : KinematicsError {
    using KinematicsError::KinematicsError;
};
/// Sphere centers are collinear; the intersection is not a point pair.
struct Degenerate : KinematicsError {
    using KinematicsError::KinematicsError;
};
/// Pose outside the arm's reachable shell (negative discriminant).
struct Unreachable : KinematicsError {
    using KinematicsError::KinematicsError;
};
/// Quadratic leading coefficient vanished and no linear fallback exists.
struct Singular : KinematicsError {
    using KinematicsError::KinematicsError;
};

/// Forward kinematics via three-sphere intersection. Of the two solutions
/// the lower-z one (robot hanging below its base) is returned.
EefPose forward_kinematics(const DeltaParams& params, const JointAngles& joints);

/// Closed-form inverse kinematics per arm (tan-half-angle root). Returns the
/// branch whose forward image reproduces the pose; throws Unreachable when no
/// branch does.
JointAngles inverse_kinematics(const DeltaParams& params, const EefPose& pose);

/// Left-hand side of the three constraint equations evaluated directly;
/// all-zero for any consistent (joints, pose) pair. Units mm^2.
std::array<double, 3> constraint_residual(const DeltaParams& params, const JointAngles& joints,
                                          const EefPose& pose);

/// True iff inverse_kinematics succeeds and the result lies within limits.
bool is_reachable(const DeltaParams& params, const EefPose& pose,
                  const JointLimits& limits = JointLimits{});

}  // namespace weee::kin
