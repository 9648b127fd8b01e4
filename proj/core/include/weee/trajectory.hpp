#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "weee/geometry.hpp"
#include "weee/kinematics.hpp"

namespace weee::traj {

struct TrajectoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidAlpha : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};
struct NonPositiveOffset : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};
struct NonPositiveDuration : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};
struct OutOfDomain : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};
struct UnreachableWaypoint : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};
struct UnreachableSample : TrajectoryError {
    using TrajectoryError::TrajectoryError;
};

/// Four-point pick-and-place path: lift by h, transfer, descend. The
/// curvature factor alpha in [0,1] pulls both intermediate points toward
/// their median, rounding the transfer corner.
struct PiPath {
    Vec3 pick;
    Vec3 place;
    double h = 0.0;
    double alpha = 0.0;
    std::array<Vec3, 4> waypoints{};
};

PiPath build_pi_path(const Vec3& pick, const Vec3& place, double h, double alpha);

/// Knot velocities for one axis: zero at both ends, average of adjacent
/// slopes at interior knots, zeroed where the slopes change sign (or one of
/// them vanishes) so the interpolant stays shape-preserving.
std::vector<double> intermediate_velocities(std::span<const double> positions,
                                            std::span<const double> times);

struct CubicCoeffs {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
};

/// Coefficients of q(t) = a0 + a1 u + a2 u^2 + a3 u^3, u = t - t_k, for one
/// segment with endpoint positions/velocities and duration T.
CubicCoeffs cubic_coefficients(double q_k, double q_k1, double v_k, double v_k1, double T);

/// Per-axis piecewise cubic with shared knot times; C1 at interior knots,
/// at rest at both ends.
class PiecewiseCubicTrajectory {
public:
    struct Sample {
        Vec3 position;
        Vec3 velocity;
        Vec3 acceleration;
    };

    PiecewiseCubicTrajectory() = default;
    PiecewiseCubicTrajectory(std::vector<double> knot_times,
                             std::array<std::vector<CubicCoeffs>, 3> segments,
                             std::array<std::vector<double>, 3> knot_velocities);

    Sample eval(double t) const;

    double start_time() const { return knot_times_.front(); }
    double end_time() const { return knot_times_.back(); }
    const std::vector<double>& knot_times() const { return knot_times_; }
    const std::vector<double>& knot_velocities(int axis) const {
        return knot_velocities_[static_cast<size_t>(axis)];
    }
    const std::vector<CubicCoeffs>& segments(int axis) const {
        return segments_[static_cast<size_t>(axis)];
    }

private:
    std::vector<double> knot_times_;
    std::array<std::vector<CubicCoeffs>, 3> segments_;
    std::array<std::vector<double>, 3> knot_velocities_;
};

/// Spline through the waypoints starting at t0. Knot times are allocated
/// proportionally to inter-waypoint distance; zero-length legs get a small
/// floor share so durations stay positive.
PiecewiseCubicTrajectory build_cartesian_trajectory(std::span<const Vec3> waypoints, double t0,
                                                    double total_time);

struct JointSample {
    double t = 0.0;
    kin::JointAngles joints;
    std::array<double, 3> joint_velocity{0.0, 0.0, 0.0};
};

/// Cartesian spline sampled at a fixed step and converted to joint space.
struct JointTrajectory {
    double dt = 1e-3;
    std::vector<JointSample> samples;
    PiecewiseCubicTrajectory cartesian;

    double start_time() const { return cartesian.start_time(); }
    double end_time() const { return cartesian.end_time(); }
};

JointTrajectory plan_waypoint_move(const kin::DeltaParams& params, std::span<const Vec3> waypoints,
                                   double total_time, double dt, double t0 = 0.0,
                                   const kin::JointLimits& limits = kin::JointLimits{});

JointTrajectory plan_pick_place(const kin::DeltaParams& params, const PiPath& path,
                                double total_time, double dt, double t0 = 0.0,
                                const kin::JointLimits& limits = kin::JointLimits{});

/// CSV schema: t,x,y,z,vx,vy,vz,th1,th2,th3 (s, mm, mm/s, rad).
void write_csv(std::ostream& os, const JointTrajectory& traj);

}  // namespace weee::traj
