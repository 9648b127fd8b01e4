#include "weee/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace weee::traj {

PiPath build_pi_path(const Vec3& pick, const Vec3& place, double h, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw InvalidAlpha("curvature factor must lie in [0, 1]");
    if (!(h > 0.0)) throw NonPositiveOffset("vertical offset h must be positive");

    const Vec3 lift{0.0, 0.0, h};
    const Vec3 p1 = pick + lift;
    const Vec3 p2 = place + lift;
    const Vec3 median = 0.5 * (p1 + p2);

    PiPath path;
    path.pick = pick;
    path.place = place;
    path.h = h;
    path.alpha = alpha;
    path.waypoints = {pick, (1.0 - alpha) * p1 + alpha * median,
                      (1.0 - alpha) * p2 + alpha * median, place};
    return path;
}

std::vector<double> intermediate_velocities(std::span<const double> positions,
                                            std::span<const double> times) {
    const size_t n = positions.size();
    std::vector<double> v(n, 0.0);
    if (n < 3) return v;
    for (size_t k = 1; k + 1 < n; ++k) {
        const double d_prev = (positions[k] - positions[k - 1]) / (times[k] - times[k - 1]);
        const double d_next = (positions[k + 1] - positions[k]) / (times[k + 1] - times[k]);
        v[k] = d_prev * d_next > 0.0 ? 0.5 * (d_prev + d_next) : 0.0;
    }
    return v;
}

CubicCoeffs cubic_coefficients(double q_k, double q_k1, double v_k, double v_k1, double T) {
    if (!(T > 0.0)) throw NonPositiveDuration("segment duration must be positive");
    CubicCoeffs c;
    c.a0 = q_k;
    c.a1 = v_k;
    c.a2 = (3.0 * (q_k1 - q_k) / T - 2.0 * v_k - v_k1) / T;
    c.a3 = (2.0 * (q_k - q_k1) / T + v_k + v_k1) / (T * T);
    return c;
}

PiecewiseCubicTrajectory::PiecewiseCubicTrajectory(
    std::vector<double> knot_times, std::array<std::vector<CubicCoeffs>, 3> segments,
    std::array<std::vector<double>, 3> knot_velocities)
    : knot_times_(std::move(knot_times)),
      segments_(std::move(segments)),
      knot_velocities_(std::move(knot_velocities)) {}

PiecewiseCubicTrajectory::Sample PiecewiseCubicTrajectory::eval(double t) const {
    const double t0 = knot_times_.front();
    const double tn = knot_times_.back();
    const double slack = 1e-9 * std::max(1.0, tn - t0);
    if (t < t0 - slack || t > tn + slack)
        throw OutOfDomain("evaluation time outside the trajectory domain");
    t = std::clamp(t, t0, tn);

    auto it = std::upper_bound(knot_times_.begin(), knot_times_.end(), t);
    size_t k = static_cast<size_t>(std::max<ptrdiff_t>(it - knot_times_.begin() - 1, 0));
    k = std::min(k, knot_times_.size() - 2);
    const double u = t - knot_times_[k];

    Sample s;
    double* pos[3] = {&s.position.x, &s.position.y, &s.position.z};
    double* vel[3] = {&s.velocity.x, &s.velocity.y, &s.velocity.z};
    double* acc[3] = {&s.acceleration.x, &s.acceleration.y, &s.acceleration.z};
    for (int axis = 0; axis < 3; ++axis) {
        const CubicCoeffs& c = segments_[static_cast<size_t>(axis)][k];
        *pos[axis] = c.a0 + u * (c.a1 + u * (c.a2 + u * c.a3));
        *vel[axis] = c.a1 + u * (2.0 * c.a2 + 3.0 * u * c.a3);
        *acc[axis] = 2.0 * c.a2 + 6.0 * u * c.a3;
    }
    return s;
}

PiecewiseCubicTrajectory build_cartesian_trajectory(std::span<const Vec3> waypoints, double t0,
                                                    double total_time) {
    if (waypoints.size() < 2)
        throw TrajectoryError("a trajectory needs at least two waypoints");
    if (!(total_time > 0.0)) throw NonPositiveDuration("total time must be positive");

    const size_t n_legs = waypoints.size() - 1;
    std::vector<double> weights(n_legs);
    double dist_sum = 0.0;
    for (size_t k = 0; k < n_legs; ++k) {
        weights[k] = distance(waypoints[k], waypoints[k + 1]);
        dist_sum += weights[k];
    }
    if (dist_sum <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0);
    } else {
        for (double& w : weights) w = std::max(w, 1e-3 * dist_sum);
    }
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);

    std::vector<double> knots(waypoints.size());
    knots[0] = t0;
    for (size_t k = 0; k < n_legs; ++k)
        knots[k + 1] = knots[k] + total_time * weights[k] / weight_sum;
    knots.back() = t0 + total_time;

    std::array<std::vector<CubicCoeffs>, 3> segments;
    std::array<std::vector<double>, 3> velocities;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<double> q(waypoints.size());
        for (size_t k = 0; k < waypoints.size(); ++k)
            q[k] = axis == 0 ? waypoints[k].x : axis == 1 ? waypoints[k].y : waypoints[k].z;
        std::vector<double> v = intermediate_velocities(q, knots);
        std::vector<CubicCoeffs> segs(n_legs);
        for (size_t k = 0; k < n_legs; ++k)
            segs[k] = cubic_coefficients(q[k], q[k + 1], v[k], v[k + 1], knots[k + 1] - knots[k]);
        segments[static_cast<size_t>(axis)] = std::move(segs);
        velocities[static_cast<size_t>(axis)] = std::move(v);
    }
    return PiecewiseCubicTrajectory(std::move(knots), std::move(segments), std::move(velocities));
}

JointTrajectory plan_waypoint_move(const kin::DeltaParams& params, std::span<const Vec3> waypoints,
                                   double total_time, double dt, double t0,
                                   const kin::JointLimits& limits) {
    if (!(dt > 0.0)) throw NonPositiveDuration("sampling step must be positive");
    for (size_t k = 0; k < waypoints.size(); ++k) {
        const Vec3& w = waypoints[k];
        if (!kin::is_reachable(params, {w.x, w.y, w.z}, limits))
            throw UnreachableWaypoint("waypoint " + std::to_string(k) + " is outside the workspace");
    }

    JointTrajectory traj;
    traj.dt = dt;
    traj.cartesian = build_cartesian_trajectory(waypoints, t0, total_time);

    const size_t n_steps = static_cast<size_t>(std::ceil(total_time / dt - 1e-9));
    traj.samples.reserve(n_steps + 1);
    for (size_t i = 0; i <= n_steps; ++i) {
        const double t = i == n_steps ? t0 + total_time : t0 + static_cast<double>(i) * dt;
        const auto cart = traj.cartesian.eval(t);
        JointSample s;
        s.t = t;
        try {
            s.joints = kin::inverse_kinematics(
                params, {cart.position.x, cart.position.y, cart.position.z});
        } catch (const kin::KinematicsError&) {
            throw UnreachableSample("trajectory sample at t=" + std::to_string(t) +
                                    " s leaves the workspace");
        }
        if (!limits.contains(s.joints))
            throw UnreachableSample("trajectory sample at t=" + std::to_string(t) +
                                    " s violates joint limits");
        traj.samples.push_back(s);
    }

    // Joint velocities by central differences, one-sided at the ends.
    const size_t n = traj.samples.size();
    for (size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) {
            double v;
            if (i == 0)
                v = (traj.samples[1].joints[a] - traj.samples[0].joints[a]) / dt;
            else if (i + 1 == n)
                v = (traj.samples[n - 1].joints[a] - traj.samples[n - 2].joints[a]) / dt;
            else
                v = (traj.samples[i + 1].joints[a] - traj.samples[i - 1].joints[a]) / (2.0 * dt);
            traj.samples[i].joint_velocity[static_cast<size_t>(a)] = v;
        }
    }
    return traj;
}

JointTrajectory plan_pick_place(const kin::DeltaParams& params, const PiPath& path,
                                double total_time, double dt, double t0,
                                const kin::JointLimits& limits) {
    return plan_waypoint_move(params, path.waypoints, total_time, dt, t0, limits);
}

void write_csv(std::ostream& os, const JointTrajectory& traj) {
    os << "t,x,y,z,vx,vy,vz,th1,th2,th3\n";
    char line[256];
    for (const JointSample& s : traj.samples) {
        const auto cart = traj.cartesian.eval(s.t);
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      s.t, cart.position.x, cart.position.y, cart.position.z, cart.velocity.x,
                      cart.velocity.y, cart.velocity.z, s.joints[0], s.joints[1], s.joints[2]);
        os << line;
    }
}

}  // namespace weee::traj
