#include "weee/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace weee::kin {
namespace {

constexpr std::array<double, 3> kGamma = {0.0, 2.0 * std::numbers::pi / 3.0,
                                          4.0 * std::numbers::pi / 3.0};

struct ArmCoeffs {
    double a, b, c, d;
};

// Coefficients of x^2+y^2+z^2 + a x + b y + c z + d = 0 for one arm.
ArmCoeffs arm_coeffs(const DeltaParams& p, double theta, int i) {
    const double m = p.base_radius_R - p.eef_radius_r;
    const double l = p.arm_length_l;
    const double L = p.forearm_length_L;
    const double k = m + l * std::cos(theta);
    return {2.0 * k * std::cos(kGamma[static_cast<size_t>(i)]),
            2.0 * k * std::sin(kGamma[static_cast<size_t>(i)]),
            2.0 * l * std::sin(theta),
            l * l - L * L + m * m + 2.0 * m * l * std::cos(theta)};
}

// One Newton step on the three residual equations; keeps the sphere
// intersection accurate to a few ulp so the round-trip oracle has headroom.
bool newton_refine(const std::array<ArmCoeffs, 3>& cs, EefPose& pose) {
    for (int iter = 0; iter < 2; ++iter) {
        double f[3], jx[3], jy[3], jz[3];
        const double n2 = pose.x * pose.x + pose.y * pose.y + pose.z * pose.z;
        for (int i = 0; i < 3; ++i) {
            const auto& c = cs[static_cast<size_t>(i)];
            f[i] = n2 + c.a * pose.x + c.b * pose.y + c.c * pose.z + c.d;
            jx[i] = 2.0 * pose.x + c.a;
            jy[i] = 2.0 * pose.y + c.b;
            jz[i] = 2.0 * pose.z + c.c;
        }
        const double det = jx[0] * (jy[1] * jz[2] - jz[1] * jy[2]) -
                           jy[0] * (jx[1] * jz[2] - jz[1] * jx[2]) +
                           jz[0] * (jx[1] * jy[2] - jy[1] * jx[2]);
        if (std::abs(det) < 1e-30) return false;
        const double dx = (f[0] * (jy[1] * jz[2] - jz[1] * jy[2]) -
                           jy[0] * (f[1] * jz[2] - jz[1] * f[2]) +
                           jz[0] * (f[1] * jy[2] - jy[1] * f[2])) /
                          det;
        const double dy = (jx[0] * (f[1] * jz[2] - jz[1] * f[2]) -
                           f[0] * (jx[1] * jz[2] - jz[1] * jx[2]) +
                           jz[0] * (jx[1] * f[2] - f[1] * jx[2])) /
                          det;
        const double dz = (jx[0] * (jy[1] * f[2] - f[1] * jy[2]) -
                           jy[0] * (jx[1] * f[2] - f[1] * jx[2]) +
                           f[0] * (jx[1] * jy[2] - jy[1] * jx[2])) /
                          det;
        pose.x -= dx;
        pose.y -= dy;
        pose.z -= dz;
    }
    return true;
}

// Per-arm reduction of the constraint equation to A cos(t) + B sin(t) + C = 0.
struct TrigCoeffs {
    double A, B, C;
};

TrigCoeffs trig_coeffs(const DeltaParams& p, const EefPose& pose, int i) {
    const double m = p.base_radius_R - p.eef_radius_r;
    const double l = p.arm_length_l;
    const double L = p.forearm_length_L;
    const double u = pose.x * std::cos(kGamma[static_cast<size_t>(i)]) +
                     pose.y * std::sin(kGamma[static_cast<size_t>(i)]);
    const double n2 = pose.x * pose.x + pose.y * pose.y + pose.z * pose.z;
    return {2.0 * l * (u + m), 2.0 * l * pose.z, n2 + 2.0 * m * u + m * m + l * l - L * L};
}

double polish_root(const TrigCoeffs& tc, double theta) {
    for (int iter = 0; iter < 3; ++iter) {
        const double f = tc.A * std::cos(theta) + tc.B * std::sin(theta) + tc.C;
        const double fp = -tc.A * std::sin(theta) + tc.B * std::cos(theta);
        if (std::abs(fp) < 1e-9 * (std::abs(tc.A) + std::abs(tc.B))) break;
        const double step = f / fp;
        theta -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return theta;
}

// Both tan-half-angle roots for one arm, canonical ("minus") branch first.
std::array<double, 2> arm_roots(const TrigCoeffs& tc, int arm_index) {
    const double scale = tc.A * tc.A + tc.B * tc.B + tc.C * tc.C;
    double disc = tc.A * tc.A + tc.B * tc.B - tc.C * tc.C;
    if (disc < -1e-12 * scale)
        throw Unreachable("inverse kinematics: negative discriminant for arm " +
                          std::to_string(arm_index + 1));
    disc = std::max(disc, 0.0);
    const double s = std::sqrt(disc);
    const double lead = tc.C - tc.A;  // quadratic coefficient in t
    const double lead_scale = std::abs(tc.C) + std::abs(tc.A);

    double t_minus, t_plus;
    if (std::abs(lead) <= 1e-14 * lead_scale) {
        // Leading coefficient vanished: one root from the linear fallback,
        // the other at theta = pi (t -> infinity).
        if (std::abs(tc.B) <= 1e-14 * lead_scale)
            throw Singular("inverse kinematics: degenerate arm equation for arm " +
                           std::to_string(arm_index + 1));
        const double t = -(tc.A + tc.C) / (2.0 * tc.B);
        return {polish_root(tc, 2.0 * std::atan(t)), std::numbers::pi};
    }
    // Numerically stable pairing of the quadratic roots.
    const double q = -(tc.B + std::copysign(s, tc.B));
    if (q == 0.0) {
        t_minus = t_plus = 0.0;
    } else if (tc.B >= 0.0) {
        t_minus = q / lead;
        t_plus = (tc.A + tc.C) / q;
    } else {
        t_plus = q / lead;
        t_minus = (tc.A + tc.C) / q;
    }
    return {polish_root(tc, 2.0 * std::atan(t_minus)), polish_root(tc, 2.0 * std::atan(t_plus))};
}

double max_abs_diff(const EefPose& a, const EefPose& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

}  // namespace

void DeltaParams::validate() const {
    if (!(base_radius_R > 0.0) || !(eef_radius_r > 0.0) || !(arm_length_l > 0.0) ||
        !(forearm_length_L > 0.0))
        throw std::invalid_argument("delta parameters: all lengths must be positive");
    if (!(forearm_length_L > arm_length_l))
        throw std::invalid_argument("delta parameters: forearm length must exceed arm length");
    if (!(base_radius_R > eef_radius_r))
        throw std::invalid_argument("delta parameters: base radius must exceed eef radius");
}

EefPose forward_kinematics(const DeltaParams& params, const JointAngles& joints) {
    params.validate();
    std::array<ArmCoeffs, 3> cs;
    for (int i = 0; i < 3; ++i) cs[static_cast<size_t>(i)] = arm_coeffs(params, joints[i], i);

    // Differences of sphere equations give two planes; solve for x,y as
    // linear functions of z, then substitute into the first sphere.
    const double a12 = cs[0].a - cs[1].a, b12 = cs[0].b - cs[1].b;
    const double c12 = cs[0].c - cs[1].c, d12 = cs[0].d - cs[1].d;
    const double a13 = cs[0].a - cs[2].a, b13 = cs[0].b - cs[2].b;
    const double c13 = cs[0].c - cs[2].c, d13 = cs[0].d - cs[2].d;

    const double det = a12 * b13 - a13 * b12;
    const double r1 = std::hypot(a12, b12), r2 = std::hypot(a13, b13);
    if (std::abs(det) < 1e-12 * std::max(1.0, r1 * r2) || r1 < 1e-9 || r2 < 1e-9)
        throw Degenerate("forward kinematics: sphere centers are collinear");

    const double x0 = (-d12 * b13 + d13 * b12) / det;
    const double x1 = (-c12 * b13 + c13 * b12) / det;
    const double y0 = (-a12 * d13 + a13 * d12) / det;
    const double y1 = (-a12 * c13 + a13 * c12) / det;

    const double qa = x1 * x1 + y1 * y1 + 1.0;
    const double qb = 2.0 * (x0 * x1 + y0 * y1) + cs[0].a * x1 + cs[0].b * y1 + cs[0].c;
    const double qc = x0 * x0 + y0 * y0 + cs[0].a * x0 + cs[0].b * y0 + cs[0].d;

    double disc = qb * qb - 4.0 * qa * qc;
    const double disc_scale = qb * qb + std::abs(4.0 * qa * qc);
    if (disc < -1e-12 * disc_scale)
        throw NoIntersection("forward kinematics: forearm spheres have no common point");
    disc = std::max(disc, 0.0);

    // Lower-z root, evaluated without cancellation.
    double z;
    const double s = std::sqrt(disc);
    if (qb >= 0.0) {
        z = (-qb - s) / (2.0 * qa);
    } else {
        const double q = 0.5 * (s - qb);
        z = qc / q;
    }
    EefPose pose{x0 + x1 * z, y0 + y1 * z, z};
    newton_refine(cs, pose);
    return pose;
}

std::array<double, 3> constraint_residual(const DeltaParams& params, const JointAngles& joints,
                                          const EefPose& pose) {
    std::array<double, 3> res;
    const double n2 = pose.x * pose.x + pose.y * pose.y + pose.z * pose.z;
    for (int i = 0; i < 3; ++i) {
        const ArmCoeffs c = arm_coeffs(params, joints[i], i);
        res[static_cast<size_t>(i)] = n2 + c.a * pose.x + c.b * pose.y + c.c * pose.z + c.d;
    }
    return res;
}

JointAngles inverse_kinematics(const DeltaParams& params, const EefPose& pose) {
    params.validate();
    std::array<std::array<double, 2>, 3> roots;
    for (int i = 0; i < 3; ++i)
        roots[static_cast<size_t>(i)] = arm_roots(trig_coeffs(params, pose, i), i);

    constexpr double kMatchTol = 1e-6;  // mm per axis, the stated postcondition

    // Canonical branch first: it is the forward branch everywhere inside the
    // default joint box, so the fallback enumeration is rarely taken.
    JointAngles primary{{roots[0][0], roots[1][0], roots[2][0]}};
    try {
        if (max_abs_diff(forward_kinematics(params, primary), pose) <= kMatchTol) return primary;
    } catch (const KinematicsError&) {
    }

    std::optional<JointAngles> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 8; ++mask) {
        JointAngles cand{{roots[0][static_cast<size_t>(mask & 1)],
                          roots[1][static_cast<size_t>((mask >> 1) & 1)],
                          roots[2][static_cast<size_t>((mask >> 2) & 1)]}};
        try {
            if (max_abs_diff(forward_kinematics(params, cand), pose) > kMatchTol) continue;
        } catch (const KinematicsError&) {
            continue;
        }
        const double cost =
            std::abs(cand[0]) + std::abs(cand[1]) + std::abs(cand[2]);
        const bool better =
            cost < best_cost - 1e-15 ||
            (std::abs(cost - best_cost) <= 1e-15 && best &&
             std::lexicographical_compare(cand.theta.begin(), cand.theta.end(),
                                          best->theta.begin(), best->theta.end()));
        if (!best || better) {
            best = cand;
            best_cost = cost;
        }
    }
    if (!best)
        throw Unreachable("inverse kinematics: pose is not on the forward branch");
    return *best;
}

bool is_reachable(const DeltaParams& params, const EefPose& pose, const JointLimits& limits) {
    try {
        return limits.contains(inverse_kinematics(params, pose));
    } catch (const KinematicsError&) {
        return false;
    }
}

}  // namespace weee::kin
