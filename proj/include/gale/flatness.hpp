#pragma once

#include "gale/dynamics.hpp"

namespace gale
{

// Attitude and thrust that realize a desired acceleration at yaw `yaw`,
// given the current disturbance force. Drag is compensated with the
// first-order model when `compensateDrag` is set.
struct FlatOutputState
{
    QuadState state;
    double thrust = 0.0;
};

// Thrust vectors shorter than this (N) are treated as a free-fall reference.
inline constexpr double kMinThrustNorm = 1e-3;

FlatOutputState flatInverse(const Vec3 &p, const Vec3 &v, const Vec3 &a, double yaw,
                            const Vec3 &disturbance, const QuadParams &params,
                            bool compensateDrag = true);

// Roll and pitch of the body z-axis `zb` (unit) at yaw `yaw`.
Vec3 eulerFromThrustAxis(const Vec3 &zb, double yaw);

// Disturbance force summary published by the observer.
struct DisturbanceEstimate
{
    Vec3 force = Vec3::Zero(); // z1 estimate, N
    Vec3 rate = Vec3::Zero();  // z2 estimate, N/s
    Vec3 sigma = Vec3::Zero(); // per-channel spread of recent force estimates, N

    // Per-channel bound |z1_i| + margin * sigma_i.
    Vec3 bound(double margin) const { return force.cwiseAbs() + margin * sigma; }
};

} // namespace gale
