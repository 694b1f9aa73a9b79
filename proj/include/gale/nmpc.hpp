#pragma once

#include "gale/dynamics.hpp"
#include "gale/flatness.hpp"
#include "gale/minco.hpp"

#include <string>
#include <vector>

namespace gale
{

struct NmpcConfig
{
    int horizon = 20;     // N
    double dt = 0.05;     // s
    Vec9 stateWeight = (Vec9() << 100, 100, 100, 10, 10, 10, 1, 1, 1).finished();
    Vec9 terminalWeight = (Vec9() << 100, 100, 100, 10, 10, 10, 1, 1, 1).finished();
    Vec4 inputWeight = Vec4(0.1, 1.0, 1.0, 1.0);
    double tiltWeight = 1e3;     // quadratic penalty on roll/pitch beyond the tilt limit
    int maxIterations = 10;
    double tolerance = 1e-6;     // relative cost decrease that ends the iteration
    int maxLineSearch = 8;

    void validate() const;
    bool operator==(const NmpcConfig &) const = default;
};

struct ReferenceWindow
{
    std::vector<Vec9> x; // N + 1
    std::vector<Vec4> u; // N
};

// Flat-output reference on [t, t + N dt], clamped to [0, T_total].
// Attitude and thrust come from the differential-flatness inverse under
// `disturbance`; rates are finite differences of the reference attitudes.
ReferenceWindow referenceFromTrajectory(const MincoTrajectory &traj, double t, const NmpcConfig &cfg, double yaw,
                                        const QuadParams &params, const Vec3 &disturbance = Vec3::Zero(),
                                        bool compensateDrag = true);

// Constant hover reference at p.
ReferenceWindow hoverReference(const Vec3 &p, double yaw, const NmpcConfig &cfg, const QuadParams &params,
                               const Vec3 &disturbance = Vec3::Zero());

struct NmpcSolution
{
    ControlInput u0;
    std::vector<Vec9> states; // N + 1 predicted states, states[0] = x0
    std::vector<Vec4> inputs; // N
    double cost = 0.0;
    double initialCost = 0.0;
    std::vector<double> costHistory; // accepted iterates
    int iterations = 0;
    bool iterationCap = false;
    bool clampedInitialState = false;
};

// Gauss-Newton tracking MPC on the forward-Euler model with the disturbance
// estimate held constant over the horizon. Inputs are clamped to the thrust
// and rate boxes; roll and pitch beyond the tilt limit are penalized.
class NmpcTracker
{
public:
    NmpcTracker(NmpcConfig cfg, QuadParams params);

    NmpcSolution solve(const QuadState &x0, const ReferenceWindow &refs, const Vec3 &fHat);

    // Drops the warm start.
    void reset() { warm_.clear(); }

    const NmpcConfig &config() const { return cfg_; }
    NmpcConfig &config() { return cfg_; }

    double cost(const std::vector<Vec9> &xs, const std::vector<Vec4> &us, const ReferenceWindow &refs) const;
    Vec4 clampInput(const Vec4 &u) const;

private:
    std::vector<Vec9> rollout(const Vec9 &x0, std::vector<Vec4> &us, const Vec3 &fHat) const;

    NmpcConfig cfg_;
    QuadParams params_;
    std::vector<Vec4> warm_;
};

// Difference of two states with the Euler angles wrapped to (-pi, pi].
Vec9 stateError(const Vec9 &x, const Vec9 &ref);

} // namespace gale
