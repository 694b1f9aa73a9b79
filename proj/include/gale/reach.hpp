#pragma once

#include "gale/dynamics.hpp"
#include "gale/flatness.hpp"
#include "gale/minco.hpp"

#include <array>
#include <string>
#include <vector>

namespace gale
{

// Operands with trace at or below this act as the identity of the
// shape-matrix Minkowski sum and are skipped when composing channels.
inline constexpr double kZeroTrace = 1e-12;

// Centered-or-not ellipsoid {x : (x - c)^T Q^-1 (x - c) <= 1}.
struct Ellipsoid
{
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;

    // Support function sqrt(u^T Q u) of the centered ellipsoid.
    double support(const Eigen::VectorXd &direction) const;
    // Throws InvalidInput unless Q is symmetric within 1e-10 and has no
    // eigenvalue below -1e-10.
    void validate() const;
};

struct FrsConfig
{
    double delta = 0.1;      // s, sampling time of the propagation
    int steps = 12;          // number of propagated points before the bound is held
    double epsilon = 0.01;   // conservativeness
    double boundMargin = 2.0;
    // When set, `bound` is used instead of the estimate-derived one.
    bool useFixedBound = false;
    Vec3 bound = Vec3::Zero(); // N, per channel
    Mat9 initialShape = (Vec9() << 0.0025, 0.0025, 0.0025, 0.01, 0.01, 0.01, 0.0025, 0.0025, 0.0025)
                            .finished()
                            .asDiagonal();
    double yaw = 0.0;        // nominal yaw of the planned trajectory

    void validate() const;
    bool operator==(const FrsConfig &) const = default;
};

struct PositionBound
{
    Mat3 shape = Mat3::Zero(); // Q^k = Q_dist (+) Q_ego
    double radius = 0.0;       // d_q^k, longest semi-axis
};

// (1 + b/a) Q1 + (1 + a/b) Q2, a = sqrt(tr Q1), b = sqrt(tr Q2).
Eigen::MatrixXd minkowskiShape(const Eigen::MatrixXd &q1, const Eigen::MatrixXd &q2);

// Solves -Phi X - X Phi^T = exp(-Phi delta) N exp(-Phi^T delta) - N with
// N = delta * bound^2 * D_i D_i^T and returns X + epsilon delta^2 I.
Mat9 solveChannelLyapunov(const Mat9 &phi, const Vec9 &channel, double bound, double delta,
                          double epsilon);

// Trace-weighted combination of the per-channel shapes; zero-trace channels
// are skipped, all-zero input yields the zero matrix.
Mat9 composeDisturbanceShape(const std::array<Mat9, 3> &channels);

Mat9 propagateInitialShape(const Mat9 &previousInitial, const Mat9 &previousDisturbance);

// exp(Phi delta) (Q0 (+) Qd) exp(Phi^T delta).
Mat9 errorFrsShape(const Mat9 &phi, const Mat9 &initial, const Mat9 &disturbance, double delta);

PositionBound positionBound(const Mat9 &errorShape, const Mat3 &egoShape);

inline Mat3 sphereShape(double radius) { return radius * radius * Mat3::Identity(); }

struct FrsOptions
{
    // Test hook: replace Phi by zero at every point.
    bool forceZeroPhi = false;
};

// One (Q^k, d_q^k) per constraint point k = 0..kappa. Points past
// cfg.steps hold the last propagated bound.
std::vector<PositionBound> propagateAlongTrajectory(const MincoTrajectory &traj,
                                                    const DisturbanceEstimate &estimate,
                                                    const FrsConfig &cfg,
                                                    const QuadParams &params,
                                                    const Mat49 &gain,
                                                    const FrsOptions &options = {});

// Bounds when reachability is disabled: the ego sphere at every point.
std::vector<PositionBound> egoOnlyBounds(const MincoTrajectory &traj, double delta,
                                         const QuadParams &params);

// Debug dump: k, d_q, eigenvalues of Q^k (ascending).
std::string frsCsv(const std::vector<PositionBound> &bounds);

} // namespace gale
