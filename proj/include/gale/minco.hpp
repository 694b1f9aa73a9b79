#pragma once

#include "gale/common.hpp"

#include <memory>
#include <vector>

namespace gale
{

// Position, velocity and acceleration at one end of a trajectory.
struct BoundaryState
{
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
};

// One sample of the fixed-interval constraint transcription.
struct ConstraintPoint
{
    int index = 0;         // k
    double time = 0.0;     // k * delta, relative to trajectory start
    int piece = 0;         // owning piece j
    double localTime = 0.0;
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
    Vec3 j = Vec3::Zero();
};

struct MincoGradient
{
    Eigen::Matrix3Xd points; // dJ/dq, 3 x (M-1)
    Eigen::VectorXd times;   // dJ/dT, M
};

// Band matrix with in-place LU (no pivoting), stored column-major by band.
class BandedSystem
{
public:
    BandedSystem() = default;
    BandedSystem(int n, int lowerBw, int upperBw);

    double &operator()(int i, int j) { return data_[static_cast<size_t>((i - j + upper_) * n_ + j)]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>((i - j + upper_) * n_ + j)]; }

    // Throws InvalidInput when a pivot vanishes.
    void factorizeLU();
    // Solves A x = b in place; b is n x m.
    void solve(Eigen::MatrixX3d &b) const;
    // Solves A^T x = b in place.
    void solveAdjoint(Eigen::MatrixX3d &b) const;

private:
    int n_ = 0;
    int lower_ = 0;
    int upper_ = 0;
    std::vector<double> data_;
};

// Minimum-jerk piecewise-quintic trajectory. Coefficients are stored as a
// 6M x 3 block: rows 6i..6i+5 are c_i in the natural basis [1, t, ..., t^5].
class MincoTrajectory
{
public:
    MincoTrajectory() = default;

    // c = M(q, T). waypoints is 3 x (M-1); durations has M positive entries.
    static MincoTrajectory construct(const Eigen::Matrix3Xd &waypoints,
                                     const Eigen::VectorXd &durations,
                                     const BoundaryState &head,
                                     const BoundaryState &tail);

    // Single-piece trajectory from explicit coefficients (6 x 3). Not a MINCO
    // solution, so backwardGradients is unavailable on it.
    static MincoTrajectory fromCoefficients(const Eigen::Matrix<double, 6, 3> &coeffs,
                                            double duration);

    int pieceCount() const { return static_cast<int>(durations_.size()); }
    double totalDuration() const { return totalDuration_; }
    const Eigen::VectorXd &durations() const { return durations_; }
    const Eigen::Matrix3Xd &waypoints() const { return waypoints_; }
    const Eigen::MatrixX3d &coefficients() const { return coeffs_; }
    const BoundaryState &head() const { return head_; }
    const BoundaryState &tail() const { return tail_; }
    bool empty() const { return durations_.size() == 0; }

    // Piece index and local time for global t (half-open pieces, the final
    // instant belongs to the last piece).
    std::pair<int, double> locate(double t) const;

    // Derivative of the given order (0..5) at global time t in [0, T_total].
    Vec3 evaluate(double t, int order) const;
    Vec3 evaluatePiece(int piece, double localTime, int order) const;

    // Sample at 0, delta, ..., kappa*delta with kappa = floor(T_total / delta).
    std::vector<ConstraintPoint> constraintPoints(double delta) const;
    // Sample at T_total (local time T_M of the last piece).
    ConstraintPoint terminalPoint() const;

    // Closed-form integral of ||p'''||^2 and its partial gradients.
    double smoothnessCost() const;
    void smoothnessPartials(Eigen::MatrixX3d &gradCoeffs, Eigen::VectorXd &gradTimes) const;

    // Propagates dF/dc (6M x 3) and the direct dF/dT (M) to (dJ/dq, dJ/dT)
    // through the adjoint of the banded MINCO system.
    MincoGradient backwardGradients(const Eigen::MatrixX3d &gradCoeffs,
                                    const Eigen::VectorXd &gradTimes) const;

private:
    Eigen::VectorXd durations_;
    Eigen::VectorXd startTimes_;
    double totalDuration_ = 0.0;
    Eigen::Matrix3Xd waypoints_;
    BoundaryState head_;
    BoundaryState tail_;
    Eigen::MatrixX3d coeffs_;
    std::shared_ptr<const BandedSystem> factor_;
};

// Natural basis row of order-th derivative: d^order/dt^order [1, t, ..., t^5].
Eigen::Matrix<double, 6, 1> basisDerivative(double t, int order);

// Export (t, p, v, a) sampled every `step` seconds, fixed decimal formatting.
std::string trajectoryCsv(const MincoTrajectory &traj, double step);

} // namespace gale
