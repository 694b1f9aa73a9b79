#pragma once

#include "gale/esdf.hpp"
#include "gale/lbfgs.hpp"
#include "gale/minco.hpp"
#include "gale/reach.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gale
{

struct PlannerWeights
{
    double lambdaStatic = 1e4;
    double lambdaDynamic = 1e4;
    double lambdaFeasibility = 1e3;
    double rho = 100.0;              // time weight
    double staticClearance = 0.3;    // d_s, m
    double dynamicClearance = 0.3;   // d_c, m
    double vMax = 2.0;               // m/s
    double aMax = 6.0;               // m/s^2
    double delta = 0.1;              // s, constraint sampling
    double replanTrigger = 0.2;      // m
    double lookahead = 3.0;          // s, window checked for replanning

    void validate() const;
    bool operator==(const PlannerWeights &) const = default;
};

// Constant-velocity prediction of one moving obstacle captured at time t_mu.
struct ObstaclePrediction
{
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double captureTime = 0.0; // t_mu, s (world time)
    double horizon = 3.0;     // tau, s
    double radius = 0.3;      // m

    bool covers(double worldTime) const;
    Vec3 predict(double worldTime) const { return position + velocity * (worldTime - captureTime); }
};

struct PenaltyValue
{
    double cost = 0.0;
    Vec3 gradP = Vec3::Zero();
    Vec3 gradV = Vec3::Zero();
    Vec3 gradA = Vec3::Zero();
};

// max{threshold - d(p), 0}^3 with d the interpolated ESDF.
PenaltyValue staticPenalty(const Vec3 &p, const EsdfGrid &esdf, double threshold);

// Sum over obstacles covering `worldTime` of
// max{r_mu^2 - |p - p_pre|^2, 0}^3 with r_mu = threshold + obstacle radius.
// gradT receives d cost / d worldTime through the predicted positions.
PenaltyValue dynamicPenalty(const Vec3 &p, const std::vector<ObstaclePrediction> &predictions,
                            double worldTime, double threshold, double *gradT = nullptr);

// max{|v|^2 - vm^2, 0}^3 + max{|a|^2 - am^2, 0}^3.
PenaltyValue feasibilityPenalty(const Vec3 &v, const Vec3 &a, double vMax, double aMax);

// Bijection R -> (0, inf) used for durations, and its derivative.
double durationFromSurrogate(double tau);
double surrogateFromDuration(double t);
double durationSurrogateGradient(double tau);

struct ObjectiveTerms
{
    bool smoothness = true;
    bool time = true;
    bool staticObstacles = true;
    bool dynamicObstacles = true;
    bool feasibility = true;
};

struct ObjectiveBreakdown
{
    double total = 0.0;
    double smoothness = 0.0;
    double time = 0.0;
    double staticCost = 0.0;
    double dynamicCost = 0.0;
    double feasibilityCost = 0.0;
};

using StaticPenaltyFn = PenaltyValue (*)(const Vec3 &p, const EsdfGrid &esdf, double threshold);

// Everything the objective needs besides the trajectory itself.
struct PlanningProblem
{
    const EsdfGrid *esdf = nullptr;
    std::vector<ObstaclePrediction> predictions;
    std::vector<double> dq;   // d_q^k per constraint point; the last entry is held
    double startTime = 0.0;   // world time of the trajectory start
    PlannerWeights weights;
    double staticSlack = 0.0; // extra clearance applied inside the optimizer
    double dynamicSlack = 0.0;
    ObjectiveTerms terms;
    StaticPenaltyFn staticPenaltyFn = &staticPenalty; // replaceable for fault injection

    double dqAt(int k) const;
};

// J and, if grad is given, (dJ/dq, dJ/dT).
ObjectiveBreakdown evaluateObjective(const MincoTrajectory &traj, const PlanningProblem &problem,
                                     MincoGradient *grad = nullptr);

// Geometric A* on the voxel grid (26-connected) through voxels whose ESDF
// value is at least `clearance`. Returns the smoothed polyline start..goal.
std::vector<Vec3> searchPath(const EsdfGrid &esdf, const Vec3 &start, const Vec3 &goal, double clearance,
                             long long maxExpansions = 2000000);

struct InitialGuess
{
    Eigen::Matrix3Xd waypoints;
    Eigen::VectorXd durations;
};

// Downsamples a polyline into M pieces (about one per pieceLength metres,
// clamped to [minPieces, maxPieces]) with trapezoidal time allocation.
InitialGuess initialGuess(const std::vector<Vec3> &path, double vMax, double aMax, double pieceLength = 1.5,
                          int minPieces = 3, int maxPieces = 12);

struct PlannerConfig
{
    PlannerWeights weights;
    FrsConfig frs;
    bool frsEnabled = true;
    LbfgsParams lbfgs;
    int continuationRounds = 4;   // penalty weight x10 per round while the audit fails
    double staticSlack = 0.03;    // m
    double dynamicSlack = 0.1;    // m
    double auditTolerance = 1e-3; // m
    double searchClearance = -1.0; // m; negative selects d_s + vehicle radius

    bool operator==(const PlannerConfig &) const = default;
};

struct PlanResult
{
    MincoTrajectory trajectory;
    std::vector<PositionBound> bounds;
    ObjectiveBreakdown cost;
    int iterations = 0;
    int rounds = 0;
    LbfgsStatus status = LbfgsStatus::Converged;
    bool auditPassed = false;
    double minClearance = 0.0;      // min over constraint points of d(p) - d_a^k
    double minObstacleGap = 0.0;    // min over points of |p - p_pre| - d_q - r_mu (inf if none)
    double initialCost = 0.0;
};

struct AuditReport
{
    bool passed = true;
    double minStaticMargin = std::numeric_limits<double>::infinity();
    double minDynamicMargin = std::numeric_limits<double>::infinity();
};

// Post-hoc check of every constraint point against d_a^k = d_q^k + d_s and
// d_r^k = d_q^k + d_c (+ obstacle radius).
AuditReport auditTrajectory(const MincoTrajectory &traj, const PlanningProblem &problem, double tolerance);

class Planner
{
public:
    Planner(PlannerConfig cfg, QuadParams params);

    const PlannerConfig &config() const { return cfg_; }
    PlannerConfig &config() { return cfg_; }

    // Reachable-set bounds of a trajectory under the given estimate (or the
    // ego sphere when FRS is disabled).
    std::vector<PositionBound> bounds(const MincoTrajectory &traj, const DisturbanceEstimate &estimate) const;

    // Spatial-temporal optimization from an initial trajectory.
    PlanResult optimize(const MincoTrajectory &initial, const EsdfGrid &esdf,
                        const std::vector<ObstaclePrediction> &predictions, const DisturbanceEstimate &estimate,
                        double startTime) const;

    // Front end plus optimization from head to a rest state at goal.
    PlanResult plan(const BoundaryState &head, const Vec3 &goal, const EsdfGrid &esdf,
                    const std::vector<ObstaclePrediction> &predictions, const DisturbanceEstimate &estimate,
                    double startTime) const;

private:
    PlannerConfig cfg_;
    QuadParams params_;
    Mat49 gain_;
};

enum class ReplanReason
{
    None,
    DynamicObstacle,
    StaticClearance,
};

const char *toString(ReplanReason r);

// Checks the window [now, now + lookahead] of a trajectory started at
// startTime. Dynamic: |p - p_pre| - d_q^k - r_mu < trigger. Static:
// d(p) < d_q^k + d_s - staticTolerance.
ReplanReason checkReplan(const MincoTrajectory &traj, double startTime, const std::vector<double> &dq,
                         const std::vector<ObstaclePrediction> &predictions, const EsdfGrid *esdf,
                         const PlannerWeights &weights, double now, double staticTolerance = 0.05);

} // namespace gale
