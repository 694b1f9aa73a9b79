#pragma once

#include "gale/scenario.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace gale
{

// Wind speed vector = mean + an Ornstein-Uhlenbeck fluctuation along the
// mean direction (x when the mean is zero); force = c_w * speed vector.
class WindField
{
public:
    explicit WindField(WindModel model);

    // Draws the fluctuation from its stationary distribution.
    void reset(std::mt19937_64 &rng);

    // Advances the fluctuation by dt (exact OU discretization) and returns the force.
    Vec3 step(double dt, std::mt19937_64 &rng);
    Vec3 force() const;
    Vec3 speed() const;
    const WindModel &model() const { return model_; }

private:
    WindModel model_;
    Vec3 direction_ = Vec3::UnitX();
    double fluctuation_ = 0.0;
};

// Snapshot the planner gets of one obstacle at `now`.
ObstaclePrediction snapshot(const DynamicObstacle &ob, double now, double horizon);

struct TimingStats
{
    int count = 0;
    double meanMs = 0.0;
    double maxMs = 0.0;
    int overBudget = 0;

    void add(double ms, double budgetMs);
};

struct EpisodeMetrics
{
    bool success = false;
    std::string outcome = "timeout"; // success, collision, planning_failure, timeout
    double flightTime = 0.0;         // s from the first trajectory start to the end
    double minClearance = std::numeric_limits<double>::infinity();        // m, surface gap to any obstacle
    double minStaticDistance = std::numeric_limits<double>::infinity();   // m, ESDF at the vehicle centre
    double minObstacleDistance = std::numeric_limits<double>::infinity(); // m, centre to moving obstacle centre
    // min over control ticks of |p - p_ob| - (d_q^k + d_c + r_ob) along the active trajectory
    double minDynamicMargin = std::numeric_limits<double>::infinity();
    double trackingAvg = 0.0, trackingMin = 0.0, trackingMax = 0.0, trackingRmse = 0.0;
    int replanCount = 0;
    int planFailures = 0;
    int auditFailures = 0;
    double maxDq = 0.0;
};

// Wall-clock statistics; kept apart from the logs, which are deterministic.
struct EpisodeTiming
{
    TimingStats planner;
    TimingStats controller;
};

struct EpisodeLog
{
    std::string state;    // t, p, v, euler, p_ref, true force
    std::string control;  // t, u, F_hat, iterations, flags
    std::string estimate; // t, z1, z2, true force
    std::string events;   // t, kind, reason, ok, cost, iterations, max_dq, audit
    std::string trajectory; // last active trajectory, sampled

    bool operator==(const EpisodeLog &) const = default;
    // Writes state.csv, control.csv, estimate.csv, events.csv, trajectory.csv.
    void write(const std::string &dir) const;
};

struct EpisodeOptions
{
    bool recordLog = true;
    bool zeroEstimate = false; // publish F_hat = 0 to planner and controller
};

struct EpisodeResult
{
    EpisodeMetrics metrics;
    EpisodeTiming timing;
    EpisodeLog log;
    std::vector<double> time;      // control ticks
    std::vector<Vec3> path;        // vehicle position at each tick
};

EpisodeResult runEpisode(const Scenario &scenario, std::uint64_t seed, const EpisodeOptions &options = {});

std::string metricsJson(const EpisodeMetrics &m);
std::string timingJson(const EpisodeTiming &t);

// Plan the vehicle would start from: the figure-eight for tracking tasks,
// otherwise the planner output from start to goal. The disturbance estimate
// is the mean wind force with spread c_w * sigma along the mean direction.
struct ReferencePlan
{
    MincoTrajectory trajectory;
    std::vector<PositionBound> bounds;
    double delta = 0.1; // s between bounds
};

ReferencePlan referencePlan(const Scenario &scenario);

// "t,x,y,z,vx,vy,vz,ax,ay,az,dq" every `step` seconds.
std::string referencePlanCsv(const ReferencePlan &plan, double step = 0.05);

// Benchmark: conditions x ablations x seeded trials.
struct BenchmarkCondition
{
    std::string name;
    Scenario scenario;
};

struct BenchmarkSuite
{
    std::vector<BenchmarkCondition> conditions;
    std::vector<bool> frs{true, false};
    std::vector<bool> observer{true};
    int trials = 30;
    std::uint64_t seedBase = 1;
};

struct BenchmarkRow
{
    std::string condition;
    double windMean = 0.0;
    bool frs = true;
    bool observer = true;
    int trials = 0;
    double successRate = 0.0;
    double rmseMean = 0.0;
    double rmseMedian = 0.0;
    std::vector<double> rmse;    // per trial, seed order
    std::vector<int> success;    // per trial
};

// Loads {"schema_version", "trials", "seed", "frs": [..], "observer": [..],
// "conditions": [{"name", "scenario" (path relative to the suite),
// "wind_speed" (optional override of the mean magnitude)}]}.
BenchmarkSuite loadSuite(const std::string &path);

std::vector<BenchmarkRow> runBenchmark(const BenchmarkSuite &suite);
std::string benchmarkCsv(const std::vector<BenchmarkRow> &rows);
std::string benchmarkJson(const std::vector<BenchmarkRow> &rows);

// Built-in scenarios used by tests, the acceptance binary and the CLI.
namespace scenarios
{
Scenario benignStraight();
Scenario corridor(double windSpeed);
Scenario figureEight(double windSpeed);
Scenario headOn();
} // namespace scenarios

} // namespace gale
