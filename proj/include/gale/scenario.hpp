#pragma once

#include "gale/esdf.hpp"
#include "gale/nmpc.hpp"
#include "gale/observer.hpp"
#include "gale/planner.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gale
{

inline constexpr int kSchemaVersion = 1;

struct BoxObstacle
{
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
    bool operator==(const BoxObstacle &) const = default;
};

// Vertical cylinder.
struct CylinderObstacle
{
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.3;
    double zLo = 0.0;
    double zHi = 3.0;
    bool operator==(const CylinderObstacle &) const = default;
};

struct MapSpec
{
    Vec3 origin = Vec3::Zero();
    Vec3 size = Vec3(10.0, 6.0, 3.0); // m
    double resolution = 0.1;          // m
    double esdfCap = 5.0;             // m
    std::vector<BoxObstacle> boxes;
    std::vector<CylinderObstacle> cylinders;

    void validate() const;
    VoxelGrid rasterize() const;
    EsdfGrid buildEsdf() const;
    bool operator==(const MapSpec &) const = default;
};

enum class WindKind
{
    None,
    Constant,
    Gusty,
};

struct WindModel
{
    WindKind kind = WindKind::None;
    Vec3 mean = Vec3::Zero();        // m/s, direction times mean speed
    double variance = 1.0;           // m^2/s^2 of the speed fluctuation
    double correlationTime = 0.5;    // s
    double forceCoefficient = 1.0;   // N s/m

    void validate() const;
    bool operator==(const WindModel &) const = default;
};

enum class MotionPattern
{
    Constant,
    BackAndForth,
};

struct DynamicObstacle
{
    Vec3 position = Vec3::Zero(); // at t = 0
    Vec3 velocity = Vec3::Zero(); // constant pattern; its norm is the speed of back-and-forth
    MotionPattern pattern = MotionPattern::Constant;
    Vec3 segmentEnd = Vec3::Zero(); // far endpoint of back-and-forth motion
    double radius = 0.3;            // m

    void validate() const;
    // Ground-truth motion.
    Vec3 positionAt(double t) const;
    Vec3 velocityAt(double t) const;
    bool operator==(const DynamicObstacle &) const = default;
};

enum class TaskKind
{
    Navigate, // plan from start to goal and replan on triggers
    Track,    // follow a fixed figure-eight reference
};

struct FigureEight
{
    Vec3 center = Vec3(5.0, 3.0, 1.5);
    double amplitudeX = 2.5; // m
    double amplitudeY = 1.2; // m
    double period = 8.0;     // s per lap
    int laps = 2;
    int samplesPerLap = 16;

    void validate() const;
    bool operator==(const FigureEight &) const = default;
};

// Rest-to-rest MINCO through samples of x = ax sin(wt), y = ay sin(2wt) / 2.
MincoTrajectory figureEightTrajectory(const FigureEight &f);

struct SimConfig
{
    double timeout = 40.0;         // s of simulated time
    double plantDt = 0.001;        // s
    double controlDt = 0.01;       // s
    double warmup = 1.0;           // s of hover before the first plan
    double replanPeriod = 0.1;     // s between replan checks
    double planLatency = 0.03;     // s between a plan request and its activation
    double planBudget = 0.05;      // s of wall time; overruns are counted
    double velocityNoise = 0.01;   // m/s, standard deviation per axis
    double goalTolerance = 0.3;    // m
    double predictionHorizon = 4.0; // s, covered by each obstacle snapshot (beyond the replan lookahead)
    bool observerEnabled = true;

    void validate() const;
    bool operator==(const SimConfig &) const = default;
};

struct Scenario
{
    int schemaVersion = kSchemaVersion;
    std::string name = "unnamed";
    std::uint64_t seed = 1;
    TaskKind task = TaskKind::Navigate;
    Vec3 start = Vec3(0.6, 3.0, 1.5);
    Vec3 goal = Vec3(9.4, 3.0, 1.5);
    double yaw = 0.0;
    FigureEight figureEight;
    MapSpec map;
    WindModel wind;
    std::vector<DynamicObstacle> obstacles;
    QuadParams quad;
    PlannerConfig planner; // reachability settings live in planner.frs
    NmpcConfig nmpc;
    ObserverConfig observer;
    SimConfig sim;

    // Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const Scenario &) const = default;
};

const char *toString(WindKind k);
const char *toString(MotionPattern p);
const char *toString(TaskKind t);

// JSON text <-> Scenario. Missing keys take defaults, unknown keys and
// wrong types raise ConfigError with the dotted key path.
Scenario parseScenario(const std::string &text);
std::string serializeScenario(const Scenario &s);
Scenario loadScenario(const std::string &path);
void saveScenario(const Scenario &s, const std::string &path);

} // namespace gale
