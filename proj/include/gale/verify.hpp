#pragma once

#include "gale/planner.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gale
{

// Faults that can be injected into the checked code paths.
enum class Fault
{
    None,
    StaticPenaltySign, // static penalty returns -grad
};

Fault parseFault(const std::string &name); // "none", "static_penalty_sign"

struct VerifyOptions
{
    std::uint64_t seed = 1;
    Fault fault = Fault::None;
};

struct CheckResult
{
    std::string suite; // gradients, frs, observer
    std::string name;
    bool passed = true;
    double value = 0.0;     // worst observed metric
    double tolerance = 0.0; // pass iff value < tolerance (or <= for counts)
    std::string detail;
    std::string counterexample; // JSON of the first violating case, empty on pass
};

// Random 10 x 6 x 3 m scene with cylinders between x = 2.5 and 7.5 and, if
// `moving`, one obstacle at 0.8 m/s heading toward the start.
struct ClutteredScene
{
    EsdfGrid esdf;
    Vec3 start = Vec3(0.6, 3.0, 1.5);
    Vec3 goal = Vec3(9.4, 3.0, 1.5);
    std::vector<ObstaclePrediction> predictions;
};

ClutteredScene clutteredScene(std::mt19937_64 &rng, int pillars = 4, bool moving = false);

// Finite-difference checks of the penalties and of the full objective.
std::vector<CheckResult> verifyGradients(const VerifyOptions &opt = {});
// Lyapunov residuals, Minkowski containment and exactness, bound monotonicity.
std::vector<CheckResult> verifyFrs(const VerifyOptions &opt = {});
// Pole placement, step and ramp convergence.
std::vector<CheckResult> verifyObserver(const VerifyOptions &opt = {});

// which: gradients, frs, observer or all. Throws InvalidInput otherwise.
std::vector<CheckResult> runVerification(const std::string &which, const VerifyOptions &opt = {});

// Fixed-width pass/fail table, one row per check.
std::string verificationTable(const std::vector<CheckResult> &results);

// nullptr when everything passed.
const CheckResult *firstFailure(const std::vector<CheckResult> &results);

} // namespace gale
