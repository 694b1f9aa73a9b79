#pragma once

#include "gale/common.hpp"

#include <functional>

namespace gale
{

// f(x, grad) -> value; grad has the size of x on entry.
using ObjectiveFn = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

struct LbfgsParams
{
    int memory = 16;
    int maxIterations = 300;
    int maxLineSearch = 60;
    double gradTolerance = 1e-6;    // on |g|_inf / max(1, |x|_inf)
    double relativeDecrease = 1e-9; // stop when (f_{k-past} - f_k) / max(1, |f_k|) falls below
    int past = 5;
    double armijo = 1e-4;
    double curvature = 0.9;

    bool operator==(const LbfgsParams &) const = default;
};

enum class LbfgsStatus
{
    Converged,
    Stalled,          // relative decrease criterion
    MaxIterations,
    LineSearchFailed, // best iterate returned
};

struct LbfgsResult
{
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStatus status = LbfgsStatus::MaxIterations;
};

const char *toString(LbfgsStatus s);

// Limited-memory BFGS with a weak-Wolfe bisection line search (Lewis and
// Overton), which tolerates objectives that are only piecewise C^2.
LbfgsResult minimizeLbfgs(const ObjectiveFn &f, const Eigen::VectorXd &x0, const LbfgsParams &params = {});

} // namespace gale
