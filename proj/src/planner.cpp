#include "gale/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>

namespace gale
{

void PlannerWeights::validate() const
{
    if (lambdaStatic < 0.0 || lambdaDynamic < 0.0 || lambdaFeasibility < 0.0 || rho < 0.0)
    {
        throw InvalidInput("PlannerWeights: weights must be non-negative");
    }
    if (!(vMax > 0.0) || !(aMax > 0.0) || !(delta > 0.0))
    {
        throw InvalidInput("PlannerWeights: v_m, a_m and delta must be positive");
    }
    if (staticClearance < 0.0 || dynamicClearance < 0.0 || !(lookahead > 0.0))
    {
        throw InvalidInput("PlannerWeights: clearances must be non-negative, lookahead positive");
    }
}

bool ObstaclePrediction::covers(double worldTime) const
{
    const double age = worldTime - captureTime;
    return age >= 0.0 && age <= horizon;
}

PenaltyValue staticPenalty(const Vec3 &p, const EsdfGrid &esdf, double threshold)
{
    PenaltyValue out;
    const EsdfSample s = esdf.query(p);
    const double psi = threshold - s.distance;
    if (psi > 0.0)
    {
        out.cost = psi * psi * psi;
        out.gradP = -3.0 * psi * psi * s.gradient;
    }
    return out;
}

PenaltyValue dynamicPenalty(const Vec3 &p, const std::vector<ObstaclePrediction> &predictions, double worldTime,
                            double threshold, double *gradT)
{
    PenaltyValue out;
    double dt = 0.0;
    for (const ObstaclePrediction &ob : predictions)
    {
        if (!ob.covers(worldTime))
        {
            continue;
        }
        const double r = threshold + ob.radius;
        const Vec3 diff = p - ob.predict(worldTime);
        const double psi = r * r - diff.squaredNorm();
        if (psi > 0.0)
        {
            out.cost += psi * psi * psi;
            const Vec3 g = -6.0 * psi * psi * diff;
            out.gradP += g;
            dt -= g.dot(ob.velocity);
        }
    }
    if (gradT)
    {
        *gradT = dt;
    }
    return out;
}

PenaltyValue feasibilityPenalty(const Vec3 &v, const Vec3 &a, double vMax, double aMax)
{
    PenaltyValue out;
    const double pv = v.squaredNorm() - vMax * vMax;
    if (pv > 0.0)
    {
        out.cost += pv * pv * pv;
        out.gradV = 6.0 * pv * pv * v;
    }
    const double pa = a.squaredNorm() - aMax * aMax;
    if (pa > 0.0)
    {
        out.cost += pa * pa * pa;
        out.gradA = 6.0 * pa * pa * a;
    }
    return out;
}

double durationFromSurrogate(double tau)
{
    return tau > 0.0 ? (0.5 * tau + 1.0) * tau + 1.0 : 1.0 / ((0.5 * tau - 1.0) * tau + 1.0);
}

double surrogateFromDuration(double t)
{
    if (!(t > 0.0))
    {
        throw InvalidInput("surrogateFromDuration: duration must be positive");
    }
    return t > 1.0 ? std::sqrt(2.0 * t - 1.0) - 1.0 : 1.0 - std::sqrt(2.0 / t - 1.0);
}

double durationSurrogateGradient(double tau)
{
    if (tau > 0.0)
    {
        return tau + 1.0;
    }
    const double den = (0.5 * tau - 1.0) * tau + 1.0;
    return (1.0 - tau) / (den * den);
}

double PlanningProblem::dqAt(int k) const
{
    if (dq.empty())
    {
        return 0.0;
    }
    return dq[static_cast<size_t>(std::clamp(k, 0, static_cast<int>(dq.size()) - 1))];
}

namespace
{

struct PointPenalty
{
    double staticCost = 0.0, dynamicCost = 0.0, feasibilityCost = 0.0;
    double weighted = 0.0; // lambda-weighted sum
    Vec3 gp = Vec3::Zero(), gv = Vec3::Zero(), ga = Vec3::Zero();
    double gWorldTime = 0.0;
};

PointPenalty pointPenalty(const ConstraintPoint &cp, int k, double worldTime, const PlanningProblem &pr)
{
    const PlannerWeights &w = pr.weights;
    PointPenalty out;
    const double dq = pr.dqAt(k);
    if (pr.terms.staticObstacles && pr.esdf && w.lambdaStatic > 0.0)
    {
        const PenaltyValue s = pr.staticPenaltyFn(cp.p, *pr.esdf, dq + w.staticClearance + pr.staticSlack);
        out.staticCost = s.cost;
        out.weighted += w.lambdaStatic * s.cost;
        out.gp += w.lambdaStatic * s.gradP;
    }
    if (pr.terms.dynamicObstacles && !pr.predictions.empty() && w.lambdaDynamic > 0.0)
    {
        double gt = 0.0;
        const PenaltyValue d = dynamicPenalty(cp.p, pr.predictions, worldTime, dq + w.dynamicClearance + pr.dynamicSlack, &gt);
        out.dynamicCost = d.cost;
        out.weighted += w.lambdaDynamic * d.cost;
        out.gp += w.lambdaDynamic * d.gradP;
        out.gWorldTime += w.lambdaDynamic * gt;
    }
    if (pr.terms.feasibility && w.lambdaFeasibility > 0.0)
    {
        const PenaltyValue f = feasibilityPenalty(cp.v, cp.a, w.vMax, w.aMax);
        out.feasibilityCost = f.cost;
        out.weighted += w.lambdaFeasibility * f.cost;
        out.gv += w.lambdaFeasibility * f.gradV;
        out.ga += w.lambdaFeasibility * f.gradA;
    }
    return out;
}

// Accumulates weight * dP/dc for a point into the coefficient gradient and
// returns d(weight * P)/d(local time) at fixed coefficients.
double scatterPoint(const ConstraintPoint &cp, const PointPenalty &pp, double weight, Eigen::MatrixX3d &gc)
{
    const auto b0 = basisDerivative(cp.localTime, 0);
    const auto b1 = basisDerivative(cp.localTime, 1);
    const auto b2 = basisDerivative(cp.localTime, 2);
    gc.block<6, 3>(6 * cp.piece, 0) +=
        weight * (b0 * pp.gp.transpose() + b1 * pp.gv.transpose() + b2 * pp.ga.transpose());
    return weight * (pp.gp.dot(cp.v) + pp.gv.dot(cp.a) + pp.ga.dot(cp.j));
}

} // namespace

ObjectiveBreakdown evaluateObjective(const MincoTrajectory &traj, const PlanningProblem &pr, MincoGradient *grad)
{
    const PlannerWeights &w = pr.weights;
    const int m = traj.pieceCount();
    const double delta = w.delta;
    ObjectiveBreakdown out;
    Eigen::MatrixX3d gc;
    Eigen::VectorXd gt;
    if (grad)
    {
        gc.setZero(6 * m, 3);
        gt.setZero(m);
    }

    if (pr.terms.smoothness)
    {
        out.smoothness = traj.smoothnessCost();
        if (grad)
        {
            traj.smoothnessPartials(gc, gt);
        }
    }
    if (pr.terms.time)
    {
        out.time = w.rho * traj.totalDuration();
        if (grad)
        {
            gt.array() += w.rho;
        }
    }

    const std::vector<ConstraintPoint> pts = traj.constraintPoints(delta);
    const int kappa = static_cast<int>(pts.size()) - 1;
    const double tail = traj.totalDuration() - kappa * delta;
    double staticSum = 0.0, dynamicSum = 0.0, feasSum = 0.0, weighted = 0.0;
    PointPenalty lastPenalty;

    // Piece start offsets: d(local time)/dT_i = -1 for every piece i before the owner.
    auto shiftEarlierPieces = [&](int piece, double dLocal) {
        for (int i = 0; i < piece; ++i)
        {
            gt(i) -= dLocal;
        }
    };

    for (int k = 0; k <= kappa; ++k)
    {
        const ConstraintPoint &cp = pts[static_cast<size_t>(k)];
        const PointPenalty pp = pointPenalty(cp, k, pr.startTime + k * delta, pr);
        double wk = delta * ((k == 0 || k == kappa) ? 0.5 : 1.0);
        if (k == kappa)
        {
            wk += 0.5 * tail;
            lastPenalty = pp;
        }
        staticSum += wk * pp.staticCost;
        dynamicSum += wk * pp.dynamicCost;
        feasSum += wk * pp.feasibilityCost;
        weighted += wk * pp.weighted;
        if (grad && pp.weighted > 0.0)
        {
            const double dLocal = scatterPoint(cp, pp, wk, gc);
            shiftEarlierPieces(cp.piece, dLocal);
        }
    }

    // Terminal sample of the trapezoidal tail, at T_total on the last piece.
    const ConstraintPoint term = traj.terminalPoint();
    const PointPenalty pt = pointPenalty(term, kappa, pr.startTime + traj.totalDuration(), pr);
    const double wt = 0.5 * tail;
    staticSum += wt * pt.staticCost;
    dynamicSum += wt * pt.dynamicCost;
    feasSum += wt * pt.feasibilityCost;
    weighted += wt * pt.weighted;
    if (grad)
    {
        // The tail width T_total - kappa delta moves with every duration.
        gt.array() += 0.5 * (lastPenalty.weighted + pt.weighted);
        if (pt.weighted > 0.0)
        {
            const double dLocal = scatterPoint(term, pt, wt, gc);
            gt(m - 1) += dLocal;
            gt.array() += wt * pt.gWorldTime;
        }
    }

    out.staticCost = staticSum;
    out.dynamicCost = dynamicSum;
    out.feasibilityCost = feasSum;
    out.total = out.smoothness + out.time + weighted;
    if (grad)
    {
        *grad = traj.backwardGradients(gc, gt);
    }
    return out;
}

AuditReport auditTrajectory(const MincoTrajectory &traj, const PlanningProblem &pr, double tolerance)
{
    AuditReport rep;
    const PlannerWeights &w = pr.weights;
    std::vector<ConstraintPoint> pts = traj.constraintPoints(w.delta);
    ConstraintPoint term = traj.terminalPoint();
    term.index = static_cast<int>(pts.size()) - 1;
    pts.push_back(term);
    for (const ConstraintPoint &cp : pts)
    {
        const double dq = pr.dqAt(cp.index);
        if (pr.esdf)
        {
            const double margin = pr.esdf->distance(cp.p) - (dq + w.staticClearance);
            rep.minStaticMargin = std::min(rep.minStaticMargin, margin);
        }
        const double worldTime = pr.startTime + cp.time;
        for (const ObstaclePrediction &ob : pr.predictions)
        {
            if (!ob.covers(worldTime))
            {
                continue;
            }
            const double margin = (cp.p - ob.predict(worldTime)).norm() - (dq + w.dynamicClearance + ob.radius);
            rep.minDynamicMargin = std::min(rep.minDynamicMargin, margin);
        }
    }
    rep.passed = rep.minStaticMargin >= -tolerance && rep.minDynamicMargin >= -tolerance;
    return rep;
}

// ---------------------------------------------------------------- front end

namespace
{

struct OpenNode
{
    double f;
    std::int64_t id;
    bool operator>(const OpenNode &o) const { return f > o.f || (f == o.f && id > o.id); }
};

bool segmentClear(const EsdfGrid &esdf, const Vec3 &a, const Vec3 &b, double clearance)
{
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / (0.5 * esdf.grid().resolution()))));
    for (int i = 0; i <= n; ++i)
    {
        if (esdf.distance(a + (b - a) * (static_cast<double>(i) / n)) < clearance)
        {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<Vec3> searchPath(const EsdfGrid &esdf, const Vec3 &start, const Vec3 &goal, double clearance,
                             long long maxExpansions)
{
    const VoxelGrid &grid = esdf.grid();
    const Eigen::Vector3i s = grid.indexOf(start), g = grid.indexOf(goal);
    if (!grid.contains(s) || !grid.contains(g))
    {
        throw PlanningFailure("searchPath: start or goal outside the map");
    }
    if (esdf.at(g) < clearance)
    {
        throw PlanningFailure("searchPath: goal lacks the required clearance");
    }
    if (esdf.at(s) <= 0.0)
    {
        throw PlanningFailure("searchPath: start is inside an obstacle");
    }
    const Eigen::Vector3i dims = grid.dims();
    const size_t n = static_cast<size_t>(grid.voxelCount());
    const double res = grid.resolution();
    std::vector<float> cost(n, std::numeric_limits<float>::infinity());
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<>> open;

    auto idxOf = [&](std::int64_t id) {
        const int x = static_cast<int>(id % dims.x());
        const int y = static_cast<int>((id / dims.x()) % dims.y());
        const int z = static_cast<int>(id / (static_cast<std::int64_t>(dims.x()) * dims.y()));
        return Eigen::Vector3i(x, y, z);
    };
    auto heuristic = [&](const Eigen::Vector3i &i) { return (i - g).cast<double>().norm() * res; };
    // Soft preference for open space within twice the required clearance.
    auto proximity = [&](double d) { return d < 2.0 * clearance ? 2.0 * (2.0 * clearance - d) : 0.0; };

    const std::int64_t sid = grid.linear(s), gid = grid.linear(g);
    cost[static_cast<size_t>(sid)] = 0.0f;
    open.push({heuristic(s), sid});
    long long expansions = 0;
    bool found = false;
    while (!open.empty())
    {
        const OpenNode cur = open.top();
        open.pop();
        if (closed[static_cast<size_t>(cur.id)])
        {
            continue;
        }
        closed[static_cast<size_t>(cur.id)] = 1;
        if (cur.id == gid)
        {
            found = true;
            break;
        }
        if (++expansions > maxExpansions)
        {
            break;
        }
        const Eigen::Vector3i ci = idxOf(cur.id);
        const double gc = cost[static_cast<size_t>(cur.id)];
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                {
                    if (!dx && !dy && !dz)
                    {
                        continue;
                    }
                    const Eigen::Vector3i ni = ci + Eigen::Vector3i(dx, dy, dz);
                    if (!grid.contains(ni))
                    {
                        continue;
                    }
                    const std::int64_t nid = grid.linear(ni);
                    if (closed[static_cast<size_t>(nid)])
                    {
                        continue;
                    }
                    const double d = esdf.at(ni);
                    if (d < clearance)
                    {
                        continue;
                    }
                    const double step = res * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
                    const double nc = gc + step * (1.0 + proximity(d));
                    if (nc < cost[static_cast<size_t>(nid)])
                    {
                        cost[static_cast<size_t>(nid)] = static_cast<float>(nc);
                        parent[static_cast<size_t>(nid)] = static_cast<std::int32_t>(cur.id);
                        open.push({nc + heuristic(ni), nid});
                    }
                }
    }
    if (!found)
    {
        throw PlanningFailure("searchPath: no collision-free path to the goal");
    }

    std::vector<Vec3> raw;
    for (std::int64_t id = gid; id != -1; id = parent[static_cast<size_t>(id)])
    {
        raw.push_back(grid.center(idxOf(id)));
    }
    std::reverse(raw.begin(), raw.end());
    raw.front() = start;
    raw.back() = goal;

    // Greedy line-of-sight shortcutting.
    std::vector<Vec3> path{raw.front()};
    size_t i = 0;
    while (i + 1 < raw.size())
    {
        size_t j = raw.size() - 1;
        while (j > i + 1 && !segmentClear(esdf, raw[i], raw[j], clearance))
        {
            --j;
        }
        path.push_back(raw[j]);
        i = j;
    }
    return path;
}

InitialGuess initialGuess(const std::vector<Vec3> &path, double vMax, double aMax, double pieceLength,
                          int minPieces, int maxPieces)
{
    if (path.size() < 2)
    {
        throw InvalidInput("initialGuess: path needs at least two points");
    }
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < path.size(); ++i)
    {
        cum.push_back(cum.back() + (path[i] - path[i - 1]).norm());
    }
    const double length = cum.back();
    if (!(length > 1e-6))
    {
        throw InvalidInput("initialGuess: start and goal coincide");
    }
    const int m = std::clamp(static_cast<int>(std::lround(length / pieceLength)), minPieces, maxPieces);

    auto pointAt = [&](double s) {
        const auto it = std::upper_bound(cum.begin(), cum.end(), s);
        const size_t seg = std::min(static_cast<size_t>(std::max<std::ptrdiff_t>(it - cum.begin(), 1)) - 1,
                                    path.size() - 2);
        const double segLen = cum[seg + 1] - cum[seg];
        const double r = segLen > 0.0 ? (s - cum[seg]) / segLen : 0.0;
        return Vec3(path[seg] + r * (path[seg + 1] - path[seg]));
    };
    // Time at arc length s of a rest-to-rest trapezoidal speed profile.
    const double accelDist = vMax * vMax / aMax;
    const bool cruise = length >= accelDist;
    const double vPeak = cruise ? vMax : std::sqrt(aMax * length);
    const double ta = vPeak / aMax;
    const double dAcc = 0.5 * vPeak * ta;
    const double tCruise = cruise ? (length - accelDist) / vMax : 0.0;
    auto timeAt = [&](double s) {
        if (s <= dAcc)
        {
            return std::sqrt(2.0 * s / aMax);
        }
        if (s <= length - dAcc)
        {
            return ta + (s - dAcc) / vPeak;
        }
        const double rem = std::max(0.0, length - s);
        return 2.0 * ta + tCruise - std::sqrt(2.0 * rem / aMax);
    };

    InitialGuess g;
    g.waypoints.resize(3, m - 1);
    g.durations.resize(m);
    double prev = 0.0;
    for (int i = 1; i <= m; ++i)
    {
        const double s = length * i / m;
        if (i < m)
        {
            g.waypoints.col(i - 1) = pointAt(s);
        }
        const double t = timeAt(s);
        g.durations(i - 1) = std::max(t - prev, 1e-3);
        prev = t;
    }
    return g;
}

// ---------------------------------------------------------------- optimizer

Planner::Planner(PlannerConfig cfg, QuadParams params) : cfg_(std::move(cfg)), params_(std::move(params))
{
    cfg_.weights.validate();
    cfg_.frs.validate();
    params_.validate();
    gain_ = hoverLqrGain(params_, cfg_.frs.yaw);
}

std::vector<PositionBound> Planner::bounds(const MincoTrajectory &traj, const DisturbanceEstimate &estimate) const
{
    if (!cfg_.frsEnabled)
    {
        return egoOnlyBounds(traj, cfg_.weights.delta, params_);
    }
    FrsConfig frs = cfg_.frs;
    frs.delta = cfg_.weights.delta;
    return propagateAlongTrajectory(traj, estimate, frs, params_, gain_);
}

namespace
{

std::vector<double> radii(const std::vector<PositionBound> &b)
{
    std::vector<double> r;
    r.reserve(b.size());
    for (const auto &pb : b)
    {
        r.push_back(pb.radius);
    }
    return r;
}

Eigen::VectorXd encode(const MincoTrajectory &traj)
{
    const int m = traj.pieceCount();
    Eigen::VectorXd x(3 * (m - 1) + m);
    x.head(3 * (m - 1)) = traj.waypoints().reshaped();
    for (int i = 0; i < m; ++i)
    {
        x(3 * (m - 1) + i) = surrogateFromDuration(traj.durations()(i));
    }
    return x;
}

MincoTrajectory decode(const Eigen::VectorXd &x, int m, const BoundaryState &head, const BoundaryState &tail)
{
    const Eigen::Matrix3Xd q = x.head(3 * (m - 1)).reshaped(3, m - 1);
    Eigen::VectorXd t(m);
    for (int i = 0; i < m; ++i)
    {
        t(i) = durationFromSurrogate(x(3 * (m - 1) + i));
    }
    return MincoTrajectory::construct(q, t, head, tail);
}

} // namespace

PlanResult Planner::optimize(const MincoTrajectory &initial, const EsdfGrid &esdf,
                             const std::vector<ObstaclePrediction> &predictions,
                             const DisturbanceEstimate &estimate, double startTime) const
{
    if (initial.empty())
    {
        throw InvalidInput("Planner::optimize: empty initial trajectory");
    }
    const int m = initial.pieceCount();
    const BoundaryState head = initial.head(), tail = initial.tail();

    PlanningProblem pr;
    pr.esdf = &esdf;
    pr.predictions = predictions;
    pr.startTime = startTime;
    pr.weights = cfg_.weights;
    pr.staticSlack = cfg_.staticSlack;
    pr.dynamicSlack = cfg_.dynamicSlack;

    PlanResult res;
    res.bounds = bounds(initial, estimate);
    pr.dq = radii(res.bounds);

    Eigen::VectorXd x = encode(initial);
    MincoTrajectory current = initial;
    for (int round = 0; round <= cfg_.continuationRounds; ++round)
    {
        const ObjectiveFn fn = [&](const Eigen::VectorXd &v, Eigen::VectorXd &g) {
            MincoTrajectory tr;
            try
            {
                tr = decode(v, m, head, tail);
            }
            catch (const InvalidInput &)
            {
                return std::numeric_limits<double>::infinity();
            }
            MincoGradient mg;
            const double val = evaluateObjective(tr, pr, &mg).total;
            g.head(3 * (m - 1)) = mg.points.reshaped();
            for (int i = 0; i < m; ++i)
            {
                const double tau = v(3 * (m - 1) + i);
                g(3 * (m - 1) + i) = mg.times(i) * durationSurrogateGradient(tau);
            }
            return val;
        };
        const LbfgsResult lr = minimizeLbfgs(fn, x, cfg_.lbfgs);
        res.iterations += lr.iterations;
        res.status = lr.status;
        res.rounds = round + 1;
        x = lr.x;
        current = decode(x, m, head, tail);

        // Re-derive the bounds on the optimized trajectory and audit against them.
        res.bounds = bounds(current, estimate);
        pr.dq = radii(res.bounds);
        const AuditReport audit = auditTrajectory(current, pr, cfg_.auditTolerance);
        res.auditPassed = audit.passed;
        res.minClearance = audit.minStaticMargin;
        res.minObstacleGap = audit.minDynamicMargin;
        if (audit.passed)
        {
            break;
        }
        pr.weights.lambdaStatic *= 10.0;
        pr.weights.lambdaDynamic *= 10.0;
    }

    res.cost = evaluateObjective(current, pr);
    res.initialCost = evaluateObjective(initial, pr).total;
    if (res.cost.total > res.initialCost)
    {
        // Never hand back something worse than the starting point.
        current = initial;
        res.bounds = bounds(current, estimate);
        pr.dq = radii(res.bounds);
        res.cost = evaluateObjective(current, pr);
        const AuditReport audit = auditTrajectory(current, pr, cfg_.auditTolerance);
        res.auditPassed = audit.passed;
        res.minClearance = audit.minStaticMargin;
        res.minObstacleGap = audit.minDynamicMargin;
    }
    res.trajectory = current;
    return res;
}

PlanResult Planner::plan(const BoundaryState &head, const Vec3 &goal, const EsdfGrid &esdf,
                         const std::vector<ObstaclePrediction> &predictions, const DisturbanceEstimate &estimate,
                         double startTime) const
{
    const double clearance =
        cfg_.searchClearance >= 0.0 ? cfg_.searchClearance : cfg_.weights.staticClearance + params_.radius;
    BoundaryState tail;
    tail.p = goal;
    auto guessFor = [&](double c) {
        const std::vector<Vec3> path = searchPath(esdf, head.p, goal, c);
        const InitialGuess g = initialGuess(path, cfg_.weights.vMax, cfg_.weights.aMax);
        return MincoTrajectory::construct(g.waypoints, g.durations, head, tail);
    };
    MincoTrajectory init = guessFor(clearance);
    // Prefer a route wide enough for the reachable-set inflation when one exists.
    double widest = 0.0;
    for (const PositionBound &pb : bounds(init, estimate))
    {
        widest = std::max(widest, pb.radius);
    }
    const double wanted = widest + cfg_.weights.staticClearance + cfg_.staticSlack;
    if (wanted > clearance)
    {
        try
        {
            init = guessFor(std::min(wanted, esdf.cap() - esdf.grid().resolution()));
        }
        catch (const PlanningFailure &)
        {
        }
    }
    return optimize(init, esdf, predictions, estimate, startTime);
}

const char *toString(ReplanReason r)
{
    switch (r)
    {
    case ReplanReason::None:
        return "none";
    case ReplanReason::DynamicObstacle:
        return "dynamic_obstacle";
    case ReplanReason::StaticClearance:
        return "static_clearance";
    }
    return "unknown";
}

ReplanReason checkReplan(const MincoTrajectory &traj, double startTime, const std::vector<double> &dq,
                         const std::vector<ObstaclePrediction> &predictions, const EsdfGrid *esdf,
                         const PlannerWeights &w, double now, double staticTolerance)
{
    if (traj.empty())
    {
        return ReplanReason::None;
    }
    const double end = std::min(now + w.lookahead, startTime + traj.totalDuration());
    const int k0 = std::max(0, static_cast<int>(std::ceil((now - startTime) / w.delta - 1e-9)));
    for (int k = k0;; ++k)
    {
        const double t = startTime + k * w.delta;
        if (t > end + 1e-9)
        {
            break;
        }
        const Vec3 p = traj.evaluate(std::min(k * w.delta, traj.totalDuration()), 0);
        const double r = dq.empty() ? 0.0 : dq[static_cast<size_t>(std::min<int>(k, static_cast<int>(dq.size()) - 1))];
        for (const ObstaclePrediction &ob : predictions)
        {
            if (ob.covers(t) && (p - ob.predict(t)).norm() - r - ob.radius < w.replanTrigger)
            {
                return ReplanReason::DynamicObstacle;
            }
        }
        if (esdf && esdf->distance(p) < r + w.staticClearance - staticTolerance)
        {
            return ReplanReason::StaticClearance;
        }
    }
    return ReplanReason::None;
}

} // namespace gale
