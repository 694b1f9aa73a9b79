#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gale/planner.hpp"
#include "oracles.hpp"
#include "planner_scenes.hpp"

#include <algorithm>

using namespace gale;

namespace
{

EsdfGrid emptyMap()
{
    return buildEsdf(VoxelGrid(Vec3::Zero(), 0.1, Eigen::Vector3i(100, 60, 30)));
}

EsdfGrid singleObstacleMap()
{
    VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(40, 40, 40));
    g.setOccupied({20, 20, 20});
    return buildEsdf(g);
}

// Trajectory from the front end, optionally time-compressed to excite the
// feasibility penalty.
MincoTrajectory guessTrajectory(const scenes::Scene &s, double timeScale)
{
    const auto path = searchPath(s.esdf, s.start, s.goal, 0.55);
    const InitialGuess g = initialGuess(path, 2.0, 6.0);
    BoundaryState head, tail;
    head.p = s.start;
    tail.p = s.goal;
    return MincoTrajectory::construct(g.waypoints, g.durations * timeScale, head, tail);
}

struct Flat
{
    Eigen::VectorXd x;
    int m;
    BoundaryState head, tail;

    MincoTrajectory build(const Eigen::VectorXd &v) const
    {
        Eigen::VectorXd t(m);
        for (int i = 0; i < m; ++i)
            t(i) = durationFromSurrogate(v(3 * (m - 1) + i));
        return MincoTrajectory::construct(v.head(3 * (m - 1)).reshaped(3, m - 1), t, head, tail);
    }
};

Flat flatten(const MincoTrajectory &tr)
{
    Flat f;
    f.m = tr.pieceCount();
    f.head = tr.head();
    f.tail = tr.tail();
    f.x.resize(3 * (f.m - 1) + f.m);
    f.x.head(3 * (f.m - 1)) = tr.waypoints().reshaped();
    for (int i = 0; i < f.m; ++i)
        f.x(3 * (f.m - 1) + i) = surrogateFromDuration(tr.durations()(i));
    return f;
}

// Relative error of the analytic objective gradient over (q, tau) against
// central differences.
double gradientError(const MincoTrajectory &tr, const PlanningProblem &pr)
{
    const Flat f = flatten(tr);
    MincoGradient g;
    evaluateObjective(tr, pr, &g);
    Eigen::VectorXd analytic(f.x.size());
    analytic.head(3 * (f.m - 1)) = g.points.reshaped();
    for (int i = 0; i < f.m; ++i)
        analytic(3 * (f.m - 1) + i) = g.times(i) * durationSurrogateGradient(f.x(3 * (f.m - 1) + i));
    Eigen::VectorXd fd(f.x.size());
    for (Eigen::Index i = 0; i < f.x.size(); ++i)
        fd(i) = oracle::gradientFd([&](const Eigen::VectorXd &v) { return evaluateObjective(f.build(v), pr).total; },
                                   f.x, i, 1e-6);
    return oracle::normRelError(analytic, fd);
}

PlanningProblem sceneProblem(const scenes::Scene &s, const MincoTrajectory &tr, double dq)
{
    PlanningProblem pr;
    pr.esdf = &s.esdf;
    pr.predictions = s.predictions;
    pr.dq.assign(tr.constraintPoints(0.1).size(), dq);
    return pr;
}

} // namespace

TEST_CASE("static penalty")
{
    const EsdfGrid e = singleObstacleMap();
    const Vec3 p(2.55, 2.05, 2.05);
    const double d = e.distance(p);
    PenaltyValue v = staticPenalty(p, e, d - 1.0);
    CHECK(v.cost == 0.0);
    CHECK(v.gradP.isZero(0.0));
    v = staticPenalty(p, e, d + 0.1);
    CHECK(v.cost == doctest::Approx(1e-3).epsilon(1e-9));

    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> ud(1.6, 2.6);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
        const Vec3 q(ud(rng), ud(rng), ud(rng));
        const double thr = 0.8;
        const Vec3 g = staticPenalty(q, e, thr).gradP;
        Eigen::VectorXd fd(3);
        for (int a = 0; a < 3; ++a)
            fd(a) = oracle::gradientFd([&](const Eigen::VectorXd &x) { return staticPenalty(x, e, thr).cost; }, q, a,
                                       1e-7);
        if (fd.norm() > 1e-8)
            worst = std::max(worst, oracle::normRelError(g, fd));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dynamic penalty")
{
    ObstaclePrediction ob;
    ob.position = Vec3(1.0, 0.0, 0.0);
    ob.velocity = Vec3(-0.5, 0.2, 0.0);
    ob.captureTime = 2.0;
    ob.horizon = 3.0;
    ob.radius = 0.0;
    const double dr = 0.7;

    CHECK(dynamicPenalty(ob.predict(3.0) + Vec3(10 * dr, 0, 0), {ob}, 3.0, dr).cost == 0.0);
    CHECK(dynamicPenalty(ob.predict(3.0), {ob}, 3.0, dr).cost == doctest::Approx(std::pow(dr, 6)).epsilon(1e-12));
    // Outside the prediction window the obstacle is dropped.
    CHECK(dynamicPenalty(ob.predict(5.5), {ob}, 5.5, dr).cost == 0.0);
    CHECK(dynamicPenalty(ob.predict(1.5), {ob}, 1.5, dr).cost == 0.0);

    ObstaclePrediction other = ob;
    other.position = Vec3(1.3, 0.2, 0.1);
    const Vec3 p(0.6, 0.1, 0.0);
    const double sum = dynamicPenalty(p, {ob}, 3.0, dr).cost + dynamicPenalty(p, {other}, 3.0, dr).cost;
    CHECK(dynamicPenalty(p, {ob, other}, 3.0, dr).cost == doctest::Approx(sum).epsilon(1e-14));

    // Obstacle radius enlarges the threshold.
    other.radius = 0.2;
    CHECK(dynamicPenalty(other.predict(3.0), {other}, 3.0, dr).cost == doctest::Approx(std::pow(dr + 0.2, 6)));

    double gt = 0.0;
    const PenaltyValue v = dynamicPenalty(p, {ob, other}, 3.0, dr, &gt);
    Eigen::VectorXd fd(3);
    for (int a = 0; a < 3; ++a)
        fd(a) = oracle::gradientFd(
            [&](const Eigen::VectorXd &x) { return dynamicPenalty(x, {ob, other}, 3.0, dr).cost; }, p, a, 1e-7);
    CHECK(oracle::normRelError(v.gradP, fd) < 1e-6);
    const double fdt = (dynamicPenalty(p, {ob, other}, 3.0 + 1e-7, dr).cost -
                        dynamicPenalty(p, {ob, other}, 3.0 - 1e-7, dr).cost) /
                       2e-7;
    CHECK(gt == doctest::Approx(fdt).epsilon(1e-6));
}

TEST_CASE("feasibility penalty")
{
    CHECK(feasibilityPenalty(Vec3(2.0, 0, 0), Vec3::Zero(), 2.0, 6.0).cost == 0.0);
    CHECK(feasibilityPenalty(Vec3(std::sqrt(5.0), 0, 0), Vec3::Zero(), 2.0, 6.0).cost ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(feasibilityPenalty(Vec3::Zero(), Vec3(0, 0, std::sqrt(37.0)), 2.0, 6.0).cost ==
          doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(403);
    std::uniform_real_distribution<double> ud(-4.0, 4.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
        Eigen::VectorXd va(6);
        for (int i = 0; i < 6; ++i)
            va(i) = ud(rng) * (i < 3 ? 1.0 : 3.0);
        auto cost = [](const Eigen::VectorXd &x) {
            return feasibilityPenalty(x.head<3>(), x.tail<3>(), 2.0, 6.0).cost;
        };
        const PenaltyValue v = feasibilityPenalty(va.head<3>(), va.tail<3>(), 2.0, 6.0);
        Eigen::VectorXd an(6), fd(6);
        an << v.gradV, v.gradA;
        for (int i = 0; i < 6; ++i)
            fd(i) = oracle::gradientFd(cost, va, i, 1e-6 * std::max(1.0, std::abs(va(i))));
        if (fd.norm() > 0.0)
            worst = std::max(worst, oracle::normRelError(an, fd));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("duration surrogate")
{
    for (double t : {1e-3, 0.2, 0.999, 1.0, 1.5, 7.0, 120.0})
        CHECK(durationFromSurrogate(surrogateFromDuration(t)) == doctest::Approx(t).epsilon(1e-12));
    for (double tau : {-5.0, -0.3, 0.0, 0.4, 3.0})
    {
        CHECK(durationFromSurrogate(tau) > 0.0);
        const double fd = (durationFromSurrogate(tau + 1e-7) - durationFromSurrogate(tau - 1e-7)) / 2e-7;
        CHECK(durationSurrogateGradient(tau) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(surrogateFromDuration(0.0), InvalidInput);
}

TEST_CASE("front end")
{
    SUBCASE("empty map gives a straight evenly split line")
    {
        const EsdfGrid e = emptyMap();
        const auto path = searchPath(e, Vec3(0.55, 3.05, 1.55), Vec3(9.45, 3.05, 1.55), 0.5);
        REQUIRE(path.size() == 2);
        const InitialGuess g = initialGuess(path, 2.0, 6.0);
        const int m = static_cast<int>(g.durations.size());
        CHECK(m == 6);
        for (int i = 0; i < m - 1; ++i)
        {
            const Vec3 expect = path[0] + (path[1] - path[0]) * (i + 1.0) / m;
            CHECK((g.waypoints.col(i) - expect).norm() < 1e-12);
        }
        // Rest-to-rest trapezoid: 8.9 m at 2 m/s with 6 m/s^2 ramps.
        CHECK(g.durations.sum() == doctest::Approx(8.9 / 2.0 + 2.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("wall with a gap")
    {
        VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(100, 60, 30));
        g.addBox(Vec3(4.8, 0.0, 0.0), Vec3(5.2, 6.0, 3.0));
        VoxelGrid holed(Vec3::Zero(), 0.1, g.dims());
        for (int z = 0; z < 30; ++z)
            for (int y = 0; y < 60; ++y)
                for (int x = 0; x < 100; ++x)
                {
                    const Vec3 c = g.center({x, y, z});
                    const bool gap = c.y() > 3.5 && c.y() < 5.0 && c.z() > 0.8 && c.z() < 2.2;
                    if (g.occupied({x, y, z}) && !gap)
                        holed.setOccupied({x, y, z});
                }
        const EsdfGrid e = buildEsdf(holed);
        const double ds = 0.5;
        const auto path = searchPath(e, Vec3(1.0, 1.5, 1.5), Vec3(9.0, 1.5, 1.5), ds);
        bool throughGap = false;
        for (size_t i = 0; i + 1 < path.size(); ++i)
            for (int s = 0; s <= 100; ++s)
            {
                const Vec3 p = path[i] + (path[i + 1] - path[i]) * (s / 100.0);
                CHECK(e.distance(p) >= ds - 1e-9);
                if (std::abs(p.x() - 5.0) < 0.05)
                    throughGap = throughGap || (p.y() > 3.5 && p.y() < 5.0);
            }
        CHECK(throughGap);
        const InitialGuess ig = initialGuess(path, 2.0, 6.0);
        for (int i = 0; i < ig.waypoints.cols(); ++i)
            CHECK(e.distance(ig.waypoints.col(i)) >= ds - 1e-9);
    }
    SUBCASE("blocked corridor")
    {
        VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(60, 30, 20));
        g.addBox(Vec3(2.9, 0.0, 0.0), Vec3(3.1, 3.0, 2.0));
        const EsdfGrid e = buildEsdf(g);
        CHECK_THROWS_AS(searchPath(e, Vec3(1.0, 1.5, 1.0), Vec3(5.0, 1.5, 1.0), 0.3), PlanningFailure);
    }
}

TEST_CASE("objective without active penalties")
{
    const EsdfGrid e = emptyMap();
    scenes::Scene s{e, Vec3(0.6, 3.0, 1.5), Vec3(9.4, 3.0, 1.5), {}};
    const MincoTrajectory tr = guessTrajectory(s, 1.5);
    PlanningProblem pr = sceneProblem(s, tr, 0.3);
    pr.weights.lambdaFeasibility = 1e12;
    pr.weights.vMax = 100.0;
    pr.weights.aMax = 100.0;
    const ObjectiveBreakdown j = evaluateObjective(tr, pr);
    CHECK(j.total == tr.smoothnessCost() + pr.weights.rho * tr.totalDuration());
}

TEST_CASE("trapezoidal transcription of the dynamic penalty")
{
    std::mt19937_64 rng(405);
    const scenes::Scene s = scenes::cluttered(rng, 0, true);
    for (double scale : {1.0, 1.13})
    {
        const MincoTrajectory tr = guessTrajectory(s, scale);
        PlanningProblem pr = sceneProblem(s, tr, 0.4);
        pr.terms = {false, false, false, true, false};
        pr.startTime = 0.7;
        const double thr = 0.4 + pr.weights.dynamicClearance;
        const double delta = pr.weights.delta;
        const int kappa = static_cast<int>(std::floor(tr.totalDuration() / delta));
        auto pen = [&](double rel) {
            // Predicted position from the absolute sample time only.
            const double world = pr.startTime + rel;
            const ObstaclePrediction &ob = s.predictions[0];
            if (!ob.covers(world))
                return 0.0;
            const double r = thr + ob.radius;
            const double psi = r * r - (tr.evaluate(rel, 0) - ob.predict(world)).squaredNorm();
            return psi > 0.0 ? psi * psi * psi : 0.0;
        };
        double sum = 0.0;
        for (int k = 0; k <= kappa; ++k)
            sum += delta * ((k == 0 || k == kappa) ? 0.5 : 1.0) * pen(k * delta);
        sum += 0.5 * (tr.totalDuration() - kappa * delta) * (pen(kappa * delta) + pen(tr.totalDuration()));
        const ObjectiveBreakdown j = evaluateObjective(tr, pr);
        CHECK(j.dynamicCost > 0.0);
        CHECK(j.dynamicCost == doctest::Approx(sum).epsilon(1e-12));
        CHECK(j.total == doctest::Approx(pr.weights.lambdaDynamic * sum).epsilon(1e-12));
    }
}

TEST_CASE("objective gradient matches finite differences on random scenes")
{
    std::mt19937_64 rng(407);
    double worstFull = 0.0;
    double worstTerm[5] = {0, 0, 0, 0, 0};
    for (int trial = 0; trial < 20; ++trial)
    {
        const scenes::Scene s = scenes::cluttered(rng, 5, true);
        const MincoTrajectory tr = guessTrajectory(s, 0.6);
        PlanningProblem pr = sceneProblem(s, tr, 0.45);
        const ObjectiveBreakdown j = evaluateObjective(tr, pr);
        CHECK(j.feasibilityCost > 0.0);
        worstFull = std::max(worstFull, gradientError(tr, pr));
        for (int t = 0; t < 5; ++t)
        {
            PlanningProblem one = pr;
            one.terms = {t == 0, t == 1, t == 2, t == 3, t == 4};
            if (t == 2 && evaluateObjective(tr, one).total == 0.0)
                continue;
            if (t == 3 && evaluateObjective(tr, one).total == 0.0)
                continue;
            worstTerm[t] = std::max(worstTerm[t], gradientError(tr, one));
        }
    }
    CHECK(worstFull < 1e-3);
    for (double w : worstTerm)
        CHECK(w < 1e-4);
}

TEST_CASE("penalty weights only increase the objective")
{
    std::mt19937_64 rng(409);
    const scenes::Scene s = scenes::cluttered(rng, 6);
    const MincoTrajectory tr = guessTrajectory(s, 1.0);
    PlanningProblem pr = sceneProblem(s, tr, 0.45);
    double prev = -1.0;
    for (double ls : {0.0, 1.0, 1e2, 1e4, 1e6})
    {
        pr.weights.lambdaStatic = ls;
        const double j = evaluateObjective(tr, pr).total;
        CHECK(j >= prev);
        prev = j;
    }
}

TEST_CASE("optimizer descent and feasibility")
{
    QuadParams prm;
    SUBCASE("obstacle-free scene")
    {
        const EsdfGrid e = emptyMap();
        scenes::Scene s{e, Vec3(0.6, 3.0, 1.5), Vec3(9.4, 3.0, 1.5), {}};
        PlannerConfig cfg;
        Planner planner(cfg, prm);
        const MincoTrajectory init = guessTrajectory(s, 1.0);
        const PlanResult r = planner.optimize(init, e, {}, {}, 0.0);
        CHECK(r.cost.total <= r.initialCost);
        CHECK(r.trajectory.smoothnessCost() <= init.smoothnessCost());
        CHECK(r.auditPassed);
    }
    SUBCASE("cluttered scenes")
    {
        std::mt19937_64 rng(411);
        PlannerConfig cfg;
        Planner planner(cfg, prm);
        DisturbanceEstimate est;
        est.force = Vec3(0.0, 2.0, 0.0);
        for (int trial = 0; trial < 5; ++trial)
        {
            const scenes::Scene s = scenes::cluttered(rng, 4);
            BoundaryState head;
            head.p = s.start;
            const PlanResult r = planner.plan(head, s.goal, s.esdf, {}, est, 0.0);
            CHECK(r.cost.total <= r.initialCost);
            CHECK(r.auditPassed);
            // Independent audit over the returned bounds.
            for (const ConstraintPoint &cp : r.trajectory.constraintPoints(cfg.weights.delta))
            {
                const double da = r.bounds[static_cast<size_t>(cp.index)].radius + cfg.weights.staticClearance;
                CHECK(s.esdf.distance(cp.p) >= da - 1e-3);
            }
        }
    }
}

TEST_CASE("clearance grows with the disturbance bound")
{
    QuadParams prm;
    PlannerConfig cfg;
    Planner planner(cfg, prm);
    std::mt19937_64 rng(413);
    const double forces[] = {0.0, 3.5, 6.5};
    std::vector<double> clearance[3];
    for (int seed = 0; seed < 20; ++seed)
    {
        const scenes::Scene s = scenes::cluttered(rng, 4);
        BoundaryState head;
        head.p = s.start;
        for (int c = 0; c < 3; ++c)
        {
            DisturbanceEstimate est;
            est.force = Vec3(0.0, forces[c], 0.0);
            try
            {
                const PlanResult r = planner.plan(head, s.goal, s.esdf, {}, est, 0.0);
                double dmin = std::numeric_limits<double>::infinity();
                for (const ConstraintPoint &cp : r.trajectory.constraintPoints(0.02))
                    dmin = std::min(dmin, s.esdf.distance(cp.p));
                clearance[c].push_back(dmin);
            }
            catch (const PlanningFailure &)
            {
                clearance[c].push_back(std::numeric_limits<double>::infinity());
            }
        }
    }
    double med[3];
    for (int c = 0; c < 3; ++c)
    {
        std::sort(clearance[c].begin(), clearance[c].end());
        med[c] = 0.5 * (clearance[c][9] + clearance[c][10]);
    }
    MESSAGE("median clearance: " << med[0] << " " << med[1] << " " << med[2]);
    CHECK(med[1] >= med[0]);
    CHECK(med[2] >= med[1]);
}

TEST_CASE("replan trigger")
{
    const EsdfGrid e = emptyMap();
    scenes::Scene s{e, Vec3(0.6, 3.0, 1.5), Vec3(9.4, 3.0, 1.5), {}};
    const MincoTrajectory tr = guessTrajectory(s, 1.0);
    const std::vector<double> dq(tr.constraintPoints(0.1).size(), 0.35);
    PlannerWeights w;

    CHECK((checkReplan(tr, 0.0, dq, {}, &e, w, 0.0) == ReplanReason::None));

    // Head-on at a 0.8 m/s closing speed, slightly off the path.
    ObstaclePrediction ob;
    ob.position = Vec3(9.0, 3.15, 1.5);
    ob.velocity = Vec3(-0.8, 0.0, 0.0);
    ob.captureTime = 0.0;
    CHECK((checkReplan(tr, 0.0, dq, {ob}, &e, w, 0.0) == ReplanReason::DynamicObstacle));

    // Behind the vehicle and moving away.
    ObstaclePrediction away = ob;
    away.position = Vec3(0.0, 3.0, 1.5);
    away.velocity = Vec3(-0.8, 0.0, 0.0);
    CHECK((checkReplan(tr, 0.0, dq, {away}, &e, w, 0.5) == ReplanReason::None));

    // Monotone in the trigger threshold.
    std::mt19937_64 rng(415);
    std::uniform_real_distribution<double> ud(0.0, 6.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        ObstaclePrediction o;
        o.position = Vec3(ud(rng) + 2.0, ud(rng) * 0.5 + 1.5, 1.5);
        o.velocity = Vec3(-0.8, 0.1, 0.0);
        bool prev = false;
        for (double trig : {0.0, 0.1, 0.2, 0.5, 1.0, 2.0})
        {
            w.replanTrigger = trig;
            const bool hit = checkReplan(tr, 0.0, dq, {o}, &e, w, 1.0) != ReplanReason::None;
            CHECK((hit || !prev));
            prev = hit;
        }
    }
}

TEST_CASE("L-BFGS on smooth and semi-smooth problems")
{
    // Rosenbrock.
    const ObjectiveFn rosen = [](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
        g(0) = -2.0 * a - 400.0 * x(0) * b;
        g(1) = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    LbfgsParams p;
    p.maxIterations = 500;
    p.relativeDecrease = 0.0;
    const LbfgsResult r = minimizeLbfgs(rosen, Eigen::Vector2d(-1.2, 1.0), p);
    CHECK((r.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-4);

    // Cubed hinge plus a quadratic.
    const ObjectiveFn hinge = [](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        const double h = std::max(1.0 - x(0), 0.0);
        g(0) = 2.0 * x(0) - 300.0 * h * h;
        g(1) = 2.0 * (x(1) - 3.0);
        return x(0) * x(0) + (x(1) - 3.0) * (x(1) - 3.0) + 100.0 * h * h * h;
    };
    Eigen::VectorXd g0(2);
    const double f0 = hinge(Eigen::Vector2d(-2.0, 0.0), g0);
    const LbfgsResult h = minimizeLbfgs(hinge, Eigen::Vector2d(-2.0, 0.0));
    CHECK(h.value <= f0);
    CHECK(std::abs(h.x(1) - 3.0) < 1e-5);
}
