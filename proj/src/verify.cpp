#include "gale/verify.hpp"

#include "gale/linalg.hpp"
#include "gale/observer.hpp"

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cstdio>
#include <functional>

namespace gale
{

namespace
{

using nlohmann::ordered_json;

ordered_json toJson(const Eigen::VectorXd &v)
{
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        a.push_back(v(i));
    }
    return a;
}

double relError(const Eigen::VectorXd &a, const Eigen::VectorXd &b, double floor = 1e-9)
{
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

double centralDiff(const std::function<double(const Eigen::VectorXd &)> &f, const Eigen::VectorXd &x,
                   Eigen::Index i, double h)
{
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

// Worst value of a metric plus the first case that violated the tolerance.
struct Worst
{
    double value = 0.0;
    ordered_json firstBad;

    void add(double v, double tolerance, const std::function<ordered_json()> &describe)
    {
        if (!(v < tolerance) && firstBad.is_null())
        {
            firstBad = describe();
        }
        if (v > value || !std::isfinite(v))
        {
            value = v;
        }
    }
};

CheckResult finish(const std::string &suite, const std::string &name, const Worst &w, double tolerance,
                   const std::string &detail)
{
    CheckResult r;
    r.suite = suite;
    r.name = name;
    r.value = w.value;
    r.tolerance = tolerance;
    r.passed = w.firstBad.is_null();
    r.detail = detail;
    if (!r.passed)
    {
        ordered_json c;
        c["check"] = name;
        c["value"] = w.value;
        c["tolerance"] = tolerance;
        c["case"] = w.firstBad;
        r.counterexample = c.dump();
    }
    return r;
}

PenaltyValue flippedStaticPenalty(const Vec3 &p, const EsdfGrid &esdf, double threshold)
{
    PenaltyValue v = staticPenalty(p, esdf, threshold);
    v.gradP = -v.gradP;
    return v;
}

StaticPenaltyFn staticFn(Fault f) { return f == Fault::StaticPenaltySign ? &flippedStaticPenalty : &staticPenalty; }

// Decision vector (q, tau) of a trajectory with fixed boundary states.
struct Flat
{
    Eigen::VectorXd x;
    int m = 0;
    BoundaryState head, tail;

    explicit Flat(const MincoTrajectory &tr) : m(tr.pieceCount()), head(tr.head()), tail(tr.tail())
    {
        x.resize(3 * (m - 1) + m);
        x.head(3 * (m - 1)) = tr.waypoints().reshaped();
        for (int i = 0; i < m; ++i)
        {
            x(3 * (m - 1) + i) = surrogateFromDuration(tr.durations()(i));
        }
    }

    MincoTrajectory build(const Eigen::VectorXd &v) const
    {
        Eigen::VectorXd t(m);
        for (int i = 0; i < m; ++i)
        {
            t(i) = durationFromSurrogate(v(3 * (m - 1) + i));
        }
        return MincoTrajectory::construct(v.head(3 * (m - 1)).reshaped(3, m - 1), t, head, tail);
    }
};

// Relative error of the analytic objective gradient against central differences.
double objectiveGradientError(const MincoTrajectory &tr, const PlanningProblem &pr)
{
    const Flat f(tr);
    MincoGradient g;
    evaluateObjective(tr, pr, &g);
    const int nq = 3 * (f.m - 1);
    Eigen::VectorXd analytic(f.x.size());
    analytic.head(nq) = g.points.reshaped();
    for (int i = 0; i < f.m; ++i)
    {
        analytic(nq + i) = g.times(i) * durationSurrogateGradient(f.x(nq + i));
    }
    Eigen::VectorXd fd(f.x.size());
    const auto cost = [&](const Eigen::VectorXd &v) { return evaluateObjective(f.build(v), pr).total; };
    for (Eigen::Index i = 0; i < f.x.size(); ++i)
    {
        fd(i) = centralDiff(cost, f.x, i, 1e-6);
    }
    return relError(analytic, fd);
}

Eigen::MatrixXd randomPsd(std::mt19937_64 &rng, int n, double scale)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
    {
        for (int j = 0; j < n; ++j)
        {
            g(i, j) = nd(rng);
        }
    }
    return scale * g * g.transpose() / n;
}

Eigen::VectorXd randomUnit(std::mt19937_64 &rng, int n)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i)
    {
        u(i) = nd(rng);
    }
    return u.normalized();
}

Eigen::MatrixXd randomHurwitz(std::mt19937_64 &rng, int n)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
    {
        for (int j = 0; j < n; ++j)
        {
            a(i, j) = nd(rng);
        }
    }
    const double abscissa = a.eigenvalues().real().maxCoeff();
    std::uniform_real_distribution<double> margin(0.1, 2.0);
    return a - (abscissa + margin(rng)) * Eigen::MatrixXd::Identity(n, n);
}

MincoTrajectory randomTrajectory(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> pos(-1.5, 1.5), dur(0.8, 1.5);
    const int pieces = 3;
    Eigen::Matrix3Xd q(3, pieces - 1);
    for (int i = 0; i < pieces - 1; ++i)
    {
        q.col(i) = Vec3(pos(rng), pos(rng), 0.3 * pos(rng));
    }
    Eigen::VectorXd t(pieces);
    for (int i = 0; i < pieces; ++i)
    {
        t(i) = dur(rng);
    }
    BoundaryState head, tail;
    tail.p = Vec3(pos(rng), pos(rng), 0.3 * pos(rng));
    return MincoTrajectory::construct(q, t, head, tail);
}

// Hover thrust, plant by RK4 at 1 kHz, observer at 100 Hz. Returns the worst
// |z1 - F(t)| over t >= from.
double observerError(const std::function<Vec3(double)> &force, double duration, double from)
{
    QuadParams prm;
    DisturbanceObserver obs(ObserverConfig{}, prm);
    QuadState x;
    const ControlInput u = ControlInput::hover(prm);
    obs.reset(x.v);
    double worst = 0.0;
    const int ticks = static_cast<int>(std::round(duration / 0.01));
    for (int k = 0; k < ticks; ++k)
    {
        for (int j = 0; j < 10; ++j)
        {
            x = stepRk4(x, u, force(k * 0.01 + j * 0.001), 0.001, prm);
        }
        const double t = (k + 1) * 0.01;
        obs.update(x.v, x.euler, u.thrust, 0.01);
        if (t >= from - 1e-9)
        {
            worst = std::max(worst, (obs.state().z1 - force(t)).norm());
        }
    }
    return worst;
}

} // namespace

Fault parseFault(const std::string &name)
{
    if (name == "none")
    {
        return Fault::None;
    }
    if (name == "static_penalty_sign")
    {
        return Fault::StaticPenaltySign;
    }
    throw InvalidInput("unknown fault '" + name + "'");
}

ClutteredScene clutteredScene(std::mt19937_64 &rng, int pillars, bool moving)
{
    VoxelGrid grid(Vec3::Zero(), 0.1, Eigen::Vector3i(100, 60, 30));
    std::uniform_real_distribution<double> px(2.5, 7.5), py(1.0, 5.0), pr(0.25, 0.45);
    for (int i = 0; i < pillars; ++i)
    {
        grid.addCylinder(Eigen::Vector2d(px(rng), py(rng)), pr(rng), 0.0, 3.0);
    }
    ClutteredScene s;
    s.esdf = buildEsdf(grid);
    if (moving)
    {
        ObstaclePrediction ob;
        ob.position = Vec3(6.0, py(rng), 1.5);
        ob.velocity = Vec3(-0.8, 0.0, 0.0);
        ob.captureTime = 0.0;
        ob.horizon = 6.0;
        ob.radius = 0.3;
        s.predictions.push_back(ob);
    }
    return s;
}

std::vector<CheckResult> verifyGradients(const VerifyOptions &opt)
{
    std::vector<CheckResult> out;
    std::mt19937_64 rng(opt.seed);
    const StaticPenaltyFn sp = staticFn(opt.fault);

    {
        VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(40, 40, 40));
        g.setOccupied({20, 20, 20});
        g.setOccupied({21, 20, 20});
        const EsdfGrid e = buildEsdf(g);
        std::uniform_real_distribution<double> ud(1.6, 2.6);
        Worst w;
        const double thr = 0.8;
        for (int trial = 0; trial < 200; ++trial)
        {
            const Vec3 q(ud(rng), ud(rng), ud(rng));
            const Vec3 an = sp(q, e, thr).gradP;
            Eigen::VectorXd fd(3);
            for (int a = 0; a < 3; ++a)
            {
                fd(a) = centralDiff([&](const Eigen::VectorXd &x) { return sp(x, e, thr).cost; }, q, a, 1e-7);
            }
            if (fd.norm() > 1e-8)
            {
                const double err = relError(an, fd);
                w.add(err, 1e-4, [&] {
                    return ordered_json{{"point", toJson(q)}, {"threshold", thr}, {"analytic", toJson(an)},
                                        {"finite_difference", toJson(fd)}};
                });
            }
        }
        out.push_back(finish("gradients", "static_penalty", w, 1e-4, "200 points near an obstacle"));
    }

    {
        ObstaclePrediction a, b;
        a.position = Vec3(1.0, 0.0, 0.0);
        a.velocity = Vec3(-0.5, 0.2, 0.0);
        a.captureTime = 2.0;
        a.horizon = 3.0;
        b = a;
        b.position = Vec3(1.3, 0.2, 0.1);
        b.radius = 0.2;
        const std::vector<ObstaclePrediction> obs{a, b};
        std::uniform_real_distribution<double> ud(-0.5, 1.5), ut(2.2, 4.8);
        Worst w;
        const double thr = 0.7;
        for (int trial = 0; trial < 200; ++trial)
        {
            const Vec3 p(ud(rng), 0.5 * ud(rng), 0.3 * ud(rng));
            const double t = ut(rng);
            double gt = 0.0;
            const PenaltyValue v = dynamicPenalty(p, obs, t, thr, &gt);
            Eigen::VectorXd x(4), an(4), fd(4);
            x << p, t;
            an << v.gradP, gt;
            const auto cost = [&](const Eigen::VectorXd &y) {
                return dynamicPenalty(y.head<3>(), obs, y(3), thr).cost;
            };
            for (int i = 0; i < 4; ++i)
            {
                fd(i) = centralDiff(cost, x, i, 1e-7);
            }
            if (fd.norm() > 1e-8)
            {
                w.add(relError(an, fd), 1e-4, [&] {
                    return ordered_json{{"point", toJson(p)}, {"time", t}, {"analytic", toJson(an)},
                                        {"finite_difference", toJson(fd)}};
                });
            }
        }
        out.push_back(finish("gradients", "dynamic_penalty", w, 1e-4, "200 points, two moving obstacles"));
    }

    {
        std::uniform_real_distribution<double> ud(-4.0, 4.0);
        Worst w;
        for (int trial = 0; trial < 200; ++trial)
        {
            Eigen::VectorXd va(6);
            for (int i = 0; i < 6; ++i)
            {
                va(i) = ud(rng) * (i < 3 ? 1.0 : 3.0);
            }
            const PenaltyValue v = feasibilityPenalty(va.head<3>(), va.tail<3>(), 2.0, 6.0);
            Eigen::VectorXd an(6), fd(6);
            an << v.gradV, v.gradA;
            const auto cost = [](const Eigen::VectorXd &x) {
                return feasibilityPenalty(x.head<3>(), x.tail<3>(), 2.0, 6.0).cost;
            };
            for (int i = 0; i < 6; ++i)
            {
                fd(i) = centralDiff(cost, va, i, 1e-6 * std::max(1.0, std::abs(va(i))));
            }
            if (fd.norm() > 0.0)
            {
                w.add(relError(an, fd), 1e-4, [&] {
                    return ordered_json{{"v_a", toJson(va)}, {"analytic", toJson(an)},
                                        {"finite_difference", toJson(fd)}};
                });
            }
        }
        out.push_back(finish("gradients", "feasibility_penalty", w, 1e-4, "200 random (v, a)"));
    }

    {
        const char *names[5] = {"objective_smoothness", "objective_time", "objective_static", "objective_dynamic",
                                "objective_feasibility"};
        Worst terms[5];
        Worst full;
        for (int trial = 0; trial < 20; ++trial)
        {
            const std::uint64_t sceneSeed = rng();
            std::mt19937_64 srng(sceneSeed);
            const ClutteredScene s = clutteredScene(srng, 5, true);
            const auto path = searchPath(s.esdf, s.start, s.goal, 0.55);
            const InitialGuess ig = initialGuess(path, 2.0, 6.0);
            BoundaryState head, tail;
            head.p = s.start;
            tail.p = s.goal;
            // Time-compressed so the feasibility term is active.
            const MincoTrajectory tr = MincoTrajectory::construct(ig.waypoints, ig.durations * 0.6, head, tail);
            PlanningProblem pr;
            pr.esdf = &s.esdf;
            pr.predictions = s.predictions;
            pr.dq.assign(tr.constraintPoints(0.1).size(), 0.45);
            pr.staticPenaltyFn = sp;
            const auto describe = [&] {
                return ordered_json{{"scene_seed", sceneSeed}, {"trial", trial}, {"pieces", tr.pieceCount()}};
            };
            full.add(objectiveGradientError(tr, pr), 1e-3, describe);
            for (int t = 0; t < 5; ++t)
            {
                PlanningProblem one = pr;
                one.terms = {t == 0, t == 1, t == 2, t == 3, t == 4};
                if (t >= 2 && evaluateObjective(tr, one).total == 0.0)
                {
                    continue;
                }
                terms[t].add(objectiveGradientError(tr, one), 1e-4, describe);
            }
        }
        for (int t = 0; t < 5; ++t)
        {
            out.push_back(finish("gradients", names[t], terms[t], 1e-4, "20 cluttered scenes, term isolated"));
        }
        out.push_back(finish("gradients", "objective_full", full, 1e-3, "20 cluttered scenes"));
    }
    return out;
}

std::vector<CheckResult> verifyFrs(const VerifyOptions &opt)
{
    std::vector<CheckResult> out;
    std::mt19937_64 rng(opt.seed + 1);

    {
        Worst w;
        for (int trial = 0; trial < 100; ++trial)
        {
            const Mat9 phi = randomHurwitz(rng, 9);
            const Vec9 ch = randomUnit(rng, 9);
            const double delta = 0.1, b = 1.7, eps = 0.01;
            const Mat9 q = solveChannelLyapunov(phi, ch, b, delta, eps);
            const Mat9 x = q - eps * delta * delta * Mat9::Identity();
            const Mat9 n = delta * b * b * ch * ch.transpose();
            const Mat9 e = (-phi * delta).exp();
            const Mat9 rhs = e * n * e.transpose() - n;
            const double rel = (-phi * x - x * phi.transpose() - rhs).norm() / rhs.norm();
            w.add(rel, 1e-8, [&] { return ordered_json{{"trial", trial}, {"residual", rel}}; });
        }
        out.push_back(finish("frs", "lyapunov_residual", w, 1e-8, "100 random Hurwitz 9x9 systems"));
    }

    {
        Worst w;
        int cases = 0;
        for (int n : {3, 9})
        {
            for (int trial = 0; trial < 20; ++trial, ++cases)
            {
                const Eigen::MatrixXd q1 = randomPsd(rng, n, 0.1 + trial);
                const Eigen::MatrixXd q2 = randomPsd(rng, n, 0.01);
                const Eigen::MatrixXd s = minkowskiShape(q1, q2);
                const Ellipsoid e1{{}, q1}, e2{{}, q2}, es{{}, s};
                for (int k = 0; k < 1000; ++k)
                {
                    const Eigen::VectorXd u = randomUnit(rng, n);
                    const double deficit = std::max(0.0, e1.support(u) + e2.support(u) - es.support(u));
                    w.add(deficit, 1e-9, [&] {
                        return ordered_json{{"dimension", n}, {"trial", trial}, {"direction", toJson(u)},
                                            {"deficit", deficit}};
                    });
                }
            }
        }
        out.push_back(finish("frs", "minkowski_containment", w, 1e-9,
                             std::to_string(cases) + " cases x 1000 directions"));
    }

    {
        Worst w;
        const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
        for (double r : {0.05, 0.1, 0.25, 0.5, 1.0, 2.0})
        {
            for (double r0 : {0.05, 0.25, 0.5, 1.0})
            {
                const double err = (minkowskiShape(r * r * i3, r0 * r0 * i3) - (r + r0) * (r + r0) * i3)
                                       .cwiseAbs()
                                       .maxCoeff();
                w.add(err, 1e-10, [&] { return ordered_json{{"r", r}, {"r0", r0}, {"error", err}}; });
            }
        }
        out.push_back(finish("frs", "sphere_minkowski_exact", w, 1e-10, "(r + r0)^2 I"));
    }

    {
        QuadParams prm;
        const Mat49 k = hoverLqrGain(prm, 0.0);
        std::uniform_real_distribution<double> bd(0.0, 3.0);
        Worst w;
        for (int trial = 0; trial < 100; ++trial)
        {
            const MincoTrajectory traj = randomTrajectory(rng);
            FrsConfig cfg;
            cfg.useFixedBound = true;
            cfg.bound = Vec3(bd(rng), bd(rng), bd(rng));
            DisturbanceEstimate est;
            est.force = Vec3(bd(rng), -bd(rng), 0.0);
            const auto a = propagateAlongTrajectory(traj, est, cfg, prm, k);
            cfg.bound *= 2.0;
            const auto b = propagateAlongTrajectory(traj, est, cfg, prm, k);
            for (size_t i = 0; i < a.size() && i < b.size(); ++i)
            {
                const double shrink = std::max(0.0, a[i].radius - b[i].radius);
                w.add(shrink, 1e-12, [&] {
                    return ordered_json{{"trial", trial}, {"k", i}, {"dq", a[i].radius}, {"dq_doubled", b[i].radius}};
                });
            }
        }
        out.push_back(finish("frs", "bound_monotonicity", w, 1e-12, "100 random trajectories, bound doubled"));
    }
    return out;
}

std::vector<CheckResult> verifyObserver(const VerifyOptions &opt)
{
    std::vector<CheckResult> out;
    const QuadParams prm;
    const ObserverConfig cfg;

    {
        const ObserverGains g = ObserverGains::fromBandwidth(cfg.bandwidth, prm.mass);
        const Mat9 e = g.errorMatrix(prm.mass);
        double worst = 0.0;
        for (int axis = 0; axis < 3; ++axis)
        {
            Eigen::Matrix3d a;
            for (int r = 0; r < 3; ++r)
            {
                for (int c = 0; c < 3; ++c)
                {
                    a(r, c) = e(3 * r + axis, 3 * c + axis);
                }
            }
            const Eigen::Matrix3d s = a + cfg.bandwidth * Eigen::Matrix3d::Identity();
            worst = std::max(worst, (s * s * s).norm() / std::pow(cfg.bandwidth, 3));
        }
        Worst w;
        w.add(worst, 1e-9, [&] { return ordered_json{{"bandwidth", cfg.bandwidth}, {"mass", prm.mass}}; });
        out.push_back(finish("observer", "triple_pole", w, 1e-9, "(A + w I)^3 = 0 per axis"));
    }

    {
        std::mt19937_64 rng(opt.seed + 2);
        Worst w;
        for (int trial = 0; trial < 4; ++trial)
        {
            const Vec3 f = trial == 0 ? Vec3(2.0, 0.0, 0.0) : Vec3(2.0 * randomUnit(rng, 3));
            const double err = observerError([&](double) { return f; }, 6.0, 3.0);
            w.add(err, 0.05, [&] { return ordered_json{{"force", toJson(f)}, {"error_after_3s", err}}; });
        }
        out.push_back(finish("observer", "step_2N", w, 0.05, "|z1 - F| for t >= 3 s, 4 directions"));
    }

    {
        Worst w;
        for (int axis = 0; axis < 3; ++axis)
        {
            const double err = observerError([&](double t) { return Vec3(0.5 * t * Vec3::Unit(axis)); }, 10.0, 4.0);
            w.add(err, 0.02, [&] { return ordered_json{{"axis", axis}, {"steady_error", err}}; });
        }
        out.push_back(finish("observer", "ramp_0.5N_per_s", w, 0.02, "|z1 - F| for t >= 4 s"));
    }
    return out;
}

std::vector<CheckResult> runVerification(const std::string &which, const VerifyOptions &opt)
{
    if (which != "gradients" && which != "frs" && which != "observer" && which != "all")
    {
        throw InvalidInput("unknown suite '" + which + "' (gradients, frs, observer, all)");
    }
    std::vector<CheckResult> out;
    const auto append = [&](std::vector<CheckResult> r) { out.insert(out.end(), r.begin(), r.end()); };
    if (which == "gradients" || which == "all")
    {
        append(verifyGradients(opt));
    }
    if (which == "frs" || which == "all")
    {
        append(verifyFrs(opt));
    }
    if (which == "observer" || which == "all")
    {
        append(verifyObserver(opt));
    }
    return out;
}

std::string verificationTable(const std::vector<CheckResult> &results)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-24s %-6s %-12s %-10s %s\n", "suite", "check", "result", "worst",
                  "tolerance", "detail");
    out += line;
    for (const CheckResult &r : results)
    {
        std::snprintf(line, sizeof line, "%-10s %-24s %-6s %-12.3e %-10.1e %s\n", r.suite.c_str(), r.name.c_str(),
                      r.passed ? "PASS" : "FAIL", r.value, r.tolerance, r.detail.c_str());
        out += line;
    }
    return out;
}

const CheckResult *firstFailure(const std::vector<CheckResult> &results)
{
    for (const CheckResult &r : results)
    {
        if (!r.passed)
        {
            return &r;
        }
    }
    return nullptr;
}

} // namespace gale
