#include "gale/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace gale
{

WindField::WindField(WindModel model) : model_(std::move(model))
{
    model_.validate();
    if (model_.mean.norm() > 0.0)
    {
        direction_ = model_.mean.normalized();
    }
}

void WindField::reset(std::mt19937_64 &rng)
{
    fluctuation_ = 0.0;
    if (model_.kind == WindKind::Gusty && model_.variance > 0.0)
    {
        fluctuation_ = std::sqrt(model_.variance) * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
}

Vec3 WindField::step(double dt, std::mt19937_64 &rng)
{
    if (model_.kind == WindKind::Gusty)
    {
        const double decay = std::exp(-dt / model_.correlationTime);
        const double spread = std::sqrt(model_.variance * (1.0 - decay * decay));
        fluctuation_ = decay * fluctuation_ + spread * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    return force();
}

Vec3 WindField::speed() const
{
    switch (model_.kind)
    {
    case WindKind::None:
        return Vec3::Zero();
    case WindKind::Constant:
        return model_.mean;
    case WindKind::Gusty:
        return model_.mean + fluctuation_ * direction_;
    }
    return Vec3::Zero();
}

Vec3 WindField::force() const
{
    return model_.forceCoefficient * speed();
}

ObstaclePrediction snapshot(const DynamicObstacle &ob, double now, double horizon)
{
    ObstaclePrediction p;
    p.position = ob.positionAt(now);
    p.velocity = ob.velocityAt(now);
    p.captureTime = now;
    p.horizon = horizon;
    p.radius = ob.radius;
    return p;
}

void TimingStats::add(double ms, double budgetMs)
{
    meanMs = (meanMs * count + ms) / (count + 1);
    ++count;
    maxMs = std::max(maxMs, ms);
    if (ms > budgetMs)
    {
        ++overBudget;
    }
}

void EpisodeLog::write(const std::string &dir) const
{
    std::filesystem::create_directories(dir);
    const std::pair<const char *, const std::string *> files[] = {{"state.csv", &state},
                                                                   {"control.csv", &control},
                                                                   {"estimate.csv", &estimate},
                                                                   {"events.csv", &events},
                                                                   {"trajectory.csv", &trajectory}};
    for (const auto &[name, text] : files)
    {
        std::ofstream out(std::filesystem::path(dir) / name);
        if (!out)
        {
            throw Error(std::string("cannot write ") + name + " in " + dir);
        }
        out << *text;
    }
}

namespace
{

struct ActivePlan
{
    MincoTrajectory traj;
    double start = 0.0;
    std::vector<double> dq;
};

double nowMs(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void appendf(std::string &out, const char *fmt, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
}

} // namespace

EpisodeResult runEpisode(const Scenario &sc, std::uint64_t seed, const EpisodeOptions &opt)
{
    sc.validate();
    const SimConfig &cfg = sc.sim;
    const QuadParams &quad = sc.quad;
    const double res = sc.map.resolution;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const EsdfGrid esdf = sc.map.buildEsdf();
    WindField wind(sc.wind);
    wind.reset(rng);
    DisturbanceObserver observer(sc.observer, quad);
    NmpcTracker mpc(sc.nmpc, quad);
    const Planner planner(sc.planner, quad);

    QuadState x;
    x.p = sc.start;
    x.euler.z() = sc.yaw;
    observer.reset(x.v);
    ControlInput u = ControlInput::hover(quad);

    EpisodeResult out;
    EpisodeMetrics &m = out.metrics;
    EpisodeLog &log = out.log;
    if (opt.recordLog)
    {
        log.state = "t,px,py,pz,vx,vy,vz,roll,pitch,yaw,rx,ry,rz,fx,fy,fz\n";
        log.control = "t,thrust,roll_rate,pitch_rate,yaw_rate,fhat_x,fhat_y,fhat_z,iterations,iteration_cap,clamped\n";
        log.estimate = "t,z1x,z1y,z1z,z2x,z2y,z2z,fx,fy,fz\n";
        log.events = "t,kind,reason,ok,cost,iterations,max_dq,audit\n";
    }

    std::optional<ActivePlan> active, pending;
    double firstStart = -1.0;
    double failingSince = -1.0;
    std::vector<double> errors;
    const int substeps = static_cast<int>(std::lround(cfg.controlDt / cfg.plantDt));
    const int replanEvery = std::max(1, static_cast<int>(std::lround(cfg.replanPeriod / cfg.controlDt)));
    const long ticks = static_cast<long>(std::ceil(cfg.timeout / cfg.controlDt - 1e-9));
    Vec3 trueForce = wind.force();
    bool finished = false;

    auto logEvent = [&](double t, const char *kind, const char *reason, bool ok, const PlanResult *r) {
        if (!opt.recordLog)
        {
            return;
        }
        double maxDq = 0.0;
        if (r)
        {
            for (const PositionBound &b : r->bounds)
            {
                maxDq = std::max(maxDq, b.radius);
            }
        }
        appendf(log.events, "%.3f,%s,%s,%d,%.6f,%d,%.6f,%d\n", t, kind, reason, ok ? 1 : 0, r ? r->cost.total : 0.0,
                r ? r->iterations : 0, maxDq, r && r->auditPassed ? 1 : 0);
    };

    auto tryPlan = [&](double t, const BoundaryState &head, double startTime, const char *kind,
                       const char *reason) -> bool {
        std::vector<ObstaclePrediction> preds;
        for (const DynamicObstacle &ob : sc.obstacles)
        {
            preds.push_back(snapshot(ob, t, cfg.predictionHorizon));
        }
        const DisturbanceEstimate est = cfg.observerEnabled && !opt.zeroEstimate ? observer.estimate()
                                                                                : DisturbanceEstimate{};
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            PlanResult r = planner.plan(head, sc.goal, esdf, preds, est, startTime);
            out.timing.planner.add(nowMs(t0), 1e3 * cfg.planBudget);
            ActivePlan next{r.trajectory, startTime, {}};
            for (const PositionBound &b : r.bounds)
            {
                next.dq.push_back(b.radius);
                m.maxDq = std::max(m.maxDq, b.radius);
            }
            if (!r.auditPassed)
            {
                ++m.auditFailures;
            }
            pending = std::move(next);
            logEvent(t, kind, reason, true, &r);
            return true;
        }
        catch (const Error &)
        {
            out.timing.planner.add(nowMs(t0), 1e3 * cfg.planBudget);
            ++m.planFailures;
            logEvent(t, kind, reason, false, nullptr);
            return false;
        }
    };

    for (long tick = 0; tick <= ticks && !finished; ++tick)
    {
        const double t = tick * cfg.controlDt;

        // Measurement and estimation.
        Vec3 noise;
        for (int i = 0; i < 3; ++i)
        {
            noise(i) = cfg.velocityNoise * unit(rng);
        }
        const Vec3 vMeas = x.v + noise;
        if (cfg.observerEnabled && tick > 0)
        {
            observer.update(vMeas, x.euler, u.thrust, cfg.controlDt);
        }
        const Vec3 fHat = cfg.observerEnabled && !opt.zeroEstimate ? observer.estimate().force : Vec3::Zero();

        if (pending && t >= pending->start - 1e-9)
        {
            active = std::move(pending);
            pending.reset();
            if (firstStart < 0.0)
            {
                firstStart = active->start;
            }
        }

        // Planning.
        if (sc.task == TaskKind::Track)
        {
            if (!active && !pending && t >= cfg.warmup - 1e-9)
            {
                pending = ActivePlan{figureEightTrajectory(sc.figureEight), t, {}};
                active = std::move(pending);
                pending.reset();
                firstStart = t;
            }
        }
        else if (!pending && t >= cfg.warmup - 1e-9 && tick % replanEvery == 0)
        {
            if (!active)
            {
                BoundaryState head;
                head.p = sc.start;
                if (tryPlan(t, head, t + cfg.planLatency, "initial", "start"))
                {
                    failingSince = -1.0;
                }
                else if (failingSince < 0.0)
                {
                    failingSince = t;
                }
            }
            else
            {
                std::vector<ObstaclePrediction> preds;
                for (const DynamicObstacle &ob : sc.obstacles)
                {
                    preds.push_back(snapshot(ob, t, cfg.predictionHorizon));
                }
                const ReplanReason why = checkReplan(active->traj, active->start, active->dq, preds, &esdf,
                                                     sc.planner.weights, t);
                if (why != ReplanReason::None)
                {
                    const double total = active->traj.totalDuration();
                    const double tau = std::clamp(t + cfg.planLatency - active->start, 0.0, total);
                    BoundaryState head{active->traj.evaluate(tau, 0), active->traj.evaluate(tau, 1),
                                       active->traj.evaluate(tau, 2)};
                    if (tryPlan(t, head, t + cfg.planLatency, "replan", toString(why)))
                    {
                        ++m.replanCount;
                    }
                }
            }
            if (failingSince >= 0.0 && t - failingSince >= 2.0)
            {
                m.outcome = "planning_failure";
                finished = true;
                break;
            }
        }

        // Reference and control.
        ReferenceWindow refs;
        Vec3 pRef = sc.start;
        double tau = -1.0;
        if (active)
        {
            tau = t - active->start;
            const double total = active->traj.totalDuration();
            refs = referenceFromTrajectory(active->traj, tau, sc.nmpc, sc.yaw, quad, fHat);
            pRef = active->traj.evaluate(std::clamp(tau, 0.0, total), 0);
        }
        else
        {
            refs = hoverReference(sc.start, sc.yaw, sc.nmpc, quad, fHat);
        }
        const auto c0 = std::chrono::steady_clock::now();
        const NmpcSolution sol = mpc.solve(x, refs, fHat);
        out.timing.controller.add(nowMs(c0), 1e3 * cfg.controlDt);
        u = sol.u0;

        if (active && tau >= 0.0)
        {
            errors.push_back((x.p - pRef).norm());
            const int k = static_cast<int>(std::lround(tau / sc.planner.weights.delta));
            const double dq = active->dq.empty()
                                  ? 0.0
                                  : active->dq[static_cast<size_t>(std::min<int>(k, static_cast<int>(active->dq.size()) - 1))];
            if (tau <= active->traj.totalDuration())
            {
                for (const DynamicObstacle &ob : sc.obstacles)
                {
                    const double margin = (x.p - ob.positionAt(t)).norm() -
                                          (dq + sc.planner.weights.dynamicClearance + ob.radius);
                    m.minDynamicMargin = std::min(m.minDynamicMargin, margin);
                }
            }
        }
        out.time.push_back(t);
        out.path.push_back(x.p);
        if (opt.recordLog)
        {
            appendf(log.state, "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t,
                    x.p.x(), x.p.y(), x.p.z(), x.v.x(), x.v.y(), x.v.z(), x.euler.x(), x.euler.y(), x.euler.z(),
                    pRef.x(), pRef.y(), pRef.z(), trueForce.x(), trueForce.y(), trueForce.z());
            appendf(log.control, "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d,%d\n", t, u.thrust, u.rates.x(),
                    u.rates.y(), u.rates.z(), fHat.x(), fHat.y(), fHat.z(), sol.iterations, sol.iterationCap ? 1 : 0,
                    sol.clampedInitialState ? 1 : 0);
            log.estimate += estimateCsvRow(t, observer.state(), trueForce);
        }

        // Completion.
        if (active && tau >= active->traj.totalDuration())
        {
            if (sc.task == TaskKind::Track && tau >= active->traj.totalDuration() + 0.5)
            {
                m.outcome = "success";
                finished = true;
                break;
            }
            if (sc.task == TaskKind::Navigate && (x.p - sc.goal).norm() < cfg.goalTolerance)
            {
                m.outcome = "success";
                finished = true;
                break;
            }
        }

        // Plant.
        for (int j = 0; j < substeps && !finished; ++j)
        {
            const double ts = t + j * cfg.plantDt;
            trueForce = wind.step(cfg.plantDt, rng);
            x = stepRk4(x, u, trueForce, cfg.plantDt, quad);
            const double tn = ts + cfg.plantDt;
            if (!x.toVector().allFinite() || std::abs(x.euler.y()) >= kTiltGuard)
            {
                m.outcome = "collision";
                finished = true;
                break;
            }
            const EsdfSample s = esdf.query(x.p);
            const double gap = s.distance - 0.5 * res - quad.radius;
            m.minStaticDistance = std::min(m.minStaticDistance, s.distance);
            m.minClearance = std::min(m.minClearance, gap);
            bool hit = s.outOfBounds || gap < 0.0;
            for (const DynamicObstacle &ob : sc.obstacles)
            {
                const double d = (x.p - ob.positionAt(tn)).norm();
                m.minObstacleDistance = std::min(m.minObstacleDistance, d);
                const double g = d - quad.radius - ob.radius;
                m.minClearance = std::min(m.minClearance, g);
                hit = hit || g < 0.0;
            }
            if (hit)
            {
                m.outcome = "collision";
                finished = true;
            }
        }
        if (finished)
        {
            m.flightTime = firstStart >= 0.0 ? t + cfg.controlDt - firstStart : 0.0;
        }
        else
        {
            m.flightTime = firstStart >= 0.0 ? t - firstStart : 0.0;
        }
    }

    m.success = m.outcome == "success";
    if (!errors.empty())
    {
        double sum = 0.0, sq = 0.0;
        m.trackingMin = errors.front();
        m.trackingMax = errors.front();
        for (double e : errors)
        {
            sum += e;
            sq += e * e;
            m.trackingMin = std::min(m.trackingMin, e);
            m.trackingMax = std::max(m.trackingMax, e);
        }
        m.trackingAvg = sum / static_cast<double>(errors.size());
        m.trackingRmse = std::sqrt(sq / static_cast<double>(errors.size()));
    }
    if (opt.recordLog && active)
    {
        log.trajectory = trajectoryCsv(active->traj, 0.05);
    }
    return out;
}

namespace
{

double finiteOr(double v, double fallback)
{
    return std::isfinite(v) ? v : fallback;
}

std::string fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string metricsJson(const EpisodeMetrics &m)
{
    // Fixed decimals keep the file diffable; infinities (nothing observed) become -1.
    std::ostringstream o;
    o << "{\n"
      << "  \"success\": " << (m.success ? "true" : "false") << ",\n"
      << "  \"outcome\": \"" << m.outcome << "\",\n"
      << "  \"flight_time\": " << fixed(m.flightTime) << ",\n"
      << "  \"min_clearance\": " << fixed(finiteOr(m.minClearance, -1.0)) << ",\n"
      << "  \"min_static_distance\": " << fixed(finiteOr(m.minStaticDistance, -1.0)) << ",\n"
      << "  \"min_obstacle_distance\": " << fixed(finiteOr(m.minObstacleDistance, -1.0)) << ",\n"
      << "  \"min_dynamic_margin\": " << fixed(finiteOr(m.minDynamicMargin, -1.0)) << ",\n"
      << "  \"tracking_avg\": " << fixed(m.trackingAvg) << ",\n"
      << "  \"tracking_min\": " << fixed(m.trackingMin) << ",\n"
      << "  \"tracking_max\": " << fixed(m.trackingMax) << ",\n"
      << "  \"tracking_rmse\": " << fixed(m.trackingRmse) << ",\n"
      << "  \"replan_count\": " << m.replanCount << ",\n"
      << "  \"plan_failures\": " << m.planFailures << ",\n"
      << "  \"audit_failures\": " << m.auditFailures << ",\n"
      << "  \"max_dq\": " << fixed(m.maxDq) << "\n"
      << "}\n";
    return o.str();
}

std::string timingJson(const EpisodeTiming &t)
{
    auto one = [](const TimingStats &s) {
        return "{\"count\": " + std::to_string(s.count) + ", \"mean_ms\": " + fixed(s.meanMs) +
               ", \"max_ms\": " + fixed(s.maxMs) + ", \"over_budget\": " + std::to_string(s.overBudget) + "}";
    };
    return "{\n  \"planner\": " + one(t.planner) + ",\n  \"controller\": " + one(t.controller) + "\n}\n";
}

// ---------------------------------------------------------------------------
// Benchmark

ReferencePlan referencePlan(const Scenario &sc)
{
    sc.validate();
    const Planner planner(sc.planner, sc.quad);
    DisturbanceEstimate est;
    if (sc.wind.kind != WindKind::None)
    {
        est.force = sc.wind.forceCoefficient * sc.wind.mean;
        if (sc.wind.kind == WindKind::Gusty)
        {
            const Vec3 dir = sc.wind.mean.norm() > 0.0 ? Vec3(sc.wind.mean.normalized()) : Vec3::UnitX();
            est.sigma = sc.wind.forceCoefficient * std::sqrt(sc.wind.variance) * dir.cwiseAbs();
        }
    }
    ReferencePlan out;
    out.delta = sc.planner.weights.delta;
    if (sc.task == TaskKind::Track)
    {
        out.trajectory = figureEightTrajectory(sc.figureEight);
        out.bounds = planner.bounds(out.trajectory, est);
        return out;
    }
    const EsdfGrid esdf = sc.map.buildEsdf();
    std::vector<ObstaclePrediction> preds;
    for (const DynamicObstacle &ob : sc.obstacles)
    {
        preds.push_back(snapshot(ob, sc.sim.warmup, sc.sim.predictionHorizon));
    }
    BoundaryState head;
    head.p = sc.start;
    PlanResult r = planner.plan(head, sc.goal, esdf, preds, est, sc.sim.warmup);
    out.trajectory = std::move(r.trajectory);
    out.bounds = std::move(r.bounds);
    return out;
}

std::string referencePlanCsv(const ReferencePlan &plan, double step)
{
    if (!(step > 0.0) || plan.trajectory.empty())
    {
        throw InvalidInput("referencePlanCsv: positive step and a non-empty trajectory required");
    }
    std::string out = "t,x,y,z,vx,vy,vz,ax,ay,az,dq\n";
    const double total = plan.trajectory.totalDuration();
    const long n = static_cast<long>(std::floor(total / step + 1e-9));
    for (long i = 0; i <= n; ++i)
    {
        const double t = std::min(i * step, total);
        const Vec3 p = plan.trajectory.evaluate(t, 0);
        const Vec3 v = plan.trajectory.evaluate(t, 1);
        const Vec3 a = plan.trajectory.evaluate(t, 2);
        double dq = 0.0;
        if (!plan.bounds.empty())
        {
            const size_t k = std::min(plan.bounds.size() - 1, static_cast<size_t>(std::floor(t / plan.delta + 1e-9)));
            dq = plan.bounds[k].radius;
        }
        appendf(out, "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t, p.x(), p.y(), p.z(), v.x(), v.y(),
                v.z(), a.x(), a.y(), a.z(), dq);
    }
    return out;
}

BenchmarkSuite loadSuite(const std::string &path)
{
    using nlohmann::json;
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("", "cannot read suite file " + path);
    }
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object())
    {
        throw ConfigError("<root>", "expected an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        const std::string &k = it.key();
        if (k != "schema_version" && k != "trials" && k != "seed" && k != "frs" && k != "observer" &&
            k != "conditions")
        {
            throw ConfigError(k, "unknown key");
        }
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion)
    {
        throw ConfigError("schema_version", "missing or unsupported");
    }
    BenchmarkSuite suite;
    if (j.contains("trials"))
    {
        if (!j["trials"].is_number_integer() || j["trials"].get<int>() < 1)
        {
            throw ConfigError("trials", "expected a positive integer");
        }
        suite.trials = j["trials"].get<int>();
    }
    if (j.contains("seed"))
    {
        if (!j["seed"].is_number_unsigned())
        {
            throw ConfigError("seed", "expected a non-negative integer");
        }
        suite.seedBase = j["seed"].get<std::uint64_t>();
    }
    for (const char *key : {"frs", "observer"})
    {
        if (!j.contains(key))
        {
            continue;
        }
        const json &a = j[key];
        if (!a.is_array() || a.empty())
        {
            throw ConfigError(key, "expected a non-empty array of booleans");
        }
        std::vector<bool> flags;
        for (const json &v : a)
        {
            if (!v.is_boolean())
            {
                throw ConfigError(key, "expected a non-empty array of booleans");
            }
            flags.push_back(v.get<bool>());
        }
        (std::string(key) == "frs" ? suite.frs : suite.observer) = flags;
    }
    if (!j.contains("conditions") || !j["conditions"].is_array() || j["conditions"].empty())
    {
        throw ConfigError("conditions", "expected a non-empty array");
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (size_t i = 0; i < j["conditions"].size(); ++i)
    {
        const json &c = j["conditions"][i];
        const std::string key = "conditions[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("name") || !c["name"].is_string() || !c.contains("scenario") ||
            !c["scenario"].is_string())
        {
            throw ConfigError(key, "needs string fields name and scenario");
        }
        for (auto it = c.begin(); it != c.end(); ++it)
        {
            if (it.key() != "name" && it.key() != "scenario" && it.key() != "wind_speed")
            {
                throw ConfigError(key + "." + it.key(), "unknown key");
            }
        }
        BenchmarkCondition bc;
        bc.name = c["name"].get<std::string>();
        std::filesystem::path sp = c["scenario"].get<std::string>();
        if (sp.is_relative())
        {
            sp = base / sp;
        }
        try
        {
            bc.scenario = loadScenario(sp.string());
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(key + ".scenario", e.what());
        }
        if (c.contains("wind_speed"))
        {
            if (!c["wind_speed"].is_number() || c["wind_speed"].get<double>() < 0.0)
            {
                throw ConfigError(key + ".wind_speed", "expected a non-negative number");
            }
            const double speed = c["wind_speed"].get<double>();
            WindModel &w = bc.scenario.wind;
            const Vec3 dir = w.mean.norm() > 0.0 ? Vec3(w.mean.normalized()) : Vec3::UnitY();
            w.mean = speed * dir;
        }
        suite.conditions.push_back(std::move(bc));
    }
    return suite;
}

std::vector<BenchmarkRow> runBenchmark(const BenchmarkSuite &suite)
{
    if (suite.trials < 1)
    {
        throw InvalidInput("runBenchmark: trials must be positive");
    }
    std::vector<BenchmarkRow> rows;
    EpisodeOptions opt;
    opt.recordLog = false;
    for (const BenchmarkCondition &c : suite.conditions)
    {
        for (bool frs : suite.frs)
        {
            for (bool obs : suite.observer)
            {
                Scenario s = c.scenario;
                s.planner.frsEnabled = frs;
                s.sim.observerEnabled = obs;
                BenchmarkRow row;
                row.condition = c.name;
                row.windMean = s.wind.kind == WindKind::None ? 0.0 : s.wind.mean.norm();
                row.frs = frs;
                row.observer = obs;
                row.trials = suite.trials;
                int ok = 0;
                for (int i = 0; i < suite.trials; ++i)
                {
                    const EpisodeResult r = runEpisode(s, suite.seedBase + static_cast<std::uint64_t>(i), opt);
                    row.rmse.push_back(r.metrics.trackingRmse);
                    row.success.push_back(r.metrics.success ? 1 : 0);
                    ok += r.metrics.success ? 1 : 0;
                }
                row.successRate = static_cast<double>(ok) / suite.trials;
                double sum = 0.0;
                for (double e : row.rmse)
                {
                    sum += e;
                }
                row.rmseMean = sum / suite.trials;
                std::vector<double> sorted = row.rmse;
                std::sort(sorted.begin(), sorted.end());
                const size_t n = sorted.size();
                row.rmseMedian = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string benchmarkCsv(const std::vector<BenchmarkRow> &rows)
{
    std::string out = "condition,wind_mean,frs,observer,trials,success_rate,rmse_mean\n";
    for (const BenchmarkRow &r : rows)
    {
        appendf(out, "%s,%.3f,%s,%s,%d,%.6f,%.6f\n", r.condition.c_str(), r.windMean, r.frs ? "on" : "off",
                r.observer ? "on" : "off", r.trials, r.successRate, r.rmseMean);
    }
    return out;
}

std::string benchmarkJson(const std::vector<BenchmarkRow> &rows)
{
    using nlohmann::ordered_json;
    ordered_json a = ordered_json::array();
    for (const BenchmarkRow &r : rows)
    {
        ordered_json rm = ordered_json::array();
        for (double e : r.rmse)
        {
            rm.push_back(fixed(e));
        }
        a.push_back({{"condition", r.condition},
                     {"wind_mean", fixed(r.windMean)},
                     {"frs", r.frs},
                     {"observer", r.observer},
                     {"trials", r.trials},
                     {"success_rate", fixed(r.successRate)},
                     {"rmse_mean", fixed(r.rmseMean)},
                     {"rmse_median", fixed(r.rmseMedian)},
                     {"rmse", rm},
                     {"success", r.success}});
    }
    return a.dump(2) + "\n";
}

} // namespace gale
