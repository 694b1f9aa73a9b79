#include "gale/scenario.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>

namespace gale
{

using nlohmann::json;
using nlohmann::ordered_json;

const char *toString(WindKind k)
{
    switch (k)
    {
    case WindKind::None:
        return "none";
    case WindKind::Constant:
        return "constant";
    case WindKind::Gusty:
        return "gusty";
    }
    return "unknown";
}

const char *toString(MotionPattern p)
{
    return p == MotionPattern::Constant ? "constant" : "back_and_forth";
}

const char *toString(TaskKind t)
{
    return t == TaskKind::Navigate ? "navigate" : "track";
}

void MapSpec::validate() const
{
    if (!(resolution > 0.0) || !(size.array() >= resolution).all() || !origin.allFinite() || !(esdfCap > 0.0))
    {
        throw ConfigError("map", "resolution, size and esdf_cap must be positive and size at least one voxel");
    }
    for (size_t i = 0; i < boxes.size(); ++i)
    {
        if (!(boxes[i].hi.array() > boxes[i].lo.array()).all())
        {
            throw ConfigError("map.boxes[" + std::to_string(i) + "]", "hi must exceed lo on every axis");
        }
    }
    for (size_t i = 0; i < cylinders.size(); ++i)
    {
        if (!(cylinders[i].radius > 0.0) || !(cylinders[i].zHi > cylinders[i].zLo))
        {
            throw ConfigError("map.cylinders[" + std::to_string(i) + "]", "radius must be positive and z_hi > z_lo");
        }
    }
}

VoxelGrid MapSpec::rasterize() const
{
    validate();
    const Eigen::Vector3i dims = (size / resolution).array().round().cast<int>();
    VoxelGrid grid(origin, resolution, dims);
    for (const BoxObstacle &b : boxes)
    {
        grid.addBox(b.lo, b.hi);
    }
    for (const CylinderObstacle &c : cylinders)
    {
        grid.addCylinder(c.center, c.radius, c.zLo, c.zHi);
    }
    return grid;
}

EsdfGrid MapSpec::buildEsdf() const
{
    return gale::buildEsdf(rasterize(), esdfCap);
}

void WindModel::validate() const
{
    if (!mean.allFinite() || !(variance >= 0.0) || !(correlationTime > 0.0) || !(forceCoefficient > 0.0))
    {
        throw ConfigError("wind", "variance must be non-negative, correlation_time and force_coefficient positive");
    }
}

void DynamicObstacle::validate() const
{
    if (!(radius > 0.0) || !position.allFinite() || !velocity.allFinite() || !segmentEnd.allFinite())
    {
        throw ConfigError("obstacles", "radius must be positive and vectors finite");
    }
    if (pattern == MotionPattern::BackAndForth && (!((segmentEnd - position).norm() > 0.0) || !(velocity.norm() > 0.0)))
    {
        throw ConfigError("obstacles", "back_and_forth needs a segment of positive length and a positive speed");
    }
}

Vec3 DynamicObstacle::positionAt(double t) const
{
    if (pattern == MotionPattern::Constant)
    {
        return position + velocity * t;
    }
    const Vec3 seg = segmentEnd - position;
    const double len = seg.norm();
    const double s = std::fmod(velocity.norm() * std::max(t, 0.0), 2.0 * len);
    const double along = s <= len ? s : 2.0 * len - s;
    return position + seg * (along / len);
}

Vec3 DynamicObstacle::velocityAt(double t) const
{
    if (pattern == MotionPattern::Constant)
    {
        return velocity;
    }
    const Vec3 seg = segmentEnd - position;
    const double len = seg.norm();
    const double s = std::fmod(velocity.norm() * std::max(t, 0.0), 2.0 * len);
    const Vec3 dir = seg / len * velocity.norm();
    return s < len ? dir : Vec3(-dir);
}

void FigureEight::validate() const
{
    if (!(amplitudeX > 0.0) || !(amplitudeY >= 0.0) || !(period > 0.0) || laps < 1 || samplesPerLap < 4)
    {
        throw ConfigError("figure_eight", "amplitudes, period, laps and samples_per_lap out of range");
    }
}

MincoTrajectory figureEightTrajectory(const FigureEight &f)
{
    f.validate();
    const int n = f.laps * f.samplesPerLap;
    const double w = 2.0 * M_PI / f.period;
    const double dt = f.period / f.samplesPerLap;
    Eigen::Matrix3Xd wps(3, n - 1);
    for (int i = 1; i < n; ++i)
    {
        const double t = i * dt;
        wps.col(i - 1) = f.center + Vec3(f.amplitudeX * std::sin(w * t), 0.5 * f.amplitudeY * std::sin(2.0 * w * t), 0.0);
    }
    BoundaryState head, tail;
    head.p = f.center;
    tail.p = f.center;
    return MincoTrajectory::construct(wps, Eigen::VectorXd::Constant(n, dt), head, tail);
}

void SimConfig::validate() const
{
    if (!(plantDt > 0.0) || !(controlDt >= plantDt) || !(timeout > 0.0) || !(warmup >= 0.0) ||
        !(replanPeriod >= controlDt) || !(planLatency >= 0.0) || !(planBudget > 0.0) || !(velocityNoise >= 0.0) ||
        !(goalTolerance > 0.0) || !(predictionHorizon > 0.0))
    {
        throw ConfigError("sim", "rates, durations and tolerances out of range");
    }
    const double ratio = controlDt / plantDt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
    {
        throw ConfigError("sim.control_dt", "must be an integer multiple of plant_dt");
    }
}

namespace
{

template <typename F>
void wrapInvalid(const std::string &key, F &&f)
{
    try
    {
        f();
    }
    catch (const ConfigError &)
    {
        throw;
    }
    catch (const InvalidInput &e)
    {
        throw ConfigError(key, e.what());
    }
}

bool insideMap(const MapSpec &m, const Vec3 &p)
{
    return (p.array() >= m.origin.array()).all() && (p.array() <= (m.origin + m.size).array()).all();
}

} // namespace

void Scenario::validate() const
{
    if (schemaVersion != kSchemaVersion)
    {
        throw ConfigError("schema_version", "unsupported version " + std::to_string(schemaVersion));
    }
    map.validate();
    wind.validate();
    for (size_t i = 0; i < obstacles.size(); ++i)
    {
        try
        {
            obstacles[i].validate();
        }
        catch (const ConfigError &e)
        {
            throw ConfigError("obstacles[" + std::to_string(i) + "]", e.what());
        }
    }
    sim.validate();
    if (task == TaskKind::Track)
    {
        figureEight.validate();
    }
    if (!insideMap(map, start))
    {
        throw ConfigError("start", "outside the map");
    }
    if (task == TaskKind::Navigate && !insideMap(map, goal))
    {
        throw ConfigError("goal", "outside the map");
    }
    if (!std::isfinite(yaw))
    {
        throw ConfigError("yaw", "must be finite");
    }
    wrapInvalid("quad", [&] { quad.validate(); });
    wrapInvalid("planner", [&] { planner.weights.validate(); });
    wrapInvalid("frs", [&] { planner.frs.validate(); });
    wrapInvalid("nmpc", [&] { nmpc.validate(); });
    wrapInvalid("observer", [&] { observer.validate(); });
    if (planner.continuationRounds < 0 || !(planner.staticSlack >= 0.0) || !(planner.dynamicSlack >= 0.0) || !(planner.auditTolerance >= 0.0) ||
        planner.lbfgs.maxIterations < 1 || planner.lbfgs.memory < 1)
    {
        throw ConfigError("planner", "solver settings out of range");
    }
}

// ---------------------------------------------------------------------------
// JSON

namespace
{

std::string join(const std::string &path, const std::string &key)
{
    return path.empty() ? key : path + "." + key;
}

// Read-side view of one JSON object that remembers its dotted path.
class Node
{
public:
    Node(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
        {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    void allow(std::initializer_list<const char *> keys) const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
        {
            bool known = false;
            for (const char *k : keys)
            {
                known = known || it.key() == k;
            }
            if (!known)
            {
                throw ConfigError(join(path_, it.key()), "unknown key");
            }
        }
    }

    bool has(const char *key) const { return j_.contains(key); }
    const json &raw(const char *key) const { return j_.at(key); }
    std::string path(const char *key) const { return join(path_, key); }

    void number(const char *key, double &out) const
    {
        if (has(key))
        {
            out = toNumber(j_.at(key), path(key));
        }
    }

    void integer(const char *key, int &out) const
    {
        if (has(key))
        {
            const json &v = j_.at(key);
            if (!v.is_number_integer())
            {
                throw ConfigError(path(key), "expected an integer");
            }
            out = v.get<int>();
        }
    }

    void unsignedInteger(const char *key, std::uint64_t &out) const
    {
        if (has(key))
        {
            const json &v = j_.at(key);
            if (!v.is_number_unsigned())
            {
                throw ConfigError(path(key), "expected a non-negative integer");
            }
            out = v.get<std::uint64_t>();
        }
    }

    void boolean(const char *key, bool &out) const
    {
        if (has(key))
        {
            const json &v = j_.at(key);
            if (!v.is_boolean())
            {
                throw ConfigError(path(key), "expected true or false");
            }
            out = v.get<bool>();
        }
    }

    void string(const char *key, std::string &out) const
    {
        if (has(key))
        {
            const json &v = j_.at(key);
            if (!v.is_string())
            {
                throw ConfigError(path(key), "expected a string");
            }
            out = v.get<std::string>();
        }
    }

    template <typename Derived>
    void vector(const char *key, Eigen::MatrixBase<Derived> &out) const
    {
        if (has(key))
        {
            readVector(j_.at(key), path(key), out);
        }
    }

    template <int N>
    void matrix(const char *key, Eigen::Matrix<double, N, N> &out) const
    {
        if (!has(key))
        {
            return;
        }
        const json &v = j_.at(key);
        if (!v.is_array() || static_cast<int>(v.size()) != N)
        {
            throw ConfigError(path(key), "expected " + std::to_string(N) + " rows");
        }
        for (int r = 0; r < N; ++r)
        {
            Eigen::Matrix<double, N, 1> row;
            readVector(v[static_cast<size_t>(r)], path(key) + "[" + std::to_string(r) + "]", row);
            out.row(r) = row.transpose();
        }
    }

    static double toNumber(const json &v, const std::string &p)
    {
        if (!v.is_number())
        {
            throw ConfigError(p, "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d))
        {
            throw ConfigError(p, "must be finite");
        }
        return d;
    }

    template <typename Derived>
    static void readVector(const json &v, const std::string &p, Eigen::MatrixBase<Derived> &out)
    {
        if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != out.size())
        {
            throw ConfigError(p, "expected an array of " + std::to_string(out.size()) + " numbers");
        }
        for (Eigen::Index i = 0; i < out.size(); ++i)
        {
            out(i) = toNumber(v[static_cast<size_t>(i)], p + "[" + std::to_string(i) + "]");
        }
    }

private:
    const json &j_;
    std::string path_;
};

template <typename E, size_t N>
E parseEnum(const Node &n, const char *key, E fallback, const std::array<std::pair<const char *, E>, N> &table)
{
    if (!n.has(key))
    {
        return fallback;
    }
    const json &v = n.raw(key);
    if (v.is_string())
    {
        for (const auto &[name, value] : table)
        {
            if (v.get<std::string>() == name)
            {
                return value;
            }
        }
    }
    std::string options;
    for (const auto &[name, value] : table)
    {
        options += (options.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(n.path(key), "expected one of " + options);
}

const std::array<std::pair<const char *, WindKind>, 3> kWindKinds{
    {{"none", WindKind::None}, {"constant", WindKind::Constant}, {"gusty", WindKind::Gusty}}};
const std::array<std::pair<const char *, MotionPattern>, 2> kPatterns{
    {{"constant", MotionPattern::Constant}, {"back_and_forth", MotionPattern::BackAndForth}}};
const std::array<std::pair<const char *, TaskKind>, 2> kTasks{
    {{"navigate", TaskKind::Navigate}, {"track", TaskKind::Track}}};

const json &arrayAt(const Node &n, const char *key)
{
    const json &v = n.raw(key);
    if (!v.is_array())
    {
        throw ConfigError(n.path(key), "expected an array");
    }
    return v;
}

template <typename Derived>
ordered_json toJson(const Eigen::MatrixBase<Derived> &v)
{
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        a.push_back(v(i));
    }
    return a;
}

template <int N>
ordered_json matrixJson(const Eigen::Matrix<double, N, N> &m)
{
    ordered_json a = ordered_json::array();
    for (int r = 0; r < N; ++r)
    {
        a.push_back(toJson(Eigen::Matrix<double, N, 1>(m.row(r).transpose())));
    }
    return a;
}

// Puts arrays that hold only numbers on one line.
std::string compactNumberArrays(const std::string &text)
{
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size())
    {
        if (text[i] == '[')
        {
            const size_t close = text.find(']', i);
            const std::string body = close == std::string::npos ? "" : text.substr(i + 1, close - i - 1);
            if (!body.empty() && body.find_first_of("[{\"") == std::string::npos)
            {
                std::string items;
                for (char c : body)
                {
                    if (c == ',')
                    {
                        items += ", ";
                    }
                    else if (c != ' ' && c != '\n')
                    {
                        items += c;
                    }
                }
                out += "[" + items + "]";
                i = close + 1;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

} // namespace

Scenario parseScenario(const std::string &text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    const Node top(root, "");
    top.allow({"schema_version", "name", "seed", "task", "start", "goal", "yaw", "figure_eight", "map", "wind",
               "obstacles", "quad", "planner", "frs", "nmpc", "observer", "sim"});
    Scenario s;
    if (!top.has("schema_version"))
    {
        throw ConfigError("schema_version", "missing");
    }
    top.integer("schema_version", s.schemaVersion);
    if (s.schemaVersion != kSchemaVersion)
    {
        throw ConfigError("schema_version", "unsupported version " + std::to_string(s.schemaVersion));
    }
    top.string("name", s.name);
    top.unsignedInteger("seed", s.seed);
    s.task = parseEnum(top, "task", s.task, kTasks);
    top.vector("start", s.start);
    top.vector("goal", s.goal);
    top.number("yaw", s.yaw);

    if (top.has("figure_eight"))
    {
        const Node n(top.raw("figure_eight"), "figure_eight");
        n.allow({"center", "amplitude_x", "amplitude_y", "period", "laps", "samples_per_lap"});
        FigureEight &f = s.figureEight;
        n.vector("center", f.center);
        n.number("amplitude_x", f.amplitudeX);
        n.number("amplitude_y", f.amplitudeY);
        n.number("period", f.period);
        n.integer("laps", f.laps);
        n.integer("samples_per_lap", f.samplesPerLap);
    }
    if (top.has("map"))
    {
        const Node n(top.raw("map"), "map");
        n.allow({"origin", "size", "resolution", "esdf_cap", "boxes", "cylinders"});
        MapSpec &m = s.map;
        n.vector("origin", m.origin);
        n.vector("size", m.size);
        n.number("resolution", m.resolution);
        n.number("esdf_cap", m.esdfCap);
        if (n.has("boxes"))
        {
            const json &arr = arrayAt(n, "boxes");
            for (size_t i = 0; i < arr.size(); ++i)
            {
                const Node b(arr[i], "map.boxes[" + std::to_string(i) + "]");
                b.allow({"lo", "hi"});
                BoxObstacle box;
                b.vector("lo", box.lo);
                b.vector("hi", box.hi);
                m.boxes.push_back(box);
            }
        }
        if (n.has("cylinders"))
        {
            const json &arr = arrayAt(n, "cylinders");
            for (size_t i = 0; i < arr.size(); ++i)
            {
                const Node c(arr[i], "map.cylinders[" + std::to_string(i) + "]");
                c.allow({"center", "radius", "z_lo", "z_hi"});
                CylinderObstacle cyl;
                c.vector("center", cyl.center);
                c.number("radius", cyl.radius);
                c.number("z_lo", cyl.zLo);
                c.number("z_hi", cyl.zHi);
                m.cylinders.push_back(cyl);
            }
        }
    }
    if (top.has("wind"))
    {
        const Node n(top.raw("wind"), "wind");
        n.allow({"kind", "mean", "variance", "correlation_time", "force_coefficient"});
        s.wind.kind = parseEnum(n, "kind", s.wind.kind, kWindKinds);
        n.vector("mean", s.wind.mean);
        n.number("variance", s.wind.variance);
        n.number("correlation_time", s.wind.correlationTime);
        n.number("force_coefficient", s.wind.forceCoefficient);
    }
    if (top.has("obstacles"))
    {
        const json &arr = arrayAt(top, "obstacles");
        for (size_t i = 0; i < arr.size(); ++i)
        {
            const Node o(arr[i], "obstacles[" + std::to_string(i) + "]");
            o.allow({"position", "velocity", "pattern", "segment_end", "radius"});
            DynamicObstacle ob;
            o.vector("position", ob.position);
            o.vector("velocity", ob.velocity);
            ob.pattern = parseEnum(o, "pattern", ob.pattern, kPatterns);
            o.vector("segment_end", ob.segmentEnd);
            o.number("radius", ob.radius);
            s.obstacles.push_back(ob);
        }
    }
    if (top.has("quad"))
    {
        const Node n(top.raw("quad"), "quad");
        n.allow({"mass", "drag", "gravity", "thrust_min", "thrust_max", "rate_max", "max_tilt", "radius"});
        QuadParams &q = s.quad;
        n.number("mass", q.mass);
        n.matrix("drag", q.drag);
        n.vector("gravity", q.gravity);
        n.number("thrust_min", q.thrustMin);
        n.number("thrust_max", q.thrustMax);
        n.number("rate_max", q.rateMax);
        n.number("max_tilt", q.maxTilt);
        n.number("radius", q.radius);
    }
    if (top.has("planner"))
    {
        const Node n(top.raw("planner"), "planner");
        n.allow({"lambda_static", "lambda_dynamic", "lambda_feasibility", "rho", "static_clearance",
                 "dynamic_clearance", "v_max", "a_max", "delta", "replan_trigger", "lookahead", "frs_enabled",
                 "continuation_rounds", "static_slack", "dynamic_slack", "audit_tolerance", "search_clearance", "max_iterations",
                 "memory"});
        PlannerConfig &p = s.planner;
        PlannerWeights &w = p.weights;
        n.number("lambda_static", w.lambdaStatic);
        n.number("lambda_dynamic", w.lambdaDynamic);
        n.number("lambda_feasibility", w.lambdaFeasibility);
        n.number("rho", w.rho);
        n.number("static_clearance", w.staticClearance);
        n.number("dynamic_clearance", w.dynamicClearance);
        n.number("v_max", w.vMax);
        n.number("a_max", w.aMax);
        n.number("delta", w.delta);
        n.number("replan_trigger", w.replanTrigger);
        n.number("lookahead", w.lookahead);
        n.boolean("frs_enabled", p.frsEnabled);
        n.integer("continuation_rounds", p.continuationRounds);
        n.number("static_slack", p.staticSlack);
        n.number("dynamic_slack", p.dynamicSlack);
        n.number("audit_tolerance", p.auditTolerance);
        n.number("search_clearance", p.searchClearance);
        n.integer("max_iterations", p.lbfgs.maxIterations);
        n.integer("memory", p.lbfgs.memory);
    }
    if (top.has("frs"))
    {
        const Node n(top.raw("frs"), "frs");
        n.allow({"delta", "steps", "epsilon", "bound_margin", "use_fixed_bound", "bound", "initial_shape", "yaw"});
        FrsConfig &f = s.planner.frs;
        n.number("delta", f.delta);
        n.integer("steps", f.steps);
        n.number("epsilon", f.epsilon);
        n.number("bound_margin", f.boundMargin);
        n.boolean("use_fixed_bound", f.useFixedBound);
        n.vector("bound", f.bound);
        n.matrix("initial_shape", f.initialShape);
        n.number("yaw", f.yaw);
    }
    if (top.has("nmpc"))
    {
        const Node n(top.raw("nmpc"), "nmpc");
        n.allow({"horizon", "dt", "state_weight", "terminal_weight", "input_weight", "tilt_weight", "max_iterations",
                 "tolerance", "max_line_search"});
        NmpcConfig &c = s.nmpc;
        n.integer("horizon", c.horizon);
        n.number("dt", c.dt);
        n.vector("state_weight", c.stateWeight);
        n.vector("terminal_weight", c.terminalWeight);
        n.vector("input_weight", c.inputWeight);
        n.number("tilt_weight", c.tiltWeight);
        n.integer("max_iterations", c.maxIterations);
        n.number("tolerance", c.tolerance);
        n.integer("max_line_search", c.maxLineSearch);
    }
    if (top.has("observer"))
    {
        const Node n(top.raw("observer"), "observer");
        n.allow({"bandwidth", "low_pass_cutoff", "spread_window"});
        n.number("bandwidth", s.observer.bandwidth);
        n.number("low_pass_cutoff", s.observer.lowPassCutoff);
        n.number("spread_window", s.observer.spreadWindow);
    }
    if (top.has("sim"))
    {
        const Node n(top.raw("sim"), "sim");
        n.allow({"timeout", "plant_dt", "control_dt", "warmup", "replan_period", "plan_latency", "plan_budget",
                 "velocity_noise", "goal_tolerance", "prediction_horizon", "observer_enabled"});
        SimConfig &c = s.sim;
        n.number("timeout", c.timeout);
        n.number("plant_dt", c.plantDt);
        n.number("control_dt", c.controlDt);
        n.number("warmup", c.warmup);
        n.number("replan_period", c.replanPeriod);
        n.number("plan_latency", c.planLatency);
        n.number("plan_budget", c.planBudget);
        n.number("velocity_noise", c.velocityNoise);
        n.number("goal_tolerance", c.goalTolerance);
        n.number("prediction_horizon", c.predictionHorizon);
        n.boolean("observer_enabled", c.observerEnabled);
    }
    s.validate();
    return s;
}

std::string serializeScenario(const Scenario &s)
{
    ordered_json j;
    j["schema_version"] = s.schemaVersion;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["task"] = toString(s.task);
    j["start"] = toJson(s.start);
    j["goal"] = toJson(s.goal);
    j["yaw"] = s.yaw;
    const FigureEight &f = s.figureEight;
    j["figure_eight"] = {{"center", toJson(f.center)}, {"amplitude_x", f.amplitudeX}, {"amplitude_y", f.amplitudeY},
                         {"period", f.period}, {"laps", f.laps}, {"samples_per_lap", f.samplesPerLap}};
    ordered_json boxes = ordered_json::array(), cyls = ordered_json::array();
    for (const BoxObstacle &b : s.map.boxes)
    {
        boxes.push_back({{"lo", toJson(b.lo)}, {"hi", toJson(b.hi)}});
    }
    for (const CylinderObstacle &c : s.map.cylinders)
    {
        cyls.push_back({{"center", toJson(c.center)}, {"radius", c.radius}, {"z_lo", c.zLo}, {"z_hi", c.zHi}});
    }
    j["map"] = {{"origin", toJson(s.map.origin)}, {"size", toJson(s.map.size)}, {"resolution", s.map.resolution},
                {"esdf_cap", s.map.esdfCap}, {"boxes", boxes}, {"cylinders", cyls}};
    j["wind"] = {{"kind", toString(s.wind.kind)}, {"mean", toJson(s.wind.mean)}, {"variance", s.wind.variance},
                 {"correlation_time", s.wind.correlationTime}, {"force_coefficient", s.wind.forceCoefficient}};
    ordered_json obs = ordered_json::array();
    for (const DynamicObstacle &o : s.obstacles)
    {
        obs.push_back({{"position", toJson(o.position)}, {"velocity", toJson(o.velocity)},
                       {"pattern", toString(o.pattern)}, {"segment_end", toJson(o.segmentEnd)}, {"radius", o.radius}});
    }
    j["obstacles"] = obs;
    const QuadParams &q = s.quad;
    j["quad"] = {{"mass", q.mass}, {"drag", matrixJson<3>(q.drag)}, {"gravity", toJson(q.gravity)},
                 {"thrust_min", q.thrustMin}, {"thrust_max", q.thrustMax}, {"rate_max", q.rateMax},
                 {"max_tilt", q.maxTilt}, {"radius", q.radius}};
    const PlannerConfig &p = s.planner;
    const PlannerWeights &w = p.weights;
    j["planner"] = {{"lambda_static", w.lambdaStatic}, {"lambda_dynamic", w.lambdaDynamic},
                    {"lambda_feasibility", w.lambdaFeasibility}, {"rho", w.rho},
                    {"static_clearance", w.staticClearance}, {"dynamic_clearance", w.dynamicClearance},
                    {"v_max", w.vMax}, {"a_max", w.aMax}, {"delta", w.delta}, {"replan_trigger", w.replanTrigger},
                    {"lookahead", w.lookahead}, {"frs_enabled", p.frsEnabled},
                    {"continuation_rounds", p.continuationRounds}, {"static_slack", p.staticSlack},
                    {"dynamic_slack", p.dynamicSlack},
                    {"audit_tolerance", p.auditTolerance}, {"search_clearance", p.searchClearance},
                    {"max_iterations", p.lbfgs.maxIterations}, {"memory", p.lbfgs.memory}};
    const FrsConfig &fr = p.frs;
    j["frs"] = {{"delta", fr.delta}, {"steps", fr.steps}, {"epsilon", fr.epsilon}, {"bound_margin", fr.boundMargin},
                {"use_fixed_bound", fr.useFixedBound}, {"bound", toJson(fr.bound)},
                {"initial_shape", matrixJson<9>(fr.initialShape)}, {"yaw", fr.yaw}};
    const NmpcConfig &n = s.nmpc;
    j["nmpc"] = {{"horizon", n.horizon}, {"dt", n.dt}, {"state_weight", toJson(n.stateWeight)},
                 {"terminal_weight", toJson(n.terminalWeight)}, {"input_weight", toJson(n.inputWeight)},
                 {"tilt_weight", n.tiltWeight}, {"max_iterations", n.maxIterations}, {"tolerance", n.tolerance},
                 {"max_line_search", n.maxLineSearch}};
    j["observer"] = {{"bandwidth", s.observer.bandwidth}, {"low_pass_cutoff", s.observer.lowPassCutoff},
                     {"spread_window", s.observer.spreadWindow}};
    const SimConfig &c = s.sim;
    j["sim"] = {{"timeout", c.timeout}, {"plant_dt", c.plantDt}, {"control_dt", c.controlDt}, {"warmup", c.warmup},
                {"replan_period", c.replanPeriod}, {"plan_latency", c.planLatency}, {"plan_budget", c.planBudget},
                {"velocity_noise", c.velocityNoise}, {"goal_tolerance", c.goalTolerance},
                {"prediction_horizon", c.predictionHorizon}, {"observer_enabled", c.observerEnabled}};
    return compactNumberArrays(j.dump(2)) + "\n";
}

Scenario loadScenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("", "cannot read scenario file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parseScenario(ss.str());
}

void saveScenario(const Scenario &s, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw Error("cannot write " + path);
    }
    out << serializeScenario(s);
}

} // namespace gale
