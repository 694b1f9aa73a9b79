#include "gale/esdf.hpp"
#include "gale/minco.hpp"
#include "gale/sim.hpp"
#include "gale/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gale;

namespace
{

Scenario builtin(const std::string &name)
{
    Scenario s;
    if (name == "benign")
        s = scenarios::benignStraight();
    else if (name == "corridor-calm")
        s = scenarios::corridor(0.0);
    else if (name == "corridor-low")
        s = scenarios::corridor(3.5);
    else if (name == "corridor-high")
        s = scenarios::corridor(6.5);
    else if (name == "figure-eight")
        s = scenarios::figureEight(5.0);
    else if (name == "head-on")
        s = scenarios::headOn();
    else
        throw ConfigError("scenario", "unknown built-in '" + name + "'");
    s.name = name;
    return s;
}

BoundaryState boundary(const Eigen::Matrix3d &pva)
{
    BoundaryState b;
    b.p = pva.col(0);
    b.v = pva.col(1);
    b.a = pva.col(2);
    return b;
}

// Occupancy given as a flat x-fastest array of nx * ny * nz flags.
EsdfGrid esdfFromFlags(const std::vector<int> &flags, const Eigen::Vector3i &dims, double resolution,
                       const Vec3 &origin, double cap)
{
    VoxelGrid g(origin, resolution, dims);
    if (static_cast<long long>(flags.size()) != g.voxelCount())
        throw InvalidInput("occupancy has " + std::to_string(flags.size()) + " entries, expected " +
                           std::to_string(g.voxelCount()));
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x)
                if (flags[static_cast<size_t>(g.linear({x, y, z}))])
                    g.setOccupied({x, y, z});
    return buildEsdf(g, cap);
}

} // namespace

PYBIND11_MODULE(_gale, m)
{
    m.doc() = "Wind-aware quadrotor planning, estimation and control";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", error.ptr());
    py::register_exception<PlanningFailure>(m, "PlanningFailure", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    py::class_<Scenario>(m, "Scenario")
        .def_static("from_json", &parseScenario, py::arg("text"))
        .def_static("load", &loadScenario, py::arg("path"))
        .def_static("builtin", &builtin, py::arg("name"))
        .def("to_json", &serializeScenario)
        .def("save", [](const Scenario &s, const std::string &path) { saveScenario(s, path); }, py::arg("path"))
        .def("validate", &Scenario::validate)
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("seed", &Scenario::seed)
        .def_property(
            "frs_enabled", [](const Scenario &s) { return s.planner.frsEnabled; },
            [](Scenario &s, bool v) { s.planner.frsEnabled = v; })
        .def_property(
            "observer_enabled", [](const Scenario &s) { return s.sim.observerEnabled; },
            [](Scenario &s, bool v) { s.sim.observerEnabled = v; })
        .def("__eq__", [](const Scenario &a, const Scenario &b) { return a == b; });

    m.def(
        "run_episode",
        [](const Scenario &s, std::uint64_t seed, bool recordLog) {
            EpisodeOptions opt;
            opt.recordLog = recordLog;
            EpisodeResult r;
            {
                py::gil_scoped_release release;
                r = runEpisode(s, seed, opt);
            }
            Eigen::MatrixX3d path(static_cast<Eigen::Index>(r.path.size()), 3);
            for (size_t i = 0; i < r.path.size(); ++i)
                path.row(static_cast<Eigen::Index>(i)) = r.path[i].transpose();
            py::dict log;
            log["state"] = r.log.state;
            log["control"] = r.log.control;
            log["estimate"] = r.log.estimate;
            log["events"] = r.log.events;
            log["trajectory"] = r.log.trajectory;
            py::dict out;
            out["metrics_json"] = metricsJson(r.metrics);
            out["timing_json"] = timingJson(r.timing);
            out["time"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(r.time.data(),
                                                                            static_cast<Eigen::Index>(r.time.size())));
            out["path"] = path;
            out["log"] = log;
            return out;
        },
        py::arg("scenario"), py::arg("seed"), py::arg("record_log") = true);

    m.def(
        "run_verification",
        [](const std::string &which, std::uint64_t seed, const std::string &fault) {
            VerifyOptions opt;
            opt.seed = seed;
            opt.fault = parseFault(fault);
            py::list out;
            for (const CheckResult &r : runVerification(which, opt))
            {
                py::dict d;
                d["suite"] = r.suite;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["value"] = r.value;
                d["tolerance"] = r.tolerance;
                d["detail"] = r.detail;
                d["counterexample"] = r.counterexample;
                out.append(d);
            }
            return out;
        },
        py::arg("which") = "all", py::arg("seed") = 1, py::arg("fault") = "none");

    m.def(
        "reference_plan_csv",
        [](const Scenario &s, double step) { return referencePlanCsv(referencePlan(s), step); },
        py::arg("scenario"), py::arg("step") = 0.05);

    py::class_<MincoTrajectory>(m, "MincoTrajectory")
        .def_static(
            "construct",
            [](const Eigen::Matrix3Xd &q, const Eigen::VectorXd &t, const Eigen::Matrix3d &head,
               const Eigen::Matrix3d &tail) { return MincoTrajectory::construct(q, t, boundary(head), boundary(tail)); },
            py::arg("waypoints"), py::arg("durations"), py::arg("head"), py::arg("tail"),
            "waypoints is 3 x (M-1); head and tail are 3 x 3 with columns p, v, a.")
        .def_property_readonly("piece_count", &MincoTrajectory::pieceCount)
        .def_property_readonly("total_duration", &MincoTrajectory::totalDuration)
        .def_property_readonly("durations", &MincoTrajectory::durations)
        .def_property_readonly("coefficients", &MincoTrajectory::coefficients)
        .def("evaluate", &MincoTrajectory::evaluate, py::arg("t"), py::arg("order") = 0)
        .def("smoothness_cost", &MincoTrajectory::smoothnessCost);

    py::class_<EsdfGrid>(m, "Esdf")
        .def(py::init(&esdfFromFlags), py::arg("occupancy"), py::arg("dims"), py::arg("resolution"),
             py::arg("origin") = Vec3::Zero(), py::arg("cap") = 5.0,
             "occupancy is a flat list of nx * ny * nz flags, x fastest.")
        .def("at", [](const EsdfGrid &e, const Eigen::Vector3i &idx) {
            if (!e.grid().contains(idx))
                throw InvalidInput("index outside the grid");
            return e.at(idx);
        })
        .def("distance", &EsdfGrid::distance, py::arg("p"))
        .def("gradient", [](const EsdfGrid &e, const Vec3 &p) { return e.query(p).gradient; }, py::arg("p"))
        .def_property_readonly("cap", &EsdfGrid::cap);
}
