#include "gale/sim.hpp"
#include "gale/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace gale;

namespace
{

enum Exit
{
    kOk = 0,
    kConfigError = 1,
    kCollision = 2,
    kPlanningFailure = 3,
    kVerifyFailure = 4,
    kTimeout = 5,
};

std::filesystem::path outputRoot()
{
    const char *env = std::getenv("GALE_OUT_ROOT");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("gale_out");
}

Scenario builtinScenario(const std::string &name)
{
    if (name == "benign")
        return scenarios::benignStraight();
    if (name == "corridor-calm")
        return scenarios::corridor(0.0);
    if (name == "corridor-low")
        return scenarios::corridor(3.5);
    if (name == "corridor-high")
        return scenarios::corridor(6.5);
    if (name == "figure-eight")
        return scenarios::figureEight(5.0);
    if (name == "head-on")
        return scenarios::headOn();
    throw ConfigError("scenario", "unknown built-in '" + name +
                                      "' (benign, corridor-calm, corridor-low, corridor-high, figure-eight, head-on)");
}

// A path to a JSON file, or builtin:<name>.
Scenario resolveScenario(const std::string &arg)
{
    const std::string prefix = "builtin:";
    if (arg.rfind(prefix, 0) == 0)
    {
        Scenario s = builtinScenario(arg.substr(prefix.size()));
        s.name = arg.substr(prefix.size());
        return s;
    }
    return loadScenario(arg);
}

void writeText(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

void prepareDir(const std::filesystem::path &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        throw Error("cannot create " + dir.string() + ": " + ec.message());
    }
}

bool parseSwitch(const std::string &v) { return v == "on"; }

struct RunArgs
{
    std::string scenario;
    long long seed = -1;
    std::string out;
    std::string frs;
    std::string observer;
    bool quiet = false;
};

int cmdRun(const RunArgs &a)
{
    Scenario s = resolveScenario(a.scenario);
    if (!a.frs.empty())
        s.planner.frsEnabled = parseSwitch(a.frs);
    if (!a.observer.empty())
        s.sim.observerEnabled = parseSwitch(a.observer);
    s.validate();
    const std::uint64_t seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : s.seed;
    const std::filesystem::path dir =
        a.out.empty() ? outputRoot() / ("run_" + s.name + "_" + std::to_string(seed)) : std::filesystem::path(a.out);
    prepareDir(dir);

    const EpisodeResult r = runEpisode(s, seed);
    r.log.write(dir.string());
    writeText(dir / "metrics.json", metricsJson(r.metrics));
    writeText(dir / "timing.json", timingJson(r.timing));
    writeText(dir / "scenario.json", serializeScenario(s));

    const EpisodeMetrics &m = r.metrics;
    if (!a.quiet)
    {
        std::printf("%s seed=%llu frs=%s observer=%s outcome=%s rmse=%.4f min_clearance=%.3f replans=%d -> %s\n",
                    s.name.c_str(), static_cast<unsigned long long>(seed), s.planner.frsEnabled ? "on" : "off",
                    s.sim.observerEnabled ? "on" : "off", m.outcome.c_str(), m.trackingRmse, m.minClearance,
                    m.replanCount, dir.string().c_str());
    }
    if (m.success)
        return kOk;
    if (m.outcome == "collision")
        return kCollision;
    if (m.outcome == "planning_failure")
        return kPlanningFailure;
    return kTimeout;
}

int cmdBenchmark(const std::string &suitePath, int trials, const std::string &out)
{
    BenchmarkSuite suite = loadSuite(suitePath);
    if (trials > 0)
        suite.trials = trials;
    const std::filesystem::path dir =
        out.empty() ? outputRoot() / ("benchmark_" + std::filesystem::path(suitePath).stem().string())
                    : std::filesystem::path(out);
    prepareDir(dir);
    const auto rows = runBenchmark(suite);
    const std::string csv = benchmarkCsv(rows);
    writeText(dir / "summary.csv", csv);
    writeText(dir / "summary.json", benchmarkJson(rows));
    std::fputs(csv.c_str(), stdout);
    return kOk;
}

int cmdVerify(const std::string &which, const std::string &fault, std::uint64_t seed)
{
    VerifyOptions opt;
    opt.fault = parseFault(fault);
    opt.seed = seed;
    const auto results = runVerification(which, opt);
    std::fputs(verificationTable(results).c_str(), stdout);
    if (const CheckResult *bad = firstFailure(results))
    {
        std::printf("counterexample %s\n", bad->counterexample.c_str());
        std::fprintf(stderr, "verification failed: %s/%s\n", bad->suite.c_str(), bad->name.c_str());
        return kVerifyFailure;
    }
    return kOk;
}

int cmdExport(const std::string &scenario, const std::string &out, double step)
{
    const Scenario s = resolveScenario(scenario);
    const ReferencePlan plan = referencePlan(s);
    const std::filesystem::path path =
        out.empty() ? outputRoot() / (s.name + "_trajectory.csv") : std::filesystem::path(out);
    if (path.has_parent_path())
        prepareDir(path.parent_path());
    writeText(path, referencePlanCsv(plan, step));
    std::printf("%s (%.2f s, %d pieces)\n", path.string().c_str(), plan.trajectory.totalDuration(),
                plan.trajectory.pieceCount());
    return kOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Wind-aware quadrotor planning and control toolkit"};
    app.require_subcommand(1);

    RunArgs run;
    CLI::App *runCmd = app.add_subcommand("run", "Run one episode and write logs and metrics");
    runCmd->add_option("--scenario", run.scenario, "Scenario JSON file or builtin:<name>")->required();
    runCmd->add_option("--seed", run.seed, "Episode seed (default: the scenario's)");
    runCmd->add_option("--out", run.out, "Output directory (default: $GALE_OUT_ROOT/run_<name>_<seed>)");
    runCmd->add_option("--frs", run.frs, "Reachability-aware planning")->check(CLI::IsMember({"on", "off"}));
    runCmd->add_option("--observer", run.observer, "Disturbance observer")->check(CLI::IsMember({"on", "off"}));
    runCmd->add_flag("--quiet", run.quiet, "No summary line");

    std::string suitePath, benchOut;
    int trials = 0;
    CLI::App *benchCmd = app.add_subcommand("benchmark", "Run a suite of conditions x ablations x trials");
    benchCmd->add_option("--suite", suitePath, "Suite JSON file")->required();
    benchCmd->add_option("--trials", trials, "Trials per condition (default: the suite's)")
        ->check(CLI::PositiveNumber);
    benchCmd->add_option("--out", benchOut, "Output directory (default: $GALE_OUT_ROOT/benchmark_<suite>)");

    std::string which = "all", fault = "none";
    std::uint64_t verifySeed = 1;
    CLI::App *verifyCmd = app.add_subcommand("verify", "Run the property suites");
    verifyCmd->add_option("--which", which, "Suite to run")
        ->check(CLI::IsMember({"gradients", "frs", "observer", "all"}));
    verifyCmd->add_option("--seed", verifySeed, "Seed of the random cases");
    verifyCmd->add_option("--inject-fault", fault, "Fault to inject (none, static_penalty_sign)");

    std::string exportScenario, exportOut;
    double exportStep = 0.05;
    CLI::App *exportCmd = app.add_subcommand("export-traj", "Write the initial plan as CSV for plotting");
    exportCmd->add_option("--scenario", exportScenario, "Scenario JSON file or builtin:<name>")->required();
    exportCmd->add_option("--out", exportOut, "CSV path (default: $GALE_OUT_ROOT/<name>_trajectory.csv)");
    exportCmd->add_option("--step", exportStep, "Sampling step in seconds")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try
    {
        if (*runCmd)
            return cmdRun(run);
        if (*benchCmd)
            return cmdBenchmark(suitePath, trials, benchOut);
        if (*verifyCmd)
            return cmdVerify(which, fault, verifySeed);
        return cmdExport(exportScenario, exportOut, exportStep);
    }
    catch (const ConfigError &e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    }
    catch (const InvalidInput &e)
    {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kConfigError;
    }
    catch (const PlanningFailure &e)
    {
        std::fprintf(stderr, "planning failure: %s\n", e.what());
        return kPlanningFailure;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
}
