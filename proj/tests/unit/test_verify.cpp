#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gale/verify.hpp"

#include <json.hpp>

using namespace gale;

TEST_CASE("all suites pass on the default configuration")
{
    const auto results = runVerification("all");
    for (const CheckResult &r : results)
    {
        INFO(r.suite << "/" << r.name << " worst " << r.value);
        CHECK(r.passed);
        CHECK(r.counterexample.empty());
    }
    CHECK(firstFailure(results) == nullptr);
    CHECK(results.size() == 9 + 4 + 3);
}

TEST_CASE("a single suite runs only its own checks")
{
    for (const char *which : {"gradients", "frs", "observer"})
    {
        for (const CheckResult &r : runVerification(which))
        {
            CHECK(r.suite == which);
        }
    }
    CHECK_THROWS_AS(runVerification("everything"), InvalidInput);
}

TEST_CASE("sign error in the static penalty gradient is caught first")
{
    VerifyOptions opt;
    opt.fault = Fault::StaticPenaltySign;
    const auto results = runVerification("gradients", opt);
    const CheckResult *bad = firstFailure(results);
    REQUIRE(bad != nullptr);
    CHECK(bad->name == "static_penalty");
    const auto c = nlohmann::json::parse(bad->counterexample);
    CHECK(c["check"] == "static_penalty");
    CHECK(c["case"].contains("point"));
    CHECK(c["value"].get<double>() > 1.0);
    // The isolated static term of the objective sees the same fault.
    for (const CheckResult &r : results)
    {
        if (r.name == "objective_static")
        {
            CHECK_FALSE(r.passed);
        }
        if (r.name == "dynamic_penalty" || r.name == "feasibility_penalty" || r.name == "objective_time")
        {
            CHECK(r.passed);
        }
    }
}

TEST_CASE("fault names")
{
    CHECK((parseFault("none") == Fault::None));
    CHECK((parseFault("static_penalty_sign") == Fault::StaticPenaltySign));
    CHECK_THROWS_AS(parseFault("typo"), InvalidInput);
}

TEST_CASE("table lists every check")
{
    const auto results = runVerification("observer");
    const std::string t = verificationTable(results);
    for (const CheckResult &r : results)
    {
        CHECK(t.find(r.name) != std::string::npos);
    }
    CHECK(t.find("PASS") != std::string::npos);
}
