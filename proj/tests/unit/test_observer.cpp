#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gale/observer.hpp"

#include <functional>
#include <random>

using namespace gale;

namespace
{

// Level hover thrust with the plant integrated by RK4 at 1 kHz and the
// observer sampled at 100 Hz.
struct OpenLoopRun
{
    std::vector<double> t;
    std::vector<Vec3> error; // z1 - F(t)
};

OpenLoopRun runOpenLoop(const std::function<Vec3(double)> &force, double duration, const ObserverConfig &cfg = {})
{
    QuadParams prm;
    DisturbanceObserver obs(cfg, prm);
    QuadState x;
    const ControlInput u = ControlInput::hover(prm);
    obs.reset(x.v);
    OpenLoopRun out;
    const int ticks = static_cast<int>(std::round(duration / 0.01));
    for (int k = 0; k < ticks; ++k)
    {
        for (int j = 0; j < 10; ++j)
        {
            const double t = k * 0.01 + j * 0.001;
            x = stepRk4(x, u, force(t), 0.001, prm);
        }
        const double t = (k + 1) * 0.01;
        obs.update(x.v, x.euler, u.thrust, 0.01);
        out.t.push_back(t);
        out.error.push_back(obs.state().z1 - force(t));
    }
    return out;
}

// Model-matched loop: the truth is stepped by the same Euler model the
// observer uses, so the estimation error obeys a linear recursion.
std::vector<Vec9> modelMatchedErrors(const Vec3 &force, int steps, double dt)
{
    QuadParams prm;
    const ObserverGains g = ObserverGains::fromBandwidth(8.0, prm.mass);
    QuadState x;
    const ControlInput u = ControlInput::hover(prm);
    ObserverState s;
    std::vector<Vec9> out;
    for (int k = 0; k < steps; ++k)
    {
        Vec9 e;
        e << x.v - s.vHat, force - s.z1, -s.z2;
        out.push_back(e);
        s = observerStep(s, x.v, rotationZYX(x.euler), u.thrust, x.v, dt, g, prm);
        x = stepEuler(x, u, force, dt, prm);
    }
    return out;
}

} // namespace

TEST_CASE("gains place a triple pole")
{
    const ObserverGains g = ObserverGains::fromBandwidth(8.0, 1.5);
    CHECK(g.g1(0, 0) == doctest::Approx(24.0));
    CHECK(g.g2(1, 1) == doctest::Approx(3.0 * 1.5 * 64.0));
    CHECK(g.g3(2, 2) == doctest::Approx(1.5 * 512.0));
    // Per-axis characteristic polynomial s^3 + g1 s^2 + (g2/m) s + g3/m = (s + 8)^3.
    const Mat9 e = g.errorMatrix(1.5);
    Eigen::Matrix3d axis;
    axis << e(0, 0), e(0, 3), e(0, 6), e(3, 0), e(3, 3), e(3, 6), e(6, 0), e(6, 3), e(6, 6);
    const Eigen::Matrix3d shifted = axis + 8.0 * Eigen::Matrix3d::Identity();
    CHECK((shifted * shifted * shifted).norm() < 1e-9);
    CHECK(axis.trace() == doctest::Approx(-24.0));
    CHECK(axis.determinant() == doctest::Approx(-512.0));
    CHECK_NOTHROW(g.validate(1.5));
}

TEST_CASE("gain validation")
{
    ObserverGains g = ObserverGains::fromBandwidth(8.0, 1.0);
    g.g1 = -g.g1;
    CHECK_THROWS_AS(g.validate(1.0), InvalidInput);
    ObserverGains h = ObserverGains::fromBandwidth(8.0, 1.0);
    h.g3.setZero();
    CHECK_THROWS_AS(h.validate(1.0), InvalidInput);
    CHECK_THROWS_AS(ObserverGains::fromBandwidth(-1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(ObserverGains::fromBandwidth(8.0, 0.0), InvalidInput);
}

TEST_CASE("zero innovation keeps the estimate at zero")
{
    QuadParams prm;
    const ObserverGains g = ObserverGains::fromBandwidth(8.0, prm.mass);
    QuadState x;
    x.v = Vec3(0.4, -0.2, 0.1);
    x.euler = Vec3(0.1, -0.05, 0.3);
    const ControlInput u{prm.hoverThrust() * 1.02, Vec3(0.1, 0.0, -0.1)};
    ObserverState s{x.v, Vec3::Zero(), Vec3::Zero()};
    for (int k = 0; k < 500; ++k)
    {
        s = observerStep(s, x.v, rotationZYX(x.euler), u.thrust, x.v, 0.01, g, prm);
        x = stepEuler(x, u, Vec3::Zero(), 0.01, prm);
        REQUIRE(s.z1.norm() < 1e-12);
        REQUIRE((s.vHat - x.v).norm() < 1e-12);
    }
}

TEST_CASE("step input rejects bad arguments")
{
    QuadParams prm;
    const ObserverGains g = ObserverGains::fromBandwidth(8.0, prm.mass);
    ObserverState s;
    CHECK_THROWS_AS(observerStep(s, Vec3::Zero(), Mat3::Identity(), 10.0, Vec3::Zero(), 0.0, g, prm), InvalidInput);
    CHECK_THROWS_AS(observerStep(s, Vec3(NAN, 0, 0), Mat3::Identity(), 10.0, Vec3::Zero(), 0.01, g, prm),
                    InvalidInput);
}

TEST_CASE("constant 2 N step is estimated within 0.05 N after 3 s")
{
    const OpenLoopRun r = runOpenLoop([](double) { return Vec3(2.0, 0.0, 0.0); }, 6.0);
    for (size_t i = 0; i < r.t.size(); ++i)
    {
        if (r.t[i] >= 3.0 - 1e-9)
        {
            REQUIRE(r.error[i].norm() < 0.05);
        }
    }
}

TEST_CASE("ramp is tracked with small steady error")
{
    const OpenLoopRun r = runOpenLoop([](double t) { return Vec3(0.5 * t, 0.0, 0.0); }, 10.0);
    double worst = 0.0;
    for (size_t i = 0; i < r.t.size(); ++i)
    {
        if (r.t[i] >= 4.0)
        {
            worst = std::max(worst, r.error[i].norm());
        }
    }
    MESSAGE("ramp steady error " << worst);
    CHECK(worst < 0.02);
}

TEST_CASE("error recursion matches the linear oracle")
{
    const double dt = 0.01;
    QuadParams prm;
    const Mat9 step = Mat9::Identity() + dt * ObserverGains::fromBandwidth(8.0, prm.mass).errorMatrix(prm.mass);
    const std::vector<Vec9> e = modelMatchedErrors(Vec3(1.5, -0.7, 0.4), 400, dt);
    Vec9 pred = e[0];
    for (size_t k = 1; k < e.size(); ++k)
    {
        pred = step * pred;
        REQUIRE((pred - e[k]).norm() <= 1e-9 * std::max(1.0, e[k].norm()));
    }
}

TEST_CASE("error system is linear in the disturbance")
{
    const std::vector<Vec9> a = modelMatchedErrors(Vec3(1.0, 0.5, -0.3), 500, 0.01);
    const std::vector<Vec9> b = modelMatchedErrors(Vec3(2.0, 1.0, -0.6), 500, 0.01);
    // Relative to the size of the transient, since late samples decay to roundoff.
    double scale = 0.0, worst = 0.0;
    for (size_t k = 0; k < a.size(); ++k)
    {
        scale = std::max(scale, (2.0 * a[k]).norm());
        worst = std::max(worst, (b[k] - 2.0 * a[k]).norm());
    }
    worst /= scale;
    CHECK(worst < 1e-9);
}

TEST_CASE("constant disturbance error decays below 1 percent by 5 s")
{
    const std::vector<Vec9> e = modelMatchedErrors(Vec3(2.0, -1.0, 0.5), 501, 0.01);
    const double initial = e.front().segment<3>(3).norm();
    CHECK(e[500].segment<3>(3).norm() < 0.01 * initial);
    CHECK(e[500].norm() < 0.01 * e.front().norm());
}

TEST_CASE("published estimate")
{
    SUBCASE("low-pass lags the raw estimate and converges")
    {
        QuadParams prm;
        DisturbanceObserver obs({}, prm);
        obs.reset(Vec3::Zero());
        QuadState x;
        const ControlInput u = ControlInput::hover(prm);
        const Vec3 f(0.0, 3.0, 0.0);
        bool lagged = false;
        for (int k = 0; k < 500; ++k)
        {
            for (int j = 0; j < 10; ++j)
            {
                x = stepRk4(x, u, f, 0.001, prm);
            }
            obs.update(x.v, x.euler, u.thrust, 0.01);
            if (k < 20 && obs.estimate().force.y() < obs.state().z1.y() - 1e-6)
            {
                lagged = true;
            }
        }
        CHECK(lagged);
        CHECK((obs.estimate().force - f).norm() < 0.01);
        // Spread vanishes for a settled constant force; the bound reduces to |z1|.
        CHECK(obs.estimate().sigma.norm() < 1e-3);
        CHECK(obs.estimate().bound(2.0).y() == doctest::Approx(3.0).epsilon(0.01));
    }
    SUBCASE("spread reflects a fluctuating force")
    {
        QuadParams prm;
        ObserverConfig cfg;
        cfg.spreadWindow = 4.0;
        DisturbanceObserver obs(cfg, prm);
        obs.reset(Vec3::Zero());
        QuadState x;
        const ControlInput u = ControlInput::hover(prm);
        for (int k = 0; k < 1200; ++k)
        {
            const double t = k * 0.01;
            const Vec3 f(std::sin(0.5 * M_PI * t), 0.0, 0.0);
            for (int j = 0; j < 10; ++j)
            {
                x = stepRk4(x, u, f, 0.001, prm);
            }
            obs.update(x.v, x.euler, u.thrust, 0.01);
        }
        // A unit sine over whole periods has standard deviation 1/sqrt(2).
        CHECK(obs.estimate().sigma.x() == doctest::Approx(std::sqrt(0.5)).epsilon(0.1));
        CHECK(obs.estimate().sigma.y() < 1e-6);
    }
    SUBCASE("deterministic")
    {
        const OpenLoopRun a = runOpenLoop([](double t) { return Vec3(std::sin(t), 1.0, 0.0); }, 3.0);
        const OpenLoopRun b = runOpenLoop([](double t) { return Vec3(std::sin(t), 1.0, 0.0); }, 3.0);
        for (size_t i = 0; i < a.t.size(); ++i)
        {
            REQUIRE(a.error[i] == b.error[i]);
        }
    }
    SUBCASE("csv row")
    {
        ObserverState s{Vec3::Zero(), Vec3(1, 2, 3), Vec3(0.5, 0, 0)};
        CHECK(estimateCsvRow(1.25, s, Vec3(1, 2, 3)) ==
              "1.250,1.000000,2.000000,3.000000,0.500000,0.000000,0.000000,1.000000,2.000000,3.000000\n");
    }
}
