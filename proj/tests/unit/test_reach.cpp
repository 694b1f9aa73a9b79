#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gale/linalg.hpp"
#include "gale/reach.hpp"
#include "oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace gale;

namespace
{

double maxAbs(const Eigen::MatrixXd &m) { return m.cwiseAbs().maxCoeff(); }

bool isSymPsd(const Eigen::MatrixXd &q)
{
    return maxAbs(q - q.transpose()) <= 1e-10 && linalg::minEigenvalueSym(q) >= -1e-10;
}

MincoTrajectory hoverTrajectory(double duration)
{
    Eigen::Matrix<double, 6, 3> c = Eigen::Matrix<double, 6, 3>::Zero();
    c.row(0) = Eigen::RowVector3d(1.0, 2.0, 1.5);
    return MincoTrajectory::fromCoefficients(c, duration);
}

MincoTrajectory randomTrajectory(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> pos(-1.5, 1.5), dur(0.8, 1.5);
    const int pieces = 3;
    Eigen::Matrix3Xd q(3, pieces - 1);
    for (int i = 0; i < pieces - 1; ++i)
        q.col(i) = Vec3(pos(rng), pos(rng), 0.3 * pos(rng));
    Eigen::VectorXd t(pieces);
    for (int i = 0; i < pieces; ++i)
        t(i) = dur(rng);
    BoundaryState head, tail;
    tail.p = Vec3(pos(rng), pos(rng), 0.3 * pos(rng));
    return MincoTrajectory::construct(q, t, head, tail);
}

} // namespace

TEST_CASE("Minkowski sum of shape matrices")
{
    const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
    CHECK(maxAbs(minkowskiShape(i3, i3) - 4 * i3) < 1e-12);
    CHECK(maxAbs(minkowskiShape(4 * i3, i3) - 9 * i3) < 1e-12);
    for (double r : {0.1, 0.5, 2.0})
        for (double r0 : {0.05, 0.25, 1.0})
            CHECK(maxAbs(minkowskiShape(r * r * i3, r0 * r0 * i3) - (r + r0) * (r + r0) * i3) < 1e-10);
}

TEST_CASE("zero-trace operands act as the identity")
{
    const Eigen::Matrix3d q = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
    CHECK(minkowskiShape(q, Eigen::Matrix3d::Zero()) == q);
    CHECK(minkowskiShape(Eigen::Matrix3d::Zero(), q) == q);
    CHECK(minkowskiShape(Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()).isZero(0.0));
    CHECK_THROWS_AS(minkowskiShape(-Eigen::Matrix3d::Identity(), q), InvalidInput);
    CHECK_THROWS_AS(minkowskiShape(Eigen::Matrix3d::Identity(), Eigen::Matrix4d::Identity()), InvalidInput);
}

TEST_CASE("Minkowski support containment over random directions")
{
    std::mt19937_64 rng(101);
    for (int n : {3, 9})
        for (int trial = 0; trial < 20; ++trial)
        {
            const Eigen::MatrixXd q1 = oracle::randomPsd(rng, n, 0.1 + trial);
            const Eigen::MatrixXd q2 = oracle::randomPsd(rng, n, 0.01);
            const Eigen::MatrixXd s = minkowskiShape(q1, q2);
            CHECK(isSymPsd(s));
            const Ellipsoid e1{{}, q1}, e2{{}, q2}, es{{}, s};
            int violations = 0;
            for (int k = 0; k < 1000; ++k)
            {
                const Eigen::VectorXd u = oracle::randomUnit(rng, n);
                if (es.support(u) < e1.support(u) + e2.support(u) - 1e-9)
                    ++violations;
            }
            CHECK(violations == 0);
        }
}

TEST_CASE("channel Lyapunov solution")
{
    const Vec9 d = Vec9::Unit(3);
    SUBCASE("zero bound gives the regularizer")
    {
        const Mat9 phi = -Mat9::Identity();
        const Mat9 q = solveChannelLyapunov(phi, d, 0.0, 0.1, 0.01);
        CHECK(maxAbs(q - 0.01 * 0.01 * Mat9::Identity()) < 1e-15);
    }
    SUBCASE("scalar closed form")
    {
        // Phi = -I decouples; on the channel coordinate the equation is
        // 2x = (e^{2 delta} - 1) delta b^2.
        const double delta = 0.1, b = 1.0, eps = 1.0;
        const Mat9 q = solveChannelLyapunov(-Mat9::Identity(), d, b, delta, eps);
        const double expected = (std::exp(2 * delta) - 1.0) / 2.0 * delta * b * b + eps * delta * delta;
        CHECK(q(3, 3) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(q(3, 3) == doctest::Approx(0.0210701379).epsilon(1e-9));
        CHECK(q(0, 0) == doctest::Approx(eps * delta * delta).epsilon(1e-12));
        CHECK(std::abs(q(0, 3)) < 1e-15);
    }
    SUBCASE("residual on random Hurwitz matrices")
    {
        std::mt19937_64 rng(103);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial)
        {
            const Mat9 phi = oracle::randomHurwitz(rng, 9);
            const Vec9 ch = Eigen::Matrix<double, 9, 1>::Random();
            const double delta = 0.1, b = 1.7, eps = 0.01;
            const Mat9 q = solveChannelLyapunov(phi, ch, b, delta, eps);
            const Mat9 x = q - eps * delta * delta * Mat9::Identity();
            const Mat9 n = delta * b * b * ch * ch.transpose();
            const Mat9 e = (-phi * delta).exp();
            const Mat9 rhs = e * n * e.transpose() - n;
            const double rel = (-phi * x - x * phi.transpose() - rhs).norm() / rhs.norm();
            worst = std::max(worst, rel);
            CHECK(maxAbs(q - q.transpose()) <= 1e-10);
        }
        CHECK(worst < 1e-8);
    }
    SUBCASE("singular operator is reported")
    {
        Mat9 phi = -Mat9::Identity();
        phi(0, 0) = 0.0; // lambda = 0 pairs with itself
        try
        {
            solveChannelLyapunov(phi, d, 1.0, 0.1, 0.01);
            FAIL("expected SingularOperator");
        }
        catch (const SingularOperator &e)
        {
            CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
        }
    }
    SUBCASE("invalid arguments")
    {
        CHECK_THROWS_AS(solveChannelLyapunov(-Mat9::Identity(), d, -1.0, 0.1, 0.01), InvalidInput);
        CHECK_THROWS_AS(solveChannelLyapunov(-Mat9::Identity(), d, 1.0, 0.0, 0.01), InvalidInput);
        CHECK_THROWS_AS(solveChannelLyapunov(-Mat9::Identity(), d, 1.0, 0.1, 0.0), InvalidInput);
    }
}

TEST_CASE("generic Lyapunov solver residual")
{
    std::mt19937_64 rng(107);
    for (int n : {1, 2, 5, 12})
        for (int trial = 0; trial < 10; ++trial)
        {
            const Eigen::MatrixXd a = oracle::randomHurwitz(rng, n);
            const Eigen::MatrixXd c = oracle::randomPsd(rng, n) - oracle::randomPsd(rng, n);
            const Eigen::MatrixXd x = linalg::solveLyapunov(a, c);
            CHECK((a * x + x * a.transpose() - c).norm() <= 1e-9 * std::max(1.0, c.norm()));
        }
}

TEST_CASE("disturbance shape composition")
{
    const Mat9 i9 = Mat9::Identity();
    CHECK(maxAbs(composeDisturbanceShape({i9, i9, i9}) - 9 * i9) < 1e-12);

    std::mt19937_64 rng(109);
    const Mat9 q = oracle::randomPsd(rng, 9);
    CHECK(maxAbs(composeDisturbanceShape({q, Mat9::Zero(), Mat9::Zero()}) - q) < 1e-12);
    CHECK(composeDisturbanceShape({Mat9::Zero(), Mat9::Zero(), Mat9::Zero()}).isZero(0.0));

    for (int trial = 0; trial < 10; ++trial)
    {
        const std::array<Mat9, 3> ch = {oracle::randomPsd(rng, 9, 0.1), oracle::randomPsd(rng, 9, 1.0),
                                        oracle::randomPsd(rng, 9, 5.0)};
        const Mat9 qd = composeDisturbanceShape(ch);
        CHECK(isSymPsd(qd));
        int violations = 0;
        for (int k = 0; k < 1000; ++k)
        {
            const Eigen::VectorXd u = oracle::randomUnit(rng, 9);
            const double hd = std::sqrt(u.dot(qd * u));
            for (const Mat9 &qi : ch)
                if (hd < std::sqrt(u.dot(qi * u)) - 1e-12)
                    ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("initial shape propagation")
{
    const Mat9 i9 = Mat9::Identity();
    std::mt19937_64 rng(113);
    const Mat9 q0 = oracle::randomPsd(rng, 9);
    CHECK(propagateInitialShape(q0, Mat9::Zero()) == linalg::symmetrized(q0));

    Mat9 q = i9;
    CHECK(q.trace() == doctest::Approx(9.0));
    q = propagateInitialShape(q, i9);
    CHECK(q.trace() == doctest::Approx(36.0).epsilon(1e-12));
    // Equal operands quadruple the shape.
    const Mat9 q2 = propagateInitialShape(q, q);
    CHECK(q2.trace() == doctest::Approx(144.0).epsilon(1e-12));
    // A unit disturbance after 4I adds radii: (2 + 1)^2 I.
    const Mat9 q3 = propagateInitialShape(q, i9);
    CHECK(q3.trace() == doctest::Approx(81.0).epsilon(1e-12));

    for (int trial = 0; trial < 50; ++trial)
    {
        const Mat9 a = oracle::randomPsd(rng, 9);
        const Mat9 b = oracle::randomPsd(rng, 9, 0.01);
        CHECK(propagateInitialShape(a, b).trace() >= a.trace());
    }
}

TEST_CASE("error FRS shape")
{
    std::mt19937_64 rng(127);
    const Mat9 q0 = oracle::randomPsd(rng, 9);
    const Mat9 qd = oracle::randomPsd(rng, 9, 0.2);
    CHECK(maxAbs(errorFrsShape(Mat9::Zero(), q0, qd, 0.1) - minkowskiShape(q0, qd)) < 1e-12);

    const Mat9 quarter = Mat9::Identity() / 4.0;
    CHECK(maxAbs(errorFrsShape(-Mat9::Identity(), quarter, quarter, 0.1) - std::exp(-0.2) * Mat9::Identity()) <
          1e-12);

    for (int trial = 0; trial < 50; ++trial)
    {
        const Mat9 phi = Eigen::Matrix<double, 9, 9>::Random() * 3.0;
        const Mat9 qe = errorFrsShape(phi, oracle::randomPsd(rng, 9), oracle::randomPsd(rng, 9, 0.01), 0.1);
        CHECK(isSymPsd(qe));
    }
}

TEST_CASE("position bound extraction")
{
    const double r0 = 0.25;
    PositionBound pb = positionBound(Mat9::Zero(), sphereShape(r0));
    CHECK(maxAbs(pb.shape - r0 * r0 * Mat3::Identity()) < 1e-15);
    CHECK(pb.radius == doctest::Approx(r0).epsilon(1e-12));

    Mat9 qe = Mat9::Zero();
    qe.topLeftCorner<3, 3>() = 0.09 * Mat3::Identity();
    qe.bottomRightCorner<6, 6>() = 7.0 * Eigen::Matrix<double, 6, 6>::Identity();
    pb = positionBound(qe, sphereShape(r0));
    CHECK(pb.radius == doctest::Approx(0.3 + r0).epsilon(1e-12));

    qe.setZero();
    qe.topLeftCorner<3, 3>() = Mat3::Identity();
    pb = positionBound(qe, Mat3::Zero());
    CHECK(pb.radius == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("propagation along a trajectory")
{
    QuadParams prm;
    const Mat49 k = hoverLqrGain(prm, 0.0);
    const MincoTrajectory hover = hoverTrajectory(2.0);

    SUBCASE("constraint point count")
    {
        FrsConfig cfg;
        cfg.steps = 100;
        const auto b = propagateAlongTrajectory(hover, {}, cfg, prm, k);
        CHECK(b.size() == 21);
    }
    SUBCASE("no disturbance with the zero-Phi hook keeps the initial radius")
    {
        FrsConfig cfg;
        cfg.steps = 100;
        cfg.useFixedBound = true;
        cfg.bound.setZero();
        const double sigma = 0.1;
        cfg.initialShape = sigma * sigma * Mat9::Identity();
        const auto b = propagateAlongTrajectory(hover, {}, cfg, prm, k, {true});
        for (const auto &pb : b)
            CHECK(pb.radius == doctest::Approx(sigma + prm.radius).epsilon(1e-12));
    }
    SUBCASE("no disturbance at hover keeps a constant radius")
    {
        FrsConfig cfg;
        cfg.steps = 100;
        cfg.useFixedBound = true;
        cfg.bound.setZero();
        const auto b = propagateAlongTrajectory(hover, {}, cfg, prm, k);
        for (const auto &pb : b)
            CHECK(pb.radius == doctest::Approx(b.front().radius).epsilon(1e-12));
    }
    SUBCASE("zero-Phi hook gives non-decreasing radii")
    {
        FrsConfig cfg;
        cfg.steps = 100;
        cfg.useFixedBound = true;
        cfg.bound = Vec3(1.0, 2.0, 0.5);
        const auto b = propagateAlongTrajectory(hover, {}, cfg, prm, k, {true});
        for (size_t i = 1; i < b.size(); ++i)
            CHECK(b[i].radius >= b[i - 1].radius - 1e-12);
        CHECK(b.back().radius > b.front().radius);
    }
    SUBCASE("bounds past the propagation horizon are held")
    {
        FrsConfig cfg;
        cfg.steps = 5;
        cfg.useFixedBound = true;
        cfg.bound = Vec3(1.0, 1.0, 1.0);
        const auto b = propagateAlongTrajectory(hover, {}, cfg, prm, k);
        for (size_t i = 5; i < b.size(); ++i)
            CHECK(b[i].radius == b[4].radius);
    }
    SUBCASE("estimate-derived bound")
    {
        FrsConfig cfg;
        DisturbanceEstimate est;
        est.force = Vec3(2.0, -1.0, 0.0);
        est.sigma = Vec3(0.1, 0.1, 0.1);
        CHECK(est.bound(2.0).isApprox(Vec3(2.2, 1.2, 0.2)));
        const auto b = propagateAlongTrajectory(hover, est, cfg, prm, k);
        for (const auto &pb : b)
            CHECK(isSymPsd(pb.shape));
    }
}

TEST_CASE("doubling the disturbance bound never shrinks the reachable set")
{
    QuadParams prm;
    const Mat49 k = hoverLqrGain(prm, 0.0);
    std::mt19937_64 rng(131);
    std::uniform_real_distribution<double> bd(0.0, 3.0);
    int violations = 0;
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
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i)
            if (b[i].radius < a[i].radius - 1e-12)
                ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("ellipsoid validation and debug dump")
{
    Ellipsoid e{Eigen::VectorXd::Zero(3), Eigen::Matrix3d::Identity()};
    CHECK_NOTHROW(e.validate());
    e.shape(0, 1) = 1e-6;
    CHECK_THROWS_AS(e.validate(), InvalidInput);
    e.shape = -Eigen::Matrix3d::Identity();
    CHECK_THROWS_AS(e.validate(), InvalidInput);
    CHECK(e.support(Vec3(1, 0, 0)) == 0.0);

    PositionBound pb;
    pb.shape = Vec3(0.01, 0.04, 0.09).asDiagonal();
    pb.radius = 0.3;
    const std::string csv = frsCsv({pb});
    CHECK(csv == "k,d_q,eig0,eig1,eig2\n0,0.300000,0.01000000,0.04000000,0.09000000\n");
}
