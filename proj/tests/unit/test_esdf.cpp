#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gale/esdf.hpp"
#include "oracles.hpp"

using namespace gale;

namespace
{

// Random occupancy with the given fill probability; returns the grid and a flat copy.
VoxelGrid randomGrid(std::mt19937_64 &rng, const Eigen::Vector3i &dims, double fill, double res,
                     std::vector<unsigned char> &flat)
{
    VoxelGrid g(Vec3(-1.0, 0.5, 0.0), res, dims);
    std::bernoulli_distribution occ(fill);
    flat.assign(static_cast<size_t>(g.voxelCount()), 0);
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x)
                if (occ(rng))
                {
                    g.setOccupied({x, y, z});
                    flat[static_cast<size_t>((z * dims.y() + y) * dims.x() + x)] = 1;
                }
    return g;
}

void checkAgainstBruteForce(const VoxelGrid &g, const std::vector<unsigned char> &flat, double cap)
{
    const Eigen::Vector3i d = g.dims();
    const EsdfGrid e = buildEsdf(g, cap);
    const auto sq = oracle::bruteForceSquaredEdt(flat, d.x(), d.y(), d.z());
    long long mismatches = 0;
    for (int z = 0; z < d.z(); ++z)
        for (int y = 0; y < d.y(); ++y)
            for (int x = 0; x < d.x(); ++x)
            {
                const long long s = sq[static_cast<size_t>((z * d.y() + y) * d.x() + x)];
                const double expect = s < 0 ? cap : std::min(cap, g.resolution() * std::sqrt(static_cast<double>(s)));
                if (e.at({x, y, z}) != expect)
                    ++mismatches;
            }
    CHECK(mismatches == 0);
}

} // namespace

TEST_CASE("grid construction")
{
    CHECK_THROWS_AS(VoxelGrid(Vec3::Zero(), 0.0, Eigen::Vector3i(2, 2, 2)), InvalidInput);
    CHECK_THROWS_AS(VoxelGrid(Vec3::Zero(), 0.1, Eigen::Vector3i(2, 0, 2)), InvalidInput);
    VoxelGrid g(Vec3(1, 2, 3), 0.5, Eigen::Vector3i(4, 5, 6));
    CHECK(g.voxelCount() == 120);
    CHECK(g.center({0, 0, 0}).isApprox(Vec3(1.25, 2.25, 3.25)));
    CHECK(g.indexOf(Vec3(1.6, 2.0, 5.9)) == Eigen::Vector3i(1, 0, 5));
    CHECK_THROWS_AS(g.setOccupied({4, 0, 0}), InvalidInput);
}

TEST_CASE("empty grid is capped everywhere")
{
    VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(8, 9, 10));
    const EsdfGrid e = buildEsdf(g, 5.0);
    for (int z = 0; z < 10; ++z)
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 8; ++x)
                CHECK(e.at({x, y, z}) == 5.0);
    CHECK(e.query(Vec3(0.4, 0.4, 0.4)).gradient.isZero(0.0));
}

TEST_CASE("single occupied voxel")
{
    VoxelGrid g(Vec3::Zero(), 0.2, Eigen::Vector3i(11, 11, 11));
    g.setOccupied({5, 5, 5});
    const EsdfGrid e = buildEsdf(g);
    CHECK(e.at({5, 5, 5}) == 0.0);
    CHECK(e.at({6, 5, 5}) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(e.at({5, 4, 5}) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(e.at({6, 6, 6}) == doctest::Approx(0.2 * std::sqrt(3.0)).epsilon(1e-15));

    // Gradient points away from the obstacle.
    std::mt19937_64 rng(301);
    std::uniform_real_distribution<double> ud(0.2, 2.0);
    const Vec3 obstacle = g.center({5, 5, 5});
    for (int trial = 0; trial < 200; ++trial)
    {
        const Vec3 p = Vec3(ud(rng), ud(rng), ud(rng));
        if ((p - obstacle).norm() < 0.3)
            continue;
        CHECK(e.query(p).gradient.dot(p - obstacle) > 0.0);
    }
}

TEST_CASE("20^3 random grid matches brute force")
{
    std::mt19937_64 rng(303);
    std::vector<unsigned char> flat;
    const VoxelGrid g = randomGrid(rng, Eigen::Vector3i(20, 20, 20), 0.01, 0.1, flat);
    checkAgainstBruteForce(g, flat, 100.0);
}

TEST_CASE("assorted grids up to 32^3 match brute force")
{
    std::mt19937_64 rng(305);
    const Eigen::Vector3i shapes[] = {{1, 1, 1},   {1, 7, 3},   {32, 1, 1},  {5, 17, 2},
                                      {32, 32, 32}, {31, 8, 19}, {12, 12, 12}};
    const double fills[] = {0.0, 0.001, 0.05, 0.4};
    for (const auto &s : shapes)
        for (double f : fills)
        {
            std::vector<unsigned char> flat;
            const VoxelGrid g = randomGrid(rng, s, f, 0.15, flat);
            checkAgainstBruteForce(g, flat, 100.0);
            checkAgainstBruteForce(g, flat, 0.5);
        }
}

TEST_CASE("distance field invariants")
{
    std::mt19937_64 rng(307);
    std::vector<unsigned char> flat;
    const VoxelGrid g = randomGrid(rng, Eigen::Vector3i(16, 14, 12), 0.02, 0.1, flat);
    const EsdfGrid e = buildEsdf(g, 0.6);
    const Eigen::Vector3i d = g.dims();
    for (int z = 0; z < d.z(); ++z)
        for (int y = 0; y < d.y(); ++y)
            for (int x = 0; x < d.x(); ++x)
            {
                const double v = e.at({x, y, z});
                CHECK(v >= 0.0);
                CHECK(v <= 0.6);
                if (g.occupied({x, y, z}))
                    CHECK(v == 0.0);
                for (int a = 0; a < 3; ++a)
                {
                    Eigen::Vector3i n(x, y, z);
                    n(a) += 1;
                    if (g.contains(n))
                        CHECK(std::abs(v - e.at(n)) <= g.resolution() + 1e-12);
                }
            }
}

TEST_CASE("interpolated queries")
{
    std::mt19937_64 rng(309);
    std::vector<unsigned char> flat;
    const VoxelGrid g = randomGrid(rng, Eigen::Vector3i(20, 18, 16), 0.01, 0.1, flat);
    const EsdfGrid e = buildEsdf(g, 5.0);

    SUBCASE("voxel centers are exact")
    {
        for (int trial = 0; trial < 200; ++trial)
        {
            const Eigen::Vector3i idx(static_cast<int>(rng() % 20), static_cast<int>(rng() % 18),
                                      static_cast<int>(rng() % 16));
            const EsdfSample s = e.query(g.center(idx));
            CHECK(s.distance == doctest::Approx(e.at(idx)).epsilon(1e-12));
            CHECK_FALSE(s.outOfBounds);
        }
    }
    SUBCASE("gradient matches finite differences of the interpolant")
    {
        const double h = 1e-4 * g.resolution();
        const Vec3 lo = g.center({0, 0, 0}), hi = g.center(g.dims() - Eigen::Vector3i::Ones());
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 2000; ++trial)
        {
            const Vec3 p = lo + (hi - lo).cwiseProduct(Vec3(u01(rng), u01(rng), u01(rng)));
            // Stay off cell faces where the interpolant has a kink.
            const Vec3 frac = ((p - lo) / g.resolution()).array() - ((p - lo) / g.resolution()).array().floor();
            if ((frac.array() < 1e-2).any() || (frac.array() > 1 - 1e-2).any())
                continue;
            const Vec3 grad = e.query(p).gradient;
            for (int a = 0; a < 3; ++a)
            {
                Vec3 pp = p, pm = p;
                pp(a) += h;
                pm(a) -= h;
                const double fd = (e.distance(pp) - e.distance(pm)) / (2 * h);
                worst = std::max(worst, std::abs(fd - grad(a)));
            }
        }
        CHECK(worst < 1e-6);
    }
    SUBCASE("continuity across voxel faces")
    {
        double worst = 0.0;
        for (int trial = 0; trial < 500; ++trial)
        {
            const Eigen::Vector3i idx(static_cast<int>(rng() % 19), static_cast<int>(rng() % 17),
                                      static_cast<int>(rng() % 15));
            const int axis = static_cast<int>(rng() % 3);
            Vec3 p = g.center(idx) + Vec3(0.03, 0.05, 0.07);
            p(axis) = g.center(idx)(axis) + g.resolution();
            Vec3 a = p, b = p;
            a(axis) -= 1e-12;
            b(axis) += 1e-12;
            worst = std::max(worst, std::abs(e.distance(a) - e.distance(b)));
        }
        CHECK(worst < 1e-9);
    }
    SUBCASE("out-of-bounds queries are clamped and flagged")
    {
        const EsdfSample s = e.query(g.origin() - Vec3(1.0, 1.0, 1.0));
        CHECK(s.outOfBounds);
        CHECK(s.distance == doctest::Approx(e.at({0, 0, 0})));
        CHECK(e.query(g.upperCorner() + Vec3(0.0, 0.0, 3.0)).outOfBounds);
    }
}

TEST_CASE("shape rasterization")
{
    VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(40, 40, 20));
    g.addBox(Vec3(1.0, 1.0, 0.0), Vec3(1.5, 2.0, 1.0));
    CHECK(g.occupied(g.indexOf(Vec3(1.25, 1.55, 0.55))));
    CHECK_FALSE(g.occupied(g.indexOf(Vec3(0.95, 1.55, 0.55))));
    CHECK(g.occupiedCount() == 5 * 10 * 10);

    VoxelGrid c(Vec3::Zero(), 0.1, Eigen::Vector3i(40, 40, 20));
    c.addCylinder(Eigen::Vector2d(2.0, 2.0), 0.5, 0.0, 2.0);
    CHECK(c.occupied(c.indexOf(Vec3(2.05, 2.05, 1.0))));
    CHECK_FALSE(c.occupied(c.indexOf(Vec3(2.6, 2.05, 1.0))));
    const EsdfGrid e = buildEsdf(c);
    // Distance from a point 1 m outside the axis to the rasterized surface.
    CHECK(e.distance(Vec3(3.05, 2.05, 1.05)) == doctest::Approx(0.6).epsilon(0.2));
}

TEST_CASE("voxel list import")
{
    VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(4, 4, 4));
    g.addVoxelList("# header\n0 0 0\n\n3 2 1  # trailing\n");
    CHECK(g.occupiedCount() == 2);
    CHECK(g.occupied({3, 2, 1}));
    try
    {
        g.addVoxelList("1 1 1\n1 2\n");
        FAIL("expected InvalidInput");
    }
    catch (const InvalidInput &err)
    {
        CHECK(std::string(err.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(g.addVoxelList("9 0 0\n"), InvalidInput);
}
