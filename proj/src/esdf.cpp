#include "gale/esdf.hpp"

#include <limits>
#include <sstream>

namespace gale
{

VoxelGrid::VoxelGrid(const Vec3 &origin, double resolution, const Eigen::Vector3i &dims)
    : origin_(origin), resolution_(resolution), dims_(dims)
{
    if (!(resolution > 0.0) || !std::isfinite(resolution) || !origin.allFinite())
    {
        throw InvalidInput("VoxelGrid: resolution must be positive");
    }
    if ((dims.array() < 1).any())
    {
        throw InvalidInput("VoxelGrid: every dimension must be >= 1");
    }
    occ_.assign(static_cast<size_t>(voxelCount()), 0);
}

bool VoxelGrid::contains(const Eigen::Vector3i &idx) const
{
    return (idx.array() >= 0).all() && (idx.array() < dims_.array()).all();
}

Eigen::Vector3i VoxelGrid::indexOf(const Vec3 &p) const
{
    const Vec3 rel = (p - origin_) / resolution_;
    return Eigen::Vector3i(static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
                           static_cast<int>(std::floor(rel.z())));
}

void VoxelGrid::setOccupied(const Eigen::Vector3i &idx, bool value)
{
    if (!contains(idx))
    {
        throw InvalidInput("VoxelGrid: index out of range");
    }
    occ_[static_cast<size_t>(linear(idx))] = value ? 1 : 0;
}

long long VoxelGrid::occupiedCount() const
{
    long long n = 0;
    for (auto v : occ_)
    {
        n += v;
    }
    return n;
}

void VoxelGrid::addBox(const Vec3 &lo, const Vec3 &hi)
{
    const Eigen::Vector3i a = indexOf(lo).cwiseMax(0);
    const Eigen::Vector3i b = indexOf(hi).cwiseMin(dims_ - Eigen::Vector3i::Ones());
    for (int z = a.z(); z <= b.z(); ++z)
        for (int y = a.y(); y <= b.y(); ++y)
            for (int x = a.x(); x <= b.x(); ++x)
            {
                const Eigen::Vector3i idx(x, y, z);
                const Vec3 c = center(idx);
                if ((c.array() >= lo.array()).all() && (c.array() <= hi.array()).all())
                {
                    occ_[static_cast<size_t>(linear(idx))] = 1;
                }
            }
}

void VoxelGrid::addCylinder(const Eigen::Vector2d &centerXY, double radius, double zLo, double zHi)
{
    const Vec3 lo(centerXY.x() - radius, centerXY.y() - radius, zLo);
    const Vec3 hi(centerXY.x() + radius, centerXY.y() + radius, zHi);
    const Eigen::Vector3i a = indexOf(lo).cwiseMax(0);
    const Eigen::Vector3i b = indexOf(hi).cwiseMin(dims_ - Eigen::Vector3i::Ones());
    for (int z = a.z(); z <= b.z(); ++z)
        for (int y = a.y(); y <= b.y(); ++y)
            for (int x = a.x(); x <= b.x(); ++x)
            {
                const Eigen::Vector3i idx(x, y, z);
                const Vec3 c = center(idx);
                if (c.z() >= zLo && c.z() <= zHi && (c.head<2>() - centerXY).norm() <= radius)
                {
                    occ_[static_cast<size_t>(linear(idx))] = 1;
                }
            }
}

void VoxelGrid::addVoxelList(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        std::istringstream ls(line);
        int x, y, z;
        if (!(ls >> x))
        {
            continue;
        }
        if (!(ls >> y >> z))
        {
            throw InvalidInput("voxel list line " + std::to_string(lineNo) + ": expected 'x y z'");
        }
        const Eigen::Vector3i idx(x, y, z);
        if (!contains(idx))
        {
            throw InvalidInput("voxel list line " + std::to_string(lineNo) + ": index outside grid");
        }
        setOccupied(idx);
    }
}

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of sampled function f (Felzenszwalb &
// Huttenlocher lower envelope of parabolas). Infinite samples are not sites.
void edt1d(const std::vector<double> &f, std::vector<double> &d, std::vector<int> &v,
           std::vector<double> &z, int n)
{
    int k = -1;
    for (int q = 0; q < n; ++q)
    {
        if (f[static_cast<size_t>(q)] == kInf)
        {
            continue;
        }
        const double fq = f[static_cast<size_t>(q)] + static_cast<double>(q) * q;
        double s = -kInf;
        while (k >= 0)
        {
            const int vk = v[static_cast<size_t>(k)];
            s = (fq - (f[static_cast<size_t>(vk)] + static_cast<double>(vk) * vk)) / (2.0 * (q - vk));
            if (s <= z[static_cast<size_t>(k)])
            {
                --k;
            }
            else
            {
                break;
            }
        }
        ++k;
        v[static_cast<size_t>(k)] = q;
        z[static_cast<size_t>(k)] = k == 0 ? -kInf : s;
        z[static_cast<size_t>(k) + 1] = kInf;
    }
    if (k < 0)
    {
        std::fill(d.begin(), d.begin() + n, kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q)
    {
        while (z[static_cast<size_t>(j) + 1] < q)
        {
            ++j;
        }
        const int vj = v[static_cast<size_t>(j)];
        d[static_cast<size_t>(q)] = static_cast<double>(q - vj) * (q - vj) + f[static_cast<size_t>(vj)];
    }
}

} // namespace

EsdfGrid buildEsdf(const VoxelGrid &grid, double cap)
{
    if (!(cap > 0.0))
    {
        throw InvalidInput("buildEsdf: cap must be positive");
    }
    const Eigen::Vector3i dims = grid.dims();
    const size_t total = static_cast<size_t>(grid.voxelCount());
    std::vector<double> sq(total);
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x)
            {
                const Eigen::Vector3i idx(x, y, z);
                sq[static_cast<size_t>(grid.linear(idx))] = grid.occupied(idx) ? 0.0 : kInf;
            }

    const int maxDim = dims.maxCoeff();
    std::vector<double> f(static_cast<size_t>(maxDim)), d(static_cast<size_t>(maxDim));
    std::vector<int> v(static_cast<size_t>(maxDim));
    std::vector<double> zb(static_cast<size_t>(maxDim) + 1);

    auto pass = [&](int axis) {
        const int n = dims(axis);
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        for (int i2 = 0; i2 < dims(a2); ++i2)
            for (int i1 = 0; i1 < dims(a1); ++i1)
            {
                Eigen::Vector3i idx;
                idx(a1) = i1;
                idx(a2) = i2;
                for (int q = 0; q < n; ++q)
                {
                    idx(axis) = q;
                    f[static_cast<size_t>(q)] = sq[static_cast<size_t>(grid.linear(idx))];
                }
                edt1d(f, d, v, zb, n);
                for (int q = 0; q < n; ++q)
                {
                    idx(axis) = q;
                    sq[static_cast<size_t>(grid.linear(idx))] = d[static_cast<size_t>(q)];
                }
            }
    };
    pass(0);
    pass(1);
    pass(2);

    EsdfGrid out;
    out.grid_ = grid;
    out.cap_ = cap;
    out.dist_.resize(total);
    const double res = grid.resolution();
    for (size_t i = 0; i < total; ++i)
    {
        out.dist_[i] = sq[i] == kInf ? cap : std::min(cap, res * std::sqrt(sq[i]));
    }
    return out;
}

EsdfSample EsdfGrid::query(const Vec3 &p) const
{
    EsdfSample s;
    const Eigen::Vector3i &dims = grid_.dims();
    const double res = grid_.resolution();
    // Continuous index in the lattice of voxel centers.
    Vec3 u = (p - grid_.origin()) / res - Vec3::Constant(0.5);
    int i0[3];
    double w[3];
    bool axisActive[3];
    for (int a = 0; a < 3; ++a)
    {
        const double hi = static_cast<double>(dims(a) - 1);
        if (u(a) < 0.0 || u(a) > hi || !std::isfinite(u(a)))
        {
            s.outOfBounds = true;
            u(a) = std::isfinite(u(a)) ? std::clamp(u(a), 0.0, hi) : 0.0;
            axisActive[a] = false;
        }
        else
        {
            axisActive[a] = true;
        }
        if (dims(a) == 1)
        {
            i0[a] = 0;
            w[a] = 0.0;
            axisActive[a] = false;
            continue;
        }
        i0[a] = std::min(static_cast<int>(std::floor(u(a))), dims(a) - 2);
        w[a] = u(a) - i0[a];
    }

    double c[2][2][2];
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
            {
                const Eigen::Vector3i idx(std::min(i0[0] + dx, dims(0) - 1), std::min(i0[1] + dy, dims(1) - 1),
                                          std::min(i0[2] + dz, dims(2) - 1));
                c[dx][dy][dz] = at(idx);
            }

    const double wx = w[0], wy = w[1], wz = w[2];
    const double c00 = c[0][0][0] * (1 - wx) + c[1][0][0] * wx;
    const double c10 = c[0][1][0] * (1 - wx) + c[1][1][0] * wx;
    const double c01 = c[0][0][1] * (1 - wx) + c[1][0][1] * wx;
    const double c11 = c[0][1][1] * (1 - wx) + c[1][1][1] * wx;
    const double c0 = c00 * (1 - wy) + c10 * wy;
    const double c1 = c01 * (1 - wy) + c11 * wy;
    s.distance = c0 * (1 - wz) + c1 * wz;

    const double dx00 = c[1][0][0] - c[0][0][0];
    const double dx10 = c[1][1][0] - c[0][1][0];
    const double dx01 = c[1][0][1] - c[0][0][1];
    const double dx11 = c[1][1][1] - c[0][1][1];
    const double gx = ((dx00 * (1 - wy) + dx10 * wy) * (1 - wz) + (dx01 * (1 - wy) + dx11 * wy) * wz);
    const double gy = ((c10 - c00) * (1 - wz) + (c11 - c01) * wz);
    const double gz = c1 - c0;
    s.gradient = Vec3(axisActive[0] ? gx / res : 0.0, axisActive[1] ? gy / res : 0.0,
                      axisActive[2] ? gz / res : 0.0);
    return s;
}

} // namespace gale
