#pragma once

#include "gale/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gale
{

// Uniform occupancy grid. Voxel (i, j, k) covers
// [origin + (i, j, k) * res, origin + (i + 1, j + 1, k + 1) * res).
class VoxelGrid
{
public:
    VoxelGrid() = default;
    VoxelGrid(const Vec3 &origin, double resolution, const Eigen::Vector3i &dims);

    const Vec3 &origin() const { return origin_; }
    double resolution() const { return resolution_; }
    const Eigen::Vector3i &dims() const { return dims_; }
    long long voxelCount() const { return static_cast<long long>(dims_.x()) * dims_.y() * dims_.z(); }
    Vec3 upperCorner() const { return origin_ + dims_.cast<double>() * resolution_; }

    bool contains(const Eigen::Vector3i &idx) const;
    long long linear(const Eigen::Vector3i &idx) const
    {
        return (static_cast<long long>(idx.z()) * dims_.y() + idx.y()) * dims_.x() + idx.x();
    }
    Vec3 center(const Eigen::Vector3i &idx) const
    {
        return origin_ + (idx.cast<double>() + Vec3::Constant(0.5)) * resolution_;
    }
    // Index of the voxel containing p (may lie outside the grid).
    Eigen::Vector3i indexOf(const Vec3 &p) const;

    bool occupied(const Eigen::Vector3i &idx) const { return occ_[static_cast<size_t>(linear(idx))] != 0; }
    void setOccupied(const Eigen::Vector3i &idx, bool value = true);
    long long occupiedCount() const;

    // Rasterize by voxel centers.
    void addBox(const Vec3 &lo, const Vec3 &hi);
    void addCylinder(const Eigen::Vector2d &centerXY, double radius, double zLo, double zHi);
    // Plain text, one "x y z" index triple per line; '#' starts a comment.
    void addVoxelList(const std::string &text);

private:
    Vec3 origin_ = Vec3::Zero();
    double resolution_ = 0.1;
    Eigen::Vector3i dims_ = Eigen::Vector3i::Ones();
    std::vector<std::uint8_t> occ_ = std::vector<std::uint8_t>(1, 0);
};

struct EsdfSample
{
    double distance = 0.0;
    Vec3 gradient = Vec3::Zero();
    bool outOfBounds = false;
};

// Euclidean distance from each voxel center to the nearest occupied voxel
// center, capped. Immutable once built.
class EsdfGrid
{
public:
    EsdfGrid() = default;

    const VoxelGrid &grid() const { return grid_; }
    double cap() const { return cap_; }
    double at(const Eigen::Vector3i &idx) const { return dist_[static_cast<size_t>(grid_.linear(idx))]; }

    // Trilinear interpolation of the stored distances between voxel centers
    // and its exact gradient. Points outside the center lattice are clamped.
    EsdfSample query(const Vec3 &p) const;
    double distance(const Vec3 &p) const { return query(p).distance; }

    friend EsdfGrid buildEsdf(const VoxelGrid &grid, double cap);

private:
    VoxelGrid grid_;
    double cap_ = 5.0;
    std::vector<double> dist_;
};

// Exact Euclidean distance transform (separable lower-envelope method).
EsdfGrid buildEsdf(const VoxelGrid &grid, double cap = 5.0);

} // namespace gale
