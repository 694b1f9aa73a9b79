#include "gale/flatness.hpp"

namespace gale
{

Vec3 eulerFromThrustAxis(const Vec3 &zb, double yaw)
{
    // Rz(-yaw) * zb = [sin(pitch) cos(roll), -sin(roll), cos(pitch) cos(roll)]
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec3 w(c * zb.x() + s * zb.y(), -s * zb.x() + c * zb.y(), zb.z());
    const double roll = std::atan2(-w.y(), std::hypot(w.x(), w.z()));
    const double pitch = std::atan2(w.x(), w.z());
    return Vec3(roll, pitch, yaw);
}

FlatOutputState flatInverse(const Vec3 &p, const Vec3 &v, const Vec3 &a, double yaw,
                            const Vec3 &disturbance, const QuadParams &params,
                            bool compensateDrag)
{
    // R e3 T = m (a + g) + R D R^T v - F
    const Vec3 base = params.mass * (a + params.gravity) - disturbance;
    Vec3 force = base;
    if (force.norm() < kMinThrustNorm)
    {
        throw InvalidInput("flatInverse: reference requires (near) zero thrust");
    }
    Vec3 euler = eulerFromThrustAxis(force.normalized(), yaw);
    if (compensateDrag)
    {
        for (int it = 0; it < 30; ++it)
        {
            const Mat3 r = rotationZYX(euler);
            force = base + r * (params.drag * (r.transpose() * v));
            if (force.norm() < kMinThrustNorm)
            {
                throw InvalidInput("flatInverse: reference requires (near) zero thrust");
            }
            const Vec3 next = eulerFromThrustAxis(force.normalized(), yaw);
            const double change = (next - euler).cwiseAbs().maxCoeff();
            euler = next;
            if (change < 1e-13)
            {
                break;
            }
        }
    }
    FlatOutputState out;
    out.state.p = p;
    out.state.v = v;
    out.state.euler = euler;
    out.thrust = force.norm();
    return out;
}

} // namespace gale
