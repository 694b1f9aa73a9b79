#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gale
{

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat94 = Eigen::Matrix<double, 9, 4>;
using Mat93 = Eigen::Matrix<double, 9, 3>;
using Mat49 = Eigen::Matrix<double, 4, 9>;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kGravity = 9.81;

inline Vec3 gravityVector() { return Vec3(0.0, 0.0, kGravity); }

// Error hierarchy. Every failure the library reports derives from gale::Error.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values, wrong shapes, out-of-range arguments.
class InvalidInput : public Error
{
public:
    using Error::Error;
};

// Pitch too close to +-pi/2 for the Z-Y-X Euler parameterization.
class SingularityError : public Error
{
public:
    using Error::Error;
};

// A Lyapunov/Sylvester operator with eigenvalue pair summing to zero.
class SingularOperator : public Error
{
public:
    using Error::Error;
};

class PlanningFailure : public Error
{
public:
    using Error::Error;
};

// Scenario / configuration problems. key() names the offending entry.
class ConfigError : public Error
{
public:
    ConfigError(std::string key, const std::string &what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string &key() const { return key_; }

private:
    std::string key_;
};

template <typename Derived>
bool allFinite(const Eigen::MatrixBase<Derived> &m)
{
    return m.allFinite();
}

// Wraps an angle to (-pi, pi].
double wrapAngle(double a);

} // namespace gale
