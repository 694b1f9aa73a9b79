#pragma once

#include "gale/common.hpp"

namespace gale
{

// Physical parameters of the vehicle. Drag is the first-order model
// F_drag = R D R^T v.
struct QuadParams
{
    double mass = 1.5;                                         // kg
    Mat3 drag = Eigen::Vector3d(0.25, 0.25, 0.1).asDiagonal(); // kg/s
    Vec3 gravity = gravityVector();                            // m/s^2
    double thrustMin = 2.0;                                    // N
    double thrustMax = 35.0;                                   // N
    double rateMax = 3.0;                                      // rad/s, per Euler-rate channel
    double maxTilt = 0.6;                                      // rad, roll and pitch
    double radius = 0.25;                                      // m, outer envelope sphere

    void validate() const;
    bool operator==(const QuadParams &) const = default;
    double hoverThrust() const { return mass * gravity.z(); }
};

// x = [p, v, roll, pitch, yaw].
struct QuadState
{
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 euler = Vec3::Zero();

    Vec9 toVector() const;
    static QuadState fromVector(const Vec9 &x);
    bool operator==(const QuadState &) const = default;
};

// u = [T_c, roll rate, pitch rate, yaw rate].
struct ControlInput
{
    double thrust = 0.0;
    Vec3 rates = Vec3::Zero();

    Vec4 toVector() const;
    static ControlInput fromVector(const Vec4 &u);
    static ControlInput hover(const QuadParams &params) { return {params.hoverThrust(), Vec3::Zero()}; }
    bool operator==(const ControlInput &) const = default;
};

// Jacobians of the continuous model at one operating point, plus the
// closed-loop matrix Phi = A + B K of the error dynamics.
struct LinearizedModel
{
    Mat9 A = Mat9::Zero();
    Mat94 B = Mat94::Zero();
    Mat93 D = Mat93::Zero();
    Mat49 K = Mat49::Zero();
    Mat9 Phi = Mat9::Zero();
};

// Pitch magnitude beyond which the Euler parameterization is refused.
inline constexpr double kTiltGuard = 85.0 * M_PI / 180.0;

// Z-Y-X (yaw-pitch-roll) body-to-world rotation.
Mat3 rotationZYX(const Vec3 &euler);

// Partial derivatives of rotationZYX with respect to roll, pitch, yaw.
void rotationZYXPartials(const Vec3 &euler, Mat3 &dRoll, Mat3 &dPitch, Mat3 &dYaw);

Vec9 derivative(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                const QuadParams &params);

QuadState stepEuler(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                    double dt, const QuadParams &params);

// Classic fourth-order Runge-Kutta with zero-order-hold input and disturbance.
QuadState stepRk4(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                  double dt, const QuadParams &params);

// Analytic Jacobians at (x, u, fDist); Phi = A + B K.
LinearizedModel linearize(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                          const QuadParams &params, const Mat49 &gain);

struct LqrWeights
{
    Vec9 state = (Vec9() << 8.0, 8.0, 8.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0).finished();
    Vec4 input = Vec4(0.2, 1.0, 1.0, 1.0);
};

// Infinite-horizon LQR feedback u = K e about hover at the given yaw.
Mat49 hoverLqrGain(const QuadParams &params, double yaw, const LqrWeights &weights = {});

// Keeps the last LQR gain and recomputes only when the yaw of the
// linearization point moves by more than `yawThreshold`.
class LqrGainCache
{
public:
    explicit LqrGainCache(LqrWeights weights = {}, double yawThreshold = 0.05)
        : weights_(weights), yawThreshold_(yawThreshold) {}

    const Mat49 &gain(const QuadParams &params, double yaw);
    int recomputations() const { return recomputations_; }

private:
    LqrWeights weights_;
    double yawThreshold_;
    bool valid_ = false;
    double yaw_ = 0.0;
    double mass_ = 0.0;
    Mat49 gain_ = Mat49::Zero();
    int recomputations_ = 0;
};

} // namespace gale
