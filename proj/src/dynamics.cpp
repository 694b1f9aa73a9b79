#include "gale/dynamics.hpp"

#include "gale/linalg.hpp"

namespace gale
{

void QuadParams::validate() const
{
    if (!(mass > 0.0) || !std::isfinite(mass))
    {
        throw InvalidInput("QuadParams: mass must be positive");
    }
    const Mat3 sym = 0.5 * (drag + drag.transpose());
    if (!drag.allFinite() || (drag - sym).cwiseAbs().maxCoeff() > 1e-12 ||
        linalg::minEigenvalueSym(sym) < -1e-12)
    {
        throw InvalidInput("QuadParams: drag matrix must be symmetric PSD");
    }
    if (!(thrustMin >= 0.0) || !(thrustMax > thrustMin))
    {
        throw InvalidInput("QuadParams: need 0 <= thrustMin < thrustMax");
    }
    if (!(rateMax > 0.0) || !(maxTilt > 0.0) || !(maxTilt < kTiltGuard) || !(radius >= 0.0))
    {
        throw InvalidInput("QuadParams: rateMax, maxTilt, radius out of range");
    }
}

Vec9 QuadState::toVector() const
{
    Vec9 x;
    x << p, v, euler;
    return x;
}

QuadState QuadState::fromVector(const Vec9 &x)
{
    return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6)};
}

Vec4 ControlInput::toVector() const
{
    return Vec4(thrust, rates.x(), rates.y(), rates.z());
}

ControlInput ControlInput::fromVector(const Vec4 &u)
{
    return {u(0), u.tail<3>()};
}

Mat3 rotationZYX(const Vec3 &euler)
{
    const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
    const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
    const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
    Mat3 r;
    r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
        -sp, cp * sr, cp * cr;
    return r;
}

void rotationZYXPartials(const Vec3 &euler, Mat3 &dRoll, Mat3 &dPitch, Mat3 &dYaw)
{
    const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
    const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
    const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
    dRoll << 0.0, cy * sp * cr + sy * sr, -cy * sp * sr + sy * cr,
        0.0, sy * sp * cr - cy * sr, -sy * sp * sr - cy * cr,
        0.0, cp * cr, -cp * sr;
    dPitch << -cy * sp, cy * cp * sr, cy * cp * cr,
        -sy * sp, sy * cp * sr, sy * cp * cr,
        -cp, -sp * sr, -sp * cr;
    dYaw << -sy * cp, -sy * sp * sr - cy * cr, -sy * sp * cr + cy * sr,
        cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        0.0, 0.0, 0.0;
}

namespace
{

void checkInputs(const QuadState &x, const ControlInput &u, const Vec3 &fDist)
{
    if (!x.p.allFinite() || !x.v.allFinite() || !x.euler.allFinite() ||
        !std::isfinite(u.thrust) || !u.rates.allFinite() || !fDist.allFinite())
    {
        throw InvalidInput("quadrotor model: non-finite state, input or disturbance");
    }
    if (std::abs(x.euler.y()) >= kTiltGuard)
    {
        throw SingularityError("quadrotor model: |pitch| >= 85 deg, Euler parameterization singular");
    }
}

} // namespace

Vec9 derivative(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                const QuadParams &params)
{
    checkInputs(x, u, fDist);
    const Mat3 r = rotationZYX(x.euler);
    const Vec3 thrust = r.col(2) * u.thrust;
    const Vec3 drag = r * (params.drag * (r.transpose() * x.v));
    Vec9 dx;
    dx.segment<3>(0) = x.v;
    dx.segment<3>(3) = (thrust - drag + fDist) / params.mass - params.gravity;
    dx.segment<3>(6) = u.rates;
    return dx;
}

QuadState stepEuler(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                    double dt, const QuadParams &params)
{
    if (!(dt > 0.0))
    {
        throw InvalidInput("stepEuler: dt must be positive");
    }
    return QuadState::fromVector(x.toVector() + dt * derivative(x, u, fDist, params));
}

QuadState stepRk4(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                  double dt, const QuadParams &params)
{
    if (!(dt > 0.0))
    {
        throw InvalidInput("stepRk4: dt must be positive");
    }
    const Vec9 x0 = x.toVector();
    const Vec9 k1 = derivative(x, u, fDist, params);
    const Vec9 k2 = derivative(QuadState::fromVector(x0 + 0.5 * dt * k1), u, fDist, params);
    const Vec9 k3 = derivative(QuadState::fromVector(x0 + 0.5 * dt * k2), u, fDist, params);
    const Vec9 k4 = derivative(QuadState::fromVector(x0 + dt * k3), u, fDist, params);
    return QuadState::fromVector(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

LinearizedModel linearize(const QuadState &x, const ControlInput &u, const Vec3 &fDist,
                          const QuadParams &params, const Mat49 &gain)
{
    checkInputs(x, u, fDist);
    const double invM = 1.0 / params.mass;
    const Mat3 r = rotationZYX(x.euler);
    Mat3 dR[3];
    rotationZYXPartials(x.euler, dR[0], dR[1], dR[2]);

    LinearizedModel lin;
    lin.A.block<3, 3>(0, 3).setIdentity();
    lin.A.block<3, 3>(3, 3) = -invM * r * params.drag * r.transpose();
    const Vec3 bodyVel = r.transpose() * x.v;
    for (int a = 0; a < 3; ++a)
    {
        const Vec3 dThrust = dR[a].col(2) * u.thrust;
        const Vec3 dDrag = dR[a] * (params.drag * bodyVel) +
                           r * (params.drag * (dR[a].transpose() * x.v));
        lin.A.block<3, 1>(3, 6 + a) = invM * (dThrust - dDrag);
    }
    lin.B.block<3, 1>(3, 0) = invM * r.col(2);
    lin.B.block<3, 3>(6, 1).setIdentity();
    lin.D.block<3, 3>(3, 0) = invM * Mat3::Identity();
    lin.K = gain;
    lin.Phi = lin.A + lin.B * gain;
    return lin;
}

Mat49 hoverLqrGain(const QuadParams &params, double yaw, const LqrWeights &weights)
{
    QuadState hover;
    hover.euler.z() = yaw;
    const LinearizedModel lin =
        linearize(hover, ControlInput::hover(params), Vec3::Zero(), params, Mat49::Zero());
    const Eigen::MatrixXd q = weights.state.asDiagonal();
    const Eigen::MatrixXd r = weights.input.asDiagonal();
    const Eigen::MatrixXd p = linalg::solveCare(lin.A, lin.B, q, r);
    // u = K e with K = -R^-1 B^T P.
    return -(r.inverse() * lin.B.transpose() * p);
}

const Mat49 &LqrGainCache::gain(const QuadParams &params, double yaw)
{
    if (!valid_ || std::abs(wrapAngle(yaw - yaw_)) > yawThreshold_ || params.mass != mass_)
    {
        gain_ = hoverLqrGain(params, yaw, weights_);
        yaw_ = yaw;
        mass_ = params.mass;
        valid_ = true;
        ++recomputations_;
    }
    return gain_;
}

} // namespace gale
