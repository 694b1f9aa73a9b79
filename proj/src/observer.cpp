#include "gale/observer.hpp"

#include <cstdio>

namespace gale
{

ObserverGains ObserverGains::fromBandwidth(double omega0, double mass)
{
    if (!(omega0 > 0.0) || !(mass > 0.0) || !std::isfinite(omega0))
    {
        throw InvalidInput("ObserverGains: bandwidth and mass must be positive");
    }
    ObserverGains g;
    g.g1 = 3.0 * omega0 * Mat3::Identity();
    g.g2 = 3.0 * mass * omega0 * omega0 * Mat3::Identity();
    g.g3 = mass * omega0 * omega0 * omega0 * Mat3::Identity();
    return g;
}

Mat9 ObserverGains::errorMatrix(double mass) const
{
    Mat9 e = Mat9::Zero();
    e.block<3, 3>(0, 0) = -g1;
    e.block<3, 3>(0, 3) = Mat3::Identity() / mass;
    e.block<3, 3>(3, 0) = -g2;
    e.block<3, 3>(3, 6) = Mat3::Identity();
    e.block<3, 3>(6, 0) = -g3;
    return e;
}

void ObserverGains::validate(double mass) const
{
    if (!g1.allFinite() || !g2.allFinite() || !g3.allFinite() || !(mass > 0.0))
    {
        throw InvalidInput("ObserverGains: non-finite gains");
    }
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat9>(errorMatrix(mass), false).eigenvalues();
    if (ev.real().maxCoeff() >= 0.0)
    {
        throw InvalidInput("ObserverGains: error dynamics are not Hurwitz");
    }
}

ObserverState observerStep(const ObserverState &s, const Vec3 &vMeasured, const Mat3 &rotation, double thrust,
                           const Vec3 &vForDrag, double dt, const ObserverGains &gains, const QuadParams &params)
{
    if (!(dt > 0.0) || !vMeasured.allFinite() || !rotation.allFinite() || !std::isfinite(thrust) ||
        !vForDrag.allFinite() || !s.vHat.allFinite() || !s.z1.allFinite() || !s.z2.allFinite())
    {
        throw InvalidInput("observerStep: non-finite input or non-positive dt");
    }
    const Vec3 innovation = vMeasured - s.vHat;
    const Vec3 drag = rotation * params.drag * rotation.transpose() * vForDrag;
    const Vec3 vDot = (rotation.col(2) * thrust - drag + s.z1) / params.mass - params.gravity + gains.g1 * innovation;
    ObserverState out;
    out.vHat = s.vHat + dt * vDot;
    out.z1 = s.z1 + dt * (s.z2 + gains.g2 * innovation);
    out.z2 = s.z2 + dt * (gains.g3 * innovation);
    return out;
}

void ObserverConfig::validate() const
{
    if (!(bandwidth > 0.0) || !std::isfinite(lowPassCutoff) || !(spreadWindow >= 0.0))
    {
        throw InvalidInput("ObserverConfig: bandwidth must be positive and the window non-negative");
    }
}

DisturbanceObserver::DisturbanceObserver(ObserverConfig cfg, QuadParams params)
    : cfg_(cfg), params_(std::move(params))
{
    cfg_.validate();
    params_.validate();
    gains_ = ObserverGains::fromBandwidth(cfg_.bandwidth, params_.mass);
    gains_.validate(params_.mass);
}

void DisturbanceObserver::reset(const Vec3 &velocity, const Vec3 &force)
{
    state_ = ObserverState{velocity, force, Vec3::Zero()};
    filtered_ = force;
    history_.clear();
}

void DisturbanceObserver::update(const Vec3 &vMeasured, const Vec3 &euler, double thrust, double dt)
{
    state_ = observerStep(state_, vMeasured, rotationZYX(euler), thrust, vMeasured, dt, gains_, params_);
    if (cfg_.lowPassCutoff > 0.0)
    {
        const double tc = 1.0 / (2.0 * M_PI * cfg_.lowPassCutoff);
        filtered_ += dt / (dt + tc) * (state_.z1 - filtered_);
    }
    else
    {
        filtered_ = state_.z1;
    }
    history_.push_back(filtered_);
    const size_t cap = static_cast<size_t>(std::max(1.0, std::round(cfg_.spreadWindow / dt)));
    while (history_.size() > cap)
    {
        history_.pop_front();
    }
}

DisturbanceEstimate DisturbanceObserver::estimate() const
{
    DisturbanceEstimate e;
    e.force = filtered_;
    e.rate = state_.z2;
    if (history_.size() > 1)
    {
        Vec3 mean = Vec3::Zero();
        for (const Vec3 &h : history_)
        {
            mean += h;
        }
        mean /= static_cast<double>(history_.size());
        Vec3 var = Vec3::Zero();
        for (const Vec3 &h : history_)
        {
            var += (h - mean).cwiseAbs2();
        }
        e.sigma = (var / static_cast<double>(history_.size() - 1)).cwiseSqrt();
    }
    return e;
}

std::string estimateCsvRow(double t, const ObserverState &s, const Vec3 &f)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t, s.z1.x(), s.z1.y(),
                  s.z1.z(), s.z2.x(), s.z2.y(), s.z2.z(), f.x(), f.y(), f.z());
    return buf;
}

} // namespace gale
