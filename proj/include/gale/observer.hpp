#pragma once

#include "gale/dynamics.hpp"
#include "gale/flatness.hpp"

#include <deque>
#include <string>

namespace gale
{

struct ObserverState
{
    Vec3 vHat = Vec3::Zero(); // m/s
    Vec3 z1 = Vec3::Zero();   // force estimate, N
    Vec3 z2 = Vec3::Zero();   // force rate estimate, N/s
};

struct ObserverGains
{
    Mat3 g1 = Mat3::Zero();
    Mat3 g2 = Mat3::Zero();
    Mat3 g3 = Mat3::Zero();

    // Triple pole at -omega0 on every axis for a vehicle of the given mass:
    // G1 = 3 w I, G2 = 3 m w^2 I, G3 = m w^3 I.
    static ObserverGains fromBandwidth(double omega0, double mass);

    // 9x9 matrix of the estimation error (e_v, e_z1, e_z2) dynamics.
    Mat9 errorMatrix(double mass) const;

    // Throws InvalidInput unless errorMatrix is Hurwitz.
    void validate(double mass) const;
};

// One forward-Euler step of the observer. `vForDrag` is the velocity used in
// the drag model, usually the measurement.
ObserverState observerStep(const ObserverState &s, const Vec3 &vMeasured, const Mat3 &rotation, double thrust,
                           const Vec3 &vForDrag, double dt, const ObserverGains &gains, const QuadParams &params);

struct ObserverConfig
{
    double bandwidth = 8.0;        // rad/s
    double lowPassCutoff = 20.0;   // Hz, on the published force; <= 0 disables
    double spreadWindow = 1.0;     // s, history used for the per-channel spread

    void validate() const;
    bool operator==(const ObserverConfig &) const = default;
};

// Observer plus the published estimate (low-passed force, rate, spread).
class DisturbanceObserver
{
public:
    DisturbanceObserver(ObserverConfig cfg, QuadParams params);

    void reset(const Vec3 &velocity, const Vec3 &force = Vec3::Zero());
    void update(const Vec3 &vMeasured, const Vec3 &euler, double thrust, double dt);

    const ObserverState &state() const { return state_; }
    const ObserverGains &gains() const { return gains_; }
    DisturbanceEstimate estimate() const;

private:
    ObserverConfig cfg_;
    QuadParams params_;
    ObserverGains gains_;
    ObserverState state_;
    Vec3 filtered_ = Vec3::Zero();
    std::deque<Vec3> history_;
};

// "t,z1x,z1y,z1z,z2x,z2y,z2z,fx,fy,fz" row with fixed decimals.
std::string estimateCsvRow(double t, const ObserverState &s, const Vec3 &trueForce);

} // namespace gale
