#include "gale/nmpc.hpp"

#include <algorithm>
#include <array>

namespace gale
{

void NmpcConfig::validate() const
{
    if (horizon < 2 || !(dt > 0.0))
    {
        throw InvalidInput("NmpcConfig: horizon must be at least 2 and dt positive");
    }
    if ((stateWeight.array() < 0.0).any() || (terminalWeight.array() < 0.0).any() || !(inputWeight.array() > 0.0).all())
    {
        throw InvalidInput("NmpcConfig: state weights must be non-negative and input weights positive");
    }
    if (tiltWeight < 0.0 || maxIterations < 1 || !(tolerance >= 0.0) || maxLineSearch < 1)
    {
        throw InvalidInput("NmpcConfig: invalid solver settings");
    }
}

Vec9 stateError(const Vec9 &x, const Vec9 &ref)
{
    Vec9 e = x - ref;
    for (int i = 6; i < 9; ++i)
    {
        e(i) = wrapAngle(e(i));
    }
    return e;
}

namespace
{

ReferenceWindow fromFlatStates(const std::vector<FlatOutputState> &flat, const NmpcConfig &cfg)
{
    ReferenceWindow r;
    const int n = cfg.horizon;
    r.x.reserve(static_cast<size_t>(n + 1));
    r.u.reserve(static_cast<size_t>(n));
    for (const FlatOutputState &f : flat)
    {
        r.x.push_back(f.state.toVector());
    }
    for (int k = 0; k < n; ++k)
    {
        const Vec3 &e0 = flat[static_cast<size_t>(k)].state.euler;
        const Vec3 &e1 = flat[static_cast<size_t>(k + 1)].state.euler;
        Vec4 u;
        u(0) = flat[static_cast<size_t>(k)].thrust;
        for (int i = 0; i < 3; ++i)
        {
            u(1 + i) = wrapAngle(e1(i) - e0(i)) / cfg.dt;
        }
        r.u.push_back(u);
    }
    return r;
}

} // namespace

ReferenceWindow referenceFromTrajectory(const MincoTrajectory &traj, double t, const NmpcConfig &cfg, double yaw,
                                        const QuadParams &params, const Vec3 &disturbance, bool compensateDrag)
{
    cfg.validate();
    if (!std::isfinite(t))
    {
        throw InvalidInput("referenceFromTrajectory: non-finite time");
    }
    const double total = traj.totalDuration();
    std::vector<FlatOutputState> flat;
    for (int k = 0; k <= cfg.horizon; ++k)
    {
        const double tk = std::clamp(t + k * cfg.dt, 0.0, total);
        flat.push_back(flatInverse(traj.evaluate(tk, 0), traj.evaluate(tk, 1), traj.evaluate(tk, 2), yaw,
                                   disturbance, params, compensateDrag));
    }
    return fromFlatStates(flat, cfg);
}

ReferenceWindow hoverReference(const Vec3 &p, double yaw, const NmpcConfig &cfg, const QuadParams &params,
                               const Vec3 &disturbance)
{
    cfg.validate();
    const FlatOutputState f = flatInverse(p, Vec3::Zero(), Vec3::Zero(), yaw, disturbance, params, true);
    return fromFlatStates(std::vector<FlatOutputState>(static_cast<size_t>(cfg.horizon + 1), f), cfg);
}

NmpcTracker::NmpcTracker(NmpcConfig cfg, QuadParams params) : cfg_(cfg), params_(std::move(params))
{
    cfg_.validate();
    params_.validate();
}

Vec4 NmpcTracker::clampInput(const Vec4 &u) const
{
    Vec4 c;
    c(0) = std::clamp(u(0), params_.thrustMin, params_.thrustMax);
    for (int i = 1; i < 4; ++i)
    {
        c(i) = std::clamp(u(i), -params_.rateMax, params_.rateMax);
    }
    return c;
}

std::vector<Vec9> NmpcTracker::rollout(const Vec9 &x0, std::vector<Vec4> &us, const Vec3 &fHat) const
{
    std::vector<Vec9> xs;
    xs.reserve(us.size() + 1);
    xs.push_back(x0);
    for (Vec4 &u : us)
    {
        u = clampInput(u);
        const QuadState x = QuadState::fromVector(xs.back());
        xs.push_back(stepEuler(x, ControlInput::fromVector(u), fHat, cfg_.dt, params_).toVector());
    }
    return xs;
}

namespace
{

double tiltExcess(double angle, double limit)
{
    return std::max(std::abs(angle) - limit, 0.0) * (angle < 0.0 ? -1.0 : 1.0);
}

} // namespace

double NmpcTracker::cost(const std::vector<Vec9> &xs, const std::vector<Vec4> &us, const ReferenceWindow &refs) const
{
    double j = 0.0;
    const int n = cfg_.horizon;
    for (int k = 0; k <= n; ++k)
    {
        const Vec9 e = stateError(xs[static_cast<size_t>(k)], refs.x[static_cast<size_t>(k)]);
        const Vec9 &w = k == n ? cfg_.terminalWeight : cfg_.stateWeight;
        j += 0.5 * e.dot(w.cwiseProduct(e));
        for (int i = 6; i < 8; ++i)
        {
            const double ex = tiltExcess(xs[static_cast<size_t>(k)](i), params_.maxTilt);
            j += 0.5 * cfg_.tiltWeight * ex * ex;
        }
        if (k < n)
        {
            const Vec4 du = us[static_cast<size_t>(k)] - refs.u[static_cast<size_t>(k)];
            j += 0.5 * du.dot(cfg_.inputWeight.cwiseProduct(du));
        }
    }
    return j;
}

NmpcSolution NmpcTracker::solve(const QuadState &x0in, const ReferenceWindow &refs, const Vec3 &fHat)
{
    const int n = cfg_.horizon;
    if (static_cast<int>(refs.x.size()) != n + 1 || static_cast<int>(refs.u.size()) != n)
    {
        throw InvalidInput("NmpcTracker::solve: reference window does not match the horizon");
    }
    if (!x0in.toVector().allFinite() || !fHat.allFinite())
    {
        throw InvalidInput("NmpcTracker::solve: non-finite initial state or disturbance");
    }
    NmpcSolution sol;
    QuadState x0 = x0in;
    for (int i = 0; i < 2; ++i)
    {
        const double c = std::clamp(x0.euler(i), -params_.maxTilt, params_.maxTilt);
        if (c != x0.euler(i))
        {
            x0.euler(i) = c;
            sol.clampedInitialState = true;
        }
    }

    std::vector<Vec4> us;
    if (static_cast<int>(warm_.size()) == n)
    {
        us.assign(warm_.begin() + 1, warm_.end());
        us.push_back(warm_.back());
    }
    else
    {
        us = refs.u;
    }
    std::vector<Vec9> xs = rollout(x0.toVector(), us, fHat);
    double j = cost(xs, us, refs);
    sol.initialCost = j;
    sol.costHistory.push_back(j);

    const Mat49 zeroGain = Mat49::Zero();
    std::vector<Vec4> ff(static_cast<size_t>(n));
    std::vector<Mat49> fb(static_cast<size_t>(n));
    int it = 0;
    bool converged = false;
    for (; it < cfg_.maxIterations; ++it)
    {
        // Backward Riccati pass on the Gauss-Newton model.
        Vec9 vx;
        Mat9 vxx;
        {
            const Vec9 e = stateError(xs[static_cast<size_t>(n)], refs.x[static_cast<size_t>(n)]);
            vx = cfg_.terminalWeight.cwiseProduct(e);
            vxx = cfg_.terminalWeight.asDiagonal();
            for (int i = 6; i < 8; ++i)
            {
                const double ex = tiltExcess(xs[static_cast<size_t>(n)](i), params_.maxTilt);
                if (ex != 0.0)
                {
                    vx(i) += cfg_.tiltWeight * ex;
                    vxx(i, i) += cfg_.tiltWeight;
                }
            }
        }
        for (int k = n - 1; k >= 0; --k)
        {
            const Vec9 &xk = xs[static_cast<size_t>(k)];
            const Vec4 &uk = us[static_cast<size_t>(k)];
            const LinearizedModel lin = linearize(QuadState::fromVector(xk), ControlInput::fromVector(uk), fHat,
                                                  params_, zeroGain);
            const Mat9 a = Mat9::Identity() + cfg_.dt * lin.A;
            const Mat94 b = cfg_.dt * lin.B;
            const Vec9 e = stateError(xk, refs.x[static_cast<size_t>(k)]);
            Vec9 lx = cfg_.stateWeight.cwiseProduct(e);
            Mat9 lxx = cfg_.stateWeight.asDiagonal();
            for (int i = 6; i < 8; ++i)
            {
                const double ex = tiltExcess(xk(i), params_.maxTilt);
                if (ex != 0.0)
                {
                    lx(i) += cfg_.tiltWeight * ex;
                    lxx(i, i) += cfg_.tiltWeight;
                }
            }
            const Vec4 lu = cfg_.inputWeight.cwiseProduct(uk - refs.u[static_cast<size_t>(k)]);
            const Vec9 qx = lx + a.transpose() * vx;
            const Vec4 qu = lu + b.transpose() * vx;
            const Mat9 qxx = lxx + a.transpose() * vxx * a;
            Mat4 quu = Mat4(cfg_.inputWeight.asDiagonal()) + b.transpose() * vxx * b;
            const Mat49 qux = b.transpose() * vxx * a;

            // Inputs resting on a bound and pushed outward stay fixed.
            const Vec4 lo(params_.thrustMin, -params_.rateMax, -params_.rateMax, -params_.rateMax);
            const Vec4 hi(params_.thrustMax, params_.rateMax, params_.rateMax, params_.rateMax);
            std::array<bool, 4> freeIdx{};
            for (int i = 0; i < 4; ++i)
            {
                const bool atLo = uk(i) <= lo(i) + 1e-12 && qu(i) > 0.0;
                const bool atHi = uk(i) >= hi(i) - 1e-12 && qu(i) < 0.0;
                freeIdx[static_cast<size_t>(i)] = !(atLo || atHi);
            }
            Mat4 quuF = quu;
            Vec4 quF = qu;
            Mat49 quxF = qux;
            for (int i = 0; i < 4; ++i)
            {
                if (!freeIdx[static_cast<size_t>(i)])
                {
                    quuF.row(i).setZero();
                    quuF.col(i).setZero();
                    quuF(i, i) = 1.0;
                    quF(i) = 0.0;
                    quxF.row(i).setZero();
                }
            }
            const Eigen::LLT<Mat4> llt(quuF);
            Vec4 kff = -llt.solve(quF);
            Mat49 kfb = -llt.solve(quxF);
            ff[static_cast<size_t>(k)] = kff;
            fb[static_cast<size_t>(k)] = kfb;
            vx = qx + kfb.transpose() * quu * kff + kfb.transpose() * qu + qux.transpose() * kff;
            vxx = qxx + kfb.transpose() * quu * kfb + kfb.transpose() * qux + qux.transpose() * kfb;
            vxx = 0.5 * (vxx + vxx.transpose()).eval();
        }

        // Forward pass with a backtracking line search on the true cost.
        bool accepted = false;
        double alpha = 1.0;
        std::vector<Vec4> un(static_cast<size_t>(n));
        std::vector<Vec9> xn;
        double jn = j;
        for (int ls = 0; ls < cfg_.maxLineSearch; ++ls, alpha *= 0.5)
        {
            xn.assign(1, xs[0]);
            for (int k = 0; k < n; ++k)
            {
                const Vec9 dx = stateError(xn.back(), xs[static_cast<size_t>(k)]);
                un[static_cast<size_t>(k)] = clampInput(us[static_cast<size_t>(k)] + alpha * ff[static_cast<size_t>(k)] +
                                                        fb[static_cast<size_t>(k)] * dx);
                xn.push_back(stepEuler(QuadState::fromVector(xn.back()),
                                       ControlInput::fromVector(un[static_cast<size_t>(k)]), fHat, cfg_.dt, params_)
                                 .toVector());
            }
            jn = cost(xn, un, refs);
            if (jn < j)
            {
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            converged = true;
            break;
        }
        const double decrease = (j - jn) / std::max(1.0, j);
        xs = std::move(xn);
        us = un;
        j = jn;
        sol.costHistory.push_back(j);
        if (decrease < cfg_.tolerance)
        {
            ++it;
            converged = true;
            break;
        }
    }
    sol.iterations = it;
    sol.iterationCap = !converged;
    sol.cost = j;
    sol.states = xs;
    sol.inputs = us;
    sol.u0 = ControlInput::fromVector(us.front());
    warm_ = us;
    return sol;
}

} // namespace gale
