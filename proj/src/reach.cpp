#include "gale/reach.hpp"

#include "gale/linalg.hpp"

#include <cstdio>
#include <sstream>

namespace gale
{

double Ellipsoid::support(const Eigen::VectorXd &direction) const
{
    return std::sqrt(std::max(0.0, direction.dot(shape * direction)));
}

void Ellipsoid::validate() const
{
    if (shape.rows() != shape.cols() || (center.size() != 0 && center.size() != shape.rows()))
    {
        throw InvalidInput("Ellipsoid: shape/center dimension mismatch");
    }
    if (!shape.allFinite() || (shape - shape.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    {
        throw InvalidInput("Ellipsoid: shape matrix not symmetric");
    }
    if (linalg::minEigenvalueSym(shape) < -1e-10)
    {
        throw InvalidInput("Ellipsoid: shape matrix not positive semidefinite");
    }
}

void FrsConfig::validate() const
{
    if (!(delta > 0.0) || !(epsilon > 0.0) || steps < 1)
    {
        throw InvalidInput("FrsConfig: need delta > 0, epsilon > 0, steps >= 1");
    }
    if (!(bound.array() >= 0.0).all() || !(boundMargin >= 0.0))
    {
        throw InvalidInput("FrsConfig: disturbance bounds must be non-negative");
    }
    Ellipsoid{Eigen::VectorXd(), initialShape}.validate();
}

Eigen::MatrixXd minkowskiShape(const Eigen::MatrixXd &q1, const Eigen::MatrixXd &q2)
{
    if (q1.rows() != q2.rows() || q1.cols() != q2.cols() || q1.rows() != q1.cols())
    {
        throw InvalidInput("minkowskiShape: shape mismatch");
    }
    const double tr1 = q1.trace();
    const double tr2 = q2.trace();
    if (tr1 < -kZeroTrace || tr2 < -kZeroTrace || !std::isfinite(tr1) || !std::isfinite(tr2))
    {
        throw InvalidInput("minkowskiShape: negative trace, operand is not PSD");
    }
    if (tr1 <= kZeroTrace)
    {
        return linalg::symmetrized(q2);
    }
    if (tr2 <= kZeroTrace)
    {
        return linalg::symmetrized(q1);
    }
    const double a = std::sqrt(tr1);
    const double b = std::sqrt(tr2);
    return linalg::symmetrized((1.0 + b / a) * q1 + (1.0 + a / b) * q2);
}

Mat9 solveChannelLyapunov(const Mat9 &phi, const Vec9 &channel, double bound, double delta,
                          double epsilon)
{
    if (!(delta > 0.0) || !(epsilon > 0.0) || !(bound >= 0.0))
    {
        throw InvalidInput("solveChannelLyapunov: need delta > 0, epsilon > 0, bound >= 0");
    }
    const Mat9 n = delta * bound * bound * channel * channel.transpose();
    const Mat9 em = linalg::expm(-phi * delta);
    const Mat9 rhs = em * n * em.transpose() - n;
    // -Phi X - X Phi^T = rhs  <=>  Phi X + X Phi^T = -rhs
    const Mat9 x = linalg::solveLyapunov(phi, -rhs);
    return linalg::symmetrized(x + epsilon * delta * delta * Mat9::Identity());
}

Mat9 composeDisturbanceShape(const std::array<Mat9, 3> &channels)
{
    double sumRoot = 0.0;
    Mat9 weighted = Mat9::Zero();
    for (const Mat9 &q : channels)
    {
        const double tr = q.trace();
        if (tr < -kZeroTrace)
        {
            throw InvalidInput("composeDisturbanceShape: negative trace, channel is not PSD");
        }
        if (tr <= kZeroTrace)
        {
            continue;
        }
        const double root = std::sqrt(tr);
        sumRoot += root;
        weighted += q / root;
    }
    return linalg::symmetrized(sumRoot * weighted);
}

Mat9 propagateInitialShape(const Mat9 &previousInitial, const Mat9 &previousDisturbance)
{
    return minkowskiShape(previousInitial, previousDisturbance);
}

Mat9 errorFrsShape(const Mat9 &phi, const Mat9 &initial, const Mat9 &disturbance, double delta)
{
    const Mat9 sum = minkowskiShape(initial, disturbance);
    const Mat9 e = linalg::expm(phi * delta);
    return linalg::projectPsd(e * sum * e.transpose());
}

PositionBound positionBound(const Mat9 &errorShape, const Mat3 &egoShape)
{
    const Mat3 dist = errorShape.topLeftCorner<3, 3>();
    PositionBound pb;
    pb.shape = minkowskiShape(dist, egoShape);
    pb.radius = std::sqrt(std::max(0.0, linalg::maxEigenvalueSym(pb.shape)));
    return pb;
}

std::vector<PositionBound> propagateAlongTrajectory(const MincoTrajectory &traj,
                                                    const DisturbanceEstimate &estimate,
                                                    const FrsConfig &cfg,
                                                    const QuadParams &params,
                                                    const Mat49 &gain,
                                                    const FrsOptions &options)
{
    cfg.validate();
    const std::vector<ConstraintPoint> pts = traj.constraintPoints(cfg.delta);
    const Vec3 bound = cfg.useFixedBound ? cfg.bound : estimate.bound(cfg.boundMargin);
    const Mat3 ego = sphereShape(params.radius);

    std::vector<PositionBound> out;
    out.reserve(pts.size());
    Mat9 initial = cfg.initialShape;
    Mat9 disturbance = Mat9::Zero();
    for (size_t k = 0; k < pts.size(); ++k)
    {
        if (static_cast<int>(k) >= cfg.steps)
        {
            out.push_back(out.back());
            continue;
        }
        const ConstraintPoint &cp = pts[k];
        Mat9 phi = Mat9::Zero();
        Mat93 dmat = Mat93::Zero();
        if (!options.forceZeroPhi)
        {
            const FlatOutputState nominal =
                flatInverse(cp.p, cp.v, cp.a, cfg.yaw, estimate.force, params);
            const LinearizedModel lin = linearize(nominal.state, {nominal.thrust, Vec3::Zero()},
                                                  estimate.force, params, gain);
            phi = lin.Phi;
            dmat = lin.D;
        }
        else
        {
            dmat.block<3, 3>(3, 0) = Mat3::Identity() / params.mass;
        }

        if (k > 0)
        {
            initial = propagateInitialShape(initial, disturbance);
        }
        std::array<Mat9, 3> channels;
        for (int i = 0; i < 3; ++i)
        {
            // A channel without disturbance contributes nothing.
            Mat9 &q = channels[static_cast<size_t>(i)];
            if (!(bound(i) > 0.0))
            {
                q.setZero();
            }
            else if (options.forceZeroPhi)
            {
                // Phi -> 0 limit of the channel solution: X = delta * N.
                const Vec9 d = dmat.col(i);
                q = cfg.delta * cfg.delta * bound(i) * bound(i) * d * d.transpose() +
                    cfg.epsilon * cfg.delta * cfg.delta * Mat9::Identity();
            }
            else
            {
                q = solveChannelLyapunov(phi, dmat.col(i), bound(i), cfg.delta, cfg.epsilon);
            }
        }
        disturbance = composeDisturbanceShape(channels);
        const Mat9 qe = errorFrsShape(phi, initial, disturbance, cfg.delta);
        out.push_back(positionBound(qe, ego));
    }
    return out;
}

std::vector<PositionBound> egoOnlyBounds(const MincoTrajectory &traj, double delta,
                                         const QuadParams &params)
{
    const int kappa = static_cast<int>(std::floor(traj.totalDuration() / delta * (1.0 + 1e-12)));
    PositionBound pb;
    pb.shape = sphereShape(params.radius);
    pb.radius = params.radius;
    return std::vector<PositionBound>(static_cast<size_t>(kappa) + 1, pb);
}

std::string frsCsv(const std::vector<PositionBound> &bounds)
{
    std::ostringstream out;
    out << "k,d_q,eig0,eig1,eig2\n";
    char buf[160];
    for (size_t k = 0; k < bounds.size(); ++k)
    {
        const Eigen::Vector3d ev =
            Eigen::SelfAdjointEigenSolver<Mat3>(bounds[k].shape, Eigen::EigenvaluesOnly).eigenvalues();
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.8f,%.8f,%.8f\n", k, bounds[k].radius, ev(0), ev(1),
                      ev(2));
        out << buf;
    }
    return out.str();
}

} // namespace gale
