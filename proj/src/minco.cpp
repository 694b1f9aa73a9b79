#include "gale/minco.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gale
{

BandedSystem::BandedSystem(int n, int lowerBw, int upperBw)
    : n_(n), lower_(lowerBw), upper_(upperBw),
      data_(static_cast<size_t>(n) * static_cast<size_t>(lowerBw + upperBw + 1), 0.0)
{
}

void BandedSystem::factorizeLU()
{
    for (int k = 0; k <= n_ - 2; ++k)
    {
        const int iM = std::min(k + lower_, n_ - 1);
        const double pivot = operator()(k, k);
        if (!(std::abs(pivot) > 1e-300) || !std::isfinite(pivot))
        {
            throw InvalidInput("MINCO: singular banded system");
        }
        for (int i = k + 1; i <= iM; ++i)
        {
            if (operator()(i, k) != 0.0)
            {
                operator()(i, k) /= pivot;
            }
        }
        const int jM = std::min(k + upper_, n_ - 1);
        for (int j = k + 1; j <= jM; ++j)
        {
            const double v = operator()(k, j);
            if (v == 0.0)
            {
                continue;
            }
            for (int i = k + 1; i <= iM; ++i)
            {
                if (operator()(i, k) != 0.0)
                {
                    operator()(i, j) -= operator()(i, k) * v;
                }
            }
        }
    }
    if (n_ > 0 && !(std::abs(operator()(n_ - 1, n_ - 1)) > 1e-300))
    {
        throw InvalidInput("MINCO: singular banded system");
    }
}

void BandedSystem::solve(Eigen::MatrixX3d &b) const
{
    for (int j = 0; j <= n_ - 1; ++j)
    {
        const int iM = std::min(j + lower_, n_ - 1);
        for (int i = j + 1; i <= iM; ++i)
        {
            if (operator()(i, j) != 0.0)
            {
                b.row(i) -= operator()(i, j) * b.row(j);
            }
        }
    }
    for (int j = n_ - 1; j >= 0; --j)
    {
        b.row(j) /= operator()(j, j);
        const int iM = std::max(0, j - upper_);
        for (int i = iM; i <= j - 1; ++i)
        {
            if (operator()(i, j) != 0.0)
            {
                b.row(i) -= operator()(i, j) * b.row(j);
            }
        }
    }
}

void BandedSystem::solveAdjoint(Eigen::MatrixX3d &b) const
{
    for (int j = 0; j <= n_ - 1; ++j)
    {
        b.row(j) /= operator()(j, j);
        const int iM = std::min(j + upper_, n_ - 1);
        for (int i = j + 1; i <= iM; ++i)
        {
            if (operator()(j, i) != 0.0)
            {
                b.row(i) -= operator()(j, i) * b.row(j);
            }
        }
    }
    for (int j = n_ - 1; j >= 0; --j)
    {
        const int iM = std::max(0, j - lower_);
        for (int i = iM; i <= j - 1; ++i)
        {
            if (operator()(j, i) != 0.0)
            {
                b.row(i) -= operator()(j, i) * b.row(j);
            }
        }
    }
}

Eigen::Matrix<double, 6, 1> basisDerivative(double t, int order)
{
    Eigen::Matrix<double, 6, 1> beta = Eigen::Matrix<double, 6, 1>::Zero();
    for (int n = order; n < 6; ++n)
    {
        double coeff = 1.0;
        for (int r = 0; r < order; ++r)
        {
            coeff *= static_cast<double>(n - r);
        }
        beta(n) = coeff * std::pow(t, n - order);
    }
    return beta;
}

MincoTrajectory MincoTrajectory::construct(const Eigen::Matrix3Xd &waypoints,
                                           const Eigen::VectorXd &durations,
                                           const BoundaryState &head,
                                           const BoundaryState &tail)
{
    const int n = static_cast<int>(durations.size());
    if (n < 1)
    {
        throw InvalidInput("MINCO: need at least one piece");
    }
    if (waypoints.cols() != n - 1)
    {
        throw InvalidInput("MINCO: expected M-1 intermediate waypoints");
    }
    for (int i = 0; i < n; ++i)
    {
        if (!(durations(i) > 0.0) || !std::isfinite(durations(i)))
        {
            throw InvalidInput("MINCO: piece durations must be positive and finite");
        }
    }
    if (!waypoints.allFinite() || !head.p.allFinite() || !head.v.allFinite() ||
        !head.a.allFinite() || !tail.p.allFinite() || !tail.v.allFinite() || !tail.a.allFinite())
    {
        throw InvalidInput("MINCO: non-finite waypoint or boundary condition");
    }

    const Eigen::VectorXd t1 = durations;
    const Eigen::VectorXd t2 = t1.cwiseProduct(t1);
    const Eigen::VectorXd t3 = t2.cwiseProduct(t1);
    const Eigen::VectorXd t4 = t2.cwiseProduct(t2);
    const Eigen::VectorXd t5 = t4.cwiseProduct(t1);

    auto a = std::make_shared<BandedSystem>(6 * n, 6, 6);
    BandedSystem &m = *a;
    Eigen::MatrixX3d b = Eigen::MatrixX3d::Zero(6 * n, 3);

    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    b.row(0) = head.p.transpose();
    b.row(1) = head.v.transpose();
    b.row(2) = head.a.transpose();

    for (int i = 0; i < n - 1; ++i)
    {
        // jerk and snap continuity, waypoint, position/velocity/acc continuity
        m(6 * i + 3, 6 * i + 3) = 6.0;
        m(6 * i + 3, 6 * i + 4) = 24.0 * t1(i);
        m(6 * i + 3, 6 * i + 5) = 60.0 * t2(i);
        m(6 * i + 3, 6 * i + 9) = -6.0;
        m(6 * i + 4, 6 * i + 4) = 24.0;
        m(6 * i + 4, 6 * i + 5) = 120.0 * t1(i);
        m(6 * i + 4, 6 * i + 10) = -24.0;
        m(6 * i + 5, 6 * i) = 1.0;
        m(6 * i + 5, 6 * i + 1) = t1(i);
        m(6 * i + 5, 6 * i + 2) = t2(i);
        m(6 * i + 5, 6 * i + 3) = t3(i);
        m(6 * i + 5, 6 * i + 4) = t4(i);
        m(6 * i + 5, 6 * i + 5) = t5(i);
        m(6 * i + 6, 6 * i) = 1.0;
        m(6 * i + 6, 6 * i + 1) = t1(i);
        m(6 * i + 6, 6 * i + 2) = t2(i);
        m(6 * i + 6, 6 * i + 3) = t3(i);
        m(6 * i + 6, 6 * i + 4) = t4(i);
        m(6 * i + 6, 6 * i + 5) = t5(i);
        m(6 * i + 6, 6 * i + 6) = -1.0;
        m(6 * i + 7, 6 * i + 1) = 1.0;
        m(6 * i + 7, 6 * i + 2) = 2.0 * t1(i);
        m(6 * i + 7, 6 * i + 3) = 3.0 * t2(i);
        m(6 * i + 7, 6 * i + 4) = 4.0 * t3(i);
        m(6 * i + 7, 6 * i + 5) = 5.0 * t4(i);
        m(6 * i + 7, 6 * i + 7) = -1.0;
        m(6 * i + 8, 6 * i + 2) = 2.0;
        m(6 * i + 8, 6 * i + 3) = 6.0 * t1(i);
        m(6 * i + 8, 6 * i + 4) = 12.0 * t2(i);
        m(6 * i + 8, 6 * i + 5) = 20.0 * t3(i);
        m(6 * i + 8, 6 * i + 8) = -2.0;

        b.row(6 * i + 5) = waypoints.col(i).transpose();
    }

    const int l = n - 1;
    m(6 * n - 3, 6 * n - 6) = 1.0;
    m(6 * n - 3, 6 * n - 5) = t1(l);
    m(6 * n - 3, 6 * n - 4) = t2(l);
    m(6 * n - 3, 6 * n - 3) = t3(l);
    m(6 * n - 3, 6 * n - 2) = t4(l);
    m(6 * n - 3, 6 * n - 1) = t5(l);
    m(6 * n - 2, 6 * n - 5) = 1.0;
    m(6 * n - 2, 6 * n - 4) = 2.0 * t1(l);
    m(6 * n - 2, 6 * n - 3) = 3.0 * t2(l);
    m(6 * n - 2, 6 * n - 2) = 4.0 * t3(l);
    m(6 * n - 2, 6 * n - 1) = 5.0 * t4(l);
    m(6 * n - 1, 6 * n - 4) = 2.0;
    m(6 * n - 1, 6 * n - 3) = 6.0 * t1(l);
    m(6 * n - 1, 6 * n - 2) = 12.0 * t2(l);
    m(6 * n - 1, 6 * n - 1) = 20.0 * t3(l);

    b.row(6 * n - 3) = tail.p.transpose();
    b.row(6 * n - 2) = tail.v.transpose();
    b.row(6 * n - 1) = tail.a.transpose();

    m.factorizeLU();
    m.solve(b);
    if (!b.allFinite())
    {
        throw InvalidInput("MINCO: singular banded system");
    }

    MincoTrajectory traj;
    traj.durations_ = durations;
    traj.startTimes_.resize(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
    {
        traj.startTimes_(i) = acc;
        acc += durations(i);
    }
    traj.totalDuration_ = acc;
    traj.waypoints_ = waypoints;
    traj.head_ = head;
    traj.tail_ = tail;
    traj.coeffs_ = std::move(b);
    traj.factor_ = std::move(a);
    return traj;
}

MincoTrajectory MincoTrajectory::fromCoefficients(const Eigen::Matrix<double, 6, 3> &coeffs,
                                                  double duration)
{
    if (!(duration > 0.0))
    {
        throw InvalidInput("MINCO: piece durations must be positive and finite");
    }
    MincoTrajectory traj;
    traj.durations_ = Eigen::VectorXd::Constant(1, duration);
    traj.startTimes_ = Eigen::VectorXd::Zero(1);
    traj.totalDuration_ = duration;
    traj.waypoints_.resize(3, 0);
    traj.coeffs_ = coeffs;
    traj.head_ = {traj.evaluatePiece(0, 0.0, 0), traj.evaluatePiece(0, 0.0, 1), traj.evaluatePiece(0, 0.0, 2)};
    traj.tail_ = {traj.evaluatePiece(0, duration, 0), traj.evaluatePiece(0, duration, 1),
                  traj.evaluatePiece(0, duration, 2)};
    return traj;
}

std::pair<int, double> MincoTrajectory::locate(double t) const
{
    const int n = pieceCount();
    // Half-open intervals T_l <= t < T_l + T_j; t >= T_total goes to the end.
    int j = 0;
    while (j < n - 1 && t >= startTimes_(j + 1))
    {
        ++j;
    }
    const double local = std::clamp(t - startTimes_(j), 0.0, durations_(j));
    return {j, local};
}

Vec3 MincoTrajectory::evaluatePiece(int piece, double localTime, int order) const
{
    const auto beta = basisDerivative(localTime, order);
    return (coeffs_.block<6, 3>(6 * piece, 0).transpose() * beta);
}

Vec3 MincoTrajectory::evaluate(double t, int order) const
{
    if (empty())
    {
        throw InvalidInput("evaluate: empty trajectory");
    }
    if (order < 0 || order > 5)
    {
        throw InvalidInput("evaluate: derivative order must be in 0..5");
    }
    const double tol = 1e-9 * std::max(1.0, totalDuration_);
    if (!(t >= -tol) || !(t <= totalDuration_ + tol))
    {
        throw InvalidInput("evaluate: t outside [0, T_total]");
    }
    const auto [j, local] = locate(std::clamp(t, 0.0, totalDuration_));
    return evaluatePiece(j, local, order);
}

namespace
{

ConstraintPoint samplePoint(const MincoTrajectory &traj, int k, double time, int piece, double local)
{
    ConstraintPoint cp;
    cp.index = k;
    cp.time = time;
    cp.piece = piece;
    cp.localTime = local;
    cp.p = traj.evaluatePiece(piece, local, 0);
    cp.v = traj.evaluatePiece(piece, local, 1);
    cp.a = traj.evaluatePiece(piece, local, 2);
    cp.j = traj.evaluatePiece(piece, local, 3);
    return cp;
}

} // namespace

std::vector<ConstraintPoint> MincoTrajectory::constraintPoints(double delta) const
{
    if (!(delta > 0.0))
    {
        throw InvalidInput("constraintPoints: delta must be positive");
    }
    const int kappa = static_cast<int>(std::floor(totalDuration_ / delta * (1.0 + 1e-12)));
    std::vector<ConstraintPoint> pts;
    pts.reserve(static_cast<size_t>(kappa) + 1);
    for (int k = 0; k <= kappa; ++k)
    {
        const double time = std::min(k * delta, totalDuration_);
        const auto [j, local] = locate(time);
        pts.push_back(samplePoint(*this, k, k * delta, j, local));
    }
    return pts;
}

ConstraintPoint MincoTrajectory::terminalPoint() const
{
    const int last = pieceCount() - 1;
    return samplePoint(*this, -1, totalDuration_, last, durations_(last));
}

double MincoTrajectory::smoothnessCost() const
{
    const Eigen::MatrixX3d &b = coeffs_;
    double energy = 0.0;
    for (int i = 0; i < pieceCount(); ++i)
    {
        const double t1 = durations_(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2, t5 = t4 * t1;
        energy += 36.0 * b.row(6 * i + 3).squaredNorm() * t1 +
                  144.0 * b.row(6 * i + 4).dot(b.row(6 * i + 3)) * t2 +
                  192.0 * b.row(6 * i + 4).squaredNorm() * t3 +
                  240.0 * b.row(6 * i + 5).dot(b.row(6 * i + 3)) * t3 +
                  720.0 * b.row(6 * i + 5).dot(b.row(6 * i + 4)) * t4 +
                  720.0 * b.row(6 * i + 5).squaredNorm() * t5;
    }
    return energy;
}

void MincoTrajectory::smoothnessPartials(Eigen::MatrixX3d &gdC, Eigen::VectorXd &gdT) const
{
    const Eigen::MatrixX3d &b = coeffs_;
    const int n = pieceCount();
    gdC.setZero(6 * n, 3);
    gdT.setZero(n);
    for (int i = 0; i < n; ++i)
    {
        const double t1 = durations_(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2, t5 = t4 * t1;
        gdC.row(6 * i + 5) = 240.0 * b.row(6 * i + 3) * t3 + 720.0 * b.row(6 * i + 4) * t4 +
                             1440.0 * b.row(6 * i + 5) * t5;
        gdC.row(6 * i + 4) = 144.0 * b.row(6 * i + 3) * t2 + 384.0 * b.row(6 * i + 4) * t3 +
                             720.0 * b.row(6 * i + 5) * t4;
        gdC.row(6 * i + 3) = 72.0 * b.row(6 * i + 3) * t1 + 144.0 * b.row(6 * i + 4) * t2 +
                             240.0 * b.row(6 * i + 5) * t3;
        gdT(i) = 36.0 * b.row(6 * i + 3).squaredNorm() +
                 288.0 * b.row(6 * i + 4).dot(b.row(6 * i + 3)) * t1 +
                 576.0 * b.row(6 * i + 4).squaredNorm() * t2 +
                 720.0 * b.row(6 * i + 5).dot(b.row(6 * i + 3)) * t2 +
                 2880.0 * b.row(6 * i + 5).dot(b.row(6 * i + 4)) * t3 +
                 3600.0 * b.row(6 * i + 5).squaredNorm() * t4;
    }
}

MincoGradient MincoTrajectory::backwardGradients(const Eigen::MatrixX3d &gradCoeffs,
                                                 const Eigen::VectorXd &gradTimes) const
{
    const int n = pieceCount();
    if (!factor_)
    {
        throw InvalidInput("backwardGradients: trajectory was not built by construct()");
    }
    if (gradCoeffs.rows() != 6 * n || gradTimes.size() != n)
    {
        throw InvalidInput("backwardGradients: gradient shapes must be 6M x 3 and M");
    }
    const Eigen::MatrixX3d &b = coeffs_;
    Eigen::MatrixX3d adj = gradCoeffs;
    factor_->solveAdjoint(adj);

    MincoGradient g;
    g.points.resize(3, n - 1);
    g.times.resize(n);
    for (int i = 0; i < n - 1; ++i)
    {
        g.points.col(i) = adj.row(6 * i + 5).transpose();
    }

    Eigen::Matrix<double, 6, 3> b1;
    for (int i = 0; i < n - 1; ++i)
    {
        const double t1 = durations_(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2;
        // negative velocity
        b1.row(2) = -(b.row(i * 6 + 1) + 2.0 * t1 * b.row(i * 6 + 2) + 3.0 * t2 * b.row(i * 6 + 3) +
                      4.0 * t3 * b.row(i * 6 + 4) + 5.0 * t4 * b.row(i * 6 + 5));
        b1.row(3) = b1.row(2);
        // negative acceleration
        b1.row(4) = -(2.0 * b.row(i * 6 + 2) + 6.0 * t1 * b.row(i * 6 + 3) +
                      12.0 * t2 * b.row(i * 6 + 4) + 20.0 * t3 * b.row(i * 6 + 5));
        // negative jerk
        b1.row(5) = -(6.0 * b.row(i * 6 + 3) + 24.0 * t1 * b.row(i * 6 + 4) + 60.0 * t2 * b.row(i * 6 + 5));
        // negative snap
        b1.row(0) = -(24.0 * b.row(i * 6 + 4) + 120.0 * t1 * b.row(i * 6 + 5));
        // negative crackle
        b1.row(1) = -120.0 * b.row(i * 6 + 5);
        g.times(i) = b1.cwiseProduct(adj.block<6, 3>(6 * i + 3, 0)).sum();
    }

    const double t1 = durations_(n - 1), t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2;
    Eigen::Matrix3d b2;
    b2.row(0) = -(b.row(6 * n - 5) + 2.0 * t1 * b.row(6 * n - 4) + 3.0 * t2 * b.row(6 * n - 3) +
                  4.0 * t3 * b.row(6 * n - 2) + 5.0 * t4 * b.row(6 * n - 1));
    b2.row(1) = -(2.0 * b.row(6 * n - 4) + 6.0 * t1 * b.row(6 * n - 3) + 12.0 * t2 * b.row(6 * n - 2) +
                  20.0 * t3 * b.row(6 * n - 1));
    b2.row(2) = -(6.0 * b.row(6 * n - 3) + 24.0 * t1 * b.row(6 * n - 2) + 60.0 * t2 * b.row(6 * n - 1));
    g.times(n - 1) = b2.cwiseProduct(adj.block<3, 3>(6 * n - 3, 0)).sum();

    g.times += gradTimes;
    return g;
}

std::string trajectoryCsv(const MincoTrajectory &traj, double step)
{
    if (!(step > 0.0))
    {
        throw InvalidInput("trajectoryCsv: step must be positive");
    }
    std::ostringstream out;
    out << "t,px,py,pz,vx,vy,vz,ax,ay,az\n";
    const int count = static_cast<int>(std::floor(traj.totalDuration() / step * (1.0 + 1e-12)));
    char buf[256];
    for (int k = 0; k <= count; ++k)
    {
        const double t = std::min(k * step, traj.totalDuration());
        const Vec3 p = traj.evaluate(t, 0), v = traj.evaluate(t, 1), a = traj.evaluate(t, 2);
        std::snprintf(buf, sizeof(buf), "%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t,
                      p.x(), p.y(), p.z(), v.x(), v.y(), v.z(), a.x(), a.y(), a.z());
        out << buf;
    }
    return out.str();
}

} // namespace gale
