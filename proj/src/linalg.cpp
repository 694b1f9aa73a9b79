#include "gale/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <sstream>

namespace gale
{

double wrapAngle(double a)
{
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI)
    {
        a += 2.0 * M_PI;
    }
    return a;
}

} // namespace gale

namespace gale::linalg
{

Eigen::MatrixXd expm(const Eigen::MatrixXd &a)
{
    if (a.rows() != a.cols())
    {
        throw InvalidInput("expm: matrix must be square");
    }
    if (!a.allFinite())
    {
        throw InvalidInput("expm: non-finite entry");
    }
    return a.exp();
}

Eigen::MatrixXd solveLyapunov(const Eigen::MatrixXd &a, const Eigen::MatrixXd &c)
{
    using Cplx = std::complex<double>;
    const Eigen::Index n = a.rows();
    if (a.cols() != n || c.rows() != n || c.cols() != n)
    {
        throw InvalidInput("solveLyapunov: shape mismatch");
    }
    if (!a.allFinite() || !c.allFinite())
    {
        throw InvalidInput("solveLyapunov: non-finite entry");
    }

    Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
    const Eigen::MatrixXcd &t = schur.matrixT();
    const Eigen::MatrixXcd &u = schur.matrixU();
    const Eigen::MatrixXcd w = u.adjoint() * c.cast<Cplx>() * u;

    // T Y + Y T^H = W with T upper triangular. Entry (i, j) couples to
    // Y(k, j) for k > i and Y(i, k) for k > j, so sweep both indices downward.
    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = n - 1; i >= 0; --i)
    {
        for (Eigen::Index j = n - 1; j >= 0; --j)
        {
            Cplx rhs = w(i, j);
            for (Eigen::Index k = i + 1; k < n; ++k)
            {
                rhs -= t(i, k) * y(k, j);
            }
            for (Eigen::Index k = j + 1; k < n; ++k)
            {
                rhs -= y(i, k) * std::conj(t(j, k));
            }
            const Cplx denom = t(i, i) + std::conj(t(j, j));
            if (std::abs(denom) <= 1e-13 * scale)
            {
                std::ostringstream msg;
                msg << "solveLyapunov: singular operator, eigenvalue pair "
                    << t(i, i) << " and " << t(j, j) << " sum to ~0";
                throw SingularOperator(msg.str());
            }
            y(i, j) = rhs / denom;
        }
    }
    const Eigen::MatrixXd x = (u * y * u.adjoint()).real();
    return symmetrized(x);
}

namespace
{

Eigen::MatrixXd careResidual(const Eigen::MatrixXd &a, const Eigen::MatrixXd &s,
                             const Eigen::MatrixXd &q, const Eigen::MatrixXd &p)
{
    return a.transpose() * p + p * a - p * s * p + q;
}

} // namespace

Eigen::MatrixXd solveCare(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                          const Eigen::MatrixXd &q, const Eigen::MatrixXd &r)
{
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd rinv = r.inverse();
    const Eigen::MatrixXd s = b * rinv * b.transpose();

    Eigen::MatrixXd h(2 * n, 2 * n);
    h << a, -s, -q, -a.transpose();

    // Newton iteration for sign(H) with determinant scaling.
    Eigen::MatrixXd z = h;
    for (int it = 0; it < 100; ++it)
    {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(z);
        const Eigen::MatrixXd zinv = lu.inverse();
        const double det = std::abs(lu.determinant());
        double c = std::pow(det, -1.0 / static_cast<double>(2 * n));
        if (!std::isfinite(c) || c <= 0.0)
        {
            c = 1.0;
        }
        const Eigen::MatrixXd next = 0.5 * (c * z + zinv / c);
        const double delta = (next - z).norm();
        z = next;
        if (delta <= 1e-12 * z.norm())
        {
            break;
        }
    }

    const Eigen::MatrixXd w11 = z.topLeftCorner(n, n);
    const Eigen::MatrixXd w12 = z.topRightCorner(n, n);
    const Eigen::MatrixXd w21 = z.bottomLeftCorner(n, n);
    const Eigen::MatrixXd w22 = z.bottomRightCorner(n, n);
    Eigen::MatrixXd lhs(2 * n, n);
    lhs << w12, w22 + Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd rhs(2 * n, n);
    rhs << w11 + Eigen::MatrixXd::Identity(n, n), w21;
    Eigen::MatrixXd p = symmetrized(lhs.colPivHouseholderQr().solve(-rhs));

    // Newton-Kleinman polish: (A - S P)^T X + X (A - S P) = -(Q + P S P).
    for (int it = 0; it < 4; ++it)
    {
        const Eigen::MatrixXd acl = a - s * p;
        if (!isHurwitz(acl))
        {
            break;
        }
        p = solveLyapunov(acl.transpose(), -(q + p * s * p));
    }
    if (!p.allFinite() || careResidual(a, s, q, p).norm() > 1e-6 * std::max(1.0, p.norm()))
    {
        throw Error("solveCare: no stabilizing solution found");
    }
    return p;
}

Eigen::MatrixXd projectPsd(const Eigen::MatrixXd &m, double tol)
{
    Eigen::MatrixXd s = symmetrized(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Eigen::VectorXd ev = es.eigenvalues();
    bool changed = false;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
    {
        if (ev(i) < 0.0 && ev(i) >= -tol)
        {
            ev(i) = 0.0;
            changed = true;
        }
    }
    if (!changed)
    {
        return s;
    }
    return symmetrized(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

double maxEigenvalueSym(const Eigen::MatrixXd &m)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(symmetrized(m), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
}

double minEigenvalueSym(const Eigen::MatrixXd &m)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(symmetrized(m), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
}

bool isHurwitz(const Eigen::MatrixXd &a, double margin)
{
    const Eigen::VectorXcd ev = a.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
    {
        if (ev(i).real() >= -margin)
        {
            return false;
        }
    }
    return true;
}

} // namespace gale::linalg
