#pragma once

#include "gale/common.hpp"

namespace gale::linalg
{

// Matrix exponential (scaling and squaring with a Pade approximant).
Eigen::MatrixXd expm(const Eigen::MatrixXd &a);

// Solves A X + X A^T = C for X with a complex Schur (Bartels-Stewart)
// back-substitution. Throws SingularOperator when some eigenvalue pair of A
// satisfies lambda_i + conj(lambda_j) ~ 0.
Eigen::MatrixXd solveLyapunov(const Eigen::MatrixXd &a, const Eigen::MatrixXd &c);

// Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0.
// Matrix-sign-function iteration on the Hamiltonian, polished with a few
// Newton-Kleinman steps.
Eigen::MatrixXd solveCare(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                          const Eigen::MatrixXd &q, const Eigen::MatrixXd &r);

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd &m)
{
    return 0.5 * (m + m.transpose());
}

// Symmetrizes and clamps eigenvalues in [-tol, 0) to zero. Larger negative
// eigenvalues are left alone so callers can detect them.
Eigen::MatrixXd projectPsd(const Eigen::MatrixXd &m, double tol = 1e-10);

double maxEigenvalueSym(const Eigen::MatrixXd &m);
double minEigenvalueSym(const Eigen::MatrixXd &m);

bool isHurwitz(const Eigen::MatrixXd &a, double margin = 0.0);

} // namespace gale::linalg
