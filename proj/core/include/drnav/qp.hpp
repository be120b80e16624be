#pragma once

#include <Eigen/Core>

namespace drnav {

// min 0.5 z^T P z + q^T z  s.t.  A z <= b, with P symmetric PSD.
struct QuadraticProgram {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;  // r x n; r may be 0
  Eigen::VectorXd b;
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIterations };

struct QpSolution {
  Eigen::VectorXd z;
  double objective = 0.0;
  QpStatus status = QpStatus::kMaxIterations;
  // KKT residuals at the returned point, measured against the original data:
  // worst constraint violation max(0, max_i (Az - b)_i), stationarity
  // |Pz + q + A^T mu|_inf for the internal dual mu >= 0, and complementary
  // slackness max_i |mu_i (b - Az)_i|.
  double primal_residual = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
};

// Dense primal-dual interior-point solve (Mehrotra predictor-corrector on
// the condensed normal equations). Deterministic: identical inputs produce
// identical outputs. kOptimal is returned only when all three KKT residuals
// are within tol. When the iteration budget runs out, feasibility is
// classified by an explicit phase-1 problem: kInfeasible when no point
// satisfies Az <= b (to the phase-1 tolerance), kMaxIterations otherwise.
// Throws std::invalid_argument on shape mismatch, non-finite entries, or an
// asymmetric P.
QpSolution solve(const QuadraticProgram& qp, double tol = 1e-7,
                 int max_iter = 2000);

}  // namespace drnav
