#include "drnav/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drnav {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPosFloor = 1e-14;

struct IpmOut {
  VectorXd z;
  VectorXd mu;
  bool converged = false;
};

double max_step(const VectorXd& x, const VectorXd& dx) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

struct Residuals {
  double primal;
  double stationarity;
  double complementarity;
};

Residuals kkt_residuals(const MatrixXd& P, const VectorXd& q, const MatrixXd& A,
                        const VectorXd& b, const VectorXd& z, const VectorXd& mu) {
  Residuals r{0.0, 0.0, 0.0};
  const VectorXd slack = b - A * z;
  r.primal = slack.size() > 0 ? std::max(0.0, -slack.minCoeff()) : 0.0;
  r.stationarity = (P * z + q + A.transpose() * mu).lpNorm<Eigen::Infinity>();
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    r.complementarity = std::max(r.complementarity, std::abs(mu[i] * slack[i]));
  }
  return r;
}

// Interior-point iteration on min 0.5 z^T P z + q^T z, A z + w = b, w >= 0.
IpmOut run_ipm(const MatrixXd& P, const VectorXd& q, const MatrixXd& A,
               const VectorXd& b, double tol, int max_iter) {
  const Eigen::Index n = q.size();
  const Eigen::Index r = b.size();
  IpmOut out;
  out.z = VectorXd::Zero(n);
  VectorXd w(r), mu = VectorXd::Ones(r);
  for (Eigen::Index i = 0; i < r; ++i) w[i] = std::max(1.0, b[i]);

  double reg = 1e-11 * (1.0 + P.diagonal().cwiseAbs().maxCoeff());
  const VectorXd ones = VectorXd::Ones(r);

  for (int it = 0; it < max_iter; ++it) {
    const Residuals res = kkt_residuals(P, q, A, b, out.z, mu);
    if (res.primal <= tol && res.stationarity <= tol && res.complementarity <= tol) {
      out.mu = mu;
      out.converged = true;
      return out;
    }
    if (mu.maxCoeff() > 1e12 || !out.z.allFinite()) break;  // diverging

    const VectorXd rd = P * out.z + q + A.transpose() * mu;
    const VectorXd rp = A * out.z + w - b;
    const double gap = w.dot(mu) / static_cast<double>(r);

    const VectorXd d = (mu.array() / w.array()).matrix();
    MatrixXd m = P + A.transpose() * d.asDiagonal() * A;
    m.diagonal().array() += reg;
    Eigen::LLT<MatrixXd> llt(m);
    for (int tries = 0; llt.info() != Eigen::Success && tries < 6; ++tries) {
      reg *= 100.0;
      m.diagonal().array() += reg;
      llt.compute(m);
    }
    if (llt.info() != Eigen::Success) break;

    // Affine (predictor) direction.
    VectorXd c = -(w.array() * mu.array()).matrix();
    VectorXd rhs = -rd - A.transpose() * ((c.array() / w.array()).matrix())
                   - A.transpose() * (d.array() * rp.array()).matrix();
    const VectorXd dz_a = llt.solve(rhs);
    const VectorXd dw_a = -rp - A * dz_a;
    const VectorXd dmu_a =
        ((c.array() - mu.array() * dw_a.array()) / w.array()).matrix();
    const double a_aff = std::min(max_step(w, dw_a), max_step(mu, dmu_a));
    const double gap_aff =
        (w + a_aff * dw_a).dot(mu + a_aff * dmu_a) / static_cast<double>(r);
    const double ratio = gap > 0.0 ? gap_aff / gap : 0.0;
    const double sigma = std::clamp(ratio * ratio * ratio, 1e-8, 1.0);

    // Corrector with centering.
    c = (sigma * gap * ones.array() - w.array() * mu.array()
         - dw_a.array() * dmu_a.array())
            .matrix();
    rhs = -rd - A.transpose() * ((c.array() / w.array()).matrix())
          - A.transpose() * (d.array() * rp.array()).matrix();
    const VectorXd dz = llt.solve(rhs);
    const VectorXd dw = -rp - A * dz;
    const VectorXd dmu = ((c.array() - mu.array() * dw.array()) / w.array()).matrix();

    // One common step: with P != 0 the dual residual only contracts when the
    // primal and dual moves stay in lockstep.
    const double alpha = std::min(
        1.0, 0.995 * std::min(max_step(w, dw), max_step(mu, dmu)));
    out.z += alpha * dz;
    w += alpha * dw;
    mu += alpha * dmu;
    w = w.cwiseMax(kPosFloor);
    mu = mu.cwiseMax(kPosFloor);
  }
  out.mu = mu;
  return out;
}

struct PolishOut {
  VectorXd z;
  VectorXd mu;
  bool ok = false;
};

// One active-set walk: treat the guessed active rows as equalities, solve the
// KKT system exactly, and swap rows in or out until the multipliers are
// nonnegative and no inactive row is violated. The greedy swap rule
// (most-negative multiplier out, most-violated row in) can cycle on degenerate
// vertices, so late passes switch to Bland's lowest-index rule.
PolishOut polish_walk(const MatrixXd& P, const VectorXd& q, const MatrixXd& A,
                      const VectorXd& b, std::vector<char> active) {
  const Eigen::Index n = q.size();
  const Eigen::Index r = b.size();
  PolishOut out;

  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  for (int pass = 0; pass < 60; ++pass) {
    const bool bland = pass >= 24;
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (active[static_cast<std::size_t>(i)]) act.push_back(i);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(act.size());

    MatrixXd kkt = MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = P;
    kkt.topLeftCorner(n, n).diagonal().array() += 1e-12 * scale;
    VectorXd rhs(n + k);
    rhs.head(n) = -q;
    for (Eigen::Index j = 0; j < k; ++j) {
      kkt.block(n + j, 0, 1, n) = A.row(act[static_cast<std::size_t>(j)]);
      kkt.block(0, n + j, n, 1) = A.row(act[static_cast<std::size_t>(j)]).transpose();
      rhs(n + j) = b[act[static_cast<std::size_t>(j)]];
    }
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
      if (k == 0) return out;
      // Dependent active rows make the KKT singular; keep a maximal
      // independent subset (rank-revealing QR of the active block) and retry.
      MatrixXd at(n, k);
      for (Eigen::Index j = 0; j < k; ++j) {
        at.col(j) = A.row(act[static_cast<std::size_t>(j)]).transpose();
      }
      Eigen::ColPivHouseholderQR<MatrixXd> qr(at);
      const Eigen::Index rank = qr.rank();
      if (rank == k) return out;  // singular for another reason; give up
      std::vector<char> keep_col(static_cast<std::size_t>(k), 0);
      for (Eigen::Index j = 0; j < rank; ++j) {
        keep_col[static_cast<std::size_t>(qr.colsPermutation().indices()[j])] = 1;
      }
      for (Eigen::Index j = 0; j < k; ++j) {
        if (!keep_col[static_cast<std::size_t>(j)]) {
          active[static_cast<std::size_t>(act[static_cast<std::size_t>(j)])] = 0;
        }
      }
      continue;
    }
    const VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite() ||
        (kkt * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-7 * scale) {
      return out;
    }
    const VectorXd z = sol.head(n);
    const VectorXd nu = sol.tail(k);

    Eigen::Index drop_row = -1;
    double neg = -1e-9;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (nu[j] < neg) {
        drop_row = act[static_cast<std::size_t>(j)];
        if (bland) break;
        neg = nu[j];
      }
    }
    if (drop_row >= 0) {
      active[static_cast<std::size_t>(drop_row)] = 0;
      continue;
    }

    const VectorXd slack = b - A * z;
    Eigen::Index add_row = -1;
    double viol = -1e-11;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (!active[static_cast<std::size_t>(i)] && slack[i] < viol) {
        add_row = i;
        if (bland) break;
        viol = slack[i];
      }
    }
    if (add_row >= 0) {
      active[static_cast<std::size_t>(add_row)] = 1;
      continue;
    }

    out.z = z;
    out.mu = VectorXd::Zero(r);
    for (Eigen::Index j = 0; j < k; ++j) {
      out.mu[act[static_cast<std::size_t>(j)]] = std::max(0.0, nu[j]);
    }
    out.ok = true;
    return out;
  }
  return out;
}

// Active-set refinement of a stalled interior-point iterate. The first walk is
// seeded by the iterate's slacks and multipliers; if it fails (a multiplier
// guess from a stalled iterate can start the walk in a cycle it cannot leave),
// a second walk restarts from the small-slack rows alone.
PolishOut polish(const MatrixXd& P, const VectorXd& q, const MatrixXd& A,
                 const VectorXd& b, const VectorXd& z_seed, const VectorXd& mu_seed) {
  const Eigen::Index r = b.size();
  const VectorXd seed_slack = b - A * z_seed;
  std::vector<char> active(static_cast<std::size_t>(r), 0);
  for (Eigen::Index i = 0; i < r; ++i) {
    active[static_cast<std::size_t>(i)] =
        seed_slack[i] < 1e-7 || mu_seed[i] > std::max(1e-8, seed_slack[i]);
  }
  PolishOut out = polish_walk(P, q, A, b, active);
  if (out.ok) return out;
  for (Eigen::Index i = 0; i < r; ++i) {
    active[static_cast<std::size_t>(i)] = seed_slack[i] < 1e-7;
  }
  return polish_walk(P, q, A, b, std::move(active));
}

// Minimizes the total violation sum(t) of A z - t <= b, t >= 0 (plus a tiny
// Tikhonov term to keep the system positive definite). The optimum is ~0
// exactly when {z : A z <= b} is nonempty.
bool feasible_by_phase1(const MatrixXd& A, const VectorXd& b, double tol) {
  const Eigen::Index n = A.cols();
  const Eigen::Index r = A.rows();
  const Eigen::Index n2 = n + r;
  MatrixXd p1 = MatrixXd::Identity(n2, n2) * 1e-8;
  VectorXd q1 = VectorXd::Zero(n2);
  q1.tail(r).setOnes();
  MatrixXd a1 = MatrixXd::Zero(2 * r, n2);
  a1.topLeftCorner(r, n) = A;
  a1.topRightCorner(r, r) = -MatrixXd::Identity(r, r);
  a1.bottomRightCorner(r, r) = -MatrixXd::Identity(r, r);
  VectorXd b1 = VectorXd::Zero(2 * r);
  b1.head(r) = b;
  const IpmOut sol = run_ipm(p1, q1, a1, b1, 1e-9, 300);
  const double worst = sol.z.tail(r).maxCoeff();
  return worst <= std::max(100.0 * tol, 1e-5);
}

}  // namespace

QpSolution solve(const QuadraticProgram& qp, double tol, int max_iter) {
  const Eigen::Index n = qp.q.size();
  const Eigen::Index r = qp.b.size();
  if (qp.P.rows() != n || qp.P.cols() != n) {
    throw std::invalid_argument("qp: P must be n x n");
  }
  if (qp.A.rows() != r || (r > 0 && qp.A.cols() != n)) {
    throw std::invalid_argument("qp: A/b shape mismatch");
  }
  if (!qp.P.allFinite() || !qp.q.allFinite() || !qp.A.allFinite() || !qp.b.allFinite()) {
    throw std::invalid_argument("qp: non-finite entries");
  }
  const double scale = 1.0 + qp.P.cwiseAbs().maxCoeff();
  if ((qp.P - qp.P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("qp: P must be symmetric");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("qp: bad tolerance or iteration budget");
  }

  QpSolution sol;

  if (r == 0) {
    MatrixXd preg = qp.P;
    preg.diagonal().array() += 1e-11 * scale;
    Eigen::LDLT<MatrixXd> ldlt(preg);
    sol.z = ldlt.solve(-qp.q);
    sol.objective = 0.5 * sol.z.dot(qp.P * sol.z) + qp.q.dot(sol.z);
    sol.stationarity = (qp.P * sol.z + qp.q).lpNorm<Eigen::Infinity>();
    sol.status = sol.stationarity <= tol && sol.z.allFinite()
                     ? QpStatus::kOptimal
                     : QpStatus::kMaxIterations;
    return sol;
  }

  // Drop identically-zero rows; such a row is vacuous when b_i >= 0 and
  // certifies infeasibility otherwise.
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) {
    const double norm = qp.A.row(i).norm();
    if (norm <= 1e-14) {
      if (qp.b[i] < -tol) {
        sol.z = VectorXd::Zero(n);
        sol.status = QpStatus::kInfeasible;
        return sol;
      }
      continue;
    }
    keep.push_back(i);
  }

  const Eigen::Index rk = static_cast<Eigen::Index>(keep.size());
  MatrixXd an(rk, n);
  VectorXd bn(rk), row_scale(rk);
  for (Eigen::Index i = 0; i < rk; ++i) {
    const double norm = qp.A.row(keep[static_cast<std::size_t>(i)]).norm();
    row_scale[i] = norm;
    an.row(i) = qp.A.row(keep[static_cast<std::size_t>(i)]) / norm;
    bn[i] = qp.b[keep[static_cast<std::size_t>(i)]] / norm;
  }

  if (rk == 0) {
    QuadraticProgram unconstrained{qp.P, qp.q, MatrixXd(0, n), VectorXd(0)};
    return solve(unconstrained, tol, max_iter);
  }

  // Stationarity and complementarity are invariant under row scaling, but the
  // primal violation scales back up by the row norm; tighten accordingly.
  const double inner_tol = tol / std::max(1.0, row_scale.maxCoeff());
  const IpmOut ipm = run_ipm(qp.P, qp.q, an, bn, inner_tol, max_iter);

  // Map duals of the scaled rows back onto the original rows.
  VectorXd mu = VectorXd::Zero(r);
  for (Eigen::Index i = 0; i < rk; ++i) {
    mu[keep[static_cast<std::size_t>(i)]] = ipm.mu[i] / row_scale[i];
  }

  sol.z = ipm.z;
  Residuals res = kkt_residuals(qp.P, qp.q, qp.A, qp.b, sol.z, mu);

  if (res.primal > tol || res.stationarity > tol || res.complementarity > tol) {
    const PolishOut refined = polish(qp.P, qp.q, an, bn, ipm.z, ipm.mu);
    if (refined.ok) {
      const Residuals res2 = [&] {
        VectorXd mu2 = VectorXd::Zero(r);
        for (Eigen::Index i = 0; i < rk; ++i) {
          mu2[keep[static_cast<std::size_t>(i)]] = refined.mu[i] / row_scale[i];
        }
        mu = mu2;
        return kkt_residuals(qp.P, qp.q, qp.A, qp.b, refined.z, mu2);
      }();
      if (std::max({res2.primal, res2.stationarity, res2.complementarity}) <
          std::max({res.primal, res.stationarity, res.complementarity})) {
        sol.z = refined.z;
        res = res2;
      }
    }
  }

  sol.objective = 0.5 * sol.z.dot(qp.P * sol.z) + qp.q.dot(sol.z);
  sol.primal_residual = res.primal;
  sol.stationarity = res.stationarity;
  sol.complementarity = res.complementarity;

  if (res.primal <= tol && res.stationarity <= tol && res.complementarity <= tol) {
    sol.status = QpStatus::kOptimal;
    return sol;
  }
  sol.status = feasible_by_phase1(an, bn, tol) ? QpStatus::kMaxIterations
                                               : QpStatus::kInfeasible;
  return sol;
}

}  // namespace drnav
