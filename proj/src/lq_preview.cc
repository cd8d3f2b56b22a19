#include "lpvp/lq_preview.h"

#include <cmath>
#include <complex>
#include <sstream>

namespace lpvp {

void CostWeights::Validate() const {
  Require(std::isfinite(q1) && q1 >= 0.0, ErrorKind::kDomain,
          "weights.q1 must be nonnegative");
  Require(std::isfinite(q2) && q2 >= 0.0, ErrorKind::kDomain,
          "weights.q2 must be nonnegative");
  Require(std::isfinite(R) && R > 0.0, ErrorKind::kDomain,
          "weights.R must be positive");
}

Eigen::Matrix2d CostWeights::Q() const {
  return Eigen::Vector2d(q1, q2).asDiagonal();
}

RowVectorXd LQSolution::K() const {
  RowVectorXd k(Kv.size() + Kr.size());
  k << Kv, Kr;
  return k;
}

double SpectralRadius(const MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Smallest singular value of the PBH pencil over the eigenvalues on or
// outside the unit circle. Infinity when there are none.
double PbhMargin(const MatrixXd& A, const MatrixXd& other, bool columns) {
  const auto n = A.rows();
  const Eigen::VectorXcd eig = A.eigenvalues();
  const double scale = std::max(1.0, std::max(A.norm(), other.norm()));
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const Complex lambda = eig[i];
    if (std::abs(lambda) < 1.0 - 1e-12) continue;
    ComplexMatrix pencil;
    const ComplexMatrix shifted =
        A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    if (columns) {
      pencil.resize(n, n + other.cols());
      pencil << shifted, other.cast<Complex>();
    } else {
      pencil.resize(n + other.rows(), n);
      pencil << shifted, other.cast<Complex>();
    }
    const Eigen::VectorXd sv =
        Eigen::JacobiSVD<ComplexMatrix>(pencil).singularValues();
    margin = std::min(margin, sv.tail(1)(0) / scale);
  }
  return margin;
}

}  // namespace

double StabilizabilityMargin(const MatrixXd& A, const MatrixXd& B) {
  return PbhMargin(A, B, true);
}

double DetectabilityMargin(const MatrixXd& A, const MatrixXd& C) {
  return PbhMargin(A, C, false);
}

double DareResidual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& P) {
  const MatrixXd BtP = B.transpose() * P;
  const MatrixXd gain = (R + BtP * B).ldlt().solve(BtP * A);
  const MatrixXd residual =
      P - A.transpose() * P * A + (BtP * A).transpose() * gain - Q;
  return residual.norm() / std::max(1.0, P.norm());
}

DareSolution SolveDare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                       const MatrixXd& R, const DareOptions& options) {
  const auto n = A.rows();
  Require(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n &&
              R.rows() == B.cols() && R.cols() == B.cols(),
          ErrorKind::kDomain, "DARE dimensions are inconsistent");
  Eigen::LLT<MatrixXd> r_llt(R);
  Require(r_llt.info() == Eigen::Success, ErrorKind::kDomain,
          "R must be positive definite");

  DareSolution out;
  const double stab = StabilizabilityMargin(A, B);
  if (stab < options.pbh_threshold) {
    std::ostringstream msg;
    msg << "(A, B) may not be stabilizable: PBH margin " << stab;
    out.warnings.push_back(msg.str());
  }
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Q + Q.transpose()));
    const MatrixXd root = es.eigenvectors() *
                          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().transpose();
    const double det = DetectabilityMargin(A, root);
    if (det < options.pbh_threshold) {
      std::ostringstream msg;
      msg << "(A, Q^1/2) may not be detectable: PBH margin " << det;
      out.warnings.push_back(msg.str());
    }
  }

  // Doubling: A_{k+1} = A_k (I + G_k H_k)^-1 A_k,
  // G_{k+1} = G_k + A_k (I + G_k H_k)^-1 G_k A_k',
  // H_{k+1} = H_k + A_k' H_k (I + G_k H_k)^-1 A_k, H -> P.
  MatrixXd A_k = A;
  MatrixXd G_k = B * r_llt.solve(B.transpose());
  MatrixXd H_k = 0.5 * (Q + Q.transpose());
  const MatrixXd I = MatrixXd::Identity(n, n);
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const MatrixXd W = I + G_k * H_k;
    const Eigen::PartialPivLU<MatrixXd> lu(W);
    const MatrixXd V1 = lu.solve(A_k);
    const MatrixXd V2 = lu.solve(G_k.transpose()).transpose();
    MatrixXd H_next = H_k + V1.transpose() * H_k * A_k;
    G_k = G_k + A_k * V2 * A_k.transpose();
    G_k = 0.5 * (G_k + G_k.transpose());
    A_k = A_k * V1;
    H_next = 0.5 * (H_next + H_next.transpose());
    Require(H_next.allFinite(), ErrorKind::kNumerical,
            "DARE iteration produced non-finite values");
    const double change = (H_next - H_k).norm();
    H_k = std::move(H_next);
    if (change <= options.tol * std::max(1.0, H_k.norm())) {
      converged = true;
      ++iter;
      break;
    }
  }
  out.P = H_k;
  out.iterations = iter;
  const MatrixXd BtP = B.transpose() * out.P;
  out.K = (R + BtP * B).ldlt().solve(BtP * A);
  out.residual = DareResidual(A, B, Q, R, out.P);
  if (!converged) {
    std::ostringstream msg;
    msg << "DARE did not converge in " << options.max_iter
        << " iterations (residual " << out.residual << ")";
    Throw(ErrorKind::kConvergence, msg.str());
  }
  const double rho = SpectralRadius(A - B * out.K);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "DARE closed loop is not Schur (spectral radius " << rho
        << "); the pair is not stabilizable";
    Throw(ErrorKind::kSynthesis, msg.str());
  }
  return out;
}

LQSolution SolvePreviewLq(const AugmentedPlant& plant,
                          const CostWeights& weights,
                          const DareOptions& options) {
  weights.Validate();
  const MatrixXd& C = plant.C_aug();
  const MatrixXd Q = C.transpose() * weights.Q() * C;
  const MatrixXd R = MatrixXd::Constant(1, 1, weights.R);
  const DareSolution dare = SolveDare(plant.plant.A, plant.plant.B_u, Q, R, options);
  LQSolution out;
  out.P = dare.P;
  out.Kv = dare.K.row(0).head(plant.n_v);
  out.Kr = dare.K.row(0).tail(plant.n_r);
  out.residual = dare.residual;
  out.iterations = dare.iterations;
  out.warnings = dare.warnings;
  return out;
}

FiniteHorizonResult FiniteHorizonRiccati(const MatrixXd& A, const MatrixXd& B,
                                         const MatrixXd& Q, const MatrixXd& R,
                                         int horizon) {
  Require(horizon >= 1, ErrorKind::kDomain, "horizon must be at least 1");
  FiniteHorizonResult out;
  out.gains.reserve(horizon);
  out.costs.reserve(horizon);
  // Recursion from P_0 = 0 gives P_1 = Q, which prices the first gain:
  // K = (R + B'PB)^-1 B'PA, P <- Q + A'P(A - BK).
  MatrixXd P = Q;
  for (int k = 0; k < horizon; ++k) {
    const MatrixXd BtP = B.transpose() * P;
    const MatrixXd K = (R + BtP * B).ldlt().solve(BtP * A);
    MatrixXd next = Q + A.transpose() * P * A - (BtP * A).transpose() * K;
    next = 0.5 * (next + next.transpose());
    out.gains.push_back(K);
    out.costs.push_back(P);
    P = std::move(next);
  }
  return out;
}

FiniteHorizonResult FiniteHorizonRiccati(const AugmentedPlant& plant,
                                         const CostWeights& weights,
                                         int horizon) {
  const MatrixXd& C = plant.C_aug();
  const MatrixXd Q = C.transpose() * weights.Q() * C;
  const MatrixXd R = MatrixXd::Constant(1, 1, weights.R);
  return FiniteHorizonRiccati(plant.plant.A, plant.plant.B_u, Q, R, horizon);
}

}  // namespace lpvp
