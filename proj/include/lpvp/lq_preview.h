#pragma once

#include <string>
#include <vector>

#include "lpvp/common.h"
#include "lpvp/models.h"

namespace lpvp {

/// Output weights Q = diag(q1, q2) on the two C_aug rows and scalar control
/// weight R.
struct CostWeights {
  double q1 = 0.95;
  double q2 = 3e-3;
  double R = 0.25;

  void Validate() const;
  Eigen::Matrix2d Q() const;
};

struct DareOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  double pbh_threshold = 1e-8;
};

/// Stabilizing DARE solution for generic (A, B, Q, R).
struct DareSolution {
  MatrixXd P;
  MatrixXd K;  // (R + B'PB)^-1 B'PA
  double residual = 0.0;  // relative, see DareResidual
  int iterations = 0;
  std::vector<std::string> warnings;
};

struct LQSolution {
  MatrixXd P;
  RowVectorXd Kv;
  RowVectorXd Kr;
  double residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;

  RowVectorXd K() const;
};

/// ||P - A'PA + A'PB (R + B'PB)^-1 B'PA - Q||_F / max(1, ||P||_F).
double DareResidual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& P);

/// Structure-preserving doubling iteration. Stabilizability and
/// detectability are screened with PBH tests and reported as warnings; a
/// non-Schur closed loop at the end raises a synthesis error.
DareSolution SolveDare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                       const MatrixXd& R, const DareOptions& options = {});

/// Preview LQ gain for the augmented plant with state cost C_aug' Q C_aug.
LQSolution SolvePreviewLq(const AugmentedPlant& plant,
                          const CostWeights& weights,
                          const DareOptions& options = {});

struct FiniteHorizonResult {
  /// gains[k] is the gain after k+1 backward steps from P = 0.
  std::vector<MatrixXd> gains;
  /// costs[k] is the cost-to-go matrix after k+1 steps; costs are
  /// nondecreasing in the PSD order.
  std::vector<MatrixXd> costs;
};

FiniteHorizonResult FiniteHorizonRiccati(const MatrixXd& A, const MatrixXd& B,
                                         const MatrixXd& Q, const MatrixXd& R,
                                         int horizon);

FiniteHorizonResult FiniteHorizonRiccati(const AugmentedPlant& plant,
                                         const CostWeights& weights,
                                         int horizon);

/// Smallest singular value of [A - lambda I, B] over eigenvalues with
/// |lambda| >= 1, relative to the matrix scale. Zero means uncontrollable
/// unstable mode.
double StabilizabilityMargin(const MatrixXd& A, const MatrixXd& B);
double DetectabilityMargin(const MatrixXd& A, const MatrixXd& C);

double SpectralRadius(const MatrixXd& A);

}  // namespace lpvp
