#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lpvp/common.h"

namespace lpvp::sdp {

// Semidefinite programs of the form
//
//   minimize    c' x
//   subject to  F_j(x) = F_j0 + sum_k x_k F_jk  >= 0,   j = 1..blocks
//
// where x stacks the coordinates of matrix and scalar variables. Symmetric
// variables are vectorized over the upper triangle with off-diagonal
// entries scaled by sqrt(2), which keeps the coordinate map isometric.
//
// Constraint blocks are written as structured affine expressions instead of
// explicit coefficient matrices: a product term (U, V) on variable X adds
// U X V' + V X' U' to the block. The Schur complement of the interior-point
// method is formed from these factors directly.

enum class VariableKind { kSymmetric, kFull };

struct Variable {
  std::string name;
  int rows = 0;
  int cols = 0;
  VariableKind kind = VariableKind::kFull;
  int offset = 0;  // first coordinate in x
  int size = 0;    // number of coordinates
};

struct ProductTerm {
  int variable = 0;
  MatrixXd U;  // dim x rows(X)
  MatrixXd V;  // dim x cols(X)
};

/// x * F for a 1 x 1 variable; F must be symmetric.
struct ScalarTerm {
  int variable = 0;
  MatrixXd F;
};

struct Constraint {
  std::string label;
  int dim = 0;
  MatrixXd constant;
  std::vector<ProductTerm> products;
  std::vector<ScalarTerm> scalars;
};

class Problem {
 public:
  int AddSymmetric(const std::string& name, int n);
  int AddFull(const std::string& name, int rows, int cols);
  int AddScalar(const std::string& name);

  /// Returns the constraint index. The constant block starts at zero.
  int AddConstraint(const std::string& label, int dim);
  void AddConstant(int constraint, const MatrixXd& block);
  void AddProduct(int constraint, int variable, const MatrixXd& U,
                  const MatrixXd& V);
  void AddScalarTerm(int constraint, int variable, const MatrixXd& F);

  /// Objective coefficient on a 1 x 1 variable.
  void SetObjective(int variable, double coefficient);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const VectorXd& objective() const { return objective_; }
  int num_coordinates() const { return num_coordinates_; }

  /// All constraint blocks at x.
  std::vector<MatrixXd> Evaluate(const VectorXd& x) const;
  /// Linear part only (no constant).
  std::vector<MatrixXd> EvaluateLinear(const VectorXd& x) const;
  /// Adjoint map: out_k = sum_j <F_jk, Y_j>.
  VectorXd Adjoint(const std::vector<MatrixXd>& Y) const;

  MatrixXd Unpack(const VectorXd& x, int variable) const;
  void Pack(int variable, const MatrixXd& value, VectorXd* x) const;

  /// Checks term dimensions, variable references, and constant symmetry.
  void Validate() const;

  /// Writes the problem in SDPA sparse format (".dat-s"). Variables are the
  /// coordinates of x; see WriteSdpa in sdp.cc for the basis used.
  void WriteSdpa(std::ostream& out) const;

 private:
  int AddVariable(Variable v);

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  VectorXd objective_;
  int num_coordinates_ = 0;
};

struct Options {
  double feas_tol = 1e-7;
  double opt_tol = 1e-6;
  int max_iter = 120;
  bool verbose = false;
};

enum class Status { kOptimal, kInfeasible, kNumericalFailure };

const char* ToString(Status status);

struct Solution {
  Status status = Status::kNumericalFailure;
  VectorXd x;
  std::vector<MatrixXd> dual;   // multiplier per constraint block
  double objective = 0.0;       // c'x
  double dual_objective = 0.0;  // -sum <F_j0, Y_j>
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;  // relative ||F(x) - S||
  double dual_infeasibility = 0.0;    // relative ||A*(Y) - c||
  int iterations = 0;
  std::string message;

  MatrixXd Value(const Problem& problem, int variable) const {
    return problem.Unpack(x, variable);
  }
};

/// Infeasible-start primal-dual path following with Nesterov-Todd scaling
/// and Mehrotra predictor-corrector steps.
Solution Solve(const Problem& problem, const Options& options = {});

struct ResidualReport {
  std::vector<double> min_eigenvalues;  // per constraint block
  double worst = 0.0;                   // min over blocks (+inf if none)
  double objective = 0.0;

  bool Feasible(double tol) const { return worst >= -tol; }
};

/// Recomputes every block from x and its smallest eigenvalue; never uses
/// solver-reported residuals.
ResidualReport CheckSolution(const Problem& problem, const VectorXd& x);

}  // namespace lpvp::sdp
