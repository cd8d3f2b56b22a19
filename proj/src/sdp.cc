#include "lpvp/sdp.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace lpvp::sdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double Inner(const MatrixXd& a, const MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

MatrixXd Symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Coordinate k of a variable as a combination of entries of vec(X).
struct CoordinateMap {
  int elem0 = 0;
  int elem1 = -1;
  double weight = 1.0;
};

std::vector<CoordinateMap> BuildCoordinateMap(const Variable& v) {
  std::vector<CoordinateMap> map;
  map.reserve(v.size);
  if (v.kind == VariableKind::kFull) {
    for (int e = 0; e < v.size; ++e) map.push_back({e, -1, 1.0});
    return map;
  }
  const int n = v.rows;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a <= b; ++a) {
      if (a == b) {
        map.push_back({a + b * n, -1, 1.0});
      } else {
        map.push_back({a + b * n, b + a * n, 1.0 / kSqrt2});
      }
    }
  }
  return map;
}

// Product terms of one variable inside one compiled block.
struct ProductGroup {
  int variable = 0;
  std::vector<std::pair<MatrixXd, MatrixXd>> terms;  // (U, V)
};

struct CompiledBlock {
  int dim = 0;
  std::vector<int> rows;  // live rows of the original block
  MatrixXd constant;
  std::vector<ProductGroup> groups;
  std::vector<ScalarTerm> scalars;
};

struct Compiled {
  std::vector<CompiledBlock> blocks;
  std::vector<std::vector<CoordinateMap>> maps;  // per variable
};

bool RowIsZero(const MatrixXd& m, int r) {
  return m.cols() == 0 || m.row(r).isZero(0.0);
}

Compiled Compile(const Problem& problem) {
  Compiled out;
  for (const auto& v : problem.variables()) out.maps.push_back(BuildCoordinateMap(v));
  for (const auto& c : problem.constraints()) {
    std::vector<int> live;
    for (int r = 0; r < c.dim; ++r) {
      bool zero = RowIsZero(c.constant, r);
      for (const auto& t : c.products) {
        zero = zero && RowIsZero(t.U, r) && RowIsZero(t.V, r);
      }
      for (const auto& s : c.scalars) zero = zero && RowIsZero(s.F, r);
      if (!zero) live.push_back(r);
    }
    CompiledBlock block;
    block.dim = static_cast<int>(live.size());
    block.rows = live;
    const Eigen::VectorXi idx =
        Eigen::Map<const Eigen::VectorXi>(live.data(), block.dim);
    block.constant = c.constant(idx, idx);
    // Merge terms of the same variable sharing a V factor, then a U factor.
    std::map<int, std::vector<std::pair<MatrixXd, MatrixXd>>> by_var;
    for (const auto& t : c.products) {
      MatrixXd U = t.U(idx, Eigen::all);
      MatrixXd V = t.V(idx, Eigen::all);
      if (U.isZero(0.0) || V.isZero(0.0)) continue;
      auto& list = by_var[t.variable];
      bool merged = false;
      for (auto& [u0, v0] : list) {
        if (v0 == V) {
          u0 += U;
          merged = true;
          break;
        }
        if (u0 == U) {
          v0 += V;
          merged = true;
          break;
        }
      }
      if (!merged) list.emplace_back(std::move(U), std::move(V));
    }
    for (auto& [var, terms] : by_var) {
      block.groups.push_back({var, std::move(terms)});
    }
    for (const auto& s : c.scalars) {
      block.scalars.push_back({s.variable, s.F(idx, idx)});
    }
    out.blocks.push_back(std::move(block));
  }
  return out;
}

MatrixXd UnpackVariable(const Variable& v, const VectorXd& x) {
  MatrixXd X(v.rows, v.cols);
  if (v.kind == VariableKind::kFull) {
    for (int e = 0; e < v.size; ++e) X(e % v.rows, e / v.rows) = x[v.offset + e];
    return X;
  }
  int k = v.offset;
  for (int b = 0; b < v.rows; ++b) {
    for (int a = 0; a <= b; ++a, ++k) {
      if (a == b) {
        X(a, a) = x[k];
      } else {
        X(a, b) = X(b, a) = x[k] / kSqrt2;
      }
    }
  }
  return X;
}

// Contract a vec(X)-shaped gradient G (rows x cols) into coordinates.
void AccumulateCoordinates(const Variable& v,
                           const std::vector<CoordinateMap>& map,
                           const MatrixXd& G, VectorXd* out) {
  const double* g = G.data();
  for (int k = 0; k < v.size; ++k) {
    const auto& m = map[k];
    double value = g[m.elem0];
    if (m.elem1 >= 0) value += g[m.elem1];
    (*out)[v.offset + k] += m.weight * value;
  }
}

std::vector<MatrixXd> EvaluateCompiled(const Problem& problem,
                                       const Compiled& compiled,
                                       const VectorXd& x, bool with_constant) {
  std::vector<MatrixXd> out;
  out.reserve(compiled.blocks.size());
  std::vector<MatrixXd> values;
  for (const auto& v : problem.variables()) values.push_back(UnpackVariable(v, x));
  for (const auto& block : compiled.blocks) {
    MatrixXd F = with_constant ? block.constant
                               : MatrixXd::Zero(block.dim, block.dim);
    for (const auto& group : block.groups) {
      const MatrixXd& X = values[group.variable];
      for (const auto& [U, V] : group.terms) {
        const MatrixXd UXV = U * X * V.transpose();
        F += UXV + UXV.transpose();
      }
    }
    for (const auto& s : block.scalars) F += values[s.variable](0, 0) * s.F;
    out.push_back(std::move(F));
  }
  return out;
}

VectorXd AdjointCompiled(const Problem& problem, const Compiled& compiled,
                         const std::vector<MatrixXd>& Y) {
  VectorXd out = VectorXd::Zero(problem.num_coordinates());
  const auto& vars = problem.variables();
  for (size_t j = 0; j < compiled.blocks.size(); ++j) {
    const auto& block = compiled.blocks[j];
    for (const auto& group : block.groups) {
      const Variable& v = vars[group.variable];
      MatrixXd G = MatrixXd::Zero(v.rows, v.cols);
      for (const auto& [U, V] : group.terms) {
        G.noalias() += 2.0 * U.transpose() * Y[j] * V;
      }
      AccumulateCoordinates(v, compiled.maps[group.variable], G, &out);
    }
    for (const auto& s : block.scalars) {
      out[vars[s.variable].offset] += Inner(s.F, Y[j]);
    }
  }
  return out;
}

// Schur complement M_kl = sum_j <F_jk, W_j F_jl W_j>.
class SchurBuilder {
 public:
  SchurBuilder(const Problem& problem, const Compiled& compiled)
      : problem_(problem), compiled_(compiled) {}

  MatrixXd Build(const std::vector<MatrixXd>& W) {
    const int m = problem_.num_coordinates();
    MatrixXd M = MatrixXd::Zero(m, m);
    const auto& vars = problem_.variables();
    for (size_t j = 0; j < compiled_.blocks.size(); ++j) {
      const auto& block = compiled_.blocks[j];
      const MatrixXd& Wj = W[j];
      // Scaled factors W U and W V per group.
      std::vector<std::vector<std::pair<MatrixXd, MatrixXd>>> scaled;
      scaled.reserve(block.groups.size());
      for (const auto& group : block.groups) {
        std::vector<std::pair<MatrixXd, MatrixXd>> s;
        for (const auto& [U, V] : group.terms) s.emplace_back(Wj * U, Wj * V);
        scaled.push_back(std::move(s));
      }
      for (size_t g = 0; g < block.groups.size(); ++g) {
        for (size_t h = g; h < block.groups.size(); ++h) {
          AddGroupPair(block.groups[g], block.groups[h], scaled[h], &M);
        }
      }
      for (const auto& s : block.scalars) {
        const MatrixXd WFW = Wj * s.F * Wj;
        const int ks = vars[s.variable].offset;
        for (const auto& s2 : block.scalars) {
          M(ks, vars[s2.variable].offset) += Inner(s2.F, WFW);
        }
        for (const auto& group : block.groups) {
          const Variable& v = vars[group.variable];
          MatrixXd G = MatrixXd::Zero(v.rows, v.cols);
          for (const auto& [U, V] : group.terms) {
            G.noalias() += 2.0 * U.transpose() * WFW * V;
          }
          VectorXd column = VectorXd::Zero(m);
          AccumulateCoordinates(v, compiled_.maps[group.variable], G, &column);
          const auto seg = column.segment(v.offset, v.size);
          M.col(ks).segment(v.offset, v.size) += seg;
          M.row(ks).segment(v.offset, v.size) += seg.transpose();
        }
      }
    }
    return M;
  }

 private:
  // Elementary kernel K(ab, cd) = <sym(U E_ab V'), W sym(U' E_cd V'') W>,
  // summed over the term pairs of two groups.
  void AddGroupPair(const ProductGroup& g1, const ProductGroup& g2,
                    const std::vector<std::pair<MatrixXd, MatrixXd>>& scaled2,
                    MatrixXd* M) {
    const auto& vars = problem_.variables();
    const Variable& v1 = vars[g1.variable];
    const Variable& v2 = vars[g2.variable];
    const int r = v1.rows, c = v1.cols, r2 = v2.rows, c2 = v2.cols;
    MatrixXd& kernel = kernels_[{r * c, r2 * c2}];
    kernel.setZero(r * c, r2 * c2);
    for (const auto& [U, V] : g1.terms) {
      for (size_t s = 0; s < g2.terms.size(); ++s) {
        const auto& [WU2, WV2] = scaled2[s];
        const MatrixXd G1 = 2.0 * U.transpose() * WU2;   // r x r2
        const MatrixXd H1 = WV2.transpose() * V;         // c2 x c
        const MatrixXd G2 = 2.0 * U.transpose() * WV2;   // r x c2
        const MatrixXd H2 = WU2.transpose() * V;         // r2 x c
        for (int d = 0; d < c2; ++d) {
          for (int cc = 0; cc < r2; ++cc) {
            auto column = kernel.col(cc + d * r2);
            for (int b = 0; b < c; ++b) {
              column.segment(b * r, r) +=
                  H1(d, b) * G1.col(cc) + H2(cc, b) * G2.col(d);
            }
          }
        }
      }
    }
    const auto& map1 = compiled_.maps[g1.variable];
    const auto& map2 = compiled_.maps[g2.variable];
    const bool same = g1.variable == g2.variable;
    for (int l = 0; l < v2.size; ++l) {
      const auto& m2 = map2[l];
      for (int k = 0; k < v1.size; ++k) {
        const auto& m1 = map1[k];
        double value = kernel(m1.elem0, m2.elem0);
        if (m1.elem1 >= 0) value += kernel(m1.elem1, m2.elem0);
        if (m2.elem1 >= 0) {
          value += kernel(m1.elem0, m2.elem1);
          if (m1.elem1 >= 0) value += kernel(m1.elem1, m2.elem1);
        }
        value *= m1.weight * m2.weight;
        (*M)(v1.offset + k, v2.offset + l) += value;
        if (!same) (*M)(v2.offset + l, v1.offset + k) += value;
      }
    }
  }

  const Problem& problem_;
  const Compiled& compiled_;
  // Work buffers keyed by shape, reused across iterations.
  std::map<std::pair<int, int>, MatrixXd> kernels_;
};

struct NtScaling {
  MatrixXd G;      // W = G G'
  MatrixXd G_inv;
  MatrixXd W;
  VectorXd lambda;  // eigenvalues of the scaled point
};

bool ComputeNtScaling(const MatrixXd& Y, const MatrixXd& S, NtScaling* out) {
  Eigen::LLT<MatrixXd> ly(Y), ls(S);
  if (ly.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  const MatrixXd L = ly.matrixL();
  const MatrixXd R = ls.matrixL();
  Eigen::BDCSVD<MatrixXd> svd(R.transpose() * L,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd sigma = svd.singularValues();
  if (!(sigma.minCoeff() > 0.0)) return false;
  const VectorXd root = sigma.cwiseSqrt();
  out->lambda = sigma;
  out->G = L * svd.matrixV() * root.cwiseInverse().asDiagonal();
  const MatrixXd L_inv =
      L.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(L.rows(), L.cols()));
  out->G_inv = root.asDiagonal() * svd.matrixV().transpose() * L_inv;
  out->W = out->G * out->G.transpose();
  out->W = Symmetrize(out->W);
  return true;
}

// Largest step a with X + a dX >= 0 (infinity if unbounded).
double MaxStep(const MatrixXd& X, const MatrixXd& dX) {
  if (X.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd L = llt.matrixL();
  const auto Lv = L.triangularView<Eigen::Lower>();
  MatrixXd T = Lv.solve(dX);
  T = Lv.solve(T.transpose()).transpose();
  const double lmin =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(Symmetrize(T), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double MinEigenvalue(const MatrixXd& X) {
  if (X.rows() == 0) return std::numeric_limits<double>::infinity();
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(Symmetrize(X),
                                                 Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

// Squared Frobenius norm of each coordinate's coefficient within a block.
VectorXd CoefficientNorms(const Problem& problem, const Compiled& compiled,
                          const CompiledBlock& block) {
  VectorXd norms = VectorXd::Zero(problem.num_coordinates());
  const auto& vars = problem.variables();
  VectorXd e = VectorXd::Zero(problem.num_coordinates());
  for (const auto& group : block.groups) {
    const Variable& v = vars[group.variable];
    for (int k = 0; k < v.size; ++k) {
      e.setZero();
      e[v.offset + k] = 1.0;
      const MatrixXd X = UnpackVariable(v, e);
      MatrixXd F = MatrixXd::Zero(block.dim, block.dim);
      for (const auto& [U, V] : group.terms) {
        const MatrixXd UXV = U * X * V.transpose();
        F += UXV + UXV.transpose();
      }
      norms[v.offset + k] += F.squaredNorm();
    }
  }
  for (const auto& s : block.scalars) {
    norms[vars[s.variable].offset] += s.F.squaredNorm();
  }
  (void)compiled;
  return norms;
}

}  // namespace

// ---------------------------------------------------------------- Problem

int Problem::AddVariable(Variable v) {
  v.offset = num_coordinates_;
  num_coordinates_ += v.size;
  variables_.push_back(std::move(v));
  VectorXd grown = VectorXd::Zero(num_coordinates_);
  grown.head(objective_.size()) = objective_;
  objective_ = std::move(grown);
  return static_cast<int>(variables_.size()) - 1;
}

int Problem::AddSymmetric(const std::string& name, int n) {
  Require(n >= 1, ErrorKind::kDomain, "symmetric variable needs n >= 1");
  return AddVariable({name, n, n, VariableKind::kSymmetric, 0, n * (n + 1) / 2});
}

int Problem::AddFull(const std::string& name, int rows, int cols) {
  Require(rows >= 1 && cols >= 1, ErrorKind::kDomain,
          "matrix variable needs positive dimensions");
  return AddVariable({name, rows, cols, VariableKind::kFull, 0, rows * cols});
}

int Problem::AddScalar(const std::string& name) { return AddFull(name, 1, 1); }

int Problem::AddConstraint(const std::string& label, int dim) {
  Require(dim >= 1, ErrorKind::kDomain, "constraint block needs dim >= 1");
  Constraint c;
  c.label = label;
  c.dim = dim;
  c.constant = MatrixXd::Zero(dim, dim);
  constraints_.push_back(std::move(c));
  return static_cast<int>(constraints_.size()) - 1;
}

void Problem::AddConstant(int constraint, const MatrixXd& block) {
  auto& c = constraints_.at(constraint);
  Require(block.rows() == c.dim && block.cols() == c.dim, ErrorKind::kDomain,
          "constant block dimension mismatch in " + c.label);
  c.constant += block;
}

void Problem::AddProduct(int constraint, int variable, const MatrixXd& U,
                         const MatrixXd& V) {
  auto& c = constraints_.at(constraint);
  const auto& v = variables_.at(variable);
  Require(U.rows() == c.dim && V.rows() == c.dim && U.cols() == v.rows &&
              V.cols() == v.cols,
          ErrorKind::kDomain, "product term dimension mismatch in " + c.label);
  c.products.push_back({variable, U, V});
}

void Problem::AddScalarTerm(int constraint, int variable, const MatrixXd& F) {
  auto& c = constraints_.at(constraint);
  const auto& v = variables_.at(variable);
  Require(v.rows == 1 && v.cols == 1, ErrorKind::kDomain,
          "scalar term on a non-scalar variable");
  Require(F.rows() == c.dim && F.cols() == c.dim, ErrorKind::kDomain,
          "scalar term dimension mismatch in " + c.label);
  c.scalars.push_back({variable, F});
}

void Problem::SetObjective(int variable, double coefficient) {
  const auto& v = variables_.at(variable);
  Require(v.size == 1, ErrorKind::kDomain,
          "objective coefficients apply to scalar variables");
  objective_[v.offset] = coefficient;
}

void Problem::Validate() const {
  const int nv = static_cast<int>(variables_.size());
  for (const auto& c : constraints_) {
    Require(c.constant.isApprox(c.constant.transpose(), 1e-12) ||
                (c.constant - c.constant.transpose()).norm() <= 1e-12,
            ErrorKind::kDomain, "constant block of " + c.label + " is not symmetric");
    for (const auto& t : c.products) {
      Require(t.variable >= 0 && t.variable < nv, ErrorKind::kDomain,
              "undeclared variable in " + c.label);
    }
    for (const auto& s : c.scalars) {
      Require(s.variable >= 0 && s.variable < nv, ErrorKind::kDomain,
              "undeclared variable in " + c.label);
      Require((s.F - s.F.transpose()).norm() <= 1e-12, ErrorKind::kDomain,
              "scalar coefficient of " + c.label + " is not symmetric");
    }
  }
}

std::vector<MatrixXd> Problem::Evaluate(const VectorXd& x) const {
  std::vector<MatrixXd> out;
  std::vector<MatrixXd> values;
  for (const auto& v : variables_) values.push_back(UnpackVariable(v, x));
  for (const auto& c : constraints_) {
    MatrixXd F = c.constant;
    for (const auto& t : c.products) {
      const MatrixXd UXV = t.U * values[t.variable] * t.V.transpose();
      F += UXV + UXV.transpose();
    }
    for (const auto& s : c.scalars) F += values[s.variable](0, 0) * s.F;
    out.push_back(std::move(F));
  }
  return out;
}

std::vector<MatrixXd> Problem::EvaluateLinear(const VectorXd& x) const {
  auto out = Evaluate(x);
  for (size_t j = 0; j < out.size(); ++j) out[j] -= constraints_[j].constant;
  return out;
}

VectorXd Problem::Adjoint(const std::vector<MatrixXd>& Y) const {
  Require(Y.size() == constraints_.size(), ErrorKind::kDomain,
          "adjoint needs one matrix per constraint");
  VectorXd out = VectorXd::Zero(num_coordinates_);
  for (size_t j = 0; j < constraints_.size(); ++j) {
    const auto& c = constraints_[j];
    for (const auto& t : c.products) {
      const Variable& v = variables_[t.variable];
      const MatrixXd G = 2.0 * t.U.transpose() * Y[j] * t.V;
      AccumulateCoordinates(v, BuildCoordinateMap(v), G, &out);
    }
    for (const auto& s : c.scalars) {
      out[variables_[s.variable].offset] += Inner(s.F, Y[j]);
    }
  }
  return out;
}

MatrixXd Problem::Unpack(const VectorXd& x, int variable) const {
  Require(x.size() == num_coordinates_, ErrorKind::kDomain,
          "coordinate vector has the wrong size");
  return UnpackVariable(variables_.at(variable), x);
}

void Problem::Pack(int variable, const MatrixXd& value, VectorXd* x) const {
  const Variable& v = variables_.at(variable);
  Require(value.rows() == v.rows && value.cols() == v.cols, ErrorKind::kDomain,
          "packed value has the wrong shape");
  if (x->size() != num_coordinates_) x->conservativeResize(num_coordinates_);
  if (v.kind == VariableKind::kFull) {
    for (int e = 0; e < v.size; ++e) {
      (*x)[v.offset + e] = value(e % v.rows, e / v.rows);
    }
    return;
  }
  int k = v.offset;
  for (int b = 0; b < v.rows; ++b) {
    for (int a = 0; a <= b; ++a, ++k) {
      (*x)[k] = a == b ? value(a, a) : kSqrt2 * 0.5 * (value(a, b) + value(b, a));
    }
  }
}

// SDPA sparse format: "min c'x s.t. sum_k x_k F_k - F_0 >= 0". Coordinate k
// uses the isometric basis described in sdp.h, so F_0 here is minus our
// constant block and solutions read back directly as x.
void Problem::WriteSdpa(std::ostream& out) const {
  out << "\"lpvp SDP export: min c'x s.t. sum x_k F_k - F_0 >= 0\"\n";
  out << num_coordinates_ << " = mDIM\n";
  out << constraints_.size() << " = nBLOCK\n";
  for (const auto& c : constraints_) out << c.dim << ' ';
  out << "= bLOCKsTRUCT\n";
  out << std::setprecision(17);
  for (int k = 0; k < num_coordinates_; ++k) {
    out << objective_[k] << (k + 1 < num_coordinates_ ? " " : "\n");
  }
  if (num_coordinates_ == 0) out << "\n";
  auto emit = [&](int matno, int blk, const MatrixXd& F) {
    for (int j = 0; j < F.cols(); ++j) {
      for (int i = 0; i <= j; ++i) {
        if (F(i, j) != 0.0) {
          out << matno << ' ' << blk + 1 << ' ' << i + 1 << ' ' << j + 1 << ' '
              << F(i, j) << '\n';
        }
      }
    }
  };
  for (size_t j = 0; j < constraints_.size(); ++j) {
    emit(0, static_cast<int>(j), -constraints_[j].constant);
  }
  VectorXd e = VectorXd::Zero(num_coordinates_);
  for (int k = 0; k < num_coordinates_; ++k) {
    e.setZero();
    e[k] = 1.0;
    const auto blocks = EvaluateLinear(e);
    for (size_t j = 0; j < blocks.size(); ++j) {
      emit(k + 1, static_cast<int>(j), blocks[j]);
    }
  }
}

const char* ToString(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------- Solver

Solution Solve(const Problem& problem, const Options& options) {
  problem.Validate();
  const Compiled compiled = Compile(problem);
  const int m = problem.num_coordinates();
  const int nb = static_cast<int>(compiled.blocks.size());
  const VectorXd& c = problem.objective();

  Solution sol;
  sol.x = VectorXd::Zero(m);

  auto expand_dual = [&](const std::vector<MatrixXd>& Y) {
    std::vector<MatrixXd> full;
    for (int j = 0; j < nb; ++j) {
      const auto& block = compiled.blocks[j];
      MatrixXd D = MatrixXd::Zero(problem.constraints()[j].dim,
                                  problem.constraints()[j].dim);
      for (int a = 0; a < block.dim; ++a) {
        for (int b = 0; b < block.dim; ++b) {
          D(block.rows[a], block.rows[b]) = Y[j](a, b);
        }
      }
      full.push_back(std::move(D));
    }
    return full;
  };

  int n_total = 0;
  double f0_norm = 0.0;
  for (const auto& block : compiled.blocks) {
    n_total += block.dim;
    f0_norm += block.constant.squaredNorm();
  }
  f0_norm = std::sqrt(f0_norm);

  if (m == 0 || n_total == 0) {
    // Nothing to optimize: feasibility of the constant blocks decides.
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& block : compiled.blocks) {
      worst = std::min(worst, MinEigenvalue(block.constant));
    }
    sol.status = worst >= -options.feas_tol ? Status::kOptimal : Status::kInfeasible;
    sol.message = sol.status == Status::kOptimal
                      ? "no decision variables; constant blocks are PSD"
                      : "constant block is not PSD";
    std::vector<MatrixXd> Y;
    for (const auto& block : compiled.blocks) {
      Y.push_back(MatrixXd::Zero(block.dim, block.dim));
    }
    sol.dual = expand_dual(Y);
    return sol;
  }

  // Starting point in the style of infeasible path-following codes.
  std::vector<MatrixXd> Y(nb), S(nb);
  for (int j = 0; j < nb; ++j) {
    const auto& block = compiled.blocks[j];
    const VectorXd norms = CoefficientNorms(problem, compiled, block).cwiseSqrt();
    const double n = block.dim;
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), block.constant.norm()});
    for (int k = 0; k < m; ++k) {
      if (norms[k] == 0.0) continue;
      xi = std::max(xi, n * (1.0 + std::abs(c[k])) / (1.0 + norms[k]));
      eta = std::max(eta, norms[k]);
    }
    Y[j] = xi * MatrixXd::Identity(block.dim, block.dim);
    S[j] = eta * MatrixXd::Identity(block.dim, block.dim);
  }

  SchurBuilder schur(problem, compiled);
  VectorXd x = VectorXd::Zero(m);
  const double c_norm = c.norm();
  std::vector<NtScaling> nt(nb);

  auto inner_sum = [&](const std::vector<MatrixXd>& a,
                       const std::vector<MatrixXd>& b) {
    double total = 0.0;
    for (int j = 0; j < nb; ++j) total += Inner(a[j], b[j]);
    return total;
  };

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const auto F = EvaluateCompiled(problem, compiled, x, true);
    std::vector<MatrixXd> Rd(nb);
    double rd_norm = 0.0;
    for (int j = 0; j < nb; ++j) {
      Rd[j] = F[j] - S[j];
      rd_norm += Rd[j].squaredNorm();
    }
    rd_norm = std::sqrt(rd_norm);
    const VectorXd AY = AdjointCompiled(problem, compiled, Y);
    const VectorXd Rp = AY - c;
    const double pobj = c.dot(x);
    double dobj = 0.0;
    for (int j = 0; j < nb; ++j) dobj -= Inner(compiled.blocks[j].constant, Y[j]);
    const double gap = inner_sum(S, Y);
    const double mu = gap / n_total;
    const double denom = std::max(1.0, std::abs(pobj));
    const double relgap = std::max(gap, std::abs(pobj - dobj)) / denom;
    const double pinf = rd_norm / (1.0 + f0_norm);
    const double dinf = Rp.norm() / (1.0 + c_norm);

    sol.iterations = iter;
    sol.x = x;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.relative_gap = relgap;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;

    if (options.verbose) {
      std::cerr << std::scientific << std::setprecision(3) << "iter " << iter
                << " pobj " << pobj << " dobj " << dobj << " gap " << relgap
                << " pinf " << pinf << " dinf " << dinf << "\n";
    }
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(gap)) {
      sol.status = Status::kNumericalFailure;
      sol.message = "non-finite iterate";
      break;
    }
    if (relgap < options.opt_tol && pinf < options.feas_tol &&
        dinf < options.feas_tol) {
      sol.status = Status::kOptimal;
      sol.message = "converged";
      break;
    }
    // Farkas test: Y >= 0 with A*(Y) ~ 0 and <F0, Y> < 0 bounds every
    // feasible x away to norm >= 1 / ratio.
    if (dobj > 0.0 && AY.norm() <= 1e-8 * dobj) {
      sol.status = Status::kInfeasible;
      std::ostringstream msg;
      msg << "infeasibility certificate: ||A*(Y)|| / -<F0,Y> = "
          << AY.norm() / dobj;
      sol.message = msg.str();
      break;
    }
    if (iter == options.max_iter) {
      sol.status = Status::kNumericalFailure;
      sol.message = "iteration limit reached";
      break;
    }

    bool scaled = true;
    for (int j = 0; j < nb && scaled; ++j) scaled = ComputeNtScaling(Y[j], S[j], &nt[j]);
    if (!scaled) {
      sol.status = Status::kNumericalFailure;
      sol.message = "lost positive definiteness of the iterates";
      break;
    }
    std::vector<MatrixXd> W(nb);
    for (int j = 0; j < nb; ++j) W[j] = nt[j].W;
    MatrixXd M = schur.Build(W);
    M = Symmetrize(M);

    Eigen::LLT<MatrixXd> llt;
    Eigen::LDLT<MatrixXd> ldlt;
    bool use_llt = false;
    {
      const double diag_max = M.diagonal().cwiseAbs().maxCoeff();
      double shift = 0.0;
      for (int attempt = 0; attempt < 6 && !use_llt; ++attempt) {
        MatrixXd Mr = M;
        if (shift > 0.0) Mr.diagonal().array() += shift;
        llt.compute(Mr);
        if (llt.info() == Eigen::Success) {
          use_llt = true;
        } else {
          shift = shift == 0.0 ? 1e-14 * diag_max : shift * 100.0;
        }
      }
      if (!use_llt) ldlt.compute(M);
    }
    auto solve_m = [&](const VectorXd& rhs) -> VectorXd {
      return use_llt ? VectorXd(llt.solve(rhs)) : VectorXd(ldlt.solve(rhs));
    };

    std::vector<MatrixXd> WRdW(nb);
    for (int j = 0; j < nb; ++j) WRdW[j] = W[j] * Rd[j] * W[j];

    struct Direction {
      VectorXd dx;
      std::vector<MatrixXd> dS, dY;
    };
    auto direction = [&](const std::vector<MatrixXd>& Rc) {
      std::vector<MatrixXd> tmp(nb);
      for (int j = 0; j < nb; ++j) tmp[j] = Rc[j] - WRdW[j];
      const VectorXd rhs = Rp + AdjointCompiled(problem, compiled, tmp);
      Direction d;
      d.dx = solve_m(rhs);
      const auto lin = EvaluateCompiled(problem, compiled, d.dx, false);
      d.dS.resize(nb);
      d.dY.resize(nb);
      for (int j = 0; j < nb; ++j) {
        d.dS[j] = Symmetrize(Rd[j] + lin[j]);
        d.dY[j] = Symmetrize(Rc[j] - W[j] * d.dS[j] * W[j]);
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ay = std::numeric_limits<double>::infinity();
      double as = std::numeric_limits<double>::infinity();
      for (int j = 0; j < nb; ++j) {
        ay = std::min(ay, MaxStep(Y[j], d.dY[j]));
        as = std::min(as, MaxStep(S[j], d.dS[j]));
      }
      return std::make_pair(ay, as);
    };

    // Predictor.
    std::vector<MatrixXd> Rc(nb);
    for (int j = 0; j < nb; ++j) Rc[j] = -Y[j];
    const Direction pred = direction(Rc);
    auto [ay_max, as_max] = step_lengths(pred);
    const double ay_p = std::min(1.0, ay_max);
    const double as_p = std::min(1.0, as_max);
    double predicted_gap = 0.0;
    for (int j = 0; j < nb; ++j) {
      predicted_gap += Inner(Y[j] + ay_p * pred.dY[j], S[j] + as_p * pred.dS[j]);
    }
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ay_p, as_p), 2));
    const double sigma =
        std::min(1.0, std::pow(std::max(predicted_gap, 0.0) / gap, expon));

    // Corrector with the second-order term in the scaled space.
    for (int j = 0; j < nb; ++j) {
      const auto& s = nt[j];
      const MatrixXd dYs = s.G_inv * pred.dY[j] * s.G_inv.transpose();
      const MatrixXd dSs = s.G.transpose() * pred.dS[j] * s.G;
      MatrixXd Rm = -0.5 * (dYs * dSs + dSs * dYs);
      Rm.diagonal().array() += sigma * mu;
      Rm.diagonal().array() -= s.lambda.array().square();
      MatrixXd H(Rm.rows(), Rm.cols());
      for (int a = 0; a < H.rows(); ++a) {
        for (int b = 0; b < H.cols(); ++b) {
          H(a, b) = 2.0 * Rm(a, b) / (s.lambda[a] + s.lambda[b]);
        }
      }
      Rc[j] = Symmetrize(s.G * H * s.G.transpose());
    }
    const Direction corr = direction(Rc);
    std::tie(ay_max, as_max) = step_lengths(corr);
    const double gamma = 0.9 + 0.09 * std::min(ay_p, as_p);
    const double ay = std::min(1.0, gamma * ay_max);
    const double as = std::min(1.0, gamma * as_max);
    if (ay < 1e-10 && as < 1e-10) {
      sol.status = Status::kNumericalFailure;
      sol.message = "step length collapsed";
      break;
    }
    for (int j = 0; j < nb; ++j) {
      Y[j] = Symmetrize(Y[j] + ay * corr.dY[j]);
      S[j] = Symmetrize(S[j] + as * corr.dS[j]);
    }
    x += as * corr.dx;
  }

  sol.dual = expand_dual(Y);
  return sol;
}

ResidualReport CheckSolution(const Problem& problem, const VectorXd& x) {
  ResidualReport report;
  report.worst = std::numeric_limits<double>::infinity();
  for (const auto& block : problem.Evaluate(x)) {
    const double lmin = MinEigenvalue(block);
    report.min_eigenvalues.push_back(lmin);
    report.worst = std::min(report.worst, lmin);
  }
  report.objective = problem.objective().dot(x);
  return report;
}

}  // namespace lpvp::sdp
