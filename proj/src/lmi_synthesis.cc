#include "lpvp/lmi_synthesis.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace lpvp {

namespace {

using Complex = std::complex<double>;

MatrixXd Selector(int rows, int offset, int n) {
  MatrixXd E = MatrixXd::Zero(rows, n);
  E.middleCols(offset, rows).setIdentity();
  return E;
}

// Rows [offset, offset + size) of a dim-row block layout, as a dim x size
// embedding.
MatrixXd Rows(int dim, int offset, int size) {
  MatrixXd E = MatrixXd::Zero(dim, size);
  E.middleRows(offset, size).setIdentity();
  return E;
}

// Solves (zI - H) X = B for upper Hessenberg H by Gaussian elimination with
// adjacent-row pivoting.
Eigen::MatrixXcd HessenbergSolve(const MatrixXd& H, Complex z,
                                 const Eigen::MatrixXcd& B) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXcd M = -H.cast<Complex>();
  M.diagonal().array() += z;
  Eigen::MatrixXcd X = B;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
      M.row(k).tail(n - k).swap(M.row(k + 1).tail(n - k));
      X.row(k).swap(X.row(k + 1));
    }
    if (M(k + 1, k) == Complex(0.0)) continue;
    const Complex l = M(k + 1, k) / M(k, k);
    M.row(k + 1).tail(n - k) -= l * M.row(k).tail(n - k);
    X.row(k + 1) -= l * X.row(k);
  }
  return M.triangularView<Eigen::Upper>().solve(X);
}

}  // namespace

GeneralizedPlant BuildGeneralizedPlant(const AugmentedPlant& plant,
                                       const CostWeights& weights) {
  weights.Validate();
  const DiscretePlant& p = plant.plant;
  const int n = p.states();
  GeneralizedPlant g;
  g.A = p.A;
  g.B_u = p.B_u;
  g.B_w = p.B_w;
  g.C_z = MatrixXd::Zero(3, n);
  g.C_z.row(0) = std::sqrt(weights.q1) * p.C.row(0);
  g.C_z.row(1) = std::sqrt(weights.q2) * p.C.row(1);
  g.D_zu = MatrixXd::Zero(3, p.inputs());
  g.D_zu(2, 0) = std::sqrt(weights.R);
  g.D_zw = MatrixXd::Zero(3, p.disturbances());
  g.n_v = plant.n_v;
  g.n_r = plant.n_r;
  return g;
}

LMIRegion LMIRegion::Positivity(double zeta_p) {
  LMIRegion r;
  r.zeta_p = zeta_p;
  r.alpha0 << 2.0 * zeta_p, 0.0, 0.0, -2.0 * zeta_p;
  r.beta << 0.0, 0.0, 0.0, 1.0;
  r.Validate();
  return r;
}

void LMIRegion::Validate() const {
  Require(std::isfinite(zeta_p) && zeta_p >= 0.0 && zeta_p < 1.0,
          ErrorKind::kDomain,
          "pole region needs 0 <= zeta_p < 1 inside the unit disk");
  Require((alpha0 - alpha0.transpose()).norm() == 0.0, ErrorKind::kDomain,
          "region matrix alpha0 must be symmetric");
}

Eigen::Matrix2cd LMIRegion::Characteristic(Complex z) const {
  return alpha0.cast<Complex>() + z * beta.cast<Complex>() +
         std::conj(z) * beta.transpose().cast<Complex>();
}

const char* ToString(SynthesisMode mode) {
  return mode == SynthesisMode::kCommonP ? "hinf-common-p" : "hinf-paper";
}

const char* ToString(PoleScope scope) {
  return scope == PoleScope::kFull ? "full" : "vehicle-block";
}

SynthesisMode ParseSynthesisMode(const std::string& text) {
  if (text == "hinf-common-p" || text == "common-p") return SynthesisMode::kCommonP;
  if (text == "hinf-paper" || text == "per-vertex-p" || text == "paper") {
    return SynthesisMode::kPerVertexP;
  }
  Throw(ErrorKind::kConfig, "unknown synthesis mode '" + text + "'");
}

PoleScope ParsePoleScope(const std::string& text) {
  if (text == "full") return PoleScope::kFull;
  if (text == "vehicle-block") return PoleScope::kVehicleBlock;
  Throw(ErrorKind::kConfig, "unknown pole scope '" + text + "'");
}

// ---------------------------------------------------------------- LMIs

MatrixXd LyapunovVariable::Value(const sdp::Problem& problem,
                                 const VectorXd& x) const {
  MatrixXd P = MatrixXd::Zero(n, n);
  for (const auto& [var, E] : parts) {
    P += E * problem.Unpack(x, var) * E.transpose();
  }
  return 0.5 * (P + P.transpose());
}

LyapunovVariable AddLyapunovVariable(sdp::Problem* problem,
                                     const std::string& name, int n,
                                     int block_split) {
  LyapunovVariable P;
  P.n = n;
  if (block_split <= 0 || block_split >= n) {
    P.parts.emplace_back(problem->AddSymmetric(name, n), MatrixXd::Identity(n, n));
    return P;
  }
  const int n2 = n - block_split;
  MatrixXd E1 = MatrixXd::Zero(n, block_split);
  E1.topRows(block_split).setIdentity();
  MatrixXd E2 = MatrixXd::Zero(n, n2);
  E2.bottomRows(n2).setIdentity();
  P.parts.emplace_back(problem->AddSymmetric(name + "11", block_split), E1);
  P.parts.emplace_back(problem->AddSymmetric(name + "22", n2), E2);
  return P;
}

void AddLyapunovProduct(sdp::Problem* problem, int constraint,
                        const LyapunovVariable& P, const MatrixXd& U,
                        const MatrixXd& V) {
  for (const auto& [var, E] : P.parts) {
    problem->AddProduct(constraint, var, U * E, V * E);
  }
}

int AddHinfLmi(sdp::Problem* problem, const GeneralizedPlant& g,
               const LyapunovVariable& P, int z, int mu,
               const std::string& label) {
  const int n = g.states();
  const int nw = static_cast<int>(g.B_w.cols());
  const int nz = static_cast<int>(g.C_z.rows());
  Require(P.n == n && g.B_u.rows() == n && g.B_w.rows() == n &&
              g.C_z.cols() == n && g.D_zu.rows() == nz &&
              g.D_zu.cols() == g.B_u.cols() && g.D_zw.rows() == nz &&
              g.D_zw.cols() == nw,
          ErrorKind::kDomain, "generalized plant dimensions are inconsistent");
  const int dim = 2 * n + nw + nz;
  const MatrixXd E1 = Rows(dim, 0, n);
  const MatrixXd E2 = Rows(dim, n, n);
  const MatrixXd E3 = Rows(dim, 2 * n, nw);
  const MatrixXd E4 = Rows(dim, 2 * n + nw, nz);

  const int c = problem->AddConstraint(label, dim);
  // Diagonal P blocks, then (AP + B_u Z) in (1,2) and (C_z P + D_zu Z) in
  // (4,2); terms sharing the right factor E2 are merged.
  AddLyapunovProduct(problem, c, P, 0.5 * E1, E1);
  AddLyapunovProduct(problem, c, P, 0.5 * E2 + E1 * g.A + E4 * g.C_z, E2);
  if (z >= 0) problem->AddProduct(c, z, E1 * g.B_u + E4 * g.D_zu, E2);
  problem->AddScalarTerm(c, mu, E4 * E4.transpose());

  MatrixXd constant = E3 * E3.transpose();
  const MatrixXd bw = E1 * g.B_w * E3.transpose();
  const MatrixXd dzw = E3 * g.D_zw.transpose() * E4.transpose();
  constant += bw + bw.transpose() + dzw + dzw.transpose();
  problem->AddConstant(c, constant);
  return c;
}

std::vector<int> AddPoleConstraint(sdp::Problem* problem, const MatrixXd& A,
                                   const MatrixXd& B_u,
                                   const LyapunovVariable& P, int z,
                                   const LMIRegion& region, const MatrixXd& S,
                                   const std::string& label) {
  region.Validate();
  const int k = static_cast<int>(S.rows());
  Require(S.cols() == A.rows() && P.n == A.rows(), ErrorKind::kDomain,
          "pole constraint selector does not match the plant");
  // M_D = alpha0 (x) SPS' + beta (x) SXS' + beta' (x) SX'S', X = AP + B_u Z.
  // Each 2x2 cell (a, b) is a k x k block.
  const int dim = 2 * k;
  const int c = problem->AddConstraint(label, dim);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const MatrixXd Ea = Rows(dim, a * k, k);
      const MatrixXd Eb = Rows(dim, b * k, k);
      // alpha0(a,b) S P S' in cell (a,b); symmetric alpha0 is split evenly
      // between (a,b) and (b,a) by the product term's transpose.
      if (region.alpha0(a, b) != 0.0) {
        AddLyapunovProduct(problem, c, P, 0.5 * region.alpha0(a, b) * Ea * S,
                           Eb * S);
      }
      // beta(a,b) S X S' in cell (a,b) plus its transpose in (b,a) equals
      // beta (x) X + beta' (x) X' cellwise.
      if (region.beta(a, b) != 0.0) {
        AddLyapunovProduct(problem, c, P, region.beta(a, b) * Ea * S * A,
                           Eb * S);
        if (z >= 0) {
          problem->AddProduct(c, z, region.beta(a, b) * Ea * S * B_u, Eb * S);
        }
      }
    }
  }
  return {c};
}

// ---------------------------------------------------------------- Checks

std::vector<std::array<double, 2>> PlantFamilySpec::Corners() const {
  return StiffnessCorners(vehicle.stiffness_uncertainty, family);
}

double HinfNormSquared(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                       const MatrixXd& D, int points, bool refine,
                       double* peak_frequency) {
  Require(points >= 2, ErrorKind::kDomain, "frequency sweep needs 2+ points");
  const Eigen::HessenbergDecomposition<MatrixXd> hess(A);
  const MatrixXd H = hess.matrixH();
  const MatrixXd Q = hess.matrixQ();
  const Eigen::MatrixXcd QtB = (Q.transpose() * B).cast<Complex>();
  const Eigen::MatrixXcd CQ = (C * Q).cast<Complex>();
  const Eigen::MatrixXcd Dc = D.cast<Complex>();
  auto gain = [&](double theta) {
    const Complex z = std::polar(1.0, theta);
    const Eigen::MatrixXcd G = CQ * HessenbergSolve(H, z, QtB) + Dc;
    const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(G).singularValues()(0);
    return s * s;
  };
  const double pi = std::numbers::pi;
  double best = -1.0;
  int best_i = 0;
  for (int i = 0; i < points; ++i) {
    const double theta = pi * i / (points - 1);
    const double g = gain(theta);
    if (!std::isfinite(g)) {
      best = std::numeric_limits<double>::infinity();
      best_i = i;
      break;
    }
    if (g > best) {
      best = g;
      best_i = i;
    }
  }
  double best_theta = pi * best_i / (points - 1);
  if (refine && std::isfinite(best)) {
    double lo = pi * std::max(0, best_i - 1) / (points - 1);
    double hi = pi * std::min(points - 1, best_i + 1) / (points - 1);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = gain(x1), f2 = gain(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = gain(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = gain(x2);
      }
    }
    const double fm = std::max(f1, f2);
    if (fm > best) {
      best = fm;
      best_theta = f1 > f2 ? x1 : x2;
    }
  }
  if (peak_frequency) *peak_frequency = best_theta;
  return best;
}

double VehicleBlockMinRe(const MatrixXd& A_cl, int n_v) {
  return A_cl.topLeftCorner(n_v, n_v).eigenvalues().real().minCoeff();
}

namespace {

MatrixXd ClosedLoop(const AugmentedPlant& plant, const RowVectorXd& K) {
  return plant.plant.A - plant.plant.B_u * K;
}

}  // namespace

VerificationReport VerifySchedule(const GainSchedule& schedule,
                                  const PlantFamilySpec& spec,
                                  const VerifyOptions& options) {
  schedule.Validate();
  Require(schedule.n_r == spec.preview.N && schedule.n_v == 4,
          ErrorKind::kConfig,
          "schedule dimensions do not match the configured preview length");
  VerificationReport report;
  report.mu = options.mu;
  report.zeta_p = options.zeta_p;
  const auto corners = spec.Corners();

  for (int v = 0; v < 3; ++v) {
    const SchedulingPoint rho{schedule.polytope.vertices[v].x(),
                              schedule.polytope.vertices[v].y()};
    BarycentricCoords e;
    e.alpha = {0.0, 0.0, 0.0};
    e.alpha[v] = 1.0;
    const RowVectorXd K = InterpolateGains(schedule, e);
    for (const auto& corner : corners) {
      const AugmentedPlant plant = BuildAugmentedPlant(
          spec.vehicle.WithStiffness(corner[0], corner[1]), spec.preview, rho,
          spec.variant);
      const GeneralizedPlant g = BuildGeneralizedPlant(plant, spec.weights);
      VertexCheck check;
      check.speed_vertex = v;
      check.corner = corner;
      check.rho = rho;
      const MatrixXd A_cl = ClosedLoop(plant, K);
      check.spectral_radius = SpectralRadius(A_cl);
      check.vehicle_min_re = VehicleBlockMinRe(A_cl, plant.n_v);
      if (check.spectral_radius < 1.0) {
        check.hinf_norm_sq = HinfNormSquared(
            A_cl, g.B_w, g.C_z - g.D_zu * K, g.D_zw, options.sweep_points,
            options.refine_peak, &check.peak_frequency);
      } else {
        check.hinf_norm_sq = std::numeric_limits<double>::infinity();
      }
      report.vertex_schur = report.vertex_schur && check.spectral_radius < 1.0;
      if (options.zeta_p) {
        report.pole_ok = report.pole_ok &&
                         check.vehicle_min_re >= *options.zeta_p - options.pole_tol;
      }
      if (options.mu) {
        report.bounded_real_ok =
            report.bounded_real_ok &&
            check.hinf_norm_sq <= *options.mu * (1.0 + options.mu_rel_tol);
      }
      report.vertices.push_back(check);
    }
  }

  const double lo = schedule.polytope.v_min;
  const double hi = schedule.polytope.v_max;
  for (int i = 0; i < options.grid_points; ++i) {
    const double vx =
        options.grid_points == 1 ? lo : lo + (hi - lo) * i / (options.grid_points - 1);
    const RowVectorXd K = GainsAtSpeed(schedule, vx);
    bool stable = true;
    for (const auto& corner : corners) {
      const AugmentedPlant plant = BuildAugmentedPlant(
          spec.vehicle.WithStiffness(corner[0], corner[1]), spec.preview,
          SchedulingPoint::OnCurve(vx), spec.variant);
      const MatrixXd A_cl = ClosedLoop(plant, K);
      GridCheck check;
      check.vx = vx;
      check.corner = corner;
      check.spectral_radius = SpectralRadius(A_cl);
      check.vehicle_min_re = VehicleBlockMinRe(A_cl, plant.n_v);
      stable = stable && check.spectral_radius < 1.0;
      report.grid.push_back(check);
    }
    if (!stable) {
      report.grid_schur = false;
      report.unstable_speeds.push_back(vx);
    }
  }
  return report;
}

std::string VerificationReport::ToText() const {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "vertex checks\n";
  out << "  vertex  corner        vx        rho(A_cl)   minRe(veh)   |T|^2\n";
  for (const auto& v : vertices) {
    out << "  " << std::setw(6) << v.speed_vertex + 1 << "  " << std::setw(4)
        << v.corner[0] << "/" << std::setw(4) << v.corner[1] << "  "
        << std::setw(9) << v.rho.vx << "  " << std::setw(10) << v.spectral_radius
        << "  " << std::setw(10) << v.vehicle_min_re << "  " << std::setw(10)
        << v.hinf_norm_sq << "\n";
  }
  double worst_rho = 0.0, worst_re = std::numeric_limits<double>::infinity();
  for (const auto& g : grid) {
    worst_rho = std::max(worst_rho, g.spectral_radius);
    worst_re = std::min(worst_re, g.vehicle_min_re);
  }
  out << "grid: " << grid.size() << " (speed, corner) points, max spectral radius "
      << worst_rho << ", min vehicle-block Re(eig) " << worst_re << "\n";
  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  out << "vertex Schur:        " << verdict(vertex_schur) << "\n";
  out << "grid Schur:          " << verdict(grid_schur) << "\n";
  if (!unstable_speeds.empty()) {
    out << "  unstable speeds:";
    for (double v : unstable_speeds) out << ' ' << v;
    out << "\n";
  }
  if (zeta_p) {
    out << "pole region >= " << *zeta_p << ": " << verdict(pole_ok) << "\n";
  }
  if (mu) {
    out << "bounded real (mu " << *mu << ", norm bound " << std::sqrt(*mu)
        << "): " << verdict(bounded_real_ok) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- Synthesis

HinfProblem BuildHinfProblem(const std::vector<GeneralizedPlant>& plants,
                             const std::vector<int>& vertex_of,
                             int num_vertices, const SynthesisOptions& options) {
  Require(!plants.empty(), ErrorKind::kDomain, "synthesis needs at least one model");
  Require(vertex_of.size() == plants.size(), ErrorKind::kDomain,
          "every plant needs a speed vertex index");
  const int n = plants[0].states();
  const int n_v = plants[0].n_v;
  const int n_u = static_cast<int>(plants[0].B_u.cols());
  for (const auto& g : plants) {
    Require(g.states() == n && g.n_v == n_v && g.B_u.cols() == n_u,
            ErrorKind::kDomain, "all models must share (n_v, n_r)");
  }
  for (int v : vertex_of) {
    Require(v >= 0 && v < num_vertices, ErrorKind::kDomain,
            "speed vertex index out of range");
  }
  std::optional<LMIRegion> region;
  if (options.pole_region) region = LMIRegion::Positivity(options.zeta_p);
  const bool block = region && options.scope == PoleScope::kVehicleBlock;
  const int split = block && options.decouple_lyapunov && n_v < n ? n_v : 0;

  HinfProblem out;
  sdp::Problem& problem = out.problem;
  const int num_p = options.mode == SynthesisMode::kCommonP ? 1 : num_vertices;
  for (int i = 0; i < num_p; ++i) {
    out.P.push_back(
        AddLyapunovVariable(&problem, "P" + std::to_string(i + 1), n, split));
  }
  for (int i = 0; i < num_vertices; ++i) {
    out.Z.push_back(problem.AddFull("Z" + std::to_string(i + 1), n_u, n));
  }
  out.mu = problem.AddScalar("mu");
  problem.SetObjective(out.mu, 1.0);

  const MatrixXd S = block ? Selector(n_v, 0, n) : MatrixXd::Identity(n, n);
  for (size_t k = 0; k < plants.size(); ++k) {
    const int v = vertex_of[k];
    const auto& Pk = out.P[num_p == 1 ? 0 : v];
    const std::string tag = "model " + std::to_string(k + 1);
    AddHinfLmi(&problem, plants[k], Pk, out.Z[v], out.mu, "hinf " + tag);
    if (region) {
      AddPoleConstraint(&problem, plants[k].A, plants[k].B_u, Pk, out.Z[v],
                        *region, S, "pole " + tag);
    }
  }
  return out;
}

HinfSolution SolveHinf(const std::vector<GeneralizedPlant>& plants,
                       const std::vector<int>& vertex_of, int num_vertices,
                       const SynthesisOptions& options) {
  const HinfProblem built = BuildHinfProblem(plants, vertex_of, num_vertices, options);
  const sdp::Problem& problem = built.problem;
  const int mu = built.mu;
  const sdp::Solution sol = sdp::Solve(problem, options.solver);
  HinfSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.relative_gap = sol.relative_gap;
  out.message = sol.message;
  if (sol.status == sdp::Status::kInfeasible) {
    Throw(ErrorKind::kSynthesis, "H-infinity LMIs are infeasible: " + sol.message);
  }
  const sdp::ResidualReport check = sdp::CheckSolution(problem, sol.x);
  for (size_t j = 0; j < check.min_eigenvalues.size(); ++j) {
    out.block_min_eigenvalues.emplace_back(problem.constraints()[j].label,
                                           check.min_eigenvalues[j]);
  }
  out.worst_block_eigenvalue = check.worst;
  if (sol.status == sdp::Status::kNumericalFailure) {
    // Accept a stalled solve only when its iterate is verifiably feasible.
    if (!check.Feasible(options.solver.feas_tol) || sol.relative_gap > 1e-3) {
      std::ostringstream msg;
      msg << "SDP solve failed: " << sol.message << " (gap " << sol.relative_gap
          << ", worst block eigenvalue " << check.worst << ")";
      Throw(ErrorKind::kNumerical, msg.str());
    }
    std::ostringstream msg;
    msg << "solver stopped early (" << sol.message << ", gap "
        << sol.relative_gap << "); iterate verified feasible";
    out.warnings.push_back(msg.str());
  }
  if (!check.Feasible(options.solver.feas_tol)) {
    std::ostringstream msg;
    msg << "worst LMI block eigenvalue " << check.worst << " below -feas_tol";
    out.warnings.push_back(msg.str());
  }
  out.mu = problem.Unpack(sol.x, mu)(0, 0);
  for (int i = 0; i < num_vertices; ++i) {
    const auto& Pi = built.P[built.P.size() == 1 ? 0 : i];
    out.P.push_back(Pi.Value(problem, sol.x));
    out.Z.push_back(problem.Unpack(sol.x, built.Z[i]));
  }
  return out;
}

namespace {

std::string Timestamp() {
  // Reproducible builds pin the clock through SOURCE_DATE_EPOCH.
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

ScheduleMetadata BaseMetadata(const PlantFamilySpec& spec) {
  ScheduleMetadata meta;
  meta.uncertain = spec.family == ModelFamily::kUncertain &&
                   spec.vehicle.stiffness_uncertainty > 0.0;
  meta.stiffness_uncertainty = meta.uncertain ? spec.vehicle.stiffness_uncertainty : 0.0;
  meta.q1 = spec.weights.q1;
  meta.q2 = spec.weights.q2;
  meta.R = spec.weights.R;
  meta.T = spec.preview.T;
  meta.model_variant =
      spec.variant == ErrorModelVariant::kPaper ? "paper" : "standard";
  meta.timestamp = Timestamp();
  return meta;
}

}  // namespace

std::vector<GeneralizedPlant> BuildFamilyPlants(const PlantFamilySpec& spec,
                                                std::vector<int>* vertex_of) {
  const auto models = EnumerateVertexModels(spec.vehicle, spec.preview,
                                            spec.family, spec.variant);
  std::vector<GeneralizedPlant> plants;
  vertex_of->clear();
  for (const auto& m : models) {
    plants.push_back(BuildGeneralizedPlant(m.plant, spec.weights));
    vertex_of->push_back(m.speed_vertex_index);
  }
  return plants;
}

SynthesisResult Synthesize(const PlantFamilySpec& spec,
                           const SynthesisOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> vertex_of;
  const auto plants = BuildFamilyPlants(spec, &vertex_of);
  SynthesisResult result;
  result.solution = SolveHinf(plants, vertex_of, 3, options);
  result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.warnings = result.solution.warnings;

  GainSchedule& schedule = result.schedule;
  schedule.polytope = BuildPolytope(spec.preview.v_min, spec.preview.v_max);
  schedule.mode = options.interpolation;
  schedule.n_v = plants[0].n_v;
  schedule.n_r = plants[0].n_r;
  for (int i = 0; i < 3; ++i) {
    const MatrixXd& P = result.solution.P[i];
    const MatrixXd& Z = result.solution.Z[i];
    Eigen::LDLT<MatrixXd> ldlt(P);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      std::ostringstream msg;
      msg << "Lyapunov matrix at vertex " << i + 1 << " is singular (rcond "
          << ldlt.rcond() << ")";
      Throw(ErrorKind::kNumerical, msg.str());
    }
    const RowVectorXd K = -ldlt.solve(Z.transpose()).transpose().row(0);
    VertexGain gain;
    gain.Kv = K.head(schedule.n_v);
    gain.Kr = K.tail(schedule.n_r);
    gain.P = P;
    gain.Z = Z;
    schedule.vertices.push_back(std::move(gain));
  }
  schedule.metadata = BaseMetadata(spec);
  schedule.metadata.method = ToString(options.mode);
  schedule.metadata.mu = result.solution.mu;
  if (options.pole_region) {
    schedule.metadata.zeta_p = options.zeta_p;
    schedule.metadata.pole_scope = ToString(options.scope);
  }

  VerifyOptions verify = options.verify;
  verify.mu = result.solution.mu;
  if (options.pole_region && options.scope == PoleScope::kVehicleBlock) {
    verify.zeta_p = options.zeta_p;
  }
  result.verification = VerifySchedule(schedule, spec, verify);
  if (!result.verification.grid_schur) {
    std::ostringstream msg;
    msg << "schedule is not Schur at " << result.verification.unstable_speeds.size()
        << " grid speeds";
    if (options.mode == SynthesisMode::kPerVertexP) {
      msg << " (per-vertex P does not certify interpolation)";
    }
    result.warnings.push_back(msg.str());
  }
  if (!result.verification.vertex_schur) {
    result.warnings.push_back("a vertex closed loop is not Schur");
  }
  if (!result.verification.pole_ok) {
    result.warnings.push_back("vehicle-block pole region check failed");
  }
  if (!result.verification.bounded_real_ok) {
    result.warnings.push_back("frequency-sweep norm exceeds the LMI bound");
  }
  return result;
}

std::string SynthesisResult::ToText() const {
  std::ostringstream out;
  out << std::setprecision(8);
  out << "method: " << schedule.metadata.method << "\n";
  out << "mu: " << solution.mu << " (norm bound " << std::sqrt(solution.mu) << ")\n";
  out << "solver: " << sdp::ToString(solution.status) << " after "
      << solution.iterations << " iterations, relative gap "
      << solution.relative_gap << "\n";
  out << "solve time: " << solve_seconds << " s\n";
  out << "worst LMI block eigenvalue: " << solution.worst_block_eigenvalue << "\n";
  out << "LMI blocks:\n";
  for (const auto& [label, value] : solution.block_min_eigenvalues) {
    out << "  " << std::setw(16) << std::left << label << std::right << " "
        << value << "\n";
  }
  out << "vertex gains (max |Kv|, max |Kr|):\n";
  for (size_t i = 0; i < schedule.vertices.size(); ++i) {
    const auto& v = schedule.vertices[i];
    out << "  " << i + 1 << ": " << v.Kv.cwiseAbs().maxCoeff() << ", "
        << v.Kr.cwiseAbs().maxCoeff() << "\n";
  }
  out << verification.ToText();
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

GainSchedule BuildLqSchedule(const PlantFamilySpec& spec,
                             const DareOptions& options) {
  spec.vehicle.Validate();
  spec.preview.Validate();
  GainSchedule schedule;
  schedule.polytope = BuildPolytope(spec.preview.v_min, spec.preview.v_max);
  schedule.mode = InterpolationMode::kGain;
  schedule.n_v = 4;
  schedule.n_r = spec.preview.N;
  for (int i = 0; i < 3; ++i) {
    const SchedulingPoint rho{schedule.polytope.vertices[i].x(),
                              schedule.polytope.vertices[i].y()};
    const AugmentedPlant plant =
        BuildAugmentedPlant(spec.vehicle, spec.preview, rho, spec.variant);
    const LQSolution lq = SolvePreviewLq(plant, spec.weights, options);
    VertexGain gain;
    gain.Kv = lq.Kv;
    gain.Kr = lq.Kr;
    schedule.vertices.push_back(std::move(gain));
  }
  schedule.metadata = BaseMetadata(spec);
  schedule.metadata.method = "lq";
  schedule.metadata.uncertain = false;
  schedule.metadata.stiffness_uncertainty = 0.0;
  return schedule;
}

}  // namespace lpvp
