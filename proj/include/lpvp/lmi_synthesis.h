#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "lpvp/common.h"
#include "lpvp/lq_preview.h"
#include "lpvp/models.h"
#include "lpvp/scheduling.h"
#include "lpvp/sdp.h"

namespace lpvp {

/// Performance interconnection at one vertex:
///   x+ = A x + B_u u + B_w w,   z = C_z x + D_zu u + D_zw w,
/// with z = [sqrt(q1) e_y; sqrt(q2) e_psi; sqrt(R) u] and w = [y_ri; psi_dot].
struct GeneralizedPlant {
  MatrixXd A;
  MatrixXd B_u;
  MatrixXd B_w;
  MatrixXd C_z;
  MatrixXd D_zu;
  MatrixXd D_zw;
  int n_v = 0;
  int n_r = 0;

  int states() const { return static_cast<int>(A.rows()); }
};

GeneralizedPlant BuildGeneralizedPlant(const AugmentedPlant& plant,
                                       const CostWeights& weights);

/// Region {z : alpha0 + z beta + conj(z) beta' > 0}.
struct LMIRegion {
  Eigen::Matrix2d alpha0 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d beta = Eigen::Matrix2d::Zero();
  double zeta_p = 0.0;

  /// Re(z) >= zeta_p: alpha0 = zeta_p diag(2, -2), beta = [0 0; 0 1].
  static LMIRegion Positivity(double zeta_p);
  void Validate() const;
  Eigen::Matrix2cd Characteristic(std::complex<double> z) const;
};

enum class SynthesisMode { kCommonP, kPerVertexP };
enum class PoleScope { kFull, kVehicleBlock };

const char* ToString(SynthesisMode mode);
const char* ToString(PoleScope scope);
SynthesisMode ParseSynthesisMode(const std::string& text);
PoleScope ParsePoleScope(const std::string& text);

/// Symmetric matrix variable P = sum_i E_i X_i E_i'. A single part with
/// E = I is an unstructured P; two parts give a block-diagonal P.
struct LyapunovVariable {
  int n = 0;
  std::vector<std::pair<int, MatrixXd>> parts;  // (variable, embedding)

  MatrixXd Value(const sdp::Problem& problem, const VectorXd& x) const;
};

LyapunovVariable AddLyapunovVariable(sdp::Problem* problem,
                                     const std::string& name, int n,
                                     int block_split = 0);

/// Adds U P V' + V P U' for every part of P.
void AddLyapunovProduct(sdp::Problem* problem, int constraint,
                        const LyapunovVariable& P, const MatrixXd& U,
                        const MatrixXd& V);

/// Bounded-real block for one vertex (z index -1 leaves out the Z term):
///
///   [ P     AP+B_uZ   B_w   0             ]
///   [ *     P         0     PC_z'+Z'D_zu' ]  >= 0
///   [ *     *         I     D_zw'         ]
///   [ *     *         *     mu I          ]
///
/// Returns the constraint index.
int AddHinfLmi(sdp::Problem* problem, const GeneralizedPlant& plant,
               const LyapunovVariable& P, int z, int mu,
               const std::string& label);

/// Pole region restricted to the rows selected by S (S = I for the full
/// closed loop). With the positivity region this yields the two blocks
/// 2 zeta S P S' >= 0 and S(AP+BZ)S' + (.)' - 2 zeta S P S' >= 0.
std::vector<int> AddPoleConstraint(sdp::Problem* problem, const MatrixXd& A,
                                   const MatrixXd& B_u,
                                   const LyapunovVariable& P, int z,
                                   const LMIRegion& region, const MatrixXd& S,
                                   const std::string& label);

/// Everything needed to rebuild the model family at any speed.
struct PlantFamilySpec {
  VehicleParams vehicle;
  PreviewConfig preview;
  CostWeights weights;
  ErrorModelVariant variant = ErrorModelVariant::kPaper;
  ModelFamily family = ModelFamily::kNominal;

  std::vector<std::array<double, 2>> Corners() const;
};

struct VerifyOptions {
  int grid_points = 100;
  int sweep_points = 1000;
  bool refine_peak = true;
  std::optional<double> mu;       // squared norm bound to check against
  std::optional<double> zeta_p;   // vehicle-block pole bound
  double pole_tol = 1e-6;
  double mu_rel_tol = 1e-4;
};

struct VertexCheck {
  int speed_vertex = 0;
  std::array<double, 2> corner{1.0, 1.0};
  SchedulingPoint rho;
  double spectral_radius = 0.0;
  double vehicle_min_re = 0.0;
  double hinf_norm_sq = 0.0;
  double peak_frequency = 0.0;  // rad/sample
};

struct GridCheck {
  double vx = 0.0;
  std::array<double, 2> corner{1.0, 1.0};
  double spectral_radius = 0.0;
  double vehicle_min_re = 0.0;
};

struct VerificationReport {
  std::vector<VertexCheck> vertices;
  std::vector<GridCheck> grid;
  std::optional<double> mu;
  std::optional<double> zeta_p;
  bool vertex_schur = true;
  bool grid_schur = true;
  bool pole_ok = true;
  bool bounded_real_ok = true;
  std::vector<double> unstable_speeds;

  bool Passed() const {
    return vertex_schur && grid_schur && pole_ok && bounded_real_ok;
  }
  std::string ToText() const;
};

/// Peak over the unit circle of sigma_max(C (zI - A)^-1 B + D)^2, sampled at
/// `points` frequencies in [0, pi] with optional golden-section refinement
/// around the largest sample.
double HinfNormSquared(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                       const MatrixXd& D, int points = 1000,
                       bool refine = true, double* peak_frequency = nullptr);

/// Minimum real part over the eigenvalues of the leading n_v x n_v block.
double VehicleBlockMinRe(const MatrixXd& A_cl, int n_v);

/// Closed-loop checks of a schedule (u = -K x) at the vertices and on a
/// speed grid over every stiffness corner of the family.
VerificationReport VerifySchedule(const GainSchedule& schedule,
                                  const PlantFamilySpec& spec,
                                  const VerifyOptions& options);

struct SynthesisOptions {
  SynthesisMode mode = SynthesisMode::kCommonP;
  bool pole_region = true;
  double zeta_p = 0.05;
  PoleScope scope = PoleScope::kVehicleBlock;
  /// Block-diagonal Lyapunov matrix when the vehicle-block region is active,
  /// so the region certificate applies to the closed-loop vehicle block.
  bool decouple_lyapunov = true;
  InterpolationMode interpolation = InterpolationMode::kLyapunov;
  sdp::Options solver;
  VerifyOptions verify;
};

/// Solver output for an explicit list of generalized plants. Plant k uses
/// the variables of speed vertex vertex_of[k].
struct HinfSolution {
  double mu = 0.0;
  std::vector<MatrixXd> P;  // per speed vertex (identical in common-P mode)
  std::vector<MatrixXd> Z;
  sdp::Status status = sdp::Status::kNumericalFailure;
  int iterations = 0;
  double relative_gap = 0.0;
  std::string message;
  std::vector<std::pair<std::string, double>> block_min_eigenvalues;
  double worst_block_eigenvalue = 0.0;
  std::vector<std::string> warnings;
};

/// The synthesis SDP with handles to its variables.
struct HinfProblem {
  sdp::Problem problem;
  std::vector<LyapunovVariable> P;  // one, or one per speed vertex
  std::vector<int> Z;
  int mu = -1;
};

HinfProblem BuildHinfProblem(const std::vector<GeneralizedPlant>& plants,
                             const std::vector<int>& vertex_of,
                             int num_vertices, const SynthesisOptions& options);

/// Generalized plants of every vertex model of the family, with the speed
/// vertex of each.
std::vector<GeneralizedPlant> BuildFamilyPlants(const PlantFamilySpec& spec,
                                                std::vector<int>* vertex_of);

HinfSolution SolveHinf(const std::vector<GeneralizedPlant>& plants,
                       const std::vector<int>& vertex_of, int num_vertices,
                       const SynthesisOptions& options);

struct SynthesisResult {
  HinfSolution solution;
  GainSchedule schedule;
  VerificationReport verification;
  std::vector<std::string> warnings;
  double solve_seconds = 0.0;

  double mu() const { return solution.mu; }
  std::string ToText() const;
};

/// Minimizes mu over all vertex LMIs of the family. Infeasibility raises a
/// synthesis error; failed post-checks are reported through warnings and
/// verification, not thrown.
SynthesisResult Synthesize(const PlantFamilySpec& spec,
                           const SynthesisOptions& options);

/// Per-vertex DARE gains on the nominal model, interpolated linearly.
GainSchedule BuildLqSchedule(const PlantFamilySpec& spec,
                             const DareOptions& options = {});

}  // namespace lpvp
