#pragma once

#include <array>
#include <vector>

#include "lpvp/common.h"

namespace lpvp {

/// Linear single-track parameters. Stiffnesses are per tire, so the axle
/// forces carry the factor 2 of the error model.
struct VehicleParams {
  double m = 1500.0;      // kg
  double Iz = 2500.0;     // kg m^2
  double Lf = 1.1;        // m
  double Lr = 1.6;        // m
  double Caf = 60000.0;   // N/rad
  double Car = 60000.0;   // N/rad
  double stiffness_uncertainty = 0.3;

  void Validate() const;

  /// Copy with both cornering stiffnesses scaled.
  VehicleParams WithStiffness(double front_multiplier,
                              double rear_multiplier) const;
};

struct PreviewConfig {
  double T = 0.02;   // s
  int N = 50;        // preview points
  double v_min = 3.0;
  double v_max = 30.0;

  void Validate() const;
};

/// Which lateral error model to build. kPaper keeps the -Vx term in A(2,4);
/// kStandard moves it to the disturbance column only.
enum class ErrorModelVariant { kPaper, kStandard };

/// A point of the scheduling plane (Vx, 1/Vx). Off-curve points are the
/// polytope's interior vertex, where the two coordinates are independent.
struct SchedulingPoint {
  double vx = 0.0;
  double inv_vx = 0.0;

  static SchedulingPoint OnCurve(double vx);
};

/// Continuous state space x' = A x + B_u u + B_w w, y = C x + D u.
struct ContinuousPlant {
  MatrixXd A;
  MatrixXd B_u;
  MatrixXd B_w;
  MatrixXd C;
  MatrixXd D;
};

struct DiscretePlant {
  MatrixXd A;
  MatrixXd B_u;
  MatrixXd B_w;
  MatrixXd C;
  MatrixXd D;
  double T = 0.0;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B_u.cols()); }
  int disturbances() const { return static_cast<int>(B_w.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }

  void Validate() const;
};

/// Vehicle error plant stacked with the road shift register. Disturbance
/// channels are ordered w = [y_ri; psi_dot_des].
struct AugmentedPlant {
  DiscretePlant plant;
  int n_v = 4;
  int n_r = 0;
  SchedulingPoint rho;

  const MatrixXd& C_aug() const { return plant.C; }
  double vx() const { return rho.vx; }
};

struct VertexModel {
  AugmentedPlant plant;
  int speed_vertex_index = 0;
  std::array<double, 2> stiffness_corner{1.0, 1.0};
};

enum class ModelFamily { kNominal, kUncertain };

/// Error model of the single-track vehicle at one scheduling point. States
/// are [y, V_y, Psi, Psi_dot]; B_u is the steering column and B_w the
/// desired yaw rate column.
ContinuousPlant BuildErrorModelCt(const VehicleParams& params,
                                  const SchedulingPoint& rho,
                                  ErrorModelVariant variant =
                                      ErrorModelVariant::kPaper);
ContinuousPlant BuildErrorModelCt(const VehicleParams& params, double vx,
                                  ErrorModelVariant variant =
                                      ErrorModelVariant::kPaper);

/// Zero-order-hold discretization through the exponential of the stacked
/// [A B; 0 0] generator. C and D pass through unchanged.
DiscretePlant Discretize(const ContinuousPlant& ct, double T);

/// N-point shift register: x(k+1) = A_r x(k) + B_r y_ri(k), y = x[0].
DiscretePlant BuildRoadPlant(int N, double T);

AugmentedPlant Augment(const DiscretePlant& vehicle, const DiscretePlant& road,
                       const SchedulingPoint& rho, double T);

/// Builds error model, discretization, and augmentation in one go.
AugmentedPlant BuildAugmentedPlant(const VehicleParams& params,
                                   const PreviewConfig& config,
                                   const SchedulingPoint& rho,
                                   ErrorModelVariant variant =
                                       ErrorModelVariant::kPaper);

/// Vertex family over the 3-vertex speed polytope. The uncertain family adds
/// the four (Caf, Car) stiffness corners at every speed vertex, ordered
/// (-,-), (-,+), (+,-), (+,+). Zero uncertainty yields the nominal family.
std::vector<VertexModel> EnumerateVertexModels(
    const VehicleParams& params, const PreviewConfig& config,
    ModelFamily family,
    ErrorModelVariant variant = ErrorModelVariant::kPaper);

/// Multiplier pairs applied to (Caf, Car) for a family.
std::vector<std::array<double, 2>> StiffnessCorners(double uncertainty,
                                                    ModelFamily family);

}  // namespace lpvp
