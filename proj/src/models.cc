#include "lpvp/models.h"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "lpvp/scheduling.h"

namespace lpvp {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kSynthesis: return "synthesis error";
    case ErrorKind::kConvergence: return "convergence error";
    case ErrorKind::kInterpolation: return "interpolation error";
    case ErrorKind::kNumerical: return "numerical error";
    case ErrorKind::kSimulation: return "simulation error";
    case ErrorKind::kVerification: return "verification error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

void VehicleParams::Validate() const {
  auto positive = [](double value, const char* name) {
    Require(std::isfinite(value) && value > 0.0, ErrorKind::kDomain,
            std::string("vehicle.") + name + " must be strictly positive");
  };
  positive(m, "m");
  positive(Iz, "Iz");
  positive(Lf, "Lf");
  positive(Lr, "Lr");
  positive(Caf, "Caf");
  positive(Car, "Car");
  Require(std::isfinite(stiffness_uncertainty) && stiffness_uncertainty >= 0.0 &&
              stiffness_uncertainty < 1.0,
          ErrorKind::kDomain,
          "vehicle.stiffness_uncertainty must lie in [0, 1)");
}

VehicleParams VehicleParams::WithStiffness(double front_multiplier,
                                           double rear_multiplier) const {
  VehicleParams out = *this;
  out.Caf *= front_multiplier;
  out.Car *= rear_multiplier;
  return out;
}

void PreviewConfig::Validate() const {
  Require(std::isfinite(T) && T > 0.0, ErrorKind::kDomain,
          "preview.T must be positive");
  Require(N >= 1, ErrorKind::kDomain, "preview.N must be at least 1");
  Require(std::isfinite(v_min) && std::isfinite(v_max) && v_min > 0.0 &&
              v_min < v_max,
          ErrorKind::kDomain, "preview speed interval needs 0 < v_min < v_max");
}

SchedulingPoint SchedulingPoint::OnCurve(double vx) {
  Require(std::isfinite(vx) && vx > 0.0, ErrorKind::kDomain,
          "longitudinal speed must be positive");
  return {vx, 1.0 / vx};
}

void DiscretePlant::Validate() const {
  const auto n = A.rows();
  Require(A.cols() == n, ErrorKind::kDomain, "A must be square");
  Require(B_u.rows() == n, ErrorKind::kDomain, "B_u row count mismatch");
  Require(B_w.rows() == n || B_w.size() == 0, ErrorKind::kDomain,
          "B_w row count mismatch");
  Require(C.cols() == n, ErrorKind::kDomain, "C column count mismatch");
  Require(D.rows() == C.rows() && D.cols() == B_u.cols(), ErrorKind::kDomain,
          "D dimensions mismatch");
  Require(T > 0.0, ErrorKind::kDomain, "sampling period must be positive");
}

ContinuousPlant BuildErrorModelCt(const VehicleParams& params,
                                  const SchedulingPoint& rho,
                                  ErrorModelVariant variant) {
  Require(std::isfinite(rho.vx) && rho.vx > 0.0 && std::isfinite(rho.inv_vx) &&
              rho.inv_vx > 0.0,
          ErrorKind::kDomain, "longitudinal speed must be positive");
  const double m = params.m;
  const double Iz = params.Iz;
  const double c_sum = 2.0 * (params.Caf + params.Car);
  const double c_moment = 2.0 * (params.Caf * params.Lf - params.Car * params.Lr);
  const double c_inertia =
      2.0 * (params.Caf * params.Lf * params.Lf +
             params.Car * params.Lr * params.Lr);
  const double vx = rho.vx;
  const double inv = rho.inv_vx;

  ContinuousPlant ct;
  ct.A = MatrixXd::Zero(4, 4);
  ct.A(0, 1) = 1.0;
  ct.A(1, 1) = -c_sum / m * inv;
  ct.A(1, 2) = c_sum / m;
  ct.A(1, 3) = -c_moment / m * inv;
  if (variant == ErrorModelVariant::kPaper) ct.A(1, 3) -= vx;
  ct.A(2, 3) = 1.0;
  ct.A(3, 1) = -c_moment / Iz * inv;
  ct.A(3, 2) = c_moment / Iz;
  ct.A(3, 3) = -c_inertia / Iz * inv;

  ct.B_u = MatrixXd::Zero(4, 1);
  ct.B_u(1, 0) = 2.0 * params.Caf / m;
  ct.B_u(3, 0) = 2.0 * params.Caf * params.Lf / Iz;

  ct.B_w = MatrixXd::Zero(4, 1);
  ct.B_w(1, 0) = -vx - c_moment / m * inv;
  ct.B_w(3, 0) = -c_inertia / Iz * inv;

  ct.C = MatrixXd::Identity(4, 4);
  ct.D = MatrixXd::Zero(4, 1);
  return ct;
}

ContinuousPlant BuildErrorModelCt(const VehicleParams& params, double vx,
                                  ErrorModelVariant variant) {
  return BuildErrorModelCt(params, SchedulingPoint::OnCurve(vx), variant);
}

DiscretePlant Discretize(const ContinuousPlant& ct, double T) {
  Require(std::isfinite(T) && T > 0.0, ErrorKind::kDomain,
          "sampling period must be positive");
  const auto n = ct.A.rows();
  const auto mu = ct.B_u.cols();
  const auto mw = ct.B_w.cols();
  MatrixXd generator = MatrixXd::Zero(n + mu + mw, n + mu + mw);
  generator.topLeftCorner(n, n) = ct.A;
  generator.block(0, n, n, mu) = ct.B_u;
  if (mw > 0) generator.block(0, n + mu, n, mw) = ct.B_w;
  const MatrixXd phi = (generator * T).exp();

  DiscretePlant d;
  d.A = phi.topLeftCorner(n, n);
  d.B_u = phi.block(0, n, n, mu);
  d.B_w = phi.block(0, n + mu, n, mw);
  d.C = ct.C;
  d.D = ct.D;
  d.T = T;
  return d;
}

DiscretePlant BuildRoadPlant(int N, double T) {
  Require(N >= 1, ErrorKind::kDomain, "road plant needs at least one point");
  Require(std::isfinite(T) && T > 0.0, ErrorKind::kDomain,
          "sampling period must be positive");
  DiscretePlant road;
  road.A = MatrixXd::Zero(N, N);
  for (int i = 0; i + 1 < N; ++i) road.A(i, i + 1) = 1.0;
  road.B_u = MatrixXd::Zero(N, 1);
  road.B_u(N - 1, 0) = 1.0;
  road.B_w = MatrixXd::Zero(N, 0);
  road.C = MatrixXd::Zero(1, N);
  road.C(0, 0) = 1.0;
  road.D = MatrixXd::Zero(1, 1);
  road.T = T;
  return road;
}

AugmentedPlant Augment(const DiscretePlant& vehicle, const DiscretePlant& road,
                       const SchedulingPoint& rho, double T) {
  Require(vehicle.states() == 4, ErrorKind::kDomain,
          "vehicle error model must have 4 states");
  Require(vehicle.disturbances() == 1, ErrorKind::kDomain,
          "vehicle error model must carry the desired yaw rate channel");
  Require(std::abs(vehicle.T - T) <= 1e-12 * T && std::abs(road.T - T) <= 1e-12 * T,
          ErrorKind::kConfig, "vehicle and road sampling periods differ");
  Require(rho.vx > 0.0 && rho.inv_vx > 0.0, ErrorKind::kDomain,
          "longitudinal speed must be positive");
  const int nv = 4;
  const int nr = road.states();
  const int n = nv + nr;

  AugmentedPlant aug;
  aug.n_v = nv;
  aug.n_r = nr;
  aug.rho = rho;
  DiscretePlant& p = aug.plant;
  p.T = T;
  p.A = MatrixXd::Zero(n, n);
  p.A.topLeftCorner(nv, nv) = vehicle.A;
  p.A.bottomRightCorner(nr, nr) = road.A;
  p.B_u = MatrixXd::Zero(n, 1);
  p.B_u.topRows(nv) = vehicle.B_u;
  p.B_w = MatrixXd::Zero(n, 2);
  p.B_w.bottomRows(nr).col(0) = road.B_u.col(0);
  p.B_w.topRows(nv).col(1) = vehicle.B_w.col(0);

  p.C = MatrixXd::Zero(2, n);
  p.C(0, 0) = 1.0;
  p.C(0, nv) = -1.0;
  const double scale = rho.inv_vx / T;
  p.C(1, 2) = 1.0;
  p.C(1, nv) += scale;
  if (nr >= 2) p.C(1, nv + 1) -= scale;
  p.D = MatrixXd::Zero(2, 1);
  return aug;
}

AugmentedPlant BuildAugmentedPlant(const VehicleParams& params,
                                   const PreviewConfig& config,
                                   const SchedulingPoint& rho,
                                   ErrorModelVariant variant) {
  const DiscretePlant vehicle =
      Discretize(BuildErrorModelCt(params, rho, variant), config.T);
  const DiscretePlant road = BuildRoadPlant(config.N, config.T);
  return Augment(vehicle, road, rho, config.T);
}

std::vector<std::array<double, 2>> StiffnessCorners(double uncertainty,
                                                    ModelFamily family) {
  if (family == ModelFamily::kNominal || uncertainty == 0.0) {
    return {{1.0, 1.0}};
  }
  const double lo = 1.0 - uncertainty;
  const double hi = 1.0 + uncertainty;
  return {{lo, lo}, {lo, hi}, {hi, lo}, {hi, hi}};
}

std::vector<VertexModel> EnumerateVertexModels(const VehicleParams& params,
                                               const PreviewConfig& config,
                                               ModelFamily family,
                                               ErrorModelVariant variant) {
  params.Validate();
  config.Validate();
  const SpeedPolytope poly = BuildPolytope(config.v_min, config.v_max);
  const auto corners = StiffnessCorners(params.stiffness_uncertainty, family);
  std::vector<VertexModel> models;
  models.reserve(3 * corners.size());
  for (int v = 0; v < 3; ++v) {
    const SchedulingPoint rho{poly.vertices[v].x(), poly.vertices[v].y()};
    for (const auto& corner : corners) {
      VertexModel model;
      model.plant = BuildAugmentedPlant(
          params.WithStiffness(corner[0], corner[1]), config, rho, variant);
      model.speed_vertex_index = v;
      model.stiffness_corner = corner;
      models.push_back(std::move(model));
    }
  }
  return models;
}

}  // namespace lpvp
