#include "lpvp/scheduling.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpvp {

SpeedPolytope BuildPolytope(double v_min, double v_max) {
  Require(std::isfinite(v_min) && std::isfinite(v_max) && v_min > 0.0 &&
              v_min < v_max,
          ErrorKind::kDomain, "speed polytope needs 0 < v_min < v_max");
  SpeedPolytope poly;
  poly.v_min = v_min;
  poly.v_max = v_max;
  poly.vertices[0] = {v_min, 1.0 / v_min};
  poly.vertices[1] = {v_max, 1.0 / v_max};
  // Tangents of y = 1/x at a and b meet at x = 2ab/(a+b), y = 2/(a+b).
  poly.vertices[2] = {2.0 * v_min * v_max / (v_min + v_max),
                      2.0 / (v_min + v_max)};
  return poly;
}

std::array<double, 3> BarycentricOfPoint(const SpeedPolytope& poly,
                                         const Eigen::Vector2d& point) {
  Eigen::Matrix3d system;
  for (int i = 0; i < 3; ++i) {
    system(0, i) = poly.vertices[i].x();
    system(1, i) = poly.vertices[i].y();
    system(2, i) = 1.0;
  }
  const Eigen::Vector3d rhs(point.x(), point.y(), 1.0);
  const Eigen::Vector3d alpha = system.fullPivLu().solve(rhs);
  return {alpha[0], alpha[1], alpha[2]};
}

BarycentricCoords Barycentric(const SpeedPolytope& poly, double vx) {
  Require(std::isfinite(vx), ErrorKind::kDomain, "speed must be finite");
  BarycentricCoords out;
  double v = vx;
  if (v < poly.v_min || v > poly.v_max) {
    out.clamped = true;
    v = std::clamp(v, poly.v_min, poly.v_max);
  }
  // End points are exact vertices; avoid round-off there.
  if (v == poly.v_min) {
    out.alpha = {1.0, 0.0, 0.0};
    return out;
  }
  if (v == poly.v_max) {
    out.alpha = {0.0, 1.0, 0.0};
    return out;
  }
  out.alpha = BarycentricOfPoint(poly, {v, 1.0 / v});
  return out;
}

RowVectorXd VertexGain::K() const {
  RowVectorXd k(Kv.size() + Kr.size());
  k << Kv, Kr;
  return k;
}

void GainSchedule::Validate() const {
  Require(vertices.size() == 3, ErrorKind::kConfig,
          "gain schedule needs exactly three vertices");
  for (const auto& vertex : vertices) {
    Require(vertex.Kv.size() == n_v && vertex.Kr.size() == n_r,
            ErrorKind::kConfig, "vertex gain dimensions do not match (n_v, n_r)");
    if (mode == InterpolationMode::kLyapunov) {
      Require(vertex.P.has_value() && vertex.Z.has_value(), ErrorKind::kConfig,
              "Lyapunov interpolation needs P and Z at every vertex");
      Require(vertex.P->rows() == n_v + n_r && vertex.P->cols() == n_v + n_r &&
                  vertex.Z->cols() == n_v + n_r,
              ErrorKind::kConfig, "vertex P/Z dimensions do not match");
    }
  }
}

RowVectorXd InterpolateGains(const GainSchedule& schedule,
                             const BarycentricCoords& alpha) {
  Require(schedule.vertices.size() == 3, ErrorKind::kConfig,
          "gain schedule needs exactly three vertices");
  const auto& a = alpha.alpha;
  if (schedule.mode == InterpolationMode::kGain) {
    RowVectorXd k = a[0] * schedule.vertices[0].K();
    for (int i = 1; i < 3; ++i) k += a[i] * schedule.vertices[i].K();
    return k;
  }
  const auto& v0 = schedule.vertices[0];
  Require(v0.P && v0.Z, ErrorKind::kInterpolation,
          "Lyapunov interpolation needs P and Z at every vertex");
  MatrixXd p_hat = a[0] * *v0.P;
  MatrixXd z_hat = a[0] * *v0.Z;
  for (int i = 1; i < 3; ++i) {
    const auto& vi = schedule.vertices[i];
    Require(vi.P && vi.Z, ErrorKind::kInterpolation,
            "Lyapunov interpolation needs P and Z at every vertex");
    p_hat += a[i] * *vi.P;
    z_hat += a[i] * *vi.Z;
  }
  p_hat = 0.5 * (p_hat + p_hat.transpose());
  Eigen::LDLT<MatrixXd> ldlt(p_hat);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "interpolated Lyapunov matrix is singular (rcond " << rcond << ")";
    Throw(ErrorKind::kInterpolation, msg.str());
  }
  // K = -Z P^-1 with P symmetric.
  const MatrixXd k = -ldlt.solve(z_hat.transpose()).transpose();
  Require(k.rows() == 1, ErrorKind::kInterpolation,
          "only single-input schedules are supported");
  return k.row(0);
}

RowVectorXd GainsAtSpeed(const GainSchedule& schedule, double vx) {
  return InterpolateGains(schedule, Barycentric(schedule.polytope, vx));
}

const char* ToString(InterpolationMode mode) {
  return mode == InterpolationMode::kGain ? "gain" : "lyapunov";
}

InterpolationMode ParseInterpolationMode(const std::string& text) {
  if (text == "gain") return InterpolationMode::kGain;
  if (text == "lyapunov" || text == "paper") return InterpolationMode::kLyapunov;
  Throw(ErrorKind::kConfig, "unknown interpolation mode '" + text + "'");
}

}  // namespace lpvp
