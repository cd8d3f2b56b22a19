#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lpvp/common.h"

namespace lpvp {

/// Triangle in the (Vx, 1/Vx) plane enclosing the speed arc: the two interval
/// end points and the intersection of the arc's tangents there.
struct SpeedPolytope {
  std::array<Eigen::Vector2d, 3> vertices;
  double v_min = 0.0;
  double v_max = 0.0;
};

SpeedPolytope BuildPolytope(double v_min, double v_max);

struct BarycentricCoords {
  std::array<double, 3> alpha{1.0, 0.0, 0.0};
  /// True when the requested speed was outside [v_min, v_max] and clamped.
  bool clamped = false;
};

/// Coordinates of (Vx, 1/Vx) from the exactly determined affine system.
/// Speeds outside the interval are clamped to it and flagged.
BarycentricCoords Barycentric(const SpeedPolytope& poly, double vx);

/// Coordinates of an arbitrary plane point (may be negative outside).
std::array<double, 3> BarycentricOfPoint(const SpeedPolytope& poly,
                                         const Eigen::Vector2d& point);

/// kGain blends vertex gains directly. kLyapunov blends the (Z_i, P_i) pairs
/// and recovers K = -(sum a_i Z_i)(sum a_i P_i)^-1.
enum class InterpolationMode { kGain, kLyapunov };

/// Gains follow u = -[Kv Kr] x. Z is stored in the LMI convention
/// (u = Z P^-1 x), so Kv Kr = -Z P^-1 at a vertex.
struct VertexGain {
  RowVectorXd Kv;
  RowVectorXd Kr;
  std::optional<MatrixXd> P;
  std::optional<MatrixXd> Z;

  RowVectorXd K() const;
};

struct ScheduleMetadata {
  std::string method = "lq";  // lq | hinf-common-p | hinf-paper
  std::optional<double> mu;
  std::optional<double> zeta_p;
  std::string pole_scope;
  bool uncertain = false;
  double stiffness_uncertainty = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double R = 0.0;
  double T = 0.0;
  std::string model_variant = "paper";
  std::string timestamp;
};

struct GainSchedule {
  SpeedPolytope polytope;
  std::vector<VertexGain> vertices;
  InterpolationMode mode = InterpolationMode::kGain;
  int n_v = 4;
  int n_r = 0;
  ScheduleMetadata metadata;

  void Validate() const;
};

/// Full gain row [Kv Kr] at the given coordinates.
RowVectorXd InterpolateGains(const GainSchedule& schedule,
                             const BarycentricCoords& alpha);

/// Convenience: barycentric lookup followed by interpolation.
RowVectorXd GainsAtSpeed(const GainSchedule& schedule, double vx);

const char* ToString(InterpolationMode mode);
InterpolationMode ParseInterpolationMode(const std::string& text);

}  // namespace lpvp
