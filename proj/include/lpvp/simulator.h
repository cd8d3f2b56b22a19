#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lpvp/common.h"
#include "lpvp/models.h"
#include "lpvp/scheduling.h"

namespace lpvp {

enum class PathKind { kStraight, kLaneChange, kWaypoints };

/// Lane change: a quintic smoothstep of `lateral_shift` over
/// [transition_start, transition_start + transition_length] in X, straight
/// before and after. Waypoints: natural cubic spline through the points,
/// parameterized by chord length.
struct PathSpec {
  PathKind kind = PathKind::kLaneChange;
  double length = 200.0;  // m, extent in X for straight and lane change
  double lateral_shift = 3.5;
  double transition_start = 50.0;
  double transition_length = 50.0;
  std::vector<Eigen::Vector2d> waypoints;

  void Validate() const;
};

const char* ToString(PathKind kind);
PathKind ParsePathKind(const std::string& text);

struct PathPoint {
  double X = 0.0;
  double Y = 0.0;
  double heading = 0.0;    // rad
  double curvature = 0.0;  // 1/m
};

/// Arc-length parameterized path. Queries outside [0, length()] continue
/// along straight lines from the end poses.
class Path {
 public:
  static Path Generate(const PathSpec& spec);

  PathPoint At(double s) const;
  double length() const { return s_table_.back(); }

 private:
  struct Derivatives {
    Eigen::Vector2d p, d1, d2;
  };
  using Curve = std::function<Derivatives(double)>;

  Path(Curve curve, double u0, double u1);
  PathPoint Evaluate(double u) const;

  Curve curve_;
  std::vector<double> u_table_;
  std::vector<double> s_table_;
};

/// Constant or piecewise-linear speed over time (held beyond the last knot).
struct SpeedProfile {
  enum class Kind { kConstant, kPiecewiseLinear };
  Kind kind = Kind::kConstant;
  std::vector<double> times;   // s, increasing; piecewise-linear only
  std::vector<double> values;  // m/s

  static SpeedProfile Constant(double vx);
  static SpeedProfile Ramp(double v0, double v1, double duration);
  double At(double t) const;
  void Validate() const;
};

/// Road state frame. kVehicle measures preview points in the current vehicle
/// frame. kReference measures them in the frame of the path point the
/// vehicle is abreast of, so the vehicle's own offset enters only through the
/// error state.
enum class PreviewFrame { kVehicle, kReference };

const char* ToString(PreviewFrame frame);
PreviewFrame ParsePreviewFrame(const std::string& text);

struct Scenario {
  std::string name = "lane-change";
  PathSpec path;
  SpeedProfile speed = SpeedProfile::Constant(10.0);
  /// Simulated time; zero picks path traversal time plus 5 s of settling.
  double duration = 0.0;
  Eigen::Vector4d initial_error = Eigen::Vector4d::Zero();
  /// Standard deviation of a random initial lateral offset (m), drawn from
  /// the run seed.
  double initial_offset_std = 0.0;
};

struct SimOptions {
  VehicleParams vehicle;
  PreviewConfig preview;
  ErrorModelVariant variant = ErrorModelVariant::kPaper;
  PreviewFrame frame = PreviewFrame::kReference;
  std::uint64_t seed = 0;
};

struct SimState {
  Eigen::Vector4d x_ve = Eigen::Vector4d::Zero();  // [y, V_y, Psi, Psi_dot]
  double X = 0.0;
  double Y = 0.0;
  double psi = 0.0;
  double s = 0.0;
  double vx = 0.0;
};

struct TraceRecord {
  double t = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double psi = 0.0;
  double y_err = 0.0;
  double vy = 0.0;
  double psi_err = 0.0;
  double psi_rate = 0.0;
  double u_steer = 0.0;
  double vx = 0.0;
  std::array<double, 3> alpha{0.0, 0.0, 0.0};
  double road_head = 0.0;  // x_r[0]; not part of the CSV
};

struct TraceSummary {
  double max_abs_error = 0.0;
  double steady_state_error = 0.0;  // max |y| over the final second
  double rms_error = 0.0;
  double max_abs_steer = 0.0;
  double max_abs_yaw_rate = 0.0;
};

struct SimulationTrace {
  std::string scenario;
  double T = 0.0;
  std::vector<TraceRecord> records;
  bool aborted = false;
  bool speed_clamped = false;
  std::string message;

  TraceSummary Summary() const;
};

/// Lateral coordinates of the path points at arc distance (i+1) Vx T ahead
/// of s, expressed in the frame at (X, Y, psi).
VectorXd BuildPreviewVector(const Path& path, double s, double X, double Y,
                            double psi, double vx, double T, int N);

/// One closed-loop step. `model` is the discrete vehicle error model at the
/// current speed; K = [Kv Kr] with u = -K x.
SimState Step(const SimState& state, const DiscretePlant& model,
              const RowVectorXd& K, const VectorXd& preview, const Path& path,
              double T, TraceRecord* record);

SimulationTrace Run(const Scenario& scenario, const GainSchedule& schedule,
                    const SimOptions& options);

/// CSV columns: t,X,Y,psi,y_err,vy,psi_err,psi_rate,u_steer,Vx,alpha1,alpha2,alpha3
void WriteTraceCsv(const SimulationTrace& trace, std::ostream& out);
SimulationTrace ReadTraceCsv(std::istream& in, const std::string& name = "");

}  // namespace lpvp
