#include "lpvp/simulator.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace lpvp {

// ---------------------------------------------------------------- Paths

void PathSpec::Validate() const {
  switch (kind) {
    case PathKind::kStraight:
      Require(length > 0.0, ErrorKind::kConfig, "path.length must be positive");
      break;
    case PathKind::kLaneChange:
      Require(length > 0.0 && transition_length > 0.0 && transition_start >= 0.0 &&
                  transition_start + transition_length <= length,
              ErrorKind::kConfig,
              "lane change transition must lie inside the path length");
      Require(std::isfinite(lateral_shift), ErrorKind::kConfig,
              "path.lateral_shift must be finite");
      break;
    case PathKind::kWaypoints:
      Require(waypoints.size() >= 2, ErrorKind::kConfig,
              "custom path needs at least two waypoints");
      for (size_t i = 1; i < waypoints.size(); ++i) {
        Require((waypoints[i] - waypoints[i - 1]).norm() > 0.0, ErrorKind::kConfig,
                "consecutive waypoints must differ");
      }
      break;
  }
}

const char* ToString(PathKind kind) {
  switch (kind) {
    case PathKind::kStraight: return "straight";
    case PathKind::kLaneChange: return "lane-change";
    case PathKind::kWaypoints: return "custom-waypoints";
  }
  return "unknown";
}

PathKind ParsePathKind(const std::string& text) {
  if (text == "straight") return PathKind::kStraight;
  if (text == "lane-change") return PathKind::kLaneChange;
  if (text == "custom-waypoints" || text == "waypoints") return PathKind::kWaypoints;
  Throw(ErrorKind::kConfig, "unknown path kind '" + text + "'");
}

namespace {

// Natural cubic spline through (t_i, y_i): second derivatives from the
// tridiagonal system with zero end moments.
struct CubicSpline {
  std::vector<double> t, y, m;

  CubicSpline(std::vector<double> tt, std::vector<double> yy)
      : t(std::move(tt)), y(std::move(yy)), m(t.size(), 0.0) {
    const size_t n = t.size();
    if (n < 3) return;
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), r(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
      a[i] = h0;
      b[i] = 2.0 * (h0 + h1);
      c[i] = h1;
      r[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    m[n - 1] = r[n - 1] / b[n - 1];
    for (size_t i = n - 1; i-- > 0;) m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
  }

  // Value, first and second derivative.
  std::array<double, 3> Eval(double u) const {
    const auto it = std::upper_bound(t.begin(), t.end(), u);
    size_t k = it == t.begin() ? 0 : static_cast<size_t>(it - t.begin()) - 1;
    k = std::min(k, t.size() - 2);
    const double h = t[k + 1] - t[k];
    const double A = (t[k + 1] - u) / h, B = (u - t[k]) / h;
    const double v = A * y[k] + B * y[k + 1] +
                     ((A * A * A - A) * m[k] + (B * B * B - B) * m[k + 1]) * h * h / 6.0;
    const double d1 = (y[k + 1] - y[k]) / h -
                      (3.0 * A * A - 1.0) / 6.0 * h * m[k] +
                      (3.0 * B * B - 1.0) / 6.0 * h * m[k + 1];
    const double d2 = A * m[k] + B * m[k + 1];
    return {v, d1, d2};
  }
};

}  // namespace

Path::Path(Curve curve, double u0, double u1) : curve_(std::move(curve)) {
  // Arc length table by Simpson's rule on |r'(u)|.
  const int intervals = std::max(2000, static_cast<int>(std::ceil((u1 - u0) / 0.05)));
  u_table_.resize(intervals + 1);
  s_table_.resize(intervals + 1);
  s_table_[0] = 0.0;
  const double h = (u1 - u0) / intervals;
  auto speed = [&](double u) { return curve_(u).d1.norm(); };
  double prev = speed(u0);
  for (int i = 0; i <= intervals; ++i) u_table_[i] = u0 + h * i;
  u_table_[intervals] = u1;
  for (int i = 1; i <= intervals; ++i) {
    const double mid = speed(u0 + h * (i - 0.5));
    const double end = speed(u_table_[i]);
    s_table_[i] = s_table_[i - 1] + h / 6.0 * (prev + 4.0 * mid + end);
    prev = end;
  }
}

Path Path::Generate(const PathSpec& spec) {
  spec.Validate();
  switch (spec.kind) {
    case PathKind::kStraight:
      return Path(
          [](double u) {
            return Derivatives{{u, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
          },
          0.0, spec.length);
    case PathKind::kLaneChange: {
      const double x0 = spec.transition_start;
      const double L = spec.transition_length;
      const double shift = spec.lateral_shift;
      return Path(
          [=](double u) {
            const double t = std::clamp((u - x0) / L, 0.0, 1.0);
            // 10t^3 - 15t^4 + 6t^5 and its derivatives.
            const double q = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
            const double dq = 30.0 * t * t * (1.0 - t) * (1.0 - t);
            const double ddq = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
            return Derivatives{{u, shift * q},
                               {1.0, shift * dq / L},
                               {0.0, shift * ddq / (L * L)}};
          },
          0.0, spec.length);
    }
    case PathKind::kWaypoints: {
      std::vector<double> t{0.0}, xs, ys;
      for (size_t i = 0; i < spec.waypoints.size(); ++i) {
        if (i > 0) {
          t.push_back(t.back() + (spec.waypoints[i] - spec.waypoints[i - 1]).norm());
        }
        xs.push_back(spec.waypoints[i].x());
        ys.push_back(spec.waypoints[i].y());
      }
      const CubicSpline sx(t, xs), sy(t, ys);
      return Path(
          [sx, sy](double u) {
            const auto x = sx.Eval(u), y = sy.Eval(u);
            return Derivatives{{x[0], y[0]}, {x[1], y[1]}, {x[2], y[2]}};
          },
          0.0, t.back());
    }
  }
  Throw(ErrorKind::kConfig, "unknown path kind");
}

PathPoint Path::Evaluate(double u) const {
  const Derivatives d = curve_(u);
  PathPoint p;
  p.X = d.p.x();
  p.Y = d.p.y();
  p.heading = std::atan2(d.d1.y(), d.d1.x());
  const double speed = d.d1.norm();
  p.curvature = (d.d1.x() * d.d2.y() - d.d1.y() * d.d2.x()) / (speed * speed * speed);
  return p;
}

PathPoint Path::At(double s) const {
  if (s <= 0.0 || s >= length()) {
    const bool before = s <= 0.0;
    PathPoint end = Evaluate(before ? u_table_.front() : u_table_.back());
    const double ds = before ? s : s - length();
    end.X += ds * std::cos(end.heading);
    end.Y += ds * std::sin(end.heading);
    end.curvature = ds == 0.0 ? end.curvature : 0.0;
    return end;
  }
  const auto it = std::upper_bound(s_table_.begin(), s_table_.end(), s);
  const size_t k = static_cast<size_t>(it - s_table_.begin()) - 1;
  double u = u_table_[k] + (u_table_[k + 1] - u_table_[k]) * (s - s_table_[k]) /
                               (s_table_[k + 1] - s_table_[k]);
  // One Newton correction on s(u) with ds/du = |r'(u)|, integrated from the
  // table node by the midpoint rule.
  const double su = s_table_[k] +
                    (u - u_table_[k]) * curve_(0.5 * (u + u_table_[k])).d1.norm();
  u -= (su - s) / curve_(u).d1.norm();
  return Evaluate(u);
}

// ---------------------------------------------------------------- Speed

SpeedProfile SpeedProfile::Constant(double vx) {
  SpeedProfile p;
  p.kind = Kind::kConstant;
  p.values = {vx};
  return p;
}

SpeedProfile SpeedProfile::Ramp(double v0, double v1, double duration) {
  SpeedProfile p;
  p.kind = Kind::kPiecewiseLinear;
  p.times = {0.0, duration};
  p.values = {v0, v1};
  return p;
}

void SpeedProfile::Validate() const {
  Require(!values.empty(), ErrorKind::kConfig, "speed profile needs values");
  for (double v : values) {
    Require(std::isfinite(v) && v > 0.0, ErrorKind::kConfig,
            "speed values must be positive");
  }
  if (kind == Kind::kPiecewiseLinear) {
    Require(times.size() == values.size(), ErrorKind::kConfig,
            "speed profile needs one time per value");
    for (size_t i = 1; i < times.size(); ++i) {
      Require(times[i] > times[i - 1], ErrorKind::kConfig,
              "speed profile times must increase");
    }
  }
}

double SpeedProfile::At(double t) const {
  if (kind == Kind::kConstant || values.size() == 1) return values.front();
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const size_t k = static_cast<size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

const char* ToString(PreviewFrame frame) {
  return frame == PreviewFrame::kVehicle ? "vehicle" : "reference";
}

PreviewFrame ParsePreviewFrame(const std::string& text) {
  if (text == "vehicle") return PreviewFrame::kVehicle;
  if (text == "reference") return PreviewFrame::kReference;
  Throw(ErrorKind::kConfig, "unknown preview frame '" + text + "'");
}

// ---------------------------------------------------------------- Simulation

VectorXd BuildPreviewVector(const Path& path, double s, double X, double Y,
                            double psi, double vx, double T, int N) {
  Require(std::isfinite(X) && std::isfinite(Y) && std::isfinite(psi),
          ErrorKind::kSimulation, "vehicle pose is not finite");
  VectorXd x_r(N);
  const double c = std::cos(psi), sn = std::sin(psi);
  for (int i = 0; i < N; ++i) {
    const PathPoint q = path.At(s + (i + 1) * vx * T);
    x_r[i] = -sn * (q.X - X) + c * (q.Y - Y);
  }
  return x_r;
}

SimState Step(const SimState& state, const DiscretePlant& model,
              const RowVectorXd& K, const VectorXd& preview, const Path& path,
              double T, TraceRecord* record) {
  const int n_v = static_cast<int>(state.x_ve.size());
  Require(K.size() == n_v + preview.size(), ErrorKind::kDomain,
          "gain length does not match the state and preview sizes");
  const double u = -(K.head(n_v).dot(state.x_ve) + K.tail(preview.size()).dot(preview));
  const double psi_dot_des = state.vx * path.At(state.s).curvature;

  SimState next = state;
  next.x_ve = model.A * state.x_ve + model.B_u.col(0) * u +
              model.B_w.col(0) * psi_dot_des;
  // Kinematic pose: heading rate is the desired rate plus the error rate;
  // body lateral velocity is the error rate minus the heading contribution.
  const double yaw_rate = state.x_ve[3] + psi_dot_des;
  const double v_lat = state.x_ve[1] - state.vx * state.x_ve[2];
  const double psi_mid = state.psi + 0.5 * T * yaw_rate;
  next.X += T * (state.vx * std::cos(psi_mid) - v_lat * std::sin(psi_mid));
  next.Y += T * (state.vx * std::sin(psi_mid) + v_lat * std::cos(psi_mid));
  next.psi += T * yaw_rate;
  next.s += state.vx * T;

  if (record) {
    record->X = state.X;
    record->Y = state.Y;
    record->psi = state.psi;
    record->y_err = state.x_ve[0];
    record->vy = state.x_ve[1];
    record->psi_err = state.x_ve[2];
    record->psi_rate = state.x_ve[3];
    record->u_steer = u;
    record->vx = state.vx;
    record->road_head = preview.size() > 0 ? preview[0] : 0.0;
  }
  return next;
}

SimulationTrace Run(const Scenario& scenario, const GainSchedule& schedule,
                    const SimOptions& options) {
  options.vehicle.Validate();
  options.preview.Validate();
  scenario.speed.Validate();
  schedule.Validate();
  const int N = options.preview.N;
  const double T = options.preview.T;
  Require(schedule.n_r == N, ErrorKind::kConfig,
          "schedule preview length does not match the configured N");
  const Path path = Path::Generate(scenario.path);

  double duration = scenario.duration;
  if (duration <= 0.0) {
    if (scenario.speed.kind == SpeedProfile::Kind::kConstant) {
      duration = path.length() / scenario.speed.values.front() + 5.0;
    } else {
      duration = scenario.speed.times.back() + 5.0;
    }
  }
  const int steps = static_cast<int>(std::lround(duration / T));

  SimulationTrace trace;
  trace.scenario = scenario.name;
  trace.T = T;
  trace.records.reserve(steps);

  SimState state;
  state.x_ve = scenario.initial_error;
  if (scenario.initial_offset_std > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, scenario.initial_offset_std);
    state.x_ve[0] += normal(rng);
  }
  const PathPoint start = path.At(0.0);
  state.X = start.X - state.x_ve[0] * std::sin(start.heading);
  state.Y = start.Y + state.x_ve[0] * std::cos(start.heading);
  state.psi = start.heading + state.x_ve[2];

  DiscretePlant model;
  double model_vx = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < steps; ++k) {
    const double t = k * T;
    const BarycentricCoords alpha = Barycentric(schedule.polytope, scenario.speed.At(t));
    trace.speed_clamped = trace.speed_clamped || alpha.clamped;
    state.vx = std::clamp(scenario.speed.At(t), schedule.polytope.v_min,
                          schedule.polytope.v_max);
    if (state.vx != model_vx) {
      model = Discretize(BuildErrorModelCt(options.vehicle, state.vx, options.variant), T);
      model_vx = state.vx;
    }
    const RowVectorXd K = InterpolateGains(schedule, alpha);
    VectorXd preview;
    if (options.frame == PreviewFrame::kVehicle) {
      preview = BuildPreviewVector(path, state.s, state.X, state.Y, state.psi,
                                   state.vx, T, N);
    } else {
      const PathPoint ref = path.At(state.s);
      preview = BuildPreviewVector(path, state.s, ref.X, ref.Y, ref.heading,
                                   state.vx, T, N);
    }
    TraceRecord record;
    record.t = t;
    record.alpha = alpha.alpha;
    const SimState next = Step(state, model, K, preview, path, T, &record);
    trace.records.push_back(record);
    if (!next.x_ve.allFinite() || !std::isfinite(next.X) || !std::isfinite(next.Y)) {
      trace.aborted = true;
      std::ostringstream msg;
      msg << "state became non-finite at t = " << t + T << " s";
      trace.message = msg.str();
      break;
    }
    state = next;
  }
  if (trace.speed_clamped && trace.message.empty()) {
    trace.message = "speed outside the scheduling interval was clamped";
  }
  return trace;
}

TraceSummary SimulationTrace::Summary() const {
  TraceSummary s;
  if (records.empty()) return s;
  const double t_end = records.back().t;
  const double window = 1.0 - 0.5 * T;
  double sum_sq = 0.0;
  for (const auto& r : records) {
    const double e = std::abs(r.y_err);
    s.max_abs_error = std::max(s.max_abs_error, e);
    s.max_abs_steer = std::max(s.max_abs_steer, std::abs(r.u_steer));
    s.max_abs_yaw_rate = std::max(s.max_abs_yaw_rate, std::abs(r.psi_rate));
    if (r.t >= t_end - window) s.steady_state_error = std::max(s.steady_state_error, e);
    sum_sq += r.y_err * r.y_err;
  }
  s.rms_error = std::sqrt(sum_sq / records.size());
  return s;
}

void WriteTraceCsv(const SimulationTrace& trace, std::ostream& out) {
  out << "t,X,Y,psi,y_err,vy,psi_err,psi_rate,u_steer,Vx,alpha1,alpha2,alpha3\n";
  out << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.t << ',' << r.X << ',' << r.Y << ',' << r.psi << ',' << r.y_err << ','
        << r.vy << ',' << r.psi_err << ',' << r.psi_rate << ',' << r.u_steer << ','
        << r.vx << ',' << r.alpha[0] << ',' << r.alpha[1] << ',' << r.alpha[2]
        << '\n';
  }
}

SimulationTrace ReadTraceCsv(std::istream& in, const std::string& name) {
  SimulationTrace trace;
  trace.scenario = name;
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorKind::kIo,
          "trace CSV is empty");
  Require(line.rfind("t,X,Y,psi,y_err", 0) == 0, ErrorKind::kIo,
          "trace CSV header is not recognized");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 13> v{};
    std::istringstream row(line);
    std::string cell;
    int i = 0;
    while (std::getline(row, cell, ',') && i < 13) v[i++] = std::stod(cell);
    Require(i == 13, ErrorKind::kIo, "trace CSV row has the wrong column count");
    TraceRecord r;
    r.t = v[0];
    r.X = v[1];
    r.Y = v[2];
    r.psi = v[3];
    r.y_err = v[4];
    r.vy = v[5];
    r.psi_err = v[6];
    r.psi_rate = v[7];
    r.u_steer = v[8];
    r.vx = v[9];
    r.alpha = {v[10], v[11], v[12]};
    trace.records.push_back(r);
  }
  if (trace.records.size() >= 2) {
    trace.T = trace.records[1].t - trace.records[0].t;
  }
  return trace;
}

}  // namespace lpvp
