#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gemini/core_components.hpp"
#include "gemini/geometry.hpp"
#include "gemini/rng.hpp"

namespace gemini {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// Timestamped planar poses; headings are stored wrapped to (-pi, pi].
struct Trajectory : Component {
  std::vector<double> timestamps;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> heading;

  std::string_view type_name() const override { return "Trajectory"; }
  std::size_t size() const { return timestamps.size(); }

  void push_back(double t, const Pose2& p) {
    timestamps.push_back(t);
    x.push_back(p.x);
    y.push_back(p.y);
    heading.push_back(wrap_angle(p.heading));
  }

  Pose2 pose(std::size_t i) const { return {x[i], y[i], heading[i]}; }

  std::vector<Attribute> attributes() const override {
    return {{"timestamps", to_array(timestamps)}, {"x", to_array(x)}, {"y", to_array(y)}, {"heading", to_array(heading)}};
  }

  /// `samples` takes a mapping with all four columns, as returned by the
  /// trajectory initializers.
  void assign(std::string_view name, const Value& v) override {
    if (name == "timestamps") timestamps = as_vector(v, name);
    else if (name == "x") x = as_vector(v, name);
    else if (name == "y") y = as_vector(v, name);
    else if (name == "heading") {
      heading = as_vector(v, name);
      for (auto& h : heading) h = wrap_angle(h);
    } else if (name == "samples") {
      if (!v.is_map()) type_mismatch(name, "mapping with timestamps, x, y, heading", v);
      for (const char* key : {"timestamps", "x", "y", "heading"}) {
        const Value* col = find(v.map(), key);
        if (!col) fail(Errc::AttributeTypeMismatch, std::string("'samples' is missing '") + key + "'");
        assign(key, *col);
      }
    } else {
      unknown_attribute(name);
    }
  }

  /// Length >= 1 unless `allow_empty`, equal column lengths, strictly
  /// increasing finite timestamps.
  void check(bool allow_empty = false) const {
    const std::size_t n = timestamps.size();
    if (x.size() != n || y.size() != n || heading.size() != n)
      fail(Errc::InvalidTrajectory, "trajectory columns have different lengths");
    if (n == 0 && !allow_empty) fail(Errc::InvalidTrajectory, "trajectory is empty");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(timestamps[i]) || !std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(heading[i]))
        fail(Errc::InvalidTrajectory, "trajectory contains non-finite values");
      if (i > 0 && !(timestamps[i] > timestamps[i - 1]))
        fail(Errc::NonMonotonicTimestamps, "trajectory timestamps must be strictly increasing");
    }
  }

  void validate() const override { check(); }
};

/// Constant-speed traversal of a polyline sampled every `dt`, starting at
/// `t0`. The final waypoint is always the last sample.
inline Trajectory plan_trajectory(std::span<const Waypoint> waypoints, double speed, double dt, double t0 = 0.0) {
  if (waypoints.size() < 2) fail(Errc::DegenerateSegment, "at least two waypoints are required");
  if (!(speed > 0.0) || !std::isfinite(speed)) fail(Errc::InvalidSpeed, "speed must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(Errc::InvalidArgument, "dt must be positive");

  const std::size_t segments = waypoints.size() - 1;
  std::vector<double> start(segments), length(segments), dir(segments);
  double total = 0.0;
  for (std::size_t i = 0; i < segments; ++i) {
    const double dx = waypoints[i + 1].x - waypoints[i].x, dy = waypoints[i + 1].y - waypoints[i].y;
    length[i] = std::hypot(dx, dy);
    if (!(length[i] > 0.0)) fail(Errc::DegenerateSegment, "waypoints " + std::to_string(i) + " and " +
                                                             std::to_string(i + 1) + " coincide");
    start[i] = total;
    dir[i] = std::atan2(dy, dx);
    total += length[i];
  }

  auto at = [&](double s) {
    // Segment i covers [start_i, start_i + length_i); a corner belongs to the
    // segment that leaves it.
    std::size_t i = static_cast<std::size_t>(std::upper_bound(start.begin(), start.end(), s) - start.begin()) - 1;
    const double u = (s - start[i]) / length[i];
    const auto& a = waypoints[i];
    const auto& b = waypoints[i + 1];
    return Pose2{a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u, dir[i]};
  };

  Trajectory traj;
  const double step = speed * dt;
  const double tol = 1e-9 * std::max(1.0, total);
  for (std::uint64_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * step;
    if (s >= total - tol) break;
    traj.push_back(t0 + static_cast<double>(k) * dt, at(s));
  }
  const auto& last = waypoints.back();
  traj.push_back(t0 + total / speed, {last.x, last.y, dir.back()});
  return traj;
}

/// Linear interpolation in x, y and shortest-arc interpolation in heading.
/// Times outside the trajectory clamp to the boundary pose.
inline Pose2 sample_trajectory(const Trajectory& traj, double t) {
  if (traj.size() == 0) fail(Errc::InvalidTrajectory, "cannot sample an empty trajectory");
  const auto& ts = traj.timestamps;
  if (!(t > ts.front())) return traj.pose(0);
  if (t >= ts.back()) return traj.pose(ts.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  const double u = (t - ts[i]) / (ts[i + 1] - ts[i]);
  // Exact half-turn differences resolve counter-clockwise (wrap_angle maps -pi to +pi).
  const double dh = wrap_angle(traj.heading[i + 1] - traj.heading[i]);
  return {traj.x[i] + (traj.x[i + 1] - traj.x[i]) * u, traj.y[i] + (traj.y[i + 1] - traj.y[i]) * u,
          wrap_angle(traj.heading[i] + dh * u)};
}

inline Trajectory resample(const Trajectory& traj, std::span<const double> timestamps) {
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      fail(Errc::NonMonotonicTimestamps, "resample timestamps must be strictly increasing");
  Trajectory out;
  for (double t : timestamps) out.push_back(t, sample_trajectory(traj, t));
  return out;
}

// ---------------------------------------------------------------------------
// CSV files
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> parse_csv_numbers(const std::string& line, std::size_t expected, int line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(Errc::FormatError, "invalid number '" + field + "'", line_no);
    }
  }
  if (!line.empty() && line.back() == ',') throw Error(Errc::FormatError, "trailing comma", line_no);
  if (out.size() != expected)
    throw Error(Errc::FormatError, "expected " + std::to_string(expected) + " fields", line_no);
  return out;
}

}  // namespace detail

/// CSV with header `t,x,y,heading` (heading in radians), LF line endings.
inline Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,heading")
    throw Error(Errc::FormatError, "expected header 't,x,y,heading'", 1);
  Trajectory traj;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::parse_csv_numbers(line, 4, line_no);
    if (!traj.timestamps.empty() && !(f[0] > traj.timestamps.back()))
      throw Error(Errc::NonMonotonicTimestamps, "timestamps must be strictly increasing", line_no);
    traj.push_back(f[0], {f[1], f[2], f[3]});
  }
  traj.check();
  return traj;
}

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,x,y,heading\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i)
    out << traj.timestamps[i] << ',' << traj.x[i] << ',' << traj.y[i] << ',' << traj.heading[i] << '\n';
}

/// CSV with header `x,y`.
inline std::vector<Waypoint> read_waypoints_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "x,y") throw Error(Errc::FormatError, "expected header 'x,y'", 1);
  std::vector<Waypoint> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::parse_csv_numbers(line, 2, line_no);
    out.push_back({f[0], f[1]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Processors
// ---------------------------------------------------------------------------

class UpdateTime : public Processor {
 public:
  std::string_view name() const override { return "UpdateTime"; }
  std::vector<std::string> reads() const override { return {"Time"}; }
  std::vector<std::string> writes() const override { return {"Time"}; }

  void step(World& world) override {
    Time& time = world_time(world);
    time.current_time += time.increment_step;
  }
};

/// Places entities on their trajectories at the current time:
/// world = [Rz(heading) | (x, y, 0)] * local.
class TrajectoryReader : public Processor {
 public:
  std::string_view name() const override { return "TrajectoryReader"; }
  std::vector<std::string> reads() const override { return {"Time", "Trajectory"}; }
  std::vector<std::string> writes() const override { return {"Transform"}; }

  void step(World& world) override {
    const double t = world_time(world).current_time;
    for (EntityId e : world.query<Trajectory, Transform>()) {
      if (!applies_to(e)) continue;
      const Pose2 p = sample_trajectory(world.get<Trajectory>(e), t);
      auto& tf = world.get<Transform>(e);
      tf.world = make_transform(rotation_z(p.heading), {p.x, p.y, 0.0}) * tf.local;
    }
  }
};

/// Pose a sea-state disturbance is applied to: the pose written this
/// iteration by the trajectory reader, or the local frame otherwise.
inline Mat4 seastate_base(const World& world, EntityId e) {
  const auto& tf = world.get<Transform>(e);
  return world.has<Trajectory>(e) ? tf.world : tf.local;
}

/// Disturbance composed in the body frame: rotation R_base * R_rpy and an
/// optional heave added to z. x and y are never touched.
inline Mat4 apply_disturbance(const Mat4& base, const Vec3& rpy, double heave) {
  Mat4 out = base;
  out.block<3, 3>(0, 0) = rotation_of(base) * rotation_rpy(rpy.x(), rpy.y(), rpy.z());
  out(2, 3) += heave;
  return out;
}

// ---------------------------------------------------------------------------
// Sine sea state
// ---------------------------------------------------------------------------

struct SineSeaState : Component {
  Vec3 amplitude = Vec3::Zero();          // rad, (roll, pitch, yaw)
  Vec3 angular_frequency = Vec3::Zero();  // rad/s
  Vec3 phase = Vec3::Zero();              // rad

  std::string_view type_name() const override { return "SineSeaState"; }

  std::vector<Attribute> attributes() const override {
    return {{"amplitude", to_array(amplitude)},
            {"angular_frequency", to_array(angular_frequency)},
            {"phase", to_array(phase)}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "amplitude") amplitude = as_vec3(v, name);
    else if (name == "angular_frequency") angular_frequency = as_vec3(v, name);
    else if (name == "phase") phase = as_vec3(v, name);
    else unknown_attribute(name);
  }

  void validate() const override {
    if ((amplitude.array() < 0.0).any()) fail(Errc::InvalidArgument, "SineSeaState amplitudes must be >= 0");
  }

  /// Per-axis angle A_i * sin(w_i * t + phi_i).
  Vec3 disturbance(double t) const {
    Vec3 d;
    for (int i = 0; i < 3; ++i) d[i] = amplitude[i] * std::sin(angular_frequency[i] * t + phase[i]);
    return d;
  }
};

class SineSeaStateProcessor : public Processor {
 public:
  std::string_view name() const override { return "SineSeaState"; }
  std::vector<std::string> reads() const override { return {"SineSeaState", "Time", "Transform"}; }
  std::vector<std::string> writes() const override { return {"Transform"}; }

  void step(World& world) override {
    const double t = world_time(world).current_time;
    for (EntityId e : world.query<SineSeaState, Transform>()) {
      if (!applies_to(e)) continue;
      const Vec3 rpy = world.get<SineSeaState>(e).disturbance(t);
      const Mat4 base = seastate_base(world, e);
      world.get<Transform>(e).world = apply_disturbance(base, rpy, 0.0);
    }
  }
};

// ---------------------------------------------------------------------------
// AR(2) sea state
// ---------------------------------------------------------------------------

/// Last two outputs of one AR(2) channel.
struct Ar2State {
  double prev1 = 0.0;  // x_{k-1}
  double prev2 = 0.0;  // x_{k-2}
};

/// Rejects coefficients outside the stationarity triangle.
inline void check_stationary(double a1, double a2) {
  if (!(std::abs(a2) < 1.0 && a2 + a1 < 1.0 && a2 - a1 < 1.0))
    fail(Errc::NonStationaryCoefficients,
         "AR(2) coefficients a1=" + std::to_string(a1) + ", a2=" + std::to_string(a2) + " are not stationary");
}

/// x_k = a1 x_{k-1} + a2 x_{k-2} + eps, then shifts the state.
inline double ar2_next(Ar2State& state, double a1, double a2, double eps) {
  const double x = a1 * state.prev1 + a2 * state.prev2 + eps;
  state.prev2 = state.prev1;
  state.prev1 = x;
  return x;
}

/// Channels: roll, pitch, yaw (rad) and heave (m). A zero noise_std switches
/// a channel off. The defaults are placeholders, not calibrated values.
struct AR2SeaState : Component {
  static constexpr std::size_t kChannels = 4;

  double a1 = 0.5;
  double a2 = 0.2;
  std::array<double, kChannels> noise_std{0.01, 0.01, 0.0, 0.05};
  std::uint64_t seed = 0;
  std::int64_t burn_in = 0;
  bool burned_in = false;
  std::array<Ar2State, kChannels> state{};

  std::string_view type_name() const override { return "AR2SeaState"; }

  std::vector<Attribute> attributes() const override {
    std::vector<double> s;
    for (const auto& c : state) s.insert(s.end(), {c.prev1, c.prev2});
    return {{"a1", a1},
            {"a2", a2},
            {"noise_std", NdArray<double>{{kChannels}, {noise_std.begin(), noise_std.end()}}},
            {"seed", seed},
            {"burn_in", burn_in},
            {"burned_in", burned_in},
            {"state", NdArray<double>{{kChannels, 2}, s}}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "a1") a1 = as_double(v, name);
    else if (name == "a2") a2 = as_double(v, name);
    else if (name == "seed") seed = as_uint(v, name);
    else if (name == "burn_in") burn_in = as_int(v, name);
    else if (name == "noise_std") {
      auto n = as_vector(v, name);
      if (n.size() != kChannels) fail(Errc::AttributeTypeMismatch, "'noise_std' needs 4 values (roll, pitch, yaw, heave)");
      std::copy(n.begin(), n.end(), noise_std.begin());
    } else {
      unknown_attribute(name);
    }
  }

  void validate() const override {
    check_stationary(a1, a2);
    for (double s : noise_std)
      if (!(s >= 0.0)) fail(Errc::InvalidArgument, "AR2SeaState noise_std must be >= 0");
    if (burn_in < 0) fail(Errc::InvalidArgument, "AR2SeaState burn_in must be >= 0");
  }

  /// Advances every channel with draws keyed on (seed, entity, channel, counter).
  void advance(EntityId entity, std::uint64_t counter) {
    const CounterRng rng{seed};
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      const double eps = noise_std[ch] == 0.0 ? 0.0 : noise_std[ch] * rng.normal(entity.value, ch, counter);
      ar2_next(state[ch], a1, a2, eps);
    }
  }
};

class AR2SeaStateProcessor : public Processor {
 public:
  /// Counter domain for burn-in draws, disjoint from iteration numbers.
  static constexpr std::uint64_t kBurnInDomain = 1ULL << 63;

  std::string_view name() const override { return "AR2SeaState"; }
  std::vector<std::string> reads() const override { return {"AR2SeaState", "Transform"}; }
  std::vector<std::string> writes() const override { return {"AR2SeaState", "Transform"}; }

  void step(World& world) override {
    const std::uint64_t iteration = world.iteration();
    for (EntityId e : world.query<AR2SeaState, Transform>()) {
      if (!applies_to(e)) continue;
      auto& sea = world.get<AR2SeaState>(e);
      check_stationary(sea.a1, sea.a2);
      if (!sea.burned_in) {
        for (std::int64_t k = 0; k < sea.burn_in; ++k) sea.advance(e, kBurnInDomain | static_cast<std::uint64_t>(k));
        sea.burned_in = true;
      }
      sea.advance(e, iteration);
      const Vec3 rpy{sea.state[0].prev1, sea.state[1].prev1, sea.state[2].prev1};
      const Mat4 base = seastate_base(world, e);
      world.get<Transform>(e).world = apply_disturbance(base, rpy, sea.state[3].prev1);
    }
  }
};

}  // namespace gemini
