#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "gemini/core_components.hpp"
#include "gemini/lidar.hpp"
#include "gemini/motion.hpp"
#include "gemini/registry.hpp"
#include "gemini/scene.hpp"

namespace gemini {

namespace detail {

inline Value mesh_value(const Mesh& mesh) {
  return ValueMap{{"vertices", Value(to_array(mesh.vertices))}, {"triangles", Value(to_array(mesh.triangles))}};
}

inline Value trajectory_value(const Trajectory& traj) {
  return ValueMap{{"timestamps", Value(to_array(traj.timestamps))},
                  {"x", Value(to_array(traj.x))},
                  {"y", Value(to_array(traj.y))},
                  {"heading", Value(to_array(traj.heading))}};
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open '" + path.string() + "'");
  return in;
}

/// Either a list of degrees or `{min, max, count, inclusive}`.
inline std::vector<double> angle_spec(const Value& v, std::string_view what) {
  if (!v.is_map()) return as_vector(v, what);
  Params p(v.map(), std::string(what));
  const double min = as_double(p.require("min"), "min");
  const double max = as_double(p.require("max"), "max");
  const auto count = as_uint(p.require("count"), "count");
  const Value* inc = p.take("inclusive");
  const bool inclusive = inc ? as_bool(*inc, "inclusive") : false;
  p.finish();
  return angle_range(min, max, count, inclusive);
}

template <typename P>
Registry::ProcessorFactory no_params(std::string name) {
  return [name](const ValueMap& params) -> std::unique_ptr<Processor> {
    Params(params, name).finish();
    return std::make_unique<P>();
  };
}

}  // namespace detail

/// Component, processor and initializer back-ends shipped with the library.
inline Registry default_registry() {
  Registry r;
  r.add_component<Time>("gemini.components.Time");
  r.add_component<Transform>("gemini.components.Transform");
  r.add_component<Mesh>("gemini.components.Mesh");
  r.add_component<PointCloud>("gemini.components.PointCloud");
  r.add_component<LineSet>("gemini.components.LineSet");
  r.add_component<Material>("gemini.components.Material");
  r.add_component<Trajectory>("gemini.components.Trajectory");
  r.add_component<SineSeaState>("gemini.components.SineSeaState");
  r.add_component<AR2SeaState>("gemini.components.AR2SeaState");
  r.add_component<LidarConfig>("gemini.components.LidarConfig");

  r.add_processor("gemini.processors.UpdateTime", detail::no_params<UpdateTime>("UpdateTime"));
  r.add_processor("gemini.processors.TrajectoryReader", detail::no_params<TrajectoryReader>("TrajectoryReader"));
  r.add_processor("gemini.processors.SineSeaState", detail::no_params<SineSeaStateProcessor>("SineSeaState"));
  r.add_processor("gemini.processors.AR2SeaState", detail::no_params<AR2SeaStateProcessor>("AR2SeaState"));
  r.add_processor("gemini.processors.LidarScan", detail::no_params<LidarScan>("LidarScan"));
  r.add_processor("gemini.processors.RotateFrame", [](const ValueMap& params) -> std::unique_ptr<Processor> {
    Params p(params, "RotateFrame");
    const double omega = p.get_double("omega", 1.0);
    p.finish();
    return std::make_unique<RotateFrame>(omega);
  });

  r.add_function("gemini.initializers.load_mesh", [](const ValueMap& args, const BuildContext& ctx) {
    Params p(args, "load_mesh");
    const auto path = ctx.resolve(as_string(p.require("path"), "path"));
    p.finish();
    return detail::mesh_value(load_mesh(path));
  });
  r.add_function("gemini.initializers.plane", [](const ValueMap& args, const BuildContext&) {
    Params p(args, "plane");
    const double w = p.get_double("width", 1.0);
    const double d = p.get_double("depth", 1.0);
    p.finish();
    return detail::mesh_value(make_plane(w, d));
  });
  r.add_function("gemini.initializers.icosphere", [](const ValueMap& args, const BuildContext&) {
    Params p(args, "icosphere");
    const double radius = p.get_double("radius", 1.0);
    const Value* s = p.take("subdivisions");
    const auto subdivisions = s ? as_int(*s, "subdivisions") : 0;
    p.finish();
    return detail::mesh_value(make_icosphere(radius, static_cast<int>(subdivisions)));
  });
  r.add_function("gemini.initializers.beam_pattern", [](const ValueMap& args, const BuildContext&) {
    Params p(args, "beam_pattern");
    const auto az = detail::angle_spec(p.require("azimuth"), "azimuth");
    const auto el = detail::angle_spec(p.require("elevation"), "elevation");
    p.finish();
    return Value(to_array(make_beam_pattern(az, el)));
  });
  r.add_function("gemini.initializers.trajectory_file", [](const ValueMap& args, const BuildContext& ctx) {
    Params p(args, "trajectory_file");
    const auto path = ctx.resolve(as_string(p.require("path"), "path"));
    p.finish();
    auto in = detail::open_input(path);
    return detail::trajectory_value(read_trajectory_csv(in));
  });
  r.add_function("gemini.initializers.plan_trajectory", [](const ValueMap& args, const BuildContext& ctx) {
    Params p(args, "plan_trajectory");
    std::vector<Waypoint> waypoints;
    const Value* inline_points = p.take("waypoints");
    const Value* file = p.take("file");
    if ((inline_points == nullptr) == (file == nullptr))
      fail(Errc::InvalidInvocation, "plan_trajectory needs exactly one of 'waypoints' or 'file'");
    if (inline_points) {
      auto a = as_double_array(*inline_points, "waypoints");
      require_shape(a, {-1, 2}, "waypoints");
      for (std::size_t i = 0; i + 1 < a.data.size(); i += 2) waypoints.push_back({a.data[i], a.data[i + 1]});
    } else {
      auto in = detail::open_input(ctx.resolve(as_string(*file, "file")));
      waypoints = read_waypoints_csv(in);
    }
    const double speed = as_double(p.require("speed"), "speed");
    const double dt = as_double(p.require("dt"), "dt");
    const double t0 = p.get_double("t0", 0.0);
    p.finish();
    return detail::trajectory_value(plan_trajectory(waypoints, speed, dt, t0));
  });
  r.add_function("gemini.initializers.pose", [](const ValueMap& args, const BuildContext&) {
    Params p(args, "pose");
    const Value* t = p.take("translation");
    const Value* rpy = p.take("rpy");
    p.finish();
    const Vec3 tr = t ? as_vec3(*t, "translation") : Vec3::Zero();
    const Vec3 a = rpy ? as_vec3(*rpy, "rpy") : Vec3::Zero();
    return Value(to_array(make_transform(rotation_rpy(a.x(), a.y(), a.z()), tr)));
  });
  return r;
}

}  // namespace gemini
