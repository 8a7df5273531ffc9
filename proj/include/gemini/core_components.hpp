#pragma once

#include <string>
#include <vector>

#include "gemini/ecs.hpp"
#include "gemini/geometry.hpp"

namespace gemini {

struct Time : Component {
  double current_time = 0.0;
  double increment_step = 0.1;

  Time() = default;
  Time(double current, double step) : current_time(current), increment_step(step) {}

  std::string_view type_name() const override { return "Time"; }

  std::vector<Attribute> attributes() const override {
    return {{"currentTime", current_time}, {"increment_step", increment_step}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "currentTime") current_time = as_double(v, name);
    else if (name == "increment_step") increment_step = as_double(v, name);
    else unknown_attribute(name);
  }

  void validate() const override {
    if (!(increment_step > 0.0)) fail(Errc::InvalidArgument, "Time.increment_step must be > 0");
  }
};

struct Transform : Component {
  Mat4 world = Mat4::Identity();
  Mat4 local = Mat4::Identity();

  Transform() = default;
  explicit Transform(const Mat4& local_frame) : world(local_frame), local(local_frame) {}
  Transform(const Mat4& world_frame, const Mat4& local_frame) : world(world_frame), local(local_frame) {}

  std::string_view type_name() const override { return "Transform"; }

  std::vector<Attribute> attributes() const override { return {{"world", to_array(world)}, {"local", to_array(local)}}; }

  // Setting only `local` also resets `world` so a freshly built entity starts
  // at its local frame.
  void assign(std::string_view name, const Value& v) override {
    if (name == "world") {
      world = as_mat4(v, name);
      world_set_ = true;
    } else if (name == "local") {
      local = as_mat4(v, name);
      if (!world_set_) world = local;
    } else {
      unknown_attribute(name);
    }
  }

  void validate() const override {
    if (!is_rigid_transform(world) || !is_rigid_transform(local))
      fail(Errc::InvalidArgument, "Transform matrices must be rigid with bottom row (0,0,0,1)");
  }

 private:
  bool world_set_ = false;
};

/// The single Time component in the world.
inline Time& world_time(World& world) {
  auto found = world.query<Time>();
  if (found.empty()) fail(Errc::MissingComponent, "no entity holds a Time component");
  if (found.size() > 1) fail(Errc::AmbiguousTime, std::to_string(found.size()) + " entities hold a Time component");
  return world.get<Time>(found.front());
}

}  // namespace gemini
