#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gemini/lidar_intensity.hpp"
#include "gemini/raycast.hpp"

namespace gemini {

/// Evenly spaced angles in degrees. With `inclusive` the last value is `max`.
inline std::vector<double> angle_range(double min, double max, std::uint64_t count, bool inclusive) {
  if (!std::isfinite(min) || !std::isfinite(max)) fail(Errc::InvalidArgument, "angle range must be finite");
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {min};
  const double step = (max - min) / static_cast<double>(inclusive ? count - 1 : count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(min + step * static_cast<double>(i));
  return out;
}

/// Unit directions for every (elevation, azimuth) pair, elevation-major.
/// Angles are in degrees.
inline std::vector<Vec3> make_beam_pattern(const std::vector<double>& azimuths, const std::vector<double>& elevations) {
  if (azimuths.empty() || elevations.empty()) fail(Errc::EmptyPattern, "beam pattern needs azimuths and elevations");
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<Vec3> dirs;
  dirs.reserve(azimuths.size() * elevations.size());
  for (double el : elevations) {
    if (!std::isfinite(el)) fail(Errc::InvalidArgument, "elevation must be finite");
    for (double az : azimuths) {
      if (!std::isfinite(az)) fail(Errc::InvalidArgument, "azimuth must be finite");
      const double e = el * deg, a = az * deg;
      dirs.emplace_back(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
    }
  }
  return dirs;
}

struct LidarConfig : Component {
  double wavelength = 905e-9;
  double aperture = 0.025;
  double transmit_power = 1.0;
  double eta_opt = 1.0;
  double eta_atm = 1.0;
  /// In the same relative unit as the computed intensity.
  double drop_threshold = 0.0;
  double max_range = 100.0;
  /// Sensor-frame unit vectors.
  std::vector<Vec3> directions;

  std::string_view type_name() const override { return "LidarConfig"; }

  std::vector<Attribute> attributes() const override {
    return {{"wavelength", wavelength},         {"aperture", aperture},   {"transmit_power", transmit_power},
            {"eta_opt", eta_opt},               {"eta_atm", eta_atm},     {"drop_threshold", drop_threshold},
            {"max_range", max_range},           {"directions", to_array(directions)}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "wavelength") wavelength = as_double(v, name);
    else if (name == "aperture") aperture = as_double(v, name);
    else if (name == "transmit_power") transmit_power = as_double(v, name);
    else if (name == "eta_opt") eta_opt = as_double(v, name);
    else if (name == "eta_atm") eta_atm = as_double(v, name);
    else if (name == "drop_threshold") drop_threshold = as_double(v, name);
    else if (name == "max_range") max_range = as_double(v, name);
    else if (name == "directions") directions = as_points(v, name);
    else unknown_attribute(name);
  }

  void validate() const override {
    if (!(wavelength > 0.0) || !(aperture > 0.0) || !(transmit_power > 0.0) || !(max_range > 0.0))
      fail(Errc::NonPositiveInput, "LidarConfig wavelength, aperture, transmit_power and max_range must be positive");
    if (!(eta_opt > 0.0 && eta_opt <= 1.0) || !(eta_atm > 0.0 && eta_atm <= 1.0))
      fail(Errc::InvalidArgument, "LidarConfig efficiencies must lie in (0, 1]");
    if (!(drop_threshold >= 0.0)) fail(Errc::InvalidArgument, "LidarConfig.drop_threshold must be >= 0");
    if (directions.empty()) fail(Errc::EmptyPattern, "LidarConfig.directions is empty");
    for (const auto& d : directions)
      if (!(std::abs(d.norm() - 1.0) <= 1e-12)) fail(Errc::InvalidArgument, "LidarConfig.directions must be unit vectors");
  }
};

/// BRDF of `material` at incidence angle theta.
inline double evaluate_brdf(const Material& material, double theta) {
  return material.model == BrdfModel::lambert ? lidar::brdf_lambert(material.reflectivity)
                                              : lidar::brdf_oren_nayar(material.reflectivity, material.roughness, theta);
}

/// Intensity of one return, composed beamwidth -> footprint -> BRDF -> cross section -> lidar equation.
inline double return_intensity(const LidarConfig& cfg, const Material& material, double range, double theta) {
  const double bw = lidar::beamwidth(cfg.wavelength, cfg.aperture);
  const double f_r = evaluate_brdf(material, theta);
  const double sigma = lidar::backscatter_cross_section(theta, range, f_r, bw);
  return lidar::received_intensity(cfg.transmit_power, cfg.aperture, range, bw, cfg.eta_opt, cfg.eta_atm, sigma);
}

struct ScanResult {
  std::vector<Vec3> points;
  std::vector<double> intensity;
};

/// One scan from `pose` against a prebuilt scene. Returns kept points in beam order.
inline ScanResult scan(const World& world, const Bvh& scene, const LidarConfig& cfg, const Mat4& pose) {
  ScanResult out;
  const Mat3 rot = rotation_of(pose);
  const Vec3 origin = translation_of(pose);
  for (const auto& d : cfg.directions) {
    const Vec3 dir = (rot * d).normalized();
    auto hit = scene.raycast(origin, dir, cfg.max_range);
    if (!hit) continue;
    const Material* material = world.find<Material>(hit->entity);
    if (!material)
      fail(Errc::MissingComponent, "lidar hit entity " + to_string(hit->entity) + " has no Material");
    const double i = return_intensity(cfg, *material, hit->range, hit->theta);
    if (i >= cfg.drop_threshold) {
      out.points.push_back(hit->point);
      out.intensity.push_back(i);
    }
  }
  return out;
}

/// Scans every LidarConfig + Transform + PointCloud entity against all other meshes.
class LidarScan : public Processor {
 public:
  std::string_view name() const override { return "LidarScan"; }
  std::vector<std::string> reads() const override { return {"LidarConfig", "Transform", "Mesh", "Material"}; }
  std::vector<std::string> writes() const override { return {"PointCloud"}; }

  void step(World& world) override {
    bool any = false;
    for (EntityId e : world.query<LidarConfig, Transform>()) {
      if (!applies_to(e)) continue;
      any = true;
      auto* cloud = world.find<PointCloud>(e);
      if (!cloud) fail(Errc::MissingComponent, "lidar entity " + to_string(e) + " has no PointCloud");
      const Bvh scene(collect_scene(world, e));
      auto result = scan(world, scene, world.get<LidarConfig>(e), world.get<Transform>(e).world);
      cloud->points = std::move(result.points);
      cloud->intensity = std::move(result.intensity);
    }
    if (!any) fail(Errc::MissingComponent, "LidarScan found no entity with LidarConfig and Transform");
  }
};

}  // namespace gemini
