#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gemini/error.hpp"

namespace gemini {

/// Dense row-major array with explicit dims. A rank-0 array holds one element.
template <typename T>
struct NdArray {
  std::vector<std::uint64_t> dims;
  std::vector<T> data;

  NdArray() = default;
  NdArray(std::vector<std::uint64_t> d, std::vector<T> values) : dims(std::move(d)), data(std::move(values)) {
    if (element_count(dims) != data.size()) {
      fail(Errc::InvalidDimension, "array dims do not match element count");
    }
  }

  static std::size_t element_count(const std::vector<std::uint64_t>& d) {
    std::size_t n = 1;
    for (auto v : d) n *= static_cast<std::size_t>(v);
    return n;
  }

  std::size_t rank() const { return dims.size(); }
  std::size_t size() const { return data.size(); }

  const T& at(std::size_t row, std::size_t col) const { return data[row * dims.at(1) + col]; }

  bool operator==(const NdArray&) const = default;
};

using AttributeValue = std::variant<double, std::int64_t, std::uint64_t, bool, std::string, NdArray<double>,
                                    NdArray<std::int64_t>, NdArray<std::uint64_t>>;

struct Attribute {
  std::string name;
  AttributeValue value;
};

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline NdArray<double> to_array(const Mat4& m) {
  std::vector<double> values;
  values.reserve(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) values.push_back(m(r, c));
  return {{4, 4}, std::move(values)};
}

inline NdArray<double> to_array(const std::vector<Vec3>& points) {
  std::vector<double> values;
  values.reserve(points.size() * 3);
  for (const auto& p : points) values.insert(values.end(), {p.x(), p.y(), p.z()});
  return {{points.size(), 3}, std::move(values)};
}

inline NdArray<double> to_array(const std::vector<double>& values) { return {{values.size()}, values}; }

template <std::size_t K>
NdArray<std::uint64_t> to_array(const std::vector<std::array<std::uint64_t, K>>& rows) {
  std::vector<std::uint64_t> values;
  values.reserve(rows.size() * K);
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return {{rows.size(), K}, std::move(values)};
}

inline NdArray<double> to_array(const Vec3& v) { return {{3}, {v.x(), v.y(), v.z()}}; }

}  // namespace gemini
