#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gemini/attribute.hpp"
#include "gemini/error.hpp"

namespace gemini {

struct Value;
struct MapEntry;
using ValueList = std::vector<Value>;
using ValueMap = std::vector<MapEntry>;

/// Dynamically typed configuration value. Maps keep their written order.
/// Initializers may hand back dense arrays directly instead of nested lists.
struct Value {
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, ValueList, ValueMap,
                               NdArray<double>, NdArray<std::uint64_t>>;
  Storage data;
  int line = 0;
  int column = 0;

  Value() = default;
  Value(std::monostate) {}
  Value(bool v) : data(v) {}
  Value(int v) : data(static_cast<std::int64_t>(v)) {}
  Value(std::int64_t v) : data(v) {}
  Value(std::uint64_t v) : data(NdArray<std::uint64_t>{{}, {v}}) {}
  Value(double v) : data(v) {}
  Value(const char* v) : data(std::string(v)) {}
  Value(std::string v) : data(std::move(v)) {}
  Value(ValueList v) : data(std::move(v)) {}
  Value(ValueMap v) : data(std::move(v)) {}
  Value(NdArray<double> v) : data(std::move(v)) {}
  Value(NdArray<std::uint64_t> v) : data(std::move(v)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(data); }
  bool is_map() const { return std::holds_alternative<ValueMap>(data); }
  bool is_list() const { return std::holds_alternative<ValueList>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  const ValueMap& map() const { return std::get<ValueMap>(data); }
  const ValueList& list() const { return std::get<ValueList>(data); }
};

struct MapEntry {
  std::string key;
  Value value;
};

inline std::string_view kind_name(const Value& v) {
  switch (v.data.index()) {
    case 0: return "null";
    case 1: return "boolean";
    case 2: return "integer";
    case 3: return "float";
    case 4: return "text";
    case 5: return "list";
    case 6: return "mapping";
    case 7: return "float array";
    case 8: return "uint array";
  }
  return "unknown";
}

inline const Value* find(const ValueMap& map, std::string_view key) {
  for (const auto& e : map)
    if (e.key == key) return &e.value;
  return nullptr;
}

[[noreturn]] inline void type_mismatch(std::string_view what, std::string_view expected, const Value& got) {
  std::string msg = "'" + std::string(what) + "' expects " + std::string(expected) + ", got " +
                    std::string(kind_name(got));
  if (got.line > 0) throw Error(Errc::AttributeTypeMismatch, msg, got.line, got.column);
  throw Error(Errc::AttributeTypeMismatch, msg);
}

inline double as_double(const Value& v, std::string_view what) {
  if (auto d = std::get_if<double>(&v.data)) return *d;
  if (auto i = std::get_if<std::int64_t>(&v.data)) return static_cast<double>(*i);
  if (auto a = std::get_if<NdArray<double>>(&v.data); a && a->rank() == 0) return a->data[0];
  type_mismatch(what, "float64", v);
}

inline std::int64_t as_int(const Value& v, std::string_view what) {
  if (auto i = std::get_if<std::int64_t>(&v.data)) return *i;
  if (auto a = std::get_if<NdArray<std::uint64_t>>(&v.data);
      a && a->rank() == 0 && a->data[0] <= static_cast<std::uint64_t>(INT64_MAX))
    return static_cast<std::int64_t>(a->data[0]);
  type_mismatch(what, "int64", v);
}

inline std::uint64_t as_uint(const Value& v, std::string_view what) {
  if (auto i = std::get_if<std::int64_t>(&v.data); i && *i >= 0) return static_cast<std::uint64_t>(*i);
  if (auto a = std::get_if<NdArray<std::uint64_t>>(&v.data); a && a->rank() == 0) return a->data[0];
  type_mismatch(what, "uint64", v);
}

inline bool as_bool(const Value& v, std::string_view what) {
  if (auto b = std::get_if<bool>(&v.data)) return *b;
  type_mismatch(what, "boolean", v);
}

inline const std::string& as_string(const Value& v, std::string_view what) {
  if (auto s = std::get_if<std::string>(&v.data)) return *s;
  type_mismatch(what, "text", v);
}

namespace detail {

template <typename T, typename Convert>
void flatten_list(const Value& v, std::size_t depth, std::vector<std::uint64_t>& dims, std::vector<T>& out,
                  bool& dims_known, std::string_view what, std::string_view expected, Convert convert) {
  if (!v.is_list()) {
    if (!dims_known) {
      dims.resize(depth);
      dims_known = true;
    } else if (dims.size() != depth) {
      type_mismatch(what, expected, v);
    }
    out.push_back(convert(v));
    return;
  }
  const auto& items = v.list();
  if (!dims_known) {
    if (dims.size() <= depth) dims.push_back(items.size());
  } else if (depth >= dims.size() || dims[depth] != items.size()) {
    fail(Errc::AttributeTypeMismatch, "'" + std::string(what) + "' is not a rectangular array");
  }
  if (items.empty()) {
    if (!dims_known) dims_known = true;
    return;
  }
  for (const auto& item : items) flatten_list<T>(item, depth + 1, dims, out, dims_known, what, expected, convert);
}

}  // namespace detail

/// Accepts a dense array, a scalar (rank 0), or rectangular nested lists.
inline NdArray<double> as_double_array(const Value& v, std::string_view what) {
  if (auto a = std::get_if<NdArray<double>>(&v.data)) return *a;
  if (auto a = std::get_if<NdArray<std::uint64_t>>(&v.data)) {
    std::vector<double> out(a->data.begin(), a->data.end());
    return {a->dims, std::move(out)};
  }
  std::vector<std::uint64_t> dims;
  std::vector<double> out;
  bool known = false;
  detail::flatten_list<double>(v, 0, dims, out, known, what, "float64 array",
                               [&](const Value& x) { return as_double(x, what); });
  return {dims, std::move(out)};
}

inline NdArray<std::uint64_t> as_uint_array(const Value& v, std::string_view what) {
  if (auto a = std::get_if<NdArray<std::uint64_t>>(&v.data)) return *a;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint64_t> out;
  bool known = false;
  detail::flatten_list<std::uint64_t>(v, 0, dims, out, known, what, "uint64 array",
                                      [&](const Value& x) { return as_uint(x, what); });
  return {dims, std::move(out)};
}

inline void require_shape(const NdArray<double>& a, std::initializer_list<std::int64_t> shape,
                          std::string_view what) {
  bool ok = a.rank() == shape.size();
  std::size_t i = 0;
  for (auto s : shape) {
    if (ok && s >= 0 && a.dims[i] != static_cast<std::uint64_t>(s)) ok = false;
    ++i;
  }
  // An empty list has unknown inner dims; treat [] as a valid zero-row array.
  if (!ok && a.size() == 0 && a.rank() == 1 && shape.size() >= 1) return;
  if (!ok) fail(Errc::AttributeTypeMismatch, "'" + std::string(what) + "' has the wrong shape");
}

inline std::vector<double> as_vector(const Value& v, std::string_view what) {
  auto a = as_double_array(v, what);
  require_shape(a, {-1}, what);
  return a.data;
}

inline Vec3 as_vec3(const Value& v, std::string_view what) {
  auto a = as_double_array(v, what);
  require_shape(a, {3}, what);
  return {a.data[0], a.data[1], a.data[2]};
}

inline Mat4 as_mat4(const Value& v, std::string_view what) {
  auto a = as_double_array(v, what);
  require_shape(a, {4, 4}, what);
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = a.data[static_cast<std::size_t>(r * 4 + c)];
  return m;
}

inline std::vector<Vec3> as_points(const Value& v, std::string_view what) {
  auto a = as_double_array(v, what);
  require_shape(a, {-1, 3}, what);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i + 2 < a.data.size(); i += 3) pts.emplace_back(a.data[i], a.data[i + 1], a.data[i + 2]);
  return pts;
}

template <std::size_t K>
std::vector<std::array<std::uint64_t, K>> as_index_rows(const Value& v, std::string_view what) {
  auto a = as_uint_array(v, what);
  bool ok = (a.rank() == 2 && a.dims[1] == K) || (a.rank() == 1 && a.size() == 0);
  if (!ok) fail(Errc::AttributeTypeMismatch, "'" + std::string(what) + "' must have " + std::to_string(K) + " columns");
  std::vector<std::array<std::uint64_t, K>> rows(a.size() / K);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < K; ++k) rows[i][k] = a.data[i * K + k];
  return rows;
}

/// Consumes named parameters and rejects anything left over.
class Params {
 public:
  Params(const ValueMap& map, std::string context) : map_(map), context_(std::move(context)) {}

  const Value* take(std::string_view key) {
    used_.insert(std::string(key));
    return find(map_, key);
  }

  const Value& require(std::string_view key) {
    if (const Value* v = take(key)) return *v;
    fail(Errc::InvalidInvocation, context_ + ": missing parameter '" + std::string(key) + "'");
  }

  double get_double(std::string_view key, double fallback) {
    const Value* v = take(key);
    return v ? as_double(*v, key) : fallback;
  }

  void finish() const {
    for (const auto& e : map_)
      if (!used_.count(e.key)) fail(Errc::UnknownAttribute, context_ + ": unknown parameter '" + e.key + "'");
  }

 private:
  const ValueMap& map_;
  std::string context_;
  std::set<std::string> used_;
};

}  // namespace gemini
