#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <openssl/evp.h>

#include "gemini/ecs.hpp"

namespace gemini {

// ---------------------------------------------------------------------------
// Canonical attribute encoding
//
// Every value starts with a header: rank as u64 LE, then each dim as u64 LE.
// Scalars, booleans and text are rank 0. Payload elements are row-major:
// float64 as IEEE-754 LE bits (NaN canonicalized to 0x7FF8000000000000),
// int64/uint64 LE, boolean as one byte, text as u64 byte length then bytes.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t float_bits(double v) {
  if (std::isnan(v)) return 0x7FF8000000000000ULL;
  return std::bit_cast<std::uint64_t>(v);
}

inline void put_header(std::vector<std::uint8_t>& out, std::span<const std::uint64_t> dims) {
  put_u64(out, dims.size());
  for (auto d : dims) put_u64(out, d);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_attribute(const AttributeValue& value) {
  using detail::put_u64;
  std::vector<std::uint8_t> out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          put_u64(out, 0);
          put_u64(out, detail::float_bits(v));
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          put_u64(out, 0);
          put_u64(out, static_cast<std::uint64_t>(v));
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          put_u64(out, 0);
          put_u64(out, v);
        } else if constexpr (std::is_same_v<T, bool>) {
          put_u64(out, 0);
          out.push_back(v ? 1 : 0);
        } else if constexpr (std::is_same_v<T, std::string>) {
          put_u64(out, 0);
          put_u64(out, v.size());
          out.insert(out.end(), v.begin(), v.end());
        } else {
          if (NdArray<typename decltype(v.data)::value_type>::element_count(v.dims) != v.data.size())
            fail(Errc::UnsupportedType, "array dims do not match element count");
          detail::put_header(out, v.dims);
          out.reserve(out.size() + v.data.size() * 8);
          for (const auto& x : v.data) {
            using E = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<E, double>) put_u64(out, detail::float_bits(x));
            else put_u64(out, static_cast<std::uint64_t>(x));
          }
        }
      },
      value);
  return out;
}

// ---------------------------------------------------------------------------
// Digests
// ---------------------------------------------------------------------------

using Digest = std::array<std::uint8_t, 32>;

inline Digest hash_attribute(std::span<const std::uint8_t> bytes) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size())
    fail(Errc::InvalidArgument, "SHA-256 computation failed");
  return d;
}

inline std::string to_hex(const Digest& d) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(64, '0');
  for (std::size_t i = 0; i < d.size(); ++i) {
    s[2 * i] = digits[d[i] >> 4];
    s[2 * i + 1] = digits[d[i] & 0xF];
  }
  return s;
}

/// Parses exactly 64 lowercase hex characters.
inline std::optional<Digest> digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    d[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return d;
}

// ---------------------------------------------------------------------------
// State log
// ---------------------------------------------------------------------------

struct StateKey {
  std::uint64_t entity = 0;
  std::uint64_t iteration = 0;
  std::string component;
  std::string attribute;
  auto operator<=>(const StateKey&) const = default;
};

struct StateRow {
  EntityId entity;
  std::uint64_t iteration = 0;
  std::string component;
  std::string attribute;
  Digest digest{};

  StateKey key() const { return {entity.value, iteration, component, attribute}; }
  bool operator==(const StateRow&) const = default;
};

/// Canonical order: iteration, entity, component, attribute.
inline bool canonical_less(const StateRow& a, const StateRow& b) {
  return std::tie(a.iteration, a.entity.value, a.component, a.attribute) <
         std::tie(b.iteration, b.entity.value, b.component, b.attribute);
}

/// Change-only log of attribute digests.
class StateLog {
 public:
  const std::vector<StateRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::uint64_t max_iteration() const {
    std::uint64_t m = 0;
    for (const auto& r : rows_) m = std::max(m, r.iteration);
    return m;
  }

  /// Appends when the digest differs from the latest row for the same
  /// (entity, component, attribute). Returns whether a row was added.
  bool record(EntityId entity, std::uint64_t iteration, std::string component, std::string attribute,
              const Digest& digest) {
    auto slot = std::make_tuple(entity.value, component, attribute);
    auto it = latest_.find(slot);
    if (it != latest_.end() && it->second == digest) return false;
    latest_[slot] = digest;
    rows_.push_back({entity, iteration, std::move(component), std::move(attribute), digest});
    return true;
  }

  /// Inserts a row verbatim (used when reading logs) and re-sorts lazily.
  void insert(StateRow row) {
    auto slot = std::make_tuple(row.entity.value, row.component, row.attribute);
    auto it = latest_.find(slot);
    if (it == latest_.end() || latest_iter_[slot] <= row.iteration) {
      latest_[slot] = row.digest;
      latest_iter_[slot] = row.iteration;
    }
    rows_.push_back(std::move(row));
  }

  void canonicalize() { std::stable_sort(rows_.begin(), rows_.end(), canonical_less); }

  bool operator==(const StateLog& other) const { return rows_ == other.rows_; }

 private:
  using Slot = std::tuple<std::uint64_t, std::string, std::string>;
  std::vector<StateRow> rows_;
  std::map<Slot, Digest> latest_;
  std::map<Slot, std::uint64_t> latest_iter_;
};

/// Digests every attribute of every entity in canonical order and appends
/// the changed ones. Returns the number of rows appended.
inline std::size_t record_iteration(const World& world, StateLog& log, std::uint64_t iteration) {
  std::size_t added = 0;
  for (EntityId e : world.entities()) {
    for (const Component* c : world.components(e)) {
      auto attrs = c->attributes();
      std::sort(attrs.begin(), attrs.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
      for (const auto& a : attrs) {
        auto bytes = encode_attribute(a.value);
        if (log.record(e, iteration, std::string(c->type_name()), a.name, hash_attribute(bytes))) ++added;
      }
    }
  }
  return added;
}

/// Observer that records every completed iteration into `log`.
inline Observer state_recorder(StateLog& log) {
  return [&log](const World& w, std::uint64_t iteration) { record_iteration(w, log, iteration); };
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

inline constexpr std::string_view kLogHeader = "entity,iteration,component,attribute,hash";

inline void write_log(const StateLog& log, std::ostream& out) {
  std::vector<StateRow> rows = log.rows();
  std::stable_sort(rows.begin(), rows.end(), canonical_less);
  out << kLogHeader << '\n';
  for (const auto& r : rows) {
    out << r.entity.value << ',' << r.iteration << ',' << r.component << ',' << r.attribute << ','
        << to_hex(r.digest) << '\n';
  }
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline StateLog read_log(std::istream& in) {
  StateLog log;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != kLogHeader) throw Error(Errc::FormatError, "missing or invalid header", 1);
  ++line_no;
  std::set<StateKey> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') throw Error(Errc::FormatError, "CRLF line endings", line_no);
    auto fields = detail::split_commas(line);
    if (fields.size() != 5) throw Error(Errc::FormatError, "expected 5 fields", line_no);
    auto entity = detail::parse_u64(fields[0]);
    auto iteration = detail::parse_u64(fields[1]);
    if (!entity || !iteration) throw Error(Errc::FormatError, "entity and iteration must be unsigned integers", line_no);
    if (fields[2].empty() || fields[3].empty()) throw Error(Errc::FormatError, "empty component or attribute", line_no);
    auto digest = digest_from_hex(fields[4]);
    if (!digest) throw Error(Errc::FormatError, "digest must be 64 lowercase hex characters", line_no);
    StateRow row{EntityId{*entity}, *iteration, std::string(fields[2]), std::string(fields[3]), *digest};
    if (!seen.insert(row.key()).second) throw Error(Errc::FormatError, "duplicate row key", line_no);
    log.insert(std::move(row));
  }
  log.canonicalize();
  return log;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ChangedRow {
  StateKey key;
  Digest golden{};
  Digest candidate{};
};

struct DiffReport {
  std::vector<StateRow> missing;
  std::vector<StateRow> extra;
  std::vector<ChangedRow> changed;

  bool passed() const { return missing.empty() && extra.empty() && changed.empty(); }
};

inline DiffReport compare_logs(const StateLog& golden, const StateLog& candidate) {
  std::map<StateKey, const StateRow*> g, c;
  for (const auto& r : golden.rows()) g.emplace(r.key(), &r);
  for (const auto& r : candidate.rows()) c.emplace(r.key(), &r);
  DiffReport report;
  for (const auto& [key, row] : g) {
    auto it = c.find(key);
    if (it == c.end()) report.missing.push_back(*row);
    else if (it->second->digest != row->digest) report.changed.push_back({key, row->digest, it->second->digest});
  }
  for (const auto& [key, row] : c)
    if (!g.count(key)) report.extra.push_back(*row);
  return report;
}

/// Human-readable diff lines, at most `limit`.
inline std::vector<std::string> describe_diff(const DiffReport& d, std::size_t limit = 20) {
  std::vector<std::string> lines;
  auto key_text = [](const StateKey& k) {
    return "entity " + std::to_string(k.entity) + " iteration " + std::to_string(k.iteration) + " " + k.component +
           "." + k.attribute;
  };
  for (const auto& r : d.changed) {
    if (lines.size() >= limit) return lines;
    lines.push_back("changed  " + key_text(r.key) + ": " + to_hex(r.golden).substr(0, 12) + " -> " +
                    to_hex(r.candidate).substr(0, 12));
  }
  for (const auto& r : d.missing) {
    if (lines.size() >= limit) return lines;
    lines.push_back("missing  " + key_text(r.key()));
  }
  for (const auto& r : d.extra) {
    if (lines.size() >= limit) return lines;
    lines.push_back("extra    " + key_text(r.key()));
  }
  return lines;
}

/// Machine-readable diff: kind,entity,iteration,component,attribute,golden,candidate.
inline void write_diff(const DiffReport& d, std::ostream& out) {
  out << "kind,entity,iteration,component,attribute,golden,candidate\n";
  auto row = [&](std::string_view kind, const StateKey& k, std::string_view g, std::string_view c) {
    out << kind << ',' << k.entity << ',' << k.iteration << ',' << k.component << ',' << k.attribute << ',' << g
        << ',' << c << '\n';
  };
  for (const auto& r : d.changed) row("changed", r.key, to_hex(r.golden), to_hex(r.candidate));
  for (const auto& r : d.missing) row("missing", r.key(), to_hex(r.digest), "");
  for (const auto& r : d.extra) row("extra", r.key(), "", to_hex(r.digest));
}

}  // namespace gemini
