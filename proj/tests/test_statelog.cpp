#include <gtest/gtest.h>

#include <bit>
#include <sstream>

#include "gemini/acceptance.hpp"
#include "gemini/builtins.hpp"
#include "gemini/statelog.hpp"

using namespace gemini;

namespace {

std::vector<std::uint8_t> le(std::uint64_t v) {
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return out;
}

std::vector<std::uint8_t> cat(std::initializer_list<std::vector<std::uint8_t>> parts) {
  std::vector<std::uint8_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string hex_of(std::string_view text) {
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  return to_hex(hash_attribute(bytes));
}

World table_world() {
  World w;
  auto frame = w.create_entity();
  w.attach(frame, Transform{});
  w.attach(frame, make_plane(1, 1));
  auto clock = w.create_entity();
  w.attach(clock, Time(0.0, 0.1));
  w.register_processor(std::make_unique<UpdateTime>());
  w.register_processor(std::make_unique<RotateFrame>(1.0));
  return w;
}

StateLog run_log(World& w, std::uint64_t n) {
  StateLog log;
  run_recorded(w, n, log);
  return log;
}

std::string serialize(const StateLog& log) {
  std::ostringstream out;
  write_log(log, out);
  return out.str();
}

Digest digest_of(std::uint8_t fill) {
  Digest d;
  d.fill(fill);
  return d;
}

}  // namespace

// --- encoding ---------------------------------------------------------------

TEST(Encoding, ZeroScalar) {
  EXPECT_EQ(encode_attribute(0.0), std::vector<std::uint8_t>(16, 0));
}

TEST(Encoding, IdentityMatrix) {
  const auto bytes = encode_attribute(to_array(Mat4::Identity().eval()));
  ASSERT_EQ(bytes.size(), 8u * 3 + 128);
  std::vector<std::vector<std::uint8_t>> parts{le(2), le(4), le(4)};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) parts.push_back(le(r == c ? 0x3FF0000000000000ULL : 0));
  std::vector<std::uint8_t> expected;
  for (const auto& p : parts) expected.insert(expected.end(), p.begin(), p.end());
  EXPECT_EQ(bytes, expected);
}

TEST(Encoding, ShapeDistinguishes) {
  std::vector<double> data{1, 2, 3, 4, 5, 6};
  EXPECT_NE(encode_attribute(NdArray<double>{{2, 3}, data}), encode_attribute(NdArray<double>{{3, 2}, data}));
}

TEST(Encoding, ScalarKinds) {
  EXPECT_EQ(encode_attribute(std::int64_t{-1}), cat({le(0), le(~0ULL)}));
  EXPECT_EQ(encode_attribute(std::uint64_t{5}), cat({le(0), le(5)}));
  EXPECT_EQ(encode_attribute(true), cat({le(0), {1}}));
  EXPECT_EQ(encode_attribute(std::string("ab")), cat({le(0), le(2), {'a', 'b'}}));
  EXPECT_EQ(encode_attribute(1.5), cat({le(0), le(std::bit_cast<std::uint64_t>(1.5))}));
}

TEST(Encoding, NanCanonical) {
  const double quiet = std::numeric_limits<double>::quiet_NaN();
  const double other = std::bit_cast<double>(0xFFF8000000000123ULL);
  EXPECT_EQ(encode_attribute(quiet), encode_attribute(other));
  EXPECT_EQ(encode_attribute(quiet), cat({le(0), le(0x7FF8000000000000ULL)}));
}

TEST(Encoding, NegativeZeroDiffers) { EXPECT_NE(encode_attribute(0.0), encode_attribute(-0.0)); }

TEST(Encoding, MismatchedDims) {
  EXPECT_THROW(encode_attribute(NdArray<double>{{2, 2}, {1, 2, 3}}), Error);
}

// --- hashing ----------------------------------------------------------------

TEST(Hash, NistVectors) {
  EXPECT_EQ(hex_of(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(hex_of("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(hex_of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Hash, Deterministic) {
  const auto a = encode_attribute(to_array(std::vector<double>{1, 2, 3}));
  EXPECT_EQ(hash_attribute(a), hash_attribute(a));
}

TEST(Hash, HexRoundTrip) {
  const auto d = hash_attribute(encode_attribute(3.0));
  EXPECT_EQ(digest_from_hex(to_hex(d)), d);
  EXPECT_FALSE(digest_from_hex(to_hex(d).substr(1)));
  auto upper = to_hex(d);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper != to_hex(d)) EXPECT_FALSE(digest_from_hex(upper));
}

// --- recording --------------------------------------------------------------

TEST(Record, TablePattern) {
  World w = table_world();
  const auto log = run_log(w, 3);
  std::set<std::tuple<std::uint64_t, std::string, std::string>> keys;
  for (const auto& r : log.rows()) keys.emplace(r.iteration, r.component, r.attribute);
  const std::set<std::tuple<std::uint64_t, std::string, std::string>> expected{
      {1, "Transform", "world"}, {1, "Transform", "local"}, {1, "Mesh", "vertices"}, {1, "Mesh", "triangles"},
      {1, "Time", "currentTime"}, {1, "Time", "increment_step"}, {2, "Transform", "world"},
      {2, "Time", "currentTime"}, {3, "Transform", "world"}, {3, "Time", "currentTime"}};
  EXPECT_EQ(keys, expected);
}

TEST(Record, StaticMeshOnce) {
  World w = table_world();
  const auto log = run_log(w, 3);
  int n = 0;
  for (const auto& r : log.rows())
    if (r.component == "Mesh" && r.attribute == "vertices") ++n;
  EXPECT_EQ(n, 1);
}

TEST(Record, EmptyWorld) {
  World w;
  StateLog log;
  EXPECT_EQ(record_iteration(w, log, 1), 0u);
}

TEST(Record, ChangeOnly) {
  StateLog log;
  EXPECT_TRUE(log.record(EntityId{1}, 1, "A", "x", digest_of(1)));
  EXPECT_FALSE(log.record(EntityId{1}, 2, "A", "x", digest_of(1)));
  EXPECT_TRUE(log.record(EntityId{1}, 3, "A", "x", digest_of(2)));
  EXPECT_TRUE(log.record(EntityId{1}, 4, "A", "x", digest_of(1)));
  EXPECT_EQ(log.size(), 3u);
}

TEST(Record, FailedIterationNotLogged) {
  struct Boom : Processor {
    std::string_view name() const override { return "Boom"; }
    void step(World& w) override {
      if (w.iteration() == 3) fail(Errc::InvalidArgument, "boom");
    }
  };
  World w = table_world();
  w.register_processor(std::make_unique<Boom>());
  StateLog log;
  try {
    run_recorded(w, 5, log);
    FAIL();
  } catch (const StepFailure& e) {
    EXPECT_EQ(e.iteration(), 3u);
  }
  EXPECT_EQ(log.max_iteration(), 2u);
}

// --- persistence ------------------------------------------------------------

TEST(Persist, EmptyLog) { EXPECT_EQ(serialize(StateLog{}), "entity,iteration,component,attribute,hash\n"); }

TEST(Persist, RoundTrip) {
  World w = table_world();
  const auto log = run_log(w, 4);
  const auto text = serialize(log);
  std::istringstream in(text);
  const auto back = read_log(in);
  EXPECT_EQ(serialize(back), text);
  EXPECT_TRUE(compare_logs(log, back).passed());
}

TEST(Persist, CanonicalOrder) {
  StateLog log;
  log.record(EntityId{2}, 1, "B", "y", digest_of(1));
  log.record(EntityId{1}, 2, "A", "x", digest_of(2));
  log.record(EntityId{1}, 1, "B", "a", digest_of(3));
  log.record(EntityId{1}, 1, "A", "z", digest_of(4));
  const auto text = serialize(log);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> prefixes;
  while (std::getline(in, line)) prefixes.push_back(line.substr(0, line.rfind(',')));
  EXPECT_EQ(prefixes, (std::vector<std::string>{"1,1,A,z", "1,1,B,a", "2,1,B,y", "1,2,A,x"}));
}

TEST(Persist, Malformed) {
  const std::string header = "entity,iteration,component,attribute,hash\n";
  const std::string good_hash(64, 'a');
  auto code_line = [](const std::string& text) -> std::pair<Errc, int> {
    std::istringstream in(text);
    try {
      read_log(in);
    } catch (const Error& e) {
      return {e.code(), e.line().value_or(0)};
    }
    return {Errc::Io, -1};
  };
  EXPECT_EQ(code_line(header + "1,1,Time,x," + std::string(63, 'a') + "\n"), std::make_pair(Errc::FormatError, 2));
  EXPECT_EQ(code_line("bad\n"), std::make_pair(Errc::FormatError, 1));
  EXPECT_EQ(code_line(header + "1,1,Time,x\n").first, Errc::FormatError);
  EXPECT_EQ(code_line(header + "x,1,Time,x," + good_hash + "\n").first, Errc::FormatError);
  EXPECT_EQ(code_line(header + "1,1,Time,x," + good_hash + "\n1,1,Time,x," + good_hash + "\n"),
            std::make_pair(Errc::FormatError, 3));
  EXPECT_EQ(code_line(header + "1,1,Time,x," + std::string(64, 'A') + "\n").first, Errc::FormatError);
}

// --- comparison -------------------------------------------------------------

TEST(Compare, Identical) {
  World a = table_world(), b = table_world();
  EXPECT_TRUE(compare_logs(run_log(a, 3), run_log(b, 3)).passed());
}

TEST(Compare, ChangedDigest) {
  World a = table_world();
  const auto golden = run_log(a, 3);
  StateLog candidate;
  for (auto row : golden.rows()) {
    if (row.attribute == "increment_step") row.digest[0] ^= 1;
    candidate.insert(row);
  }
  const auto d = compare_logs(golden, candidate);
  ASSERT_EQ(d.changed.size(), 1u);
  EXPECT_EQ(d.changed[0].key.attribute, "increment_step");
  EXPECT_FALSE(d.passed());
}

TEST(Compare, MissingIteration) {
  World a = table_world(), b = table_world();
  const auto d = compare_logs(run_log(a, 3), run_log(b, 2));
  EXPECT_FALSE(d.missing.empty());
  EXPECT_TRUE(d.extra.empty());
  EXPECT_FALSE(d.passed());
}

TEST(Compare, DescribeAndWrite) {
  World a = table_world(), b = table_world();
  b.get<Time>(EntityId{2}).increment_step = 0.2;
  const auto d = compare_logs(run_log(a, 3), run_log(b, 3));
  const auto lines = describe_diff(d, 2);
  EXPECT_EQ(lines.size(), 2u);
  std::ostringstream csv;
  write_diff(d, csv);
  EXPECT_EQ(csv.str().rfind("kind,entity,iteration,component,attribute,golden,candidate\n", 0), 0u);
  EXPECT_NE(csv.str().find("changed,2,1,Time,currentTime,"), std::string::npos);
}
