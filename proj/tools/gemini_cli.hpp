#pragma once

// Command-line front end. Kept out of include/ so the library does not
// depend on CLI11; the tool and its tests include it directly.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gemini/acceptance.hpp"
#include "gemini/builtins.hpp"
#include "gemini/pipeline_graph.hpp"

namespace gemini::cli {

inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kWriteError = 3;
inline constexpr int kRuntimeError = 4;
inline constexpr int kMismatch = 5;
inline constexpr int kUsage = 64;

struct Environment {
  /// Value of GEMINI_SEED, if set.
  std::optional<std::string> seed;
};

namespace detail {

/// Thrown for failures while writing outputs.
struct WriteFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes through a sibling temporary file so a failed write never leaves a
/// truncated output behind.
template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteFailure("cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw WriteFailure("error while writing '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw WriteFailure("cannot write '" + path.string() + "'");
  }
}

inline std::string file_stem_for(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

class Session {
 public:
  Session(std::ostream& out, std::ostream& err, BuildOptions options) : out_(out), err_(err), options_(options) {}

  int validate(const std::string& config) {
    return guarded([&] {
      World world = build(config);
      out_ << "ok: " << world.entities().size() << " entities, " << world.pipeline().size() << " processors\n";
      return kOk;
    });
  }

  int run(const std::string& config, std::uint64_t iterations, const std::string& log_path,
          const std::string& export_dir) {
    return guarded([&] {
      World world = build(config);
      StateLog log;
      run_recorded(world, iterations, log);
      if (!log_path.empty()) write_file(log_path, [&](std::ostream& o) { write_log(log, o); });
      if (!export_dir.empty()) export_clouds(world, export_dir);
      out_ << "ran " << iterations << " iterations, " << log.size() << " log rows\n";
      return kOk;
    });
  }

  int record(const std::string& config, std::uint64_t iterations, const std::string& golden) {
    return guarded([&] {
      World world = build(config);
      StateLog log;
      run_recorded(world, iterations, log);
      if (std::filesystem::exists(golden)) {
        err_ << "note: replacing golden '" << golden << "'";
        try {
          const auto previous = read_log_file(golden).max_iteration();
          if (previous != iterations) err_ << " (iterations " << previous << " -> " << iterations << ")";
        } catch (const Error&) {
          err_ << " (previous file unreadable)";
        }
        err_ << '\n';
      }
      write_file(golden, [&](std::ostream& o) { write_log(log, o); });
      out_ << "recorded " << iterations << " iterations, " << log.size() << " log rows\n";
      return kOk;
    });
  }

  int check(const std::string& config, const std::string& golden, const std::string& diff_out) {
    return guarded([&] {
      if (!std::filesystem::exists(config)) fail(Errc::Io, "cannot read configuration '" + config + "'");
      const auto result = acceptance_check(config, read_golden(golden), default_registry(), options_);
      using V = AcceptanceResult::Verdict;
      if (result.verdict == V::build_error) throw *result.error;
      if (result.verdict == V::runtime_error) return report_runtime(*result.error);
      if (!diff_out.empty()) write_file(diff_out, [&](std::ostream& o) { write_diff(result.diff, o); });
      if (result.passed()) {
        out_ << "pass: " << result.iterations << " iterations match\n";
        return kOk;
      }
      const auto& d = result.diff;
      err_ << "acceptance mismatch: " << d.changed.size() << " changed, " << d.missing.size() << " missing, "
           << d.extra.size() << " extra\n";
      for (const auto& line : describe_diff(d, 20)) err_ << "  " << line << '\n';
      out_ << "fail\n";
      return kMismatch;
    });
  }

  int graph(const std::string& config, const std::string& out_path) {
    return guarded([&] {
      World world = build(config);
      const std::string dot = emit_pipeline_graph(world).to_dot();
      write_file(out_path, [&](std::ostream& o) { o << dot; });
      out_ << "wrote " << out_path << '\n';
      return kOk;
    });
  }

 private:
  // Any unusable golden is an input problem, whatever the parse error was.
  static StateLog read_golden(const std::string& path) {
    try {
      return read_log_file(path);
    } catch (const Error& e) {
      if (e.code() == Errc::Io) throw;
      throw Error(Errc::Io, "golden '" + path + "': " + e.what());
    }
  }

  World build(const std::string& config) { return build_from_file(config, default_registry(), options_); }

  void export_clouds(const World& world, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw WriteFailure("cannot create directory '" + dir.string() + "'");
    for (EntityId e : world.query<PointCloud>()) {
      const auto path = dir / (file_stem_for(entity_label(world, e)) + ".ply");
      write_file(path, [&](std::ostream& o) { write_ply(world.get<PointCloud>(e), o); });
    }
  }

  int report_runtime(const Error& e) {
    err_ << "error: runtime failure at " << e.what() << '\n';
    return kRuntimeError;
  }

  template <typename Fn>
  int guarded(Fn&& body) {
    try {
      return body();
    } catch (const StepFailure& e) {
      return report_runtime(e);
    } catch (const WriteFailure& e) {
      err_ << "error: " << e.what() << '\n';
      return kWriteError;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return e.code() == Errc::Io ? kIoError : kConfigError;
    }
  }

  std::ostream& out_;
  std::ostream& err_;
  BuildOptions options_;
};

}  // namespace detail

/// Entry point with argv[0] removed. Returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err, const Environment& env = {}) {
  CLI::App app{"Configuration-driven ECS simulation and acceptance testing", "gemini"};
  app.require_subcommand(1);
  std::string config, log_path, export_dir, golden, diff_out, graph_out;
  std::uint64_t iterations = 0;

  auto* validate = app.add_subcommand("validate", "Parse, resolve imports and build without running");
  validate->add_option("config", config, "Configuration file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run and optionally write the state log and point clouds");
  run_cmd->add_option("config", config, "Configuration file")->required();
  run_cmd->add_option("-n,--iterations", iterations, "Number of iterations (>= 1)")->required();
  run_cmd->add_option("--log", log_path, "State log output (CSV)");
  run_cmd->add_option("--export-dir", export_dir, "Directory for PLY exports of PointCloud components");

  auto* record = app.add_subcommand("record", "Run and write the golden state log");
  record->add_option("config", config, "Configuration file")->required();
  record->add_option("-n,--iterations", iterations, "Number of iterations (>= 1)")->required();
  record->add_option("--golden", golden, "Golden log output")->required();

  auto* check = app.add_subcommand("check", "Re-run and compare against a golden state log");
  check->add_option("config", config, "Configuration file")->required();
  check->add_option("--golden", golden, "Golden log")->required();
  check->add_option("--diff-out", diff_out, "Write the diff as CSV");

  auto* graph = app.add_subcommand("graph", "Write the pipeline graph in DOT format");
  graph->add_option("config", config, "Configuration file")->required();
  graph->add_option("--out", graph_out, "DOT output")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  BuildOptions options;
  if (env.seed) {
    std::uint64_t seed = 0;
    const auto& s = *env.seed;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      err << "error: GEMINI_SEED must be an unsigned integer, got '" << s << "'\n";
      return kUsage;
    }
    err << "note: GEMINI_SEED=" << seed << " overrides component seeds\n";
    options.seed_override = seed;
  }

  if ((run_cmd->parsed() || record->parsed()) && iterations < 1) {
    err << "error: --iterations must be at least 1\n";
    return kUsage;
  }

  detail::Session session(out, err, options);
  if (validate->parsed()) return session.validate(config);
  if (run_cmd->parsed()) return session.run(config, iterations, log_path, export_dir);
  if (record->parsed()) return session.record(config, iterations, golden);
  if (check->parsed()) return session.check(config, golden, diff_out);
  return session.graph(config, graph_out);
}

}  // namespace gemini::cli
