#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "gemini/registry.hpp"
#include "gemini/statelog.hpp"

namespace gemini {

/// A processor error raised while running, tagged with the iteration that failed.
class StepFailure : public Error {
 public:
  StepFailure(const Error& cause, std::uint64_t iteration)
      : Error(cause.code(), "iteration " + std::to_string(iteration) + ": " + cause.message()), iteration_(iteration) {}

  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// Runs `iterations` steps while recording the state log. Processor errors
/// surface as StepFailure; iterations before the failing one stay recorded in `log`.
inline void run_recorded(World& world, std::uint64_t iterations, StateLog& log) {
  const Observer recorder[] = {state_recorder(log)};
  for (std::uint64_t i = 0; i < iterations; ++i) {
    try {
      world.step(recorder);
    } catch (const Error& e) {
      throw StepFailure(e, world.iteration());
    }
  }
}

/// Loads, flattens, validates and builds a configuration file.
inline World build_from_file(const std::filesystem::path& config, const Registry& registry,
                             const BuildOptions& options = {}) {
  return build_world(load_config(config), registry, options);
}

inline StateLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot read state log '" + path.string() + "'");
  return read_log(in);
}

struct AcceptanceResult {
  enum class Verdict { pass, mismatch, build_error, runtime_error };

  Verdict verdict = Verdict::pass;
  std::uint64_t iterations = 0;
  DiffReport diff;
  /// Set for build_error and runtime_error.
  std::optional<Error> error;

  bool passed() const { return verdict == Verdict::pass; }
};

/// Rebuilds the application from `config`, re-runs it for as many iterations
/// as the golden log covers, and compares.
inline AcceptanceResult acceptance_check(const std::filesystem::path& config, const StateLog& expected,
                                         const Registry& registry, const BuildOptions& options = {}) {
  AcceptanceResult result;
  result.iterations = expected.max_iteration();

  std::optional<World> world;
  try {
    world.emplace(build_from_file(config, registry, options));
  } catch (const Error& e) {
    result.verdict = AcceptanceResult::Verdict::build_error;
    result.error = e;
    return result;
  }
  StateLog actual;
  try {
    run_recorded(*world, result.iterations, actual);
  } catch (const StepFailure& e) {
    result.verdict = AcceptanceResult::Verdict::runtime_error;
    result.error = e;
    return result;
  }
  result.diff = compare_logs(expected, actual);
  result.verdict = result.diff.passed() ? AcceptanceResult::Verdict::pass : AcceptanceResult::Verdict::mismatch;
  return result;
}

/// Golden read errors propagate.
inline AcceptanceResult acceptance_check(const std::filesystem::path& config, const std::filesystem::path& golden,
                                         const Registry& registry, const BuildOptions& options = {}) {
  return acceptance_check(config, read_log_file(golden), registry, options);
}

}  // namespace gemini
