#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "trisq/verify.hpp"

namespace trisq {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitBudget = 3 };

/// Largest sieve bound accepted without --unbounded-ok.
inline constexpr Integer kUncheckedSieveLimit = 1'000'000;
/// Integers per checkpoint window of a long sieve.
inline constexpr Integer kCheckpointWindow = 10'000'000;

/// Reads the optional JSON config (bounds, epsilon, threads, seed, cusp_constants)
/// on top of `base`. Unknown keys are rejected.
VerifyConfig load_config(const std::filesystem::path& path, VerifyConfig base = {});

/// Sieve of `sum` on [0, bound] whose last term is applied window by window. After each
/// window the file at `checkpoint` (if nonempty) holds a header line "claim bound cursor"
/// followed by the table words covering [0, cursor). An existing checkpoint for the same
/// claim and bound is resumed.
RepresentedSet checkpointed_sieve(const PolygonalSum& sum, Integer bound, const std::filesystem::path& checkpoint,
                                  Integer window = kCheckpointWindow, unsigned threads = 1);

/// Runs one command line (without the program name). Records go to `out` one JSON object
/// per line; the human summary and diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trisq
