#pragma once

#include <cstdint>
#include <random>

namespace noisespec {

/// Engine for stream `stream` of run `master_seed`.
///
/// Each (master_seed, stream) pair maps to an independently seeded engine, so
/// trial k draws the same numbers regardless of which thread runs it or in
/// what order trials are scheduled.
[[nodiscard]] std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t stream);

}  // namespace noisespec
