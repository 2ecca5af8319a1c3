#pragma once

#include <iosfwd>

namespace rnagg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTruncated = 3;

/// Environment variable consulted when --external-cmd is not given.
inline constexpr const char* kExternalCmdEnv = "RNAGG_EXTERNAL_CMD";

/// Entry point of the `rnagg` tool, with the streams made explicit so tests
/// can drive it in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rnagg::cli
