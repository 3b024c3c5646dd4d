#pragma once

#include "eldyn/config.hpp"

#include <string>

namespace eldyn::cli {

/// Each command writes into c.out and returns the process exit code.
int cmd_trace(const RunConfig& c);
int cmd_render(const RunConfig& c);
int cmd_project(const RunConfig& c);
int cmd_conjugate(const RunConfig& c);
int cmd_brush(const RunConfig& c);
int cmd_verify(const RunConfig& c);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitVerification = 3;

}  // namespace eldyn::cli
