#pragma once

#include <iosfwd>

namespace mmcf {

/// Entry point of the mmcf tool. Returns 0 on success, 1 on a usage error and
/// 2 when a command fails at runtime.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmcf
