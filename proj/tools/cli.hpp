#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scusum::cli {

// Exit codes: 0 success, 1 I/O or runtime failure, 2 usage error,
// 3 parameters outside the validity domain of a formula or procedure.
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidity = 3;

int cli_main(int argc, char** argv);

// args excludes the program name. Regular output goes to `out`, diagnostics
// to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scusum::cli
