#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gkc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point behind the gkc executable. args excludes the program name.
/// Subcommands: train, curve, approx, tsybakov, compare, exponent.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

} // namespace gkc::cli
