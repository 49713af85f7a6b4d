#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levy_ou::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 ok, 1 numerical failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace levy_ou::cli
