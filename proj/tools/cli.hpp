#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gperot::cli {

/// Exit codes: 0 success, 1 usage or input error, 2 solver did not converge.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gperot::cli
