#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blowtime::cli {

// Exit status: 0 success, 1 computation failure, 2 usage error.
int parse_and_dispatch(int argc, const char* const* argv);
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// args[0] is the program name.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blowtime::cli
