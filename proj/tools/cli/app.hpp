#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace planarcav::cli {

/// Runs one command line (without the program name). Results go to `out`
/// unless an --out file is given; diagnostics and error records go to `err`.
/// Returns 0 on success, 1 on a computation failure, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace planarcav::cli
