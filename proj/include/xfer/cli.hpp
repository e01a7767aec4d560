#ifndef XFER_CLI_HPP
#define XFER_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace xfer {

/// Runs one xferbench invocation. args excludes the program name.
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 training failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xfer

#endif
