#ifndef FDM_CLI_HPP
#define FDM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fdm::cli {

// Runs one invocation; args excludes the program name. Returns the exit
// code: 0 on success, 2 on usage errors, 1 on every other failure, which
// is reported on `err` as "error: <kind>: <message>".
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

std::string help_text();

} // namespace fdm::cli

#endif
