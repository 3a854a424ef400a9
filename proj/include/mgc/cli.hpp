/**
 * Command-line workflows over a workspace.  Every command prints a JSON
 * header line, JSON verdict lines (one object per checked degree) and
 * human-readable summary lines; JSON lines start with '{' and text lines
 * never do.
 *
 * Exit codes: 0 when every asserted property holds, 1 when one fails, 2 on
 * input errors.
 */

#ifndef MGC_CLI_HPP
#define MGC_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mgc {

/**
 * args excludes the program name.  Without --input the JSON files of
 * dataDir are loaded.
 */
int runCli(const std::vector<std::string>& args, const std::string& dataDir, std::ostream& out, std::ostream& err);

}   // namespace mgc

#endif
