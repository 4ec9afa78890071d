#ifndef QEFORGE_CLI_H_
#define QEFORGE_CLI_H_

#include <string>
#include <vector>

namespace qeforge {

// Exit codes: 0 success, 1 input/config/backend error, 2 invariant violation.
int RunCli(int argc, const char* const* argv);
int RunCli(const std::vector<std::string>& args);

}  // namespace qeforge

#endif  // QEFORGE_CLI_H_
