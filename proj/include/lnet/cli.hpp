#ifndef LNET_CLI_HPP
#define LNET_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace lnet {

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the `lnet` tool: gen | train | detect | eval | bench.
/// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lnet

#endif // LNET_CLI_HPP
