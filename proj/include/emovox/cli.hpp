#ifndef EMOVOX_CLI_HPP
#define EMOVOX_CLI_HPP

#include <string>
#include <vector>

namespace emovox::cli {

// Entry point for the emovox tool; `args` excludes the program name.
// Returns the process exit status.
int run(const std::vector<std::string>& args);

} // namespace emovox::cli

#endif
