#ifndef ZSML_CLI_HPP
#define ZSML_CLI_HPP

#include <string>
#include <vector>

namespace zsml::cli {

// Runs one subcommand (synth-gen, train, predict, evaluate, run, compare).
// Exit codes: 0 success, 1 usage error, 2 data/validation error.
int dispatch(const std::vector<std::string>& args);

} // namespace zsml::cli

#endif // ZSML_CLI_HPP
