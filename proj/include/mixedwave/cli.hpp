#ifndef MIXEDWAVE_CLI_HPP
#define MIXEDWAVE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mixedwave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Verbs: curve, cusp, sequences, specfn, solve, identity, sweep, verify.
/// Flags: --n --p --q --eps --config --out --jmax --case --tmax --dr --threshold.
/// Returns 0 on success, 1 when a check fails, 2 on a configuration error.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixedwave

#endif  // MIXEDWAVE_CLI_HPP
