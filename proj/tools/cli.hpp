#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;

/// Runs the `semcap` command line. `args` excludes the program name.
/// Results go to `out`, diagnostics to `err`; `in` backs "-" inputs.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

/// Path of the captions file written next to an index.
std::string captions_path_for(const std::string& index_path);

}  // namespace semcap::cli
