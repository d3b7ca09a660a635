#pragma once

#include <atomic>
#include <iosfwd>

namespace robustapi::cli {

/// Exit codes: 0 success, 1 misuse found (check) or a failed sample (ask),
/// 2 usage, I/O or schema error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Set from a signal handler to stop `ask` after the requests in flight.
std::atomic<bool>& interrupt_flag();

}  // namespace robustapi::cli
