#pragma once

#include <ostream>

namespace hesspec::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericError = 2 };

/// Entry point behind the `hesspec` executable; `out` gets summaries, `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hesspec::cli
