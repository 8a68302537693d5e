#pragma once

namespace mobs {

// Entry point behind the `mobs` binary; separated so tests can drive the
// command line in-process.  Returns the process exit code: 0 success,
// 2 invalid input, 3 numeric failure, 4 I/O failure.
int cli_main(int argc, const char* const* argv);

}  // namespace mobs
