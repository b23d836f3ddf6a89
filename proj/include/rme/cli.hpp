#pragma once

namespace rme {

// Full command-line surface. Returns 0 on success, 2 on usage errors,
// 1 on runtime failures.
int cli_dispatch(int argc, const char* const* argv);

} // namespace rme
