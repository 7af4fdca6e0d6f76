#pragma once

namespace peelkit::cli {

// Exit codes: 0 success, 2 unreadable/unwritable or malformed files,
// 3 invalid parameters or inputs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitInvalid = 3;

int run(int argc, char** argv);

} // namespace peelkit::cli
