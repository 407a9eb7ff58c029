#pragma once

#include <ostream>

namespace mdn {

// Subcommands: add-noise, make-shape, build-trainset, train, denoise, eval,
// bench. `--config FILE` (before or after the subcommand) loads flat
// key=value lines; keys are long option names without dashes, and flags
// given on the command line win. Returns 0 on success, 1 on usage errors,
// 2 on data errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdn
