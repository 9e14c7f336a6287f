#pragma once

namespace pae {

/// Batch command-line surface. Subcommands: train, finetune, eval, baseline,
/// robustness, adaptivity, construct-polar, export-curves. Returns the
/// process exit status (0 on success, nonzero with a diagnostic on stderr).
int cli_dispatch(int argc, const char* const* argv);

}  // namespace pae
