#pragma once

namespace mondrian {

/// Apply the MK_THREADS environment variable (when set and positive) as a
/// cap on OpenMP parallelism. Call once at process start.
void apply_thread_cap_from_env();

/// Threads OpenMP will use for parallel regions right now.
int effective_threads();

}  // namespace mondrian
