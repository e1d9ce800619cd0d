#pragma once

#include <functional>

namespace palletproj {

// Resolves a thread count: `requested` 0 means hardware concurrency. The
// PALLETPROJ_THREADS environment variable, when set to a positive value,
// caps the result (0 keeps auto).
int effective_threads(int requested = 0);

// Splits [begin, end) into contiguous chunks, one worker thread per chunk.
// Falls back to inline execution for a single thread or tiny ranges. The
// chunks are disjoint, so the callee may write to per-index outputs freely.
void parallel_for(int begin, int end, int threads,
                  const std::function<void(int, int)> &chunk_fn);

}  // namespace palletproj
