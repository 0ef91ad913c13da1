#ifndef FLR_PARALLEL_HPP
#define FLR_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace flr {

/// Worker count: FLR_THREADS if set and positive, otherwise all cores.
unsigned resolve_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items
/// must write to disjoint slots; scheduling order is unspecified, so callers
/// aggregate from the slots afterwards to stay deterministic. Exceptions in
/// workers are captured and rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace flr

#endif  // FLR_PARALLEL_HPP
