#pragma once

#include <cstddef>
#include <functional>

namespace sshxxz {

/// Worker count used when a caller passes 0: the hardware concurrency, at least 1.
unsigned default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out dynamically; results must be written position-wise by the body.
/// The first exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace sshxxz
