// OpenMP glue. Worker count is capped by the DSM_THREADS environment
// variable so runs can be pinned to a deterministic resource budget.
#pragma once

namespace dsm {

/// Number of worker threads parallel kernels may use. Honors DSM_THREADS.
int worker_count();

/// True when the library was built with OpenMP support.
bool openmp_enabled();

}  // namespace dsm
