#pragma once

namespace scichat::kernels {

// kSerial is the reference path kept for testing; kParallel uses OpenMP and
// must produce bit-identical results.
enum class Backend { kSerial, kParallel };

int max_threads();

}  // namespace scichat::kernels
