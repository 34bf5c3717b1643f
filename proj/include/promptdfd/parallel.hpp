// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace dfd {

/// Worker cap: DFD_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers write
/// results into per-index slots, so output is independent of scheduling.
/// The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dfd
